from .unscented import (
    SigmaSet,
    UkfConfig,
    UkfState,
    UnscentedKalmanFilter,
    generate_sigma_points,
    ukf_predict,
    ukf_update,
    ut_weights,
)
from .identification import (
    OMEGA_FLOOR,
    ZETA_MAX,
    AugmentedPlantState,
    EpochRecord,
    IdentificationResult,
    identify_parameters,
    training_error,
)
from .identifiers import (
    FixedIdentifier,
    GridSearchIdentifier,
    ParameterIdentifier,
    UkfIdentifier,
)
