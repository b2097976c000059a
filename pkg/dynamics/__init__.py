from .integrator import (  # noqa
    integrate_second_order,
    rk4_step,
    step_second_order,
    substeps_for,
)
from .second_order import (  # noqa
    ImpulseTrain,
    SecondOrderParams,
    TimeSeries,
    VibrationTerms,
    damped_frequency,
    impulse_train_response,
    insensitivity_bandwidth,
    residual_vibration_ratio,
    sensitivity_curve,
    simulate_response,
    vibration_terms,
)
