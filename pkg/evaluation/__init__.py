from .metrics import (  # noqa
    METRICS,
    AggregatedMetric,
    MetricsTriple,
    aggregate_trials,
    compute_metrics,
)
from .wilcoxon import (  # noqa
    WilcoxonResult,
    signed_rank_distribution,
    wilcoxon_signed_rank,
)
from .comparison import (  # noqa
    METHOD_NAMES,
    EvalReport,
    MethodPipeline,
    ProtocolConfig,
    TrialOutcome,
    build_methods,
    evaluation_command,
    reference_params,
    run_comparison,
    shaped_response,
)
from .plotting import ResultPlotter  # noqa
