"""k-variance of probability measures.

The k-variance summarizes the spread of a measure through the cost of
optimally matching two independent k-point samples, rescaled by an
ambient-dimension rate. The package bundles exact closed forms in one
dimension, a deterministic Monte-Carlo assignment estimator for the
general case, scaling-law experiment sweeps, and a CLI.
"""

__version__ = "0.1.0"

from .analytic import (
    Bounds1D,
    OrderStatSummary,
    UNIT_SQUARE_VARINF,
    bounds_1d,
    clustered_bound,
    harmonic,
    kvar_exponential,
    kvar_from_order_stats,
    kvar_taylor_approx,
    kvar_two_point,
    kvar_uniform,
    order_stat_correlation_bound,
    order_stats_exponential,
    order_stats_mc,
    order_stats_uniform,
    uniform_order_stat_covariance,
    varinf_integral,
    varinf_tukey,
    varinf_weibull,
)
from .errors import (
    DatasetError,
    DatasetFormatError,
    DatasetParseError,
    EmptyDatasetError,
    InsufficientDataError,
    KvarError,
    ParameterError,
    ShapeError,
    SingularityError,
    UnsupportedFamilyError,
)
from .experiments import (
    SlopeFit,
    SweepConfig,
    SweepRecord,
    fit_loglog_slope,
    gmm_sweep,
    run_sweep,
    sphere_sweep,
)
from .kvariance import KVarEstimate, estimate_kvar, mcdiarmid_radius, scaling_rate
from .measures import (
    Dataset,
    DatasetHandle,
    Exponential,
    Gaussian,
    GaussianMixture,
    IndependentSum,
    Logistic,
    LowRankGaussian,
    MeasureSpec,
    Quantile1D,
    SphereUniform,
    TukeyLambda,
    TwoPoint,
    Uniform01,
    Weibull,
    bootstrap_sample,
    load_dataset,
    quantile1d,
    sample,
)
from .streams import derive_rng, derive_seed
from .transport import AssignmentResult, EmpiricalMeasure, w2sq, w2sq_1d

__all__ = [
    "__version__",
    # measures
    "MeasureSpec", "Uniform01", "Exponential", "Weibull", "TukeyLambda", "Logistic",
    "Gaussian", "GaussianMixture", "LowRankGaussian", "SphereUniform", "TwoPoint",
    "IndependentSum", "Dataset", "DatasetHandle", "Quantile1D",
    "sample", "quantile1d", "load_dataset", "bootstrap_sample",
    # transport
    "EmpiricalMeasure", "AssignmentResult", "w2sq", "w2sq_1d",
    # estimator
    "KVarEstimate", "estimate_kvar", "mcdiarmid_radius", "scaling_rate",
    # analytic
    "OrderStatSummary", "Bounds1D", "UNIT_SQUARE_VARINF", "harmonic",
    "kvar_uniform", "kvar_exponential", "varinf_weibull", "varinf_tukey",
    "kvar_two_point", "order_stats_uniform", "order_stats_exponential",
    "order_stats_mc", "uniform_order_stat_covariance", "order_stat_correlation_bound",
    "bounds_1d", "kvar_from_order_stats", "kvar_taylor_approx", "varinf_integral",
    "clustered_bound",
    # experiments
    "SweepConfig", "SweepRecord", "SlopeFit", "run_sweep", "fit_loglog_slope",
    "gmm_sweep", "sphere_sweep",
    # streams
    "derive_rng", "derive_seed",
    # errors
    "KvarError", "ParameterError", "ShapeError", "UnsupportedFamilyError",
    "DatasetError", "DatasetFormatError", "DatasetParseError", "EmptyDatasetError",
    "SingularityError", "InsufficientDataError",
]
