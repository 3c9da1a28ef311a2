"""Zero-order optimization with coordinate-memory gradient estimates.

The package bundles the JAGUAR estimator (a coordinate-wise central
difference scheme that keeps a running memory of past differences), the
classical full-coordinate and sphere-smoothing baselines, Frank-Wolfe and
gradient-descent solvers driven purely by function evaluations, noisy
oracle models, LIBSVM-style data handling, and a benchmark harness with a
command-line front end (``jaguar-bench``).
"""

__version__ = "0.1.0"

from .dataio import (
    Dataset,
    LibsvmParseError,
    load_libsvm,
    normalize,
    parse_libsvm,
    serialize_libsvm,
    synthetic_classification,
)
from .estimators import (
    EstimatorKind,
    EstimatorState,
    default_tau,
    full_coordinate_estimate,
    init_memory,
    jaguar_step,
    jaguar_stochastic_step,
    lp_smoothing_estimate,
    sample_lp_sphere,
)
from .feasible_sets import FeasibleSet, L1Ball, L2Ball, Simplex, Unconstrained
from .objectives import (
    CustomObjective,
    LogisticObjective,
    Objective,
    QuadraticObjective,
    StochasticView,
    SvmObjective,
    logistic_value,
    svm_value,
)
from .oracle import NoiseModel, RngStreams, SamplePair, ZeroOrderOracle, make_streams, rng_stream
from .solvers import (
    NanError,
    RunConfig,
    RunResult,
    Schedule,
    TraceRecord,
    fw_deterministic,
    fw_stochastic,
    gd_jaguar,
    reference_optimum,
    run_generic,
)
from .theory_checks import (
    InadmissibleSpecError,
    RecursionSpec,
    check_lemma_bound,
    random_admissible_spec,
    simulate_recursion,
)

__all__ = [
    "__version__",
    "Dataset",
    "LibsvmParseError",
    "load_libsvm",
    "normalize",
    "parse_libsvm",
    "serialize_libsvm",
    "synthetic_classification",
    "EstimatorKind",
    "EstimatorState",
    "default_tau",
    "full_coordinate_estimate",
    "init_memory",
    "jaguar_step",
    "jaguar_stochastic_step",
    "lp_smoothing_estimate",
    "sample_lp_sphere",
    "FeasibleSet",
    "L1Ball",
    "L2Ball",
    "Simplex",
    "Unconstrained",
    "CustomObjective",
    "LogisticObjective",
    "Objective",
    "QuadraticObjective",
    "StochasticView",
    "SvmObjective",
    "logistic_value",
    "svm_value",
    "NoiseModel",
    "RngStreams",
    "SamplePair",
    "ZeroOrderOracle",
    "make_streams",
    "rng_stream",
    "NanError",
    "RunConfig",
    "RunResult",
    "Schedule",
    "TraceRecord",
    "fw_deterministic",
    "fw_stochastic",
    "gd_jaguar",
    "reference_optimum",
    "run_generic",
]
