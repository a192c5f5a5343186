"""Cooperative coevolution with surrogates for chain-structured spaces."""

from .coevolution import (
    VARIANTS,
    CoevolutionRun,
    EngineSettings,
    VariantFlags,
    run_random_search,
    run_sacc_baseline,
    run_shcho,
)
from .decomposition import (
    DecompositionPlan,
    Segment,
    exclusive_decompose,
    pair_partition,
    sod_decompose,
)
from .errors import (
    BudgetExhausted,
    DimensionMismatchError,
    EngineError,
    EvaluatorIOError,
    InsufficientDataError,
    InvalidParameterError,
    InvalidSubVectorError,
    NoNextSegmentError,
    StaleStateError,
)
from .evolve import (
    EvolveParams,
    Individual,
    ParetoFront,
    ga_optimize,
    knee_point,
    non_dominated_sort,
    nsga2_optimize,
)
from .external import ExternalChain, external_connect
from .problems import (
    BudgetLedger,
    ChainProblem,
    PropagatedState,
    make_benchmark,
)
from .space import (
    HyperparameterSpec,
    SolutionVector,
    SpaceLayout,
    SubVector,
    layout_from_json,
    normalize,
    random_sample,
    random_solution,
    repair,
)
from .surrogate import (
    RbfModel,
    TrainingSet,
    fit_rbf,
    localized_augment,
    predict_rbf,
    training_set,
)

__all__ = [
    "VARIANTS",
    "BudgetExhausted",
    "BudgetLedger",
    "ChainProblem",
    "CoevolutionRun",
    "DecompositionPlan",
    "DimensionMismatchError",
    "EngineError",
    "EngineSettings",
    "EvaluatorIOError",
    "EvolveParams",
    "ExternalChain",
    "HyperparameterSpec",
    "Individual",
    "InsufficientDataError",
    "InvalidParameterError",
    "InvalidSubVectorError",
    "NoNextSegmentError",
    "ParetoFront",
    "PropagatedState",
    "RbfModel",
    "Segment",
    "SolutionVector",
    "SpaceLayout",
    "StaleStateError",
    "SubVector",
    "TrainingSet",
    "VariantFlags",
    "exclusive_decompose",
    "external_connect",
    "fit_rbf",
    "ga_optimize",
    "knee_point",
    "layout_from_json",
    "localized_augment",
    "make_benchmark",
    "non_dominated_sort",
    "normalize",
    "nsga2_optimize",
    "pair_partition",
    "predict_rbf",
    "random_sample",
    "random_solution",
    "repair",
    "run_random_search",
    "run_sacc_baseline",
    "run_shcho",
    "sod_decompose",
    "training_set",
]

__version__ = "0.1.0"
