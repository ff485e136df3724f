"""Sequence norms, summing-operator norms, and domination witnesses on
finite-dimensional weighted l_p spaces."""

from .config import DEFAULTS, thread_count
from .opnorms import (
    LinearOperator,
    OpNormEstimate,
    PsiComposeResult,
    aniso_summing_norm,
    operator_norm,
    padding_injection,
    pi_qp,
    psi_compose_check,
    weakly_aniso_norm,
)
from .optimize import (
    Certificate,
    LPProblem,
    LPSolution,
    LPStatus,
    NumericFailure,
    exchange_minimize,
    lp_solve,
    multistart_maximize,
    project_to_simplex,
)
from .pietsch import (
    DominationWitness,
    FamilyMeasure,
    build_dual_grid,
    build_family_grid,
    build_test_vectors,
    domination_lp_aniso,
    domination_lp_weak,
    verify_domination,
)
from .seqnorms import (
    DiscreteMeasure,
    Factorization,
    FunctionalFamily,
    MixedNormInterval,
    NormEstimate,
    SequenceFamily,
    aniso_norm,
    aniso_objective,
    holder_mixed_bound,
    maurey_norm,
    maurey_value,
    mixed_conjugate_index,
    mixed_norm,
    mixed_upper,
    psi_apply,
    strong_norm,
    weak_norm,
)
from .spaces import (
    DegenerateRegimeError,
    DimensionMismatchError,
    ParamRegime,
    Regime,
    Space,
    classify_params,
    conjugate_exponent,
    dual_extreme_points,
    dual_norm,
    norm,
    pair,
)
from .suite import CATALOGUE, CheckResult, CheckSpec, SuiteReport, run_check, run_suite

__version__ = "0.1.0"

__all__ = [
    "DEFAULTS",
    "thread_count",
    "LinearOperator",
    "OpNormEstimate",
    "PsiComposeResult",
    "aniso_summing_norm",
    "operator_norm",
    "padding_injection",
    "pi_qp",
    "psi_compose_check",
    "weakly_aniso_norm",
    "Certificate",
    "LPProblem",
    "LPSolution",
    "LPStatus",
    "NumericFailure",
    "exchange_minimize",
    "lp_solve",
    "multistart_maximize",
    "project_to_simplex",
    "DominationWitness",
    "FamilyMeasure",
    "build_dual_grid",
    "build_family_grid",
    "build_test_vectors",
    "domination_lp_aniso",
    "domination_lp_weak",
    "verify_domination",
    "DiscreteMeasure",
    "Factorization",
    "FunctionalFamily",
    "MixedNormInterval",
    "NormEstimate",
    "SequenceFamily",
    "aniso_norm",
    "aniso_objective",
    "holder_mixed_bound",
    "maurey_norm",
    "maurey_value",
    "mixed_conjugate_index",
    "mixed_norm",
    "mixed_upper",
    "psi_apply",
    "strong_norm",
    "weak_norm",
    "DegenerateRegimeError",
    "DimensionMismatchError",
    "ParamRegime",
    "Regime",
    "Space",
    "classify_params",
    "conjugate_exponent",
    "dual_extreme_points",
    "dual_norm",
    "norm",
    "pair",
    "CATALOGUE",
    "CheckResult",
    "CheckSpec",
    "SuiteReport",
    "run_check",
    "run_suite",
    "__version__",
]
