"""Exact Wasserstein geometry over the discrete metric on the positive integers.

Measures carry exact rational masses by default; distances, optimal
couplings, allocation families and the isometric embeddings they generate
are all exact, with a binary64 view where a float is the natural answer.
"""

from .embed import (
    Certificate,
    CertificateError,
    apply_embedding,
    check_isometric_embedding,
    classify_embedding,
    embedding_oracle,
    extract_family,
    recover_permutation,
)
from .family import (
    AllocationFamily,
    DiracCurve,
    LinearGauge,
    LogGauge,
    PiecewiseCurve,
    TwoPointSplit,
    builtin_family,
    dyadic_prime_curve_at,
    example1_family,
    example2_family,
    n_of_c,
    permutation_family,
    verify_family,
)
from .harness import GeneratorConfig, gen_family, gen_measure, gen_two_point, run_suite
from .measure import (
    ProbabilityMeasure,
    SparseMeasure,
    TruncatedMeasure,
    dirac,
    measure_from_json,
    measure_to_json,
    meet,
    push_forward,
    support,
    total_mass,
)
from .metric import (
    Coupling,
    PParameter,
    coupling_cost,
    optimal_coupling,
    oracle_min_cost,
    validate_coupling,
    wasserstein_distance,
    wasserstein_power,
)

__version__ = "0.1.0"

__all__ = [
    "AllocationFamily",
    "Certificate",
    "CertificateError",
    "Coupling",
    "DiracCurve",
    "GeneratorConfig",
    "LinearGauge",
    "LogGauge",
    "PParameter",
    "PiecewiseCurve",
    "ProbabilityMeasure",
    "SparseMeasure",
    "TruncatedMeasure",
    "TwoPointSplit",
    "apply_embedding",
    "builtin_family",
    "check_isometric_embedding",
    "classify_embedding",
    "coupling_cost",
    "dirac",
    "dyadic_prime_curve_at",
    "embedding_oracle",
    "example1_family",
    "example2_family",
    "extract_family",
    "gen_family",
    "gen_measure",
    "gen_two_point",
    "measure_from_json",
    "measure_to_json",
    "meet",
    "n_of_c",
    "optimal_coupling",
    "oracle_min_cost",
    "permutation_family",
    "push_forward",
    "recover_permutation",
    "run_suite",
    "support",
    "total_mass",
    "validate_coupling",
    "verify_family",
    "wasserstein_distance",
    "wasserstein_power",
]
