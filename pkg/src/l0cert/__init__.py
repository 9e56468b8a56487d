"""Solution paths for absolute-value-penalized regression plus polynomial-time
certificates that a support is also optimal for the counting-penalized
problem, validated against a brute-force oracle at desk scale."""

from .certificates import (
    CERTIFIED,
    NOT_CERTIFIED,
    VACUOUS,
    Certificate,
    certify_no_smaller_support,
    certify_subset_of_type0,
    certify_subset_of_type0_bounded,
    concurrent_check,
    equiangular_diff,
    kkt_check_type1,
    most_correlated_concurrent,
    most_correlated_type0,
    most_correlated_type1,
    q1_threshold,
    q_prime_threshold,
    q_threshold,
    type1_solution_on_support,
)
from .constants import (
    PseudoInverseGapTable,
    SigmaMinTable,
    c_stat,
    export_tables,
    mutual_coherence,
    pseudo_inverse_gap,
    sigma_min_sq,
)
from .core import (
    CoefficientVector,
    ProblemInstance,
    Residual,
    StandardizeResult,
    Support,
    p0_objective,
    p1_objective,
    residual_sum_of_squares,
    restricted_least_squares,
    standardize,
)
from .generators import (
    ExtremeExampleSpec,
    make_extreme,
    make_orthonormal,
    make_restrictive,
)
from .homotopy import (
    LassoPath,
    PathSegment,
    SupportCertificateBundle,
    certify_path,
    solution_at_lambda,
    solve_path,
)
from .oracle import OracleResult, brute_force_p0, lambda0_optimality_range

__version__ = "0.1.0"
