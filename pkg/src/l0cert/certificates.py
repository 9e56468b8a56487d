"""Optimality certificates for subset selection.

Three families live here:

  * threshold certificates: fit a candidate support by least squares and
    compare the smallest fitted magnitude against a computable bound (q1, q,
    q'); clearing the bound proves facts about the counting-penalized optimum,
  * the exact KKT test for the absolute-value-penalized problem, the
    concurrence test combining both problems, and the equiangular difference
    vector relating their solutions,
  * coherence-based "most correlated covariates" tests that certify the top-k
    correlated columns directly from the correlation profile.

All certificates are one-sided: "certified" proves the claim, "not_certified"
claims nothing, and "vacuous" means a constant the bound relies on was
nonpositive so the test cannot speak.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .constants import (
    PseudoInverseGapTable,
    SigmaMinTable,
    c_stat,
    mutual_coherence,
)
from .core import (
    CoefficientVector,
    ProblemInstance,
    Residual,
    Support,
    restricted_least_squares,
)
from .errors import NotStandardized, RankDeficient, TiedCorrelations, VacuousConstant
from .oracle import brute_force_p0

log = logging.getLogger(__name__)

CERTIFIED = "certified"
NOT_CERTIFIED = "not_certified"
VACUOUS = "vacuous"

KIND_NO_SMALLER_SUPPORT = "no_smaller_support"
KIND_SUBSET_OF_TYPE0 = "subset_of_type0"
KIND_SUBSET_OF_TYPE0_BOUNDED = "subset_of_type0_bounded"
KIND_TYPE1_KKT = "type1_kkt"
KIND_CONCURRENT = "concurrent"
KIND_MOST_CORRELATED_TYPE0 = "most_correlated_type0"
KIND_MOST_CORRELATED_TYPE1 = "most_correlated_type1"
KIND_MOST_CORRELATED_CONCURRENT = "most_correlated_concurrent"

SIGMA_FLOOR = 1e-12
TIE_RTOL = 1e-12


@dataclass(frozen=True)
class Certificate:
    """Outcome of one sufficiency/necessity test.

    ``threshold`` is the bound the test compared against (or the worst
    condition margin for the coherence tests); ``witness`` holds every number
    needed to re-check the verdict by hand.
    """

    kind: str
    verdict: str
    threshold: float
    witness: dict[str, float] = field(default_factory=dict)
    support: tuple[int, ...] | None = None
    lambda0: float | None = None
    lambda1: float | None = None

    @property
    def certified(self) -> bool:
        return self.verdict == CERTIFIED

    def to_json_dict(self) -> dict:
        out = {
            "kind": self.kind,
            "verdict": self.verdict,
            "threshold": self.threshold if math.isfinite(self.threshold) else None,
            "witness": dict(self.witness),
        }
        if self.lambda0 is not None:
            out["lambda0"] = self.lambda0
        if self.lambda1 is not None:
            out["lambda1"] = self.lambda1
        if self.support is not None:
            out["support"] = list(self.support)
        return out


# ---------------------------------------------------------------------------
# threshold bounds


def _sigma_at(sigma: SigmaMinTable, level: int) -> float:
    value = sigma.value(level)
    if value <= SIGMA_FLOOR:
        raise VacuousConstant(
            f"restricted minimal eigenvalue at sparsity {level} is {value!r}"
        )
    return value


def q1_threshold(instance: ProblemInstance, sigma: SigmaMinTable,
                 residual: Residual, k: int, lambda0: float) -> float:
    """Bound ruling out optimal supports smaller than size k.

    Sup over competing sizes s in {0, .., k-1} of
    (c(b,1) + sqrt(c(b,k+s)^2 + (k-s)*lambda0*sig)) / sig  with
    sig the restricted minimal eigenvalue at sparsity k+s; size-and-sparsity
    arguments are clamped at the number of covariates.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    b = residual.correlations
    c1 = c_stat(b, 1)
    best = 0.0
    for s in range(0, k):
        level = min(k + s, instance.m)
        sig = _sigma_at(sigma, level)
        radicand = max(c_stat(b, level) ** 2 + (k - s) * lambda0 * sig, 0.0)
        best = max(best, (c1 + math.sqrt(radicand)) / sig)
    return best


def q_threshold(instance: ProblemInstance, sigma: SigmaMinTable,
                residual: Residual, k: int, lambda0: float,
                m_cap: int | None = None) -> float:
    """Bound on the coefficient movement toward ANY competing optimal support.

    Extends q1 with competing sizes s in {k, .., m_cap}; sizes above the number
    of covariates are impossible, so m_cap defaults to it.  In that range the
    (k-s)*lambda0 term is nonpositive; a negative radicand means supports of
    that size cannot be optimal at all, and clamping it to zero only raises the
    bound (conservative).
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    m_cap = instance.m if m_cap is None else min(m_cap, instance.m)
    b = residual.correlations
    c1 = c_stat(b, 1)
    best = q1_threshold(instance, sigma, residual, k, lambda0)
    for s in range(k, m_cap + 1):
        level = min(k + s, instance.m)
        sig = _sigma_at(sigma, level)
        radicand = max(c_stat(b, level) ** 2 + (k - s) * lambda0 * sig, 0.0)
        best = max(best, (c1 + math.sqrt(radicand)) / sig)
    return best


def q_prime_threshold(instance: ProblemInstance, sigma: SigmaMinTable,
                      gap: PseudoInverseGapTable, residual: Residual,
                      k: int, bound_on_optimum: int, lambda0: float) -> float:
    """Sharper bound needing only the sparsity-k eigenvalue, valid when the
    optimal support is known a priori to have at most ``bound_on_optimum``
    columns.

    Competing sizes whose gap constant is nonpositive are skipped (logged); if
    all are, the bound is vacuous.
    """
    if k < 1 or bound_on_optimum < 1:
        raise ValueError("k and bound_on_optimum must be >= 1")
    b = residual.correlations
    c1 = c_stat(b, 1)
    ck = c_stat(b, k)
    sig = _sigma_at(sigma, k)
    best = None
    for s in range(1, bound_on_optimum + 1):
        lam = gap.gap(k, s)
        if lam <= 0.0:
            log.warning("gap constant (%d;%d)=%g nonpositive; size %d skipped", k, s, lam, s)
            continue
        denom = (k / (k + s)) * sig * lam * lam
        radicand = max(
            ck ** 2 + lambda0 * (k * k * (k - s) / (k + s) ** 2) * sig * lam * lam,
            0.0,
        )
        term = (c1 + math.sqrt(radicand)) / denom
        best = term if best is None else max(best, term)
    if best is None:
        raise VacuousConstant(f"every gap constant ({k}; 1..{bound_on_optimum}) is nonpositive")
    return best


# ---------------------------------------------------------------------------
# threshold certificates


def _fit_and_threshold(instance, omega, lambda0, kind, threshold_fn, extra=None):
    if omega.size == 0:
        return Certificate(
            kind=kind, verdict=CERTIFIED, threshold=0.0,
            witness={"support_size": 0.0}, support=omega.indices, lambda0=lambda0,
        )
    x = restricted_least_squares(instance, omega)
    residual = Residual.from_fit(instance, x)
    min_abs = float(np.min(np.abs(x.values[omega.as_array()])))
    try:
        threshold = threshold_fn(x, residual)
    except VacuousConstant:
        return Certificate(
            kind=kind, verdict=VACUOUS, threshold=math.inf,
            witness={"min_abs_coefficient": min_abs, "support_size": float(omega.size)},
            support=omega.indices, lambda0=lambda0,
        )
    witness = {
        "min_abs_coefficient": min_abs,
        "support_size": float(omega.size),
        "residual_sum_of_squares": residual.sum_of_squares(),
    }
    if extra:
        witness.update(extra)
    verdict = CERTIFIED if min_abs > threshold else NOT_CERTIFIED
    return Certificate(
        kind=kind, verdict=verdict, threshold=float(threshold), witness=witness,
        support=omega.indices, lambda0=lambda0,
    )


def certify_no_smaller_support(instance: ProblemInstance, omega: Support,
                               lambda0: float, sigma: SigmaMinTable | None = None,
                               force: bool = False) -> Certificate:
    """Certified means: no optimal support of the counting-penalized problem
    has fewer columns than omega."""
    if sigma is None and omega.size:
        sigma = SigmaMinTable.compute(
            instance, k_max=min(2 * omega.size - 1, instance.m), force=force)
    return _fit_and_threshold(
        instance, omega, lambda0, KIND_NO_SMALLER_SUPPORT,
        lambda x, r: q1_threshold(instance, sigma, r, omega.size, lambda0),
    )


def certify_subset_of_type0(instance: ProblemInstance, omega: Support,
                            lambda0: float, sigma: SigmaMinTable | None = None,
                            m_cap: int | None = None, force: bool = False) -> Certificate:
    """Certified means: omega is contained in the optimal support of the
    counting-penalized problem."""
    if sigma is None and omega.size:
        sigma = SigmaMinTable.compute(instance, force=force)
    cap = instance.m if m_cap is None else min(m_cap, instance.m)
    return _fit_and_threshold(
        instance, omega, lambda0, KIND_SUBSET_OF_TYPE0,
        lambda x, r: q_threshold(instance, sigma, r, omega.size, lambda0, m_cap=cap),
        extra={"competing_size_cap": float(cap)},
    )


def certify_subset_of_type0_bounded(instance: ProblemInstance, omega: Support,
                                    bound_on_optimum: int, lambda0: float,
                                    sigma: SigmaMinTable | None = None,
                                    gap: PseudoInverseGapTable | None = None,
                                    force: bool = False) -> Certificate:
    """Like certify_subset_of_type0, under the caller-asserted promise that the
    optimal support has at most ``bound_on_optimum`` columns."""
    if omega.size:
        if sigma is None:
            sigma = SigmaMinTable.compute(instance, k_max=omega.size, force=force)
        if gap is None:
            gap = PseudoInverseGapTable.compute(instance, m_max=omega.size, force=force)
    return _fit_and_threshold(
        instance, omega, lambda0, KIND_SUBSET_OF_TYPE0_BOUNDED,
        lambda x, r: q_prime_threshold(
            instance, sigma, gap, r, omega.size, bound_on_optimum, lambda0),
        extra={"bound_on_optimum": float(bound_on_optimum)},
    )


# ---------------------------------------------------------------------------
# exact tests for the absolute-value penalty


def kkt_check_type1(instance: ProblemInstance, coeffs: CoefficientVector,
                    lambda1: float, tol: float = 1e-7) -> Certificate:
    """Exact optimality test for RSS + lambda1 * ||x||_1.

    On the support the residual correlations must equal (lambda1/2) * sign(x)
    within tol; off the support their magnitude may not exceed lambda1/2 + tol.
    A failed check is a verdict, never an error.
    """
    if lambda1 <= 0:
        raise ValueError("lambda1 must be positive")
    support = coeffs.support()
    cor = instance.phi.T @ (instance.y - instance.phi @ coeffs.values)
    half = lambda1 / 2.0
    on = support.as_array()
    off = np.setdiff1d(np.arange(instance.m), on)
    witness = {"support_size": float(support.size)}
    on_dev = 0.0
    if on.size:
        on_dev = float(np.max(np.abs(cor[on] - half * np.sign(coeffs.values[on]))))
        witness["max_on_support_deviation"] = on_dev
    ok = on_dev <= tol
    if off.size:
        off_excess = float(np.max(np.abs(cor[off])) - half)
        witness["max_off_support_excess"] = off_excess
        ok = ok and off_excess <= tol
    return Certificate(
        kind=KIND_TYPE1_KKT,
        verdict=CERTIFIED if ok else NOT_CERTIFIED,
        threshold=tol,
        witness=witness,
        support=support.indices,
        lambda1=float(lambda1),
    )


def type1_solution_on_support(instance: ProblemInstance, support: Support,
                              lambda1: float, max_patterns: int | None = None):
    """Solve x_I = x_ls - (lambda1/2) G^-1 sign(x_I) on the given support by
    iterating the sign pattern to a fixed point.

    Returns (coefficients, sign_vector, iterations) on success and
    (None, None, iterations) when the pattern cycles without settling.
    """
    x0 = restricted_least_squares(instance, support)
    if lambda1 == 0.0 or support.size == 0:
        return x0, np.sign(x0.values[support.as_array()]), 0
    idx = support.as_array()
    sub = instance.phi[:, idx]
    gram = sub.T @ sub
    ls = x0.values[idx]
    signs = np.where(np.sign(ls) >= 0, 1.0, -1.0)
    cap = 2 ** support.size if max_patterns is None else max_patterns
    seen = set()
    for iteration in range(cap + 1):
        key = tuple(signs)
        if key in seen:
            return None, None, iteration
        seen.add(key)
        shift = np.linalg.solve(gram, signs)
        candidate = ls - (lambda1 / 2.0) * shift
        new_signs = np.where(candidate > 0, 1.0, np.where(candidate < 0, -1.0, 0.0))
        if np.array_equal(new_signs, signs):
            x = np.zeros(instance.m)
            x[idx] = candidate
            return CoefficientVector(x), signs, iteration
        if np.any(new_signs == 0.0):
            return None, None, iteration
        signs = new_signs
    return None, None, cap


def concurrent_check(instance: ProblemInstance, support: Support,
                     lambda0: float, lambda1: float, mode: str = "certificate",
                     tol: float = 1e-8, force: bool = False) -> Certificate:
    """Test whether the support is optimal for both penalized problems at once.

    The absolute-value side is decided exactly: the candidate solution on the
    support comes from the sign fixed point and must pass the KKT test.  The
    counting side is global, so it delegates per ``mode``: "certificate" runs
    certify_subset_of_type0, "oracle" asks the brute-force referee.  The
    witness records the identity linking the two solutions on the support
    (their gap must equal (lambda1/2) G^-1 sign within tol).
    """
    if mode not in ("certificate", "oracle"):
        raise ValueError(f"mode must be 'certificate' or 'oracle', got {mode!r}")
    idx = support.as_array()
    if support.size and np.linalg.matrix_rank(instance.phi[:, idx]) < support.size:
        raise RankDeficient(support.indices)
    x0 = restricted_least_squares(instance, support)
    witness: dict[str, float] = {"support_size": float(support.size)}

    if lambda1 == 0.0:
        x1, signs = x0, np.sign(x0.values[idx])
        witness["eq3_residual"] = 0.0
        type1_ok = True
    else:
        x1, signs, iterations = type1_solution_on_support(instance, support, lambda1)
        witness["sign_iterations"] = float(iterations)
        if x1 is None:
            witness["sign_cycle_not_converged"] = 1.0
            log.warning("sign fixed point did not settle on support %s", support.indices)
            return Certificate(
                kind=KIND_CONCURRENT, verdict=NOT_CERTIFIED, threshold=tol,
                witness=witness, support=support.indices,
                lambda0=lambda0, lambda1=lambda1,
            )
        if support.size:
            sub = instance.phi[:, idx]
            gram = sub.T @ sub
            expected_gap = np.linalg.solve(gram, (lambda1 / 2.0) * signs)
            eq3 = float(np.max(np.abs((x0.values - x1.values)[idx] - expected_gap)))
        else:
            eq3 = 0.0
        witness["eq3_residual"] = eq3
        kkt = kkt_check_type1(instance, x1, lambda1, tol=max(tol, 1e-9))
        type1_ok = kkt.certified and eq3 <= tol
        witness["kkt_max_off_support_excess"] = kkt.witness.get("max_off_support_excess", 0.0)
        witness["kkt_max_on_support_deviation"] = kkt.witness.get("max_on_support_deviation", 0.0)

    if mode == "oracle":
        result = brute_force_p0(instance, lambda0, force=force)
        type0_ok = support.indices in {t.indices for t in result.ties}
        witness["oracle_best_objective"] = result.best_objective
    else:
        sub_cert = certify_subset_of_type0(instance, support, lambda0, force=force)
        type0_ok = sub_cert.certified
        witness["subset_of_type0_threshold"] = sub_cert.threshold
        witness["subset_of_type0_min_abs"] = sub_cert.witness.get("min_abs_coefficient", 0.0)

    verdict = CERTIFIED if (type1_ok and type0_ok) else NOT_CERTIFIED
    return Certificate(
        kind=KIND_CONCURRENT, verdict=verdict, threshold=tol, witness=witness,
        support=support.indices, lambda0=lambda0, lambda1=lambda1,
    )


def equiangular_diff(instance: ProblemInstance, support: Support,
                     lambda1: float, signs) -> np.ndarray:
    """The prediction-space gap (lambda1/2) * phi_I G^-1 sign between the two
    solutions at concurrence; its sign-adjusted inner product with every active
    column is the same constant lambda1/2."""
    signs = np.asarray(signs, dtype=float).ravel()
    if signs.shape[0] != support.size:
        raise ValueError("sign vector length must match the support size")
    if support.size == 0:
        return np.zeros(instance.n)
    idx = support.as_array()
    sub = instance.phi[:, idx]
    if np.linalg.matrix_rank(sub) < support.size:
        raise RankDeficient(support.indices)
    gram = sub.T @ sub
    return (lambda1 / 2.0) * (sub @ np.linalg.solve(gram, signs))


# ---------------------------------------------------------------------------
# most-correlated-covariates tests


def _sorted_correlations(instance: ProblemInstance, k: int):
    """Correlations sorted by decreasing magnitude (stable), with the top-k
    boundary required to be strict; interior ties break by column index with a
    warning."""
    z = instance.response_correlations
    order = np.argsort(-np.abs(z), kind="stable")
    zs = z[order]
    az = np.abs(zs)
    for pos in range(len(zs) - 1):
        gap_tol = TIE_RTOL * max(az[pos], 1.0)
        if az[pos] - az[pos + 1] <= gap_tol:
            if pos + 1 == k:
                raise TiedCorrelations(pos + 1, float(az[pos]))
            log.warning(
                "correlation magnitudes tie at sorted positions %d/%d; broken by column index",
                pos + 1, pos + 2,
            )
    return zs, order


def most_correlated_type0(instance: ProblemInstance, k: int, lambda0: float) -> Certificate:
    """Certify that the k most response-correlated columns are the optimal
    support of the counting-penalized problem, from coherence alone.

    Three inequalities are evaluated literally, with Delta = n * mu in the
    second; the verdict needs all three.  When 1 - (k-1) mu <= 0 the test is
    vacuous; when Delta >= 1 the second condition can only hold with a negative
    right side, which the witness flags but still evaluates as written.
    """
    if not 1 <= k <= instance.m:
        raise ValueError(f"k must be in [1, m], got {k}")
    if not instance.standardized:
        raise NotStandardized()
    zs, order = _sorted_correlations(instance, k)
    mu = mutual_coherence(instance)
    top = tuple(sorted(int(i) for i in order[:k]))
    gate = 1.0 - (k - 1) * mu
    z_k = float(zs[k - 1])
    z_k1 = float(zs[k]) if k < instance.m else 0.0
    witness = {
        "mu": mu,
        "one_minus_km1_mu": gate,
        "z_k": z_k,
        "z_k_plus_1": z_k1,
    }
    if gate <= 0.0:
        return Certificate(
            kind=KIND_MOST_CORRELATED_TYPE0, verdict=VACUOUS, threshold=math.inf,
            witness=witness, support=top, lambda0=lambda0,
        )
    top_energy = float(np.sum(zs[:k] ** 2))
    delta = instance.n * mu
    cond4_lhs = gate * z_k ** 2
    cond4_rhs = 2.0 * (k - 1) ** 2 * mu + z_k1 ** 2 * (1.0 + (k - 1) * mu)
    cond5_lhs = z_k1 ** 2
    cond5_rhs = lambda0 * (1.0 - delta) - ((2 * k - 1) * mu / (1.0 + (k - 1) * mu)) * top_energy
    cond6_lhs = z_k ** 2
    cond6_rhs = lambda0 + ((2 * k - 3) * mu / (1.0 + (k - 1) * mu)) * top_energy
    witness.update({
        "delta": delta,
        "delta_ge_one": 1.0 if delta >= 1.0 else 0.0,
        "top_correlation_energy": top_energy,
        "cond4_lhs": cond4_lhs, "cond4_rhs": cond4_rhs,
        "cond5_lhs": cond5_lhs, "cond5_rhs": cond5_rhs,
        "cond6_lhs": cond6_lhs, "cond6_rhs": cond6_rhs,
    })
    margins = (cond4_lhs - cond4_rhs, cond5_rhs - cond5_lhs, cond6_lhs - cond6_rhs)
    ok = all(margin >= 0.0 for margin in margins)
    return Certificate(
        kind=KIND_MOST_CORRELATED_TYPE0,
        verdict=CERTIFIED if ok else NOT_CERTIFIED,
        threshold=float(min(margins)),
        witness=witness,
        support=top,
        lambda0=lambda0,
    )


def most_correlated_type1(instance: ProblemInstance, k: int, lambda1: float) -> Certificate:
    """Certify that the k most response-correlated columns carry the solution
    of the absolute-value-penalized problem at lambda1."""
    if not 1 <= k <= instance.m:
        raise ValueError(f"k must be in [1, m], got {k}")
    if not instance.standardized:
        raise NotStandardized()
    zs, order = _sorted_correlations(instance, k)
    mu = mutual_coherence(instance)
    top = tuple(sorted(int(i) for i in order[:k]))
    gate = 1.0 - (k - 1) * mu
    z_k1 = float(zs[k]) if k < instance.m else 0.0
    witness = {"mu": mu, "one_minus_km1_mu": gate, "z_k_plus_1": z_k1}
    if gate <= 0.0:
        return Certificate(
            kind=KIND_MOST_CORRELATED_TYPE1, verdict=VACUOUS, threshold=math.inf,
            witness=witness, support=top, lambda1=lambda1,
        )
    half = lambda1 / 2.0
    lhs = half - abs(z_k1)
    rhs = (math.sqrt(k) * mu / gate) * math.sqrt(float(np.sum((np.abs(zs[:k]) + half) ** 2)))
    witness.update({"cond7_lhs": lhs, "cond7_rhs": rhs})
    return Certificate(
        kind=KIND_MOST_CORRELATED_TYPE1,
        verdict=CERTIFIED if lhs >= rhs else NOT_CERTIFIED,
        threshold=float(lhs - rhs),
        witness=witness,
        support=top,
        lambda1=lambda1,
    )


def combine_concurrent_verdicts(type0_verdict: str, type1_verdict: str) -> str:
    """Conjunction of the two sub-verdicts: certified needs both; any
    not-certified wins over vacuous."""
    if type0_verdict == CERTIFIED and type1_verdict == CERTIFIED:
        return CERTIFIED
    if NOT_CERTIFIED in (type0_verdict, type1_verdict):
        return NOT_CERTIFIED
    return VACUOUS


def most_correlated_concurrent(instance: ProblemInstance, k: int,
                               lambda0: float, lambda1: float) -> Certificate:
    """Certify the top-k correlated columns for both problems at once."""
    c0 = most_correlated_type0(instance, k, lambda0)
    c1 = most_correlated_type1(instance, k, lambda1)
    witness = {f"type0_{key}": value for key, value in c0.witness.items()}
    witness.update({f"type1_{key}": value for key, value in c1.witness.items()})
    return Certificate(
        kind=KIND_MOST_CORRELATED_CONCURRENT,
        verdict=combine_concurrent_verdicts(c0.verdict, c1.verdict),
        threshold=float(min(c0.threshold, c1.threshold)),
        witness=witness,
        support=c0.support,
        lambda0=lambda0,
        lambda1=lambda1,
    )
