"""Exhaustive ground truth for the counting-penalized problem: best subset per
cardinality and the global minimizer, by plain enumeration.

Plain enumeration is deliberately dumb; at desk scale it is the most
trustworthy referee for every certificate in the package.
"""

from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass

import numpy as np

from .constants import check_enumeration_cap, total_subsets
from .core import (
    CoefficientVector,
    ProblemInstance,
    Support,
    p0_objective,
    restricted_least_squares,
)

log = logging.getLogger(__name__)

TIE_TOL = 1e-10


@dataclass(frozen=True)
class OracleResult:
    """Global minimizer of RSS + lambda0 * ||x||_0 plus the per-cardinality
    minimal-RSS curve (``f_curve[c]`` is the best RSS over supports of size c).
    """

    lambda0: float
    best_support: Support
    best_x: CoefficientVector
    best_objective: float
    f_curve: tuple[float, ...]
    ties: tuple[Support, ...]
    skipped_rank_deficient: int = 0

    @property
    def best_cardinality(self) -> int:
        """Smallest cardinality whose class attains the optimum."""
        return self.best_support.size

    @property
    def min_rss_at_optimum(self) -> float:
        return self.f_curve[self.best_cardinality]

    def to_json_dict(self) -> dict:
        return {
            "lambda0": self.lambda0,
            "best_support": list(self.best_support.indices),
            "best_x": [float(v) for v in self.best_x.values],
            "best_objective": self.best_objective,
            "f_curve": {str(c): v for c, v in enumerate(self.f_curve)},
            "best_cardinality": self.best_cardinality,
            "min_rss_at_optimum": self.min_rss_at_optimum,
            "ties": [list(t.indices) for t in self.ties],
            "skipped_rank_deficient": self.skipped_rank_deficient,
        }


def brute_force_p0(instance: ProblemInstance, lambda0: float,
                   k_max: int | None = None, force: bool = False) -> OracleResult:
    """Enumerate every support up to k_max (default: all m columns) and return
    the exact optimum.

    Ties within TIE_TOL of the best objective are all recorded; the reported
    best support is the smallest-cardinality, then lexicographically-first,
    among them.  Rank-deficient submatrices are skipped (and counted), never
    pseudo-inverted.
    """
    if lambda0 < 0:
        raise ValueError("lambda0 must be nonnegative")
    m = instance.m
    k_max = m if k_max is None else min(k_max, m)
    check_enumeration_cap(total_subsets(m, k_max), force)

    y = instance.y
    f_curve = [float(y @ y)]
    best_obj = f_curve[0]
    ties: list[tuple[int, tuple[int, ...], float]] = [(0, (), best_obj)]
    skipped = 0

    for k in range(1, k_max + 1):
        best_rss_k = math.inf
        for subset in itertools.combinations(range(m), k):
            sub = instance.phi[:, subset]
            solution, _, rank, _ = np.linalg.lstsq(sub, y, rcond=None)
            if rank < k:
                skipped += 1
                continue
            eps = y - sub @ solution
            rss = float(eps @ eps)
            best_rss_k = min(best_rss_k, rss)
            obj = rss + lambda0 * k
            if obj < best_obj - TIE_TOL:
                best_obj = obj
                ties = [(k, subset, obj)]
            elif obj <= best_obj + TIE_TOL:
                best_obj = min(best_obj, obj)
                ties.append((k, subset, obj))
        f_curve.append(best_rss_k if math.isfinite(best_rss_k) else f_curve[-1])

    ties = [t for t in ties if t[2] <= best_obj + TIE_TOL]
    ties.sort(key=lambda t: (t[0], t[1]))
    best_card, best_subset, _ = ties[0]
    best_support = Support(best_subset)
    best_x = restricted_least_squares(instance, best_support)
    if skipped:
        log.warning("oracle skipped %d rank-deficient subsets", skipped)
    return OracleResult(
        lambda0=float(lambda0),
        best_support=best_support,
        best_x=best_x,
        best_objective=p0_objective(instance, best_x, lambda0),
        f_curve=tuple(f_curve),
        ties=tuple(Support(t[1]) for t in ties),
        skipped_rank_deficient=skipped,
    )


def lambda0_optimality_range(instance: ProblemInstance, support: Support,
                             oracle_result: OracleResult | None = None,
                             force: bool = False):
    """The interval of penalty weights for which the given support's size class
    wins the size/fit trade-off AND the support is the best of its size.

    Returns (lo, hi) with hi possibly math.inf, or None when the support is not
    best-in-class or no penalty weight favors its cardinality.  Endpoints come
    from pairwise crossings of the minimal-RSS curve.
    """
    if oracle_result is None:
        oracle_result = brute_force_p0(instance, lambda0=0.0, force=force)
    f = oracle_result.f_curve
    c0 = support.size
    if c0 >= len(f):
        return None
    fitted = restricted_least_squares(instance, support)
    rss = float(np.sum((instance.y - instance.phi @ fitted.values) ** 2))
    if rss > f[c0] + TIE_TOL:
        return None
    lo = 0.0
    hi = math.inf
    for c, fc in enumerate(f):
        if c < c0:
            hi = min(hi, (fc - f[c0]) / (c0 - c))
        elif c > c0:
            lo = max(lo, (f[c0] - fc) / (c - c0))
    if lo > hi:
        return None
    return (lo, hi)
