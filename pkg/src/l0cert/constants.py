"""Combinatorial matrix constants computed by exhaustive subset enumeration:
restricted minimal eigenvalues, ordered tail norms, mutual coherence and the
pseudo-inverse gap.

Everything here is exponential in principle, so enumeration refuses to visit
more than the subset cap (default 2e6, overridable via the environment
variable L0CERT_MAX_SUBSETS or an explicit force flag).
"""

from __future__ import annotations

import itertools
import math
import os
from dataclasses import dataclass

import numpy as np

from .core import ProblemInstance
from .errors import NotStandardized, RankDeficient, TooLarge

DEFAULT_MAX_SUBSETS = 2_000_000
ENV_MAX_SUBSETS = "L0CERT_MAX_SUBSETS"


def subset_cap() -> int:
    raw = os.environ.get(ENV_MAX_SUBSETS)
    return int(raw) if raw else DEFAULT_MAX_SUBSETS


def check_enumeration_cap(count: int, force: bool = False) -> None:
    cap = subset_cap()
    if not force and count > cap:
        raise TooLarge(count, cap)


def total_subsets(m: int, k_max: int) -> int:
    return sum(math.comb(m, k) for k in range(k_max + 1))


def c_stat(v, k: int) -> float:
    """Euclidean norm of the k largest-magnitude entries of v.

    k past the vector length is clamped: the ordered sum has no further terms.
    """
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    v = np.asarray(v, dtype=float).ravel()
    k = min(k, v.size)
    sq = np.sort(v * v)[::-1]
    return float(math.sqrt(np.sum(sq[:k])))


@dataclass(frozen=True)
class SigmaMinTable:
    """Running minimum over k of the smallest Gram eigenvalue across all
    k-column submatrices; entry j (0-based) is the constant for sparsity j+1.

    The per-cardinality minima are folded into a running minimum so the table
    matches the <=k definition while each cardinality is enumerated once.
    """

    values: tuple[float, ...]

    @classmethod
    def compute(cls, instance: ProblemInstance, k_max: int | None = None,
                force: bool = False) -> "SigmaMinTable":
        m = instance.m
        k_max = m if k_max is None else min(k_max, m)
        if k_max < 1:
            raise ValueError("k_max must be >= 1")
        check_enumeration_cap(total_subsets(m, k_max), force)
        values = []
        running = math.inf
        for k in range(1, k_max + 1):
            best = math.inf
            for subset in itertools.combinations(range(m), k):
                sv = np.linalg.svd(instance.phi[:, subset], compute_uv=False)
                best = min(best, float(sv[-1] ** 2))
            running = min(running, best)
            values.append(max(running, 0.0))
        return cls(tuple(values))

    @property
    def k_max(self) -> int:
        return len(self.values)

    def value(self, k: int) -> float:
        """Constant for sparsity level k; k above the table is clamped since
        every vector is at most k_max-sparse once k_max reaches m."""
        if k < 1:
            raise ValueError(f"k must be >= 1, got {k}")
        return self.values[min(k, self.k_max) - 1]

    def to_json_dict(self) -> dict:
        return {str(k): v for k, v in enumerate(self.values, start=1)}


def sigma_min_sq(instance: ProblemInstance, k: int, force: bool = False) -> float:
    """Smallest value of ||phi d||^2 / ||d||^2 over k-sparse d."""
    return SigmaMinTable.compute(instance, k_max=k, force=force).value(k)


def mutual_coherence(instance: ProblemInstance) -> float:
    """Largest |<phi_i, phi_j>| over distinct columns; columns must be unit-norm."""
    if not instance.standardized:
        raise NotStandardized()
    if instance.m == 1:
        return 0.0
    g = np.array(instance.gram)
    np.fill_diagonal(g, 0.0)
    return float(np.max(np.abs(g)))


@dataclass(frozen=True)
class PseudoInverseGapTable:
    """sup over subsets I with |I| <= j of sup_{k not in I} ||pinv(phi_I) phi_k||,
    stored per j (entry j-1); feeds the gap constant
    lam(j; M) = 1 - (M / sqrt(j)) * sup_norms[j].
    """

    sup_norms: tuple[float, ...]

    @classmethod
    def compute(cls, instance: ProblemInstance, m_max: int,
                force: bool = False) -> "PseudoInverseGapTable":
        m = instance.m
        if not 1 <= m_max <= m:
            raise ValueError(f"subset-size bound must lie in [1, m], got {m_max}")
        check_enumeration_cap(total_subsets(m, m_max), force)
        sup_norms = []
        running = 0.0
        all_cols = set(range(m))
        for j in range(1, m_max + 1):
            for subset in itertools.combinations(range(m), j):
                sub = instance.phi[:, subset]
                if np.linalg.matrix_rank(sub) < j:
                    raise RankDeficient(subset)
                pinv = np.linalg.pinv(sub)
                for k in sorted(all_cols - set(subset)):
                    running = max(running, float(np.linalg.norm(pinv @ instance.phi[:, k])))
            sup_norms.append(running)
        return cls(tuple(sup_norms))

    @property
    def m_max(self) -> int:
        return len(self.sup_norms)

    def sup_norm(self, m_size: int) -> float:
        if not 1 <= m_size <= self.m_max:
            raise ValueError(f"subset-size bound {m_size} outside computed table")
        return self.sup_norms[m_size - 1]

    def gap(self, m_size: int, multiplier: int) -> float:
        """The gap constant for subset-size bound m_size and integer multiplier;
        may be negative, in which case bounds built on it are vacuous."""
        if multiplier < 0:
            raise ValueError("multiplier must be nonnegative")
        if multiplier == 0:
            return 1.0
        return 1.0 - (multiplier / math.sqrt(m_size)) * self.sup_norm(m_size)

    def to_json_dict(self, multipliers=(1,)) -> dict:
        return {
            f"({j},{mult})": self.gap(j, mult)
            for j in range(1, self.m_max + 1)
            for mult in multipliers
        }


def pseudo_inverse_gap(instance: ProblemInstance, m_size: int, multiplier: int,
                       force: bool = False) -> float:
    """Gap constant 1 - (multiplier / sqrt(m_size)) * sup ||pinv(phi_I) phi_k||,
    the sup running over |I| <= m_size and columns k outside I.

    The first argument is the subset-size bound, the second the multiplier;
    callers that swap letters in formulas still pass by position.
    """
    if not 1 <= m_size <= instance.m - 1:
        raise ValueError(f"subset-size bound must lie in [1, m-1], got {m_size}")
    if multiplier == 0:
        return 1.0
    table = PseudoInverseGapTable.compute(instance, m_max=m_size, force=force)
    return table.gap(m_size, multiplier)


def export_tables(sigma: SigmaMinTable, gap: PseudoInverseGapTable | None = None,
                  multipliers=(1,)) -> dict:
    """JSON-ready dict: {"sigma_min_sq": {"1": ...}, "lambda": {"(m,M)": ...}}."""
    out = {"sigma_min_sq": sigma.to_json_dict()}
    if gap is not None:
        out["lambda"] = gap.to_json_dict(multipliers)
    return out
