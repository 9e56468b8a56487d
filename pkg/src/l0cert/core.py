"""Problem instances, supports, restricted least squares and the two penalized
objectives.

Conventions used package-wide:
  * columns are indexed 0..m-1 and supports are sorted tuples of column indices,
  * every array is float64 and instances are immutable after construction,
  * a coefficient entry counts as nonzero when its magnitude exceeds
    TAU_ZERO * max|x| (the counting quasi-norm needs a numerical zero).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Iterable

import numpy as np

from .errors import RankDeficient, ZeroColumn

UNIT_NORM_TOL = 1e-10
TAU_ZERO = 1e-9


def _frozen_array(a, dtype=float) -> np.ndarray:
    out = np.array(a, dtype=dtype, copy=True)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class Support:
    """A sorted set of column indices: the subset being fitted or certified."""

    indices: tuple[int, ...] = ()

    def __post_init__(self):
        idx = tuple(int(i) for i in self.indices)
        if list(idx) != sorted(set(idx)):
            raise ValueError(f"support indices must be strictly increasing: {idx}")
        if idx and idx[0] < 0:
            raise ValueError(f"negative column index in support: {idx}")
        object.__setattr__(self, "indices", idx)

    @classmethod
    def from_iterable(cls, indices: Iterable[int]) -> "Support":
        return cls(tuple(sorted(set(int(i) for i in indices))))

    @property
    def size(self) -> int:
        return len(self.indices)

    def __len__(self):
        return len(self.indices)

    def __iter__(self):
        return iter(self.indices)

    def __contains__(self, index):
        return index in self.indices

    def issubset(self, other: "Support") -> bool:
        return set(self.indices) <= set(other.indices)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.indices, dtype=int)


@dataclass(frozen=True)
class ProblemInstance:
    """An immutable regression instance: model matrix ``phi`` (n x m) and
    response ``y`` (length n).

    ``standardized`` records whether every column is unit-norm within
    UNIT_NORM_TOL; ``full_column_rank`` whether rank(phi) == m at machine
    tolerance.  Both are computed once at construction.
    """

    phi: np.ndarray
    y: np.ndarray
    standardized: bool
    full_column_rank: bool

    @classmethod
    def from_arrays(cls, phi, y) -> "ProblemInstance":
        phi = np.asarray(phi, dtype=float)
        y = np.asarray(y, dtype=float)
        if phi.ndim != 2:
            raise ValueError(f"model matrix must be 2-d, got shape {phi.shape}")
        if y.ndim != 1:
            raise ValueError(f"response must be 1-d, got shape {y.shape}")
        n, m = phi.shape
        if y.shape[0] != n:
            raise ValueError(f"response length {y.shape[0]} != matrix rows {n}")
        if m < 1:
            raise ValueError("need at least one covariate")
        if n < m:
            raise ValueError(f"underdetermined systems (n={n} < m={m}) are out of scope")
        norms = np.linalg.norm(phi, axis=0)
        standardized = bool(np.all(np.abs(norms - 1.0) <= UNIT_NORM_TOL))
        rank = int(np.linalg.matrix_rank(phi))
        return cls(
            phi=_frozen_array(phi),
            y=_frozen_array(y),
            standardized=standardized,
            full_column_rank=rank == m,
        )

    @property
    def n(self) -> int:
        return self.phi.shape[0]

    @property
    def m(self) -> int:
        return self.phi.shape[1]

    def column(self, j: int) -> np.ndarray:
        return self.phi[:, j]

    def submatrix(self, support: Support) -> np.ndarray:
        return self.phi[:, support.as_array()] if support.size else np.empty((self.n, 0))

    @cached_property
    def gram(self) -> np.ndarray:
        g = self.phi.T @ self.phi
        g.setflags(write=False)
        return g

    @cached_property
    def response_correlations(self) -> np.ndarray:
        z = self.phi.T @ self.y
        z.setflags(write=False)
        return z


@dataclass(frozen=True)
class CoefficientVector:
    """A length-m coefficient vector with a tolerance-aware support query."""

    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "values", _frozen_array(np.atleast_1d(self.values)))

    @classmethod
    def zeros(cls, m: int) -> "CoefficientVector":
        return cls(np.zeros(m))

    def support(self, tau: float = TAU_ZERO) -> Support:
        x = self.values
        scale = float(np.max(np.abs(x))) if x.size else 0.0
        if scale == 0.0:
            return Support()
        return Support(tuple(int(i) for i in np.flatnonzero(np.abs(x) > tau * scale)))

    def count_nonzero(self, tau: float = TAU_ZERO) -> int:
        return self.support(tau).size

    def l1_norm(self) -> float:
        return float(np.sum(np.abs(self.values)))

    def __len__(self):
        return len(self.values)


@dataclass(frozen=True)
class Residual:
    """The fit residual and its per-covariate correlations."""

    values: np.ndarray        # y - phi @ x
    correlations: np.ndarray  # phi.T @ (y - phi @ x)

    @classmethod
    def from_fit(cls, instance: ProblemInstance, coeffs: CoefficientVector) -> "Residual":
        eps = instance.y - instance.phi @ coeffs.values
        return cls(values=_frozen_array(eps), correlations=_frozen_array(instance.phi.T @ eps))

    def sum_of_squares(self) -> float:
        return float(self.values @ self.values)


@dataclass(frozen=True)
class StandardizeResult:
    """Standardized instance plus the per-column transform that produced it.

    A coefficient vector fitted on the standardized columns maps back to the
    original columns as ``x_original = x_std / scales``; when centering was
    requested the fit additionally absorbs an intercept
    ``-sum(offsets * x_std / scales)``.
    """

    instance: ProblemInstance
    scales: np.ndarray
    offsets: np.ndarray


def standardize_columns(matrix, center: bool = False):
    """Return (columns scaled to unit norm, scales, offsets).

    Raises ZeroColumn when a column norm (after optional centering) underflows.
    """
    matrix = np.asarray(matrix, dtype=float)
    offsets = matrix.mean(axis=0) if center else np.zeros(matrix.shape[1])
    shifted = matrix - offsets
    scales = np.linalg.norm(shifted, axis=0)
    for j, s in enumerate(scales):
        if s <= 1e-12:
            raise ZeroColumn(j)
    return shifted / scales, scales, offsets


def standardize(instance: ProblemInstance, center: bool = False) -> StandardizeResult:
    """Scale every column of the instance to unit norm (optionally centering
    first); the response is left untouched."""
    cols, scales, offsets = standardize_columns(instance.phi, center=center)
    return StandardizeResult(
        instance=ProblemInstance.from_arrays(cols, instance.y),
        scales=scales,
        offsets=offsets,
    )


def restricted_least_squares(instance: ProblemInstance, omega: Support) -> CoefficientVector:
    """Least-squares fit constrained to supp(x) within ``omega``.

    Solved through an orthogonal factorization (SVD) rather than the normal
    equations; a rank-deficient submatrix is an error, not a pseudo-inverse
    fallback.
    """
    x = np.zeros(instance.m)
    if omega.size == 0:
        return CoefficientVector(x)
    sub = instance.submatrix(omega)
    solution, _, rank, _ = np.linalg.lstsq(sub, instance.y, rcond=None)
    if rank < omega.size:
        raise RankDeficient(omega.indices)
    x[omega.as_array()] = solution
    return CoefficientVector(x)


def residual_sum_of_squares(instance: ProblemInstance, coeffs: CoefficientVector) -> float:
    eps = instance.y - instance.phi @ coeffs.values
    return float(eps @ eps)


def p0_objective(instance: ProblemInstance, coeffs: CoefficientVector, lambda0: float) -> float:
    """Residual sum of squares plus lambda0 times the number of nonzeros."""
    if lambda0 < 0:
        raise ValueError("lambda0 must be nonnegative")
    return residual_sum_of_squares(instance, coeffs) + lambda0 * coeffs.count_nonzero()


def p1_objective(instance: ProblemInstance, coeffs: CoefficientVector, lambda1: float) -> float:
    """Residual sum of squares plus lambda1 times the sum of |x_i|."""
    if lambda1 < 0:
        raise ValueError("lambda1 must be nonnegative")
    return residual_sum_of_squares(instance, coeffs) + lambda1 * coeffs.l1_norm()
