"""Instance families used throughout the test suites.

Three constructions:

  * extreme: a signal spread evenly over the last few unit-vector columns,
    with decoy columns whose signal correlations strictly dominate it; a
    stepwise solver picks every decoy (in correlation order) before touching
    any signal column, while the best subset is exactly the signal columns.
  * restrictive: a standardized block design whose best subset is the first k
    columns, yet the coherence-based tests decline to certify it.
  * orthonormal: orthonormal columns, where soft and hard thresholding make
    both penalized problems solvable in closed form.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import ProblemInstance, standardize_columns
from .errors import SpecViolation


@dataclass(frozen=True)
class ExtremeExampleSpec:
    """Parameters of the extreme family.

    ``m`` covariates total; the last ``signal_size`` are unit vectors that
    compose the signal; the leading m - signal_size decoys have signal
    correlations ``decoy_correlations`` which must satisfy the strict chain
    1 > a_1 > a_2 > ... > 1/sqrt(signal_size) > 0.
    """

    m: int
    signal_size: int
    decoy_correlations: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "decoy_correlations",
                           tuple(float(v) for v in self.decoy_correlations))
        if not 1 <= self.signal_size < self.m:
            raise SpecViolation(
                f"need 1 <= signal_size < m, got signal_size={self.signal_size}, m={self.m}")
        a = self.decoy_correlations
        if len(a) != self.m - self.signal_size:
            raise SpecViolation(
                f"need {self.m - self.signal_size} decoy correlations, got {len(a)}")
        floor = 1.0 / math.sqrt(self.signal_size)
        chain = (1.0,) + a + (floor,)
        for left, right in zip(chain, chain[1:]):
            if not left > right:
                raise SpecViolation(
                    f"correlation chain must be strictly decreasing with "
                    f"1 > a_1 > ... > 1/sqrt(signal_size)={floor:.6g} > 0; "
                    f"violated at {left!r} > {right!r}")

    @property
    def n(self) -> int:
        # unit vectors for decoys and signal columns must coexist
        return self.m


def make_extreme(spec: ExtremeExampleSpec) -> ProblemInstance:
    """Build the extreme instance; the response is the signal itself."""
    m, size = spec.m, spec.signal_size
    n = spec.n
    phi = np.zeros((n, m))
    signal = np.zeros(n)
    signal[m - size:] = 1.0 / math.sqrt(size)
    for i in range(m - size, m):
        phi[i, i] = 1.0
    for j, a_j in enumerate(spec.decoy_correlations):
        b_j = math.sqrt(1.0 - a_j * a_j)
        phi[:, j] = a_j * signal
        phi[j, j] += b_j
    instance = ProblemInstance.from_arrays(phi, signal)
    # re-verify the defining inner products after construction
    cors = phi.T @ signal
    for j, a_j in enumerate(spec.decoy_correlations):
        if abs(cors[j] - a_j) > 1e-12:
            raise SpecViolation(f"decoy column {j} has signal correlation {cors[j]!r} != {a_j!r}")
    for i in range(m - size, m):
        if abs(cors[i] - 1.0 / math.sqrt(size)) > 1e-12:
            raise SpecViolation(f"signal column {i} has correlation {cors[i]!r}")
    if np.max(np.abs(np.linalg.norm(phi, axis=0) - 1.0)) > 1e-12:
        raise SpecViolation("columns are not unit-norm after construction")
    return instance


def make_restrictive(n: int, m: int, k: int, diagonal) -> ProblemInstance:
    """Standardized block design: a k x k diagonal block over an m x m identity
    over zero padding; the response is the (centered) sum of the first k raw
    columns.

    Requires n > m > k and n >= m + k, and diagonal magnitudes nonincreasing.
    The diagonal may contain zeros: the identity block keeps every column
    nonzero, so standardization never divides by zero.
    """
    diagonal = np.asarray(diagonal, dtype=float).ravel()
    if not (n > m > k > 0):
        raise SpecViolation(f"need n > m > k > 0, got n={n}, m={m}, k={k}")
    if n < m + k:
        raise SpecViolation(f"need n >= m + k, got n={n}, m={m}, k={k}")
    if diagonal.shape[0] != k:
        raise SpecViolation(f"diagonal must have length k={k}, got {diagonal.shape[0]}")
    mags = np.abs(diagonal)
    if np.any(mags[:-1] < mags[1:]):
        raise SpecViolation(f"diagonal magnitudes must be nonincreasing, got {diagonal!r}")
    block = np.zeros((n, m))
    block[:k, :k] = np.diag(diagonal)
    block[k:k + m, :] = np.eye(m)
    cols, _, _ = standardize_columns(block, center=True)
    y = block[:, :k].sum(axis=1)
    y = y - y.mean()
    return ProblemInstance.from_arrays(cols, y)


def make_orthonormal(n: int, m: int, coeffs, seed: int | None = None,
                     noise_std: float = 0.0) -> ProblemInstance:
    """Instance with orthonormal columns and response phi @ coeffs plus
    optional seeded Gaussian noise.

    With a seed the columns come from the QR factor of a random Gaussian
    matrix; without one, the identity embedding is used (and noise, which
    needs a reproducible generator, is refused).
    """
    coeffs = np.asarray(coeffs, dtype=float).ravel()
    if n < m:
        raise SpecViolation(f"need n >= m, got n={n}, m={m}")
    if coeffs.shape[0] != m:
        raise SpecViolation(f"coeffs must have length m={m}, got {coeffs.shape[0]}")
    if seed is None:
        if noise_std > 0:
            raise SpecViolation("noise requires a seed so runs stay reproducible")
        phi = np.zeros((n, m))
        phi[:m, :m] = np.eye(m)
    else:
        rng = np.random.default_rng(seed)
        raw = rng.standard_normal((n, m))
        q, r = np.linalg.qr(raw)
        phi = q * np.sign(np.diag(r))  # fix the sign convention
    y = phi @ coeffs
    if noise_std > 0:
        y = y + noise_std * rng.standard_normal(n)
    return ProblemInstance.from_arrays(phi, y)
