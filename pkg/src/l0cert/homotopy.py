"""Stepwise homotopy solver for the absolute-value-penalized problem.

The solver traces the full piecewise-linear solution path in the penalty
weight: starting from the weight at which the all-zero vector is optimal, it
repeatedly moves the active coefficients along the equiangular direction,
admits the covariate whose residual correlation catches up with the active
ones, and drops a covariate whose coefficient crosses zero.  Writing the
active-set stationarity as phi_A' (y - phi x) = (lam/2) sign(x_A) makes the
coefficients affine in lam on every segment:

    x_A(lam) = x_ls_A - (lam/2) (phi_A' phi_A)^{-1} sign(x_A)

and both event types reduce to linear equations in lam.  Simultaneous events
(beyond a tiny relative tolerance) are a degeneracy: covariate entry order is
an assertable output, so ties either raise or truncate the path, never break
arbitrarily.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .certificates import (
    certify_no_smaller_support,
    certify_subset_of_type0,
    certify_subset_of_type0_bounded,
)
from .constants import PseudoInverseGapTable, SigmaMinTable
from .core import CoefficientVector, ProblemInstance, Support
from .errors import DegenerateTie, L0CertError, OutOfRange, RankDeficient

EVENT_ENTER = "enter"
EVENT_LEAVE = "leave"
EVENT_TERMINAL = "terminal"

TIE_RTOL = 1e-10
_EVENT_GUARD = 1e-12  # candidates this close (relatively) to the current breakpoint are "now"


@dataclass(frozen=True)
class PathEvent:
    kind: str
    index: int | None = None

    def to_json_dict(self) -> dict:
        out = {"kind": self.kind}
        if self.index is not None:
            out["index"] = self.index
        return out


@dataclass(frozen=True)
class PathSegment:
    """One maximal interval of penalty weights with fixed support and signs.

    ``event`` describes what happens at ``lambda_lo`` (the lower breakpoint);
    the coefficient vector is affine between the stored endpoint vectors.
    ``lambda_hi == lambda_lo`` only for the degenerate all-zero path.
    """

    lambda_hi: float
    lambda_lo: float
    support: tuple[int, ...]
    x_at_hi: np.ndarray
    x_at_lo: np.ndarray
    event: PathEvent

    def interpolate(self, lam: float) -> np.ndarray:
        if self.lambda_hi == self.lambda_lo:
            return np.array(self.x_at_lo)
        t = (lam - self.lambda_lo) / (self.lambda_hi - self.lambda_lo)
        return self.x_at_lo + t * (self.x_at_hi - self.x_at_lo)

    def to_json_dict(self) -> dict:
        return {
            "lambda_hi": self.lambda_hi,
            "lambda_lo": self.lambda_lo,
            "support": list(self.support),
            "x_at_hi": [float(v) for v in self.x_at_hi],
            "x_at_lo": [float(v) for v in self.x_at_lo],
            "event": self.event.to_json_dict(),
        }


@dataclass(frozen=True)
class LassoPath:
    """Ordered segments from the all-zero regime down to the requested floor."""

    lambda_max: float
    lambda_floor: float
    segments: tuple[PathSegment, ...]
    selection_order: tuple[int, ...]
    tie: dict | None = None

    @property
    def m(self) -> int:
        return len(self.segments[0].x_at_hi)

    @property
    def lambda_reached(self) -> float:
        return self.segments[-1].lambda_lo

    def distinct_supports(self) -> list[Support]:
        seen: list[tuple[int, ...]] = []
        for seg in self.segments:
            if seg.support not in seen:
                seen.append(seg.support)
        return [Support(s) for s in seen]

    def to_json_dict(self) -> dict:
        return {
            "lambda_max": self.lambda_max,
            "lambda_floor": self.lambda_floor,
            "lambda_reached": self.lambda_reached,
            "selection_order": list(self.selection_order),
            "degenerate_tie": self.tie,
            "segments": [seg.to_json_dict() for seg in self.segments],
        }


def _active_state(phi, y, active, signs):
    """Least-squares vector, equiangular shift and direction for the active set."""
    sub = phi[:, active]
    q, r = np.linalg.qr(sub)
    diag = np.abs(np.diag(r))
    if diag.size and diag.min() <= 1e-12 * max(diag.max(), 1.0):
        raise RankDeficient(active)
    x_ls = np.linalg.solve(r, q.T @ y)
    shift = np.linalg.solve(r, np.linalg.solve(r.T, np.asarray(signs)))
    direction = sub @ shift
    resid0 = y - sub @ x_ls
    return x_ls, shift, resid0, direction


def _coeffs_at(m, active, x_ls, shift, lam):
    x = np.zeros(m)
    x[active] = x_ls - (lam / 2.0) * shift
    return x


def solve_path(instance: ProblemInstance, lambda_floor: float = 0.0,
               tie_policy: str = "error", tie_rtol: float = TIE_RTOL) -> LassoPath:
    """Trace the full solution path from 2*max|phi' y| down to lambda_floor.

    tie_policy "error" raises DegenerateTie on simultaneous events;
    "stop" truncates the path cleanly at the tie instead.
    """
    if lambda_floor < 0:
        raise ValueError("lambda_floor must be nonnegative")
    if tie_policy not in ("error", "stop"):
        raise ValueError(f"tie_policy must be 'error' or 'stop', got {tie_policy!r}")
    phi, y, m = instance.phi, instance.y, instance.m
    z = phi.T @ y
    lambda_max = 2.0 * float(np.max(np.abs(z))) if m else 0.0

    if lambda_floor >= lambda_max:
        zero = np.zeros(m)
        seg = PathSegment(lambda_hi=lambda_floor, lambda_lo=lambda_floor,
                          support=(), x_at_hi=zero, x_at_lo=zero,
                          event=PathEvent(EVENT_TERMINAL))
        return LassoPath(lambda_max=lambda_max, lambda_floor=lambda_floor,
                         segments=(seg,), selection_order=())

    # first entry: the covariate with the largest absolute correlation
    first_candidates = [(2.0 * abs(z[j]), j) for j in range(m)]
    first_candidates.sort(reverse=True)
    tie = None
    if m > 1 and first_candidates[0][0] - first_candidates[1][0] <= tie_rtol * lambda_max:
        tied = [j for v, j in first_candidates if first_candidates[0][0] - v <= tie_rtol * lambda_max]
        if tie_policy == "error":
            raise DegenerateTie(tied, lambda_max)
        zero = np.zeros(m)
        seg = PathSegment(lambda_hi=lambda_max, lambda_lo=lambda_max,
                          support=(), x_at_hi=zero, x_at_lo=zero,
                          event=PathEvent(EVENT_TERMINAL))
        return LassoPath(lambda_max=lambda_max, lambda_floor=lambda_floor,
                         segments=(seg,), selection_order=(),
                         tie={"lambda": lambda_max, "indices": tied})

    first = int(np.argmax(np.abs(z)))
    active: list[int] = [first]
    signs: list[float] = [1.0 if z[first] > 0 else -1.0]
    selection_order: list[int] = [first]
    segments: list[PathSegment] = []
    lam_cur = lambda_max

    for _ in range(16 * m + 16):
        x_ls, shift, resid0, direction = _active_state(phi, y, active, signs)
        x_hi = _coeffs_at(m, active, x_ls, shift, lam_cur)
        guard = lam_cur * (1.0 - _EVENT_GUARD)

        # entry candidates: inactive correlation r_j + (lam/2) g_j meets +-lam/2
        candidates: list[tuple[float, str, int, float]] = []
        inactive = [j for j in range(m) if j not in active]
        if inactive:
            r_in = phi[:, inactive].T @ resid0
            g_in = phi[:, inactive].T @ direction
            for r_j, g_j, j in zip(r_in, g_in, inactive):
                if abs(1.0 - g_j) > 1e-14:
                    lam = 2.0 * r_j / (1.0 - g_j)
                    if 0.0 < lam <= guard:
                        candidates.append((lam, EVENT_ENTER, j, 1.0))
                if abs(1.0 + g_j) > 1e-14:
                    lam = -2.0 * r_j / (1.0 + g_j)
                    if 0.0 < lam <= guard:
                        candidates.append((lam, EVENT_ENTER, j, -1.0))
        # leave candidates: active coefficient crosses zero
        for pos, i in enumerate(active):
            if abs(shift[pos]) > 1e-14:
                lam = 2.0 * x_ls[pos] / shift[pos]
                if 0.0 < lam <= guard:
                    candidates.append((lam, EVENT_LEAVE, i, 0.0))

        candidates = [c for c in candidates if c[0] > lambda_floor]
        if not candidates:
            x_lo = _coeffs_at(m, active, x_ls, shift, lambda_floor)
            segments.append(PathSegment(
                lambda_hi=lam_cur, lambda_lo=lambda_floor, support=tuple(sorted(active)),
                x_at_hi=x_hi, x_at_lo=x_lo, event=PathEvent(EVENT_TERMINAL)))
            break

        candidates.sort(reverse=True)
        lam_next, kind, index, enter_sign = candidates[0]
        close = [c for c in candidates if lam_next - c[0] <= tie_rtol * lam_next and c[2] != index]
        if close:
            tied = sorted({index} | {c[2] for c in close})
            if tie_policy == "error":
                raise DegenerateTie(tied, lam_next)
            x_lo = _coeffs_at(m, active, x_ls, shift, lam_next)
            segments.append(PathSegment(
                lambda_hi=lam_cur, lambda_lo=lam_next, support=tuple(sorted(active)),
                x_at_hi=x_hi, x_at_lo=x_lo, event=PathEvent(EVENT_TERMINAL)))
            tie = {"lambda": lam_next, "indices": tied}
            break

        x_lo = _coeffs_at(m, active, x_ls, shift, lam_next)
        segments.append(PathSegment(
            lambda_hi=lam_cur, lambda_lo=lam_next, support=tuple(sorted(active)),
            x_at_hi=x_hi, x_at_lo=x_lo, event=PathEvent(kind, index)))
        if kind == EVENT_ENTER:
            active.append(index)
            signs.append(enter_sign)
            selection_order.append(index)
        else:
            pos = active.index(index)
            active.pop(pos)
            signs.pop(pos)
            if not active:
                zero = np.zeros(m)
                segments.append(PathSegment(
                    lambda_hi=lam_next, lambda_lo=lambda_floor, support=(),
                    x_at_hi=zero, x_at_lo=zero, event=PathEvent(EVENT_TERMINAL)))
                break
        lam_cur = lam_next
    else:
        raise L0CertError("homotopy did not terminate; instance may be degenerate")

    return LassoPath(lambda_max=lambda_max, lambda_floor=lambda_floor,
                     segments=tuple(segments), selection_order=tuple(selection_order),
                     tie=tie)


def solution_at_lambda(path: LassoPath, lambda1: float) -> CoefficientVector:
    """Coefficients at an arbitrary penalty weight inside the computed range
    (affine interpolation inside the containing segment; zero above the top)."""
    if lambda1 < path.lambda_reached and not math.isclose(
            lambda1, path.lambda_reached, rel_tol=1e-12, abs_tol=1e-15):
        raise OutOfRange(lambda1, path.lambda_reached)
    if lambda1 >= path.lambda_max:
        return CoefficientVector(np.zeros(path.m))
    for seg in path.segments:
        if seg.lambda_lo <= lambda1 <= seg.lambda_hi:
            return CoefficientVector(seg.interpolate(lambda1))
    # floating point may leave lambda1 microscopically outside every closed segment
    return CoefficientVector(path.segments[-1].interpolate(max(lambda1, path.lambda_reached)))


@dataclass(frozen=True)
class SupportCertificateBundle:
    support: Support
    certificates: dict = field(default_factory=dict)

    def to_json_dict(self) -> dict:
        return {
            "support": list(self.support.indices),
            "certificates": {k: c.to_json_dict() for k, c in self.certificates.items()},
        }


def certify_path(instance: ProblemInstance, path: LassoPath, lambda0: float,
                 m_hint: int | None = None, force: bool = False) -> list[SupportCertificateBundle]:
    """Run the threshold certificates on every distinct support along the path.

    With ``m_hint`` (an a-priori bound on the optimal support size) the
    sharper bounded certificate is evaluated as well.
    """
    supports = path.distinct_supports()
    largest = max((s.size for s in supports), default=0)
    sigma = SigmaMinTable.compute(instance, force=force) if largest else None
    gap = None
    if m_hint is not None and largest:
        gap = PseudoInverseGapTable.compute(instance, m_max=largest, force=force)
    bundles = []
    for support in supports:
        certs = {
            "no_smaller_support": certify_no_smaller_support(
                instance, support, lambda0, sigma=sigma),
            "subset_of_type0": certify_subset_of_type0(
                instance, support, lambda0, sigma=sigma),
        }
        if m_hint is not None:
            certs["subset_of_type0_bounded"] = certify_subset_of_type0_bounded(
                instance, support, m_hint, lambda0, sigma=sigma, gap=gap)
        bundles.append(SupportCertificateBundle(support=support, certificates=certs))
    return bundles
