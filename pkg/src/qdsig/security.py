"""Closed-form security quantities for the heterodyne signature scheme.

All probability bounds are evaluated in log space and clamped to [0, 1].
Signature lengths ``L`` are the per-message-bit length used in every bound;
signing a one-bit message costs ``2 L`` states.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

from .costmatrix import BEST, WORST, CostMatrix, ErrorMatrix, decompose, perturb

UNBOUNDED = math.inf


class NoSecurityError(ValueError):
    """Raised when the forger's cost does not exceed the honest error rate."""


class Lambdas(NamedTuple):
    l1: float
    l2: float
    l3: float
    l4: float


def lambdas(alpha: float) -> Lambdas:
    """Gram-matrix eigenvalues of the four coherent states ``|i^k alpha>``."""
    if alpha < 0:
        raise ValueError(f"amplitude must be non-negative, got {alpha}")
    a2 = alpha * alpha
    pre = 2.0 * math.exp(-a2)
    ch, cs = math.cosh(a2), math.cos(a2)
    sh, sn = math.sinh(a2), math.sin(a2)
    # sinh(x) - sin(x) >= 0 for x >= 0; clip the rounding residue near 0.
    return Lambdas(pre * (ch + cs), pre * (ch - cs), pre * (sh + sn), max(pre * (sh - sn), 0.0))


def p_min(alpha: float) -> float:
    """Minimum error probability for identifying one of the four states (square-root measurement)."""
    s = sum(math.sqrt(v) for v in lambdas(alpha))
    return 1.0 - s * s / 16.0


def thresholds(p_err: float, c_min: float) -> tuple[float, float]:
    """Equal-risk authentication and verification thresholds ``(s_a, s_v)``."""
    g = c_min - p_err
    if not g > 0:
        raise NoSecurityError(f"C_min={c_min} does not exceed p_err={p_err}")
    return p_err + g / 4.0, p_err + 3.0 * g / 4.0


def _clamped(log_bound: float) -> float:
    return 1.0 if log_bound >= 0 else math.exp(log_bound)


def repudiation_bound_at(p: float, s_a: float, s_v: float, L: float) -> float:
    """Repudiation bound for an Alice who sets both mismatch rates to ``p``."""
    return min(_clamped(math.log(2) - (p - s_a) ** 2 * L),
               _clamped(math.log(2) - (s_v - p) ** 2 * L))


def repudiation_bound(s_a: float, s_v: float, L: float) -> float:
    if s_v < s_a:
        raise ValueError("verification threshold must not be below the authentication threshold")
    return _clamped(math.log(2) - (s_v - s_a) ** 2 * L / 4.0)


def forging_bound(c_min: float, s_v: float, L: float) -> float:
    if not c_min > s_v:
        raise NoSecurityError(f"C_min={c_min} must exceed s_v={s_v}")
    return _clamped(-((c_min - s_v) ** 2) * L)


def robustness_bound(p_err: float, s_a: float, L: float) -> float:
    if not s_a > p_err:
        raise ValueError(f"not robust: s_a={s_a} must exceed p_err={p_err}")
    return _clamped(math.log(2) - (s_a - p_err) ** 2 * L)


def failure_bound(g: float, L: float) -> float:
    """Bound on any of repudiation, forging or honest rejection under equal-risk thresholds."""
    if not g > 0:
        raise NoSecurityError(f"g={g} must be positive")
    return _clamped(math.log(2) - g * g * L / 16.0)


def required_length(g: float, target: float) -> int:
    """Smallest ``L >= 1`` with ``failure_bound(g, L) <= target``."""
    if not g > 0:
        raise NoSecurityError(f"g={g} must be positive")
    if not target > 0:
        raise ValueError(f"target must be positive, got {target}")
    L = max(1, math.ceil(16.0 * (math.log(2.0) - math.log(target)) / (g * g)))
    # Settle floating-point slack so the result agrees exactly with failure_bound.
    while L > 1 and failure_bound(g, L - 1) <= target:
        L -= 1
    while failure_bound(g, L) > target:
        L += 1
    return L


def _g_of(C: CostMatrix, p_min_value: float) -> float:
    return max(decompose(C).advantage, 0.0) * p_min_value


def length_with_errors(C: CostMatrix, E: ErrorMatrix, p_min_value: float, target: float):
    """Signature lengths ``(L_best, L, L_worst)`` from the cost matrix and its error bars.

    ``L_worst`` is :data:`UNBOUNDED` when the worst-case matrix leaves no advantage.
    Raises NoSecurityError when the central matrix itself has none.
    """
    L = required_length(_g_of(C, p_min_value), target)
    L_best = required_length(_g_of(perturb(C, E, BEST), p_min_value), target)
    g_worst = _g_of(perturb(C, E, WORST), p_min_value)
    L_worst = required_length(g_worst, target) if g_worst > 0 else UNBOUNDED
    return L_best, L, L_worst


@dataclass(frozen=True)
class SecurityParams:
    p_err: float
    c_min: float
    g: float
    s_a: float
    s_v: float
    target: float
    L: int

    @classmethod
    def equal_risk(cls, p_err: float, c_min: float, target: float = 1e-4) -> "SecurityParams":
        if not 0 < target < 1:
            raise ValueError(f"target must lie in (0, 1), got {target}")
        s_a, s_v = thresholds(p_err, c_min)
        g = c_min - p_err
        return cls(p_err, c_min, g, s_a, s_v, target, required_length(g, target))

