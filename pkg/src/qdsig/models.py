"""Closed-form signature-length models.

Three models are provided: ideal heterodyne detection, heterodyne detection
with detector and preparation imperfections, and ideal unambiguous state
elimination (USE) with single-photon detection. Each maps a transmission and
a prepared amplitude to Alice's per-element advantage ``g`` and from there to
a signature length.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np
from scipy.optimize import minimize_scalar
from scipy.special import erfc

from . import alphabet
from .costmatrix import CostMatrix
from .security import UNBOUNDED, p_min, required_length

IDEAL_HET = "ideal_het"
IMPERFECT_HET = "imperfect_het"
IDEAL_USE = "ideal_use"
KINDS = (IDEAL_HET, IMPERFECT_HET, IDEAL_USE)

OPTIMAL = "optimal"
AlphaPolicy = Union[float, str]

ALPHA_RANGE = (0.01, 3.0)


@dataclass(frozen=True)
class ModelKind:
    """A theory model and its detector parameters.

    ``x_ratio`` is the x-quadrature amplitude as a fraction of the prepared
    (p-quadrature) amplitude; only the imperfect model uses it, together with
    ``eta``, ``epsilon`` and ``elect``.
    """

    kind: str
    eta: float = alphabet.DEFAULT_ETA
    epsilon: float = alphabet.DEFAULT_EPSILON
    elect: float = alphabet.DEFAULT_ELECT
    x_ratio: float = alphabet.DEFAULT_X_RATIO

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown model kind {self.kind!r}; expected one of {KINDS}")
        if not 0 < self.eta <= 1 or self.epsilon < 1 or self.elect < 0 or not 0 < self.x_ratio <= 1:
            raise ValueError("invalid detector parameters")

    def channel(self, T: float, alpha: float) -> alphabet.ChannelParams:
        """Matching alphabet channel for Monte Carlo cross-checks (heterodyne kinds only)."""
        if self.kind == IDEAL_HET:
            return alphabet.ChannelParams.ideal(T, alpha)
        if self.kind == IMPERFECT_HET:
            return alphabet.ChannelParams.imperfect(T, alpha, self.eta, self.epsilon, self.elect, self.x_ratio)
        raise ValueError("the USE model has no heterodyne channel")


def default_policy(m: ModelKind) -> AlphaPolicy:
    return OPTIMAL if m.kind == IDEAL_USE else 0.5


def model_perr(m: ModelKind, T: float, alpha: float) -> float:
    """Honest elimination error for a heterodyne model.

    ``alpha`` is the amplitude entering the error function directly; for the
    imperfect model that is the (lower) x-quadrature amplitude.
    """
    if m.kind == IDEAL_USE:
        raise ValueError("USE never eliminates the sent state; it has no p_err")
    if m.kind == IDEAL_HET:
        return 0.5 * float(erfc(math.sqrt(T / 2.0) * alpha))
    num = 0.5 * m.eta * T * alpha
    return 0.5 * float(erfc(num / math.sqrt(0.5 * m.eta * T * m.epsilon + m.elect)))


def use_rates(T: float, alpha: float) -> tuple[float, float]:
    """USE elimination probabilities ``(p, q)`` for the antipodal and neighbouring states."""
    n = T * alpha * alpha
    return -math.expm1(-n), -math.expm1(-n / 2.0)


def theory_matrix(m: ModelKind, T: float, alpha: float) -> CostMatrix:
    """Ideal cost matrix of the model at prepared amplitude ``alpha``."""
    if m.kind == IDEAL_USE:
        p, q = use_rates(T, alpha)
        row = np.array([0.0, q, p, q])
        return CostMatrix(np.stack([np.roll(row, i) for i in range(4)]), relaxed=True)
    e = model_perr(m, T, alpha if m.kind == IDEAL_HET else m.x_ratio * alpha)
    row = np.array([e, 0.5, 1.0 - e, 0.5])
    return CostMatrix(np.stack([np.roll(row, i) for i in range(4)]))


def model_g(m: ModelKind, T: float, alpha: float) -> float:
    """Alice's per-element advantage; ``alpha`` is the prepared (unattenuated) amplitude."""
    if m.kind == IDEAL_USE:
        return p_min(alpha) * use_rates(T, alpha)[1]
    x_alpha = alpha if m.kind == IDEAL_HET else m.x_ratio * alpha
    return p_min(alpha) * (0.5 - model_perr(m, T, x_alpha))


def optimal_alpha(m: ModelKind, T: float, grid: int = 300) -> float:
    """Amplitude maximising ``model_g`` on [0.01, 3].

    A coarse grid locates the peak and a bounded scalar search refines it to
    about 1e-5 inside the neighbouring grid cells. If the grid shows more than
    one local maximum the refinement still starts from the global grid maximum.
    """
    if not 0 < T <= 1:
        raise ValueError(f"transmission must lie in (0, 1], got {T}")
    lo, hi = ALPHA_RANGE
    xs = np.linspace(lo, hi, grid)
    gs = np.array([model_g(m, T, a) for a in xs])
    i = int(np.argmax(gs))
    a, b = xs[max(i - 1, 0)], xs[min(i + 1, grid - 1)]
    res = minimize_scalar(lambda x: -model_g(m, T, x), bounds=(a, b), method="bounded",
                          options={"xatol": 1e-6})
    return float(res.x) if -res.fun >= gs[i] else float(xs[i])


def length_curve(m: ModelKind, Ts, target: float = 1e-4, alpha_policy: AlphaPolicy | None = None):
    """Signature length ``L`` against transmission.

    Returns a list of ``(T, L)``; ``L`` is :data:`UNBOUNDED` where ``g <= 0``.
    ``alpha_policy`` is a fixed amplitude or ``"optimal"`` (per-T optimum);
    the default is 0.5 for heterodyne models and per-T optimal for USE.
    """
    if not 0 < target < 1:
        raise ValueError(f"target must lie in (0, 1), got {target}")
    policy = default_policy(m) if alpha_policy is None else alpha_policy
    out = []
    for T in Ts:
        T = float(T)
        if not 0 < T <= 1:
            raise ValueError(f"transmission must lie in (0, 1], got {T}")
        a = optimal_alpha(m, T) if policy == OPTIMAL else float(policy)
        g = model_g(m, T, a)
        out.append((T, required_length(g, target) if g > 0 else UNBOUNDED))
    return out


def curve_csv(points) -> str:
    lines = ["T,L"]
    for T, L in points:
        lines.append(f"{T:.6g},{'inf' if L == UNBOUNDED else format(L, '.6g')}")
    return "\n".join(lines) + "\n"
