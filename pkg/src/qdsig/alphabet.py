"""Four-state coherent alphabet, heterodyne outcome statistics and state elimination.

Symbols ``k = 0, 1, 2, 3`` stand for the coherent states ``|alpha>``,
``|i alpha>``, ``|-alpha>`` and ``|-i alpha>``. Quadrature outcomes are in
shot-noise units. A heterodyne outcome ``(x, p)`` eliminates one state per
quadrature according to its sign.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np
from scipy.special import erfc, ndtri

PHASES = (0, 1, 2, 3)

# (cos, sin) of k*pi/2, kept exact so amplitudes carry no trig rounding.
_UNIT = ((1, 0), (0, 1), (-1, 0), (0, -1))
_UNIT_ARRAY = np.array(_UNIT, dtype=float)

IDEAL = "ideal"
IMPERFECT = "imperfect"

# Measured detector/preparation figures used as imperfect-model defaults.
DEFAULT_ETA = 0.856
DEFAULT_EPSILON = 1.01
DEFAULT_ELECT = 0.06
# S1 (x) is attenuated by the second modulator, which transmits 95%.
DEFAULT_X_RATIO = 0.95

# Uniform variates are drawn on an open grid (k + 1/2) / 2**52 so ndtri never sees 0 or 1.
_GRID = 2**52


def check_phase(k) -> int:
    """Return ``k`` as an int, raising ValueError unless it is one of 0..3."""
    if isinstance(k, (bool, np.bool_)) or int(k) != k or int(k) not in PHASES:
        raise ValueError(f"phase index must be one of 0, 1, 2, 3, got {k!r}")
    return int(k)


def antipode(k: int) -> int:
    return (check_phase(k) + 2) % 4


@dataclass(frozen=True)
class ChannelParams:
    """Channel and detector parameters for one recipient.

    ``model`` is ``"ideal"`` or ``"imperfect"``. The ideal model carries no
    detector imperfections and a single amplitude; use :meth:`ideal` and
    :meth:`imperfect` rather than filling every field by hand.
    """

    model: str
    T: float
    eta: float = 1.0
    epsilon: float = 1.0
    elect: float = 0.0
    alpha_x: float = 0.0
    alpha_p: float = 0.0

    def __post_init__(self):
        if self.model not in (IDEAL, IMPERFECT):
            raise ValueError(f"unknown channel model {self.model!r}")
        if not 0.0 < self.T <= 1.0:
            raise ValueError(f"transmission must lie in (0, 1], got {self.T}")
        if not 0.0 < self.eta <= 1.0:
            raise ValueError(f"detection efficiency must lie in (0, 1], got {self.eta}")
        if self.epsilon < 1.0:
            raise ValueError(f"preparation variance must be >= 1, got {self.epsilon}")
        if self.elect < 0.0:
            raise ValueError(f"electronic noise must be >= 0, got {self.elect}")
        if self.alpha_x < 0.0 or self.alpha_p < 0.0:
            raise ValueError("amplitudes must be non-negative")
        if self.model == IDEAL and (
            self.eta != 1.0 or self.epsilon != 1.0 or self.elect != 0.0
            or self.alpha_x != self.alpha_p
        ):
            raise ValueError("ideal model requires eta=1, epsilon=1, elect=0 and alpha_x == alpha_p")

    @classmethod
    def ideal(cls, T: float, alpha: float) -> "ChannelParams":
        return cls(IDEAL, T, alpha_x=alpha, alpha_p=alpha)

    @classmethod
    def imperfect(
        cls,
        T: float,
        alpha: float,
        eta: float = DEFAULT_ETA,
        epsilon: float = DEFAULT_EPSILON,
        elect: float = DEFAULT_ELECT,
        x_ratio: float = DEFAULT_X_RATIO,
    ) -> "ChannelParams":
        """Imperfect channel with ``alpha`` on the p quadrature and ``x_ratio * alpha`` on x."""
        return cls(IMPERFECT, T, eta=eta, epsilon=epsilon, elect=elect,
                   alpha_x=x_ratio * alpha, alpha_p=alpha)

    def with_transmission(self, T: float) -> "ChannelParams":
        return ChannelParams(self.model, T, self.eta, self.epsilon, self.elect,
                             self.alpha_x, self.alpha_p)


@dataclass(frozen=True)
class QuadratureRecord:
    x: float
    p: float
    transmission: float
    sent: Optional[int] = None


class EliminationPair(NamedTuple):
    elim_x: int  # 0 or 2
    elim_p: int  # 1 or 3


def phase_amplitude(k: int, alpha: float) -> tuple[float, float]:
    """Real and imaginary parts of ``alpha * i**k``."""
    if alpha < 0:
        raise ValueError(f"amplitude must be non-negative, got {alpha}")
    c, s = _UNIT[check_phase(k)]
    return (alpha * c if c else 0.0, alpha * s if s else 0.0)


def _mean_and_variance(ch: ChannelParams, T=None):
    """Per-quadrature displacement magnitudes (x, p) and the common variance.

    ``T`` overrides the channel transmission and may be an array.
    """
    T = ch.T if T is None else T
    if ch.model == IDEAL:
        scale = np.sqrt(T)
        return scale * ch.alpha_x, scale * ch.alpha_p, np.ones_like(scale)
    # Chosen so that 1/2 erfc(mu / sqrt(2 var)) reproduces the imperfect-model error rate.
    gain = 0.5 * ch.eta * np.asarray(T, dtype=float)
    var = 0.5 * (gain * ch.epsilon + ch.elect)
    return gain * ch.alpha_x, gain * ch.alpha_p, var


def quadrature_stats(k: int, ch: ChannelParams) -> tuple[float, float, float]:
    """Gaussian means ``(mu_x, mu_p)`` and common variance of the heterodyne outcome."""
    mx, mp, var = (float(v) for v in _mean_and_variance(ch))
    c, s = _UNIT[check_phase(k)]
    return (c * mx if c else 0.0, s * mp if s else 0.0, var)


def sign_error(k: int, ch: ChannelParams, quadrature: str = "x") -> float:
    """Probability that the outcome on ``quadrature`` has the wrong sign.

    The wrong sign eliminates the sent state. On the quadrature where the
    symbol has no displacement the outcome is an unbiased coin, so 1/2.
    """
    mu_x, mu_p, var = quadrature_stats(k, ch)
    mu = {"x": mu_x, "p": mu_p}[quadrature]
    return 0.5 * float(erfc(abs(mu) / np.sqrt(2.0 * var)))


def honest_error(ch: ChannelParams) -> float:
    """Probability that an honest recipient eliminates the sent state.

    With unequal amplitudes this is the worse (x) quadrature.
    """
    return max(sign_error(0, ch, "x"), sign_error(1, ch, "p"))


def standard_normals(rng: np.random.Generator, shape) -> np.ndarray:
    """Inverse-CDF standard normal variates.

    Each variate consumes exactly one 64-bit draw, so the number of draws
    does not depend on the values, unlike ziggurat sampling.
    """
    k = rng.integers(0, _GRID, size=shape, dtype=np.int64)
    return ndtri((k + 0.5) / _GRID)


def sample_quadratures(ks, ch: ChannelParams, rng: np.random.Generator,
                       T=None) -> tuple[np.ndarray, np.ndarray]:
    """Draw heterodyne outcomes for an array of symbols.

    Draw order is x then p for each element, elements in C order. ``T``, if
    given, is a per-element transmission array replacing ``ch.T``.
    """
    ks = np.asarray(ks)
    if ks.size and (ks.min() < 0 or ks.max() > 3):
        raise ValueError("phase indices must lie in 0..3")
    if T is not None:
        T = np.asarray(T, dtype=float)
        if T.size and (T.min() <= 0 or T.max() > 1):
            raise ValueError("transmissions must lie in (0, 1]")
    mx, mp, var = _mean_and_variance(ch, T)
    z = standard_normals(rng, ks.shape + (2,))
    sd = np.sqrt(var)
    unit = _UNIT_ARRAY[ks]
    x = unit[..., 0] * mx + sd * z[..., 0]
    p = unit[..., 1] * mp + sd * z[..., 1]
    return x, p


def sample_element(k: int, ch: ChannelParams, rng: np.random.Generator) -> QuadratureRecord:
    k = check_phase(k)
    x, p = sample_quadratures(np.array(k), ch, rng)
    return QuadratureRecord(float(x), float(p), ch.T, k)


def eliminate(r: QuadratureRecord) -> EliminationPair:
    """Sign rule: a non-negative x eliminates ``|-alpha>`` (2), a negative x eliminates ``|alpha>`` (0);
    likewise p eliminates 3 or 1."""
    if not (np.isfinite(r.x) and np.isfinite(r.p)):
        raise ValueError("quadrature outcomes must be finite")
    return EliminationPair(2 if r.x >= 0 else 0, 3 if r.p >= 0 else 1)


def eliminate_arrays(x, p) -> tuple[np.ndarray, np.ndarray]:
    """Vectorised :func:`eliminate`; returns ``(elim_x, elim_p)`` int8 arrays."""
    x = np.asarray(x)
    p = np.asarray(p)
    elim_x = np.where(x >= 0, 2, 0).astype(np.int8)
    elim_p = np.where(p >= 0, 3, 1).astype(np.int8)
    return elim_x, elim_p
