"""Channel transmission models and transmission binning."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

CONSTANT = "constant"
UNIFORM = "uniform"
EMPIRICAL = "empirical"


@dataclass(frozen=True)
class FadingModel:
    kind: str
    T: float = 1.0
    t_lo: float = 0.0
    t_hi: float = 1.0
    centers: tuple = ()
    weights: tuple = ()

    def __post_init__(self):
        if self.kind == CONSTANT:
            if not 0 < self.T <= 1:
                raise ValueError(f"transmission must lie in (0, 1], got {self.T}")
        elif self.kind == UNIFORM:
            if not 0 < self.t_lo < self.t_hi <= 1:
                raise ValueError(f"need 0 < t_lo < t_hi <= 1, got ({self.t_lo}, {self.t_hi})")
        elif self.kind == EMPIRICAL:
            c = np.asarray(self.centers, dtype=float)
            w = np.asarray(self.weights, dtype=float)
            if c.size == 0 or c.shape != w.shape:
                raise ValueError("empirical model needs matching, non-empty centers and weights")
            if c.min() <= 0 or c.max() > 1:
                raise ValueError("bin centers must lie in (0, 1]")
            if w.min() < 0 or abs(w.sum() - 1) > 1e-9:
                raise ValueError("weights must be non-negative and sum to 1")
        else:
            raise ValueError(f"unknown fading model {self.kind!r}")

    @classmethod
    def constant(cls, T: float) -> "FadingModel":
        return cls(CONSTANT, T=T)

    @classmethod
    def uniform(cls, t_lo: float, t_hi: float) -> "FadingModel":
        return cls(UNIFORM, t_lo=t_lo, t_hi=t_hi)

    @classmethod
    def empirical(cls, histogram) -> "FadingModel":
        """``histogram`` is a sequence of ``(bin_center, weight)`` pairs."""
        centers, weights = zip(*histogram)
        return cls(EMPIRICAL, centers=tuple(map(float, centers)), weights=tuple(map(float, weights)))

    @classmethod
    def parse(cls, text: str) -> "FadingModel":
        """Parse ``constant:T`` or ``uniform:LO,HI``."""
        kind, _, args = text.partition(":")
        try:
            vals = [float(v) for v in args.split(",")] if args else []
        except ValueError:
            raise ValueError(f"bad fading specification {text!r}") from None
        if kind == CONSTANT and len(vals) == 1:
            return cls.constant(vals[0])
        if kind == UNIFORM and len(vals) == 2:
            return cls.uniform(*vals)
        raise ValueError(f"bad fading specification {text!r}; use constant:T or uniform:LO,HI")

    def sample(self, rng: np.random.Generator, size=None):
        if self.kind == CONSTANT:
            return self.T if size is None else np.full(size, self.T)
        if self.kind == UNIFORM:
            # 1 - U lies in (0, 1], which keeps the draw inside (t_lo, t_hi].
            u = 1.0 - rng.random(size)
            return self.t_lo + (self.t_hi - self.t_lo) * u
        i = rng.choice(len(self.centers), size=size, p=self.weights)
        return np.asarray(self.centers)[i] if size is not None else self.centers[int(i)]


def sample_transmission(f: FadingModel, rng: np.random.Generator) -> float:
    return float(f.sample(rng))


@dataclass(frozen=True)
class Binning:
    n_bins: int = 32
    t_lo: float = 0.0
    t_hi: float = 1.0

    def __post_init__(self):
        if self.n_bins < 1:
            raise ValueError("need at least one bin")
        if not self.t_lo < self.t_hi:
            raise ValueError("t_lo must be below t_hi")

    def edges(self, i: int) -> tuple[float, float]:
        w = (self.t_hi - self.t_lo) / self.n_bins
        return self.t_lo + i * w, self.t_lo + (i + 1) * w


def bin_indices(T, b: Binning) -> np.ndarray:
    """Bin index per transmission, or -1 outside ``[t_lo, t_hi]``. ``t_hi`` goes to the last bin."""
    T = np.asarray(T, dtype=float)
    idx = np.floor(b.n_bins * (T - b.t_lo) / (b.t_hi - b.t_lo)).astype(np.int64)
    idx = np.minimum(idx, b.n_bins - 1)
    return np.where((T >= b.t_lo) & (T <= b.t_hi), idx, -1)


def bin_index(T: float, b: Binning) -> int:
    i = int(bin_indices(T, b))
    if i < 0:
        raise ValueError(f"transmission {T} outside binning range [{b.t_lo}, {b.t_hi}]")
    return i
