"""Elimination cost matrices: estimation, statistical errors and the forger's cost bound.

Rows are indexed by the sent symbol and columns by the eliminated symbol, so
``c[i, j]`` is the probability that state ``j`` is eliminated when ``i`` was sent.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple, Optional

import numpy as np

WORST = "worst"
BEST = "best"

_OFF_DIAGONAL = ~np.eye(4, dtype=bool)


class EstimationError(ValueError):
    pass


class DegenerateCostWarning(UserWarning):
    """The diagonal is not below the off-diagonal, so no forging bound beyond the honest cost exists."""


def _sig6(v: float) -> float:
    return float(f"{v:.6g}")


@dataclass(frozen=True)
class CostMatrix:
    """A 4x4 table of elimination probabilities.

    ``counts`` holds the per-row sample sizes when the matrix was estimated
    from data. ``relaxed`` marks perturbed matrices that are bound inputs
    rather than probability tables, so the row identities are not enforced.
    """

    c: np.ndarray
    counts: Optional[np.ndarray] = None
    relaxed: bool = False

    def __post_init__(self):
        c = np.array(self.c, dtype=float)
        if c.shape != (4, 4):
            raise ValueError(f"cost matrix must be 4x4, got shape {c.shape}")
        c.setflags(write=False)
        object.__setattr__(self, "c", c)
        self.validate()

    def validate(self, tol: float = 1e-9) -> None:
        c = self.c
        if not np.all(np.isfinite(c)) or c.min() < -tol or c.max() > 1 + tol:
            raise ValueError("cost matrix entries must lie in [0, 1]")
        if self.relaxed:
            return
        idx = np.arange(4)
        even = c[idx, idx] + c[idx, (idx + 2) % 4]
        odd = c[idx, (idx + 1) % 4] + c[idx, (idx + 3) % 4]
        if np.abs(even - 1).max() > tol or np.abs(odd - 1).max() > tol:
            raise ValueError("antipodal entries of every row must sum to 1")

    def to_json(self, alpha: float, transmission_bin, errors: Optional["ErrorMatrix"] = None) -> dict:
        counts = [int(n) for n in self.counts] if self.counts is not None else None
        e = errors.e if errors is not None else None
        return {
            "alpha": _sig6(alpha),
            "transmission_bin": transmission_bin,
            "counts": counts,
            "c": [[_sig6(v) for v in row] for row in self.c],
            "e": None if e is None else [[_sig6(v) for v in row] for row in e],
        }


@dataclass(frozen=True)
class ErrorMatrix:
    e: np.ndarray = field(default_factory=lambda: np.zeros((4, 4)))

    def __post_init__(self):
        e = np.array(self.e, dtype=float)
        if e.shape != (4, 4):
            raise ValueError(f"error matrix must be 4x4, got shape {e.shape}")
        if np.any(e < 0) or not np.all(np.isfinite(e)):
            raise ValueError("error matrix entries must be finite and non-negative")
        e.setflags(write=False)
        object.__setattr__(self, "e", e)


class Decomposition(NamedTuple):
    honest_cost: float
    advantage: float


def _as_arrays(records) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    # A (sent, elim_x, elim_p) triple of arrays passes straight through.
    if isinstance(records, tuple) and len(records) == 3 and isinstance(records[0], np.ndarray):
        return tuple(np.asarray(a, dtype=np.int64) for a in records)
    rows = [(int(s), int(e[0]), int(e[1])) for s, e in records]
    if not rows:
        return np.empty(0, int), np.empty(0, int), np.empty(0, int)
    arr = np.array(rows)
    return arr[:, 0], arr[:, 1], arr[:, 2]


def _hit_counts(sent, elim_x, elim_p) -> tuple[np.ndarray, np.ndarray]:
    counts = np.bincount(sent, minlength=4)[:4]
    hits = np.zeros((4, 4), dtype=np.int64)
    np.add.at(hits, (sent, elim_x), 1)
    np.add.at(hits, (sent, elim_p), 1)
    return counts, hits


def estimate_arrays(sent, elim_x, elim_p) -> CostMatrix:
    """Estimate a cost matrix from parallel arrays of sent symbols and eliminated states."""
    sent = np.asarray(sent, dtype=np.int64)
    elim_x = np.asarray(elim_x, dtype=np.int64)
    elim_p = np.asarray(elim_p, dtype=np.int64)
    if sent.size and (sent.min() < 0 or sent.max() > 3):
        raise EstimationError("sent symbols must lie in 0..3")
    if not (np.isin(elim_x, (0, 2)).all() and np.isin(elim_p, (1, 3)).all()):
        raise EstimationError("x eliminations must be 0 or 2 and p eliminations 1 or 3")
    counts, hits = _hit_counts(sent, elim_x, elim_p)
    missing = [i for i in range(4) if counts[i] == 0]
    if missing:
        raise EstimationError(f"no records for sent symbol(s) {missing}")
    return CostMatrix(hits / counts[:, None], counts=counts)


def estimate(records: Iterable) -> CostMatrix:
    """Estimate a cost matrix from ``(sent, EliminationPair)`` records.

    ``records`` may also be a ``(sent, elim_x, elim_p)`` tuple of arrays.
    """
    return estimate_arrays(*_as_arrays(records))


def subsample_errors(records, parts: int = 10) -> ErrorMatrix:
    """Spread of the cost matrix across ``parts`` contiguous equal-size slices.

    Each slice holds ``len(records) // parts`` records in record order; any
    remainder at the end is dropped. The result is the population standard
    deviation of each entry over the slices.
    """
    sent, ex, ep = _as_arrays(records)
    if parts < 1:
        raise EstimationError("parts must be at least 1")
    size = len(sent) // parts
    if size == 0:
        raise EstimationError(f"need at least {parts} records to form {parts} parts, got {len(sent)}")
    mats = []
    for i in range(parts):
        sl = slice(i * size, (i + 1) * size)
        try:
            mats.append(estimate_arrays(sent[sl], ex[sl], ep[sl]).c)
        except EstimationError as exc:
            raise EstimationError(f"part {i}: {exc}") from None
    return ErrorMatrix(np.std(np.stack(mats), axis=0))


def decompose(C: CostMatrix) -> Decomposition:
    """Honest cost (mean diagonal) and the smallest off-diagonal excess over its row's diagonal."""
    c = C.c
    diag = np.diag(c)
    shifted = c - diag[:, None]
    return Decomposition(float(diag.mean()), float(shifted[_OFF_DIAGONAL].min()))


def min_cost_bound(C: CostMatrix, p_min: float) -> float:
    """Lower bound on a forger's per-element mismatch probability."""
    if not 0.0 <= p_min <= 1.0:
        raise ValueError(f"p_min must lie in [0, 1], got {p_min}")
    honest, adv = decompose(C)
    if adv <= 0:
        warnings.warn(f"cost matrix advantage is {adv:.4g} <= 0; the bound reduces to the honest cost",
                      DegenerateCostWarning, stacklevel=2)
        adv = 0.0
    return honest + adv * p_min


def perturb(C: CostMatrix, E: ErrorMatrix, direction: str = WORST) -> CostMatrix:
    """Shift the diagonal up and the off-diagonal down by the errors (worst case), or the reverse."""
    if direction not in (WORST, BEST):
        raise ValueError(f"direction must be {WORST!r} or {BEST!r}")
    sign = np.where(np.eye(4, dtype=bool), 1.0, -1.0)
    if direction == BEST:
        sign = -sign
    c = np.clip(C.c + sign * E.e, 0.0, 1.0)
    return CostMatrix(c, counts=C.counts, relaxed=True)
