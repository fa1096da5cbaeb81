"""Per-transmission-bin cost matrices and signature lengths from measured records."""
from __future__ import annotations

import json
import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from .costmatrix import (CostMatrix, DegenerateCostWarning, ErrorMatrix, EstimationError, decompose,
                         estimate_arrays, min_cost_bound, subsample_errors)
from .fading import Binning, bin_indices
from .records import RecordSet
from .security import UNBOUNDED, NoSecurityError, length_with_errors, p_min, required_length

DEFAULT_MIN_COUNT = 10_000

SUMMARY_COLUMNS = ("bin", "t_lo", "t_hi", "count", "honest_cost", "advantage", "c_min", "g",
                   "L_best", "L", "L_worst", "insufficient", "note")


@dataclass
class BinReport:
    index: int
    t_lo: float
    t_hi: float
    count: int
    cost: Optional[CostMatrix] = None
    errors: Optional[ErrorMatrix] = None
    honest_cost: Optional[float] = None
    advantage: Optional[float] = None
    c_min: Optional[float] = None
    g: Optional[float] = None
    L_best: Optional[float] = None
    L: Optional[float] = None
    L_worst: Optional[float] = None
    insufficient: bool = False
    note: str = ""


@dataclass
class BinAnalysis:
    alpha: float
    p_min: float
    target: float
    binning: Binning
    bins: list[BinReport]
    out_of_range: int


def _analyze_one(rep: BinReport, sent, ex, ep, p_min_value, target, min_count, parts) -> None:
    notes = []
    try:
        rep.cost = estimate_arrays(sent, ex, ep)
    except EstimationError as exc:
        rep.note = str(exc)
        rep.insufficient = True
        return
    try:
        rep.errors = subsample_errors((sent, ex, ep), parts)
    except EstimationError as exc:
        notes.append(f"no error matrix: {exc}")
    rep.honest_cost, rep.advantage = decompose(rep.cost)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", DegenerateCostWarning)
        rep.c_min = min_cost_bound(rep.cost, p_min_value)
    rep.g = rep.c_min - rep.honest_cost
    if rep.count < min_count:
        rep.insufficient = True
        notes.append(f"fewer than {min_count} records")
    elif rep.g <= 0:
        notes.append("no security (g <= 0)")
    elif rep.errors is not None:
        rep.L_best, rep.L, rep.L_worst = length_with_errors(rep.cost, rep.errors, p_min_value, target)
    else:
        rep.L = required_length(rep.g, target)
    rep.note = "; ".join(notes)


def analyze_bins(records: RecordSet, alpha: float, binning: Binning = Binning(), target: float = 1e-4,
                 min_count: int = DEFAULT_MIN_COUNT, parts: int = 10,
                 p_min_value: Optional[float] = None) -> BinAnalysis:
    """Cost matrix, error matrix and signature lengths for every occupied transmission bin.

    ``p_min_value`` overrides ``p_min(alpha)``. Bins with fewer than
    ``min_count`` records get a matrix but no length and are flagged
    insufficient. A failure in one bin is recorded in its note and does not
    stop the others.
    """
    if not 0 < target < 1:
        raise ValueError(f"target must lie in (0, 1), got {target}")
    pm = p_min(alpha) if p_min_value is None else p_min_value
    idx = bin_indices(records.transmission, binning)
    sent, ex, ep = records.eliminations()
    reports = []
    for b in np.unique(idx[idx >= 0]):
        sel = idx == b
        t_lo, t_hi = binning.edges(int(b))
        rep = BinReport(int(b), t_lo, t_hi, int(sel.sum()))
        try:
            _analyze_one(rep, sent[sel], ex[sel], ep[sel], pm, target, min_count, parts)
        except (ValueError, NoSecurityError) as exc:
            rep.note = f"{rep.note}; {exc}" if rep.note else str(exc)
        reports.append(rep)
    return BinAnalysis(alpha, pm, target, binning, reports, int((idx < 0).sum()))


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return str(v).lower()
    if v == UNBOUNDED:
        return "inf"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return f"{v:.6g}"


def summary_csv(analysis: BinAnalysis) -> str:
    lines = [",".join(SUMMARY_COLUMNS)]
    for r in analysis.bins:
        vals = [r.index, r.t_lo, r.t_hi, r.count, r.honest_cost, r.advantage, r.c_min, r.g,
                r.L_best, r.L, r.L_worst, r.insufficient]
        note = r.note.replace('"', "'")
        lines.append(",".join(_fmt(v) for v in vals) + (f',"{note}"' if note else ","))
    return "\n".join(lines) + "\n"


def write_report(analysis: BinAnalysis, out_dir) -> list[Path]:
    """Write ``bin_NN.json`` per bin with a cost matrix, plus ``summary.csv``."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    for r in analysis.bins:
        if r.cost is None:
            continue
        path = out / f"bin_{r.index:02d}.json"
        path.write_text(json.dumps(r.cost.to_json(analysis.alpha, r.index, r.errors)) + "\n", encoding="utf-8")
        written.append(path)
    summary = out / "summary.csv"
    summary.write_text(summary_csv(analysis), encoding="utf-8")
    written.append(summary)
    return written
