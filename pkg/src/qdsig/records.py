"""Record CSV files: ``index,transmission,x,p,sent``.

Files are UTF-8 with LF line endings. Reading is all-or-nothing: every
malformed row is collected with its line number and reported together.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .alphabet import ChannelParams, eliminate_arrays, sample_quadratures
from .fading import FadingModel

HEADER = ("index", "transmission", "x", "p", "sent")


class IngestError(ValueError):
    def __init__(self, problems: list[tuple[int, str]]):
        self.problems = problems
        shown = "; ".join(f"line {n}: {msg}" for n, msg in problems[:10])
        more = f" (+{len(problems) - 10} more)" if len(problems) > 10 else ""
        super().__init__(f"{len(problems)} invalid row(s): {shown}{more}")


@dataclass(frozen=True)
class RecordSet:
    index: np.ndarray
    transmission: np.ndarray
    x: np.ndarray
    p: np.ndarray
    sent: np.ndarray

    def __len__(self):
        return len(self.index)

    def take(self, sel) -> "RecordSet":
        return RecordSet(self.index[sel], self.transmission[sel], self.x[sel], self.p[sel], self.sent[sel])

    def eliminations(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """``(sent, elim_x, elim_p)`` arrays ready for cost-matrix estimation."""
        ex, ep = eliminate_arrays(self.x, self.p)
        return self.sent.astype(np.int64), ex.astype(np.int64), ep.astype(np.int64)


def _parse_row(row: list[str]) -> tuple[int, float, float, float, int]:
    if len(row) != 5:
        raise ValueError(f"expected 5 fields, got {len(row)}")
    index = int(row[0])
    t, x, p = float(row[1]), float(row[2]), float(row[3])
    sent = int(row[4])
    if not all(math.isfinite(v) for v in (t, x, p)):
        raise ValueError("non-finite value")
    if not 0 < t <= 1:
        raise ValueError(f"transmission {t} outside (0, 1]")
    if sent not in (0, 1, 2, 3):
        raise ValueError(f"sent symbol {sent} not in 0..3")
    return index, t, x, p, sent


def parse(text: str) -> RecordSet:
    reader = csv.reader(io.StringIO(text))
    problems: list[tuple[int, str]] = []
    header = next(reader, None)
    if header is None or tuple(h.strip() for h in header) != HEADER:
        raise IngestError([(1, f"header must be {','.join(HEADER)}")])
    rows = []
    last = None
    for line_no, row in enumerate(reader, start=2):
        if not row:
            continue
        try:
            rec = _parse_row(row)
            index = rec[0]
        except ValueError as exc:
            problems.append((line_no, str(exc)))
            # A readable index still takes part in the ordering check.
            try:
                index = int(row[0])
            except (ValueError, IndexError):
                continue
        else:
            rows.append(rec)
        if last is not None and index <= last:
            kind = "duplicate" if index == last else "non-increasing"
            problems.append((line_no, f"{kind} index {index}"))
        last = index if last is None else max(last, index)
    if problems:
        raise IngestError(problems)
    if not rows:
        return RecordSet(np.empty(0, np.int64), np.empty(0), np.empty(0), np.empty(0), np.empty(0, np.int8))
    index, t, x, p, sent = zip(*rows)
    return RecordSet(np.array(index, np.int64), np.array(t), np.array(x), np.array(p), np.array(sent, np.int8))


def ingest(path) -> RecordSet:
    with open(path, encoding="utf-8", newline="") as fh:
        return parse(fh.read())


def _decimal(v: float) -> str:
    s = repr(float(v))
    if "e" in s or "E" in s:
        s = np.format_float_positional(v, unique=True, trim="0")
    return s


def export(records: RecordSet) -> str:
    lines = [",".join(HEADER)]
    for i, t, x, p, s in zip(records.index, records.transmission, records.x, records.p, records.sent):
        lines.append(f"{int(i)},{_decimal(t)},{_decimal(x)},{_decimal(p)},{int(s)}")
    return "\n".join(lines) + "\n"


def write(records: RecordSet, path) -> None:
    Path(path).write_text(export(records), encoding="utf-8", newline="\n")


def generate(ch: ChannelParams, fading: FadingModel, count: int, seed: int) -> RecordSet:
    """Synthetic records: uniform sent symbols, transmissions from ``fading``, then outcomes.

    Draw order: all sent symbols, all transmissions, then outcomes.
    """
    if count < 0:
        raise ValueError("count must be non-negative")
    rng = np.random.default_rng(seed)
    sent = rng.integers(0, 4, size=count, dtype=np.int8)
    T = np.asarray(fading.sample(rng, count), dtype=float)
    x, p = sample_quadratures(sent, ch, rng, T=T)
    return RecordSet(np.arange(count, dtype=np.int64), T, x, p, sent)
