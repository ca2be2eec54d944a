"""Uniformly sampled time series and CSV ingestion."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import NamedTuple, Sequence

import numpy as np

SPACING_RTOL = 1e-6


class SignalError(ValueError):
    pass


class IndexInterval(NamedTuple):
    """Half-open sample range ``[begin, end)``."""

    begin: int
    end: int

    @property
    def length(self) -> int:
        return self.end - self.begin


@dataclass(frozen=True)
class SampledSignal:
    """Real-valued series sampled every ``period`` seconds from ``t0``.

    ``values`` is stored as a read-only float64 array.
    """

    t0: float
    period: float
    values: np.ndarray

    def __post_init__(self):
        if not self.period > 0:
            raise SignalError(f"period must be positive, got {self.period}")
        arr = np.array(self.values, dtype=float)
        if arr.ndim != 1:
            raise SignalError("values must be one-dimensional")
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)

    def __len__(self) -> int:
        return len(self.values)

    @property
    def times(self) -> np.ndarray:
        return self.t0 + self.period * np.arange(len(self.values))

    def duration(self, interval: IndexInterval) -> float:
        return (interval.end - interval.begin) * self.period

    def slice(self, begin: int, end: int) -> "SampledSignal":
        return SampledSignal(self.t0 + begin * self.period, self.period, self.values[begin:end])

    def with_values(self, values) -> "SampledSignal":
        return SampledSignal(self.t0, self.period, values)


def read_csv_columns(path) -> dict[str, np.ndarray]:
    """Read a headered numeric CSV into a mapping of column name to array."""
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise SignalError(f"{path}: empty file") from None
        rows = [row for row in reader if row and any(cell.strip() for cell in row)]
    if any(len(row) != len(header) for row in rows):
        raise SignalError(f"{path}: ragged rows")
    data = np.array(rows, dtype=float).reshape(len(rows), len(header))
    return {name: data[:, j] for j, name in enumerate(header)}


def infer_period(t: np.ndarray, source="") -> float:
    if len(t) < 2:
        raise SignalError(f"{source}: fewer than 2 rows")
    dt = np.diff(t)
    period = (t[-1] - t[0]) / (len(t) - 1)
    if not period > 0 or np.any(dt <= 0):
        raise SignalError(f"{source}: timestamps must be strictly increasing")
    if np.any(np.abs(dt - period) > SPACING_RTOL * period):
        raise SignalError(f"{source}: non-uniform spacing")
    return float(period)


def load_signal_csv(path, column: str) -> SampledSignal:
    cols = read_csv_columns(path)
    for name in ("t", column):
        if name not in cols:
            raise SignalError(f"{path}: missing column {name!r}")
    t = cols["t"]
    period = infer_period(t, str(path))
    return SampledSignal(float(t[0]), period, cols[column])


def write_csv_columns(path, columns: dict[str, Sequence]) -> None:
    """Write equal-length columns to ``path`` (a filename or an open text stream)."""
    names = list(columns)
    arrays = [np.asarray(columns[n]) for n in names]
    if hasattr(path, "write"):
        _write_rows(path, names, arrays)
        return
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        _write_rows(fh, names, arrays)


def _write_rows(fh, names, arrays) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(names)
    for row in zip(*arrays):
        w.writerow([_fmt(x) for x in row])


def _fmt(x) -> str:
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    # repr round-trips float64 exactly
    return repr(float(x))


def save_signal_csv(path, signal: SampledSignal, column: str = "v") -> None:
    write_csv_columns(path, {"t": signal.times, column: signal.values})


def derive_seed(master: int, *keys: int) -> np.random.SeedSequence:
    """Sub-seed for e.g. (master, trip, trial, channel); stable across runs."""
    return np.random.SeedSequence([int(master), *(int(k) for k in keys)])


def add_gaussian_noise(signal: SampledSignal, sigma: float, seed) -> SampledSignal:
    if sigma < 0:
        raise SignalError(f"negative sigma: {sigma}")
    if sigma == 0:
        return signal
    rng = np.random.default_rng(seed)
    return signal.with_values(signal.values + rng.normal(0.0, sigma, len(signal)))
