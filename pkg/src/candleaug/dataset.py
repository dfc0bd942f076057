"""OHLC CSV ingestion, sliding-window extraction, rule labeling with class
balancing, and the line-delimited dataset file format.

Dataset files start with a header line `candleset v1 T=<T>`, optionally
followed by a `meta {json}` provenance line, then one JSON record per line
with fields {label, source, prices, origin}. Floats are serialized with
Python's shortest-roundtrip repr, so save -> load is bitwise lossless.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from datetime import datetime
from pathlib import Path
from typing import Iterable, Sequence

from .ohlc import (
    Candle,
    CandleWindow,
    OhlcError,
    PatternLabel,
    RuleParams,
    match_pattern,
)

CSV_HEADER = ["timestamp", "open", "high", "low", "close"]
FILE_HEADER = "candleset v1"


class DatasetError(ValueError):
    pass


class MalformedRow(DatasetError):
    def __init__(self, line_no: int, message: str):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


class NonMonotoneTimestamp(DatasetError):
    def __init__(self, line_no: int, message: str):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


class InvalidOHLC(DatasetError):
    def __init__(self, line_no: int, message: str):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


class InsufficientClass(DatasetError):
    def __init__(self, label: PatternLabel, found: int, needed: int):
        super().__init__(f"class {label.name}: found {found}, needed {needed}")
        self.label = label
        self.found = found
        self.needed = needed


class FormatError(DatasetError):
    pass


@dataclass(frozen=True)
class TickRow:
    timestamp: datetime
    open: float
    high: float
    low: float
    close: float


@dataclass(frozen=True)
class LabeledWindow:
    window: CandleWindow
    label: PatternLabel
    source: str = "real"           # "real" or "generated"
    origin: dict | None = None     # row offset or sampler provenance


def ingest_csv(
    path,
    start: datetime | None = None,
    end: datetime | None = None,
) -> list[TickRow]:
    """Parse and validate an OHLC CSV with strictly increasing timestamps.

    The optional [start, end) range filters rows after validation, so a bad
    row outside the range still fails the ingest.
    """
    rows: list[TickRow] = []
    prev: datetime | None = None
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise MalformedRow(1, "empty file") from None
        if [h.strip() for h in header] != CSV_HEADER:
            raise MalformedRow(1, f"header must be {','.join(CSV_HEADER)}")
        for line_no, raw in enumerate(reader, start=2):
            if len(raw) != 5:
                raise MalformedRow(line_no, f"expected 5 fields, got {len(raw)}")
            try:
                ts = datetime.fromisoformat(raw[0].strip())
                o, h, lo, c = (float(v) for v in raw[1:])
            except ValueError as exc:
                raise MalformedRow(line_no, str(exc)) from None
            if min(o, h, lo, c) <= 0:
                raise InvalidOHLC(line_no, f"non-positive price in {raw[1:]}")
            if h < max(o, c) or lo > min(o, c):
                raise InvalidOHLC(line_no, f"high/low do not bound open/close: {raw[1:]}")
            if prev is not None and ts <= prev:
                raise NonMonotoneTimestamp(line_no, f"{ts.isoformat()} <= {prev.isoformat()}")
            prev = ts
            if (start is None or ts >= start) and (end is None or ts < end):
                rows.append(TickRow(ts, o, h, lo, c))
    return rows


def slide_windows(rows: Sequence, T: int, stride: int = 1) -> list[CandleWindow]:
    """All contiguous length-T windows at the given stride; window k starts
    at row k * stride."""
    if T < 2:
        raise DatasetError("window length must be >= 2")
    if stride < 1:
        raise DatasetError("stride must be >= 1")
    candles = [
        r if isinstance(r, Candle) else Candle(r.open, r.high, r.low, r.close) for r in rows
    ]
    out = []
    for startpos in range(0, len(candles) - T + 1, stride):
        out.append(CandleWindow(tuple(candles[startpos : startpos + T])))
    return out


def label_and_balance(
    windows: Sequence[CandleWindow],
    params: RuleParams = RuleParams(),
    per_class: int = 1500,
    allow_fewer: bool = False,
) -> tuple[list[LabeledWindow], dict[PatternLabel, int]]:
    """Rule-label every window, drop the unlabeled, and keep the first
    per_class matches of each pattern in temporal order.

    Returns the kept records plus the per-class counts actually found
    (capped at per_class). Raises InsufficientClass on the first shortfall
    unless allow_fewer is set.
    """
    if per_class < 1:
        raise DatasetError("per_class must be >= 1")
    kept: dict[PatternLabel, list[LabeledWindow]] = {
        label: [] for label in PatternLabel if label is not PatternLabel.NONE
    }
    for offset, window in enumerate(windows):
        label = match_pattern(window, params)
        if label is PatternLabel.NONE:
            continue
        bucket = kept[label]
        if len(bucket) < per_class:
            bucket.append(LabeledWindow(window, label, "real", {"offset": offset}))
    counts = {label: len(bucket) for label, bucket in kept.items()}
    if not allow_fewer:
        for label, found in counts.items():
            if found < per_class:
                raise InsufficientClass(label, found, per_class)
    out: list[LabeledWindow] = []
    for label in kept:
        out.extend(kept[label])
    out.sort(key=lambda lw: lw.origin["offset"])
    return out, counts


def _record_dict(lw: LabeledWindow) -> dict:
    rec = {
        "label": int(lw.label),
        "source": lw.source,
        "prices": [[c.open, c.high, c.low, c.close] for c in lw.window],
    }
    if lw.origin is not None:
        rec["origin"] = lw.origin
    return rec


def save_dataset(path, records: Iterable[LabeledWindow], T: int, meta: dict | None = None) -> None:
    path = Path(path)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"{FILE_HEADER} T={T}\n")
        if meta is not None:
            fh.write("meta " + json.dumps(meta, sort_keys=True) + "\n")
        for lw in records:
            if len(lw.window) != T:
                raise DatasetError(f"record window length {len(lw.window)} != T={T}")
            fh.write(json.dumps(_record_dict(lw)) + "\n")


def load_dataset(path) -> tuple[list[LabeledWindow], int, dict | None]:
    """Read a dataset file; returns (records, T, meta)."""
    with open(path, encoding="utf-8") as fh:
        first = fh.readline().strip()
        if not first.startswith(FILE_HEADER + " T="):
            raise FormatError(f"bad header {first!r}")
        try:
            T = int(first.split("T=", 1)[1])
        except ValueError:
            raise FormatError(f"bad window size in header {first!r}") from None
        meta: dict | None = None
        records: list[LabeledWindow] = []
        for line_no, line in enumerate(fh, start=2):
            line = line.strip()
            if not line:
                continue
            if line.startswith("meta ") and meta is None and not records:
                meta = json.loads(line[5:])
                continue
            try:
                rec = json.loads(line)
                window = CandleWindow(tuple(Candle(*p) for p in rec["prices"]))
                label = PatternLabel(int(rec["label"]))
            except (KeyError, ValueError, OhlcError) as exc:
                raise FormatError(f"line {line_no}: {exc}") from None
            if len(window) != T:
                raise FormatError(f"line {line_no}: window length {len(window)} != T={T}")
            records.append(
                LabeledWindow(window, label, rec.get("source", "real"), rec.get("origin"))
            )
    return records, T, meta
