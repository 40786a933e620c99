"""Price CSV loading (Yahoo Finance daily export), returns and date alignment."""

from __future__ import annotations

import csv
import datetime as dt
import os
from dataclasses import dataclass
from typing import Sequence

import numpy as np

__all__ = [
    "CSVFormatError",
    "PriceSeries",
    "ReturnsPanel",
    "RETURN_METHODS",
    "align",
    "load_ohlc_csv",
    "read_panel_csv",
    "to_returns",
]

RETURN_METHODS = ("simple", "diff", "log")
_REQUIRED = ("date", "open", "high", "low", "close", "adj close", "volume")
_NUMERIC = ("open", "high", "low", "close", "adj close")


class CSVFormatError(ValueError):
    pass


@dataclass(frozen=True)
class PriceSeries:
    symbol: str
    dates: tuple
    open: np.ndarray
    high: np.ndarray
    low: np.ndarray
    close: np.ndarray
    adj_close: np.ndarray

    def __len__(self):
        return len(self.dates)

    def prices(self, adjusted: bool = True) -> np.ndarray:
        return self.adj_close if adjusted else self.close

    def subset(self, dates) -> "PriceSeries":
        pos = {d: i for i, d in enumerate(self.dates)}
        idx = np.array([pos[d] for d in dates], dtype=int)
        return PriceSeries(self.symbol, tuple(dates), self.open[idx], self.high[idx],
                           self.low[idx], self.close[idx], self.adj_close[idx])


def _parse_date(text: str) -> dt.date:
    return dt.date.fromisoformat(text.strip())


def load_ohlc_csv(path, symbol: str | None = None) -> PriceSeries:
    """Parse a Yahoo-style daily CSV; header names are case-insensitive.

    Every row with an unparseable field is reported (1-based data-row
    numbers, header excluded) in a single :class:`CSVFormatError`.
    """
    symbol = symbol or os.path.splitext(os.path.basename(str(path)))[0]
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    rows = [r for r in rows if any(c.strip() for c in r)]
    if not rows:
        raise CSVFormatError(f"{path}: empty file")
    header = [h.strip().lower() for h in rows[0]]
    col = {}
    for name in _REQUIRED:
        if name not in header:
            raise CSVFormatError(f"{path}: missing required column {name!r}")
        col[name] = header.index(name)
    if len(rows) == 1:
        raise CSVFormatError(f"{path}: no data rows")

    recs, problems = [], []
    for i, row in enumerate(rows[1:], start=1):
        try:
            d = _parse_date(row[col["date"]])
            vals = [float(row[col[c]]) for c in _NUMERIC]
            if not all(np.isfinite(vals)):
                raise ValueError("non-finite")
            if any(v <= 0 for v in vals):
                raise ValueError("non-positive price")
        except (ValueError, IndexError) as exc:
            problems.append(f"row {i}: {exc}")
            continue
        recs.append((d, *vals))
    if problems:
        raise CSVFormatError(f"{path}: rejected rows: " + "; ".join(problems))

    recs.sort(key=lambda r: r[0])
    dates = tuple(r[0] for r in recs)
    if any(a >= b for a, b in zip(dates, dates[1:])):
        raise CSVFormatError(f"{path}: duplicate dates")
    arr = np.array([r[1:] for r in recs], dtype=float)
    return PriceSeries(symbol, dates, *(arr[:, j] for j in range(5)))


def to_returns(prices, method: str = "diff", adjusted: bool = True) -> np.ndarray:
    """Period returns of a price path (length drops by one).

    ``prices`` is a :class:`PriceSeries` or a plain price array.
    """
    p = prices.prices(adjusted) if isinstance(prices, PriceSeries) else np.asarray(prices, float)
    if p.size < 2:
        raise ValueError("need at least two prices")
    if method == "diff":
        return np.diff(p)
    if method == "simple":
        return np.diff(p) / p[:-1]
    if method == "log":
        if np.any(p <= 0):
            raise ValueError("log returns need positive prices")
        return np.diff(np.log(p))
    raise ValueError(f"unknown return method {method!r}; expected one of {RETURN_METHODS}")


@dataclass(frozen=True)
class ReturnsPanel:
    """Aligned returns; ``dates[i]`` is the end date of return row ``i``."""

    dates: tuple
    matrix: np.ndarray
    symbols: tuple
    y: np.ndarray | None = None
    index_name: str | None = None

    @property
    def n(self) -> int:
        return self.matrix.shape[0]

    def rows(self, mask) -> "ReturnsPanel":
        mask = np.asarray(mask)
        dates = tuple(d for d, m in zip(self.dates, mask) if m)
        y = None if self.y is None else self.y[mask]
        return ReturnsPanel(dates, self.matrix[mask], self.symbols, y, self.index_name)

    def to_csv(self, path) -> None:
        header = ["Date", *self.symbols]
        if self.y is not None:
            header.append(self.index_name or "index")
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(header)
            for i, d in enumerate(self.dates):
                row = [d.isoformat(), *(repr(float(v)) for v in self.matrix[i])]
                if self.y is not None:
                    row.append(repr(float(self.y[i])))
                w.writerow(row)


def align(series_list: Sequence[PriceSeries], market: PriceSeries | None = None,
          method: str = "diff", adjusted: bool = True) -> ReturnsPanel:
    """Inner-join on dates, then convert every series to returns."""
    if not series_list:
        raise ValueError("need at least one security")
    common = set(series_list[0].dates)
    for s in list(series_list[1:]) + ([market] if market is not None else []):
        common &= set(s.dates)
    dates = sorted(common)
    if len(dates) < 2:
        raise ValueError("empty date intersection")
    cols = [to_returns(s.subset(dates), method, adjusted) for s in series_list]
    y = None if market is None else to_returns(market.subset(dates), method, adjusted)
    return ReturnsPanel(tuple(dates[1:]), np.column_stack(cols),
                        tuple(s.symbol for s in series_list), y,
                        None if market is None else market.symbol)


def read_panel_csv(path, index_col: str | None = None):
    """Read a wide CSV (``Date`` first, then one numeric column per series).

    Returns ``(dates, matrix, names, y)``; ``index_col`` is split off as ``y``.
    """
    with open(path, newline="") as fh:
        rows = [r for r in csv.reader(fh) if any(c.strip() for c in r)]
    if len(rows) < 2:
        raise CSVFormatError(f"{path}: empty panel")
    header = [h.strip() for h in rows[0]]
    if header[0].lower() != "date":
        raise CSVFormatError(f"{path}: first column must be Date")
    names = header[1:]
    dates, vals, problems = [], [], []
    for i, row in enumerate(rows[1:], start=1):
        try:
            dates.append(_parse_date(row[0]))
            vals.append([float(c) for c in row[1:len(header)]])
            if len(vals[-1]) != len(names) or not all(np.isfinite(vals[-1])):
                raise ValueError("missing or non-finite value")
        except (ValueError, IndexError) as exc:
            problems.append(f"row {i}: {exc}")
    if problems:
        raise CSVFormatError(f"{path}: rejected rows: " + "; ".join(problems))
    order = np.argsort(np.array(dates, dtype="datetime64[D]"), kind="stable")
    dates = [dates[i] for i in order]
    if any(a >= b for a, b in zip(dates, dates[1:])):
        raise CSVFormatError(f"{path}: duplicate dates")
    M = np.array(vals, dtype=float)[order]
    y = None
    if index_col is not None:
        if index_col not in names:
            raise CSVFormatError(f"{path}: no column named {index_col!r}")
        j = names.index(index_col)
        y = M[:, j]
        M = np.delete(M, j, axis=1)
        names = names[:j] + names[j + 1:]
    return tuple(dates), M, tuple(names), y
