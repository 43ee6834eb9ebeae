"""Daily close-price ingestion and the batch quality filter."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import pandas as pd

from gobm.errors import GobmError, InvalidParameterError
from gobm.estimators import NONPOSITIVE_VAR_MINUS, NONPOSITIVE_VAR_PLUS, NO_MINUS_SIDE, NO_PLUS_SIDE, FitReport
from gobm.model import DEFAULT_DT, LogSeries

log = logging.getLogger(__name__)

THIN_SIDE = "thin side"
NONPOSITIVE_VARIANCE = "non-positive variance"


class DataFormatError(GobmError, ValueError):
    pass


@dataclass(frozen=True, eq=False)
class PriceSeries:
    dates: np.ndarray  # datetime64[D], strictly increasing
    closes: np.ndarray
    source: str = ""
    n_dropped: int = 0

    def __post_init__(self):
        if self.dates.shape != self.closes.shape:
            raise DataFormatError("dates and closes differ in length")
        if self.closes.size and not np.all(self.closes > 0):
            raise DataFormatError("close prices must be positive")
        if self.dates.size > 1 and not np.all(np.diff(self.dates) > np.timedelta64(0, "D")):
            raise DataFormatError("dates must be strictly increasing")

    def __len__(self):
        return self.closes.size


def load_prices(path, date_col="Date", close_col="Close", prefer_adjusted=False,
                adjusted_col="Adj Close") -> PriceSeries:
    """Read a daily close CSV.

    Rows with a missing or non-positive price are dropped (counted in
    ``n_dropped`` and logged). The output is sorted by date.
    """
    path = Path(path)
    df = pd.read_csv(path, dtype=str, keep_default_na=False, encoding="utf-8")
    price_col = adjusted_col if prefer_adjusted else close_col
    missing = [c for c in (date_col, price_col) if c not in df.columns]
    if missing:
        raise DataFormatError(f"{path}: missing column(s) {', '.join(missing)}")
    try:
        dates = pd.to_datetime(df[date_col].str.strip(), format="%Y-%m-%d")
    except (ValueError, TypeError) as exc:
        raise DataFormatError(f"{path}: unparsable date ({exc})") from None
    closes = pd.to_numeric(df[price_col].str.strip(), errors="coerce").to_numpy(dtype=float)
    keep = np.isfinite(closes) & (closes > 0)
    dropped = int((~keep).sum())
    if dropped:
        log.warning("%s: dropped %d row(s) with missing or non-positive price", path, dropped)
    dates = dates[keep].to_numpy().astype("datetime64[D]")
    closes = closes[keep]
    if closes.size == 0:
        raise DataFormatError(f"{path}: no usable rows")
    order = np.argsort(dates, kind="stable")
    dates, closes = dates[order], closes[order]
    if np.any(np.diff(dates) == np.timedelta64(0, "D")):
        raise DataFormatError(f"{path}: duplicate dates")
    return PriceSeries(dates, closes, source=str(path), n_dropped=dropped)


def to_log_series(p: PriceSeries, dt=DEFAULT_DT) -> LogSeries:
    """Natural log of the closes on a uniform trading-time grid."""
    if not (math.isfinite(dt) and dt > 0):
        raise InvalidParameterError(f"dt must be > 0, got {dt!r}")
    return LogSeries(np.log(p.closes), dt)


def load_log_series(path, dt=DEFAULT_DT, date_col="Date", close_col="Close", prefer_adjusted=False,
                    log_column=None) -> LogSeries:
    """Load either a price CSV or a file that already holds log-prices.

    A file with a ``logprice`` column (the simulator's export) is read as
    log-prices directly, as is any column named by ``log_column``.
    """
    path = Path(path)
    header = pd.read_csv(path, nrows=0, encoding="utf-8").columns
    col = log_column if log_column is not None else ("logprice" if "logprice" in header else None)
    if col is None:
        return to_log_series(load_prices(path, date_col, close_col, prefer_adjusted), dt)
    if col not in header:
        raise DataFormatError(f"{path}: missing column {col}")
    values = pd.to_numeric(pd.read_csv(path, encoding="utf-8")[col], errors="coerce").to_numpy(dtype=float)
    if values.size == 0 or not np.all(np.isfinite(values)):
        raise DataFormatError(f"{path}: column {col} must hold finite numbers")
    return LogSeries(values, dt)


@dataclass(frozen=True)
class QcVerdict:
    accepted: bool
    reason: str | None = None

    def __bool__(self):
        return self.accepted


def qc_filter(fit: FitReport, min_side_fraction=0.05) -> QcVerdict:
    """Reject fits leaving at most ``min_side_fraction`` of the time on a side,
    or with a non-positive variance estimate."""
    if min(fit.q_minus, fit.q_plus) / fit.T <= min_side_fraction or {NO_MINUS_SIDE, NO_PLUS_SIDE} & set(fit.flags):
        return QcVerdict(False, THIN_SIDE)
    if {NONPOSITIVE_VAR_MINUS, NONPOSITIVE_VAR_PLUS} & set(fit.flags):
        return QcVerdict(False, NONPOSITIVE_VARIANCE)
    return QcVerdict(True)


def read_manifest(path):
    """``(ticker, path)`` pairs from a ``ticker,path`` CSV; relative paths
    resolve against the manifest's directory."""
    path = Path(path)
    df = pd.read_csv(path, dtype=str, keep_default_na=False, encoding="utf-8")
    if not {"ticker", "path"} <= set(df.columns):
        raise DataFormatError(f"{path}: manifest needs columns ticker,path")
    out = []
    for ticker, p in zip(df["ticker"], df["path"]):
        p = Path(p.strip())
        out.append((ticker.strip(), p if p.is_absolute() else path.parent / p))
    return out
