"""Hourly OHLCV ingestion, alignment, technical indicators and feature building.

All indicator functions take 1-D float arrays and return arrays of the same
length with NaN over the warm-up prefix where the indicator is undefined.
Wilder smoothing (seeded with the plain mean of the first window, then the
(p-1)/p recursion) is used for RSI, ATR and ADX; EMAs are seeded with the
first value.

Zero-denominator conventions, chosen so constant-price series never emit NaN
after warm-up: RSI 50 when there are neither gains nor losses, CCI 0 on zero
mean deviation, ADX 0 on zero directional movement, volume percent-change 0
when the previous volume is 0.
"""

from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass, field
from datetime import datetime, timezone

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .errors import DataError

log = logging.getLogger(__name__)

HOUR = 3600

# Per-asset feature block layout. Order matters: normalization and the
# 12-wide per-asset slices in the environment depend on it.
PCT_FIELDS = ("d_open", "d_high", "d_low", "d_close", "d_volume")
UNIT_RANGE_FEATURES = frozenset({"rsi", "adx"})  # in [0,100], mapped not standardized


@dataclass(eq=False)
class OhlcvBar:
    """One hourly bar. Prices in quote currency (USD), volume in base units."""

    timestamp: int  # UTC epoch seconds, hour-aligned
    open: float
    high: float
    low: float
    close: float
    volume: float

    def validate(self) -> None:
        if not all(map(math.isfinite, (self.open, self.high, self.low, self.close, self.volume))):
            raise DataError(f"non-finite field in bar at {self.timestamp}")
        if min(self.open, self.high, self.low, self.close) <= 0:
            raise DataError(f"non-positive price in bar at {self.timestamp}")
        if self.volume < 0:
            raise DataError(f"negative volume in bar at {self.timestamp}")
        if self.low > min(self.open, self.close) or self.high < max(self.open, self.close):
            raise DataError(f"OHLC ordering violated in bar at {self.timestamp}")
        if self.low > self.high:
            raise DataError(f"low > high in bar at {self.timestamp}")


@dataclass(eq=False)
class AssetSeries:
    """Time-ordered hourly bars for one asset, stored as parallel arrays.

    Timestamps are strictly increasing, hour-aligned epoch seconds.  Gaps may
    be present after loading; ``align_and_fill`` produces gap-free series.
    """

    asset_id: str
    timestamps: np.ndarray  # int64 seconds
    open: np.ndarray
    high: np.ndarray
    low: np.ndarray
    close: np.ndarray
    volume: np.ndarray

    def __post_init__(self) -> None:
        n = len(self.timestamps)
        for name in ("open", "high", "low", "close", "volume"):
            if len(getattr(self, name)) != n:
                raise DataError(f"{self.asset_id}: column {name} length mismatch")
        if n and np.any(np.diff(self.timestamps) <= 0):
            raise DataError(f"{self.asset_id}: timestamps not strictly increasing")
        if n and np.any(self.timestamps % HOUR != 0):
            raise DataError(f"{self.asset_id}: timestamps not hour-aligned")

    def __len__(self) -> int:
        return len(self.timestamps)

    def missing_hours(self) -> int:
        """Number of grid hours absent between the first and last bar."""
        if len(self) < 2:
            return 0
        span = int(self.timestamps[-1] - self.timestamps[0]) // HOUR + 1
        return span - len(self)

    def bar(self, i: int) -> OhlcvBar:
        return OhlcvBar(
            int(self.timestamps[i]), float(self.open[i]), float(self.high[i]),
            float(self.low[i]), float(self.close[i]), float(self.volume[i]),
        )


@dataclass(eq=False)
class NormStats:
    """Frozen per-feature normalization fitted on a training window."""

    mean: np.ndarray
    std: np.ndarray
    unit_range: np.ndarray  # bool: mapped x/100 - 0.5 instead of standardized
    zero_std: np.ndarray    # bool: degenerate features passed through de-meaned
    train_start: int
    train_end: int


@dataclass(eq=False)
class FeatureMatrix:
    """Per-timestamp feature vectors for the whole asset universe.

    ``values`` is (rows, 12 * n_assets) with the per-asset block layout
    [d_open, d_high, d_low, d_close, d_volume, sma_a, sma_b, rsi, cci, macd,
    adx, atr], assets concatenated in ``assets`` order.
    """

    timestamps: np.ndarray
    values: np.ndarray
    columns: tuple[str, ...]
    assets: tuple[str, ...]
    norm: NormStats | None = None

    def __post_init__(self) -> None:
        if self.values.shape != (len(self.timestamps), len(self.columns)):
            raise DataError("feature matrix shape does not match timestamps/columns")

    @property
    def width(self) -> int:
        return self.values.shape[1]

    def unit_range_mask(self) -> np.ndarray:
        base = [c.split(":", 1)[1] for c in self.columns]
        return np.array([b in UNIT_RANGE_FEATURES for b in base], dtype=bool)

    def index_of(self, ts: int) -> int:
        i = int(np.searchsorted(self.timestamps, ts))
        if i >= len(self.timestamps) or self.timestamps[i] != ts:
            raise DataError(f"timestamp {ts} not covered by feature matrix")
        return i


def _parse_timestamp(text: str) -> int:
    """Unix seconds or ISO-8601 (naive treated as UTC), hour precision."""
    text = text.strip()
    try:
        ts = float(text)
    except ValueError:
        iso = text.replace("Z", "+00:00")
        try:
            dt = datetime.fromisoformat(iso)
        except ValueError as exc:
            raise ValueError(f"unparseable timestamp {text!r}") from exc
        if dt.tzinfo is None:
            dt = dt.replace(tzinfo=timezone.utc)
        ts = dt.timestamp()
    if ts != int(ts):
        raise ValueError(f"timestamp {text!r} is not whole seconds")
    return int(ts)


def load_csv(path: str, asset_id: str) -> AssetSeries:
    """Parse one asset's hourly OHLCV CSV into a sorted AssetSeries.

    Required header: timestamp,open,high,low,close,volume (any order,
    case-insensitive).  Rows are sorted ascending; duplicate timestamps are
    an error; remaining gaps are reported via ``missing_hours``.
    """
    rows: list[tuple[int, float, float, float, float, float]] = []
    try:
        fh = open(path, newline="")
    except OSError as exc:
        raise DataError(f"{asset_id}: cannot open {path}: {exc}") from exc
    with fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError(f"{asset_id}: {path} is empty") from None
        cols = {name.strip().lower(): i for i, name in enumerate(header)}
        required = ("timestamp", "open", "high", "low", "close", "volume")
        missing = [c for c in required if c not in cols]
        if missing:
            raise DataError(f"{asset_id}: {path} missing columns {missing}")
        idx = [cols[c] for c in required]
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not cell.strip() for cell in row):
                continue
            try:
                ts = _parse_timestamp(row[idx[0]])
                o, h, lo, c, v = (float(row[j]) for j in idx[1:])
            except (ValueError, IndexError) as exc:
                raise DataError(f"{asset_id}: {path}:{lineno}: {exc}") from exc
            bar = OhlcvBar(ts, o, h, lo, c, v)
            try:
                bar.validate()
            except DataError as exc:
                raise DataError(f"{asset_id}: {path}:{lineno}: {exc}") from exc
            rows.append((ts, o, h, lo, c, v))
    if not rows:
        raise DataError(f"{asset_id}: {path} has no data rows")
    rows.sort(key=lambda r: r[0])
    ts = np.array([r[0] for r in rows], dtype=np.int64)
    dup = np.flatnonzero(np.diff(ts) == 0)
    if dup.size:
        raise DataError(f"{asset_id}: duplicate timestamp {int(ts[dup[0]])}")
    series = AssetSeries(
        asset_id,
        ts,
        np.array([r[1] for r in rows]),
        np.array([r[2] for r in rows]),
        np.array([r[3] for r in rows]),
        np.array([r[4] for r in rows]),
        np.array([r[5] for r in rows]),
    )
    gaps = series.missing_hours()
    if gaps:
        log.warning("%s: %d missing hours will need forward-filling", asset_id, gaps)
    return series


def align_and_fill(series_set: list[AssetSeries]) -> list[AssetSeries]:
    """Restrict all series to their common time range and forward-fill gaps.

    A synthesized hour carries open=high=low=close=previous close and
    volume=0 ("no trade happened").
    """
    if not series_set:
        raise DataError("align_and_fill: no series given")
    start = max(int(s.timestamps[0]) for s in series_set)
    end = min(int(s.timestamps[-1]) for s in series_set)
    if start > end:
        raise DataError("align_and_fill: series have no overlapping time range")
    grid = np.arange(start, end + HOUR, HOUR, dtype=np.int64)
    out = []
    for s in series_set:
        # index of the most recent bar at or before each grid hour
        pos = np.searchsorted(s.timestamps, grid, side="right") - 1
        exact = s.timestamps[pos] == grid
        o = np.where(exact, s.open[pos], s.close[pos])
        h = np.where(exact, s.high[pos], s.close[pos])
        lo = np.where(exact, s.low[pos], s.close[pos])
        c = s.close[pos]
        v = np.where(exact, s.volume[pos], 0.0)
        out.append(AssetSeries(s.asset_id, grid.copy(), o, h, lo, c, v))
    return out


def pct_change(series: AssetSeries) -> np.ndarray:
    """Per-bar OHLCV percent changes, shape (len-1, 5); first bar dropped.

    Volume change is 0 when the previous volume is 0.
    """
    if len(series) < 2:
        raise DataError(f"{series.asset_id}: need at least 2 bars for percent change")
    out = np.empty((len(series) - 1, 5))
    for j, name in enumerate(("open", "high", "low", "close", "volume")):
        x = getattr(series, name)
        prev, cur = x[:-1], x[1:]
        if name == "volume":
            out[:, j] = np.where(prev == 0, 0.0, (cur - prev) / np.where(prev == 0, 1.0, prev))
        else:
            out[:, j] = (cur - prev) / prev
    return out


def sma(close: np.ndarray, p: int) -> np.ndarray:
    """Simple moving average over p points; NaN for the first p-1 entries."""
    if p < 1:
        raise ValueError("sma: window must be >= 1")
    n = len(close)
    out = np.full(n, np.nan)
    if n >= p:
        out[p - 1:] = sliding_window_view(close, p).mean(axis=1)
    return out


def _wilder(x: np.ndarray, p: int, first: int) -> np.ndarray:
    """Wilder smoothing of x, whose values are defined from index `first`.

    Seeds at index first+p-1 with the mean of the first p values, then
    s[t] = (s[t-1]*(p-1) + x[t]) / p.  NaN before the seed.
    """
    n = len(x)
    out = np.full(n, np.nan)
    seed = first + p - 1
    if seed >= n:
        return out
    out[seed] = x[first:seed + 1].mean()
    for t in range(seed + 1, n):
        out[t] = (out[t - 1] * (p - 1) + x[t]) / p
    return out


def rsi(close: np.ndarray, p: int = 14) -> np.ndarray:
    """Wilder relative strength index in [0, 100]; NaN for the first p entries."""
    n = len(close)
    if n <= p:
        raise ValueError(f"rsi: need more than {p} points, got {n}")
    delta = np.diff(close)
    gain = np.concatenate([[np.nan], np.maximum(delta, 0.0)])
    loss = np.concatenate([[np.nan], np.maximum(-delta, 0.0)])
    avg_gain = _wilder(gain, p, first=1)
    avg_loss = _wilder(loss, p, first=1)
    out = np.full(n, np.nan)
    for t in range(p, n):
        g, l = avg_gain[t], avg_loss[t]
        if g == 0.0 and l == 0.0:
            out[t] = 50.0
        elif l == 0.0:
            out[t] = 100.0
        elif g == 0.0:
            out[t] = 0.0
        else:
            out[t] = 100.0 - 100.0 / (1.0 + g / l)
    return out


def cci(high: np.ndarray, low: np.ndarray, close: np.ndarray, p: int = 20) -> np.ndarray:
    """Commodity channel index; 0 where the window mean deviation is zero."""
    n = len(close)
    if n <= p:
        raise ValueError(f"cci: need more than {p} points, got {n}")
    tp = (high + low + close) / 3.0
    out = np.full(n, np.nan)
    windows = sliding_window_view(tp, p)          # (n-p+1, p), window t ends at t+p-1
    means = windows.mean(axis=1)
    mad = np.abs(windows - means[:, None]).mean(axis=1)
    num = tp[p - 1:] - means
    with np.errstate(invalid="ignore", divide="ignore"):
        vals = num / (0.015 * mad)
    vals[mad == 0.0] = 0.0
    out[p - 1:] = vals
    return out


def ema(x: np.ndarray, n: int) -> np.ndarray:
    """Exponential moving average seeded with the first value, alpha=2/(n+1)."""
    alpha = 2.0 / (n + 1)
    out = np.empty(len(x))
    out[0] = x[0]
    for t in range(1, len(x)):
        out[t] = alpha * x[t] + (1.0 - alpha) * out[t - 1]
    return out


def macd(close: np.ndarray) -> np.ndarray:
    """EMA(12) minus EMA(26) of close; defined from the first bar."""
    if len(close) <= 26:
        raise ValueError(f"macd: need more than 26 points, got {len(close)}")
    return ema(close, 12) - ema(close, 26)


def true_range(high: np.ndarray, low: np.ndarray, close: np.ndarray) -> np.ndarray:
    """TR_t = max(high-low, |high-prev close|, |low-prev close|); TR_0 = high-low."""
    tr = high - low
    if len(close) > 1:
        prev = close[:-1]
        tr = np.concatenate([
            tr[:1],
            np.maximum(tr[1:], np.maximum(np.abs(high[1:] - prev), np.abs(low[1:] - prev))),
        ])
    return tr


def atr(high: np.ndarray, low: np.ndarray, close: np.ndarray, p: int = 14) -> np.ndarray:
    """Wilder-smoothed average true range; NaN for the first p-1 entries."""
    n = len(close)
    if n <= p:
        raise ValueError(f"atr: need more than {p} points, got {n}")
    return _wilder(true_range(high, low, close), p, first=0)


def adx(high: np.ndarray, low: np.ndarray, close: np.ndarray, p: int = 14) -> np.ndarray:
    """Average directional index in [0, 100]; defined from index 2p-1.

    Directional movement and true range are Wilder-smoothed from t=1; DX is
    Wilder-smoothed once more into ADX.  Zero denominators yield 0.
    """
    n = len(close)
    if n <= 2 * p:
        raise ValueError(f"adx: need more than {2 * p} points, got {n}")
    up = high[1:] - high[:-1]
    dn = low[:-1] - low[1:]
    pos_dm = np.concatenate([[np.nan], np.where((up > dn) & (up > 0), up, 0.0)])
    neg_dm = np.concatenate([[np.nan], np.where((dn > up) & (dn > 0), dn, 0.0)])
    tr = true_range(high, low, close)
    tr[0] = np.nan  # DM is undefined at t=0; keep the smoothing windows aligned
    s_pos = _wilder(pos_dm, p, first=1)
    s_neg = _wilder(neg_dm, p, first=1)
    s_tr = _wilder(tr, p, first=1)
    dx = np.full(n, np.nan)
    for t in range(p, n):
        if s_tr[t] == 0.0:
            pos_di = neg_di = 0.0
        else:
            pos_di = 100.0 * s_pos[t] / s_tr[t]
            neg_di = 100.0 * s_neg[t] / s_tr[t]
        denom = pos_di + neg_di
        dx[t] = 0.0 if denom == 0.0 else 100.0 * abs(pos_di - neg_di) / denom
    return _wilder(dx, p, first=p)


@dataclass
class FeatureConfig:
    """Windows for the per-asset indicator block."""

    sma_windows: tuple[int, int] = (30, 60)
    rsi_window: int = 14
    cci_window: int = 20
    atr_window: int = 14
    adx_window: int = 14
    warmup: int = 60  # rows dropped from the front; must cover every indicator

    def feature_names(self) -> tuple[str, ...]:
        return PCT_FIELDS + (
            f"sma{self.sma_windows[0]}", f"sma{self.sma_windows[1]}",
            "rsi", "cci", "macd", "adx", "atr",
        )


def build_features(
    aligned: list[AssetSeries],
    cfg: FeatureConfig | None = None,
    expected_assets: int | None = None,
) -> FeatureMatrix:
    """Assemble the (rows, 12*D) feature matrix from aligned series.

    Per asset: OHLCV percent changes, two SMAs of the detrended close (the
    close percent-change series, so constant prices yield 0), RSI, CCI, MACD,
    ADX and ATR, in that order; warm-up rows are dropped so every emitted
    value is finite.
    """
    cfg = cfg or FeatureConfig()
    if expected_assets is not None and len(aligned) != expected_assets:
        raise DataError(f"expected {expected_assets} assets, got {len(aligned)}")
    if not aligned:
        raise DataError("build_features: no series given")
    ts0 = aligned[0].timestamps
    for s in aligned[1:]:
        if len(s) != len(ts0) or np.any(s.timestamps != ts0):
            raise DataError("build_features: series are not aligned; run align_and_fill first")
    if np.any(np.diff(ts0) != HOUR):
        raise DataError("build_features: aligned series must be gap-free hourly")
    needed = max(cfg.warmup + 1, max(cfg.sma_windows), 2 * cfg.adx_window + 1, 27)
    if len(ts0) <= needed:
        raise DataError(f"build_features: need more than {needed} aligned rows, got {len(ts0)}")

    names = cfg.feature_names()
    n = len(ts0)
    blocks = []
    columns: list[str] = []
    for s in aligned:
        block = np.full((n, len(names)), np.nan)
        block[1:, 0:5] = pct_change(s)
        dclose = block[:, 3]  # leading NaN keeps SMA warm-up aligned
        block[:, 5] = sma(dclose, cfg.sma_windows[0])
        block[:, 6] = sma(dclose, cfg.sma_windows[1])
        block[:, 7] = rsi(s.close, cfg.rsi_window)
        block[:, 8] = cci(s.high, s.low, s.close, cfg.cci_window)
        block[:, 9] = macd(s.close)
        block[:, 10] = adx(s.high, s.low, s.close, cfg.adx_window)
        block[:, 11] = atr(s.high, s.low, s.close, cfg.atr_window)
        blocks.append(block)
        columns.extend(f"{s.asset_id}:{f}" for f in names)

    values = np.hstack(blocks)[cfg.warmup:]
    timestamps = ts0[cfg.warmup:].copy()
    if not np.isfinite(values).all():
        raise DataError("build_features: non-finite feature values after warm-up")
    return FeatureMatrix(timestamps, values, tuple(columns), tuple(s.asset_id for s in aligned))


def fit_apply_norm(fm: FeatureMatrix, train_range: tuple[int, int]) -> FeatureMatrix:
    """Normalize features with statistics fitted on [start, end) rows only.

    Standardized features use train mean/std; RSI and ADX are mapped to
    [-0.5, 0.5] via x/100 - 0.5.  A zero-std feature is passed through
    de-meaned (so train rows become 0) and flagged.
    """
    start, end = train_range
    mask = (fm.timestamps >= start) & (fm.timestamps < end)
    if not mask.any():
        raise DataError("fit_apply_norm: train range selects no rows")
    unit = fm.unit_range_mask()
    train = fm.values[mask]
    mean = train.mean(axis=0)
    std = train.std(axis=0)
    zero_std = ~unit & (std < 1e-12)
    if zero_std.any():
        degenerate = [fm.columns[i] for i in np.flatnonzero(zero_std)]
        log.warning("fit_apply_norm: zero-std features passed through de-meaned: %s", degenerate)
    mean = np.where(unit, 0.0, mean)
    safe_std = np.where(unit | zero_std, 1.0, std)
    out = (fm.values - mean) / safe_std
    out[:, unit] = fm.values[:, unit] / 100.0 - 0.5
    stats = NormStats(mean=mean, std=np.where(unit, 1.0, std), unit_range=unit,
                      zero_std=zero_std, train_start=start, train_end=end)
    return FeatureMatrix(fm.timestamps.copy(), out, fm.columns, fm.assets, norm=stats)
