import numpy as np
import pytest

from ensembletrader.market_data import HOUR, AssetSeries

START_TS = 1_514_764_800  # 2018-01-01T00:00:00Z


def make_series(asset_id, n, rng=None, start_price=100.0, drift=0.0, vol=0.01,
                start_ts=START_TS):
    """Random-walk hourly OHLCV series with valid bar invariants."""
    rng = rng or np.random.default_rng(0)
    steps = rng.normal(drift, vol, size=n)
    close = start_price * np.exp(np.cumsum(steps))
    open_ = np.concatenate([[start_price], close[:-1]])
    wig = np.abs(rng.normal(0, vol / 2, size=n))
    high = np.maximum(open_, close) * (1 + wig)
    low = np.minimum(open_, close) / (1 + wig)
    volume = np.abs(rng.normal(10.0, 3.0, size=n))
    ts = start_ts + HOUR * np.arange(n, dtype=np.int64)
    return AssetSeries(asset_id, ts, open_, high, low, close, volume)


def make_constant_series(asset_id, n, price=5.0, start_ts=START_TS):
    ts = start_ts + HOUR * np.arange(n, dtype=np.int64)
    flat = np.full(n, price)
    return AssetSeries(asset_id, ts, flat.copy(), flat.copy(), flat.copy(),
                       flat.copy(), np.full(n, 7.0))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
