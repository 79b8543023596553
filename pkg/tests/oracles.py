"""Independent reference implementations used as test oracles.

Everything here is written as plain scalar loops straight from the stated
definitions, on purpose sharing no code with the package.  Slow is fine.
"""

import math

import numpy as np


def sma_ref(close, p):
    n = len(close)
    out = [math.nan] * n
    for t in range(p - 1, n):
        out[t] = sum(close[t - p + 1:t + 1]) / p
    return np.array(out)


def wilder_ref(x, p, first):
    """Mean-seeded Wilder smoothing of x[first:]; NaN before first+p-1."""
    n = len(x)
    out = [math.nan] * n
    seed = first + p - 1
    if seed >= n:
        return np.array(out)
    out[seed] = sum(x[first:seed + 1]) / p
    for t in range(seed + 1, n):
        out[t] = (out[t - 1] * (p - 1) + x[t]) / p
    return np.array(out)


def rsi_ref(close, p=14):
    n = len(close)
    gains = [math.nan] * n
    losses = [math.nan] * n
    for t in range(1, n):
        d = close[t] - close[t - 1]
        gains[t] = max(d, 0.0)
        losses[t] = max(-d, 0.0)
    ag = wilder_ref(gains, p, 1)
    al = wilder_ref(losses, p, 1)
    out = [math.nan] * n
    for t in range(p, n):
        if ag[t] == 0.0 and al[t] == 0.0:
            out[t] = 50.0
        elif al[t] == 0.0:
            out[t] = 100.0
        elif ag[t] == 0.0:
            out[t] = 0.0
        else:
            out[t] = 100.0 - 100.0 / (1.0 + ag[t] / al[t])
    return np.array(out)


def cci_ref(high, low, close, p=20):
    n = len(close)
    tp = [(high[t] + low[t] + close[t]) / 3.0 for t in range(n)]
    out = [math.nan] * n
    for t in range(p - 1, n):
        window = tp[t - p + 1:t + 1]
        m = sum(window) / p
        mad = sum(abs(w - m) for w in window) / p
        out[t] = 0.0 if mad == 0.0 else (tp[t] - m) / (0.015 * mad)
    return np.array(out)


def ema_ref(x, n):
    alpha = 2.0 / (n + 1)
    out = [x[0]]
    for t in range(1, len(x)):
        out.append(alpha * x[t] + (1 - alpha) * out[-1])
    return np.array(out)


def macd_ref(close):
    return ema_ref(close, 12) - ema_ref(close, 26)


def true_range_ref(high, low, close):
    n = len(close)
    tr = [high[0] - low[0]]
    for t in range(1, n):
        tr.append(max(high[t] - low[t],
                      abs(high[t] - close[t - 1]),
                      abs(low[t] - close[t - 1])))
    return tr


def atr_ref(high, low, close, p=14):
    return wilder_ref(true_range_ref(high, low, close), p, 0)


def adx_ref(high, low, close, p=14):
    n = len(close)
    pos_dm = [math.nan] * n
    neg_dm = [math.nan] * n
    for t in range(1, n):
        up = high[t] - high[t - 1]
        dn = low[t - 1] - low[t]
        pos_dm[t] = up if (up > dn and up > 0) else 0.0
        neg_dm[t] = dn if (dn > up and dn > 0) else 0.0
    tr = true_range_ref(high, low, close)
    tr[0] = math.nan
    s_pos = wilder_ref(pos_dm, p, 1)
    s_neg = wilder_ref(neg_dm, p, 1)
    s_tr = wilder_ref(tr, p, 1)
    dx = [math.nan] * n
    for t in range(p, n):
        if s_tr[t] == 0.0:
            pdi = ndi = 0.0
        else:
            pdi = 100.0 * s_pos[t] / s_tr[t]
            ndi = 100.0 * s_neg[t] / s_tr[t]
        dx[t] = 0.0 if pdi + ndi == 0.0 else 100.0 * abs(pdi - ndi) / (pdi + ndi)
    return wilder_ref(dx, p, p)


def gae_ref(rewards, values, gamma, lam, bootstrap=0.0):
    """Brute-force double sum A_t = sum_l (gamma*lam)^l * delta_{t+l}."""
    T = len(rewards)
    deltas = []
    for t in range(T):
        v_next = values[t + 1] if t + 1 < T else bootstrap
        deltas.append(rewards[t] + gamma * v_next - values[t])
    adv = []
    for t in range(T):
        total = 0.0
        for l in range(T - t):
            total += (gamma * lam) ** l * deltas[t + l]
        adv.append(total)
    return np.array(adv)


def annualized_return_ref(values, hours):
    return (values[-1] / values[0]) ** (8760.0 / hours) - 1.0


def hourly_returns_ref(values):
    return [values[i + 1] / values[i] - 1.0 for i in range(len(values) - 1)]


def sharpe_ref(values):
    r = hourly_returns_ref(values)
    mean = sum(r) / len(r)
    var = sum((x - mean) ** 2 for x in r) / len(r)
    sd = math.sqrt(var)
    if sd == 0.0:
        return math.nan
    return mean / sd * math.sqrt(8760.0)


def sortino_ref(values):
    r = hourly_returns_ref(values)
    mean = sum(r) / len(r)
    dd = math.sqrt(sum(min(x, 0.0) ** 2 for x in r) / len(r))
    if dd == 0.0:
        return math.inf if mean > 0 else math.nan
    return mean / dd * math.sqrt(8760.0)


def volatility_ref(values):
    r = hourly_returns_ref(values)
    mean = sum(r) / len(r)
    var = sum((x - mean) ** 2 for x in r) / len(r)
    return math.sqrt(var) * math.sqrt(8760.0)


def max_drawdown_ref(values):
    peak = values[0]
    worst = 0.0
    for v in values:
        peak = max(peak, v)
        worst = max(worst, 1.0 - v / peak)
    return worst
