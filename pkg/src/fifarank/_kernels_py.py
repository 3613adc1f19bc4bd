"""Pure-Python replay loops; reference for and fallback to ``_kernels.pyx``.

Both implementations share one contract: ``theta`` is updated in place and
per-game arrays are returned.  ``z`` is the raw (unscaled) skill difference
home minus away before the game is applied.
"""

import math

import numpy as np

LN10 = math.log(10.0)
MAX_LOG_INTENSITY = 30.0


def fifa_replay(theta, home, away, y_home, y_away, step, knockout, scale):
    T = len(home)
    z = np.empty(T)
    dh = np.empty(T)
    da = np.empty(T)
    th = theta
    half_ln10_over_s = 0.5 * LN10 / scale
    for t in range(T):
        i = home[t]
        j = away[t]
        zt = th[i] - th[j]
        f = 0.5 * (1.0 + math.tanh(half_ln10_over_s * zt))
        delta_h = y_home[t] - f
        delta_a = y_away[t] - (1.0 - f)
        if knockout[t]:
            delta_h = max(delta_h, 0.0)
            delta_a = max(delta_a, 0.0)
        z[t] = zt
        dh[t] = step[t] * delta_h
        da[t] = step[t] * delta_a
        th[i] += dh[t]
        th[j] += da[t]
    return z, dh, da


def davidson_replay(theta, home, away, venue_b, y_home, weight, K, eta, kappa, scale):
    T = len(home)
    z = np.empty(T)
    delta = np.empty(T)
    th = theta
    c = 0.5 * LN10
    for t in range(T):
        i = home[t]
        j = away[t]
        zt = th[i] - th[j]
        a = c * (zt / scale + eta * venue_b[t])
        q = math.exp(-abs(a))
        den = 1.0 + kappa * q + q * q
        f = ((1.0 if a >= 0.0 else q * q) + 0.5 * kappa * q) / den
        z[t] = zt
        delta[t] = K * weight[t] * (y_home[t] - f)
        th[i] += delta[t]
        th[j] -= delta[t]
    return z, delta


def skellam_replay(theta, home, away, venue_b, goal_diff, weight, K, c, eta, scale):
    """Returns ``(z, delta, bad)``; ``bad`` is the first overflowing game or -1."""
    T = len(home)
    z = np.empty(T)
    delta = np.empty(T)
    th = theta
    two_ec = 2.0 * math.exp(c)
    for t in range(T):
        i = home[t]
        j = away[t]
        zt = th[i] - th[j]
        x = zt / scale + eta * venue_b[t]
        if abs(x) > MAX_LOG_INTENSITY:
            return z[:t], delta[:t], t
        z[t] = zt
        delta[t] = K * weight[t] * (goal_diff[t] - two_ec * math.sinh(x))
        th[i] += delta[t]
        th[j] -= delta[t]
    return z, delta, -1
