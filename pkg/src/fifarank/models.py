"""Outcome models relating a scaled skill difference to game results.

Every function here takes ``z`` already divided by the scale; the callers own
the scale.  Functions accept scalars or numpy arrays and broadcast.

Davidson model (three outcomes, draw parameter ``kappa``, home advantage
``eta``)::

    L(z; H) = u / (u + kappa + 1/u),   u = 10 ** (0.5 * (z + eta * b))
    L(z; A) = (1/u) / (u + kappa + 1/u)
    L(z; D) = kappa / (u + kappa + 1/u)

Skellam model (goal difference ``d`` of two Poisson counts with log-means
``c + x`` and ``c - x``, ``x = z + eta * b``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import logsumexp

LN10 = math.log(10.0)
# Above this |z + b*eta| the Poisson intensities exceed e**30 and the model is
# treated as numerically meaningless.
MAX_LOG_INTENSITY = 30.0


class IntensityOverflowError(ValueError):
    pass


@dataclass(frozen=True)
class DavidsonParams:
    eta: float = 0.0
    kappa: float = 2.0
    scale: float = 600.0

    def __post_init__(self):
        if self.kappa < 0:
            raise ValueError("kappa must be >= 0")
        if self.scale <= 0:
            raise ValueError("scale must be > 0")


@dataclass(frozen=True)
class SkellamParams:
    c: float = 0.0
    eta: float = 0.0
    scale: float = 300.0
    truncation_D: int = 50

    def __post_init__(self):
        if self.scale <= 0:
            raise ValueError("scale must be > 0")
        if self.truncation_D < 1:
            raise ValueError("truncation_D must be >= 1")


@dataclass(frozen=True)
class QuadraticParams:
    """Quadratic per-game loss ``0.5*curvature*(z - target)**2``.

    Not a sports model: a test hook for the leave-one-out machinery, whose
    quadratic approximation is exact for this loss.  The target is
    ``2*score - 1`` (+1 home win, 0 draw, -1 away win).
    """

    curvature: float = 1.0
    scale: float = 1.0


# --------------------------------------------------------------------------
# FIFA logistic


def fifa_expected_score(z):
    """Logistic expected score ``1 / (1 + 10**(-z))``."""
    z = np.asarray(z, dtype=float)
    out = 0.5 * (1.0 + np.tanh(0.5 * LN10 * z))
    return out if out.ndim else float(out)


# --------------------------------------------------------------------------
# Davidson


def _davidson_parts(z, venue_b, p: DavidsonParams):
    a = 0.5 * LN10 * (np.asarray(z, dtype=float) + p.eta * np.asarray(venue_b, dtype=float))
    q = np.exp(-np.abs(a))
    den = 1.0 + p.kappa * q + q * q
    return a, q, den


def davidson_probs(z, venue_b, p: DavidsonParams):
    """Outcome probabilities stacked along the last axis in (H, D, A) order."""
    a, q, den = _davidson_parts(z, venue_b, p)
    big = 1.0 / den
    mid = p.kappa * q / den
    small = q * q / den
    pos = a >= 0
    return np.stack([np.where(pos, big, small), mid, np.where(pos, small, big)], axis=-1)


def davidson_likelihood(z, venue_b, y, p: DavidsonParams):
    """Probability of outcome ``y`` (an Outcome or its code 0/1/2)."""
    code = getattr(y, "code", y)
    probs = davidson_probs(z, venue_b, p)
    out = np.choose(np.asarray(code), np.moveaxis(probs, -1, 0))
    return out if np.ndim(out) else float(out)


def davidson_neg_log_likelihood(z, venue_b, y, p: DavidsonParams):
    """``-log L(z; y)`` evaluated without forming tiny probabilities."""
    code = np.asarray(getattr(y, "code", y))
    a, q, _ = _davidson_parts(z, venue_b, p)
    m = np.abs(a)
    log_den = np.log1p(p.kappa * q + q * q)
    with np.errstate(divide="ignore"):
        mid = log_den - np.log(p.kappa) + m if p.kappa > 0 else np.full_like(log_den, np.inf)
    pos = a >= 0
    home = np.where(pos, log_den, log_den + 2 * m)
    away = np.where(pos, log_den + 2 * m, log_den)
    out = np.where(code == 0, home, np.where(code == 1, mid, away))
    return out if out.ndim else float(out)


def davidson_expected_score(z, venue_b, p: DavidsonParams):
    a, q, den = _davidson_parts(z, venue_b, p)
    big = 1.0 / den
    small = q * q / den
    out = np.where(a >= 0, big, small) + 0.5 * p.kappa * q / den
    return out if out.ndim else float(out)


def davidson_gradient(z, venue_b, y, p: DavidsonParams):
    """Derivative in ``z`` of ``-log L(z; y)``: ``-ln10 * (score - F_kappa(z))``."""
    code = np.asarray(getattr(y, "code", y))
    score = np.choose(code, (1.0, 0.5, 0.0))
    out = -LN10 * (score - davidson_expected_score(z, venue_b, p))
    return out if np.ndim(out) else float(out)


def davidson_hessian(z, venue_b, p: DavidsonParams):
    """Second derivative in ``z`` of ``-log L``; identical for all outcomes."""
    _, q, den = _davidson_parts(z, venue_b, p)
    num = p.kappa * q + 4.0 * q * q + p.kappa * q**3
    out = 0.25 * LN10**2 * num / (den * den)
    return out if out.ndim else float(out)


# --------------------------------------------------------------------------
# Exponentially scaled modified Bessel function of the first kind

_SERIES_MAX_T = 15.0
_REL_EPS = 1e-17


def bessel_i_scaled(order_v: int, t: float) -> float:
    """``I_v(t) * exp(-t)`` for integer ``v >= 0`` and ``t >= 0``.

    Small ``t`` sums the ascending series directly.  Larger ``t`` starts the
    series at its largest term, evaluated in log space with the ``exp(-t)``
    factor folded in, and accumulates outward in both directions; no term
    ever overflows.
    """
    v = int(order_v)
    if v < 0:
        raise ValueError("order must be non-negative")
    t = float(t)
    if t < 0:
        raise ValueError("argument must be non-negative")
    if t == 0.0:
        return 1.0 if v == 0 else 0.0

    half = 0.5 * t
    quarter_sq = half * half
    if t <= _SERIES_MAX_T:
        term = math.exp(v * math.log(half) - math.lgamma(v + 1))
        total = term
        k = 0
        while term > _REL_EPS * total:
            k += 1
            term *= quarter_sq / (k * (k + v))
            total += term
        return total * math.exp(-t)

    k0 = max(0, int(0.5 * (math.sqrt(v * v + t * t) - v)))
    peak = math.exp(
        (2 * k0 + v) * math.log(half) - math.lgamma(k0 + 1) - math.lgamma(k0 + v + 1) - t
    )
    total = peak
    term, k = peak, k0
    while True:
        term *= quarter_sq / ((k + 1) * (k + 1 + v))
        k += 1
        total += term
        if term <= _REL_EPS * total:
            break
    term, k = peak, k0
    while k > 0:
        term *= k * (k + v) / quarter_sq
        k -= 1
        total += term
        if term <= _REL_EPS * total:
            break
    return total


@lru_cache(maxsize=256)
def _log_bessel_orders(vmax: int, t: float) -> np.ndarray:
    vals = np.array([bessel_i_scaled(v, t) for v in range(vmax + 1)])
    with np.errstate(divide="ignore"):
        return np.log(vals)


# --------------------------------------------------------------------------
# Skellam


def _shift(z, venue_b, eta):
    x = np.asarray(z, dtype=float) + eta * np.asarray(venue_b, dtype=float)
    if np.any(np.abs(x) > MAX_LOG_INTENSITY):
        raise IntensityOverflowError(
            f"intensity overflow: |z + b*eta| exceeds {MAX_LOG_INTENSITY}"
        )
    return x


def skellam_neg_log_likelihood(z, venue_b, d, p: SkellamParams):
    """``-log P(goal difference = d)``."""
    x = _shift(z, venue_b, p.eta)
    d = np.asarray(d)
    absd = np.abs(d)
    vmax = int(np.max(absd)) if absd.size else 0
    log_i = _log_bessel_orders(max(vmax, p.truncation_D), 2.0 * math.exp(p.c))
    # mu_h + mu_a - 2 e^c, written to avoid cancellation near x = 0
    excess = 4.0 * math.exp(p.c) * np.sinh(0.5 * x) ** 2
    out = excess - d * x - log_i[absd]
    return out if np.ndim(out) else float(out)


def skellam_expected_diff(z, venue_b, p: SkellamParams):
    x = _shift(z, venue_b, p.eta)
    out = 2.0 * math.exp(p.c) * np.sinh(x)
    return out if np.ndim(out) else float(out)


def skellam_gradient(z, venue_b, d, p: SkellamParams):
    out = -(np.asarray(d) - skellam_expected_diff(z, venue_b, p))
    return out if np.ndim(out) else float(out)


def skellam_hessian(z, venue_b, p: SkellamParams):
    x = _shift(z, venue_b, p.eta)
    out = 2.0 * math.exp(p.c) * np.cosh(x)
    return out if np.ndim(out) else float(out)


def skellam_outcome_log_probs(z, venue_b, p: SkellamParams) -> np.ndarray:
    """Log of the truncated-sum (H, D, A) probabilities, last axis."""
    D = p.truncation_D
    x = np.atleast_1d(_shift(z, venue_b, p.eta))
    diffs = np.arange(-D, D + 1)
    log_i = _log_bessel_orders(D, 2.0 * math.exp(p.c))
    excess = 4.0 * math.exp(p.c) * np.sinh(0.5 * x) ** 2
    log_l = -excess[:, None] + diffs[None, :] * x[:, None] + log_i[np.abs(diffs)][None, :]
    out = np.stack(
        [
            logsumexp(log_l[:, D + 1 :], axis=1),
            log_l[:, D],
            logsumexp(log_l[:, :D], axis=1),
        ],
        axis=-1,
    )
    return out if np.ndim(z) or np.ndim(venue_b) else out[0]


def skellam_outcome_probs(z, venue_b, p: SkellamParams):
    """Truncated-sum outcome probabilities ``(p_A, p_D, p_H)``."""
    lp = np.exp(skellam_outcome_log_probs(z, venue_b, p))
    p_h, p_d, p_a = lp[..., 0], lp[..., 1], lp[..., 2]
    if np.ndim(p_h) == 0:
        return float(p_a), float(p_d), float(p_h)
    return p_a, p_d, p_h


# --------------------------------------------------------------------------
# Dispatch used by the batch solver and evaluation


def loss_terms(params, zs, venue_b, outcome, goal_diff, score):
    """Per-game (loss, first derivative, second derivative) in scaled ``z``."""
    if isinstance(params, DavidsonParams):
        return (
            davidson_neg_log_likelihood(zs, venue_b, outcome, params),
            davidson_gradient(zs, venue_b, outcome, params),
            davidson_hessian(zs, venue_b, params),
        )
    if isinstance(params, SkellamParams):
        return (
            skellam_neg_log_likelihood(zs, venue_b, goal_diff, params),
            skellam_gradient(zs, venue_b, goal_diff, params),
            skellam_hessian(zs, venue_b, params),
        )
    if isinstance(params, QuadraticParams):
        r = np.asarray(zs, dtype=float) - (2.0 * np.asarray(score) - 1.0)
        q = params.curvature
        return 0.5 * q * r * r, q * r, np.full_like(r, q)
    raise TypeError(f"unsupported model parameters {type(params).__name__}")


def outcome_log_probs(params, zs, venue_b) -> np.ndarray:
    """Log (H, D, A) probabilities per game, shape (T, 3)."""
    if isinstance(params, DavidsonParams):
        zs = np.atleast_1d(np.asarray(zs, dtype=float))
        vb = np.broadcast_to(np.asarray(venue_b, dtype=float), zs.shape)
        return np.stack(
            [davidson_neg_log_likelihood(zs, vb, np.full(zs.shape, k), params) for k in range(3)],
            axis=-1,
        ) * -1.0
    if isinstance(params, SkellamParams):
        zs = np.atleast_1d(np.asarray(zs, dtype=float))
        vb = np.broadcast_to(np.asarray(venue_b, dtype=float), zs.shape)
        return skellam_outcome_log_probs(zs, vb, params)
    raise TypeError(f"no outcome distribution for {type(params).__name__}")
