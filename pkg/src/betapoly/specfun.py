"""Special functions for beta distributions on the unit ball.

Gamma-function ratios are always formed as sums of ``log_gamma`` values and
exponentiated once; the arguments reach ``d**2 / 2`` and overflow otherwise.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.special import zeta

from .errors import ConvergenceError, DomainError

__all__ = [
    "BetaParam",
    "log_gamma",
    "log_beta_norm_const",
    "beta_norm_const",
    "beta_density",
    "reg_inc_beta",
    "beta_cdf",
    "beta_cdf_gap",
    "ball_volume",
    "sphere_area",
]

_EULER_GAMMA = float(np.euler_gamma)

# Taylor coefficients of ln Gamma(1 + z) = -gamma z + sum_k (-1)^k zeta(k) z^k / k.
_LGAMMA1_COEFFS = np.array(
    [0.0, -_EULER_GAMMA] + [(-1) ** k * float(zeta(k)) / k for k in range(2, 40)]
)
_SERIES_RADIUS = 0.2

CF_TOL = 1e-15
CF_MAX_ITER = 500
_FPMIN = 1e-300


class BetaParam(float):
    """Shape exponent ``beta > -1`` of the density ``(1 - |x|^2)^beta``."""

    def __new__(cls, value):
        v = float(value)
        if not v > -1.0 or math.isinf(v):
            raise DomainError("specfun", "BetaParam", f"beta must be a finite real > -1, got {value!r}")
        return super().__new__(cls, v)

    def __repr__(self):
        return f"BetaParam({float(self)!r})"


def _lgamma1p_series(z: float) -> float:
    # Horner on the Taylor series of ln Gamma(1 + z), valid for |z| < 1.
    acc = 0.0
    for c in _LGAMMA1_COEFFS[:0:-1]:
        acc = (acc + c) * z
    return acc


def log_gamma(x: float) -> float:
    """Natural log of the gamma function for ``x > 0``.

    Delegates to :func:`math.lgamma` except near the zeros at 1 and 2, where
    a Taylor series keeps the relative error small.
    """
    x = float(x)
    if not x > 0.0:
        raise DomainError("specfun", "log_gamma", f"argument must be positive, got {x!r}")
    if math.isinf(x):
        return math.inf
    z1 = x - 1.0
    if abs(z1) < _SERIES_RADIUS:
        return _lgamma1p_series(z1)
    z2 = x - 2.0
    if abs(z2) < _SERIES_RADIUS:
        return math.log1p(z2) + _lgamma1p_series(z2)
    return math.lgamma(x)


def log_beta_norm_const(d: int, beta: float) -> float:
    """``ln c_{d,beta}`` with ``c = Gamma(d/2 + beta + 1) / (pi^{d/2} Gamma(beta + 1))``."""
    beta = BetaParam(beta)
    if d < 0:
        raise DomainError("specfun", "beta_norm_const", f"dimension must be >= 0, got {d}")
    return log_gamma(d / 2 + beta + 1) - 0.5 * d * math.log(math.pi) - log_gamma(beta + 1)


def beta_norm_const(d: int, beta: float) -> float:
    """Normalizing constant of the beta density in dimension ``d``."""
    return math.exp(log_beta_norm_const(d, beta))


def beta_density(d: int, beta: float, x) -> float:
    """Beta density ``c_{d,beta} (1 - |x|^2)^beta`` at the point ``x`` in R^d."""
    beta = BetaParam(beta)
    x = np.asarray(x, dtype=float).reshape(-1)
    if x.size != d:
        raise DomainError("specfun", "beta_density", f"point has {x.size} coordinates, expected {d}")
    r2 = float(np.dot(x, x))
    if r2 > 1.0 or (r2 == 1.0 and beta >= 0.0):
        return 0.0
    if r2 == 1.0:
        return math.inf
    return math.exp(log_beta_norm_const(d, beta) + beta * math.log1p(-r2))


def _betacf(a: float, b: float, x: np.ndarray) -> np.ndarray:
    """Modified Lentz evaluation of the incomplete-beta continued fraction."""
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = np.ones_like(x)
    d = 1.0 - qab * x / qap
    d = np.where(np.abs(d) < _FPMIN, _FPMIN, d)
    d = 1.0 / d
    h = d.copy()
    active = np.ones(x.shape, dtype=bool)
    for m in range(1, CF_MAX_ITER + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        d = np.where(np.abs(d) < _FPMIN, _FPMIN, d)
        c = 1.0 + aa / c
        c = np.where(np.abs(c) < _FPMIN, _FPMIN, c)
        d = 1.0 / d
        h = np.where(active, h * d * c, h)
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        d = np.where(np.abs(d) < _FPMIN, _FPMIN, d)
        c = 1.0 + aa / c
        c = np.where(np.abs(c) < _FPMIN, _FPMIN, c)
        d = 1.0 / d
        delta = d * c
        h = np.where(active, h * delta, h)
        active &= np.abs(delta - 1.0) >= CF_TOL
        if not active.any():
            return h
    raise ConvergenceError(
        "specfun",
        "reg_inc_beta",
        f"continued fraction did not converge in {CF_MAX_ITER} iterations (a={a}, b={b})",
    )


def _reg_inc_beta(a: float, b: float, t: np.ndarray, tc: np.ndarray) -> np.ndarray:
    # tc carries 1 - t computed without cancellation by the caller.
    out = np.empty_like(t)
    lo = t <= 0.0
    hi = tc <= 0.0
    out[lo] = 0.0
    out[hi & ~lo] = 1.0
    inner = ~(lo | hi)
    if not inner.any():
        return out
    ti, tci = t[inner], tc[inner]
    lbeta = log_gamma(a) + log_gamma(b) - log_gamma(a + b)
    front = np.exp(a * np.log(ti) + b * np.log(tci) - lbeta)
    direct = ti < (a + 1.0) / (a + b + 2.0)
    res = np.empty_like(ti)
    if direct.any():
        res[direct] = front[direct] * _betacf(a, b, ti[direct]) / a
    if (~direct).any():
        res[~direct] = 1.0 - front[~direct] * _betacf(b, a, tci[~direct]) / b
    out[inner] = np.clip(res, 0.0, 1.0)
    return out


def reg_inc_beta(a: float, b: float, t):
    """Regularized incomplete beta function ``I_t(a, b)``.

    Accepts a scalar or an array for ``t``; returns the same shape.
    """
    if not (a > 0 and b > 0):
        raise DomainError("specfun", "reg_inc_beta", f"shape parameters must be positive, got a={a}, b={b}")
    scalar = np.ndim(t) == 0
    tt = np.atleast_1d(np.asarray(t, dtype=float))
    if np.any(np.isnan(tt)) or np.any(tt < 0.0) or np.any(tt > 1.0):
        raise DomainError("specfun", "reg_inc_beta", "t must lie in [0, 1]")
    out = _reg_inc_beta(float(a), float(b), tt, 1.0 - tt)
    return float(out[0]) if scalar else out


def beta_cdf(beta: float, h):
    """CDF ``F_beta(h)`` of the one-dimensional density ``c_{1,beta} (1 - x^2)^beta``.

    ``h`` outside ``[-1, 1]`` is clamped. Scalars in, scalar out.
    """
    beta = BetaParam(beta)
    scalar = np.ndim(h) == 0
    hh = np.clip(np.atleast_1d(np.asarray(h, dtype=float)), -1.0, 1.0)
    # (1 + h)/2 and (1 - h)/2 are both exact-ish; never form 1 - t.
    out = _reg_inc_beta(beta + 1.0, beta + 1.0, 0.5 * (1.0 + hh), 0.5 * (1.0 - hh))
    return float(out[0]) if scalar else out


def beta_cdf_gap(beta: float, h: np.ndarray, gap: np.ndarray) -> np.ndarray:
    """``F_beta(h)`` for arrays, given ``gap = 1 - |h|`` to full relative precision.

    Keeps the ``(1 -+ h)^(beta+1)`` endpoint behaviour intact when ``h`` itself
    has rounded to +-1.
    """
    beta = BetaParam(beta)
    h = np.asarray(h, dtype=float)
    gap = np.asarray(gap, dtype=float)
    neg = h < 0
    t = np.where(neg, 0.5 * gap, 0.5 * (1.0 + h))
    tc = np.where(neg, 0.5 * (1.0 - h), 0.5 * gap)
    return _reg_inc_beta(beta + 1.0, beta + 1.0, t, tc)


def ball_volume(d: int) -> float:
    """Volume ``kappa_d`` of the unit ball in R^d."""
    if d < 0:
        raise DomainError("specfun", "ball_volume", f"dimension must be >= 0, got {d}")
    return math.exp(0.5 * d * math.log(math.pi) - log_gamma(d / 2 + 1))


def sphere_area(d: int) -> float:
    """Surface area ``d * kappa_d`` of the unit sphere in R^d."""
    return d * ball_volume(d)
