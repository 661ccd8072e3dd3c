"""Gauss-Jacobi quadrature for integrals of the form

    int_{-1}^{1} |h|^a (1 - h^2)^gamma g(h) dh,   gamma > -1, a >= 0.

Rules come from the Golub-Welsch eigenproblem of the Jacobi matrix. The
factor ``(1 - h^2)^gamma`` always lives in the quadrature weight, never in the
integrand, so endpoint-singular weights (gamma close to -1) cost nothing.

Two evaluation paths:

* smooth ``g`` and no ``|h|^a`` factor: the symmetric rule on [-1, 1];
* otherwise the interval is split at 0 and each half is mapped by
  ``1 - |h| = u**q`` onto a Jacobi rule in ``u``. The split makes ``|h|^a``
  a weight factor; the grading exponent ``q`` pushes algebraic endpoint
  singularities of ``g`` (``(1 -+ h)^s`` with non-integer ``s``) to
  ``u**(q s)``, which restores fast convergence.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np
from scipy.linalg import LinAlgError, eigh_tridiagonal

from .errors import ConvergenceError, DomainError
from .specfun import log_gamma

__all__ = [
    "QuadratureRule",
    "jacobi_rule",
    "gauss_jacobi",
    "weight_integral",
    "integrate_weighted",
]

M_START = 16
M_MAX = 2048
DEFAULT_REL_TOL = 1e-11
_ABS_FLOOR = 1e-300
# Differences below this multiple of sum(w |g|) are rounding noise.
_CANCEL_EPS = 64 * np.finfo(float).eps


@dataclass(frozen=True)
class QuadratureRule:
    """Gauss rule for the weight ``(1 - h^2)^gamma`` on [-1, 1]."""

    gamma: float
    nodes: np.ndarray
    weights: np.ndarray

    def __len__(self):
        return len(self.nodes)

    def apply(self, g: Callable[[np.ndarray], np.ndarray]) -> float:
        return float(np.dot(self.weights, g(self.nodes)))


def _log_jacobi_mass(alpha: float, beta: float) -> float:
    # ln int_{-1}^{1} (1-x)^alpha (1+x)^beta dx
    return (
        (alpha + beta + 1) * math.log(2.0)
        + log_gamma(alpha + 1)
        + log_gamma(beta + 1)
        - log_gamma(alpha + beta + 2)
    )


def weight_integral(gamma: float) -> float:
    """``int_{-1}^{1} (1 - h^2)^gamma dh = sqrt(pi) Gamma(gamma+1) / Gamma(gamma+3/2)``."""
    if not gamma > -1:
        raise DomainError("quadrature", "weight_integral", f"gamma must be > -1, got {gamma}")
    return math.exp(0.5 * math.log(math.pi) + log_gamma(gamma + 1) - log_gamma(gamma + 1.5))


def _jacobi_recurrence(alpha: float, beta: float, m: int):
    k = np.arange(m, dtype=float)
    s = 2 * k + alpha + beta
    diag = np.empty(m)
    diag[0] = (beta - alpha) / (alpha + beta + 2)
    if m > 1:
        diag[1:] = (beta**2 - alpha**2) / (s[1:] * (s[1:] + 2))
    if alpha == beta:
        diag[:] = 0.0
    off = np.empty(max(m - 1, 0))
    if m > 1:
        # k = 1 separately: the general formula is 0/0 when alpha + beta = -1.
        off[0] = 4 * (1 + alpha) * (1 + beta) / ((2 + alpha + beta) ** 2 * (3 + alpha + beta))
        kk = k[2:]
        ss = s[2:]
        off[1:] = (
            4 * kk * (kk + alpha) * (kk + beta) * (kk + alpha + beta)
            / (ss**2 * (ss + 1) * (ss - 1))
        )
    return diag, np.sqrt(off)


@lru_cache(maxsize=512)
def gauss_jacobi(alpha: float, beta: float, m: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights of the ``m``-point rule for ``(1-x)^alpha (1+x)^beta``.

    Returned arrays are read-only and shared through the cache.
    """
    if not (alpha > -1 and beta > -1):
        raise DomainError("quadrature", "jacobi_rule", f"exponents must be > -1, got ({alpha}, {beta})")
    if m < 1:
        raise DomainError("quadrature", "jacobi_rule", f"rule size must be >= 1, got {m}")
    diag, off = _jacobi_recurrence(alpha, beta, m)
    try:
        x, vecs = eigh_tridiagonal(diag, off, select="a")
    except LinAlgError as exc:
        raise ConvergenceError(
            "quadrature", "jacobi_rule", f"eigensolver failed for m={m}, alpha={alpha}, beta={beta}: {exc}"
        ) from exc
    w = math.exp(_log_jacobi_mass(alpha, beta)) * vecs[0, :] ** 2
    if alpha == beta:
        x = 0.5 * (x - x[::-1])
        w = 0.5 * (w + w[::-1])
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def jacobi_rule(gamma: float, m: int) -> QuadratureRule:
    """Symmetric ``m``-point Gauss-Jacobi rule for the weight ``(1 - h^2)^gamma``."""
    gamma = float(gamma)
    x, w = gauss_jacobi(gamma, gamma, int(m))
    return QuadratureRule(gamma=gamma, nodes=x, weights=w)


@lru_cache(maxsize=512)
def _half_rule(gamma: float, a: float, q: int, m: int) -> tuple[np.ndarray, np.ndarray]:
    """Rule for ``int_0^1 h^a (1-h^2)^gamma G(h) dh`` under ``1 - h = u**q``.

    Returns (h nodes, gaps 1 - h, weights); the weights already contain
    every factor except ``G``.
    """
    big_a = q * (gamma + 1.0) - 1.0
    x, w = gauss_jacobi(a, big_a, m)
    u = 0.5 * (1.0 + x)
    uq = u**q
    h = 1.0 - uq
    # (1 - u^q) / (1 - u) as a polynomial: avoids 0/0 next to h = 0.
    ratio = np.polynomial.polynomial.polyval(u, np.ones(q))
    scale = q * 2.0 ** (-(big_a + a + 1.0))
    weights = w * scale * ratio**a * (2.0 - uq) ** gamma
    for arr in (h, uq, weights):
        arr.setflags(write=False)
    return h, uq, weights


def _needs_split(a: float) -> bool:
    return not (a == 0.0 or (float(a).is_integer() and int(a) % 2 == 0))


def integrate_weighted(
    gamma: float,
    g: Callable[[np.ndarray], np.ndarray],
    rel_tol: float = DEFAULT_REL_TOL,
    *,
    abs_power: float = 0.0,
    grading: int = 1,
    with_gap: bool = False,
    m_max: int = M_MAX,
) -> tuple[float, float]:
    """Evaluate ``int_{-1}^{1} |h|^a (1-h^2)^gamma g(h) dh`` by rule doubling.

    ``g`` must accept a 1-D array of nodes. Rule sizes go 16, 32, ... up to
    ``m_max`` until two successive values agree to ``rel_tol``. Returns
    ``(value, error_estimate)`` where the estimate is the last difference.

    With ``with_gap=True`` the integrand is called as ``g(h, gap)`` where
    ``gap = 1 - |h|`` is carried exactly; needed whenever ``g`` has a
    fractional power of ``1 -+ h`` that rounding of ``h`` would destroy.
    """
    gamma = float(gamma)
    a = float(abs_power)
    if not gamma > -1:
        raise DomainError("quadrature", "integrate_weighted", f"gamma must be > -1, got {gamma}")
    if not a >= 0:
        raise DomainError("quadrature", "integrate_weighted", f"abs_power must be >= 0, got {a}")
    if not rel_tol > 0:
        raise DomainError("quadrature", "integrate_weighted", f"rel_tol must be positive, got {rel_tol}")
    if grading < 1:
        raise DomainError("quadrature", "integrate_weighted", f"grading must be >= 1, got {grading}")

    split = grading > 1 or _needs_split(a)

    def evaluate(m: int) -> tuple[float, float]:
        # Returns the rule value and the rule applied to |integrand|; the
        # latter sets the rounding floor for integrals that cancel to ~0.
        if not split:
            x, w = gauss_jacobi(gamma, gamma, m)
            vals = g(x, 1.0 - np.abs(x)) if with_gap else g(x)
            if a:
                vals = vals * x ** int(a)
            return float(np.dot(w, vals)), float(np.dot(w, np.abs(vals)))
        h, gap, w = _half_rule(gamma, a, grading, m)
        if with_gap:
            vp, vm = g(h, gap), g(-h, gap)
        else:
            vp, vm = g(h), g(-h)
        return float(np.dot(w, vp) + np.dot(w, vm)), float(np.dot(w, np.abs(vp)) + np.dot(w, np.abs(vm)))

    m = M_START
    prev, _ = evaluate(m)
    cur = prev
    while m < m_max:
        m *= 2
        prev, (cur, mass) = cur, evaluate(m)
        diff = abs(cur - prev)
        floor = max(_CANCEL_EPS * mass, _ABS_FLOOR)
        if diff <= max(rel_tol * abs(cur), floor):
            return cur, diff
    raise ConvergenceError(
        "quadrature",
        "integrate_weighted",
        f"no convergence to rel_tol={rel_tol} by m={m_max} (gamma={gamma}, a={a}, q={grading}); "
        f"last values {prev!r}, {cur!r}",
        last_values=(prev, cur),
    )
