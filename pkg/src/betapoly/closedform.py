"""Closed-form expectations for random beta polytopes.

``P = conv(X_1, ..., X_n)`` with independent ``X_i`` drawn from the beta
density ``f_{d, beta_i}`` on the unit ball of R^d. The evaluators here give

* moments of the volume of a beta simplex (``miles_moment``),
* ``E Vol_d(P)`` for arbitrary, non-identical betas (``expected_volume``),
* the facet functional ``E sum_F dist(aff F, 0)^a Vol_{d-1}(F)^b``
  (``expected_wieacker``),

plus the equal-beta volume formula, the hyperplane-section integral, and a
projection (Kubota) identity used as cross-checks.

Both subset sums depend on an index subset only through the multiset of
selected betas (and hence of the complementary ones), so subsets are grouped
by that multiset before any integral is evaluated.
"""

from __future__ import annotations

import math
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Iterable, NamedTuple, Sequence

import numpy as np

from .errors import BudgetError, DomainError
from .quadrature import DEFAULT_REL_TOL, integrate_weighted
from .specfun import (
    BetaParam,
    ball_volume,
    beta_cdf_gap,
    log_beta_norm_const,
    log_gamma,
)

__all__ = [
    "DEFAULT_BUDGET",
    "PolytopeSpec",
    "WieackerParams",
    "ClosedFormResult",
    "SubsetGroup",
    "beta_vector",
    "miles_moment",
    "enumerate_subsets_grouped",
    "count_subset_groups",
    "expected_volume",
    "expected_volume_result",
    "ktt_equal_beta",
    "expected_wieacker",
    "expected_wieacker_result",
    "lemma_section_value",
    "kubota_cross_check",
]

DEFAULT_BUDGET = 10**7
# Target for q * (gamma + 1 + s): the graded rule then converges like m^(-2 * target).
_GRADING_TARGET = 4.0
_MAX_GRADING = 64


def beta_vector(values: Iterable[float]) -> tuple[BetaParam, ...]:
    """Validate and freeze a sequence of shape parameters."""
    betas = tuple(BetaParam(v) for v in values)
    if not betas:
        raise DomainError("closedform", "BetaVector", "need at least one beta")
    return betas


@dataclass(frozen=True)
class PolytopeSpec:
    """Ambient dimension ``d`` and one beta per random point."""

    d: int
    betas: tuple = field(default=())

    def __post_init__(self):
        if not isinstance(self.d, (int, np.integer)) or self.d < 1:
            raise DomainError("closedform", "PolytopeSpec", f"dimension must be a positive integer, got {self.d!r}")
        object.__setattr__(self, "d", int(self.d))
        object.__setattr__(self, "betas", beta_vector(self.betas))

    @property
    def n(self) -> int:
        return len(self.betas)


@dataclass(frozen=True)
class WieackerParams:
    """Exponents of facet distance (``a``) and facet volume (``b``)."""

    a: float = 0.0
    b: float = 1.0

    def __post_init__(self):
        for name in ("a", "b"):
            v = float(getattr(self, name))
            if not (v >= 0.0 and math.isfinite(v)):
                raise DomainError("closedform", "WieackerParams", f"{name} must be a finite real >= 0, got {v!r}")
            object.__setattr__(self, name, v)

    @property
    def extrapolated(self) -> bool:
        """True when ``b + 1`` is not an integer moment order."""
        return not float(self.b).is_integer()


@dataclass(frozen=True)
class ClosedFormResult:
    value: float
    quadrature_error: float
    term_count: int
    extrapolated: bool = False


class SubsetGroup(NamedTuple):
    selected: tuple  # sorted betas in the subset
    complement: tuple  # sorted betas outside it
    multiplicity: int


# -- moments of simplex volumes ------------------------------------------------


def _log_miles_moment(betas: Sequence[float], k: float) -> float:
    n = len(betas)
    s = math.fsum(betas)
    out = -k * log_gamma(n) if n > 1 else 0.0  # ln((n-1)!) = lnGamma(n)
    out += log_gamma(n * (n - 1 + k) / 2 + s + 1) - log_gamma((n - 1) * (n + k) / 2 + s + 1)
    for j in range(1, n):
        out += log_gamma((j + k) / 2) - log_gamma(j / 2)
    for b in betas:
        out += log_gamma((n - 1) / 2 + b + 1) - log_gamma((n - 1 + k) / 2 + b + 1)
    return out


def miles_moment(betas: Sequence[float], k: float) -> float:
    """``E Vol_{n-1}(conv(X_1..X_n))^k`` for ``X_i ~ f_{n-1, beta_i}``.

    The points live in R^(n-1), so the simplex is full-dimensional. ``k``
    may be any real ``>= 0``; the Gamma expression is analytic in ``k``,
    though it is classically stated for integer orders.
    """
    betas = beta_vector(betas)
    k = float(k)
    if not (k >= 0 and math.isfinite(k)):
        raise DomainError("closedform", "miles_moment", f"moment order must be >= 0, got {k!r}")
    if len(betas) == 1 or k == 0:
        return 1.0
    return math.exp(_log_miles_moment(betas, k))


# -- subset grouping -----------------------------------------------------------


def _value_counts(betas: Sequence[float]) -> list[tuple[float, int]]:
    return sorted(Counter(float(b) for b in betas).items())


def count_subset_groups(betas: Sequence[float], r: int) -> int:
    """Number of distinct selected-multisets of size ``r``."""
    ways = [1] + [0] * r
    for _, m in _value_counts(betas):
        nxt = [0] * (r + 1)
        for total, w in enumerate(ways):
            if w:
                for c in range(min(m, r - total) + 1):
                    nxt[total + c] += w
        ways = nxt
    return ways[r]


def enumerate_subsets_grouped(
    betas: Sequence[float], r: int, budget: int = DEFAULT_BUDGET
) -> list[SubsetGroup]:
    """Group the ``C(n, r)`` index subsets by the multiset of betas they select.

    The complement multiset is determined by the selection, so one key covers
    both. Groups come back in canonical (lexicographic) order.
    """
    betas = beta_vector(betas)
    n = len(betas)
    if not 1 <= r <= n:
        raise DomainError("closedform", "enumerate_subsets_grouped", f"subset size must be in [1, {n}], got {r}")
    groups = count_subset_groups(betas, r)
    if groups > budget:
        raise BudgetError(
            "closedform", "enumerate_subsets_grouped", f"{groups} subset groups exceed the budget of {budget}"
        )
    counts = _value_counts(betas)
    out = []

    def walk(pos, left, mult, sel, comp):
        if pos == len(counts):
            if left == 0:
                out.append(SubsetGroup(tuple(sel), tuple(comp), mult))
            return
        v, m = counts[pos]
        if left > sum(c for _, c in counts[pos:]):
            return
        for c in range(min(m, left) + 1):
            walk(pos + 1, left - c, mult * math.comb(m, c), sel + [v] * c, comp + [v] * (m - c))

    walk(0, r, 1, [], [])
    out.sort()
    return out


def _naive_groups(betas: Sequence[float], r: int) -> list[SubsetGroup]:
    # Every index subset on its own, in combinations() order.
    idx = range(len(betas))
    out = []
    for sub in combinations(idx, r):
        rest = [i for i in idx if i not in sub]
        out.append(
            SubsetGroup(
                tuple(sorted(float(betas[i]) for i in sub)),
                tuple(sorted(float(betas[i]) for i in rest)),
                1,
            )
        )
    return out


# -- the h-integrals -----------------------------------------------------------


class _CdfCache:
    """Memo of ``F_b`` node evaluations keyed by shifted beta and node bytes."""

    def __init__(self):
        self._store: dict = {}

    def __call__(self, b: float, h: np.ndarray, gap: np.ndarray) -> np.ndarray:
        key = (b, h.tobytes(), gap.tobytes())
        val = self._store.get(key)
        if val is None:
            val = beta_cdf_gap(b, h, gap)
            val.setflags(write=False)
            self._store[key] = val
        return val


def _is_polynomial_cdf(b: float) -> bool:
    # F_b is a polynomial exactly when b is a nonnegative integer.
    return b >= 0 and float(b).is_integer()


def _grading(gamma: float, shifted: Iterable[float]) -> int:
    singular = [b + 1.0 for b in shifted if not _is_polynomial_cdf(b)]
    if not singular:
        return 1
    q = math.ceil(_GRADING_TARGET / (gamma + 1.0 + min(singular)))
    return max(1, min(q, _MAX_GRADING))


def _cdf_product_integral(
    gamma: float,
    complement: Sequence[float],
    shift: float,
    cache: _CdfCache,
    rel_tol: float,
    abs_power: float = 0.0,
) -> tuple[float, float]:
    """``int |h|^a (1-h^2)^gamma prod_k F_{beta_k + shift}(h) dh``."""
    powers = sorted(Counter(float(b) + shift for b in complement).items())

    def g(h, gap):
        out = np.ones_like(h)
        for b, p in powers:
            out = out * cache(b, h, gap) ** p
        return out

    q = _grading(gamma, (b for b, _ in powers))
    return integrate_weighted(gamma, g, rel_tol, abs_power=abs_power, grading=q, with_gap=True)


def _map_groups(fn, groups, threads):
    if threads is None or threads <= 1 or len(groups) < 2:
        return [fn(g) for g in groups]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, groups))


def _exact_sum(pairs) -> float:
    # Exact rational accumulation, rounded once: the result does not depend
    # on summation order or on how subsets were grouped.
    total = Fraction(0)
    for mult, value in pairs:
        total += mult * Fraction(value)
    return float(total)


# -- expected volume -------------------------------------------------------------


def expected_volume_result(
    spec: PolytopeSpec,
    *,
    rel_tol: float = DEFAULT_REL_TOL,
    budget: int = DEFAULT_BUDGET,
    threads: int | None = None,
    grouped: bool = True,
) -> ClosedFormResult:
    """``E Vol_d(P)`` with its quadrature error estimate and term count.

    ``grouped=False`` sums over every index subset separately; it exists as
    a reference path and agrees bit-for-bit with the grouped sum.
    """
    d, betas = spec.d, spec.betas
    if spec.n < d + 1:
        raise DomainError(
            "closedform", "expected_volume", f"need n >= d + 1 points, got n={spec.n}, d={d}"
        )
    if grouped:
        groups = enumerate_subsets_grouped(betas, d + 1, budget)
    else:
        groups = _naive_groups(betas, d + 1)
    log_pref = math.log(ball_volume(d)) - (d + 1) / 2 * math.log(math.pi) - d * math.log(2.0)
    cache = _CdfCache()
    shift = (d - 1) / 2

    def term(group: SubsetGroup):
        s = math.fsum(group.selected)
        coef = (d + 1) ** 2 / 2 + s
        log_ratio = math.fsum(log_gamma((d + 2) / 2 + b) - log_gamma((d + 3) / 2 + b) for b in group.selected)
        gamma = s + (d * d + 2 * d - 1) / 2
        val, err = _cdf_product_integral(gamma, group.complement, shift, cache, rel_tol)
        scale = coef * math.exp(log_ratio + log_pref)
        return scale * val, scale * err

    results = _map_groups(term, groups, threads)
    value = _exact_sum((g.multiplicity, v) for g, (v, _) in zip(groups, results))
    error = _exact_sum((g.multiplicity, e) for g, (_, e) in zip(groups, results))
    return ClosedFormResult(value, error, len(groups))


def expected_volume(spec: PolytopeSpec, **kwargs) -> float:
    """Expected d-volume of the convex hull of independent beta points."""
    return expected_volume_result(spec, **kwargs).value


def ktt_equal_beta(d: int, n: int, beta: float, *, rel_tol: float = DEFAULT_REL_TOL) -> float:
    """Expected volume when all ``n`` points share the same ``beta``.

    Evaluated on its own (binomial count times a single integral), so it is
    an independent check on :func:`expected_volume`.
    """
    beta = BetaParam(beta)
    if d < 1 or n < d + 1:
        raise DomainError("closedform", "ktt_equal_beta", f"need d >= 1 and n >= d + 1, got d={d}, n={n}")
    log_c = (
        math.log(d + 1)
        + math.log(ball_volume(d))
        - (d + 1) / 2 * math.log(math.pi)
        - d * math.log(2.0)
        + log_gamma(n + 1) - log_gamma(d + 2) - log_gamma(n - d)
        + math.log((d + 1) / 2 + beta)
        + (d + 1) * (log_gamma((d + 2) / 2 + beta) - log_gamma((d + 3) / 2 + beta))
    )
    gamma = (d + 1) * beta + (d * d + 2 * d - 1) / 2
    b = beta + (d - 1) / 2
    power = n - d - 1

    def g(h, gap):
        return beta_cdf_gap(b, h, gap) ** power

    q = _grading(gamma, [b] if power else [])
    val, _ = integrate_weighted(gamma, g, rel_tol, grading=q, with_gap=True)
    return math.exp(log_c) * val


# -- facet functional --------------------------------------------------------------


def expected_wieacker_result(
    spec: PolytopeSpec,
    params: WieackerParams = WieackerParams(),
    *,
    rel_tol: float = DEFAULT_REL_TOL,
    budget: int = DEFAULT_BUDGET,
    threads: int | None = None,
    grouped: bool = True,
) -> ClosedFormResult:
    """``E sum_F dist(aff F, 0)^a Vol_{d-1}(F)^b`` over the facets of ``P``.

    For ``n == d`` the hull is a single (d-1)-simplex counted from both
    sides, consistent with ``T = 2 Vol`` of a flat polytope.
    """
    d, betas = spec.d, spec.betas
    a, b = params.a, params.b
    if spec.n < d:
        raise DomainError("closedform", "expected_wieacker", f"need n >= d points, got n={spec.n}, d={d}")
    groups = enumerate_subsets_grouped(betas, d, budget) if grouped else _naive_groups(betas, d)
    log_pref = log_gamma(d + 1) + math.log(ball_volume(d))
    cache = _CdfCache()
    shift = (d - 1) / 2

    def term(group: SubsetGroup):
        sel = group.selected
        log_c = math.fsum(log_beta_norm_const(d, x) - log_beta_norm_const(d - 1, x) for x in sel)
        log_m = _log_miles_moment(sel, b + 1) if d > 1 else 0.0
        gamma = math.fsum(sel) + (d - 1) * (d + b + 1) / 2
        val, err = _cdf_product_integral(gamma, group.complement, shift, cache, rel_tol, abs_power=a)
        scale = math.exp(log_pref + log_c + log_m)
        return scale * val, scale * err

    results = _map_groups(term, groups, threads)
    value = _exact_sum((g.multiplicity, v) for g, (v, _) in zip(groups, results))
    error = _exact_sum((g.multiplicity, e) for g, (_, e) in zip(groups, results))
    return ClosedFormResult(value, error, len(groups), params.extrapolated)


def expected_wieacker(spec: PolytopeSpec, params: WieackerParams = WieackerParams(), **kwargs) -> float:
    return expected_wieacker_result(spec, params, **kwargs).value


# -- section integral and projection identity ---------------------------------------


def lemma_section_value(d: int, betas: Sequence[float], k: float, h: float) -> float:
    """Integral of ``Vol_{d-1}^k`` times the product of densities over ``E^d``.

    ``E`` is any affine hyperplane at distance ``h`` from the origin and the
    ``d`` points range over ``E`` with ``f_{d, beta_i}`` densities.
    """
    betas = beta_vector(betas)
    if len(betas) != d:
        raise DomainError("closedform", "lemma_section_value", f"need exactly d={d} betas, got {len(betas)}")
    if not abs(h) < 1:
        raise DomainError("closedform", "lemma_section_value", f"|h| must be < 1, got {h}")
    log_c = math.fsum(log_beta_norm_const(d, x) - log_beta_norm_const(d - 1, x) for x in betas)
    expo = math.fsum(betas) + (d - 1) * (k + d) / 2
    return math.exp(log_c + expo * math.log1p(-h * h)) * miles_moment(betas, k)


def kubota_cross_check(spec: PolytopeSpec, **kwargs) -> tuple[float, float]:
    """Expected volume two ways: directly, and as a scaled surface area in R^(d+1).

    The second route lowers every beta by 1/2 and lifts to dimension d+1,
    where projection onto a hyperplane recovers the original law.
    """
    if any(b <= -0.5 for b in spec.betas):
        raise DomainError("closedform", "kubota_cross_check", "every beta must exceed -1/2")
    d = spec.d
    lhs = expected_volume(spec, **kwargs)
    lifted = PolytopeSpec(d + 1, tuple(b - 0.5 for b in spec.betas))
    surface = expected_wieacker(lifted, WieackerParams(0.0, 1.0), **kwargs)
    rhs = ball_volume(d) / ((d + 1) * ball_volume(d + 1)) * surface
    return lhs, rhs
