"""Quick invariant suite behind ``betapoly selftest``.

Each check returns ``(passed, detail)``; the runner never raises, a crashing
check counts as a failure.
"""

from __future__ import annotations

import math

import numpy as np

from . import closedform as cf
from .geometry import convex_hull_facets, mc_estimate, polytope_volume
from .quadrature import integrate_weighted, jacobi_rule, weight_integral
from .sampling import RandomSource, sample_beta_points
from .specfun import beta_cdf, log_gamma, reg_inc_beta


def _rel(x, y):
    return abs(x - y) / max(abs(y), 1e-300)


def _check_log_gamma(rng):
    err = max(abs(log_gamma(0.5) - 0.5 * math.log(math.pi)), abs(log_gamma(1.0)))
    return err < 1e-15, f"max abs error {err:.3g}"


def _check_cdf_symmetry(rng):
    betas = rng.uniform(-0.95, 5, 200)
    hs = rng.uniform(-1, 1, 200)
    err = max(abs(beta_cdf(b, -h) - (1 - beta_cdf(b, h))) for b, h in zip(betas, hs))
    err2 = abs(reg_inc_beta(1, 1, 0.3) - 0.3)
    return max(err, err2) < 1e-13, f"max asymmetry {err:.3g}"


def _check_rule_mass(rng):
    worst = 0.0
    for gamma in (-0.5, 0.0, 1.0, 3.5):
        rule = jacobi_rule(gamma, 20)
        worst = max(worst, _rel(float(rule.weights.sum()), weight_integral(gamma)))
    val, _ = integrate_weighted(0.5, lambda h: np.ones_like(h))
    worst = max(worst, _rel(val, math.pi / 2))
    return worst < 1e-12, f"max rel error {worst:.3g}"


def _check_segment(rng):
    v = cf.expected_volume(cf.PolytopeSpec(1, (0, 0)))
    return _rel(v, 2 / 3) < 1e-12, f"{v!r}"


def _check_simplex(rng):
    worst = 0.0
    for d in (1, 2, 3):
        for _ in range(3):
            betas = tuple(rng.uniform(-0.9, 3, d + 1))
            worst = max(worst, _rel(cf.expected_volume(cf.PolytopeSpec(d, betas)), cf.miles_moment(betas, 1)))
    return worst < 1e-10, f"max rel error {worst:.3g}"


def _check_equal_beta(rng):
    worst = 0.0
    for d, n, beta in ((1, 4, -0.5), (2, 5, 0.0), (3, 6, 1.0)):
        v = cf.expected_volume(cf.PolytopeSpec(d, (beta,) * n))
        worst = max(worst, _rel(v, cf.ktt_equal_beta(d, n, beta)))
    return worst < 1e-10, f"max rel error {worst:.3g}"


def _check_kubota(rng):
    worst = 0.0
    for d, n in ((1, 4), (2, 5)):
        betas = tuple(rng.uniform(-0.4, 2, n))
        lhs, rhs = cf.kubota_cross_check(cf.PolytopeSpec(d, betas))
        worst = max(worst, _rel(rhs, lhs))
    return worst < 1e-8, f"max rel error {worst:.3g}"


def _check_facet_count(rng):
    worst = 0.0
    for d in (1, 2, 3):
        betas = tuple(rng.uniform(-0.9, 3, d + 1))
        v = cf.expected_wieacker(cf.PolytopeSpec(d, betas), cf.WieackerParams(0, 0))
        worst = max(worst, abs(v - (d + 1)))
    return worst < 1e-10, f"max abs error {worst:.3g}"


def _check_hull(rng):
    pts = sample_beta_points(3, [0.0] * 8, 1, RandomSource(7))[0]
    facets = convex_hull_facets(pts)
    ok = all(
        np.all(pts @ f.normal <= pts[f.vertices[0]] @ f.normal + 1e-10) for f in facets
    )
    vol = polytope_volume(pts)
    return ok and 0 < vol <= 4 * math.pi / 3, f"{len(facets)} facets, volume {vol:.6g}"


def _check_mc(rng, seed, threads):
    spec = cf.PolytopeSpec(2, (0.0, 0.0, 0.0))
    est = mc_estimate(spec, "volume", 40_000, RandomSource(seed), threads=threads)
    z = (est.mean - 35 / (48 * math.pi)) / est.standard_error
    return abs(z) < 4, f"z = {z:.3f}"


CHECKS = [
    ("specfun.log_gamma", _check_log_gamma),
    ("specfun.beta_cdf_symmetry", _check_cdf_symmetry),
    ("quadrature.rule_mass", _check_rule_mass),
    ("closedform.segment", _check_segment),
    ("closedform.simplex_consistency", _check_simplex),
    ("closedform.equal_beta", _check_equal_beta),
    ("closedform.kubota", _check_kubota),
    ("closedform.facet_count", _check_facet_count),
    ("geometry.hull", _check_hull),
]


def run_selftest(seed: int = 0, threads: int = 1) -> list[dict]:
    rng = np.random.default_rng(seed)
    results = []
    for name, fn in CHECKS + [("geometry.mc_estimate", lambda r: _check_mc(r, seed, threads))]:
        try:
            passed, detail = fn(rng)
        except Exception as exc:  # noqa: BLE001 - a crash is a failed check
            passed, detail = False, f"{type(exc).__name__}: {exc}"
        results.append({"check": name, "passed": bool(passed), "detail": detail})
    return results
