"""Random beta polytopes: closed-form expectations and a Monte Carlo oracle."""

from .closedform import (
    PolytopeSpec,
    WieackerParams,
    enumerate_subsets_grouped,
    expected_volume,
    expected_wieacker,
    ktt_equal_beta,
    kubota_cross_check,
    lemma_section_value,
    miles_moment,
)
from .geometry import convex_hull_facets, mc_estimate, polytope_volume, simplex_volume, wieacker_T
from .quadrature import integrate_weighted, jacobi_rule
from .sampling import RandomSource, sample_beta_point, sample_sphere_point
from .specfun import BetaParam, ball_volume, beta_cdf, beta_density, beta_norm_const, log_gamma, reg_inc_beta

__version__ = "0.1.0"

__all__ = [
    "BetaParam",
    "PolytopeSpec",
    "RandomSource",
    "WieackerParams",
    "ball_volume",
    "beta_cdf",
    "beta_density",
    "beta_norm_const",
    "convex_hull_facets",
    "enumerate_subsets_grouped",
    "expected_volume",
    "expected_wieacker",
    "integrate_weighted",
    "jacobi_rule",
    "ktt_equal_beta",
    "kubota_cross_check",
    "lemma_section_value",
    "log_gamma",
    "mc_estimate",
    "miles_moment",
    "polytope_volume",
    "reg_inc_beta",
    "sample_beta_point",
    "sample_sphere_point",
    "simplex_volume",
    "wieacker_T",
]
