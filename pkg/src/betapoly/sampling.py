"""Seeded sampling of beta-distributed points in the unit ball.

A point with density proportional to ``(1 - |x|^2)^beta`` on the ball of R^d
factors as ``R * U``: ``U`` uniform on the sphere and ``R^2 ~ Beta(d/2, beta+1)``.
The beta variate comes from a ratio of two gamma variates, which stays valid
for shapes below one (``-1 < beta < 0``).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .closedform import PolytopeSpec
from .errors import DomainError
from .specfun import BetaParam

__all__ = [
    "RandomSource",
    "SampleBatch",
    "sample_beta_points",
    "sample_beta_point",
    "sample_sphere_point",
    "sample_polytopes",
    "project_first_k",
    "empirical_halfspace_prob",
]


@dataclass
class RandomSource:
    """A reproducible random stream identified by ``(seed, stream)``.

    Instances are single-owner; give each worker its own stream.
    """

    seed: int
    stream: int = 0
    path: tuple = ()
    _gen: np.random.Generator | None = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self):
        if not (0 <= self.seed < 2**64 and 0 <= self.stream < 2**64):
            raise DomainError("sampling", "RandomSource", "seed and stream must be 64-bit unsigned integers")

    @property
    def generator(self) -> np.random.Generator:
        if self._gen is None:
            ss = np.random.SeedSequence(self.seed, spawn_key=(self.stream,) + tuple(self.path))
            self._gen = np.random.Generator(np.random.PCG64(ss))
        return self._gen

    def substream(self, index: int) -> "RandomSource":
        """Independent child stream; depends only on ``(seed, stream, path, index)``."""
        return RandomSource(self.seed, self.stream, tuple(self.path) + (int(index),))


def _directions(gen: np.random.Generator, shape: tuple, d: int) -> np.ndarray:
    z = gen.standard_normal(shape + (d,))
    norm = np.linalg.norm(z, axis=-1, keepdims=True)
    # A zero Gaussian vector has probability zero; redraw to be safe.
    bad = (norm == 0).reshape(shape)
    while bad.any():
        z[bad] = gen.standard_normal((int(bad.sum()), d))
        norm = np.linalg.norm(z, axis=-1, keepdims=True)
        bad = (norm == 0).reshape(shape)
    return z / norm


def sample_beta_points(d: int, betas, size: int, rng: RandomSource) -> np.ndarray:
    """Array of shape ``(size, len(betas), d)``; column ``i`` follows ``f_{d, betas[i]}``."""
    if d < 1:
        raise DomainError("sampling", "sample_beta_point", f"dimension must be >= 1, got {d}")
    betas = np.array([BetaParam(b) for b in betas], dtype=float)
    gen = rng.generator
    shape = (int(size), len(betas))
    u = _directions(gen, shape, d)
    g1 = gen.standard_gamma(d / 2, size=shape)
    g2 = gen.standard_gamma(np.broadcast_to(betas + 1.0, shape))
    total = g1 + g2
    s = np.divide(g1, total, out=np.ones_like(g1), where=total > 0)
    return np.sqrt(s)[..., None] * u


def sample_beta_point(d: int, beta: float, rng: RandomSource) -> np.ndarray:
    """One point of R^d with density ``f_{d, beta}``."""
    return sample_beta_points(d, [beta], 1, rng)[0, 0]


def sample_sphere_point(d: int, rng: RandomSource, size: int | None = None) -> np.ndarray:
    """Uniform point(s) on the unit sphere, the ``beta -> -1`` limit."""
    if d < 1:
        raise DomainError("sampling", "sample_sphere_point", f"dimension must be >= 1, got {d}")
    if size is None:
        return _directions(rng.generator, (), d)
    return _directions(rng.generator, (int(size),), d)


@dataclass(frozen=True)
class SampleBatch:
    spec: PolytopeSpec
    points: np.ndarray  # (N, n, d)
    seed: int
    stream: int

    @property
    def d(self) -> int:
        return self.spec.d


def sample_polytopes(spec: PolytopeSpec, size: int, rng: RandomSource) -> SampleBatch:
    """Vertex sets of ``size`` independent random polytopes."""
    pts = sample_beta_points(spec.d, spec.betas, size, rng)
    return SampleBatch(spec, pts, rng.seed, rng.stream)


def project_first_k(x, k: int) -> np.ndarray:
    """Orthogonal projection onto the span of the first ``k`` coordinates."""
    x = np.asarray(x, dtype=float)
    if not 1 <= k <= x.shape[-1]:
        raise DomainError("sampling", "project_first_k", f"k must be in [1, {x.shape[-1]}], got {k}")
    return x[..., :k]


def empirical_halfspace_prob(d: int, beta: float, h: float, n_samples: int, rng: RandomSource) -> float:
    """Fraction of ``n_samples`` beta points whose last coordinate exceeds ``h``."""
    if n_samples < 1:
        raise DomainError("sampling", "empirical_halfspace_prob", "need at least one sample")
    pts = sample_beta_points(d, [beta], n_samples, rng)[:, 0, :]
    return float(np.mean(pts[:, -1] > h))
