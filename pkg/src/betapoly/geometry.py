"""Convex hulls of small point sets and the Monte Carlo oracle.

Facets are found by brute force: a d-subset spans a facet iff every other
point lies strictly on one side of its affine hull. At desk scale (d <= 4,
n <= ~30) this is fast, dimension-generic and easy to trust. All kernels work
on a batch of point sets at once, shape ``(B, n, d)``.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations
from typing import NamedTuple, Union

import numpy as np

from .closedform import PolytopeSpec, WieackerParams
from .errors import DegeneracyError, DomainError, MonteCarloAbort
from .sampling import RandomSource, sample_beta_points

__all__ = [
    "Facet",
    "FacetSet",
    "MCEstimate",
    "convex_hull_facets",
    "simplex_volume",
    "polytope_volume",
    "wieacker_T",
    "hull_measures",
    "mc_estimate",
]

log = logging.getLogger(__name__)

DEGENERACY_TOL = 1e-10
MAX_RESAMPLE_RATE = 1e-3
BATCH_SIZE = 4096
# Cap on B * F * n array entries per geometry chunk.
_CHUNK_ENTRIES = 2_000_000


@dataclass(frozen=True)
class Facet:
    vertices: tuple  # indices into the input point list
    normal: np.ndarray  # unit, pointing away from the vertex centroid
    offset: float  # distance from the origin to the facet's affine hull
    volume: float  # (d-1)-volume


@dataclass(frozen=True)
class FacetSet:
    d: int
    facets: tuple

    def __len__(self):
        return len(self.facets)

    def __iter__(self):
        return iter(self.facets)


@lru_cache(maxsize=64)
def _subsets(n: int, d: int) -> np.ndarray:
    return np.array(list(combinations(range(n), d)), dtype=np.intp).reshape(-1, d)


def _cofactor_normals(edges: np.ndarray) -> np.ndarray:
    """Generalized cross product of the ``d-1`` rows of ``edges`` (..., d-1, d).

    The result is orthogonal to every row and its norm is the
    ``(d-1)``-parallelotope volume they span.
    """
    d = edges.shape[-1]
    if d == 1:
        return np.ones(edges.shape[:-2] + (1,))
    cols = []
    for j in range(d):
        minor = np.delete(edges, j, axis=-1)
        cols.append((-1) ** j * np.linalg.det(minor))
    return np.stack(cols, axis=-1)


def _facet_kernel(points: np.ndarray):
    """Facet data for a batch of point sets.

    Returns ``(is_facet, degenerate, normals, offsets, heights, volumes)``
    where per-subset arrays have shape ``(B, F)`` (``normals``: ``(B, F, d)``)
    and ``degenerate`` has shape ``(B,)``. Normals are oriented outward,
    ``offsets`` are origin distances and ``heights`` centroid distances.
    """
    bsz, n, d = points.shape
    subs = _subsets(n, d)
    verts = points[:, subs, :]  # (B, F, d, d)
    edges = verts[:, :, 1:, :] - verts[:, :, :1, :]
    raw = _cofactor_normals(edges)
    norm = np.linalg.norm(raw, axis=-1)
    scale = np.max(np.abs(points), axis=(1, 2))
    scale = np.where(scale > 0, scale, 1.0)
    tol = DEGENERACY_TOL * scale  # (B,)
    flat = norm <= DEGENERACY_TOL * scale[:, None] ** (d - 1)
    safe = np.where(flat, 1.0, norm)
    unit = raw / safe[..., None]
    c = np.einsum("bfk,bfk->bf", unit, verts[:, :, 0, :])
    side = np.einsum("bfk,bnk->bfn", unit, points) - c[..., None]  # (B, F, n)

    own = np.zeros((len(subs), n), dtype=bool)
    own[np.arange(len(subs))[:, None], subs] = True
    others = ~own[None, :, :]
    t = tol[:, None, None]
    pos = ((side > t) & others).any(axis=-1)
    neg = ((side < -t) & others).any(axis=-1)
    amb = ((np.abs(side) <= t) & others).any(axis=-1)
    degenerate = (flat | amb).any(axis=-1)
    is_facet = ~(pos & neg) & ~flat & ~amb

    centroid = points.mean(axis=1)  # (B, d)
    sc = np.einsum("bfk,bk->bf", unit, centroid) - c
    flip = np.where(sc > 0, -1.0, 1.0)
    normals = unit * flip[..., None]
    offsets = np.abs(c)
    heights = np.abs(sc)
    volumes = norm / math.factorial(d - 1)
    return is_facet, degenerate, normals, offsets, heights, volumes


class _Measures(NamedTuple):
    volume: np.ndarray
    wieacker: np.ndarray
    degenerate: np.ndarray


def hull_measures(points: np.ndarray, a: float = 0.0, b: float = 1.0) -> _Measures:
    """Per-set hull volume, ``T_{a,b}`` and degeneracy flag for ``(B, n, d)`` input."""
    points = np.asarray(points, dtype=float)
    if points.ndim != 3:
        raise DomainError("geometry", "hull_measures", "expected an array of shape (B, n, d)")
    bsz, n, d = points.shape
    if n < d + 1:
        raise DomainError("geometry", "convex_hull_facets", f"need n >= d + 1 points, got n={n}, d={d}")
    n_sub = math.comb(n, d)
    chunk = max(1, _CHUNK_ENTRIES // (n_sub * n))
    vol = np.empty(bsz)
    wie = np.empty(bsz)
    deg = np.empty(bsz, dtype=bool)
    for lo in range(0, bsz, chunk):
        sl = slice(lo, min(bsz, lo + chunk))
        is_facet, degenerate, _, offsets, heights, volumes = _facet_kernel(points[sl])
        vol[sl] = np.where(is_facet, volumes * heights, 0.0).sum(axis=1) / d
        wie[sl] = np.where(is_facet, offsets**a * volumes**b, 0.0).sum(axis=1)
        deg[sl] = degenerate
    return _Measures(vol, wie, deg)


def convex_hull_facets(points) -> FacetSet:
    """All facets of ``conv(points)`` for points in general position."""
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2:
        raise DomainError("geometry", "convex_hull_facets", "points must be a 2-D array (n, d)")
    n, d = pts.shape
    if n < d + 1:
        raise DomainError("geometry", "convex_hull_facets", f"need n >= d + 1 points, got n={n}, d={d}")
    is_facet, degenerate, normals, offsets, _, volumes = _facet_kernel(pts[None])
    if degenerate[0]:
        raise DegeneracyError("geometry", "convex_hull_facets", "points are not in general position")
    subs = _subsets(n, d)
    facets = tuple(
        Facet(tuple(int(i) for i in subs[f]), normals[0, f].copy(), float(offsets[0, f]), float(volumes[0, f]))
        for f in np.flatnonzero(is_facet[0])
    )
    return FacetSet(d, facets)


def simplex_volume(vertices) -> float:
    """m-volume of the simplex on ``m + 1`` vertices in R^d via the Gram determinant."""
    v = np.asarray(vertices, dtype=float)
    if v.ndim != 2 or v.shape[0] < 1:
        raise DomainError("geometry", "simplex_volume", "vertices must be a 2-D array (m + 1, d)")
    m = v.shape[0] - 1
    if m > v.shape[1]:
        raise DomainError("geometry", "simplex_volume", f"{m + 1} vertices cannot be independent in R^{v.shape[1]}")
    if m == 0:
        return 1.0
    g = v[1:] - v[0]
    det = np.linalg.det(g @ g.T)
    return math.sqrt(det) / math.factorial(m) if det > 0 else 0.0


def _single(points, op: str) -> tuple[np.ndarray, int]:
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2:
        raise DomainError("geometry", op, "points must be a 2-D array (n, d)")
    return pts[None], pts.shape[1]


def polytope_volume(points) -> float:
    """d-volume of the convex hull, as a sum of cones over facets from the centroid."""
    batch, _ = _single(points, "polytope_volume")
    res = hull_measures(batch)
    if res.degenerate[0]:
        raise DegeneracyError("geometry", "polytope_volume", "points are not in general position")
    return float(res.volume[0])


def wieacker_T(points, a: float, b: float) -> float:
    """Sum over facets of ``offset^a * volume^b``."""
    params = WieackerParams(a, b)
    batch, _ = _single(points, "wieacker_T")
    res = hull_measures(batch, params.a, params.b)
    if res.degenerate[0]:
        raise DegeneracyError("geometry", "wieacker_T", "points are not in general position")
    return float(res.wieacker[0])


# -- Monte Carlo ---------------------------------------------------------------------


class MCEstimate(NamedTuple):
    mean: float
    standard_error: float


Functional = Union[str, WieackerParams]


def _batch_stats(spec, functional, size, rng):
    pts = sample_beta_points(spec.d, spec.betas, size, rng)
    if functional == "volume":
        a, b = 0.0, 1.0
    else:
        a, b = functional.a, functional.b
    res = hull_measures(pts, a, b)
    vals = res.volume if functional == "volume" else res.wieacker
    deg = res.degenerate
    resampled = 0
    cap = MAX_RESAMPLE_RATE * size + 10
    while deg.any():
        idx = np.flatnonzero(deg)
        resampled += len(idx)
        if resampled > cap:
            raise MonteCarloAbort(
                "geometry", "mc_estimate", f"{resampled} degenerate draws in a batch of {size}", resampled / size
            )
        fresh = sample_beta_points(spec.d, spec.betas, len(idx), rng)
        sub = hull_measures(fresh, a, b)
        vals[idx] = sub.volume if functional == "volume" else sub.wieacker
        deg[idx] = sub.degenerate
    mean = float(np.mean(vals))
    m2 = float(np.sum((vals - mean) ** 2))
    return size, mean, m2, resampled


def mc_estimate(
    spec: PolytopeSpec,
    functional: Functional,
    n_samples: int,
    rng: RandomSource,
    *,
    threads: int | None = None,
    batch_size: int = BATCH_SIZE,
) -> MCEstimate:
    """Sample mean and standard error of a hull functional over random polytopes.

    ``functional`` is ``"volume"`` or a :class:`WieackerParams`. Draws are
    split into fixed batches, each with its own substream of ``rng``, and
    merged in batch order, so the result does not depend on ``threads``.
    Degenerate draws are redrawn from the same substream.
    """
    if n_samples < 2:
        raise DomainError("geometry", "mc_estimate", f"need at least 2 samples, got {n_samples}")
    if functional != "volume" and not isinstance(functional, WieackerParams):
        raise DomainError("geometry", "mc_estimate", f"unknown functional {functional!r}")
    if spec.n < spec.d + 1:
        raise DomainError("geometry", "mc_estimate", f"need n >= d + 1 points, got n={spec.n}, d={spec.d}")
    sizes = [min(batch_size, n_samples - lo) for lo in range(0, n_samples, batch_size)]

    def run(i):
        return _batch_stats(spec, functional, sizes[i], rng.substream(i))

    if threads is None or threads <= 1 or len(sizes) < 2:
        parts = [run(i) for i in range(len(sizes))]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(run, range(len(sizes))))

    count, mean, m2, resampled = 0, 0.0, 0.0, 0
    for nb, mb, m2b, rb in parts:
        # Chan et al. pairwise merge of (count, mean, M2).
        delta = mb - mean
        tot = count + nb
        mean += delta * nb / tot
        m2 += m2b + delta * delta * count * nb / tot
        count = tot
        resampled += rb
    rate = resampled / n_samples
    if resampled:
        log.info("mc_estimate: resampled %d degenerate draws (rate %.3g)", resampled, rate)
    if rate > MAX_RESAMPLE_RATE:
        raise MonteCarloAbort(
            "geometry", "mc_estimate", f"degenerate draw rate {rate:.3g} exceeds {MAX_RESAMPLE_RATE}", rate
        )
    var = m2 / (count - 1)
    return MCEstimate(mean, math.sqrt(var / count))
