import math

import numpy as np
import pytest
from scipy import stats

from betapoly.closedform import PolytopeSpec
from betapoly.errors import DomainError
from betapoly.sampling import (
    RandomSource,
    empirical_halfspace_prob,
    project_first_k,
    sample_beta_point,
    sample_beta_points,
    sample_polytopes,
    sample_sphere_point,
)
from betapoly.specfun import beta_cdf

N_BIG = 1_000_000


def within(values, target, k=3.0):
    se = values.std(ddof=1) / math.sqrt(len(values))
    return abs(values.mean() - target) <= k * se


class TestBetaPoints:
    @pytest.mark.parametrize("d,beta", [(2, 0.0), (3, 1.0)])
    def test_radial_second_moment(self, d, beta):
        x = sample_beta_points(d, [beta], N_BIG, RandomSource(1))[:, 0]
        sq = (x**2).sum(axis=1)
        assert within(sq, (d / 2) / (d / 2 + beta + 1))

    @pytest.mark.parametrize("d,beta", [(1, -0.7), (2, 0.0), (4, 2.5)])
    def test_half_below_zero(self, d, beta):
        x = sample_beta_points(d, [beta], N_BIG, RandomSource(2))[:, 0]
        assert within((x[:, -1] <= 0).astype(float), 0.5)

    def test_inside_ball(self):
        x = sample_beta_points(3, [-0.95, 0.0, 6.0], 20_000, RandomSource(3))
        assert x.shape == (20_000, 3, 3)
        assert np.all(np.linalg.norm(x, axis=-1) <= 1.0 + 1e-15)

    def test_columns_follow_their_own_beta(self):
        x = sample_beta_points(2, [-0.5, 3.0], 200_000, RandomSource(4))
        for i, beta in enumerate((-0.5, 3.0)):
            s = (x[:, i] ** 2).sum(axis=1)
            assert stats.kstest(s, stats.beta(1.0, beta + 1).cdf).pvalue > 1e-3

    def test_single_point(self):
        p = sample_beta_point(3, 0.5, RandomSource(0))
        assert p.shape == (3,) and np.linalg.norm(p) < 1

    def test_domain(self):
        with pytest.raises(DomainError):
            sample_beta_points(0, [0.0], 10, RandomSource(0))
        with pytest.raises(DomainError):
            sample_beta_points(2, [-1.0], 10, RandomSource(0))
        with pytest.raises(DomainError):
            RandomSource(-1)


class TestSphere:
    def test_unit_norm(self):
        x = sample_sphere_point(5, RandomSource(6), size=100_000)
        assert np.max(np.abs(np.linalg.norm(x, axis=1) - 1)) <= 1e-12

    def test_mean_zero(self):
        x = sample_sphere_point(3, RandomSource(7), size=N_BIG)
        for j in range(3):
            assert within(x[:, j], 0.0)

    def test_one_dimensional_signs(self):
        x = sample_sphere_point(1, RandomSource(8), size=N_BIG)[:, 0]
        assert set(np.unique(x)) == {-1.0, 1.0}
        assert within((x > 0).astype(float), 0.5)

    def test_single_draw(self):
        assert sample_sphere_point(2, RandomSource(0)).shape == (2,)


class TestProjection:
    def test_examples(self):
        x = np.array([0.3, 0.4, 0.0])
        np.testing.assert_array_equal(project_first_k(x, 3), x)
        np.testing.assert_array_equal(project_first_k(x, 2), [0.3, 0.4])
        with pytest.raises(DomainError):
            project_first_k(x, 4)
        with pytest.raises(DomainError):
            project_first_k(x, 0)

    @pytest.mark.parametrize("d,k,beta", [(3, 1, 0.0), (3, 2, 0.5), (4, 2, -0.5)])
    def test_projected_law(self, d, k, beta):
        x = sample_beta_points(d, [beta], 100_000, RandomSource(10 + d + k))[:, 0]
        s = (project_first_k(x, k) ** 2).sum(axis=1)
        law = stats.beta(k / 2, beta + (d - k) / 2 + 1)
        assert stats.kstest(s, law.cdf).pvalue > 1e-3


class TestHalfspace:
    def test_whole_ball(self):
        assert empirical_halfspace_prob(3, 0.2, -1.0, 10_000, RandomSource(0)) == 1.0

    def test_symmetric_plane(self):
        p = empirical_halfspace_prob(4, 1.0, 0.0, N_BIG, RandomSource(11))
        assert abs(p - 0.5) <= 3 * math.sqrt(0.25 / N_BIG)

    def test_five_over_thirty_two(self):
        assert 1 - beta_cdf(1, 0.5) == pytest.approx(5 / 32, abs=1e-15)
        p = empirical_halfspace_prob(3, 0.0, 0.5, N_BIG, RandomSource(12))
        q = 5 / 32
        assert abs(p - q) <= 3 * math.sqrt(q * (1 - q) / N_BIG)

    @pytest.mark.parametrize("d,beta", [(2, 0.0), (3, 1.0), (2, -0.5)])
    def test_grid(self, d, beta):
        n = 100_000
        for i, h in enumerate(np.linspace(-0.8, 0.8, 9)):
            q = 1 - beta_cdf(beta + (d - 1) / 2, h)
            p = empirical_halfspace_prob(d, beta, h, n, RandomSource(100 + i, stream=d))
            assert abs(p - q) <= 4 * math.sqrt(q * (1 - q) / n)

    def test_domain(self):
        with pytest.raises(DomainError):
            empirical_halfspace_prob(2, 0.0, 0.0, 0, RandomSource(0))


class TestDeterminism:
    def test_same_stream_same_bytes(self):
        a = sample_beta_points(3, [0.0, -0.5, 2.0], 5000, RandomSource(42, stream=3))
        b = sample_beta_points(3, [0.0, -0.5, 2.0], 5000, RandomSource(42, stream=3))
        assert a.tobytes() == b.tobytes()

    def test_streams_differ(self):
        a = sample_beta_points(2, [0.0], 100, RandomSource(42, stream=0))
        b = sample_beta_points(2, [0.0], 100, RandomSource(42, stream=1))
        c = sample_beta_points(2, [0.0], 100, RandomSource(42).substream(0))
        assert not np.array_equal(a, b)
        assert not np.array_equal(a, c) and not np.array_equal(b, c)

    def test_substreams_reproducible(self):
        r = RandomSource(5, stream=2)
        a = sample_sphere_point(3, r.substream(7), size=10)
        b = sample_sphere_point(3, RandomSource(5, stream=2).substream(7), size=10)
        assert a.tobytes() == b.tobytes()

    def test_sample_batch(self):
        spec = PolytopeSpec(2, (0.0, 1.0, -0.5))
        batch = sample_polytopes(spec, 50, RandomSource(9, stream=4))
        assert batch.points.shape == (50, 3, 2)
        assert batch.d == 2 and batch.seed == 9 and batch.stream == 4
        assert np.all(np.linalg.norm(batch.points, axis=-1) <= 1)
