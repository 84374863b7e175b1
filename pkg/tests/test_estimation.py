import numpy as np
import pytest
from scipy import stats

import aplorder as apl
from aplorder.estimation import _ESTIMATION_DEFAULTS
import unittest


def test_sampler_determinism():
    a = apl.sample_gumbel_pareto(2, 2, 2, 1000, seed=11)
    b = apl.sample_gumbel_pareto(2, 2, 2, 1000, seed=11)
    c = apl.sample_gumbel_pareto(2, 2, 2, 1000, seed=12)
    np.testing.assert_array_equal(a.rows, b.rows)
    assert not np.array_equal(a.rows, c.rows)
    assert a.model == dict(family='gumbel_pareto', theta=2, alpha=2, d=2)


def test_blocks_are_independent_streams():
    size = _ESTIMATION_DEFAULTS['block_size']
    short = apl.sample_comonotone_pareto(2, 2, size, seed=3)
    long = apl.sample_comonotone_pareto(2, 2, 2 * size + 5, seed=3)
    np.testing.assert_array_equal(long.rows[:size], short.rows)


def test_pareto_margins():
    cloud = apl.sample_gumbel_pareto(1.4, 2, 3, 10 ** 5, seed=1)
    assert cloud.rows.shape == (10 ** 5, 3)
    assert cloud.rows.min() >= 1
    # P(X_i > 10) = 10^-2 for every margin
    p = (cloud.rows > 10).mean(axis=0)
    np.testing.assert_allclose(p, 0.01, atol=5 * (0.01 / 10 ** 5) ** 0.5)


def test_samplers_reject_bad_parameters():
    with pytest.raises(ValueError):
        apl.sample_gumbel_pareto(0.5, 2, 2, 10, seed=0)
    with pytest.raises(ValueError):
        apl.sample_gumbel_pareto(2, -1, 2, 10, seed=0)
    with pytest.raises(ValueError):
        apl.sample_comonotone_pareto(2, 2, 0, seed=0)
    with pytest.raises(ValueError):
        apl.sample_elliptical_t([[1, 2], [2, 1]], 2, 10, seed=0)


def test_positive_stable_laplace_transform():
    rng = np.random.default_rng(0)
    s = apl.positive_stable(rng, 0.5, 10 ** 5)
    assert np.all(s > 0)
    # E exp(-S) = exp(-1)
    assert np.mean(np.exp(-s)) == pytest.approx(np.exp(-1), abs=1e-2)
    np.testing.assert_array_equal(apl.positive_stable(rng, 1, 3), 1)


def test_comonotone_rows():
    cloud = apl.sample_comonotone_pareto(0.5, 3, 100, seed=2)
    np.testing.assert_array_equal(cloud.rows[:, 0], cloud.rows[:, 2])


def test_elliptical_sampler():
    c = apl.generalized_covariance(0.5)
    a = apl.symmetric_sqrt(c)
    np.testing.assert_allclose(a @ a, c, atol=1e-12)
    np.testing.assert_allclose(a, a.T)
    cloud = apl.sample_elliptical_t(c, 3, 10 ** 5, seed=4)
    # Symmetric margins
    assert abs(np.mean(cloud.rows[:, 0] > 0) - 0.5) < 0.01
    assert cloud.model['family'] == 'elliptical_t'


def test_hill_estimator():
    n, k = 10 ** 5, 1000
    # Exact Pareto(2) quantiles
    x = (np.arange(1, n + 1) / n) ** -0.5
    assert apl.hill_estimator(x, k) == pytest.approx(0.5, rel=0.01)
    with pytest.raises(ValueError):
        apl.hill_estimator(x, n)


def test_empirical_gamma_on_a_ray():
    rows = np.column_stack([np.arange(1., 1001.), np.zeros(1000)])
    cloud = apl.SampleCloud(rows, seed=0)
    estimate = apl.empirical_gamma(cloud, [1, 0], k=50, n_boot=20)
    assert estimate.estimate == 1
    assert estimate.k == 50
    assert estimate.se >= 0
    assert apl.empirical_gamma(cloud, [0, 1], k=50, n_boot=20).estimate == 0
    with pytest.raises(ValueError):
        apl.empirical_gamma(cloud, [1, 0], k=1000)
    with pytest.raises(ValueError):
        apl.empirical_gamma(cloud, [1, 0], method='median')


def test_angular_estimate_integrates_empirical_measure():
    cloud = apl.sample_gumbel_pareto(2, 2, 2, 10 ** 4, seed=5)
    for xi in ([0.5, 0.5], [0.2, 0.8], [1, 0]):
        angular = apl.empirical_gamma(cloud, xi, k=100, method='angular',
                                      n_boot=5)
        measure = apl.empirical_spectral(cloud, k=100)
        expected = apl.integrate(measure,
                                 lambda s: apl.eval_f(xi, 2, s))
        assert angular.estimate == pytest.approx(expected, abs=1e-12)


def test_empirical_spectral_independence():
    cloud = apl.sample_gumbel_pareto(1, 2, 2, 10 ** 6, seed=6)
    measure = apl.empirical_spectral(cloud, k=1000)
    assert measure.total_mass == 1
    assert len(measure.atoms) == 1000
    near_vertex = measure.atoms.min(axis=1) <= 0.2
    assert near_vertex.mean() >= 0.95


class TestEstimationPipeline(unittest.TestCase):

    def test_gumbel_curve(self):
        cloud = apl.sample_gumbel_pareto(2, 2, 2, 10 ** 6, seed=7)
        grid = np.array([[0.25, 0.75], [0.5, 0.5], [0.75, 0.25]])
        df = apl.empirical_curve(cloud, grid, k=1000)
        self.assertEqual(list(df.columns), ['xi1', 'xi2', 'value', 'se'])
        expected = apl.curve_values(apl.gumbel_bivariate(2), 2, grid)
        for value, se, target in zip(df.value, df.se, expected):
            self.assertGreater(se, 0)
            self.assertLessEqual(abs(value - target), 3 * se)

    def test_tail_ratios_flip_with_alpha(self):
        xi = [0.5, 0.5]
        for alpha, below in ((2, True), (0.5, False)):
            x = apl.sample_gumbel_pareto(1, alpha, 2, 10 ** 6, seed=8)
            y = apl.sample_comonotone_pareto(alpha, 2, 10 ** 6, seed=9)
            series = apl.tail_ratio_series(x, y, xi, [0.99, 0.999])
            ratio, se = series.ratios[-1], series.se[-1]
            self.assertFalse(series.undefined[-1])
            if below:
                self.assertLess(ratio + 3 * se, 1)
            else:
                self.assertGreater(ratio - 3 * se, 1)
            self.assertEqual(len(series.to_frame()), 2)


def test_tail_ratio_undefined_levels():
    x = apl.SampleCloud(np.zeros((100, 2)))
    y = apl.SampleCloud(np.column_stack([np.arange(100.), np.zeros(100)]))
    series = apl.tail_ratio_series(x, y, [1, 0], [0.5, 0.9])
    assert np.all(series.undefined)
    assert np.all(np.isnan(series.ratios))
    with pytest.raises(ValueError):
        apl.tail_ratio_series(x, y, [1, 0], [1.5])


def test_breiman_ratio():
    for alpha in (0.5, 2):
        exact = 1 / (2 * (alpha + 1))
        assert apl.positive_part_moment(stats.uniform(-1, 2), alpha) == \
            pytest.approx(exact)
        assert apl.breiman_ratio(stats.uniform(-1, 2), 1., alpha) == \
            pytest.approx(exact)
        sample = np.random.default_rng(10).uniform(-1, 1, 10 ** 6)
        assert apl.breiman_ratio(sample, 1., alpha) == \
            pytest.approx(exact, rel=0.01)
    assert apl.breiman_ratio(1., 2., 2) == 0.25
    assert apl.breiman_ratio(stats.uniform(0, 1), 1., 2) == pytest.approx(1 / 3)
    assert apl.positive_part_moment(3., 2) == 9
    assert apl.positive_part_moment(-3., 2) == 0
    with pytest.raises(ValueError):
        apl.breiman_ratio(1., -1., 2)


def test_breiman_tail_ratio():
    """P(R V > t) / P(R > t) for Pareto R and V <= 1 <= t"""
    alpha, n, t = 2, 10 ** 6, 3
    rng = np.random.default_rng(11)
    r = (1 - rng.random(n)) ** (-1 / alpha)
    v = rng.uniform(-1, 1, n)
    count = np.count_nonzero(r * v > t)
    expected = apl.breiman_ratio(stats.uniform(-1, 2), 1., alpha)
    # P(R > t) = t^-alpha exactly
    assert count / n * t ** alpha == \
        pytest.approx(expected, rel=5 / count ** 0.5)


def test_stop_loss_check():
    point = apl.SampleCloud(np.full((1000, 2), 2.), model=dict(alpha=2))
    spread = apl.SampleCloud(np.repeat([[1., 1.], [3., 3.]], 500, axis=0))
    u = [0.5, 1, 2, 2.5]
    df = apl.stop_loss_check(point, spread, [0.5, 0.5], u)
    assert list(df.u) == u
    np.testing.assert_allclose(df.h_x, np.maximum(2 - np.array(u), 0))
    np.testing.assert_allclose(df.f_x, -np.minimum(2, np.array(u)))
    assert df.holds_icx.all() and df.holds_decx.all()
    assert (df.regime == 'icx').all()
    reverse = apl.stop_loss_check(spread, point, [0.5, 0.5], u, alpha=0.5)
    assert (reverse.regime == 'decx').all()
    # At u = 2 the spread cloud has a stop-loss of 0.5 against 0
    assert not reverse.holds_icx[2]
    assert not reverse.holds.all()
    with pytest.raises(ValueError):
        apl.stop_loss_check(point, spread, [0.5, 0.5], [2, 1])


def test_sample_cloud_csv(tmp_path):
    cloud = apl.sample_elliptical_t(apl.generalized_covariance(0.3), 2, 50,
                                    seed=12)
    path = tmp_path / 'cloud.csv'
    cloud.to_csv(path)
    assert path.read_text().splitlines()[0] == 'x1,x2'
    np.testing.assert_array_equal(apl.SampleCloud.from_csv(path).rows,
                                  cloud.rows)
    with pytest.raises(ValueError):
        apl.SampleCloud([[1., np.inf]])


def test_gumbel_kendall_tau():
    for theta, tau in ((1, 0), (2, 0.5)):
        cloud = apl.sample_gumbel_pareto(theta, 2, 2, 10 ** 5, seed=13)
        estimate = stats.kendalltau(cloud.rows[:, 0], cloud.rows[:, 1])[0]
        assert estimate == pytest.approx(tau, abs=0.01)


def test_empirical_gamma_extremes():
    comonotone = apl.sample_comonotone_pareto(2, 2, 10 ** 5, seed=14)
    estimate = apl.empirical_gamma(comonotone, [0.5, 0.5], n_boot=50)
    # (1/2)^alpha: the portfolio loss is half the norm
    assert estimate.estimate == pytest.approx(0.25, abs=0.05)
    measure = apl.empirical_spectral(comonotone)
    np.testing.assert_allclose(measure.atoms, 0.5)

    independent = apl.sample_gumbel_pareto(1, 2, 2, 10 ** 5, seed=15)
    estimate = apl.empirical_gamma(independent, [1, 0], n_boot=100)
    assert abs(estimate.estimate - 0.5) <= 3 * estimate.se


def test_canonical_empirical_curve():
    cloud = apl.sample_gumbel_pareto(2, 2, 2, 10 ** 5, seed=16)
    canonical = apl.canonicalize(apl.empirical_spectral(cloud, k=1000), 2)
    grid = apl.simplex_grid(2, 5)
    np.testing.assert_allclose(
        apl.curve_values(canonical, 2, grid),
        apl.curve_values(apl.gumbel_bivariate(2), 2, grid), atol=0.1)


def test_elliptical_pipeline():
    c = apl.generalized_covariance(0.5)
    cloud = apl.sample_elliptical_t(c, 2, 10 ** 6, seed=17)
    grid = np.array([[0.25, 0.75], [0.5, 0.5], [0.75, 0.25]])
    df = apl.empirical_curve(cloud, grid, k=1000)
    expected = apl.elliptical_curve(c, 2, grid=grid).values
    assert np.all(np.abs(df.value - expected) <= 3 * df.se)


def test_stop_loss_bootstrap_errors():
    point = apl.SampleCloud(np.full((1000, 2), 2.))
    spread = apl.SampleCloud(np.repeat([[1., 1.], [3., 3.]], 500, axis=0),
                             seed=4)
    df = apl.stop_loss_check(spread, point, [0.5, 0.5], [2], alpha=2)
    np.testing.assert_array_equal(df.h_y_se, 0)
    # (L - 2)_+ is 0 or 1 with probability 1/2 each
    assert df.h_x[0] == 0.5
    assert df.h_x_se[0] == pytest.approx(0.5 / 1000 ** 0.5, rel=0.4)
    again = apl.stop_loss_check(spread, point, [0.5, 0.5], [2], alpha=2)
    assert again.h_x_se[0] == df.h_x_se[0]


def test_tail_sample_size():
    assert apl.tail_sample_size(10 ** 6) == 1000
    assert apl.tail_sample_size(100, 7) == 7
    with pytest.raises(ValueError):
        apl.tail_sample_size(100, 100)
