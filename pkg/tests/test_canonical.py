import numpy as np
import pytest

import aplorder as apl


def random_discrete(rng, d=2, atoms=5, signed=False):
    s = rng.dirichlet(np.ones(d), size=atoms)
    if signed:
        s *= rng.choice([-1, 1], size=s.shape)
    return apl.DiscreteMeasure(s, rng.uniform(0.1, 1, size=atoms))


def symmetric_discrete(rng, atoms=4):
    """Measure invariant under swapping the coordinates,
    so both marginal weights agree"""
    s = rng.dirichlet([1, 1], size=atoms)
    w = rng.uniform(0.1, 1, size=atoms)
    return apl.DiscreteMeasure(np.concatenate([s, s[:, ::-1]]),
                               np.concatenate([w, w]) / (2 * w.sum()))


def test_validate_canonical():
    report = apl.validate_canonical(apl.psi_independent(3))
    assert report.passed and bool(report)
    np.testing.assert_allclose(report.moments, 1)
    report = apl.validate_canonical(apl.DiscreteMeasure(np.eye(2), [1, 3]))
    assert not report.passed
    np.testing.assert_allclose(report.deviations, [0, 2])
    assert report.to_dict()['passed'] is False


def test_marginal_weights():
    measure = apl.DiscreteMeasure([[1, 0], [0.5, 0.5]], [0.5, 0.5])
    np.testing.assert_allclose(apl.marginal_weights(measure, 2),
                               [0.5 + 0.125, 0.125])
    np.testing.assert_allclose(apl.balanced_rescale([4, 1], 2), [0.5, 1])


def test_degenerate_margin():
    measure = apl.DiscreteMeasure([[1, 0]], [1])
    with pytest.raises(apl.DegenerateMeasureError) as e:
        apl.canonicalize_discrete(measure, 2)
    assert e.value.coordinate == 1
    assert 'coordinate 2' in str(e.value)
    np.testing.assert_allclose(e.value.weights, [1, 0])
    # Still a ValueError for callers that only know about those
    with pytest.raises(ValueError):
        apl.balanced_rescale([1, 0], 2)


@pytest.mark.parametrize('alpha', [0.5, 1, 2, 8])
def test_canonicalize_discrete(alpha):
    rng = np.random.default_rng(2)
    for d, signed in ((2, False), (3, False), (3, True)):
        for _ in range(20):
            canonical = apl.canonicalize_discrete(
                random_discrete(rng, d, signed=signed), alpha)
            assert apl.validate_canonical(canonical, tol=1e-12).passed


def test_canonical_measures_are_fixed_points():
    for measure in (apl.psi_independent(3), apl.psi_comonotone(3)):
        canonical = apl.canonicalize_discrete(measure, 2)
        np.testing.assert_allclose(canonical.atoms, measure.atoms)
        np.testing.assert_allclose(canonical.weights, measure.weights)


def test_risk_index_consistency():
    """With equal marginal weights, gamma_xi = nu(B_1) Psi* g_{xi,alpha}"""
    rng = np.random.default_rng(3)
    grid = apl.simplex_grid(2, 21)
    for _ in range(100):
        alpha = rng.choice([0.5, 1, 2, 4])
        measure = symmetric_discrete(rng)
        nu_b = apl.marginal_weights(measure, alpha)
        assert nu_b[0] == pytest.approx(nu_b[1], rel=1e-12)
        canonical = apl.canonicalize_discrete(measure, alpha)
        gamma = np.array([apl.extreme_risk_index(measure, xi, alpha)
                          for xi in grid])
        np.testing.assert_allclose(
            gamma, nu_b[0] * apl.curve_values(canonical, alpha, grid),
            rtol=1e-12, atol=1e-15)


def test_canonicalize_empirical():
    rng = np.random.default_rng(4)
    measure = apl.EmpiricalMeasure(rng.dirichlet([1, 2], size=50))
    canonical = apl.canonicalize(measure, 2)
    assert canonical.kind == 'discrete'
    assert apl.validate_canonical(canonical, tol=1e-12)


def test_discretize_density():
    gumbel = apl.gumbel_bivariate(2)
    discrete = apl.discretize(gumbel, cells=1024)
    assert apl.validate_canonical(discrete, tol=1e-6)
    grid = apl.simplex_grid(2, 11)
    np.testing.assert_allclose(apl.curve_values(discrete, 2, grid),
                               apl.curve_values(gumbel, 2, grid),
                               atol=1e-5)
    with pytest.raises(ValueError):
        apl.discretize(apl.psi_independent(2))


def test_canonicalize_density_and_mixture():
    gumbel = apl.gumbel_bivariate(2)
    canonical = apl.canonicalize(gumbel, 0.5, cells=512)
    assert apl.validate_canonical(canonical, tol=1e-12)
    mixed = apl.mixture([gumbel, apl.psi_comonotone(2)], [0.5, 0.5])
    canonical = apl.canonicalize(mixed, 2, cells=512)
    assert apl.validate_canonical(canonical, tol=1e-12)


def test_canonical_extremes():
    vertices = apl.DiscreteMeasure(np.eye(2), [0.5, 0.5])
    canonical = apl.canonicalize_discrete(vertices, 2)
    np.testing.assert_allclose(canonical.weights, 1)
    diagonal = apl.DiscreteMeasure([[0.5, 0.5]], [1])
    canonical = apl.canonicalize_discrete(diagonal, 2)
    np.testing.assert_allclose(canonical.atoms, [[0.5, 0.5]])
    np.testing.assert_allclose(canonical.weights, 2)


def test_canonical_invariant_under_rescaling():
    rng = np.random.default_rng(21)
    alpha = 2
    for _ in range(20):
        measure = random_discrete(rng, d=3, signed=True)
        c = rng.uniform(0.2, 5, size=3)
        # Spectral measure of (c_1 X_1, ..., c_d X_d)
        scaled_atoms = measure.atoms * c
        norms = np.abs(scaled_atoms).sum(axis=1)
        rescaled = apl.DiscreteMeasure(scaled_atoms,
                                       measure.weights * norms ** alpha)
        a = apl.canonicalize_discrete(measure, alpha)
        b = apl.canonicalize_discrete(rescaled, alpha)
        np.testing.assert_allclose(a.atoms, b.atoms, atol=1e-12)
        np.testing.assert_allclose(a.weights, b.weights, rtol=1e-12)
