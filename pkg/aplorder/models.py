"""Model families: extreme dependence cases, bivariate Gumbel and
Galambos canonical spectral measures, elliptical closed forms, mixtures
"""
import logging

import numpy as np
from scipy.special import gammaln

import aplorder as apl
export, __all__ = apl.exporter()

log = logging.getLogger(__name__)


def _check_dimension(d):
    if int(d) != d or d < 2:
        raise ValueError("Need an integer dimension d >= 2, got %s" % d)
    return int(d)


@export
def psi_independent(d):
    """Canonical spectral measure of asymptotic independence:
    unit atoms at the vertices of the simplex"""
    d = _check_dimension(d)
    return apl.DiscreteMeasure(np.eye(d), np.ones(d))


@export
def psi_comonotone(d):
    """Canonical spectral measure of asymptotic comonotonicity:
    one atom of weight d at the simplex barycenter"""
    d = _check_dimension(d)
    return apl.DiscreteMeasure(np.full((1, d), 1 / d), [d])


def _log_wbar(w):
    # log(w (1 - w))
    return np.log(w) + np.log1p(-w)


@export
def gumbel_stdf(x, y, theta):
    """Stable tail dependence function of the Gumbel copula"""
    return (x ** theta + y ** theta) ** (1 / theta)


def _log_mean_power(w, theta):
    # log(w^theta + (1 - w)^theta)
    return np.logaddexp(theta * np.log(w), theta * np.log1p(-w))


def _gumbel_regular(w, theta):
    # gumbel_density without the endpoint factor (w(1-w))^(theta-2)
    w = np.asarray(w, dtype=float)
    with np.errstate(divide='ignore', invalid='ignore'):
        return np.exp(np.log(theta - 1)
                      + (1 / theta - 2) * _log_mean_power(w, theta))


@export
def gumbel_density(w, theta):
    """Canonical spectral density of the bivariate Gumbel copula,
    h(w) = (theta-1) (w(1-w))^(theta-2) (w^theta + (1-w)^theta)^(1/theta-2)
    """
    w = np.asarray(w, dtype=float)
    with np.errstate(divide='ignore', invalid='ignore'):
        return np.exp(np.log(theta - 1)
                      + (theta - 2) * _log_wbar(w)
                      + (1 / theta - 2) * _log_mean_power(w, theta))


@export
def galambos_stdf(x, y, theta):
    """Stable tail dependence function of the Galambos copula"""
    return x + y - (x ** -theta + y ** -theta) ** (-1 / theta)


def _galambos_regular(w, theta):
    # galambos_density without the endpoint factor (w(1-w))^(theta-1)
    w = np.asarray(w, dtype=float)
    with np.errstate(divide='ignore', invalid='ignore'):
        return np.exp(np.log1p(theta)
                      - (1 / theta + 2) * _log_mean_power(w, theta))


@export
def galambos_density(w, theta):
    """Canonical spectral density of the bivariate Galambos copula,
    h(w) = (1+theta) (w(1-w))^(theta-1) (w^theta + (1-w)^theta)^(-1/theta-2)
    """
    w = np.asarray(w, dtype=float)
    with np.errstate(divide='ignore', invalid='ignore'):
        return np.exp(np.log1p(theta)
                      + (theta - 1) * _log_wbar(w)
                      - (1 / theta + 2) * _log_mean_power(w, theta))


@export
def gumbel_bivariate(theta):
    """Canonical spectral measure of the bivariate Gumbel copula.
    theta = 1 is the independence copula.
    """
    theta = float(theta)
    if not theta >= 1:
        raise ValueError("Gumbel parameter must be >= 1, got %s" % theta)
    if theta == 1:
        return psi_independent(2)
    return apl.BivariateDensityMeasure(
        lambda w: gumbel_density(w, theta),
        label='gumbel(theta=%g)' % theta,
        endpoint_exponent=theta - 2,
        regular=lambda w: _gumbel_regular(w, theta))


@export
def galambos_bivariate(theta, **kwargs):
    """Canonical spectral measure of the bivariate Galambos copula.

    The endpoint atoms absorb whatever the density integral leaves of
    the unit marginal moments (clamped at 0), so the result is canonical
    to the accuracy of the quadrature.
    Further kwargs are passed to scipy.integrate.quad.
    """
    theta = float(theta)
    if not theta > 0:
        raise ValueError("Galambos parameter must be > 0, got %s" % theta)
    label = 'galambos(theta=%g)' % theta

    shape = dict(
        label=label,
        endpoint_exponent=theta - 1,
        regular=lambda w: _galambos_regular(w, theta))

    def density(w):
        return galambos_density(w, theta)

    moments = apl.coordinate_moments(
        apl.BivariateDensityMeasure(density, **shape), **kwargs)
    atom_w1, atom_w0 = 1 - moments
    log.debug("%s: endpoint deficits w=1: %g, w=0: %g",
              label, atom_w1, atom_w0)
    return apl.BivariateDensityMeasure(
        density, atom_w0=max(atom_w0, 0), atom_w1=max(atom_w1, 0), **shape)


@export
def generalized_covariance(rho):
    """The bivariate matrix ((1, rho), (rho, 1))"""
    if not -1 <= rho <= 1:
        raise ValueError("Need -1 <= rho <= 1, got %s" % rho)
    return np.array([[1., rho], [rho, 1.]])


@export
def covariance_matrix(c):
    """Validate a generalized covariance matrix: symmetric, square,
    strictly positive diagonal"""
    c = np.asarray(c, dtype=float)
    if c.ndim != 2 or c.shape[0] != c.shape[1]:
        raise ValueError("Covariance matrix must be square")
    if not np.allclose(c, c.T, rtol=0, atol=1e-12):
        raise ValueError("Covariance matrix must be symmetric")
    if np.any(np.diag(c) <= 0):
        raise ValueError("Covariance matrix needs a positive diagonal")
    return c


@export
def correlation_form(c):
    """D^(-1/2) C D^(-1/2) with D = diag(C): the covariance matrix after
    balancing the margins by w_i = C_ii^(-1/2)"""
    c = covariance_matrix(c)
    w = np.diag(c) ** -0.5
    return c * np.outer(w, w)


def _quadratic_forms(c, grid):
    q = np.einsum('ij,jk,ik->i', grid, c, grid)
    if np.any(q < -1e-12):
        raise ValueError("Quadratic form is negative on the portfolio grid; "
                         "not a generalized covariance matrix")
    return np.maximum(q, 0)


@export
def elliptical_curve(c, alpha, grid_size=None, grid=None):
    """Closed-form diversification curve of elliptical models,
    (xi^T C~ xi)^(alpha/2) / 2 with C~ the balanced (correlation) form.
    The value at every vertex e_i is 1/2 by symmetry of the model.
    """
    alpha = apl.tail_index(alpha)
    c_tilde = correlation_form(c)
    if grid is None:
        if grid_size is None:
            raise ValueError("Give a grid size or an explicit grid")
        grid = apl.simplex_grid(len(c_tilde), grid_size)
    grid = apl.portfolio(np.atleast_2d(grid))
    if grid.shape[1] != len(c_tilde):
        raise ValueError("Grid dimension does not match the matrix")
    values = _quadratic_forms(c_tilde, grid) ** (alpha / 2) / 2
    return apl.DiversificationCurve(alpha, grid, values)


@export
def elliptical_breiman_constant(c, alpha, xi):
    """E[((xi^T A U)_+)^alpha] for A A^T = C and U uniform on the
    Euclidean unit sphere: the limit of P(xi^T X > t) / P(R > t) for
    X = R A U.

    By spherical symmetry xi^T A U has the law of |A^T xi|_2 U_1.
    """
    c = covariance_matrix(c)
    alpha = apl.tail_index(alpha)
    xi = np.asarray(xi, dtype=float)
    d = len(c)
    # E (U_1)_+^alpha = E|U_1|^alpha / 2
    log_moment = (gammaln(d / 2) + gammaln((alpha + 1) / 2)
                  - 0.5 * np.log(np.pi) - gammaln((d + alpha) / 2))
    q = max(float(xi @ c @ xi), 0)
    return q ** (alpha / 2) * np.exp(log_moment) / 2


@export
def mixture(measures, mix_weights):
    """Mixture sum_k p_k Psi_k of spectral measures.
    Mixtures of atom measures are discrete; anything else gives a
    MixtureMeasure. Canonical inputs give a canonical mixture.
    """
    measures = list(measures)
    mix_weights = np.asarray(mix_weights, dtype=float)
    if not measures or len(measures) != len(mix_weights):
        raise ValueError("Need one mixing weight per measure")
    if np.any(mix_weights < 0) or abs(mix_weights.sum() - 1) > apl.SIMPLEX_TOL:
        raise ValueError("Mixing weights must form a probability vector")
    if len({m.dim for m in measures}) > 1:
        raise ValueError("Dimension mismatch among mixed measures: %s"
                         % [m.dim for m in measures])
    keep = mix_weights > 0
    measures = [m for m, k in zip(measures, keep) if k]
    mix_weights = mix_weights[keep]

    if all(m.kind in ('discrete', 'empirical') for m in measures):
        return apl.DiscreteMeasure(
            np.concatenate([m.atoms for m in measures]),
            np.concatenate([p * m.weights
                            for m, p in zip(measures, mix_weights)]))
    return apl.MixtureMeasure(measures, mix_weights)
