"""Canonical spectral measures: marginal weights, balancing rescalers,
the canonical transform and canonicality checks
"""
import logging
import warnings

import numpy as np
from scipy.special import roots_legendre

import aplorder as apl
export, __all__ = apl.exporter()

log = logging.getLogger(__name__)

_CANONICAL_DEFAULTS = dict(
    # nu(B_i) below this fraction of the largest entry counts as zero
    degeneracy_ratio=1e-12,
    # Cells used to discretize bivariate densities
    cells=4096,
    # Gauss-Legendre nodes per cell
    cell_nodes=8,
    # validate_canonical tolerance for atom measures / quadrature
    tol_atoms=1e-9,
    tol_quadrature=1e-6,
)


@export
class CanonicalReport:
    """Outcome of validate_canonical.

    :param moments: integral of |s_i| per coordinate
    :param deviations: |moment - 1| per coordinate
    """

    def __init__(self, moments, tol):
        self.moments = apl.frozen_array(moments)
        self.deviations = apl.frozen_array(np.abs(self.moments - 1))
        self.tol = tol
        self.passed = bool(np.all(self.deviations <= tol))

    def __bool__(self):
        return self.passed

    def to_dict(self):
        return dict(passed=self.passed, tol=self.tol,
                    moments=self.moments.tolist(),
                    deviations=self.deviations.tolist())

    def __repr__(self):
        return 'CanonicalReport(passed=%s, moments=%s)' % (
            self.passed, np.array2string(self.moments, precision=12))


def _default_tol(measure):
    if measure.kind in ('discrete', 'empirical'):
        return _CANONICAL_DEFAULTS['tol_atoms']
    return _CANONICAL_DEFAULTS['tol_quadrature']


@export
def warn_non_canonical(report):
    warnings.warn(
        "Spectral measure is not canonical (marginal moments %s, tolerance "
        "%g); values are Psi g, not diversification coefficients"
        % (np.array2string(report.moments, precision=8), report.tol),
        apl.NonCanonicalWarning, stacklevel=3)


@export
def coordinate_moments(measure, power=1., **kwargs):
    """Integrals of |s_i|^power against the measure, per coordinate"""
    return np.array([
        apl.integrate(measure, lambda s, i=i: np.abs(s[:, i]) ** power,
                      **kwargs)
        for i in range(measure.dim)])


@export
def validate_canonical(measure, tol=None, **kwargs):
    """Check the canonical normalization: integral of |s_i| equals 1
    for every coordinate i.

    :param tol: allowed deviation per coordinate. Defaults to 1e-9 for
    atom measures and 1e-6 for measures integrated by quadrature.
    :returns: CanonicalReport
    """
    tol = _default_tol(measure) if tol is None else tol
    return CanonicalReport(coordinate_moments(measure, 1., **kwargs), tol)


@export
def marginal_weights(measure, alpha, check=True, **kwargs):
    """Marginal weights nu(B_i) = integral of |s_i|^alpha dPsi(s)

    :param measure: spectral measure with total mass 1
    :param check: if True, raise DegenerateMeasureError if any weight
    vanishes
    """
    alpha = apl.tail_index(alpha)
    nu_b = coordinate_moments(measure, alpha, **kwargs)
    if check:
        _check_degeneracy(nu_b)
    return nu_b


def _check_degeneracy(nu_b):
    nu_b = np.asarray(nu_b, dtype=float)
    top = nu_b.max()
    if not top > 0:
        raise apl.DegenerateMeasureError(
            "All marginal weights vanish", coordinate=None, weights=nu_b)
    small = np.flatnonzero(
        nu_b <= _CANONICAL_DEFAULTS['degeneracy_ratio'] * top)
    if len(small):
        i = int(small[0])
        raise apl.DegenerateMeasureError(
            "Margin of coordinate %d is degenerate (nu(B_%d) = %g)"
            % (i + 1, i + 1, nu_b[i]),
            coordinate=i, weights=nu_b)


@export
def balanced_rescale(nu_b, alpha):
    """Rescaling vector w_i = nu(B_i)^(-1/alpha) giving balanced tails"""
    alpha = apl.tail_index(alpha)
    nu_b = np.asarray(nu_b, dtype=float)
    bad = np.flatnonzero(~(nu_b > 0) | ~np.isfinite(nu_b))
    if len(bad):
        raise apl.DegenerateMeasureError(
            "Marginal weights must be positive and finite, got %s" % nu_b,
            coordinate=int(bad[0]), weights=nu_b)
    return nu_b ** (-1 / alpha)


@export
def canonicalize_discrete(measure, alpha):
    """Canonical spectral measure of a discrete (or empirical) measure.

    Atom s with weight w maps to u = U(s) / |U(s)|_1 with weight
    w |U(s)|_1, where U(s)_i = (s_i+^alpha - s_i-^alpha) / nu(B_i).
    """
    alpha = apl.tail_index(alpha)
    if measure.kind == 'empirical':
        measure = measure.as_discrete()
    if measure.kind != 'discrete':
        raise ValueError("Expected a discrete measure, got %s" % measure.kind)
    nu_b = marginal_weights(measure, alpha)
    s = np.asarray(measure.atoms)
    u = np.sign(s) * np.abs(s) ** alpha / nu_b
    norms = np.abs(u).sum(axis=1)
    return apl.DiscreteMeasure(u / norms[:, None], measure.weights * norms)


@export
def discretize(measure, cells=None):
    """Discrete version of a bivariate density measure.

    Each of the equal-width cells becomes one atom at the cell's
    w-centroid carrying the cell's mass, so both coordinate moments are
    kept cell by cell. Mass the cell rule misses near the endpoints is
    moved to the endpoint atoms.
    """
    if measure.kind != 'bivariate_density':
        raise ValueError("Expected a bivariate density measure, got %s"
                         % measure.kind)
    cells = _CANONICAL_DEFAULTS['cells'] if cells is None else int(cells)
    t, wt = roots_legendre(_CANONICAL_DEFAULTS['cell_nodes'])
    edges = np.linspace(0, 1, cells + 1)
    half = np.diff(edges)[:, None] / 2
    w = edges[:-1, None] + half * (t + 1)
    h = measure.density(w) * wt * half
    mass = h.sum(axis=1)
    first = (h * w).sum(axis=1)
    keep = mass > 0
    centroid = first[keep] / mass[keep]

    # Deficits against the quadrature moments of the density alone
    target = apl.coordinate_moments(
        apl.BivariateDensityMeasure(
            measure.density, label=measure.label,
            endpoint_exponent=measure.endpoint_exponent,
            regular=measure.regular))
    deficit_w1 = max(target[0] - first.sum(), 0)
    deficit_w0 = max(target[1] - (mass - first).sum(), 0)
    log.debug("discretize %s: endpoint deficits w=1: %g, w=0: %g",
              measure.label, deficit_w1, deficit_w0)

    atoms = [np.column_stack([centroid, 1 - centroid])]
    weights = [mass[keep]]
    for s, a in (([1., 0.], measure.atom_w1 + deficit_w1),
                 ([0., 1.], measure.atom_w0 + deficit_w0)):
        if a > 0:
            atoms.append(np.array([s]))
            weights.append(np.array([a]))
    return apl.DiscreteMeasure(np.concatenate(atoms), np.concatenate(weights))


@export
def canonicalize(measure, alpha, cells=None):
    """Canonical spectral measure of any measure representation.
    Densities are discretized first, see discretize.
    """
    if measure.kind in ('discrete', 'empirical'):
        return canonicalize_discrete(measure, alpha)
    if measure.kind == 'bivariate_density':
        return canonicalize_discrete(discretize(measure, cells), alpha)
    if measure.kind == 'mixture':
        parts = [m if m.kind != 'bivariate_density' else discretize(m, cells)
                 for m in measure.components]
        return canonicalize_discrete(
            apl.mixture(parts, measure.mix_weights), alpha)
    raise NotImplementedError("Unsupported measure kind '%s'" % measure.kind)
