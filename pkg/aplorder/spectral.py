"""Spectral measures on the 1-norm unit sphere, portfolio integrands
and diversification curves
"""
from itertools import combinations
import logging

import numpy as np
import pandas as pd
from scipy.integrate import quad

import aplorder as apl
export, __all__ = apl.exporter()

log = logging.getLogger(__name__)

# Passed on to scipy.integrate.quad; override per call through **kwargs
_QUAD_DEFAULTS = dict(
    epsabs=1e-10,
    epsrel=1e-9,
    limit=200,
)

# quad may flag roundoff without a usable loss of accuracy. Flagged
# results are failures once the error estimate exceeds this multiple of
# the requested tolerance max(epsabs, epsrel |value|)
_QUAD_FAILURE_FACTOR = 1e3


@export
class SpectralMeasure:
    """Finite measure on directions of the 1-norm unit sphere.
    Subclasses: DiscreteMeasure, EmpiricalMeasure,
    BivariateDensityMeasure, MixtureMeasure.
    """
    kind = None
    dim = None

    @property
    def total_mass(self):
        return integrate(self, lambda s: np.ones(len(s)))

    @property
    def on_simplex(self):
        """True if all directions have nonnegative coordinates"""
        return True

    def __repr__(self):
        return '%s(dim=%d)' % (self.__class__.__name__, self.dim)


@export
class DiscreteMeasure(SpectralMeasure):
    """Weighted atoms. Atoms are rescaled onto the 1-norm sphere."""
    kind = 'discrete'

    def __init__(self, atoms, weights):
        atoms = np.atleast_2d(np.asarray(atoms, dtype=float))
        weights = np.atleast_1d(np.asarray(weights, dtype=float))
        if atoms.ndim != 2 or len(atoms) != len(weights):
            raise ValueError("Need one weight per atom, got %d atoms and "
                             "%d weights" % (len(atoms), len(weights)))
        if not len(weights):
            raise ValueError("Discrete measure needs at least one atom")
        if not np.all(np.isfinite(weights)) or np.any(weights <= 0):
            raise ValueError("Atom weights must be strictly positive")
        self.atoms = apl.frozen_array(apl.direction(atoms))
        self.weights = apl.frozen_array(weights)
        self.dim = atoms.shape[1]

    @property
    def total_mass(self):
        return float(self.weights.sum())

    @property
    def on_simplex(self):
        return bool(np.all(self.atoms >= 0))

    def __repr__(self):
        return 'DiscreteMeasure(dim=%d, atoms=%d, mass=%.6g)' % (
            self.dim, len(self.weights), self.total_mass)


@export
class EmpiricalMeasure(SpectralMeasure):
    """Equally weighted directions carrying a total mass"""
    kind = 'empirical'

    def __init__(self, directions, mass=1.):
        directions = np.atleast_2d(np.asarray(directions, dtype=float))
        if not len(directions):
            raise ValueError("Empirical measure needs at least one direction")
        mass = float(mass)
        if not np.isfinite(mass) or mass <= 0:
            raise ValueError("Empirical mass must be positive, got %s" % mass)
        self.directions = apl.frozen_array(apl.direction(directions))
        self.mass = mass
        self.dim = directions.shape[1]

    @property
    def total_mass(self):
        return self.mass

    @property
    def on_simplex(self):
        return bool(np.all(self.directions >= 0))

    @property
    def atoms(self):
        return self.directions

    @property
    def weights(self):
        n = len(self.directions)
        return np.full(n, self.mass / n)

    def as_discrete(self):
        return DiscreteMeasure(self.directions, self.weights)


@export
class BivariateDensityMeasure(SpectralMeasure):
    """Measure on the 2-simplex, directions s = (w, 1 - w).

    :param density: function of w in (0, 1), vectorized, nonnegative
    :param atom_w0: mass of the atom at w = 0, i.e. s = (0, 1)
    :param atom_w1: mass of the atom at w = 1, i.e. s = (1, 0)
    :param label: free-form description, e.g. 'gumbel(theta=2)'
    :param endpoint_exponent: e > -1 such that
    density(w) = (w (1 - w))^e regular(w) with regular bounded near the
    endpoints. Negative e marks an integrable endpoint singularity.
    :param regular: the factor regular(w), required if e != 0
    """
    kind = 'bivariate_density'
    dim = 2

    def __init__(self, density, atom_w0=0., atom_w1=0., label='',
                 endpoint_exponent=0., regular=None):
        if atom_w0 < 0 or atom_w1 < 0:
            raise ValueError("Endpoint atoms must be nonnegative")
        endpoint_exponent = float(endpoint_exponent)
        if not endpoint_exponent > -1:
            raise ValueError("Endpoint exponent must be > -1, got %s"
                             % endpoint_exponent)
        if endpoint_exponent != 0 and regular is None:
            raise ValueError("An endpoint exponent needs the regular factor")
        self.endpoint_exponent = endpoint_exponent
        self.regular = density if regular is None else regular
        self.density = density
        self.atom_w0 = float(atom_w0)
        self.atom_w1 = float(atom_w1)
        self.label = label

    def __repr__(self):
        return 'BivariateDensityMeasure(%s, atoms=(%.3g, %.3g))' % (
            self.label, self.atom_w0, self.atom_w1)


@export
class MixtureMeasure(SpectralMeasure):
    """Linear combination of measures of arbitrary representation"""
    kind = 'mixture'

    def __init__(self, components, mix_weights):
        self.components = tuple(components)
        self.mix_weights = apl.frozen_array(mix_weights)
        self.dim = self.components[0].dim

    @property
    def on_simplex(self):
        return all(c.on_simplex for c in self.components)


@export
class DiversificationCurve:
    """Values Psi g_{xi, alpha} over a grid of portfolios.

    :param canonical: False if the measure failed validate_canonical,
    in which case the values are not diversification coefficients.
    """

    def __init__(self, alpha, grid, values, canonical=True):
        self.alpha = apl.tail_index(alpha)
        self.grid = apl.frozen_array(np.atleast_2d(grid))
        self.values = apl.frozen_array(values)
        if len(self.values) != len(self.grid):
            raise ValueError("Grid and values must have equal length")
        if np.any(self.values < 0):
            raise ValueError("Curve values must be nonnegative")
        self.canonical = canonical

    def __len__(self):
        return len(self.values)

    @property
    def xi1(self):
        return self.grid[:, 0]

    def to_frame(self):
        d = self.grid.shape[1]
        df = pd.DataFrame(self.grid, columns=['xi%d' % (i + 1)
                                              for i in range(d)])
        df['value'] = self.values
        return df


def _check_dims(xi, x):
    if xi.shape[-1] != x.shape[-1]:
        raise ValueError("Dimension mismatch: portfolio has %d components, "
                         "direction has %d" % (xi.shape[-1], x.shape[-1]))


def _pos_power(x, alpha):
    # (x)_+^alpha, with 0 -> 0 for every alpha > 0
    return np.maximum(x, 0) ** alpha


@export
def signed_root(x, alpha):
    """Componentwise t_+^(1/alpha) - t_-^(1/alpha)"""
    x = np.asarray(x, dtype=float)
    return np.sign(x) * np.abs(x) ** (1 / alpha)


@export
def eval_f(xi, alpha, s):
    """Portfolio loss integrand f_{xi,alpha}(s) = ((xi . s)_+)^alpha

    :param xi: portfolio, shape (d,) or (m, d)
    :param alpha: tail index
    :param s: direction(s), shape (d,) or (k, d)
    :returns: array of shape xi.shape[:-1] + s.shape[:-1]
    """
    xi = np.asarray(xi, dtype=float)
    s = np.asarray(s, dtype=float)
    _check_dims(xi, s)
    return _pos_power(np.inner(xi, s), apl.tail_index(alpha))


@export
def eval_g(xi, alpha, x):
    """Canonical integrand
    g_{xi,alpha}(x) = (sum_i xi_i (x_i+^(1/alpha) - x_i-^(1/alpha)))_+^alpha

    Shapes as for eval_f.
    """
    xi = np.asarray(xi, dtype=float)
    x = np.asarray(x, dtype=float)
    _check_dims(xi, x)
    alpha = apl.tail_index(alpha)
    return _pos_power(np.inner(xi, signed_root(x, alpha)), alpha)


@export
def integrate(measure, integrand, **kwargs):
    """Integrate a function of directions against a spectral measure.

    :param measure: any SpectralMeasure
    :param integrand: function taking a (k, d) array of directions,
    returning k values
    Further kwargs are passed to scipy.integrate.quad
    (only used for bivariate densities).
    """
    if measure.kind in ('discrete', 'empirical'):
        return float(np.dot(measure.weights,
                            integrand(np.asarray(measure.atoms))))

    if measure.kind == 'mixture':
        return float(sum(
            w * integrate(c, integrand, **kwargs)
            for c, w in zip(measure.components, measure.mix_weights)))

    if measure.kind == 'bivariate_density':
        result = measure.atom_w1 * integrand(np.array([[1., 0.]]))[0]
        result += measure.atom_w0 * integrand(np.array([[0., 1.]]))[0]
        return float(result + _integrate_density(measure, integrand,
                                                 **kwargs))

    raise NotImplementedError("Unsupported measure kind '%s'" % measure.kind)


def _checked_quad(f, a, b, measure, **kwargs):
    """scipy.integrate.quad of f over [a, b], raising QuadratureError
    if quad flags a result far outside the requested tolerance"""
    quad_kwargs = {**_QUAD_DEFAULTS, **kwargs}
    out = quad(f, a, b, full_output=1, **quad_kwargs)
    value, abserr = out[0], out[1]
    if len(out) > 3:
        requested = max(quad_kwargs['epsabs'],
                        quad_kwargs['epsrel'] * abs(value))
        if abserr > _QUAD_FAILURE_FACTOR * requested:
            raise apl.QuadratureError(
                "Quadrature over %s did not converge: %s (error estimate %g)"
                % (measure, out[3], abserr),
                abserr=abserr, value=value)
        log.debug("quad flagged '%s' with error estimate %g",
                  out[3].splitlines()[0], abserr)
    return value


def _integrate_density(measure, integrand, **kwargs):
    e = measure.endpoint_exponent

    def at(w):
        return integrand(np.array([[w, 1 - w]]))[0]

    if e >= 0:
        # The 21-point Kronrod rule never evaluates the endpoints
        def f(w):
            return at(w) * measure.density(w)
        return (_checked_quad(f, 0, 0.5, measure, **kwargs)
                + _checked_quad(f, 0.5, 1, measure, **kwargs))

    # Substituting v = w^(e+1) near w = 0 (and v = (1-w)^(e+1) near w = 1)
    # absorbs the singular factor: w^e dw = dv / (e+1)
    p = e + 1

    def left(v):
        w = v ** (1 / p)
        return at(w) * (1 - w) ** e * measure.regular(w) / p

    def right(v):
        t = v ** (1 / p)
        return at(1 - t) * (1 - t) ** e * measure.regular(1 - t) / p

    top = 0.5 ** p
    return (_checked_quad(left, 0, top, measure, **kwargs)
            + _checked_quad(right, 0, top, measure, **kwargs))


@export
def simplex_grid(d, size):
    """Evenly spaced portfolios (xi1, 1 - xi1), xi1 from 0 to 1.
    Dense grids are only offered for d = 2, see simplex_lattice otherwise.
    """
    if d != 2:
        raise ValueError("Dense portfolio grids are bivariate; "
                         "use simplex_lattice or an explicit grid for d=%d" % d)
    if size < 2:
        raise ValueError("Grid needs at least 2 points")
    x = np.linspace(0, 1, int(size))
    return np.column_stack([x, 1 - x])


@export
def simplex_lattice(d, m):
    """All portfolios with weights in {0, 1/m, ..., 1}"""
    if d < 1 or m < 1:
        raise ValueError("Need d >= 1 and m >= 1")
    rows = []
    # Stars and bars: the bar positions split m into d parts
    for bars in combinations(range(m + d - 1), d - 1):
        edges = (-1,) + bars + (m + d - 1,)
        rows.append([edges[i + 1] - edges[i] - 1 for i in range(d)])
    return np.array(rows, dtype=float) / m


def _resolve_grid(measure, grid_size=None, grid=None):
    if grid is not None:
        grid = apl.portfolio(np.atleast_2d(grid))
        if grid.shape[1] != measure.dim:
            raise ValueError("Grid portfolios have %d components, measure "
                             "has dimension %d" % (grid.shape[1], measure.dim))
        return grid
    if grid_size is None:
        raise ValueError("Give a grid size or an explicit grid")
    return simplex_grid(measure.dim, grid_size)


@export
@apl.vectorize_first
def bivariate_curve_value(xi1, measure, alpha, **kwargs):
    """Psi g_{xi,alpha} at the bivariate portfolio xi = (xi1, 1 - xi1)

    :param progress_bar: if True, show a progress bar during evaluation
    (if xi1 is an array)
    Further kwargs are passed to scipy.integrate.quad.
    """
    xi = np.array([xi1, 1 - xi1])
    return integrate(measure, lambda s: eval_g(xi, alpha, s), **kwargs)


@export
def curve_values(measure, alpha, grid, **kwargs):
    """Psi g_{xi,alpha} for each row xi of grid, without canonicality check"""
    grid = np.atleast_2d(np.asarray(grid, dtype=float))
    if grid.shape[1] != measure.dim:
        raise ValueError("Grid portfolios have %d components, measure "
                         "has dimension %d" % (grid.shape[1], measure.dim))
    if measure.kind in ('discrete', 'empirical'):
        return eval_g(grid, alpha, measure.atoms) @ measure.weights
    if measure.dim != 2:
        raise NotImplementedError("Only bivariate %s measures are supported"
                                  % measure.kind)
    return bivariate_curve_value(grid[:, 0], measure, alpha, **kwargs)


@export
def diversification_curve(measure, alpha, grid_size=None, grid=None,
                          tol=None, **kwargs):
    """Diversification coefficients Psi* g_{xi,alpha} over a portfolio grid

    :param measure: canonical spectral measure
    :param alpha: tail index
    :param grid_size: number of evenly spaced bivariate portfolios
    :param grid: explicit list of portfolios (required for d >= 3)
    :param tol: tolerance of the canonicality check.
    Defaults to validate_canonical's default for the measure.
    Non-canonical measures raise a NonCanonicalWarning and give a curve
    flagged canonical=False; the values are Psi g_{xi,alpha} all the same.

    Further kwargs are passed to scipy.integrate.quad.
    """
    alpha = apl.tail_index(alpha)
    grid = _resolve_grid(measure, grid_size, grid)
    report = apl.validate_canonical(measure, tol=tol)
    if not report.passed:
        apl.warn_non_canonical(report)
    values = curve_values(measure, alpha, grid, **kwargs)
    return DiversificationCurve(alpha, grid, np.maximum(values, 0),
                                canonical=report.passed)


@export
def extreme_risk_index(measure, xi, alpha, **kwargs):
    """Extreme risk index gamma_xi = Psi f_{xi,alpha}

    :param measure: spectral measure normalized to total mass 1
    (any other normalization scales the result)
    """
    xi = np.asarray(xi, dtype=float)
    return integrate(measure, lambda s: eval_f(xi, alpha, s), **kwargs)


@export
def aggregation_coefficient(measure, alpha, d=None, **kwargs):
    """Asymptotic risk aggregation coefficient
    q_d = d^alpha gamma_eta / gamma_e1, eta the uniform portfolio.
    """
    alpha = apl.tail_index(alpha)
    d = measure.dim if d is None else int(d)
    if d != measure.dim:
        raise ValueError("d=%d does not match the measure dimension %d"
                         % (d, measure.dim))
    if not measure.on_simplex:
        raise ValueError("Aggregation coefficients need a measure "
                         "on the simplex")
    gamma_e1 = extreme_risk_index(measure, apl.unit_vector(0, d), alpha,
                                  **kwargs)
    if gamma_e1 <= 0:
        raise apl.DegenerateMeasureError(
            "First margin carries no tail mass", coordinate=0)
    gamma_eta = extreme_risk_index(measure, np.full(d, 1 / d), alpha,
                                   **kwargs)
    return d ** alpha * gamma_eta / gamma_e1


@export
def stable_tail_dependence(measure, x, **kwargs):
    """l(x) = integral of max_i x_i s_i against a canonical simplex measure"""
    x = np.asarray(x, dtype=float)
    if len(x) != measure.dim:
        raise ValueError("Dimension mismatch")
    return integrate(measure, lambda s: np.max(s * x, axis=1), **kwargs)


@export
@apl.vectorize_first
def pickands(t, measure, **kwargs):
    """Pickands dependence function A(t) = l(t, 1 - t) of a
    bivariate canonical measure"""
    return stable_tail_dependence(measure, [t, 1 - t], **kwargs)
