"""Integral order of canonical spectral measures and the asymptotic
portfolio loss order it decides

All checks are grid-relative: a grid of portfolios can refute an
ordering or support it, never certify it on the whole simplex.
"""
import numpy as np

import aplorder as apl
export, __all__ = apl.exporter()
__all__ += ['RELATIONS']

RELATIONS = ('left_precedes', 'right_precedes', 'equivalent', 'incomparable')

_ORDER_DEFAULTS = dict(
    grid_size=201,
    tol_atoms=1e-9,
    tol_quadrature=1e-6,
)


@export
class OrderVerdict:
    """Outcome of an ordering comparison.

    :param relation: one of RELATIONS
    :param max_violation: largest breach of the reported relation
    (0 for a clean verdict)
    :param witness_xi: portfolio where the curves separate most in the
    reported direction, or where the ordering breaks for 'incomparable'.
    None for 'equivalent' and for verdicts decided without a grid.
    :param forward_violation: max over the grid of left - right
    :param backward_violation: max over the grid of right - left
    :param rule: name of the rule that decided the verdict
    :param trace: list of messages, one per rule tried
    """

    def __init__(self, relation, max_violation=0., witness_xi=None,
                 tolerance=None, forward_violation=None,
                 backward_violation=None, rule='grid', trace=()):
        if relation not in RELATIONS:
            raise ValueError("Unknown relation '%s'" % relation)
        self.relation = relation
        self.max_violation = max(float(max_violation), 0.)
        self.witness_xi = (None if witness_xi is None
                           else np.asarray(witness_xi, dtype=float))
        self.tolerance = tolerance
        self.forward_violation = forward_violation
        self.backward_violation = backward_violation
        self.rule = rule
        self.trace = list(trace)

    def to_dict(self):
        return dict(
            relation=self.relation,
            max_violation=self.max_violation,
            witness_xi=(None if self.witness_xi is None
                        else self.witness_xi.tolist()),
            tolerance=self.tolerance,
            forward_violation=self.forward_violation,
            backward_violation=self.backward_violation,
            rule=self.rule,
            trace=self.trace)

    def __repr__(self):
        return 'OrderVerdict(%s, rule=%s, max_violation=%.3g)' % (
            self.relation, self.rule, self.max_violation)


@export
class GridCheck:
    """Pass/fail outcome of an inequality checked over a grid.

    :param worst_gap: largest value of (lhs - rhs) over the grid,
    the check passes iff worst_gap <= tol
    :param witness: grid point attaining worst_gap
    """

    def __init__(self, gaps, grid, tol, name=''):
        gaps = np.asarray(gaps, dtype=float)
        i = int(np.argmax(gaps))
        self.worst_gap = float(gaps[i])
        self.witness = np.asarray(grid[i], dtype=float)
        self.tol = tol
        self.passed = bool(self.worst_gap <= tol)
        self.name = name

    def __bool__(self):
        return self.passed

    def to_dict(self):
        return dict(check=self.name, passed=self.passed, tol=self.tol,
                    worst_gap=self.worst_gap, witness=self.witness.tolist())

    def __repr__(self):
        return 'GridCheck(%s, passed=%s, worst_gap=%.3g)' % (
            self.name, self.passed, self.worst_gap)


@export
class MarginalTailRelation:
    """Per-coordinate marginal tail ratios
    lambda_i = lim P(|X_i| > t) / P(|Y_i| > t), possibly inf.

    :param two_sided: True if the margins are also known to be
    equivalent in the reverse direction (all lambda_i = 1 in both
    directions), which upgrades spectral equivalence to equivalence.
    """

    def __init__(self, lambdas, two_sided=False):
        lambdas = np.asarray(lambdas, dtype=float)
        if np.any(np.isnan(lambdas)) or np.any(lambdas < 0):
            raise ValueError("Tail ratios must be >= 0, got %s" % lambdas)
        self.lambdas = apl.frozen_array(lambdas)
        self.two_sided = two_sided

    def in_unit_interval(self):
        """All lambda_i in (0, 1]"""
        return bool(np.all((self.lambdas > 0) & (self.lambdas <= 1)))

    def at_most_one(self):
        return bool(np.all(self.lambdas <= 1))

    def all_one(self):
        return bool(np.all(self.lambdas == 1))


def _atom_kind(measure):
    return measure.kind in ('discrete', 'empirical')


def _default_tol(*measures):
    if all(_atom_kind(m) for m in measures):
        return _ORDER_DEFAULTS['tol_atoms']
    return _ORDER_DEFAULTS['tol_quadrature']


def _default_grid(d, grid, grid_size):
    if grid is not None:
        return np.atleast_2d(np.asarray(grid, dtype=float))
    if d != 2:
        raise ValueError("Give an explicit grid for d=%d" % d)
    return apl.simplex_grid(2, grid_size or _ORDER_DEFAULTS['grid_size'])


def _require_canonical(measure, side, tol=None):
    report = apl.validate_canonical(measure, tol=tol)
    if not report.passed:
        raise apl.NonCanonicalError(
            "%s measure is not canonical (marginal moments %s)"
            % (side, report.moments.tolist()))


@export
def galpha_check(left, right, alpha, grid=None, grid_size=None, tol=None,
                 **kwargs):
    """Decide left <=_{G,alpha} right on a grid of portfolios.

    Compares Psi*_left g_{xi,alpha} with Psi*_right g_{xi,alpha}:
    'equivalent' if they agree within tol everywhere, 'left_precedes'
    ('right_precedes') if left (right) never exceeds the other by more
    than tol, 'incomparable' otherwise.

    :param tol: defaults to 1e-9 for atom measures and 1e-6 if a
    measure needs quadrature
    Further kwargs are passed to scipy.integrate.quad.
    """
    if left.dim != right.dim:
        raise ValueError("Dimension mismatch: %d vs %d"
                         % (left.dim, right.dim))
    alpha = apl.tail_index(alpha)
    tol = _default_tol(left, right) if tol is None else tol
    _require_canonical(left, 'Left')
    _require_canonical(right, 'Right')
    grid = apl.portfolio(_default_grid(left.dim, grid, grid_size))

    delta = (apl.curve_values(left, alpha, grid, **kwargs)
             - apl.curve_values(right, alpha, grid, **kwargs))
    forward = float(delta.max())
    backward = float((-delta).max())
    common = dict(tolerance=tol, forward_violation=forward,
                  backward_violation=backward)

    if forward <= tol and backward <= tol:
        return OrderVerdict('equivalent', max(forward, backward), **common)
    if forward <= tol:
        return OrderVerdict('left_precedes', forward,
                            witness_xi=grid[np.argmin(delta)], **common)
    if backward <= tol:
        return OrderVerdict('right_precedes', backward,
                            witness_xi=grid[np.argmax(delta)], **common)
    return OrderVerdict('incomparable', min(forward, backward),
                        witness_xi=grid[np.argmax(delta)], **common)


@export
def thm38_bounds_check(measure, alpha, grid=None, grid_size=None, tol=1e-9,
                       **kwargs):
    """Check the best/worst case sandwich for a canonical measure on the
    simplex: sum_i xi_i^alpha <= Psi* g_{xi,alpha} <= 1 for alpha >= 1,
    with both inequalities reversed for alpha <= 1.

    :returns: GridCheck over the larger of the two bound violations
    """
    alpha = apl.tail_index(alpha)
    if not measure.on_simplex:
        raise NotImplementedError(
            "Best/worst case bounds hold for measures on the simplex only")
    _require_canonical(measure, 'Input')
    grid = apl.portfolio(_default_grid(measure.dim, grid, grid_size))
    values = apl.curve_values(measure, alpha, grid, **kwargs)
    independent = (grid ** alpha).sum(axis=1)
    sign = 1 if alpha >= 1 else -1
    gaps = np.maximum(sign * (independent - values), sign * (values - 1))
    return GridCheck(gaps, grid, tol, name='best_worst_case_bounds')


@export
def apl_verdict(left, right, alpha_left, alpha_right, margins, grid=None,
                grid_size=None, tol=None, **kwargs):
    """Decide left <=_apl right from tail indices, marginal tail ratios
    and canonical spectral measures.

    Rules, in order:
      1. different tail indices: the lighter tail precedes;
      2. alpha = 1 on the simplex with all lambda_i <= 1: left precedes
         (the canonical integral order is trivial at alpha = 1);
      3. equal alpha, all lambda_i in (0, 1], both measures on the simplex
         and left <=_{G,alpha} right: left precedes;
      4. otherwise no rule applies: 'incomparable'.

    :param margins: MarginalTailRelation or a vector of lambda_i
    :returns: OrderVerdict whose trace names every rule tried
    """
    alpha_left = apl.tail_index(alpha_left)
    alpha_right = apl.tail_index(alpha_right)
    if not isinstance(margins, MarginalTailRelation):
        margins = MarginalTailRelation(margins)
    if len(margins.lambdas) != left.dim or left.dim != right.dim:
        raise ValueError("Tail ratios and measures must share the dimension")
    trace = []

    if alpha_left != alpha_right:
        relation = ('left_precedes' if alpha_left > alpha_right
                    else 'right_precedes')
        trace.append("tail index dominance: alpha_left=%g, alpha_right=%g"
                     % (alpha_left, alpha_right))
        return OrderVerdict(relation, rule='tail_index_dominance',
                            trace=trace)
    trace.append("tail index dominance: not applicable, equal alpha=%g"
                 % alpha_left)
    alpha = alpha_left
    simplex = left.on_simplex and right.on_simplex

    if alpha == 1:
        if simplex and margins.at_most_one():
            trace.append("unit tail index: all lambda_i <= 1 on the simplex")
            if margins.all_one():
                trace.append("reverse relation holds as well "
                             "(all lambda_i = 1)")
            return OrderVerdict('left_precedes', rule='unit_tail_index',
                                trace=trace)
        trace.append("unit tail index: needs simplex measures and "
                     "lambda_i <= 1")

    if not margins.in_unit_interval():
        trace.append("spectral order: lambda_i outside (0, 1]: %s"
                     % margins.lambdas.tolist())
    elif not simplex:
        trace.append("spectral order: automated for measures on the "
                     "simplex only")
    else:
        verdict = galpha_check(left, right, alpha, grid=grid,
                               grid_size=grid_size, tol=tol, **kwargs)
        trace.append("spectral order: G_alpha check gives %s"
                     % verdict.relation)
        if verdict.relation == 'equivalent' and margins.two_sided \
                and margins.all_one():
            verdict.rule = 'spectral_equivalence'
            verdict.trace = trace
            return verdict
        if verdict.relation in ('left_precedes', 'equivalent'):
            if verdict.relation == 'equivalent':
                trace.append("only the implication left <=_apl right is "
                             "available without two-sided margins")
            return OrderVerdict(
                'left_precedes', verdict.forward_violation,
                witness_xi=verdict.witness_xi, tolerance=verdict.tolerance,
                forward_violation=verdict.forward_violation,
                backward_violation=verdict.backward_violation,
                rule='spectral_order', trace=trace)

    trace.append("no rule applies")
    return OrderVerdict('incomparable', rule='no_rule', trace=trace)


@export
def quadform_simplex_check(c, d, grid=None, grid_size=None, tol=1e-9):
    """Check xi^T C xi <= xi^T D xi over a grid of portfolios.

    The grid is not required to lie in the simplex, so the check can
    also document violations outside it.
    """
    c = apl.covariance_matrix(c)
    d = apl.covariance_matrix(d)
    if c.shape != d.shape:
        raise ValueError("Matrix dimensions differ: %s vs %s"
                         % (c.shape, d.shape))
    grid = _default_grid(len(c), grid, grid_size)
    gaps = (np.einsum('ij,jk,ik->i', grid, c, grid)
            - np.einsum('ij,jk,ik->i', grid, d, grid))
    return GridCheck(gaps, grid, tol, name='quadratic_form_order')


@export
def alpha_monotonicity_check(measure, alphas, grid=None, grid_size=None,
                             tol=1e-9, **kwargs):
    """Check that Psi* g_{xi,alpha} is nonincreasing in alpha at every
    grid portfolio.

    :returns: GridCheck whose witness is the portfolio with the largest
    increase between consecutive alphas
    """
    alphas = np.sort([apl.tail_index(a) for a in alphas])
    if len(alphas) < 2:
        raise ValueError("Need at least two tail indices")
    grid = apl.portfolio(_default_grid(measure.dim, grid, grid_size))
    values = np.array([apl.curve_values(measure, a, grid, **kwargs)
                       for a in alphas])
    increases = np.diff(values, axis=0).max(axis=0)
    return GridCheck(increases, grid, tol, name='alpha_monotonicity')
