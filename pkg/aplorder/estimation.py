"""Heavy-tailed samplers and tail estimators: extreme risk index,
empirical spectral measures, tail ratios, Breiman constants and
stop-loss comparisons
"""
import logging

import numpy as np
import pandas as pd

import aplorder as apl
export, __all__ = apl.exporter()

log = logging.getLogger(__name__)

_ESTIMATION_DEFAULTS = dict(
    n_boot=200,
    # Rows per generator stream; blocks can be drawn in any order
    block_size=2 ** 16,
    # Acceptance gates are in units of standard errors
    n_sigma=3,
)


@export
class SampleCloud:
    """n i.i.d. loss vectors (rows) with the model that produced them.

    :param model: dict describing the generating model, e.g.
    dict(family='gumbel_pareto', theta=2, alpha=2, d=2)
    :param seed: seed of the generating streams (also seeds bootstraps)
    """

    def __init__(self, rows, model=None, seed=None):
        rows = np.atleast_2d(np.asarray(rows, dtype=float))
        if rows.ndim != 2 or not len(rows):
            raise ValueError("Sample cloud needs at least one row")
        if not np.all(np.isfinite(rows)):
            raise ValueError("Sample cloud entries must be finite")
        self.rows = apl.frozen_array(rows)
        self.model = dict(model or {})
        self.seed = seed

    @property
    def n(self):
        return self.rows.shape[0]

    @property
    def d(self):
        return self.rows.shape[1]

    @property
    def alpha(self):
        return self.model.get('alpha')

    def norms(self):
        return np.abs(self.rows).sum(axis=1)

    def to_frame(self):
        return pd.DataFrame(self.rows,
                            columns=['x%d' % (i + 1) for i in range(self.d)])

    def to_csv(self, path):
        """Write one loss vector per line below a header row x1,...,xd"""
        self.to_frame().to_csv(path, index=False, float_format='%.17g',
                               lineterminator='\n')

    @classmethod
    def from_csv(cls, path, model=None, seed=None):
        df = pd.read_csv(path)
        model = dict(family='csv', path=str(path)) if model is None else model
        return cls(df.values, model=model, seed=seed)

    def __repr__(self):
        return 'SampleCloud(n=%d, d=%d, model=%s)' % (self.n, self.d,
                                                       self.model)


def _check_sampler_args(alpha, n):
    alpha = apl.tail_index(alpha)
    if int(n) != n or n < 1:
        raise ValueError("Need a positive integer sample size, got %s" % n)
    return alpha, int(n)


def _draw_blocks(seed, name, n, draw):
    """Stack draw(rng, size) over blocks, one generator stream per block"""
    size = _ESTIMATION_DEFAULTS['block_size']
    starts = range(0, n, size)
    log.debug("%s: drawing %d rows in %d blocks", name, n, len(starts))
    return np.concatenate([
        draw(apl.rng_stream(seed, name, i), min(size, n - start))
        for i, start in enumerate(starts)])


@export
def positive_stable(rng, a, size):
    """Positive stable variables with Laplace transform exp(-t^a),
    0 < a <= 1, by Kanter's representation"""
    if not 0 < a <= 1:
        raise ValueError("Stability index must be in (0, 1], got %s" % a)
    if a == 1:
        return np.ones(size)
    u = np.pi * (1 - rng.random(size))
    e = rng.standard_exponential(size)
    return (np.sin(a * u) / np.sin(u) ** (1 / a)
            * (np.sin((1 - a) * u) / e) ** ((1 - a) / a))


def _pareto_from_survival(p, alpha):
    # P(X > t) = t^-alpha for t >= 1
    return p ** (-1 / alpha)


@export
def sample_gumbel_pareto(theta, alpha, d, n, seed):
    """Gumbel(theta) copula with Pareto(alpha) margins.

    Marshall-Olkin construction: with V positive stable of index
    1/theta and E_i standard exponential, U_i = exp(-(E_i/V)^(1/theta))
    has the Gumbel copula.
    """
    alpha, n = _check_sampler_args(alpha, n)
    theta = float(theta)
    if not theta >= 1:
        raise ValueError("Gumbel parameter must be >= 1, got %s" % theta)
    if int(d) != d or d < 1:
        raise ValueError("Need a positive integer dimension, got %s" % d)
    d = int(d)

    def draw(rng, size):
        v = positive_stable(rng, 1 / theta, size)
        y = (rng.standard_exponential((size, d)) / v[:, None]) ** (1 / theta)
        # 1 - U, accurate where U is close to 1
        return _pareto_from_survival(-np.expm1(-y), alpha)

    rows = _draw_blocks(seed, 'sample_gumbel_pareto', n, draw)
    return SampleCloud(rows, seed=seed, model=dict(
        family='gumbel_pareto', theta=theta, alpha=alpha, d=d))


@export
def sample_comonotone_pareto(alpha, d, n, seed):
    """Identical Pareto(alpha) components: the totally dependent case"""
    alpha, n = _check_sampler_args(alpha, n)
    d = int(d)

    def draw(rng, size):
        z = _pareto_from_survival(1 - rng.random(size), alpha)
        return np.repeat(z[:, None], d, axis=1)

    rows = _draw_blocks(seed, 'sample_comonotone_pareto', n, draw)
    return SampleCloud(rows, seed=seed, model=dict(
        family='comonotone_pareto', alpha=alpha, d=d))


@export
def symmetric_sqrt(c):
    """Symmetric square root A of a positive semidefinite matrix C"""
    c = apl.covariance_matrix(c)
    vals, vecs = np.linalg.eigh(c)
    if vals.min() < -1e-12 * max(vals.max(), 1):
        raise ValueError("Matrix is not positive semidefinite "
                         "(smallest eigenvalue %g)" % vals.min())
    return (vecs * np.sqrt(np.maximum(vals, 0))) @ vecs.T


@export
def sample_elliptical_t(c, alpha, n, seed):
    """Rows R A U: R = |Z| with Z Student-t with alpha degrees of freedom,
    A the symmetric square root of C, U uniform on the Euclidean unit
    sphere. The radial tail is regularly varying with index alpha.
    """
    alpha, n = _check_sampler_args(alpha, n)
    a = symmetric_sqrt(c)
    d = len(a)

    def draw(rng, size):
        r = np.abs(rng.standard_t(alpha, size))
        g = rng.standard_normal((size, d))
        u = g / np.linalg.norm(g, axis=1, keepdims=True)
        return r[:, None] * (u @ a)

    rows = _draw_blocks(seed, 'sample_elliptical_t', n, draw)
    return SampleCloud(rows, seed=seed, model=dict(
        family='elliptical_t', c=np.asarray(c, dtype=float).tolist(),
        alpha=alpha, d=d))


@export
def hill_estimator(values, k):
    """Hill estimate of 1/alpha from the k largest of positive values"""
    x = np.sort(np.asarray(values, dtype=float))[::-1]
    if not 1 <= k < len(x):
        raise ValueError("Need 1 <= k < n, got k=%s, n=%d" % (k, len(x)))
    if x[k] <= 0:
        raise ValueError("Hill estimator needs positive order statistics")
    return float(np.mean(np.log(x[:k])) - np.log(x[k]))


@export
class TailEstimate:
    """Point estimate with standard error"""

    def __init__(self, estimate, se, k):
        self.estimate = float(estimate)
        self.se = float(se)
        self.k = k

    def to_dict(self):
        return dict(estimate=self.estimate, se=self.se, k=self.k)

    def __repr__(self):
        return 'TailEstimate(%.6g +- %.3g, k=%d)' % (self.estimate,
                                                      self.se, self.k)


@export
def tail_sample_size(n, k=None):
    """Number k of largest-norm rows forming the tail sample,
    floor(sqrt(n)) unless given"""
    k = int(np.floor(np.sqrt(n))) if k is None else int(k)
    if not 1 <= k < n:
        raise ValueError("Need 1 <= k < n, got k=%d, n=%d" % (k, n))
    return k


def _split_tail(norms, k):
    """Indices of the k largest norms, and the (k+1)-th largest norm"""
    n = len(norms)
    order = np.argpartition(norms, n - k - 1)
    return order[n - k:], norms[order[n - k - 1]]


def _percentile_se(replicates, axis=0):
    lo, hi = np.percentile(replicates, [15.865, 84.135], axis=axis)
    return (hi - lo) / 2


def _bootstrap(cloud, name, statistic, n_boot):
    """Replicates of statistic(rows) over resampled rows"""
    n_boot = _ESTIMATION_DEFAULTS['n_boot'] if n_boot is None else n_boot
    rng = apl.rng_stream(cloud.seed or 0, 'bootstrap:' + name)
    rows = np.asarray(cloud.rows)
    log.debug("%s: %d bootstrap resamples of %d rows", name, n_boot, cloud.n)
    return np.array([statistic(rows[rng.integers(0, cloud.n, cloud.n)])
                     for _ in range(n_boot)])


@export
def empirical_gamma(cloud, xi, k=None, method='exceedance', alpha=None,
                    n_boot=None):
    """Estimate the extreme risk index gamma_xi from the k rows with the
    largest 1-norms.

    :param method: 'exceedance' counts xi^T X_i above the (k+1)-th largest
    norm and divides by k; 'angular' averages ((xi . X_i / |X_i|_1)_+)^alpha
    over the k rows, i.e. integrates f_{xi,alpha} against the empirical
    spectral measure.
    :param alpha: tail index for 'angular', defaults to the cloud model's
    :param k: defaults to floor(sqrt(n))
    :returns: TailEstimate with bootstrap (percentile) standard error
    """
    xi = np.asarray(xi, dtype=float)
    if len(xi) != cloud.d:
        raise ValueError("Dimension mismatch")
    k = tail_sample_size(cloud.n, k)

    if method == 'exceedance':
        def statistic(rows):
            _, threshold = _split_tail(np.abs(rows).sum(axis=1), k)
            return np.count_nonzero(rows @ xi > threshold) / k
    elif method == 'angular':
        alpha = apl.tail_index(cloud.alpha if alpha is None else alpha)

        def statistic(rows):
            norms = np.abs(rows).sum(axis=1)
            top, _ = _split_tail(norms, k)
            s = rows[top] / norms[top, None]
            return np.mean(apl.eval_f(xi, alpha, s))
    else:
        raise ValueError("Unknown estimator '%s'" % method)

    estimate = statistic(np.asarray(cloud.rows))
    replicates = _bootstrap(cloud, 'empirical_gamma', statistic, n_boot)
    return TailEstimate(estimate, _percentile_se(replicates), k)


@export
def empirical_curve(cloud, grid, k=None, n_boot=None):
    """Empirical diversification curve
    gamma_xi / (gamma_e1 + gamma_-e1) over a grid of portfolios.

    For nonnegative losses gamma_-e1 vanishes and this is
    gamma_xi / gamma_e1; both estimate Psi* g_{xi,alpha} for models with
    balanced tails.
    :returns: DataFrame with columns xi1..xid, value, se
    """
    grid = apl.portfolio(np.atleast_2d(grid))
    if grid.shape[1] != cloud.d:
        raise ValueError("Dimension mismatch")
    k = tail_sample_size(cloud.n, k)

    def statistic(rows):
        norms = np.abs(rows).sum(axis=1)
        _, threshold = _split_tail(norms, k)
        # xi^T x <= |x|_1 on the simplex
        rows = rows[norms > threshold]
        counts = np.count_nonzero(rows @ grid.T > threshold, axis=0)
        margin = np.count_nonzero(np.abs(rows[:, 0]) > threshold)
        with np.errstate(divide='ignore', invalid='ignore'):
            return counts / margin

    values = statistic(np.asarray(cloud.rows))
    replicates = _bootstrap(cloud, 'empirical_curve', statistic, n_boot)
    df = pd.DataFrame(grid, columns=['xi%d' % (i + 1)
                                     for i in range(cloud.d)])
    df['value'] = values
    df['se'] = _percentile_se(replicates)
    return df


@export
def empirical_spectral(cloud, k=None):
    """Empirical spectral measure: the directions X_i / |X_i|_1 of the k
    rows with the largest 1-norms, equally weighted, total mass 1"""
    k = tail_sample_size(cloud.n, k)
    norms = cloud.norms()
    top, _ = _split_tail(norms, k)
    return apl.EmpiricalMeasure(cloud.rows[top], mass=1.)


@export
class TailRatioSeries:
    """Ratios P(xi^T X > t) / P(xi^T Y > t) at increasing thresholds.

    Levels where either exceedance set is empty have ratio nan and are
    flagged in undefined.
    """

    def __init__(self, levels, thresholds, counts_x, counts_y, n_x, n_y):
        self.levels = apl.frozen_array(levels)
        self.thresholds = apl.frozen_array(thresholds)
        self.counts_x = np.asarray(counts_x)
        self.counts_y = np.asarray(counts_y)
        self.undefined = (self.counts_x == 0) | (self.counts_y == 0)
        p_x = self.counts_x / n_x
        p_y = self.counts_y / n_y
        with np.errstate(divide='ignore', invalid='ignore'):
            ratios = np.where(self.undefined, np.nan, p_x / p_y)
            rel_var = (1 - p_x) / self.counts_x + (1 - p_y) / self.counts_y
            se = np.where(self.undefined, np.nan, ratios * np.sqrt(rel_var))
        self.ratios = apl.frozen_array(ratios)
        self.se = apl.frozen_array(se)

    def to_frame(self):
        return pd.DataFrame(dict(
            level=self.levels, threshold=self.thresholds,
            ratio=self.ratios, se=self.se,
            count_x=self.counts_x, count_y=self.counts_y,
            undefined=self.undefined))


@export
def tail_ratio_series(cloud_x, cloud_y, xi, quantile_levels):
    """Empirical portfolio loss tail ratios of two clouds.

    Thresholds are the quantiles of the Y portfolio losses at the given
    levels; standard errors follow from binomial counts.
    """
    if cloud_x.d != cloud_y.d:
        raise ValueError("Dimension mismatch: %d vs %d"
                         % (cloud_x.d, cloud_y.d))
    xi = np.asarray(xi, dtype=float)
    levels = np.sort(np.atleast_1d(np.asarray(quantile_levels, dtype=float)))
    if np.any((levels <= 0) | (levels >= 1)):
        raise ValueError("Quantile levels must lie in (0, 1)")
    loss_x = cloud_x.rows @ xi
    loss_y = cloud_y.rows @ xi
    thresholds = np.quantile(loss_y, levels)
    counts_x = np.array([np.count_nonzero(loss_x > t) for t in thresholds])
    counts_y = np.array([np.count_nonzero(loss_y > t) for t in thresholds])
    return TailRatioSeries(levels, thresholds, counts_x, counts_y,
                           cloud_x.n, cloud_y.n)


@export
def positive_part_moment(v, alpha):
    """E[(V)_+^alpha] for a sample (array), a constant (scalar) or a
    frozen scipy.stats distribution (computed analytically by .expect)"""
    alpha = apl.tail_index(alpha)
    if hasattr(v, 'expect'):
        return float(v.expect(lambda x: np.maximum(x, 0) ** alpha))
    v = np.asarray(v, dtype=float)
    return float(np.mean(np.maximum(v, 0) ** alpha))


@export
def breiman_ratio(v1, v2, alpha):
    """Limit of P(R V1 > t) / P(R V2 > t) for R regularly varying with
    index alpha, independent of V1 and V2:
    E[(V1)_+^alpha] / E[(V2)_+^alpha].

    The moment condition E[(V_i)_+^(alpha + eps)] < inf is the caller's
    responsibility.
    """
    denominator = positive_part_moment(v2, alpha)
    if denominator <= 0:
        raise ValueError("E[(V2)_+^alpha] vanishes; ratio undefined")
    return positive_part_moment(v1, alpha) / denominator


@export
def stop_loss_check(cloud_x, cloud_y, xi, u_grid, alpha=None, n_boot=None):
    """Compare stop-loss transforms E(xi^T X - u)_+ (for alpha > 1) and
    E f_u((xi^T X)_+) with f_u(t) = -(t ^ u) (for alpha < 1) of two clouds.

    :param alpha: tail index selecting the regime; defaults to the X
    cloud's model
    :param n_boot: bootstrap resamples per cloud
    :returns: DataFrame, one row per u, with estimates, bootstrap
    (percentile) standard errors and whether the regime's inequality
    X <= Y holds at n_sigma standard errors
    """
    if cloud_x.d != cloud_y.d:
        raise ValueError("Dimension mismatch")
    u_grid = np.atleast_1d(np.asarray(u_grid, dtype=float))
    if np.any(u_grid <= 0) or np.any(np.diff(u_grid) <= 0):
        raise ValueError("u grid must be positive and increasing")
    alpha = cloud_x.alpha if alpha is None else alpha
    alpha = None if alpha is None else apl.tail_index(alpha)
    xi = np.asarray(xi, dtype=float)

    def transforms(rows):
        # E(L - u)_+ and E -((L)_+ ^ u) for every u, shape (2, len(u))
        loss = (rows @ xi)[:, None]
        h = np.maximum(loss - u_grid, 0).mean(axis=0)
        f = -np.minimum(np.maximum(loss, 0), u_grid).mean(axis=0)
        return np.stack([h, f])

    columns = dict(u=u_grid)
    for side, cloud in (('x', cloud_x), ('y', cloud_y)):
        estimate = transforms(np.asarray(cloud.rows))
        se = _percentile_se(_bootstrap(cloud, 'stop_loss:' + side,
                                       transforms, n_boot))
        columns.update({'h_' + side: estimate[0], 'h_%s_se' % side: se[0],
                        'f_' + side: estimate[1], 'f_%s_se' % side: se[1]})
    df = pd.DataFrame(columns)

    n_sigma = _ESTIMATION_DEFAULTS['n_sigma']
    df['holds_icx'] = df.h_x <= df.h_y + n_sigma * np.hypot(df.h_x_se,
                                                            df.h_y_se)
    df['holds_decx'] = df.f_x <= df.f_y + n_sigma * np.hypot(df.f_x_se,
                                                             df.f_y_se)
    if alpha is None or alpha == 1:
        df['regime'] = None
        df['holds'] = np.nan
    elif alpha > 1:
        df['regime'] = 'icx'
        df['holds'] = df.holds_icx
    else:
        df['regime'] = 'decx'
        df['holds'] = df.holds_decx
    return df
