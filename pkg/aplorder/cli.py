"""Command-line front end

Examples:
aplorder curve --model gumbel --theta 2 --alpha 4 --grid 101 --out c.csv
aplorder order --left gumbel:1.4 --right gumbel:2 --alpha 8
aplorder curve --preset figure1a --out figure1a.csv
aplorder simulate --model gumbel:2 --alpha 2 --n 100000 --seed 1 --out x.csv
aplorder estimate --input x.csv --alpha 2 --model gumbel:2 --out est.csv
"""
import argparse
import json
import logging
import os
import sys

import numpy as np
import pandas as pd

import aplorder as apl
export, __all__ = apl.exporter()

log = logging.getLogger(__name__)

OUTPUT_DIR_ENV = 'APLORDER_OUTPUT_DIR'
__all__ += ['OUTPUT_DIR_ENV']

_FLOAT_FORMAT = '%.12g'


@export
def emit_curve_csv(curve, path):
    """Write a diversification curve as CSV: header xi1,...,xid,value,
    12 significant digits, one newline-terminated row per portfolio"""
    curve.to_frame().to_csv(path, index=False, float_format=_FLOAT_FORMAT,
                            lineterminator='\n')


@export
def parse_model(description, theta=None, rho=None, d=2):
    """Build a model from a string like 'gumbel:1.4', 'galambos:1',
    'independent', 'comonotone' or 'elliptical:0.5'.
    The parameter after the colon can instead be given as theta or rho.

    :returns: (kind, model): ('measure', canonical spectral measure) or
    ('elliptical', generalized covariance matrix)
    """
    family, _, param = description.partition(':')
    family = family.strip().lower()
    param = float(param) if param else None
    if family == 'independent':
        return 'measure', apl.psi_independent(d)
    if family == 'comonotone':
        return 'measure', apl.psi_comonotone(d)
    if family in ('gumbel', 'galambos'):
        theta = param if param is not None else theta
        if theta is None:
            raise ValueError("Model %s needs a theta parameter" % family)
        if family == 'gumbel':
            return 'measure', apl.gumbel_bivariate(theta)
        return 'measure', apl.galambos_bivariate(theta)
    if family == 'elliptical':
        rho = param if param is not None else rho
        if rho is None:
            raise ValueError("Elliptical model needs a rho parameter")
        return 'elliptical', apl.generalized_covariance(rho)
    raise ValueError("Unknown model family '%s'" % family)


def _measure(description, args):
    kind, model = parse_model(description, args.theta, args.rho, args.d)
    if kind != 'measure':
        raise ValueError("Command '%s' needs a spectral measure model, "
                         "got '%s'" % (args.command, description))
    return model


def output_path(path):
    """Relative paths are taken relative to $APLORDER_OUTPUT_DIR, if set"""
    base = os.environ.get(OUTPUT_DIR_ENV)
    if base and not os.path.isabs(path):
        return os.path.join(base, path)
    return path


def _grid(args, d):
    if d == 2:
        return apl.simplex_grid(2, args.grid)
    return apl.simplex_lattice(d, args.lattice)


def _alphas(args):
    return [float(a) for a in np.atleast_1d(args.alpha)]


def _curve(kind, model, alpha, grid, tol=None):
    if kind == 'elliptical':
        return apl.elliptical_curve(model, alpha, grid=grid)
    return apl.diversification_curve(model, alpha, grid=grid, tol=tol)


def _curve_table(grid, columns):
    df = pd.DataFrame(grid, columns=['xi%d' % (i + 1)
                                     for i in range(grid.shape[1])])
    for name, values in columns:
        df[name] = values
    return df


def _write_csv(df, path):
    path = output_path(path)
    df.to_csv(path, index=False, float_format=_FLOAT_FORMAT,
              lineterminator='\n')
    return path


def _dumps(x):
    return json.dumps(x, sort_keys=True, indent=2, default=_jsonable) + '\n'


def _write_json(x, path):
    if not path:
        return []
    path = output_path(path)
    with open(path, mode='w') as f:
        f.write(_dumps(x))
    return [path]


def cmd_curve(args):
    if args.preset:
        return _preset_curves(args)
    kind, model = parse_model(args.model, args.theta, args.rho, args.d)
    d = 2 if kind == 'elliptical' else model.dim
    grid = _grid(args, d)
    alphas = _alphas(args)
    curves = [_curve(kind, model, a, grid, args.tol) for a in alphas]
    if len(curves) == 1:
        path = output_path(args.out)
        emit_curve_csv(curves[0], path)
    else:
        path = _write_csv(_curve_table(
            grid, [('alpha=%g' % a, c.values)
                   for a, c in zip(alphas, curves)]), args.out)
    return dict(outputs=[path], rows=len(grid),
                canonical=all(c.canonical for c in curves))


def _preset_curves(args):
    presets = apl.load_json('presets.json')
    if args.preset not in presets:
        raise ValueError("Unknown preset '%s', choose from %s"
                         % (args.preset, sorted(presets)))
    preset = presets[args.preset]
    grid = apl.simplex_grid(2, preset.get('grid', args.grid))
    columns = []
    for value in preset['values']:
        params = dict(preset['fixed'], **{preset['vary']: value})
        description = '%s:%s' % (preset['family'],
                          params['rho' if preset['family'] == 'elliptical'
                                 else 'theta'])
        kind, model = parse_model(description)
        curve = _curve(kind, model, params['alpha'], grid)
        columns.append(('%s=%g' % (preset['vary'], value), curve.values))
    path = _write_csv(_curve_table(grid, columns), args.out)
    return dict(outputs=[path], rows=len(grid), preset=preset)


def cmd_order(args):
    left = _measure(args.left, args)
    right = _measure(args.right, args)
    alphas = _alphas(args)
    alpha_left = alphas[0] if args.alpha_left is None else args.alpha_left
    alpha_right = alphas[0] if args.alpha_right is None else args.alpha_right
    lambdas = np.ones(left.dim) if args.lambdas is None else args.lambdas
    margins = apl.MarginalTailRelation(lambdas, two_sided=args.two_sided)
    verdict = apl.apl_verdict(
        left, right, alpha_left, alpha_right, margins,
        grid=apl.simplex_grid(left.dim, args.grid) if left.dim == 2
        else apl.simplex_lattice(left.dim, args.lattice),
        tol=args.tol)
    return dict(verdict=verdict.to_dict(),
                outputs=_write_json(verdict.to_dict(), args.out))


def cmd_canonicalize(args):
    alpha = _alphas(args)[0]
    if args.input:
        df = pd.read_csv(args.input)
        if 'weight' not in df.columns:
            raise ValueError("Atom file needs a 'weight' column")
        atoms = df.drop(columns='weight').values
        measure = apl.DiscreteMeasure(atoms, df['weight'].values)
    else:
        measure = _measure(args.model, args)
    canonical = apl.canonicalize(measure, alpha, cells=args.cells)
    report = apl.validate_canonical(canonical)
    d = canonical.dim
    df = pd.DataFrame(canonical.atoms, columns=['s%d' % (i + 1)
                                                for i in range(d)])
    df['weight'] = canonical.weights
    path = _write_csv(df, args.out)
    return dict(outputs=[path], atoms=len(df), report=report.to_dict())


def _cloud(args):
    alpha = _alphas(args)[0]
    family, _, param = args.model.partition(':')
    param = float(param) if param else None
    if family == 'gumbel':
        theta = param if param is not None else args.theta
        return apl.sample_gumbel_pareto(theta, alpha, args.d, args.n,
                                        args.seed)
    if family == 'comonotone':
        return apl.sample_comonotone_pareto(alpha, args.d, args.n, args.seed)
    if family == 'independent':
        return apl.sample_gumbel_pareto(1, alpha, args.d, args.n, args.seed)
    if family == 'elliptical':
        rho = param if param is not None else args.rho
        return apl.sample_elliptical_t(apl.generalized_covariance(rho),
                                       alpha, args.n, args.seed)
    raise ValueError("Cannot simulate model family '%s'" % family)


def cmd_simulate(args):
    cloud = _cloud(args)
    path = output_path(args.out)
    cloud.to_csv(path)
    return dict(outputs=[path], model=cloud.model, n=cloud.n)


def cmd_estimate(args):
    alpha = _alphas(args)[0]
    if args.input:
        cloud = apl.SampleCloud.from_csv(args.input, seed=args.seed)
        cloud.model['alpha'] = alpha
    else:
        cloud = _cloud(args)
    grid = apl.simplex_grid(2, args.grid) if cloud.d == 2 \
        else apl.simplex_lattice(cloud.d, args.lattice)
    k = apl.tail_sample_size(cloud.n, args.k)
    df = apl.empirical_curve(cloud, grid, k=k, n_boot=args.n_boot)
    if args.model and not args.model.startswith('elliptical'):
        _, model = parse_model(args.model, args.theta, args.rho, cloud.d)
        if model.dim != cloud.d:
            raise ValueError("Model %s has dimension %d, the sample has %d"
                             % (args.model, model.dim, cloud.d))
        df['analytic'] = apl.curve_values(model, alpha, grid)
    path = _write_csv(df, args.out)
    return dict(outputs=[path], n=cloud.n, k=k,
                hill_alpha=1 / apl.hill_estimator(cloud.norms(), k))


def cmd_bounds(args):
    measure = _measure(args.model, args)
    grid = _grid(args, measure.dim)
    checks = {'alpha=%g' % a: apl.thm38_bounds_check(
        measure, a, grid=grid, tol=args.tol or 1e-9).to_dict()
        for a in _alphas(args)}
    if len(checks) > 1:
        checks['monotone_in_alpha'] = apl.alpha_monotonicity_check(
            measure, _alphas(args), grid=grid,
            tol=args.tol or 1e-9).to_dict()
    return dict(checks=checks, outputs=_write_json(checks, args.out),
                passed=all(c['passed'] for c in checks.values()))


COMMANDS = dict(curve=cmd_curve, order=cmd_order,
                canonicalize=cmd_canonicalize, estimate=cmd_estimate,
                simulate=cmd_simulate, bounds=cmd_bounds)


def _add_common(p, out=None):
    p.add_argument('--config', type=str,
                   help="JSON file whose keys mirror the flags")
    p.add_argument('--out', type=str, default=out, help="output file")
    p.add_argument('--summary', type=str,
                   help="also write the JSON summary to this file")
    p.add_argument('--alpha', type=float, nargs='+', default=[2.])
    p.add_argument('--d', type=int, default=2, help="dimension")
    p.add_argument('--theta', type=float)
    p.add_argument('--rho', type=float)
    p.add_argument('--grid', type=int, default=201,
                   help="bivariate portfolio grid size")
    p.add_argument('--lattice', type=int, default=10,
                   help="lattice resolution m for d > 2")
    p.add_argument('--tol', type=float)
    p.add_argument('--seed', type=int, default=0)
    p.add_argument('--verbose', action='store_true')


@export
def make_parser():
    parser = argparse.ArgumentParser(
        prog='aplorder',
        description="Extreme portfolio loss diversification curves, "
                    "spectral measure orders and tail estimators")
    parser.add_argument('--version', action='version',
                        version='%(prog)s ' + apl.__version__)
    sub = parser.add_subparsers(dest='command', required=True)

    p = sub.add_parser('curve', help="diversification curves")
    _add_common(p, out='curve.csv')
    p.add_argument('--model', type=str, default='independent')
    p.add_argument('--preset', type=str,
                   help="figure1a..figure1d or figure2a..figure2d")

    p = sub.add_parser('order', help="asymptotic portfolio loss order")
    _add_common(p)
    p.add_argument('--left', type=str, help="required, here or in --config")
    p.add_argument('--right', type=str, help="required, here or in --config")
    p.add_argument('--alpha-left', type=float)
    p.add_argument('--alpha-right', type=float)
    p.add_argument('--lambdas', type=float, nargs='+',
                   help="marginal tail ratios, default all 1")
    p.add_argument('--two-sided', action='store_true',
                   help="marginal tail ratios hold in both directions")

    p = sub.add_parser('canonicalize', help="canonical spectral measure")
    _add_common(p, out='canonical.csv')
    p.add_argument('--model', type=str, default='independent')
    p.add_argument('--input', type=str,
                   help="CSV of atoms s1..sd with a weight column")
    p.add_argument('--cells', type=int)

    for name, out, text in (('simulate', 'sample.csv', "sample clouds"),
                            ('estimate', 'estimate.csv',
                             "empirical diversification curves")):
        p = sub.add_parser(name, help=text)
        _add_common(p, out=out)
        p.add_argument('--model', type=str, default='gumbel:2')
        p.add_argument('--n', type=int, default=100000)
        if name == 'estimate':
            p.add_argument('--input', type=str, help="sample cloud CSV")
            p.add_argument('--k', type=int)
            p.add_argument('--n-boot', type=int)
            p.set_defaults(grid=5)

    p = sub.add_parser('bounds', help="best/worst case bound checks")
    _add_common(p)
    p.add_argument('--model', type=str, default='independent')
    return parser, sub


def parse_args(argv):
    """Parse argv; values from --config fill in flags not given"""
    parser, sub = make_parser()
    args = parser.parse_args(argv)
    if args.config:
        with open(args.config, mode='r') as f:
            config = json.load(f)
        config = {k.replace('-', '_'): v for k, v in config.items()}
        config.pop('command', None)
        subparser = sub.choices[args.command]
        known = {a.dest for a in subparser._actions}
        unknown = sorted(set(config) - known)
        if unknown:
            raise ValueError("Unknown config keys: %s" % unknown)
        subparser.set_defaults(**config)
        args = parser.parse_args(argv)
    if args.command == 'order':
        missing = [k for k in ('left', 'right') if not getattr(args, k)]
        if missing:
            raise ValueError("order needs %s" % ' and '.join(
                '--' + k for k in missing))
    return args


def _jsonable(x):
    if isinstance(x, np.ndarray):
        return x.tolist()
    if isinstance(x, np.generic):
        return x.item()
    raise TypeError("Cannot serialize %r" % (x,))


@export
def run(argv=None):
    """Run the command line; returns the exit code
    (0 ok, 2 invalid input, 3 numerical failure)"""
    try:
        args = parse_args(argv)
    except SystemExit as e:
        return e.code
    except (ValueError, OSError) as e:
        print("aplorder: error: %s" % e, file=sys.stderr)
        return 2
    if args.verbose:
        logging.basicConfig(level=logging.DEBUG)

    try:
        result = COMMANDS[args.command](args)
    except ArithmeticError as e:
        print("aplorder: numerical failure: %s" % e, file=sys.stderr)
        return 3
    except (ValueError, NotImplementedError, OSError) as e:
        print("aplorder: error: %s" % e, file=sys.stderr)
        return 2

    summary = dict(result, command=args.command, version=apl.__version__,
                   input={k: v for k, v in vars(args).items()})
    try:
        _write_json(summary, args.summary)
    except OSError as e:
        print("aplorder: error: %s" % e, file=sys.stderr)
        return 2
    print(_dumps(summary), end='')
    log.debug("%s done", args.command)
    return 0


def main():
    sys.exit(run())
