import inspect
import json
import os
import zlib

from boltons.funcutils import wraps
import numpy as np
from tqdm import tqdm


def exporter():
    """Export utility modified from https://stackoverflow.com/a/41895194
    Returns export decorator, __all__ list
    """
    all_ = []

    def decorator(obj):
        all_.append(obj.__name__)
        return obj

    return decorator, all_


export, __all__ = exporter()
__all__ += 'exporter DATA_DIR SIMPLEX_TOL'.split()


DATA_DIR = os.path.dirname(os.path.abspath(
    inspect.getfile(inspect.currentframe())))

# Directions and portfolios are normalized to this precision
SIMPLEX_TOL = 1e-12


@export
class DegenerateMeasureError(ValueError):
    """A marginal weight nu(B_i) vanishes (up to the degeneracy ratio)"""

    def __init__(self, message, coordinate=None, weights=None):
        super().__init__(message)
        self.coordinate = coordinate
        self.weights = weights


@export
class NonCanonicalError(ValueError):
    pass


@export
class NonCanonicalWarning(UserWarning):
    pass


@export
class QuadratureError(ArithmeticError):
    """Adaptive quadrature did not reach the requested tolerance.
    abserr is the achieved error estimate, value the last approximation.
    """

    def __init__(self, message, abserr=None, value=None):
        super().__init__(message)
        self.abserr = abserr
        self.value = value


@export
def data_file(path):
    """Convert path in aplorder's data directory to absolute path"""
    return os.path.join(DATA_DIR, 'data', path)


@export
def load_json(path):
    with open(data_file(path), mode='r') as f:
        return json.load(f)


@export
def vectorize_first(f):
    """For-loop-vectorize the first argument of the function,
    preserving signature, docstring, etc, with optional progressbar
    """
    @wraps(f)
    def newf(xs, *args, **kwargs):
        if 'progress_bar' in kwargs:
            itr = tqdm if kwargs['progress_bar'] else (lambda x: x)
            del kwargs['progress_bar']
        else:
            def itr(x):
                return x

        if isinstance(xs, (list, np.ndarray)) and len(xs):
            return np.array(
                [f(x, *args, **kwargs)
                 for x in itr(xs)])
        return f(xs, *args, **kwargs)
    return newf


@export
def tail_index(alpha):
    """Return alpha as float, checking it is a valid tail index"""
    alpha = float(alpha)
    if not np.isfinite(alpha) or alpha <= 0:
        raise ValueError("Tail index must be positive and finite, got %s"
                         % alpha)
    return alpha


@export
def direction(coords):
    """Return coords rescaled onto the 1-norm unit sphere.
    Works on a single vector or row-wise on a matrix.
    """
    coords = np.asarray(coords, dtype=float)
    if not np.all(np.isfinite(coords)):
        raise ValueError("Direction coordinates must be finite")
    norms = np.abs(coords).sum(axis=-1, keepdims=True)
    if np.any(norms == 0):
        raise ValueError("Zero vector has no direction")
    return coords / norms


@export
def portfolio(weights):
    """Return weights as a float array, checking they form a point
    (or, row-wise, points) of the unit simplex.
    """
    weights = np.asarray(weights, dtype=float)
    if weights.ndim not in (1, 2) or weights.shape[-1] < 1:
        raise ValueError("Portfolio must be a vector or a list of vectors")
    if np.any(weights < 0):
        raise ValueError("Portfolio weights must be nonnegative")
    if np.any(np.abs(weights.sum(axis=-1) - 1) > SIMPLEX_TOL):
        raise ValueError("Portfolio weights must sum to 1")
    return weights


@export
def unit_vector(i, d):
    e = np.zeros(d)
    e[i] = 1.
    return e


@export
def rng_stream(seed, name, index=0):
    """Counter-based generator for the stream (seed, name, index).

    Streams for different operation names and block indices are
    statistically independent, so blocks can be generated in any order
    and still reproduce the same rows.
    """
    key = zlib.crc32(name.encode('utf-8'))
    seq = np.random.SeedSequence([int(seed) & 0xFFFFFFFFFFFFFFFF, key, index])
    return np.random.Generator(np.random.Philox(seq))


@export
def frozen_array(x):
    """Float copy of x that cannot be modified in place"""
    x = np.array(x, dtype=float)
    x.flags.writeable = False
    return x
