"""Built-in statistics with their rate metadata.

=================  ======  =========  ====
statistic          alpha   gamma      zeta
=================  ======  =========  ====
mean               1/2     inf        1
quantile(p)        1/2     1          1
huber(k)           1/2     1          1
kde_at(x0)         3/8     1/2        1
=================  ======  =========  ====

The kde bandwidth is ``c * m**-0.25`` on a window of length m; this
undersmoothing is what gives alpha = 3/8 and gamma = 1/2.
"""

import math

import numpy as np

from . import kernels
from .core import Statistic, as_sample
from .errors import InvalidInputError, NonConvergenceError, StatisticEvaluationError


def order_index(p, m):
    """Smallest k in 1..m with ``k / m >= p`` (the type-1 / ceil rule)."""
    if not 0 < p <= 1:
        raise InvalidInputError(f"probability must lie in (0, 1], got {p}")
    k = min(max(int(math.ceil(p * m)), 1), m)
    while k > 1 and (k - 1) / m >= p:
        k -= 1
    while k < m and k / m < p:
        k += 1
    return k


def _univariate(sample, name):
    sample = as_sample(sample)
    if sample.d != 1:
        raise InvalidInputError(f"{name} needs univariate data, got d={sample.d}")
    return sample.values


def _window(window, name):
    w = np.asarray(window, dtype=np.float64)
    if w.ndim != 1:
        raise InvalidInputError(f"{name} needs a univariate window")
    if w.size == 0:
        raise InvalidInputError(f"{name} of an empty window")
    return w


# --- mean ------------------------------------------------------------------


def sample_mean(window):
    w = np.asarray(window, dtype=np.float64)
    if w.shape[0] == 0:
        raise InvalidInputError("mean of an empty window")
    m = w.shape[0]
    if w.ndim == 1:
        return kernels.block_means(w, m, 1, 1)[0]
    return np.array([kernels.block_means(w[:, i], m, 1, 1)[0] for i in range(w.shape[1])])


def _mean_batch(sample, scheme):
    cols = [
        kernels.block_means(sample.data[:, i], scheme.b, scheme.h, scheme.q)
        for i in range(sample.d)
    ]
    return cols[0] if sample.d == 1 else np.column_stack(cols)


def mean():
    return Statistic(
        evaluate=sample_mean, alpha=0.5, gamma=math.inf, zeta=1.0, name="mean", batch=_mean_batch
    )


# --- quantile --------------------------------------------------------------


def sample_quantile(window, p):
    """Type-1 sample quantile: the ``ceil(p m)``-th order statistic."""
    w = _window(window, "quantile")
    if not 0 < p < 1:
        raise InvalidInputError(f"quantile level must lie in (0, 1), got {p}")
    k = order_index(p, w.size)
    return kernels.block_quantiles(w, w.size, 1, 1, k)[0]


def quantile(p=0.5):
    if not 0 < p < 1:
        raise InvalidInputError(f"quantile level must lie in (0, 1), got {p}")

    def batch(sample, scheme):
        x = _univariate(sample, "quantile")
        return kernels.block_quantiles(x, scheme.b, scheme.h, scheme.q, order_index(p, scheme.b))

    return Statistic(
        evaluate=lambda w: sample_quantile(w, p),
        alpha=0.5,
        gamma=1.0,
        zeta=1.0,
        name=f"quantile:p={p:g}",
        batch=batch,
    )


# --- huber -----------------------------------------------------------------


def _check_huber(k, tol, max_iter):
    if not k > 0:
        raise InvalidInputError(f"huber k must be positive, got {k}")
    if not tol > 0 or max_iter < 1:
        raise InvalidInputError("huber needs tol > 0 and max_iter >= 1")


def huber_location(window, k=1.345, tol=1e-10, max_iter=100):
    """Huber M-estimate of location by iteratively reweighted means.

    Starts at the median; the scale is MAD/0.6745 computed once, or the mean
    absolute deviation about the median when the MAD is zero.  Stops when a
    step is smaller than ``tol`` times the scale, or than a few ulps of the
    current value.

    Raises
    ------
    NonConvergenceError
        After ``max_iter`` steps; ``last_iterate`` holds the final value.
    """
    w = _window(window, "huber")
    _check_huber(k, tol, max_iter)
    est, status = kernels.block_huber(w, w.size, 1, 1, k, tol, max_iter)
    if status[0] != kernels.CONVERGED:
        raise NonConvergenceError(
            f"huber did not converge in {max_iter} iterations", last_iterate=float(est[0])
        )
    return est[0]


def huber(k=1.345, tol=1e-10, max_iter=100):
    _check_huber(k, tol, max_iter)

    def batch(sample, scheme):
        x = _univariate(sample, "huber")
        est, status = kernels.block_huber(x, scheme.b, scheme.h, scheme.q, k, tol, max_iter)
        bad = np.flatnonzero(status != kernels.CONVERGED)
        if bad.size:
            j = int(bad[0])
            cause = NonConvergenceError(
                f"huber did not converge in {max_iter} iterations", last_iterate=float(est[j])
            )
            raise StatisticEvaluationError(j + 1, cause)
        return est

    return Statistic(
        evaluate=lambda w: huber_location(w, k, tol, max_iter),
        alpha=0.5,
        gamma=1.0,
        zeta=1.0,
        name=f"huber:k={k:g}",
        batch=batch,
    )


# --- kernel density at a point ---------------------------------------------


def kde_at_point(window, x0=0.0, c=None):
    """Gaussian-kernel density estimate at ``x0`` with bandwidth ``c * m**-0.25``.

    ``c=None`` uses the window's standard deviation (ddof=1); a window with
    zero spread falls back to ``m**-0.25``.
    """
    w = _window(window, "kde")
    return kernels.block_kde(w, w.size, 1, 1, x0, _kde_const(c))[0]


def _kde_const(c):
    if c is None:
        return 0.0
    if not c > 0:
        raise InvalidInputError(f"bandwidth constant must be positive, got {c}")
    return float(c)


def kde_at(x0=0.0, c=None):
    const = _kde_const(c)

    def batch(sample, scheme):
        x = _univariate(sample, "kde")
        return kernels.block_kde(x, scheme.b, scheme.h, scheme.q, x0, const)

    name = f"kde:x0={x0:g}" + ("" if c is None else f",c={c:g}")
    return Statistic(
        evaluate=lambda w: kde_at_point(w, x0, c),
        alpha=0.375,
        gamma=0.5,
        zeta=1.0,
        name=name,
        batch=batch,
    )


# --- lookup by name --------------------------------------------------------

_FACTORIES = {
    "mean": (mean, {}),
    "median": (quantile, {"p": 0.5}),
    "quantile": (quantile, {"p": 0.5}),
    "huber": (huber, {"k": 1.345, "tol": 1e-10, "max_iter": 100}),
    "kde": (kde_at, {"x0": 0.0, "c": None}),
}


def parse_statistic(spec: str) -> Statistic:
    """Build a statistic from ``"name"`` or ``"name:key=value,key=value"``.

    >>> parse_statistic("huber:k=2").name
    'huber:k=2'
    """
    name, _, params = spec.strip().partition(":")
    name = name.strip().lower()
    if name not in _FACTORIES:
        raise InvalidInputError(f"unknown statistic {name!r}; known: {sorted(_FACTORIES)}")
    factory, defaults = _FACTORIES[name]
    kwargs = dict(defaults)
    for item in filter(None, (s.strip() for s in params.split(","))):
        key, sep, val = item.partition("=")
        key = key.strip()
        if not sep or key not in defaults:
            raise InvalidInputError(f"bad parameter {item!r} for statistic {name!r}")
        try:
            kwargs[key] = int(val) if key == "max_iter" else float(val)
        except ValueError:
            raise InvalidInputError(f"parameter {key} must be numeric, got {val!r}") from None
        if name == "median" and key == "p":
            raise InvalidInputError("median takes no p; use quantile:p=...")
    return factory(**kwargs)
