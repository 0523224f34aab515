"""Hot numeric kernels, each with a numba and a pure-numpy implementation.

Every kernel evaluates a statistic on the block family
``x[j*h : j*h + b]`` for ``j = 0 .. q-1`` (0-based here; the public API
talks in 1-based block indices).

All sums use the same fixed tree: adjacent pairs are added level by level,
an odd trailing element is carried up unchanged.  Both backends follow it
element for element, so ``mean`` and ``quantile`` agree bitwise across
backends and the kernels are bitwise reproducible at any thread count.
Kernels that call ``exp``/``pow`` may differ across backends in the last ulp.

The public names (``block_means`` etc.) dispatch on :data:`BACKEND`.
"""

import math

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from ._accel import BACKEND, njit, prange

INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)
MAD_TO_SIGMA = 0.6745

# huber status codes
CONVERGED = 0
NOT_CONVERGED = 1
# a step within a few ulps of theta counts as converged even when
# tol * scale is finer than the float grid at theta
STEP_FLOOR = 4.0 * np.finfo(np.float64).eps


# ---------------------------------------------------------------------------
# pairwise summation


def pairwise_sum_numpy(a):
    """Tree-sum along the last axis."""
    a = np.asarray(a, dtype=np.float64)
    m = a.shape[-1]
    if m == 0:
        return np.zeros(a.shape[:-1])
    while m > 1:
        s = a[..., 0 : m - 1 : 2] + a[..., 1:m:2]
        if m % 2:
            s = np.concatenate([s, a[..., m - 1 : m]], axis=-1)
        a = s
        m = a.shape[-1]
    return a[..., 0]


@njit
def _psum_inplace(buf, m):
    # destroys buf[:m]
    if m == 0:
        return 0.0
    while m > 1:
        half = m // 2
        for i in range(half):
            buf[i] = buf[2 * i] + buf[2 * i + 1]
        if m % 2 == 1:
            buf[half] = buf[m - 1]
            m = half + 1
        else:
            m = half
    return buf[0]


@njit
def pairwise_sum_numba(x):
    buf = x.copy()
    return _psum_inplace(buf, buf.shape[0])


def _blocks(x, b, h, q):
    return sliding_window_view(x, b)[::h][:q]


# ---------------------------------------------------------------------------
# block means


def block_means_numpy(x, b, h, q):
    return pairwise_sum_numpy(_blocks(x, b, h, q)) / b


@njit(parallel=True)
def block_means_numba(x, b, h, q):
    out = np.empty(q)
    for j in prange(q):
        buf = x[j * h : j * h + b].copy()
        out[j] = _psum_inplace(buf, b) / b
    return out


# ---------------------------------------------------------------------------
# block quantiles (type-1: the k-th order statistic, k chosen by the caller)


def block_quantiles_numpy(x, b, h, q, k):
    rows = _blocks(x, b, h, q)
    return np.partition(rows, k - 1, axis=1)[:, k - 1].copy()


@njit
def _select(a, k):
    """Quickselect in place; afterwards ``a[:k] <= a[k] <= a[k+1:]``.

    Returns ``a[k]``, the (k+1)-th smallest value, which is exactly the
    element a full sort would put there.
    """
    lo = 0
    hi = a.shape[0] - 1
    while hi > lo:
        if hi - lo < 16:
            for i in range(lo + 1, hi + 1):
                v = a[i]
                j = i - 1
                while j >= lo and a[j] > v:
                    a[j + 1] = a[j]
                    j -= 1
                a[j + 1] = v
            break
        mid = (lo + hi) >> 1
        x0, x1, x2 = a[lo], a[mid], a[hi]
        if x1 < x0:
            x0, x1 = x1, x0
        if x2 < x1:
            x1, x2 = x2, x1
            if x1 < x0:
                x0, x1 = x1, x0
        a[lo], a[mid], a[hi] = x0, x1, x2
        pivot = x1
        i, j = lo, hi
        while i <= j:
            while a[i] < pivot:
                i += 1
            while pivot < a[j]:
                j -= 1
            if i <= j:
                t = a[i]
                a[i] = a[j]
                a[j] = t
                i += 1
                j -= 1
        if k <= j:
            hi = j
        elif k >= i:
            lo = i
        else:
            break
    return a[k]


@njit
def _median_inplace(a):
    m = a.shape[0]
    lower = _select(a, (m - 1) // 2)
    if m % 2:
        return lower
    upper = a[m // 2]
    for i in range(m // 2 + 1, m):
        if a[i] < upper:
            upper = a[i]
    return 0.5 * (lower + upper)


@njit(parallel=True)
def block_quantiles_numba(x, b, h, q, k):
    out = np.empty(q)
    for j in prange(q):
        buf = x[j * h : j * h + b].copy()
        out[j] = _select(buf, k - 1)
    return out


# ---------------------------------------------------------------------------
# Huber location, IRLS from the median with MAD scale fixed per block


def _median_sorted_rows(srt):
    b = srt.shape[1]
    if b % 2:
        return srt[:, b // 2].copy()
    return 0.5 * (srt[:, b // 2 - 1] + srt[:, b // 2])


def block_huber_numpy(x, b, h, q, k, tol, max_iter):
    """Returns ``(estimates, status)``; status is 0 (converged) or 1."""
    rows = np.ascontiguousarray(_blocks(x, b, h, q))
    med = _median_sorted_rows(np.sort(rows, axis=1))
    absdev = np.abs(rows - med[:, None])
    scale = _median_sorted_rows(np.sort(absdev, axis=1)) / MAD_TO_SIGMA
    zero = scale == 0.0
    if zero.any():
        # more than half the block sits on the median; fall back to the
        # mean absolute deviation so the outliers still get downweighted
        scale[zero] = pairwise_sum_numpy(absdev[zero]) / b
    theta = med.copy()
    status = np.zeros(q, dtype=np.int64)
    active = np.flatnonzero(scale > 0.0)
    thr = k * scale
    for _ in range(max_iter):
        if active.size == 0:
            break
        r = rows[active] - theta[active, None]
        ar = np.abs(r)
        t = thr[active, None]
        w = np.where(ar > t, t / np.where(ar > t, ar, 1.0), 1.0)
        step = pairwise_sum_numpy(w * r) / pairwise_sum_numpy(w)
        theta[active] = theta[active] + step
        done = np.abs(step) < np.maximum(tol * scale[active], STEP_FLOOR * np.abs(theta[active]))
        active = active[~done]
    status[active] = NOT_CONVERGED
    return theta, status


@njit(parallel=True)
def block_huber_numba(x, b, h, q, k, tol, max_iter):
    theta_out = np.empty(q)
    status = np.zeros(q, dtype=np.int64)
    for j in prange(q):
        win = x[j * h : j * h + b]
        buf = win.copy()
        med = _median_inplace(buf)
        absdev = np.abs(win - med)
        buf[:] = absdev
        scale = _median_inplace(buf) / MAD_TO_SIGMA
        if scale == 0.0:
            buf[:] = absdev
            scale = _psum_inplace(buf, b) / b
        theta = med
        if scale > 0.0:
            thr = k * scale
            wr = np.empty(b)
            ww = np.empty(b)
            converged = False
            for _ in range(max_iter):
                for i in range(b):
                    r = win[i] - theta
                    ar = abs(r)
                    w = thr / ar if ar > thr else 1.0
                    ww[i] = w
                    wr[i] = w * r
                step = _psum_inplace(wr, b) / _psum_inplace(ww, b)
                theta = theta + step
                if abs(step) < max(tol * scale, STEP_FLOOR * abs(theta)):
                    converged = True
                    break
            if not converged:
                status[j] = NOT_CONVERGED
        theta_out[j] = theta
    return theta_out, status


# ---------------------------------------------------------------------------
# Gaussian kernel density at a point, bandwidth c * b**-0.25


def block_kde_numpy(x, b, h, q, x0, c):
    """``c <= 0`` selects the window standard deviation as the constant."""
    rows = _blocks(x, b, h, q)
    shrink = b ** -0.25
    if c > 0.0:
        lam = np.full(q, c * shrink)
    else:
        if b > 1:
            mean = pairwise_sum_numpy(rows) / b
            dev = rows - mean[:, None]
            sd = np.sqrt(pairwise_sum_numpy(dev * dev) / (b - 1))
        else:
            sd = np.zeros(q)
        lam = sd * shrink
        lam[lam == 0.0] = shrink
    u = (rows - x0) / lam[:, None]
    kv = np.exp(-0.5 * (u * u))
    return pairwise_sum_numpy(kv) * INV_SQRT_2PI / (b * lam)


@njit(parallel=True)
def block_kde_numba(x, b, h, q, x0, c):
    out = np.empty(q)
    shrink = b ** -0.25
    for j in prange(q):
        win = x[j * h : j * h + b]
        if c > 0.0:
            lam = c * shrink
        else:
            sd = 0.0
            if b > 1:
                buf = win.copy()
                mean = _psum_inplace(buf, b) / b
                for i in range(b):
                    d = win[i] - mean
                    buf[i] = d * d
                sd = math.sqrt(_psum_inplace(buf, b) / (b - 1))
            lam = sd * shrink
            if lam == 0.0:
                lam = shrink
        buf = np.empty(b)
        for i in range(b):
            u = (win[i] - x0) / lam
            buf[i] = math.exp(-0.5 * (u * u))
        out[j] = _psum_inplace(buf, b) * INV_SQRT_2PI / (b * lam)
    return out


# ---------------------------------------------------------------------------
# AR(1) recursion y[t] = e[t] + phi * y[t-1], y[0] = e[0]


def ar1_filter_numpy(e, phi):
    from scipy.signal import lfilter

    return lfilter([1.0], [1.0, -phi], e)


@njit
def ar1_filter_numba(e, phi):
    y = np.empty_like(e)
    if e.shape[0] == 0:
        return y
    y[0] = e[0]
    for t in range(1, e.shape[0]):
        y[t] = e[t] + phi * y[t - 1]
    return y


# ---------------------------------------------------------------------------
# dispatch

_IMPLS = {
    "numpy": dict(
        pairwise_sum=pairwise_sum_numpy,
        block_means=block_means_numpy,
        block_quantiles=block_quantiles_numpy,
        block_huber=block_huber_numpy,
        block_kde=block_kde_numpy,
        ar1_filter=ar1_filter_numpy,
    ),
    "numba": dict(
        pairwise_sum=pairwise_sum_numba,
        block_means=block_means_numba,
        block_quantiles=block_quantiles_numba,
        block_huber=block_huber_numba,
        block_kde=block_kde_numba,
        ar1_filter=ar1_filter_numba,
    ),
}


# numpy's introselect beats the numba quickselect for plain order
# statistics (see benchmarks/bench_kernels.py); both return the identical
# element, so the numba backend routes these to numpy
_NUMPY_PREFERRED = {"block_quantiles"}


def implementation(name, backend=None):
    return _IMPLS[backend or BACKEND][name]


def _dispatch(name):
    return _IMPLS["numpy" if name in _NUMPY_PREFERRED else BACKEND][name]


def pairwise_sum(x):
    x = np.ascontiguousarray(x, dtype=np.float64)
    if BACKEND == "numba" and x.ndim == 1:
        return float(pairwise_sum_numba(x))
    return pairwise_sum_numpy(x)


def block_means(x, b, h, q):
    return _dispatch("block_means")(_f64(x), b, h, q)


def block_quantiles(x, b, h, q, k):
    return _dispatch("block_quantiles")(_f64(x), b, h, q, k)


def block_huber(x, b, h, q, k, tol, max_iter):
    return _dispatch("block_huber")(_f64(x), b, h, q, float(k), float(tol), int(max_iter))


def block_kde(x, b, h, q, x0, c):
    return _dispatch("block_kde")(_f64(x), b, h, q, float(x0), float(c))


def ar1_filter(e, phi):
    return _dispatch("ar1_filter")(_f64(e), float(phi))


def _f64(x):
    return np.ascontiguousarray(x, dtype=np.float64)
