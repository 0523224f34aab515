"""Backend selection for the hot kernels.

Set ``SCALSUB_BACKEND=numpy`` to force the pure-numpy path; the default is
``numba`` when it can be imported.  The parallel (``prange``) variants are
only compiled when a thread-safe numba threading layer (TBB or OpenMP) can
be launched, since the workqueue layer aborts on concurrent calls from
Python threads and the Monte Carlo harness runs replications on a thread
pool.  Set ``SCALSUB_PARALLEL=0`` to compile serial kernels regardless.
"""

import importlib
import os
import warnings

BACKEND_ENV = "SCALSUB_BACKEND"

try:
    import numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None


def _threadsafe_layer():
    if numba is None or os.environ.get("SCALSUB_PARALLEL", "1") == "0":
        return False
    if "NUMBA_THREADING_LAYER" not in os.environ:
        numba.config.THREADING_LAYER = "threadsafe"
    elif numba.config.THREADING_LAYER not in ("tbb", "omp", "threadsafe", "safe"):
        return False
    parallel = importlib.import_module("numba.np.ufunc.parallel")
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            parallel._launch_threads()
    except (ValueError, ImportError, OSError):
        return False
    return True


HAVE_NUMBA = numba is not None
PARALLEL = _threadsafe_layer()


def requested_backend():
    value = os.environ.get(BACKEND_ENV, "numba").strip().lower()
    if value not in ("numba", "numpy"):
        raise ValueError(f"{BACKEND_ENV} must be 'numba' or 'numpy', got {value!r}")
    if value == "numba" and not HAVE_NUMBA:
        return "numpy"
    return value


BACKEND = requested_backend()


def njit(*args, parallel=False, **kwargs):
    """``numba.njit`` with our defaults, or an identity decorator without numba."""
    if numba is None:
        def deco(func):
            return func
        return deco(args[0]) if args and callable(args[0]) else deco
    opts = dict(cache=True, nogil=True, parallel=parallel and PARALLEL)
    opts.update(kwargs)
    return numba.njit(*args, **opts)


if HAVE_NUMBA:
    prange = numba.prange
else:  # pragma: no cover
    prange = range
