"""Samples, statistics, and the non-random block-subsample family.

Blocks are numbered 1..q and observations 1..n in everything user facing;
block ``j`` covers observations ``(j-1)*h + 1 .. (j-1)*h + b``.  Internally
arrays are 0-based, so block ``j`` is ``data[(j-1)*h : (j-1)*h + b]``.
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import (
    InvalidInputError,
    InvalidSchemeError,
    NumericalFailureError,
    StatisticEvaluationError,
)


@dataclass(frozen=True)
class Sample:
    """Ordered observations ``X_1, ..., X_n`` in R^d, held as an (n, d) array.

    Order matters: it defines the blocks.
    """

    data: np.ndarray

    def __post_init__(self):
        arr = np.array(self.data, dtype=np.float64)
        if arr.ndim == 1:
            arr = arr[:, None]
        if arr.ndim != 2:
            raise InvalidInputError("observations must be scalars or fixed-length vectors")
        if arr.shape[0] < 1 or arr.shape[1] < 1:
            raise InvalidInputError("a sample needs at least one observation")
        if not np.all(np.isfinite(arr)):
            raise InvalidInputError("observations must be finite")
        arr.setflags(write=False)
        object.__setattr__(self, "data", arr)

    @property
    def n(self) -> int:
        return self.data.shape[0]

    @property
    def d(self) -> int:
        return self.data.shape[1]

    @property
    def values(self) -> np.ndarray:
        """1-D view for univariate samples, the (n, d) array otherwise."""
        return self.data[:, 0] if self.d == 1 else self.data

    def window(self, start: int, stop: int) -> np.ndarray:
        """Observations ``start..stop`` (1-based, inclusive)."""
        return self.values[start - 1 : stop]


def as_sample(data) -> Sample:
    return data if isinstance(data, Sample) else Sample(data)


@dataclass(frozen=True)
class Statistic:
    """A pure window -> value map plus its rate metadata.

    ``evaluate`` receives a 1-D array for univariate samples and an (m, d)
    array otherwise.  ``alpha`` is the rate exponent (tau_n = n**alpha),
    ``gamma`` the bias exponent (``math.inf`` for exactly unbiased
    statistics), ``zeta`` the cost exponent.  ``batch``, when given, computes
    all block values at once from ``(sample, scheme)`` and must agree with
    ``evaluate`` block by block.
    """

    evaluate: Callable[[np.ndarray], float]
    alpha: float
    gamma: Optional[float] = None
    zeta: Optional[float] = None
    name: str = "custom"
    moment_assumptions: dict = field(default_factory=dict)
    batch: Optional[Callable] = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        if not self.alpha > 0:
            raise InvalidInputError(f"alpha must be positive, got {self.alpha}")
        if self.gamma is not None and not self.gamma > self.alpha:
            raise InvalidInputError(
                f"gamma must exceed alpha (got gamma={self.gamma}, alpha={self.alpha})"
            )
        if self.zeta is not None and not self.zeta > 0:
            raise InvalidInputError("zeta must be positive")

    def __call__(self, window):
        return self.evaluate(window)


@dataclass(frozen=True)
class BlockScheme:
    n: int
    b: int
    h: int
    q: int

    @property
    def unused_tail(self) -> int:
        """Trailing observations that no block touches."""
        return self.n - ((self.q - 1) * self.h + self.b)

    @property
    def starts(self) -> np.ndarray:
        """0-based start offsets of the blocks."""
        return np.arange(self.q) * self.h

    def to_dict(self):
        return dict(n=self.n, b=self.b, h=self.h, q=self.q)


def make_block_scheme(n: int, b: int, h: int) -> BlockScheme:
    """Block family with ``q = (n - b) // h + 1`` blocks."""
    for name, v in (("n", n), ("b", b), ("h", h)):
        if int(v) != v:
            raise InvalidSchemeError(f"{name} must be an integer, got {v!r}")
    n, b, h = int(n), int(b), int(h)
    if n < 1:
        raise InvalidSchemeError(f"n must be >= 1, got {n}")
    if b < 1 or h < 1:
        raise InvalidSchemeError(f"b and h must be >= 1, got b={b}, h={h}")
    if b > n:
        raise InvalidSchemeError(f"block length b={b} exceeds sample size n={n}")
    return BlockScheme(n=n, b=b, h=h, q=(n - b) // h + 1)


def block_window(scheme: BlockScheme, j: int) -> tuple:
    """Inclusive 1-based index range ``((j-1)h + 1, (j-1)h + b)`` of block ``j``."""
    if not 1 <= j <= scheme.q:
        raise IndexError(f"block index {j} outside 1..{scheme.q}")
    start = (j - 1) * scheme.h + 1
    return start, start + scheme.b - 1


# g functions applied to (theta_b - center)

G_KINDS = ("identity", "abs", "sup-norm")


def apply_g(kind: str, diff: np.ndarray) -> np.ndarray:
    diff = np.asarray(diff, dtype=np.float64)
    if kind == "identity":
        if diff.ndim != 1:
            raise InvalidInputError("g=identity requires a scalar statistic")
        return diff.copy()
    if kind == "abs":
        if diff.ndim != 1:
            raise InvalidInputError("g=abs requires a scalar statistic; use sup-norm")
        return np.abs(diff)
    if kind == "sup-norm":
        return np.abs(diff) if diff.ndim == 1 else np.max(np.abs(diff), axis=1)
    raise InvalidInputError(f"unknown g {kind!r}; expected one of {G_KINDS}")


def subsample_statistics(
    sample, stat: Statistic, scheme: BlockScheme, workers: Optional[int] = None
) -> np.ndarray:
    """Values of ``stat`` on blocks 1..q, in block order.

    Returns shape (q,) for scalar statistics and (q, p) for vector ones.
    Statistics with a ``batch`` kernel use it; others are mapped over the
    blocks on ``workers`` threads (order-preserving, so the result does not
    depend on the worker count).  Any failing block aborts the evaluation.
    """
    sample = as_sample(sample)
    if scheme.n != sample.n:
        raise InvalidSchemeError(f"scheme is for n={scheme.n} but the sample has n={sample.n}")
    if stat.batch is not None:
        return np.asarray(stat.batch(sample, scheme), dtype=np.float64)

    values = sample.values
    b, h = scheme.b, scheme.h

    def one(j):
        win = values[j * h : j * h + b]
        try:
            return np.asarray(stat.evaluate(win), dtype=np.float64)
        except Exception as exc:  # noqa: BLE001 - re-raised tagged with block
            raise StatisticEvaluationError(j + 1, exc) from exc

    if workers and workers > 1 and scheme.q > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            out = list(pool.map(one, range(scheme.q)))
    else:
        out = [one(j) for j in range(scheme.q)]
    result = np.stack(out)
    if not np.all(np.isfinite(result)):
        bad = int(np.flatnonzero(~np.isfinite(result.reshape(scheme.q, -1)).all(axis=1))[0])
        raise StatisticEvaluationError(bad + 1, NumericalFailureError("non-finite value"))
    return result


def evaluate_full(sample, stat: Statistic) -> np.ndarray:
    """``stat`` on the whole sample (theta_hat_n)."""
    sample = as_sample(sample)
    scheme = make_block_scheme(sample.n, sample.n, 1)
    return subsample_statistics(sample, stat, scheme)[0]


def realized_exponents(scheme: BlockScheme) -> tuple:
    """``(log b / log n, log h / log n)``; both 0 when n == 1."""
    if scheme.n <= 1:
        return 0.0, 0.0
    ln = math.log(scheme.n)
    return math.log(scheme.b) / ln, math.log(scheme.h) / ln
