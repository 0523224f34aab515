"""The block-subsampling distribution and intervals derived from it.

``L(x) = #{i : tau_b * g(theta_b_i - center) <= x} / q`` over the q blocks.
"""

import json
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .core import BlockScheme, G_KINDS, apply_g, as_sample, evaluate_full, subsample_statistics
from .errors import InvalidInputError
from .statistics import order_index


@dataclass(frozen=True)
class Interval:
    lower: float
    upper: float
    level: float
    method: str

    @property
    def width(self):
        return self.upper - self.lower

    def __contains__(self, value):
        return self.lower <= value <= self.upper

    def to_dict(self):
        return dict(method=self.method, level=self.level, lower=self.lower, upper=self.upper)


@dataclass(frozen=True)
class SubsamplingDistribution:
    """Empirical law of the scaled block statistics.

    ``values`` is sorted ascending and read-only; ties stay as duplicates.
    ``center`` is a float for scalar statistics and an array for vectors.
    """

    values: np.ndarray
    tau_b: float
    center: object
    g: str = "identity"
    scheme: Optional[BlockScheme] = None

    @property
    def q(self) -> int:
        return self.values.shape[0]

    def cdf(self, x):
        """Right-continuous step CDF; vectorised over ``x``."""
        counts = np.searchsorted(self.values, x, side="right")
        return counts / self.q

    def quantile(self, p):
        """``inf{x : cdf(x) >= p}``, i.e. the ``ceil(p q)``-th smallest value."""
        return float(self.values[order_index(p, self.q) - 1])

    def kolmogorov_distance(self, cdf_fn) -> float:
        """``sup_x |L(x) - F(x)|`` against a continuous CDF ``F``."""
        f = np.asarray(cdf_fn(self.values), dtype=np.float64)
        q = self.q
        upper = np.searchsorted(self.values, self.values, side="right") / q
        lower = np.searchsorted(self.values, self.values, side="left") / q
        return float(max(np.max(upper - f), np.max(f - lower)))

    def to_dict(self):
        center = self.center
        out = dict(
            values=self.values.tolist(),
            tau_b=self.tau_b,
            center=center.tolist() if isinstance(center, np.ndarray) else center,
            q=self.q,
            g=self.g,
        )
        if self.scheme is not None:
            out.update(b=self.scheme.b, h=self.scheme.h, n=self.scheme.n)
        return out

    def to_json(self, path=None, **kwargs):
        text = json.dumps(self.to_dict(), **kwargs)
        if path is not None:
            with open(path, "w") as fh:
                fh.write(text + "\n")
        return text


def build_distribution(stats, center, tau_b, g="identity", scheme=None) -> SubsamplingDistribution:
    stats = np.asarray(stats, dtype=np.float64)
    if stats.shape[0] == 0:
        raise InvalidInputError("no subsample statistics")
    if not tau_b > 0:
        raise InvalidInputError(f"tau_b must be positive, got {tau_b}")
    if g not in G_KINDS:
        raise InvalidInputError(f"unknown g {g!r}")
    center_arr = np.asarray(center, dtype=np.float64)
    values = np.sort(tau_b * apply_g(g, stats - center_arr))
    values.setflags(write=False)
    center = float(center_arr) if center_arr.ndim == 0 else center_arr
    return SubsamplingDistribution(values=values, tau_b=float(tau_b), center=center, g=g, scheme=scheme)


def subsampling_distribution(
    sample, stat, scheme, g="identity", center=None, center_on="full", workers=None
):
    """Compute block statistics and wrap them as a :class:`SubsamplingDistribution`.

    ``center_on="full"`` centres at the full-sample statistic; ``"subagg"``
    centres at the mean of the block statistics instead, for statistics too
    expensive to evaluate on all n points.  An explicit ``center`` wins.
    """
    sample = as_sample(sample)
    stats = subsample_statistics(sample, stat, scheme, workers=workers)
    if center is None:
        if center_on == "full":
            center = evaluate_full(sample, stat)
        elif center_on == "subagg":
            center = np.mean(stats, axis=0)
        else:
            raise InvalidInputError(f"center_on must be 'full' or 'subagg', got {center_on!r}")
    return build_distribution(stats, center, scheme.b**stat.alpha, g=g, scheme=scheme)


def subsampling_ci(dist: SubsamplingDistribution, theta_hat_n, tau_n, level) -> Interval:
    """Subsampling interval for theta from the law of ``tau_b * g(...)``.

    identity: equal-tailed ``[t - q_hi / tau_n, t - q_lo / tau_n]``.
    abs / sup-norm: symmetric ``t +/- q_level / tau_n`` (per coordinate for
    vectors, which makes the box simultaneous under sup-norm).
    """
    if not 0 < level < 1:
        raise InvalidInputError(f"level must lie in (0, 1), got {level}")
    if not tau_n > 0:
        raise InvalidInputError(f"tau_n must be positive, got {tau_n}")
    if dist.g == "identity":
        theta = float(theta_hat_n)
        hi = dist.quantile((1 + level) / 2)
        lo = dist.quantile((1 - level) / 2)
        return Interval(theta - hi / tau_n, theta - lo / tau_n, level, "subsampling")
    half = dist.quantile(level) / tau_n
    theta = np.asarray(theta_hat_n, dtype=np.float64)
    if theta.ndim == 0:
        return Interval(float(theta) - half, float(theta) + half, level, f"subsampling-{dist.g}")
    return Interval(theta - half, theta + half, level, f"subsampling-{dist.g}")
