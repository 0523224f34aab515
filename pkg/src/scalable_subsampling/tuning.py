"""Rate calculus for choosing the block length b ~ c2 n**beta and offset h ~ c3 n**delta.

alpha is the statistic's rate exponent and gamma its bias exponent
(``math.inf`` for exactly unbiased statistics such as the mean).
"""

import math
import warnings
from dataclasses import dataclass, replace
from typing import Optional

from .core import BlockScheme, make_block_scheme
from .errors import InfeasibleTuningError, InvalidInputError

DEPENDENCE = ("iid", "mixing")
_EPS = 1e-12


def _check_rates(alpha, gamma):
    if not alpha > 0:
        raise InvalidInputError(f"alpha must be positive, got {alpha}")
    if not gamma > alpha:
        raise InvalidInputError(f"gamma must exceed alpha (got gamma={gamma}, alpha={alpha})")


def optimal_beta(alpha: float, gamma: float) -> float:
    """MSE-optimal block exponent ``1 / (1 + 2 (gamma - alpha))``."""
    _check_rates(alpha, gamma)
    if alpha > 0.5:
        warnings.warn(f"alpha={alpha} > 1/2: outside the range the rate results assume")
    return 1.0 / (1.0 + 2.0 * (gamma - alpha))


def beta_bounds(alpha: float, gamma: float) -> tuple:
    """``[1/(1+2(gamma-alpha)), min(1, 1/(2(gamma-alpha))))`` as ``(lo, hi)``.

    The upper end is capped at 1 since beta <= delta < 1.
    """
    _check_rates(alpha, gamma)
    gap = gamma - alpha
    return 1.0 / (1.0 + 2.0 * gap), min(1.0, 1.0 / (2.0 * gap))


def delta_bounds(alpha: float, beta: float, gamma: float) -> tuple:
    """Admissible offset exponents ``[max(beta, 1 - 2 beta (gamma-alpha)), 1 + 2 alpha (beta-1)]``."""
    _check_rates(alpha, gamma)
    if not 0 < beta < 1:
        raise InvalidInputError(f"beta must lie in (0, 1), got {beta}")
    bias_side = 1.0 - 2.0 * beta * (gamma - alpha)
    lo = max(beta, bias_side)
    hi = 1.0 + 2.0 * alpha * (beta - 1.0)
    if lo > hi + _EPS:
        which = "bias bound 1-2*beta*(gamma-alpha)" if bias_side >= beta else "delta >= beta"
        raise InfeasibleTuningError(
            f"empty delta interval: lower {lo:.6g} ({which}) exceeds variance bound "
            f"1+2*alpha*(beta-1) = {hi:.6g}"
        )
    return lo, max(lo, hi)


@dataclass(frozen=True)
class TuningParams:
    """Exponents and constants for ``b ~ c2 n**beta``, ``h ~ c3 n**delta``.

    ``beta=None`` means the optimal beta; ``delta=None`` the lower end of
    the delta interval (fastest rate).  Use :meth:`resolved` to fill them in.
    """

    alpha: float
    gamma: float
    beta: Optional[float] = None
    delta: Optional[float] = None
    c2: float = 1.0
    c3: float = 1.0
    dependence: str = "iid"

    def __post_init__(self):
        _check_rates(self.alpha, self.gamma)
        if self.dependence not in DEPENDENCE:
            raise InvalidInputError(f"dependence must be one of {DEPENDENCE}")
        if not (self.c2 > 0 and self.c3 > 0):
            raise InvalidInputError("c2 and c3 must be positive")
        if self.beta is not None and not 0 < self.beta < 1:
            raise InvalidInputError(f"beta must lie in (0, 1), got {self.beta}")
        if self.delta is not None:
            if not self.delta < 1:
                raise InvalidInputError(f"delta must be < 1, got {self.delta}")
            if self.beta is not None and self.delta < self.beta:
                raise InvalidInputError(f"delta={self.delta} below beta={self.beta}")

    def resolved(self) -> "TuningParams":
        beta = self.beta
        if beta is None:
            beta = optimal_beta(self.alpha, self.gamma)
            if not beta > 0:
                raise InfeasibleTuningError(
                    "optimal beta is 0 (unbiased statistic); give beta explicitly"
                )
        lo, hi = delta_bounds(self.alpha, beta, self.gamma)
        delta = self.delta
        if delta is None:
            delta = lo
        elif not lo - _EPS <= delta <= hi + _EPS:
            warnings.warn(f"delta={delta} outside the admissible interval [{lo:.6g}, {hi:.6g}]")
        return replace(self, beta=beta, delta=delta)

    @property
    def case(self) -> str:
        """``'i'`` when the subagged bias is negligible (CLT applies), ``'ii'`` at the optimum."""
        beta = self.resolved().beta
        return "i" if beta > optimal_threshold(self.alpha, self.gamma) + _EPS else "ii"

    def to_dict(self):
        return dict(
            alpha=self.alpha,
            gamma=_json_float(self.gamma),
            beta=self.beta,
            delta=self.delta,
            c2=self.c2,
            c3=self.c3,
            dependence=self.dependence,
        )

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        if "gamma" in d and d["gamma"] in ("inf", "Infinity", None):
            d["gamma"] = math.inf
        return cls(**d)


def optimal_threshold(alpha, gamma):
    return 1.0 / (1.0 + 2.0 * (gamma - alpha))


def _json_float(x):
    return "inf" if x == math.inf else x


def _round(x):
    return int(math.floor(x + 0.5))


def resolve_scheme(n: int, params: TuningParams) -> BlockScheme:
    """Concrete (b, h) for sample size n.

    b = clamp(round(c2 n**beta), 2, n); h = b for iid data with delta = beta;
    h = b + floor(sqrt(b)) for mixing data; otherwise round(c3 n**delta),
    never below b.
    """
    p = params.resolved()
    if n < 2:
        raise InfeasibleTuningError(f"n={n} is too small to form two blocks")
    b = min(max(_round(p.c2 * n**p.beta), 2), n)
    if p.dependence == "mixing":
        h = b + math.isqrt(b)
    elif abs(p.delta - p.beta) <= _EPS:
        h = b
    else:
        h = min(max(_round(p.c3 * n**p.delta), b), n)
    scheme = make_block_scheme(n, b, h)
    if scheme.q < 2:
        raise InfeasibleTuningError(
            f"n={n}, b={b}, h={h} gives only q={scheme.q} block(s); need at least 2"
        )
    return scheme


def subagging_rate(alpha, beta, delta, gamma=math.inf) -> dict:
    """MSE exponents: variance n**-(1-delta+2 alpha beta), squared bias n**-(2 beta gamma)."""
    var_exp = 1.0 - delta + 2.0 * alpha * beta
    bias_exp = 2.0 * beta * gamma
    mse_exp = min(var_exp, bias_exp)
    return dict(
        variance_exponent=var_exp,
        bias_sq_exponent=_json_float(bias_exp),
        mse_exponent=mse_exp,
        convergence_rate_exponent=mse_exp / 2.0,
        full_sample_rate_exponent=alpha,
    )


def complexity_report(n, b, zeta) -> dict:
    """Operation counts: n**zeta for the full statistic, n b**(zeta-1) for subagging."""
    if not zeta > 0:
        raise InvalidInputError(f"zeta must be positive, got {zeta}")
    full = float(n) ** zeta
    subagg = float(n) * float(b) ** (zeta - 1.0)
    return dict(
        full_cost=full,
        subagg_cost=subagg,
        distribution_cost=full + subagg,
        speedup=full / subagg,
        summary=f"subagging costs {subagg:.3g} vs {full:.3g} for the full statistic "
        f"({full / subagg:.3g}x fewer operations)",
    )


def tune(n, params: TuningParams, zeta=1.0) -> dict:
    """Everything the ``tune`` subcommand prints."""
    p = params.resolved()
    scheme = resolve_scheme(n, p)
    lo, hi = delta_bounds(p.alpha, p.beta, p.gamma)
    blo, bhi = beta_bounds(p.alpha, p.gamma)
    return dict(
        n=n,
        params=p.to_dict(),
        optimal_beta=optimal_threshold(p.alpha, p.gamma),
        beta_bounds=[blo, bhi],
        delta_bounds=[lo, hi],
        inference_case=p.case,
        b=scheme.b,
        h=scheme.h,
        q=scheme.q,
        unused_tail=scheme.unused_tail,
        rate=subagging_rate(p.alpha, p.beta, p.delta, p.gamma),
        complexity=complexity_report(n, scheme.b, zeta),
    )
