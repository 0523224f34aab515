import math
import warnings

import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from scalable_subsampling import (
    InfeasibleTuningError,
    InvalidInputError,
    TuningParams,
    beta_bounds,
    complexity_report,
    delta_bounds,
    optimal_beta,
    resolve_scheme,
    subagging_rate,
)
from scalable_subsampling.tuning import tune

alphas = st.floats(0.05, 0.5)
gaps = st.floats(0.01, 20.0)


@pytest.mark.parametrize("alpha,gamma,expected", [(0.5, 1.0, 0.5), (0.375, 0.5, 0.8)])
def test_optimal_beta(alpha, gamma, expected):
    assert optimal_beta(alpha, gamma) == pytest.approx(expected, abs=1e-15)


def test_optimal_beta_vanishes_for_large_gamma():
    values = [optimal_beta(0.5, g) for g in (1, 10, 1e3, 1e6)]
    assert values == sorted(values, reverse=True)
    assert values[-1] < 1e-6
    assert optimal_beta(0.5, math.inf) == 0.0


def test_optimal_beta_warns_above_half():
    with pytest.warns(UserWarning):
        assert optimal_beta(0.75, 1.0) == pytest.approx(1 / 1.5)


@pytest.mark.parametrize("alpha,gamma", [(0.5, 0.5), (0.5, 0.2), (0.0, 1.0), (-1.0, 1.0)])
def test_rates_validated(alpha, gamma):
    with pytest.raises(InvalidInputError):
        optimal_beta(alpha, gamma)


def test_delta_bounds_examples():
    assert delta_bounds(0.5, 0.5, 1.0) == pytest.approx((0.5, 0.5))
    lo, hi = delta_bounds(0.375, 0.8, 0.5)
    assert lo == pytest.approx(0.8, abs=1e-15)
    assert hi == pytest.approx(0.85, abs=1e-15)


def test_delta_bounds_empty():
    # beta below the optimum: the bias bound exceeds the variance bound
    with pytest.raises(InfeasibleTuningError, match="bias bound"):
        delta_bounds(0.5, 0.3, 1.0)


def test_beta_bounds_examples():
    assert beta_bounds(0.5, 1.0) == pytest.approx((0.5, 1.0))
    assert beta_bounds(0.375, 0.5) == pytest.approx((0.8, 1.0))


@given(alphas, gaps)
def test_optimum_is_a_fixed_point(alpha, gap):
    gamma = alpha + gap
    beta = optimal_beta(alpha, gamma)
    lo, hi = beta_bounds(alpha, gamma)
    assert lo <= beta < hi or (beta == lo and lo < hi)
    assert lo < hi
    dlo, dhi = delta_bounds(alpha, beta, gamma)
    assert dlo == pytest.approx(beta, rel=1e-12)
    assert dlo <= dhi + 1e-12


@given(alphas, st.floats(0.02, 0.98), gaps)
def test_upper_delta_gives_full_sample_rate(alpha, beta, gap):
    gamma = alpha + gap
    upper = 1 + 2 * alpha * (beta - 1)
    assert subagging_rate(alpha, beta, upper, gamma)["variance_exponent"] == pytest.approx(2 * alpha, abs=1e-12)
    below = upper - 0.01
    assert subagging_rate(alpha, beta, below, gamma)["variance_exponent"] > 2 * alpha


def test_subagging_rate_examples():
    r = subagging_rate(0.375, 0.8, 0.8, 0.5)
    assert r["convergence_rate_exponent"] == pytest.approx(0.4, abs=1e-15)
    assert r["mse_exponent"] == pytest.approx(0.8, abs=1e-15)
    assert subagging_rate(0.5, 0.5, 0.5, 1.0)["mse_exponent"] == pytest.approx(1.0)
    assert subagging_rate(0.5, 0.5, 0.5)["bias_sq_exponent"] == "inf"


@pytest.mark.parametrize(
    "n,zeta,full,subagg",
    [(10**6, 2, 1e12, 1e9), (10**6, 3, 1e18, 1e12), (10**6, 1, 1e6, 1e6)],
)
def test_complexity(n, zeta, full, subagg):
    rep = complexity_report(n, 1000, zeta)
    assert rep["full_cost"] == pytest.approx(full)
    assert rep["subagg_cost"] == pytest.approx(subagg)
    assert rep["distribution_cost"] == pytest.approx(full + subagg)
    assert rep["speedup"] == pytest.approx(full / subagg)


def test_complexity_rejects_zeta():
    with pytest.raises(InvalidInputError):
        complexity_report(100, 10, 0)


@pytest.mark.parametrize(
    "n,params,bhq",
    [
        (10_000, TuningParams(0.5, 1.0, 0.5, 0.5), (100, 100, 100)),
        (10_000, TuningParams(0.5, 1.0, 0.5, 0.5, dependence="mixing"), (100, 110, 91)),
        (2**20, TuningParams(0.375, 0.5, 0.8, 0.8), (65536, 65536, 16)),
        (10_000, TuningParams(0.5, 1.0), (100, 100, 100)),
        (10_000, TuningParams(0.5, math.inf, 0.6, 0.6), (251, 251, 39)),
        (10_000, TuningParams(0.375, 0.5, 0.8, 0.85), (1585, 2512, 4)),
    ],
)
def test_resolve_scheme(n, params, bhq):
    s = resolve_scheme(n, params)
    assert (s.b, s.h, s.q) == bhq


def test_resolve_scheme_floor_two():
    s = resolve_scheme(100, TuningParams(0.5, math.inf, 0.1, 0.1, c2=0.01))
    assert s.b == 2


def test_resolve_scheme_needs_two_blocks():
    with pytest.raises(InfeasibleTuningError):
        resolve_scheme(100, TuningParams(0.5, 1.0, 0.5, 0.5, c2=9.0))


def test_unbiased_statistic_needs_explicit_beta():
    with pytest.raises(InfeasibleTuningError):
        TuningParams(0.5, math.inf).resolved()


@given(st.integers(50, 10**7), st.floats(0.2, 0.8), st.sampled_from(["iid", "mixing"]))
def test_resolve_scheme_invariants(n, beta, dep):
    params = TuningParams(0.5, math.inf, beta=beta, delta=beta, dependence=dep)
    try:
        s = resolve_scheme(n, params)
    except InfeasibleTuningError:
        assume(False)
    assert s.h >= s.b >= 2
    if dep == "mixing":
        assert s.h - s.b == math.isqrt(s.b) >= 1
    assert s.q >= 2


def test_params_validation():
    with pytest.raises(InvalidInputError):
        TuningParams(0.5, 1.0, beta=1.0)
    with pytest.raises(InvalidInputError):
        TuningParams(0.5, 1.0, beta=0.6, delta=0.5)
    with pytest.raises(InvalidInputError):
        TuningParams(0.5, 1.0, c2=0)
    with pytest.raises(InvalidInputError):
        TuningParams(0.5, 1.0, dependence="garch")


def test_default_delta_is_lower_bound():
    p = TuningParams(0.375, 0.5, beta=0.8).resolved()
    assert p.delta == pytest.approx(0.8)
    p = TuningParams(0.5, 1.0, beta=0.7).resolved()
    assert p.delta == pytest.approx(0.7)


def test_out_of_range_delta_warns():
    with pytest.warns(UserWarning):
        TuningParams(0.375, 0.5, beta=0.8, delta=0.95).resolved()
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        TuningParams(0.375, 0.5, beta=0.8, delta=0.82).resolved()


def test_case():
    assert TuningParams(0.5, 1.0).case == "ii"
    assert TuningParams(0.5, 1.0, beta=0.6).case == "i"
    assert TuningParams(0.5, math.inf, beta=0.5).case == "i"


def test_params_dict_roundtrip():
    p = TuningParams(0.5, math.inf, beta=0.5)
    d = p.to_dict()
    assert d["gamma"] == "inf"
    assert TuningParams.from_dict(d) == p


def test_tune_report():
    out = tune(2**20, TuningParams(0.375, 0.5), zeta=1.0)
    assert (out["b"], out["h"], out["q"]) == (65536, 65536, 16)
    assert out["optimal_beta"] == pytest.approx(0.8)
    assert out["delta_bounds"] == pytest.approx([0.8, 0.85])
    assert out["rate"]["convergence_rate_exponent"] == pytest.approx(0.4)
    assert out["inference_case"] == "ii"
