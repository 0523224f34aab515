import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from scalable_subsampling import (
    InvalidInputError,
    InvalidSchemeError,
    Sample,
    StatisticEvaluationError,
    block_window,
    make_block_scheme,
    statistics,
    subsample_statistics,
)
from scalable_subsampling.core import Statistic, as_sample, evaluate_full, realized_exponents

import oracles


@pytest.mark.parametrize(
    "n,b,h,q",
    [
        (200_000, 500, 1000, 200),
        (200_000, 500, 500, 400),
        (200_000, 500, 250, 799),
        (8, 2, 2, 4),
        (5, 5, 3, 1),
    ],
)
def test_block_count(n, b, h, q):
    assert make_block_scheme(n, b, h).q == q


@pytest.mark.parametrize(
    "scheme,j,expected",
    [
        ((8, 2, 2), 1, (1, 2)),
        ((8, 2, 2), 3, (5, 6)),
        ((200_000, 500, 1000), 200, (199_001, 199_500)),
    ],
)
def test_block_window(scheme, j, expected):
    assert block_window(make_block_scheme(*scheme), j) == expected


@pytest.mark.parametrize("j", [0, 5, -1])
def test_block_window_out_of_range(j):
    with pytest.raises(IndexError):
        block_window(make_block_scheme(8, 2, 2), j)


@pytest.mark.parametrize("n,b,h", [(5, 6, 1), (5, 0, 1), (5, 2, 0), (0, 1, 1), (5, 2.5, 1)])
def test_invalid_scheme(n, b, h):
    with pytest.raises(InvalidSchemeError):
        make_block_scheme(n, b, h)


def test_invalid_scheme_is_value_error():
    with pytest.raises(ValueError):
        make_block_scheme(3, 4, 1)


@given(st.integers(1, 5000), st.data())
def test_scheme_is_maximal(n, data):
    b = data.draw(st.integers(1, n))
    h = data.draw(st.integers(1, n + 5))
    s = make_block_scheme(n, b, h)
    assert (s.q - 1) * h + b <= n < s.q * h + b
    assert s.q == oracles.block_count(n, b, h)
    assert s.unused_tail == n - ((s.q - 1) * h + b)
    assert s.unused_tail >= 0


@given(st.integers(1, 60), st.integers(1, 60))
def test_partition_when_b_divides_n(b, m):
    s = make_block_scheme(b * m, b, b)
    assert s.q == m
    assert s.unused_tail == 0
    covered = [i for j in range(1, s.q + 1) for i in range(block_window(s, j)[0], block_window(s, j)[1] + 1)]
    assert covered == list(range(1, b * m + 1))


def test_sample_basics():
    s = Sample(np.arange(1.0, 9.0))
    assert (s.n, s.d) == (8, 1)
    np.testing.assert_array_equal(s.window(3, 4), [3.0, 4.0])
    with pytest.raises(ValueError):
        s.values[0] = 7.0  # read-only


def test_sample_multivariate():
    s = as_sample([[1, 2], [3, 4], [5, 6]])
    assert (s.n, s.d) == (3, 2)
    assert s.values.shape == (3, 2)


@pytest.mark.parametrize("bad", [[], [1.0, np.nan], [1.0, np.inf], np.zeros((2, 2, 2))])
def test_sample_rejects(bad):
    with pytest.raises(InvalidInputError):
        Sample(bad)


@pytest.mark.parametrize(
    "kwargs",
    [dict(alpha=0.0, gamma=1.0), dict(alpha=0.5, gamma=0.5), dict(alpha=0.5, gamma=1.0, zeta=0.0)],
)
def test_statistic_metadata_validated(kwargs):
    with pytest.raises(InvalidInputError):
        Statistic(evaluate=np.mean, **kwargs)


@pytest.mark.parametrize(
    "data,b,h,expected",
    [
        (range(1, 9), 2, 2, [1.5, 3.5, 5.5, 7.5]),
        (range(1, 7), 2, 2, [1.5, 3.5, 5.5]),
        (range(1, 7), 2, 4, [1.5, 5.5]),
    ],
)
def test_subsample_means(data, b, h, expected):
    x = np.array(list(data), dtype=float)
    s = make_block_scheme(x.size, b, h)
    assert subsample_statistics(x, statistics.mean(), s).tolist() == expected


@pytest.mark.parametrize(
    "stat",
    [statistics.mean(), statistics.quantile(0.3), statistics.huber(), statistics.kde_at(0.0)],
    ids=lambda s: s.name,
)
def test_constant_sample(stat):
    x = np.full(40, 2.5)
    out = subsample_statistics(x, stat, make_block_scheme(40, 8, 8))
    if stat.name.startswith("kde"):
        assert np.all(out > 0)
    else:
        np.testing.assert_array_equal(out, 2.5)


def test_serial_and_threaded_agree_bitwise(rng):
    x = rng.standard_normal(2000)
    # plain evaluator (no batch kernel), so the thread map is what runs
    stat = Statistic(evaluate=lambda w: float(np.median(w) + np.std(w)), alpha=0.5, gamma=1.0)
    s = make_block_scheme(2000, 37, 29)
    a = subsample_statistics(x, stat, s, workers=1)
    c = subsample_statistics(x, stat, s, workers=8)
    assert a.tobytes() == c.tobytes()


def test_batch_matches_per_window(rng):
    x = rng.standard_normal(500)
    s = make_block_scheme(500, 41, 17)
    for stat in (statistics.mean(), statistics.quantile(0.7), statistics.huber(), statistics.kde_at(0.2)):
        plain = Statistic(evaluate=stat.evaluate, alpha=stat.alpha, gamma=stat.gamma)
        np.testing.assert_allclose(
            subsample_statistics(x, stat, s), subsample_statistics(x, plain, s), rtol=1e-13, atol=1e-15
        )


def test_failure_is_tagged_with_block():
    def boom(w):
        if w[0] > 10:
            raise RuntimeError("bad block")
        return float(w[0])

    stat = Statistic(evaluate=boom, alpha=0.5, gamma=1.0)
    with pytest.raises(StatisticEvaluationError) as info:
        subsample_statistics(np.arange(20.0), stat, make_block_scheme(20, 2, 2))
    assert info.value.block == 7  # first block whose leading value exceeds 10 holds (12, 13)
    assert isinstance(info.value.cause, RuntimeError)


def test_non_finite_result_is_an_error():
    stat = Statistic(evaluate=lambda w: np.nan if w[0] == 4 else 1.0, alpha=0.5, gamma=1.0)
    with pytest.raises(StatisticEvaluationError) as info:
        subsample_statistics(np.arange(10.0), stat, make_block_scheme(10, 2, 2))
    assert info.value.block == 3


def test_scheme_must_match_sample():
    with pytest.raises(InvalidSchemeError):
        subsample_statistics(np.arange(10.0), statistics.mean(), make_block_scheme(11, 2, 2))


def test_evaluate_full_and_exponents():
    x = np.arange(1.0, 101.0)
    assert evaluate_full(x, statistics.mean()) == 50.5
    beta, delta = realized_exponents(make_block_scheme(10_000, 100, 1000))
    assert beta == pytest.approx(0.5)
    assert delta == pytest.approx(0.75)


@settings(max_examples=25, deadline=None)
@given(st.integers(1, 30), st.integers(1, 30), st.integers(0, 2**32 - 1))
def test_mean_of_partition_means_is_full_mean(b, m, seed):
    x = np.random.default_rng(seed).standard_normal(b * m)
    stats = subsample_statistics(x, statistics.mean(), make_block_scheme(b * m, b, b))
    assert abs(oracles.tree_sum(stats) / m - x.mean()) <= 1e-12 * max(1.0, np.abs(x).max())
