import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from orientham.pack import PackParams
from orientham.stats import (
    EventModel,
    SubmartingaleBoundParams,
    corollary_tail_bound,
    empirical_tail_check,
    submartingale_tail_bound,
    wilson_interval,
)


def test_spot_value_twelve_digits():
    value = submartingale_tail_bound(SubmartingaleBoundParams(N=100, var_bound=0.1, M=1.0, m=10.0))
    assert f"{value:.11e}" == f"{math.exp(-3.75):.11e}"


def test_corollary_example():
    expected = math.exp(-2500 / (2 * (100 + 50 / 3)))
    assert corollary_tail_bound(10_000, 0.01, 50) == pytest.approx(expected, rel=1e-14)


def test_m_zero_gives_one():
    assert submartingale_tail_bound(SubmartingaleBoundParams(10, 0.3, 1.0, 0.0)) == 1.0
    assert corollary_tail_bound(10, 0.3, 0) == 1.0


def test_negative_m_rejected():
    with pytest.raises(ValueError):
        corollary_tail_bound(10, 0.1, -1)


@pytest.mark.parametrize("kwargs", [dict(N=0, var_bound=0.1, M=1, m=1), dict(N=1, var_bound=0.1, M=0, m=1)])
def test_param_validation(kwargs):
    with pytest.raises(ValueError):
        SubmartingaleBoundParams(**kwargs)


def test_q_out_of_range():
    with pytest.raises(ValueError):
        corollary_tail_bound(10, 1.5, 1)


def test_bound_nonincreasing_in_m():
    for N in (10, 100, 10_000):
        for q in (0.001, 0.01, 0.3, 1.0):
            values = [corollary_tail_bound(N, q, m) for m in np.linspace(0, 200, 401)]
            assert all(b <= a + 1e-15 for a, b in zip(values, values[1:]))


@given(st.integers(1, 10**5), st.floats(0, 1), st.floats(0, 1e4))
def test_corollary_equals_theorem_at_unit_M(N, q, m):
    assert corollary_tail_bound(N, q, m) == submartingale_tail_bound(SubmartingaleBoundParams(N, q, 1.0, m))


@given(st.integers(1, 10**5), st.floats(0, 1), st.floats(1e-3, 1e4))
def test_bound_in_unit_interval(N, q, m):
    assert 0.0 <= corollary_tail_bound(N, q, m) <= 1.0


def test_exposure_bound_instantiation():
    """The Stage-1 tail on X_uv is at most the simplified exponential."""
    params = PackParams.build(128, 0.25, 0.5, t=16)
    eps, t, n, p_ex = params.epsilon, params.t, params.n, params.p_ex
    mean = t / (n * p_ex)
    value = corollary_tail_bound(t, 1 / (n * p_ex), eps / 2 * mean)
    assert value <= math.exp(-(eps**2) * t / (64 * n * p_ex))


def test_wilson_interval():
    lo, hi = wilson_interval(5, 100)
    assert lo < 0.05 < hi
    assert wilson_interval(0, 100)[0] == 0.0
    assert wilson_interval(100, 100)[1] == pytest.approx(1.0)
    assert wilson_interval(0, 0) == (0.0, 1.0)


def test_zero_q_never_exceeds():
    rep = empirical_tail_check("iid", 1000, 0.0, 1, 500, 0)
    assert rep.exceed == 0 and rep.passed


@pytest.mark.parametrize("rule", ["iid", "after_success", "ahead"])
def test_tail_within_bound(rule):
    rep = empirical_tail_check(EventModel(rule), 2000, 0.01, 15, 3000, 1)
    assert rep.passed, rep.row()


def test_adaptive_probabilities_never_exceed_q():
    model = EventModel("after_success", low=0.5, high=1.0)
    counts = model.simulate(5000, 0.02, 2000, np.random.default_rng(0))
    # mean rate must sit between the low and high step probabilities
    rate = counts.mean() / 5000
    assert 0.01 - 0.001 <= rate <= 0.02 + 0.001


def test_event_model_validation():
    with pytest.raises(ValueError):
        EventModel("nonsense")
    with pytest.raises(ValueError):
        EventModel("iid", low=2.0)


def test_event_model_file(tmp_path):
    path = tmp_path / "model.txt"
    path.write_text("rule = ahead\nlow = 0.25  # halving is too gentle\n")
    model = EventModel.from_file(path)
    assert model == EventModel("ahead", 0.25, 1.0)
    assert model.name == "adaptive:ahead"
    path.write_text("rule ahead\n")
    with pytest.raises(ValueError, match=":1:"):
        EventModel.from_file(path)
    path.write_text("speed = 3\n")
    with pytest.raises(ValueError, match="unknown"):
        EventModel.from_file(path)


def test_tail_check_deterministic():
    a = empirical_tail_check("iid", 500, 0.05, 5, 200, 4).row()
    b = empirical_tail_check("iid", 500, 0.05, 5, 200, 4).row()
    assert a == b
