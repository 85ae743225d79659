import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from orientham.embed import EmbedParams, check_param_window, embed_path, estimate_event_probs, sample_panel
from orientham.graphcore import Digraph, Orientation, validate_oriented_path
from orientham.randgen import ExposureOracle, py_stream, rng_stream, sample_deficient_host, sample_dnp


def run(D, ell, p_ex, seed, sigma=None):
    sigma = sigma or Orientation.random(ell - 1, rng_stream(seed, "sig"))
    return embed_path(D, EmbedParams(ell, p_ex, sigma), ExposureOracle.seeded(p_ex, seed), py_stream(seed, "order"))


def test_params_validation():
    with pytest.raises(ValueError):
        EmbedParams(5, 0.5, Orientation("+++"))
    with pytest.raises(ValueError):
        EmbedParams(5, 0.0, Orientation("++++"))
    with pytest.raises(ValueError):
        EmbedParams(1, 0.5, Orientation("+"))


def test_ell_larger_than_n():
    with pytest.raises(ValueError):
        run(Digraph.complete(4), 6, 0.5, 0)


def test_complete_host_certain_coins():
    """Every first exposure succeeds: exactly ell - 1 exposures."""
    tr = run(Digraph.complete(30), 20, 1.0, 3)
    assert tr.success and len(tr.exposures) == 19
    assert validate_oriented_path(Digraph.complete(30), tr.path)


def test_empty_host_fails_in_first_round():
    tr = run(Digraph.empty(12), 6, 0.7, 1)
    assert not tr.success
    assert tr.failed_round == 1
    assert len(tr.exposures) == 11
    assert tr.path is None


@given(st.integers(0, 10**6), st.floats(0.05, 1.0))
def test_run_invariants(seed, p_ex):
    D = sample_dnp(25, 0.7, seed)
    ell = 15
    sigma = Orientation.random(ell - 1, rng_stream(seed, "sig"))
    tr = run(D, ell, p_ex, seed, sigma)
    pairs = [pair for _, pair, _, _ in tr.exposures]
    # a pair is never queried twice in one run
    assert len(pairs) == len(set(pairs))
    # every exposure is oriented according to the round's sign
    placed = tr.placed
    for rnd, (u, v), coin, in_host in tr.exposures:
        x = placed[rnd - 1]
        assert (u == x) if sigma[rnd - 1] == "+" else (v == x)
        assert in_host == D.has_edge(u, v)
    if tr.success:
        assert validate_oriented_path(D, tr.path)
        assert set(tr.accepted()) == set(tr.path.edges())
    else:
        assert len(tr.accepted()) == tr.rounds


def test_placed_sequence_uniform_on_complete_host():
    """On D_n the interior is a uniform (ell-2)-set: Pr[A_uv] is exact."""
    n, ell, trials = 30, 20, 1500
    tab = estimate_event_probs(Digraph.complete(n), EmbedParams(ell, 0.5, Orientation.consistent(ell - 1)), trials, 2)
    exact = (n - ell + 2) * (n - ell + 1) / (n * (n - 1))
    se = math.sqrt(exact * (1 - exact) / (trials * len(tab.panel)))
    # panel pairs are correlated within a trial, so allow a generous multiple
    assert abs(tab.mean_pr_avoid - exact) <= 10 * se


def test_window_values():
    rep = check_param_window(400, 360, 5, 0.2)
    assert rep.lower == pytest.approx(math.log(400) / 35)
    assert rep.upper == pytest.approx(min(40**2 / (400**2 * 5), 1 / math.sqrt(2000)))
    assert not rep.nonempty and not rep.ok


def test_window_delta_zero_unbounded_above():
    rep = check_param_window(1000, 500, 0, 0.2)
    assert rep.upper == math.inf and rep.upper_ok


def test_window_requires_positive_gap():
    with pytest.raises(ValueError):
        check_param_window(10, 8, 2, 0.5)


def test_estimate_rows_and_determinism():
    D = sample_deficient_host(60, 2, 0)
    params = EmbedParams(40, 0.3, Orientation.random(39, rng_stream(0)))
    a = estimate_event_probs(D, params, 30, 5, panel_size=50)
    b = estimate_event_probs(D, params, 30, 5, panel_size=50)
    assert a.rows == b.rows
    assert np.array_equal(a.exposed_counts, b.exposed_counts)
    assert list(a.rows[0]) == ["trial", "result", "rounds", "exposures", "failed_round"]
    assert a.exposed_bound == pytest.approx(1 / (60 * 0.3))
    assert a.avoid_bound == pytest.approx((20 / 60) ** 2)
    lo, hi = a.pr_fail_ci
    assert lo <= a.pr_fail <= hi


def test_panel_distinct_pairs():
    panel = sample_panel(10, 200, 0)
    assert len(panel) == 90 == len(set(panel))
    assert all(u != v for u, v in panel)
