import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from orientham.graphcore import Digraph, semi_degree
from orientham.randgen import (
    ExposureOracle,
    derive_seed,
    edge_overlap,
    py_stream,
    reassemble,
    rng_stream,
    sample_deficient_host,
    sample_dnp,
    sample_subdigraph,
    split_k,
)


def test_gen_complete_at_p_one():
    D = sample_dnp(10, 1.0, 7)
    assert D == Digraph.complete(10)
    assert D.num_edges == 90


def test_gen_empty_at_p_zero():
    assert sample_dnp(10, 0.0, 7).num_edges == 0


def test_gen_rejects_bad_probability():
    with pytest.raises(ValueError):
        sample_dnp(5, 1.5, 0)


def test_gen_deterministic_and_key_sensitive():
    assert sample_dnp(30, 0.3, 5, "a") == sample_dnp(30, 0.3, 5, "a")
    assert sample_dnp(30, 0.3, 5, "a") != sample_dnp(30, 0.3, 5, "b")
    assert sample_dnp(30, 0.3, 5) != sample_dnp(30, 0.3, 6)


def test_gen_edge_density():
    n, p = 200, 0.3
    m = sample_dnp(n, p, 11).num_edges
    N = n * (n - 1)
    assert abs(m - N * p) <= 4 * math.sqrt(N * p * (1 - p))


def test_streams_do_not_depend_on_call_order():
    a1 = rng_stream(3, "x", 1).random(5)
    rng_stream(3, "y").random(100)
    a2 = rng_stream(3, "x", 1).random(5)
    assert np.array_equal(a1, a2)
    assert py_stream(3, "z").random() == py_stream(3, "z").random()


def test_negative_seed_component_rejected():
    with pytest.raises(ValueError):
        rng_stream(1, -2)


def test_derive_seed():
    assert derive_seed(0, "run", 1) == derive_seed(0, "run", 1)
    assert derive_seed(0, "run", 1) != derive_seed(0, "run", 2)
    assert 0 <= derive_seed(5) < 2**63


@given(st.integers(2, 25), st.integers(1, 6), st.integers(0, 10**6))
def test_split_partitions_edges(n, k, seed):
    D = sample_dnp(n, 0.5, seed)
    parts = split_k(D, k, seed)
    assert len(parts) == k
    assert reassemble(parts) == D
    assert sum(p.num_edges for p in parts) == D.num_edges
    for i in range(k):
        for j in range(i + 1, k):
            assert edge_overlap(parts[i], parts[j]) == 0


def test_subdigraph_is_contained():
    D = sample_dnp(30, 0.5, 1)
    H = sample_subdigraph(D, 0.5, 2)
    assert edge_overlap(D, H) == H.num_edges
    assert sample_subdigraph(D, 1.0, 2) == D


@given(st.integers(3, 40), st.integers(0, 5), st.integers(0, 10**6))
def test_deficient_host_semi_degree(n, delta, seed):
    D = sample_deficient_host(n, delta, seed)
    assert semi_degree(D) >= n - 1 - delta


def test_oracle_memoises():
    oracle = ExposureOracle.seeded(0.5, 0)
    first = [oracle.expose(u, v) for u in range(10) for v in range(10) if u != v]
    assert not oracle.is_fresh(0, 1)
    again = [oracle.expose(u, v) for u in range(10) for v in range(10) if u != v]
    assert first == again
    assert len(oracle) == 90
    assert set(oracle.true_edges()) == {
        (u, v) for u in range(10) for v in range(10) if u != v and oracle.expose(u, v)
    }


def test_oracle_extremes_and_self_loop():
    assert all(ExposureOracle.seeded(1.0, 0).expose(0, v) for v in range(1, 10))
    assert not any(ExposureOracle.seeded(0.0, 0).expose(0, v) for v in range(1, 10))
    with pytest.raises(ValueError):
        ExposureOracle.seeded(0.5, 0).expose(2, 2)


def test_oracle_directed_pairs_independent():
    oracle = ExposureOracle.seeded(0.5, 3)
    oracle.expose(0, 1)
    assert oracle.is_fresh(1, 0)


def test_oracle_rate():
    oracle = ExposureOracle.seeded(0.2, 9)
    hits = sum(oracle.expose(u, v) for u in range(100) for v in range(100) if u != v)
    N = 9900
    assert abs(hits - 0.2 * N) <= 4 * math.sqrt(N * 0.2 * 0.8)
