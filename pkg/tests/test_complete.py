import itertools
import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from orientham.complete import (
    CompletionInstance,
    TooLargeError,
    exact_sigma_path,
    randomized_sigma_path,
    solve_completion,
)
from orientham.graphcore import Digraph, Orientation, OrientedPath, validate_oriented_path
from orientham.randgen import py_stream, rng_stream, sample_deficient_host, sample_dnp, sample_subdigraph

from .strategies import digraphs


def brute_path_exists(inst: CompletionInstance) -> bool:
    interior = [v for v in inst.W if v not in (inst.a, inst.b)]
    for perm in itertools.permutations(interior):
        P = OrientedPath((inst.a, *perm, inst.b), inst.sigma)
        if validate_oriented_path(inst.host, P):
            return True
    return False


def random_instance(w: int, p: float, seed: int) -> CompletionInstance:
    D = sample_dnp(w, p, seed, "inst")
    rng = random.Random(seed)
    a, b = rng.sample(range(w), 2)
    return CompletionInstance(D, a, b, Orientation.random(w - 1, rng_stream(seed, "sig")))


def check_path(inst, path):
    assert path.start == inst.a and path.end == inst.b
    assert sorted(path.vertices) == sorted(inst.W)
    assert path.sigma == inst.sigma
    assert validate_oriented_path(inst.host, path)


def test_instance_validation():
    D = Digraph.complete(4)
    with pytest.raises(ValueError):
        CompletionInstance(D, 1, 1, Orientation("+++"))
    with pytest.raises(ValueError):
        CompletionInstance(D, 0, 1, Orientation("++"))
    with pytest.raises(ValueError):
        CompletionInstance(D, 0, 3, Orientation("+"), vertices=(0, 1))


@pytest.mark.parametrize("w", [2, 3, 5, 9, 16])
def test_complete_host_always_solvable(w):
    sigma = Orientation.random(w - 1, rng_stream(w))
    inst = CompletionInstance(Digraph.complete(w), 0, w - 1, sigma)
    check_path(inst, exact_sigma_path(inst))
    path = randomized_sigma_path(inst, 10_000, 0)
    check_path(inst, path)


def test_two_vertices_missing_edge():
    inst = CompletionInstance(Digraph.from_edges(2, [(1, 0)]), 0, 1, Orientation("+"))
    assert exact_sigma_path(inst) is None
    inst = CompletionInstance(Digraph.from_edges(2, [(1, 0)]), 0, 1, Orientation("-"))
    assert exact_sigma_path(inst).vertices == (0, 1)


def test_vertex_subset():
    D = Digraph.complete(10)
    inst = CompletionInstance(D, 7, 2, Orientation("+-+"), vertices=(2, 4, 7, 9))
    check_path(inst, exact_sigma_path(inst))


def test_dp_agrees_with_permutation_oracle_w8():
    for seed in range(200):
        inst = random_instance(8, 0.5, seed)
        path = exact_sigma_path(inst)
        assert (path is not None) == brute_path_exists(inst), seed
        if path is not None:
            check_path(inst, path)


@given(digraphs(min_n=2, max_n=7), st.data())
def test_dp_complete_on_small_instances(D, data):
    a, b = data.draw(st.permutations(range(D.n)))[:2]
    sigma = Orientation(data.draw(st.text("+-", min_size=D.n - 1, max_size=D.n - 1)))
    inst = CompletionInstance(D, a, b, sigma)
    assert (exact_sigma_path(inst) is not None) == brute_path_exists(inst)


def test_dp_cap():
    inst = CompletionInstance(Digraph.complete(25), 0, 1, Orientation.consistent(24))
    with pytest.raises(TooLargeError):
        exact_sigma_path(inst)


def test_randomized_is_sound():
    for seed in range(150):
        w = 6 + seed % 15
        inst = random_instance(w, 0.35, seed)
        exact = exact_sigma_path(inst)
        path = randomized_sigma_path(inst, 20_000, seed)
        if path is not None:
            check_path(inst, path)
        if exact is None:
            assert path is None


def test_randomized_w40_success_rate():
    w, hits = 40, 0
    for seed in range(200):
        G = sample_deficient_host(w, 1, seed, "w40")
        H = sample_subdigraph(G, 0.5, seed, "w40")
        rng = py_stream(seed, "ends")
        a, b = rng.sample(range(w), 2)
        inst = CompletionInstance(H, a, b, Orientation.random(w - 1, rng_stream(seed, "w40")))
        path = randomized_sigma_path(inst, 10**6, seed)
        if path is not None:
            check_path(inst, path)
            hits += 1
    assert hits >= 190


def test_solve_completion_dispatch():
    inst = random_instance(12, 0.9, 4)
    a = solve_completion(inst, 1000, 0, dp_limit=22)
    b = solve_completion(inst, 100_000, 0, dp_limit=5)
    check_path(inst, a)
    check_path(inst, b)
