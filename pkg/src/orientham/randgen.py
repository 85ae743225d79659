"""Random digraph models, k-way splitting and the lazily sampled exposure oracle.

Every random draw in the package comes from a stream keyed by
``(master_seed, *stream_ids)``. Streams use the counter-based Philox
generator, so a trial's randomness depends only on its key and never on the
order in which trials are scheduled.
"""

from __future__ import annotations

import random
import zlib
from dataclasses import dataclass, field

import numpy as np

from .graphcore import Digraph

SeedKey = int | str


def _key_words(keys: tuple[SeedKey, ...]) -> list[int]:
    words = []
    for k in keys:
        if isinstance(k, str):
            words.append(zlib.crc32(k.encode()))
        else:
            if k < 0:
                raise ValueError("seed components must be non-negative")
            words.append(int(k))
    return words


def rng_stream(seed: int, *keys: SeedKey) -> np.random.Generator:
    """Independent numpy generator for the stream ``(seed, *keys)``."""
    ss = np.random.SeedSequence(_key_words((seed, *keys)))
    return np.random.Generator(np.random.Philox(ss))


def py_stream(seed: int, *keys: SeedKey) -> random.Random:
    """``random.Random`` seeded from the same keyed stream, for scalar hot loops."""
    state = np.random.SeedSequence(_key_words((seed, *keys))).generate_state(4, dtype=np.uint64)
    return random.Random(int.from_bytes(state.tobytes(), "little"))


def derive_seed(seed: int, *keys: SeedKey) -> int:
    """A 63-bit integer seed for the stream ``(seed, *keys)``, for APIs that take a plain seed."""
    state = np.random.SeedSequence(_key_words((seed, *keys))).generate_state(1, dtype=np.uint64)
    return int(state[0] >> np.uint64(1))


def _check_p(p: float) -> None:
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"probability must lie in [0, 1], got {p}")


def sample_dnp(n: int, p: float, seed: int, *keys: SeedKey) -> Digraph:
    """D(n, p): each of the n(n-1) ordered pairs is an edge independently w.p. ``p``."""
    _check_p(p)
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = rng_stream(seed, "dnp", *keys)
    mat = rng.random((n, n)) < p
    np.fill_diagonal(mat, False)
    return Digraph.from_matrix(mat)


def sample_subdigraph(D: Digraph, p: float, seed: int, *keys: SeedKey) -> Digraph:
    """D(D, p): keep each edge of ``D`` independently w.p. ``p``."""
    _check_p(p)
    rng = rng_stream(seed, "sub", *keys)
    keep = rng.random((D.n, D.n)) < p
    return Digraph.from_matrix(D.matrix & keep)


def split_k(D: Digraph, k: int, seed: int, *keys: SeedKey) -> list[Digraph]:
    """Assign every edge of ``D`` to one of ``k`` parts uniformly and independently."""
    if k < 1:
        raise ValueError("k must be >= 1")
    if k == 1:
        return [D]
    rng = rng_stream(seed, "split", *keys)
    label = rng.integers(0, k, size=(D.n, D.n))
    mat = D.matrix
    return [Digraph.from_matrix(mat & (label == i)) for i in range(k)]


def sample_deficient_host(n: int, delta: int, seed: int, *keys: SeedKey) -> Digraph:
    """Complete digraph minus the union of ``delta`` random permutation digraphs.

    Every vertex loses at most ``delta`` out-edges and ``delta`` in-edges, so
    the semi-degree is at least ``n - 1 - delta``.
    """
    if delta < 0:
        raise ValueError("delta must be >= 0")
    rng = rng_stream(seed, "host", *keys)
    mat = np.ones((n, n), dtype=bool)
    np.fill_diagonal(mat, False)
    idx = np.arange(n)
    for _ in range(delta):
        perm = rng.permutation(n)
        mat[idx, perm] = False
    np.fill_diagonal(mat, False)
    return Digraph.from_matrix(mat)


@dataclass
class ExposureOracle:
    """Lazily revealed random digraph G ~ D(n, p_ex).

    The coin of a directed pair is tossed on its first query and memoised;
    later queries return the stored outcome.
    """

    p_ex: float
    rng: random.Random
    outcomes: dict[tuple[int, int], bool] = field(default_factory=dict)

    def __post_init__(self) -> None:
        _check_p(self.p_ex)

    @classmethod
    def seeded(cls, p_ex: float, seed: int, *keys: SeedKey) -> ExposureOracle:
        return cls(p_ex, py_stream(seed, "oracle", *keys))

    def expose(self, u: int, v: int) -> bool:
        if u == v:
            raise ValueError("cannot expose a self-loop")
        key = (u, v)
        hit = self.outcomes.get(key)
        if hit is None:
            hit = self.rng.random() < self.p_ex
            self.outcomes[key] = hit
        return hit

    def is_fresh(self, u: int, v: int) -> bool:
        return (u, v) not in self.outcomes

    def true_edges(self) -> list[tuple[int, int]]:
        return [pair for pair, hit in self.outcomes.items() if hit]

    def __len__(self) -> int:
        return len(self.outcomes)


def reassemble(parts: list[Digraph]) -> Digraph:
    """Union of digraphs on a common vertex set."""
    out = parts[0]
    for part in parts[1:]:
        out = out.union(part)
    return out


def edge_overlap(a: Digraph, b: Digraph) -> int:
    return sum((x & y).bit_count() for x, y in zip(a.out_adj, b.out_adj))


__all__ = [
    "ExposureOracle",
    "derive_seed",
    "edge_overlap",
    "py_stream",
    "reassemble",
    "rng_stream",
    "sample_deficient_host",
    "sample_dnp",
    "sample_subdigraph",
    "split_k",
]
