"""Dense digraphs with bitset rows, orientation patterns and oriented paths/cycles."""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import Iterable, Iterator, Sequence

import numpy as np


class MalformedInputError(ValueError):
    """Raised for structurally invalid paths, cycles, patterns or graph files."""


def iter_bits(mask: int) -> Iterator[int]:
    """Yield the indices of the set bits of ``mask`` in increasing order."""
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def _rows_from_matrix(mat: np.ndarray) -> tuple[int, ...]:
    n = mat.shape[0]
    if n == 0:
        return ()
    # packbits is big-endian within a byte; reverse columns so bit j <-> column j
    packed = np.packbits(mat[:, ::-1], axis=1)
    pad = packed.shape[1] * 8 - n
    return tuple(int.from_bytes(row.tobytes(), "big") >> pad for row in packed)


@dataclass(frozen=True)
class Digraph:
    """Simple digraph on ``range(n)``.

    ``out_adj[v]`` and ``in_adj[v]`` are Python ints used as bitsets of the
    out- and in-neighbourhoods. Both directions are stored so that either
    neighbourhood is a single lookup.
    """

    n: int
    out_adj: tuple[int, ...]
    in_adj: tuple[int, ...]

    def __post_init__(self) -> None:
        if len(self.out_adj) != self.n or len(self.in_adj) != self.n:
            raise MalformedInputError("adjacency rows do not match n")
        full = (1 << self.n) - 1
        for v in range(self.n):
            if (self.out_adj[v] >> v) & 1 or (self.in_adj[v] >> v) & 1:
                raise MalformedInputError(f"self-loop at vertex {v}")
            if self.out_adj[v] & ~full or self.in_adj[v] & ~full:
                raise MalformedInputError(f"row {v} references a vertex >= n")

    # -- construction -------------------------------------------------

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[tuple[int, int]], *, allow_duplicates: bool = False) -> Digraph:
        out = [0] * n
        inn = [0] * n
        for u, v in edges:
            if not (0 <= u < n and 0 <= v < n):
                raise MalformedInputError(f"edge ({u}, {v}) out of range for n={n}")
            if u == v:
                raise MalformedInputError(f"self-loop ({u}, {v})")
            if (out[u] >> v) & 1 and not allow_duplicates:
                raise MalformedInputError(f"duplicate edge ({u}, {v})")
            out[u] |= 1 << v
            inn[v] |= 1 << u
        return cls(n, tuple(out), tuple(inn))

    @classmethod
    def from_out_rows(cls, n: int, out_rows: Sequence[int]) -> Digraph:
        inn = [0] * n
        for u, row in enumerate(out_rows):
            for v in iter_bits(row):
                inn[v] |= 1 << u
        return cls(n, tuple(out_rows), tuple(inn))

    @classmethod
    def from_matrix(cls, mat: np.ndarray) -> Digraph:
        mat = np.asarray(mat, dtype=bool)
        if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
            raise MalformedInputError("adjacency matrix must be square")
        mat = mat.copy()
        np.fill_diagonal(mat, False)
        return cls(mat.shape[0], _rows_from_matrix(mat), _rows_from_matrix(mat.T))

    @classmethod
    def complete(cls, n: int) -> Digraph:
        full = (1 << n) - 1
        rows = tuple(full & ~(1 << v) for v in range(n))
        return cls(n, rows, rows)

    @classmethod
    def empty(cls, n: int) -> Digraph:
        return cls(n, (0,) * n, (0,) * n)

    # -- queries ------------------------------------------------------

    def has_edge(self, u: int, v: int) -> bool:
        return bool((self.out_adj[u] >> v) & 1)

    def out_degree(self, v: int) -> int:
        return self.out_adj[v].bit_count()

    def in_degree(self, v: int) -> int:
        return self.in_adj[v].bit_count()

    def neighbours(self, v: int, sign: str) -> int:
        """Bitset of N^+(v) for ``sign == '+'`` and N^-(v) for ``'-'``."""
        return self.out_adj[v] if sign == "+" else self.in_adj[v]

    def edges(self) -> Iterator[tuple[int, int]]:
        for u in range(self.n):
            for v in iter_bits(self.out_adj[u]):
                yield (u, v)

    @property
    def num_edges(self) -> int:
        return sum(self.out_degree(v) for v in range(self.n))

    @cached_property
    def matrix(self) -> np.ndarray:
        """Boolean adjacency matrix, ``matrix[u, v]`` iff ``u -> v``."""
        mat = np.zeros((self.n, self.n), dtype=bool)
        for u in range(self.n):
            row = self.out_adj[u]
            if row:
                bits = np.frombuffer(row.to_bytes((self.n + 7) // 8, "little"), dtype=np.uint8)
                mat[u] = np.unpackbits(bits, bitorder="little")[: self.n].astype(bool)
        mat.setflags(write=False)
        return mat

    def without_edges(self, edges: Iterable[tuple[int, int]]) -> Digraph:
        out = list(self.out_adj)
        inn = list(self.in_adj)
        for u, v in edges:
            out[u] &= ~(1 << v)
            inn[v] &= ~(1 << u)
        return Digraph(self.n, tuple(out), tuple(inn))

    def union(self, other: Digraph) -> Digraph:
        if other.n != self.n:
            raise ValueError("vertex counts differ")
        return Digraph(
            self.n,
            tuple(a | b for a, b in zip(self.out_adj, other.out_adj)),
            tuple(a | b for a, b in zip(self.in_adj, other.in_adj)),
        )

    # -- text format --------------------------------------------------

    def to_text(self) -> str:
        edges = list(self.edges())
        lines = [f"{self.n} {len(edges)}"]
        lines.extend(f"{u} {v}" for u, v in edges)
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> Digraph:
        """Parse ``n m`` then ``m`` lines ``u v``; blank lines and ``#`` comments are skipped."""
        numbered = [(i, ln.strip()) for i, ln in enumerate(text.splitlines(), start=1)]
        numbered = [(i, ln) for i, ln in numbered if ln and not ln.startswith("#")]
        if not numbered:
            raise MalformedInputError("empty digraph file")
        head_no, head = numbered[0]
        try:
            n, m = (int(tok) for tok in head.split())
        except ValueError:
            raise MalformedInputError(f"line {head_no}: expected 'n m', got {head!r}") from None
        if n < 0 or m < 0:
            raise MalformedInputError(f"line {head_no}: n and m must be non-negative")
        if len(numbered) - 1 != m:
            raise MalformedInputError(f"header declares {m} edges, found {len(numbered) - 1}")
        out = [0] * n
        inn = [0] * n
        for lineno, ln in numbered[1:]:
            try:
                u, v = (int(tok) for tok in ln.split())
            except ValueError:
                raise MalformedInputError(f"line {lineno}: expected 'u v', got {ln!r}") from None
            if not (0 <= u < n and 0 <= v < n):
                raise MalformedInputError(f"line {lineno}: vertex out of range for n={n}")
            if u == v:
                raise MalformedInputError(f"line {lineno}: self-loop at {u}")
            if (out[u] >> v) & 1:
                raise MalformedInputError(f"line {lineno}: duplicate edge {u} {v}")
            out[u] |= 1 << v
            inn[v] |= 1 << u
        return cls(n, tuple(out), tuple(inn))

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.to_text())

    @classmethod
    def load(cls, path: str | Path) -> Digraph:
        return cls.from_text(Path(path).read_text())


def semi_degree(D: Digraph) -> int:
    """Minimum over all vertices of min(out-degree, in-degree)."""
    if D.n < 1:
        raise ValueError("semi-degree needs n >= 1")
    return min(min(D.out_degree(v), D.in_degree(v)) for v in range(D.n))


# ---------------------------------------------------------------------------
# orientation patterns

_SIGN_ALIASES = {"+": "+", "-": "-", "−": "-"}


@dataclass(frozen=True)
class Orientation:
    """Sign pattern over {+, -}; entry i orients edge i of a path or cycle."""

    signs: str

    def __post_init__(self) -> None:
        if len(self.signs) < 1:
            raise MalformedInputError("orientation must have length >= 1")
        bad = set(self.signs) - {"+", "-"}
        if bad:
            raise MalformedInputError(f"invalid orientation symbols {sorted(bad)!r}")

    @classmethod
    def parse(cls, text: str) -> Orientation:
        text = text.strip()
        try:
            return cls("".join(_SIGN_ALIASES[c] for c in text))
        except KeyError as exc:
            raise MalformedInputError(f"invalid orientation symbol {exc.args[0]!r}") from None

    @classmethod
    def consistent(cls, k: int) -> Orientation:
        return cls("+" * k)

    @classmethod
    def antidirected(cls, k: int) -> Orientation:
        return cls("".join("+-"[i % 2] for i in range(k)))

    @classmethod
    def random(cls, k: int, rng: np.random.Generator) -> Orientation:
        return cls("".join("+-"[b] for b in rng.integers(0, 2, size=k)))

    def __len__(self) -> int:
        return len(self.signs)

    def __getitem__(self, i):
        if isinstance(i, slice):
            return Orientation(self.signs[i])
        return self.signs[i]

    def __iter__(self) -> Iterator[str]:
        return iter(self.signs)

    def __str__(self) -> str:
        return self.signs

    def rotate(self, r: int) -> Orientation:
        r %= len(self.signs)
        return Orientation(self.signs[r:] + self.signs[:r])

    def reflect(self) -> Orientation:
        """Pattern read when traversing the same edges in the opposite direction."""
        flip = {"+": "-", "-": "+"}
        return Orientation("".join(flip[c] for c in reversed(self.signs)))

    def as_bits(self) -> np.ndarray:
        """1 for '+', 0 for '-', as uint8."""
        return np.frombuffer(self.signs.encode(), dtype=np.uint8) == ord("+")


def _directed(u: int, v: int, sign: str) -> tuple[int, int]:
    return (u, v) if sign == "+" else (v, u)


@dataclass(frozen=True)
class OrientedPath:
    """Vertex sequence v_0..v_k with a length-k orientation."""

    vertices: tuple[int, ...]
    sigma: Orientation

    def __post_init__(self) -> None:
        object.__setattr__(self, "vertices", tuple(int(v) for v in self.vertices))
        if len(self.vertices) != len(self.sigma) + 1:
            raise MalformedInputError(
                f"path has {len(self.vertices)} vertices but orientation of length {len(self.sigma)}"
            )
        if len(set(self.vertices)) != len(self.vertices):
            raise MalformedInputError("path vertices must be pairwise distinct")

    @property
    def start(self) -> int:
        return self.vertices[0]

    @property
    def end(self) -> int:
        return self.vertices[-1]

    def edges(self) -> list[tuple[int, int]]:
        vs = self.vertices
        return [_directed(vs[i], vs[i + 1], s) for i, s in enumerate(self.sigma)]

    def reversed(self) -> OrientedPath:
        return OrientedPath(self.vertices[::-1], self.sigma.reflect())


@dataclass(frozen=True)
class OrientedCycle:
    """Cyclic vertex sequence v_0..v_{k-1}; sigma[i] orients edge v_i v_{i+1 mod k}."""

    vertices: tuple[int, ...]
    sigma: Orientation

    def __post_init__(self) -> None:
        object.__setattr__(self, "vertices", tuple(int(v) for v in self.vertices))
        if len(self.vertices) != len(self.sigma):
            raise MalformedInputError(
                f"cycle has {len(self.vertices)} vertices but orientation of length {len(self.sigma)}"
            )
        if len(set(self.vertices)) != len(self.vertices):
            raise MalformedInputError("cycle vertices must be pairwise distinct")
        if len(self.vertices) < 3:
            raise MalformedInputError("cycle needs at least 3 vertices")

    def __len__(self) -> int:
        return len(self.vertices)

    def edges(self) -> list[tuple[int, int]]:
        vs = self.vertices
        k = len(vs)
        return [_directed(vs[i], vs[(i + 1) % k], s) for i, s in enumerate(self.sigma)]

    @classmethod
    def canonical(cls, sigma: Orientation) -> OrientedCycle:
        return cls(tuple(range(len(sigma))), sigma)


def validate_oriented_path(D: Digraph, P: OrientedPath) -> bool:
    """True iff every edge demanded by ``P.sigma`` is present in ``D``."""
    if any(not 0 <= v < D.n for v in P.vertices):
        raise ValueError(f"path uses a vertex outside range({D.n})")
    if len(set(P.vertices)) != len(P.vertices):
        return False
    return all(D.has_edge(u, v) for u, v in P.edges())


def validate_oriented_cycle(D: Digraph, C: OrientedCycle) -> bool:
    if any(not 0 <= v < D.n for v in C.vertices):
        raise ValueError(f"cycle uses a vertex outside range({D.n})")
    return all(D.has_edge(u, v) for u, v in C.edges())


def complement_path(C: OrientedCycle, P: OrientedPath) -> OrientedPath:
    """Path formed by the edges of ``C`` not in ``P``.

    ``P`` must run along ``C`` in either direction. The result is traversed
    from ``P.end`` around the cycle back to ``P.start``.
    """
    k = len(C)
    pos = {v: i for i, v in enumerate(C.vertices)}
    if P.start not in pos:
        raise ValueError("path is not a subpath of the cycle")
    m = len(P.sigma)
    if m >= k:
        raise ValueError("path has as many edges as the cycle")
    j = pos[P.start]
    forward = all(C.vertices[(j + t) % k] == P.vertices[t] for t in range(m + 1))
    backward = all(C.vertices[(j - t) % k] == P.vertices[t] for t in range(m + 1))
    if forward and P.sigma.signs == "".join(C.sigma[(j + t) % k] for t in range(m)):
        # cycle edges j+m .. j+k-1 run from P.end back to P.start
        verts = tuple(C.vertices[(j + m + t) % k] for t in range(k - m + 1))
        signs = "".join(C.sigma[(j + m + t) % k] for t in range(k - m))
        return OrientedPath(verts, Orientation(signs))
    if backward and P.reversed().sigma.signs == "".join(C.sigma[(j - m + t) % k] for t in range(m)):
        # P runs against the cycle's direction; complement runs from P.end onwards backwards
        rev = complement_path(C, P.reversed())
        return rev.reversed()
    raise ValueError("path is not a sign-compatible contiguous subpath of the cycle")


def oriented_automorphism_count(C: OrientedCycle | Orientation) -> int:
    """Number of dihedral symmetries of the cycle that preserve every edge direction."""
    sigma = C.sigma if isinstance(C, OrientedCycle) else C
    s = sigma.signs
    k = len(s)
    if k < 3:
        raise ValueError("automorphisms are defined for cycles with k >= 3")
    flip = {"+": "-", "-": "+"}
    count = 0
    for r in range(k):
        # rotation i -> i + r maps edge i to edge i + r
        if all(s[(i + r) % k] == s[i] for i in range(k)):
            count += 1
        # reflection i -> r - i maps edge i to edge r - i - 1 traversed backwards
        if all(s[(r - i - 1) % k] == flip[s[i]] for i in range(k)):
            count += 1
    return count


def cycle_pattern(edges: Sequence[tuple[int, int]], n: int) -> tuple[tuple[int, ...], Orientation] | None:
    """Recover (vertex order, sign pattern) from the directed edges of a Hamilton cycle.

    Returns None unless the edges form a single cycle through all ``n`` vertices.
    """
    if n < 3 or len(edges) != n:
        return None
    nbrs: dict[int, list[int]] = {v: [] for v in range(n)}
    directed = set()
    for u, v in edges:
        if not (0 <= u < n and 0 <= v < n) or u == v:
            return None
        if (u, v) in directed or (v, u) in directed:
            return None
        directed.add((u, v))
        nbrs[u].append(v)
        nbrs[v].append(u)
    if any(len(nb) != 2 for nb in nbrs.values()):
        return None
    order = [0]
    prev, cur = None, 0
    while True:
        a, b = nbrs[cur]
        nxt = a if a != prev else b
        if nxt == 0:
            break
        order.append(nxt)
        prev, cur = cur, nxt
        if len(order) > n:
            return None
    if len(order) != n:
        return None
    signs = "".join("+" if (order[i], order[(i + 1) % n]) in directed else "-" for i in range(n))
    return tuple(order), Orientation(signs)


def same_cycle_pattern(a: Orientation, b: Orientation) -> bool:
    """True iff ``a`` equals a rotation of ``b`` or of its reflection."""
    if len(a) != len(b):
        return False
    doubled = b.signs * 2
    doubled_ref = b.reflect().signs * 2
    return a.signs in doubled or a.signs in doubled_ref
