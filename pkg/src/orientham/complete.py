"""Spanning oriented paths between prescribed endpoints.

``exact_sigma_path`` is a subset dynamic program over (visited set, current
end); the position in the orientation is the size of the visited set, so it
is not a separate coordinate. ``randomized_sigma_path`` is a fail-first
randomised depth-first search with restarts for sets beyond DP reach.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Sequence

import numba
import numpy as np

from .graphcore import Digraph, Orientation, OrientedPath, iter_bits, validate_oriented_path

DP_CAP = 24


class TooLargeError(ValueError):
    """Instance exceeds the exact solver's size cap."""


@dataclass(frozen=True)
class CompletionInstance:
    """Find a sigma-path from ``a`` to ``b`` through every vertex of ``vertices``.

    ``vertices`` defaults to the whole vertex set of ``host``.
    """

    host: Digraph
    a: int
    b: int
    sigma: Orientation
    vertices: tuple[int, ...] | None = None

    def __post_init__(self) -> None:
        W = self.W
        if self.a == self.b:
            raise ValueError("endpoints must be distinct")
        if self.a not in W or self.b not in W:
            raise ValueError("endpoints must belong to the vertex set")
        if len(W) < 2:
            raise ValueError("vertex set needs at least two vertices")
        if len(self.sigma) != len(W) - 1:
            raise ValueError(f"sigma must have length |W| - 1 = {len(W) - 1}")

    @property
    def W(self) -> tuple[int, ...]:
        return tuple(range(self.host.n)) if self.vertices is None else tuple(self.vertices)


def _local_rows(host: Digraph, order: Sequence[int]) -> tuple[np.ndarray, np.ndarray]:
    """Out/in bitset rows of the induced subdigraph, relabelled by position in ``order``."""
    w = len(order)
    pos = {v: i for i, v in enumerate(order)}
    out = np.zeros(w, dtype=np.int64)
    inn = np.zeros(w, dtype=np.int64)
    for i, v in enumerate(order):
        row = 0
        for u in iter_bits(host.out_adj[v]):
            j = pos.get(u)
            if j is not None:
                row |= 1 << j
        out[i] = row
        col = 0
        for u in iter_bits(host.in_adj[v]):
            j = pos.get(u)
            if j is not None:
                col |= 1 << j
        inn[i] = col
    return out, inn


@numba.njit(cache=True)
def _sigma_path_table(out, inn, sig, nbits):
    """dp[mask] = bitset of possible last vertices of a sig-path from vertex 0 visiting exactly ``mask``.

    Only vertices 0..nbits-1 take part. Masks always contain vertex 0 and
    every extension strictly increases the mask, so one increasing sweep fills
    the table.
    """
    size = 1 << nbits
    dp = np.zeros(size, dtype=np.int64)
    dp[1] = 1
    full = size - 1
    for mask in range(1, size, 2):
        ends = dp[mask]
        if ends == 0 or mask == full:
            continue
        k = 0
        t = mask
        while t:
            t &= t - 1
            k += 1
        step = sig[k - 1]
        reach = 0
        for v in range(nbits):
            if (ends >> v) & 1:
                if step:
                    reach |= out[v]
                else:
                    reach |= inn[v]
        reach &= full & ~mask
        while reach:
            low = reach & -reach
            dp[mask | low] |= low
            reach ^= low
    return dp


def _trace_back(dp: np.ndarray, out: np.ndarray, inn: np.ndarray, sig: np.ndarray, mask: int, last: int) -> list[int]:
    """Recover local vertex order of a path ending at ``last`` covering ``mask``."""
    order = [last]
    cur = last
    while mask != 1:
        prev_mask = mask & ~(1 << cur)
        k = bin(prev_mask).count("1") - 1
        ends = int(dp[prev_mask])
        for v in iter_bits(ends):
            ok = (int(out[v]) >> cur) & 1 if sig[k] else (int(inn[v]) >> cur) & 1
            if ok:
                cur = v
                break
        else:  # pragma: no cover - table invariant
            raise AssertionError("DP table inconsistent")
        order.append(cur)
        mask = prev_mask
    return order[::-1]


def exact_sigma_path(inst: CompletionInstance, cap: int = DP_CAP) -> OrientedPath | None:
    """Exact spanning sigma-path from ``a`` to ``b`` or None when none exists."""
    W = inst.W
    w = len(W)
    if w > cap:
        raise TooLargeError(f"|W| = {w} exceeds the exact solver cap {cap}")
    sig = inst.sigma.as_bits().astype(np.int64)
    interior = [v for v in W if v not in (inst.a, inst.b)]
    order = [inst.a, *interior, inst.b]
    out, inn = _local_rows(inst.host, order)
    bpos = w - 1
    if w == 2:
        ok = inst.host.has_edge(inst.a, inst.b) if sig[0] else inst.host.has_edge(inst.b, inst.a)
        return OrientedPath((inst.a, inst.b), inst.sigma) if ok else None
    # b is reserved for the last position, so the table only covers a + interior
    dp = _sigma_path_table(out, inn, sig, w - 1)
    full = (1 << (w - 1)) - 1
    ends = int(dp[full])
    last_sign = sig[w - 2]
    for v in iter_bits(ends):
        ok = (int(out[v]) >> bpos) & 1 if last_sign else (int(inn[v]) >> bpos) & 1
        if ok:
            local = _trace_back(dp, out, inn, sig, full, v)
            path = OrientedPath(tuple(order[i] for i in local) + (inst.b,), inst.sigma)
            assert validate_oriented_path(inst.host, path)
            return path
    return None


def has_closed_sigma_walk(D: Digraph, sigma: Orientation) -> bool:
    """Exact Hamilton sigma-cycle test with vertex 0 pinned to the first position.

    Every copy of the cycle can be rotated so that vertex 0 sits at some
    position r; pinning 0 first and trying each distinct rotation of sigma
    therefore covers all copies. Reflections give the same set of copies and
    are not tried separately.
    """
    n = D.n
    if len(sigma) != n:
        raise ValueError("sigma must have length n")
    out, inn = _local_rows(D, list(range(n)))
    full = (1 << n) - 1
    seen = set()
    for r in range(n):
        rot = sigma.rotate(r)
        if rot.signs in seen:
            continue
        seen.add(rot.signs)
        sig = rot.as_bits().astype(np.int64)
        dp = _sigma_path_table(out, inn, sig, n)
        ends = int(dp[full])
        closing = sig[n - 1]
        for v in iter_bits(ends):
            if (int(out[v]) & 1) if closing else (int(inn[v]) & 1):
                return True
    return False


# ---------------------------------------------------------------------------
# randomised search

def randomized_sigma_path(
    inst: CompletionInstance,
    budget: int,
    seed: int | random.Random,
    restart_steps: int | None = None,
) -> OrientedPath | None:
    """Randomised DFS with fail-first candidate ordering and restarts.

    A step is one candidate placement. Each descent gets ``restart_steps``
    steps (default: a quarter of the budget, at least 4|W|) before the search
    restarts from scratch with fresh tie-breaking. Returns None once the
    budget is spent; a returned path always validates.
    """
    rng = seed if isinstance(seed, random.Random) else random.Random(seed)
    W = inst.W
    w = len(W)
    host = inst.host
    signs = inst.sigma.signs
    a, b = inst.a, inst.b
    Wmask = 0
    for v in W:
        Wmask |= 1 << v
    bbit = 1 << b
    # edge into b on the final step
    last_sign = signs[w - 2]
    b_pred = host.in_adj[b] if last_sign == "+" else host.out_adj[b]
    if restart_steps is None:
        restart_steps = max(4 * w, budget // 4)

    def nbrs(v: int, sign: str) -> int:
        return host.out_adj[v] if sign == "+" else host.in_adj[v]

    steps = 0
    while steps < budget:
        local_limit = min(budget, steps + restart_steps)
        path = [a]
        free = Wmask & ~(1 << a) & ~bbit
        # stack of candidate lists per depth
        stack: list[list[int]] = []

        def candidates(cur: int, depth: int, free_mask: int) -> list[int]:
            # depth = number of edges placed so far
            if depth == w - 2:
                return [b] if (b_pred >> cur) & 1 else []
            opts = nbrs(cur, signs[depth]) & free_mask
            if depth == w - 3:
                # next vertex must still be able to reach b
                opts &= b_pred
            nxt_sign = signs[depth + 1]
            scored = []
            for u in iter_bits(opts):
                rest = free_mask & ~(1 << u)
                deg = (nbrs(u, nxt_sign) & (rest | bbit)).bit_count()
                scored.append((deg, rng.random(), u))
            scored.sort()
            return [u for _, _, u in reversed(scored)]

        stack.append(candidates(a, 0, free))
        while stack and steps < local_limit:
            opts = stack[-1]
            if not opts:
                stack.pop()
                if len(path) > 1:
                    v = path.pop()
                    if v != b:
                        free |= 1 << v
                continue
            u = opts.pop()  # lowest remaining degree is at the end
            steps += 1
            path.append(u)
            if u == b:
                result = OrientedPath(tuple(path), inst.sigma)
                if validate_oriented_path(host, result):
                    return result
                path.pop()  # pragma: no cover - construction guarantees validity
                continue
            free &= ~(1 << u)
            stack.append(candidates(u, len(path) - 1, free))
        if not stack:
            # the descent exhausted the whole search tree: no path exists
            return None
    return None


def solve_completion(
    inst: CompletionInstance, budget: int, seed: int | random.Random, dp_limit: int = 22
) -> OrientedPath | None:
    """Exact DP for |W| <= ``dp_limit``, randomised search otherwise."""
    if len(inst.W) <= dp_limit:
        return exact_sigma_path(inst)
    return randomized_sigma_path(inst, budget, seed)
