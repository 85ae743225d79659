"""Two-stage packing of edge-disjoint oriented Hamilton cycles.

Stage 1 embeds a long subpath of every cycle, one round per cycle, into the
complete digraph minus the edges of earlier paths, all rounds sharing one
exposure oracle. Stage 2 samples a fresh random digraph, hands each of its
edges to one cycle whose leftover vertex set contains both endpoints, and
closes every path with a spanning oriented path through its leftover set.
"""

from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .complete import CompletionInstance, solve_completion
from .embed import EmbedParams, embed_path
from .graphcore import (
    Digraph,
    Orientation,
    OrientedCycle,
    OrientedPath,
    cycle_pattern,
    same_cycle_pattern,
)
from .randgen import ExposureOracle, py_stream, rng_stream, sample_dnp

log = logging.getLogger(__name__)


class PackingFailure(RuntimeError):
    """Base class for algorithmic failures of the packing pipeline."""

    stage = "pack"
    # replaced per instance by the raising stage; never mutated in place
    diagnostics: dict[str, object] = {}


class EmbeddingFailure(PackingFailure):
    stage = "stage1"

    def __init__(self, cycle_index: int, failed_round: int):
        super().__init__(f"embedding of path {cycle_index} failed in round {failed_round}")
        self.cycle_index = cycle_index
        self.failed_round = failed_round


class BudgetExceeded(PackingFailure):
    stage = "stage1"

    def __init__(self, cycle_index: int, pair: tuple[int, int], count: int, budget: float):
        super().__init__(
            f"pair {pair} exposed in {count} rounds by path {cycle_index}, budget p1/p_ex = {budget:.4g}"
        )
        self.cycle_index = cycle_index
        self.pair = pair
        self.count = count
        self.budget = budget


class CompletionFailure(PackingFailure):
    stage = "stage2"

    def __init__(self, indices: list[int]):
        super().__init__(f"no completing path found for cycles {indices}")
        self.indices = indices


@dataclass(frozen=True)
class PackParams:
    n: int
    p: float
    epsilon: float
    t: int
    ell: int
    p_ex: float
    alpha: float
    delta: int
    p1: float
    p2: float
    solver_budget: int = 200_000
    dp_limit: int = 22

    def __post_init__(self) -> None:
        if self.t < 0:
            raise ValueError("t must be >= 0")
        if not 2 <= self.ell < self.n:
            raise ValueError(f"ell must satisfy 2 <= ell < n, got {self.ell}")
        if not 0.0 < self.p_ex <= 1.0:
            raise ValueError("p_ex must lie in (0, 1]")
        if not math.isclose(self.p1 + self.p2 - self.p1 * self.p2, self.p, rel_tol=1e-12, abs_tol=1e-15):
            raise ValueError("p1 and p2 must satisfy (1 - p1)(1 - p2) = 1 - p")

    @classmethod
    def build(
        cls,
        n: int,
        p: float,
        epsilon: float,
        *,
        t: int | None = None,
        ell: int | None = None,
        p_ex: float | None = None,
        alpha: float | None = None,
        delta: int | None = None,
        p1: float | None = None,
        solver_budget: int = 200_000,
        dp_limit: int = 22,
    ) -> PackParams:
        """Fill unspecified parameters with the desk-scale defaults.

        alpha = max(1.1, (np / ln^3 n)^(1/3)); t = floor((1 - eps) n p);
        ell = n - ceil(n / (alpha ln n)); p_ex = alpha^2 ln^2 n / n;
        delta = 2t; p1 = (1 - eps/2) p; p2 solves (1 - p1)(1 - p2) = 1 - p.
        """
        if not 0.0 < p <= 1.0:
            raise ValueError("p must lie in (0, 1]")
        if not 0.0 < epsilon < 1.0:
            raise ValueError("epsilon must lie in (0, 1)")
        logn = math.log(n)
        if alpha is None:
            alpha = max(1.1, (n * p / logn**3) ** (1.0 / 3.0))
        if t is None:
            t = math.floor((1.0 - epsilon) * n * p + 1e-9)
        if ell is None:
            ell = n - math.ceil(n / (alpha * logn))
        if p_ex is None:
            p_ex = min(1.0, alpha**2 * logn**2 / n)
        if delta is None:
            delta = 2 * t
        if p1 is None:
            p1 = (1.0 - epsilon / 2.0) * p
        p2 = 1.0 - (1.0 - p) / (1.0 - p1) if p1 < 1.0 else 0.0
        p2 = min(max(p2, 0.0), 1.0)
        return cls(
            n=n,
            p=p,
            epsilon=epsilon,
            t=t,
            ell=ell,
            p_ex=p_ex,
            alpha=alpha,
            delta=delta,
            p1=p1,
            p2=p2,
            solver_budget=solver_budget,
            dp_limit=dp_limit,
        )

    @property
    def budget(self) -> float:
        """Maximum number of rounds a pair may be exposed in: p1 / p_ex."""
        return self.p1 / self.p_ex

    @property
    def y_bound(self) -> float:
        """(1 + eps) t ((n - ell) / n)^2."""
        return (1.0 + self.epsilon) * self.t * ((self.n - self.ell) / self.n) ** 2

    def as_dict(self) -> dict[str, object]:
        return {k: getattr(self, k) for k in self.__dataclass_fields__}


@dataclass
class ExposureLedger:
    """Per-pair counters across Stage-1 rounds.

    ``X[u, v]``: rounds in which the directed pair was exposed (queried).
    ``fresh[u, v]``: coins actually tossed for the pair (at most one with a shared oracle).
    ``Y[u, v]`` (u < v): rounds whose path interior misses both u and v.
    """

    n: int
    X: np.ndarray = field(init=False)
    fresh: np.ndarray = field(init=False)
    Y: np.ndarray = field(init=False)
    rounds: int = 0

    def __post_init__(self) -> None:
        self.X = np.zeros((self.n, self.n), dtype=np.int32)
        self.fresh = np.zeros((self.n, self.n), dtype=np.int32)
        self.Y = np.zeros((self.n, self.n), dtype=np.int32)

    def record_round(self, exposed: set[tuple[int, int]], fresh: set[tuple[int, int]], interior: set[int]) -> None:
        if exposed:
            us, vs = zip(*exposed)
            self.X[list(us), list(vs)] += 1
        if fresh:
            us, vs = zip(*fresh)
            self.fresh[list(us), list(vs)] += 1
        outside = np.ones(self.n, dtype=bool)
        outside[list(interior)] = False
        block = np.triu(np.outer(outside, outside), k=1)
        self.Y += block
        self.rounds += 1

    def y(self, u: int, v: int) -> int:
        return int(self.Y[min(u, v), max(u, v)])

    @property
    def max_x(self) -> int:
        return int(self.X.max()) if self.rounds else 0

    @property
    def max_y(self) -> int:
        return int(self.Y.max()) if self.rounds else 0


@dataclass
class Stage1Result:
    paths: list[OrientedPath]
    ledger: ExposureLedger
    exposed_edges: set[tuple[int, int]]
    budget_breaches: list[tuple[int, tuple[int, int], int]] = field(default_factory=list)


@dataclass
class PackingResult:
    cycles: list[OrientedCycle]
    paths: list[OrientedPath]
    ledger: ExposureLedger | None
    stage2_edges: list[list[tuple[int, int]]]
    params: PackParams | None = None
    diagnostics: dict[str, object] = field(default_factory=dict)

    def cycle_edges(self) -> list[list[tuple[int, int]]]:
        return [c.edges() for c in self.cycles]


def leading_subpath(sigma: Orientation, ell: int) -> Orientation:
    """Orientation of the subpath occupying cycle positions 0..ell-1."""
    return sigma[: ell - 1]


def _with_ledger(err: PackingFailure, ledger: ExposureLedger) -> PackingFailure:
    err.diagnostics = {
        "rounds": ledger.rounds,
        "max_x": ledger.max_x,
        "max_fresh": int(ledger.fresh.max()) if ledger.rounds else 0,
        "max_y": ledger.max_y,
    }
    return err


def stage1_pack(
    cycles_sigma: Sequence[Orientation],
    params: PackParams,
    seed: int,
    *,
    enforce_budget: bool = True,
) -> Stage1Result:
    """Embed the leading ell-vertex subpath of every cycle, edge-disjointly.

    One exposure oracle is shared by all rounds. With ``enforce_budget`` a
    pair exposed in more than p1/p_ex rounds aborts the run; otherwise the
    breach is only recorded.
    """
    n, ell = params.n, params.ell
    for s in cycles_sigma:
        if len(s) != n:
            raise ValueError(f"cycle orientations must have length n = {n}")
    oracle = ExposureOracle.seeded(params.p_ex, seed, "stage1")
    ledger = ExposureLedger(n)
    used: set[tuple[int, int]] = set()
    host = Digraph.complete(n)
    paths: list[OrientedPath] = []
    breaches: list[tuple[int, tuple[int, int], int]] = []
    budget = params.budget
    for i, sigma in enumerate(cycles_sigma):
        before = set(oracle.outcomes)
        trace = embed_path(
            host,
            EmbedParams(ell, params.p_ex, leading_subpath(sigma, ell)),
            oracle,
            py_stream(seed, "stage1-order", i),
        )
        exposed = trace.exposed_pairs()
        fresh = {pair for pair in exposed if pair not in before}
        ledger.record_round(exposed, fresh, trace.interior())
        if not trace.success:
            raise _with_ledger(EmbeddingFailure(i, trace.failed_round), ledger)
        over = np.argwhere(ledger.X > budget + 1e-12)
        if len(over):
            u, v = (int(a) for a in over[0])
            breaches.append((i, (u, v), int(ledger.X[u, v])))
            if enforce_budget:
                raise _with_ledger(BudgetExceeded(i, (u, v), int(ledger.X[u, v]), budget), ledger)
        path = trace.path
        assert not used.intersection(path.edges()), "host excluded earlier paths"
        used.update(path.edges())
        paths.append(path)
        host = host.without_edges(path.edges())
    return Stage1Result(paths=paths, ledger=ledger, exposed_edges=set(oracle.true_edges()), budget_breaches=breaches)


def stage2_complete(
    stage1: Stage1Result,
    cycles_sigma: Sequence[Orientation],
    params: PackParams,
    seed: int,
    solver_budget: int | None = None,
) -> PackingResult:
    """Close every Stage-1 path into a copy of its cycle using a fresh D(n, p2)."""
    n, ell = params.n, params.ell
    paths = stage1.paths
    t = len(paths)
    budget = params.solver_budget if solver_budget is None else solver_budget
    path_edges = set()
    for q in paths:
        path_edges.update(q.edges())

    W_sets = []
    inW = np.zeros((t, n), dtype=bool)
    for i, q in enumerate(paths):
        interior = set(q.vertices[1:-1])
        W = tuple(v for v in range(n) if v not in interior)
        W_sets.append(W)
        inW[i, list(W)] = True

    D2 = sample_dnp(n, params.p2, seed, "stage2")
    rng = rng_stream(seed, "stage2-assign")
    assigned: list[list[tuple[int, int]]] = [[] for _ in range(t)]
    dropped = 0
    for u, v in D2.edges():
        if (u, v) in path_edges:
            dropped += 1
            continue
        eligible = np.flatnonzero(inW[:, u] & inW[:, v])
        assert len(eligible) == stage1.ledger.y(u, v), "eligible set size must equal Y_uv"
        if len(eligible) == 0:
            dropped += 1
            continue
        i = int(eligible[rng.integers(len(eligible))])
        assigned[i].append((u, v))

    cycles: list[OrientedCycle] = []
    failed = []
    for i, (q, sigma) in enumerate(zip(paths, cycles_sigma)):
        F = Digraph.from_edges(n, assigned[i])
        for u, v in assigned[i]:
            assert inW[i, u] and inW[i, v], "assigned edge leaves W_i"
        inst = CompletionInstance(F, q.end, q.start, sigma[ell - 1 :], W_sets[i])
        comp = solve_completion(inst, budget, py_stream(seed, "complete", i), dp_limit=params.dp_limit)
        if comp is None:
            failed.append(i)
            continue
        cycles.append(OrientedCycle(q.vertices + comp.vertices[1:-1], sigma))

    y_max = stage1.ledger.max_y
    diagnostics = {
        "d2_edges": D2.num_edges,
        "d2_dropped": dropped,
        "f_sizes": [len(a) for a in assigned],
        "w_size": n - ell + 2,
        "max_x": stage1.ledger.max_x,
        "max_fresh": int(stage1.ledger.fresh.max()) if t else 0,
        "max_y": y_max,
        "y_bound": params.y_bound,
        "c_violation": bool(y_max > params.y_bound),
        "budget_breaches": len(stage1.budget_breaches),
        "completion_failures": failed,
    }
    if failed:
        err = CompletionFailure(failed)
        err.diagnostics = diagnostics
        raise err
    return PackingResult(
        cycles=cycles,
        paths=list(paths),
        ledger=stage1.ledger,
        stage2_edges=assigned,
        params=params,
        diagnostics=diagnostics,
    )


def pack_cycles(
    cycles_sigma: Sequence[Orientation],
    n: int,
    p: float,
    epsilon: float,
    seed: int,
    *,
    enforce_budget: bool = True,
    **overrides,
) -> PackingResult:
    """End-to-end Stage 1 + Stage 2 for the given cycle orientations.

    The number of cycles is ``len(cycles_sigma)``; extra keyword arguments
    override the defaults of :meth:`PackParams.build`.
    """
    t = len(cycles_sigma)
    if t == 0:
        return PackingResult(cycles=[], paths=[], ledger=None, stage2_edges=[], diagnostics={"t": 0})
    overrides.setdefault("delta", 2 * t)
    params = PackParams.build(n, p, epsilon, t=t, **overrides)
    if p < math.log(n) ** 3 / n:
        log.warning("p = %.4g is below ln^3 n / n = %.4g; packing is not expected to succeed", p, math.log(n) ** 3 / n)
    t0 = time.perf_counter()
    s1 = stage1_pack(cycles_sigma, params, seed, enforce_budget=enforce_budget)
    t1 = time.perf_counter()
    result = stage2_complete(s1, cycles_sigma, params, seed)
    t2 = time.perf_counter()
    result.diagnostics["coupling_ok"] = coupling_check(result)
    result.diagnostics["seconds_stage1"] = t1 - t0
    result.diagnostics["seconds_stage2"] = t2 - t1
    return result


def coupling_check(result: PackingResult) -> bool:
    """Ledger arithmetic for the union of consumed edges lying inside one D(n, p).

    Each pair is consumed in Stage 1 with probability at most X_uv p_ex <= p1
    and in Stage 2 with probability p2; p1 + p2 - p1 p2 = p.
    """
    params = result.params
    if params is None or result.ledger is None:
        return True
    stage1_prob = result.ledger.max_x * params.p_ex
    identity = math.isclose(params.p1 + params.p2 - params.p1 * params.p2, params.p, rel_tol=1e-12)
    return identity and stage1_prob <= params.p1 + 1e-12


# ---------------------------------------------------------------------------
# verification

@dataclass
class PackingVerification:
    ok: bool
    problems: list[str]

    def __bool__(self) -> bool:
        return self.ok


def verify_packing(
    result: PackingResult | Sequence[Sequence[tuple[int, int]]],
    inputs: Sequence[Orientation],
    n: int | None = None,
    allowed: Sequence[set[tuple[int, int]]] | None = None,
) -> PackingVerification:
    """Check disjointness, Hamiltonicity and pattern of every cycle.

    ``result`` is a :class:`PackingResult` or a list of per-cycle directed
    edge lists. For a :class:`PackingResult` each cycle is also checked to use
    only its own Stage-1 path edges and assigned Stage-2 edges.
    """
    if isinstance(result, PackingResult):
        edge_lists = result.cycle_edges()
        if n is None and result.params is not None:
            n = result.params.n
        if allowed is None and result.ledger is not None:
            allowed = [set(q.edges()) | set(f) for q, f in zip(result.paths, result.stage2_edges)]
    else:
        edge_lists = [list(e) for e in result]
    problems = []
    if len(edge_lists) != len(inputs):
        problems.append(f"{len(edge_lists)} cycles for {len(inputs)} inputs")
    if n is None:
        n = len(inputs[0]) if inputs else 0
    seen: dict[tuple[int, int], int] = {}
    for i, edges in enumerate(edge_lists):
        for e in edges:
            e = (int(e[0]), int(e[1]))
            if e in seen and seen[e] != i:
                problems.append(f"edge {e} shared by cycles {seen[e]} and {i}")
            seen.setdefault(e, i)
        rec = cycle_pattern([(int(u), int(v)) for u, v in edges], n)
        if rec is None:
            problems.append(f"cycle {i} is not a Hamilton cycle on {n} vertices")
            continue
        if i < len(inputs) and not same_cycle_pattern(rec[1], inputs[i]):
            problems.append(f"cycle {i} has pattern {rec[1]} not matching input {inputs[i]}")
        if allowed is not None and i < len(allowed):
            extra = [e for e in edges if tuple(e) not in allowed[i]]
            if extra:
                problems.append(f"cycle {i} uses edges outside its path and stage-2 set: {extra[:3]}")
    return PackingVerification(ok=not problems, problems=problems)


def orientation_suite(kind: str, n: int, t: int, seed: int) -> list[Orientation]:
    """Cycle orientations: consistent, antidirected, random or mixed (round robin)."""
    rng = rng_stream(seed, "sigmas", kind)
    if kind == "consistent":
        return [Orientation.consistent(n) for _ in range(t)]
    if kind == "antidirected":
        if n % 2:
            raise ValueError("antidirected cycles need even n")
        return [Orientation.antidirected(n) for _ in range(t)]
    if kind == "random":
        return [Orientation.random(n, rng) for _ in range(t)]
    if kind == "mixed":
        out = []
        for i in range(t):
            k = i % 3
            if k == 0:
                out.append(Orientation.consistent(n))
            elif k == 1 and n % 2 == 0:
                out.append(Orientation.antidirected(n))
            else:
                out.append(Orientation.random(n, rng))
        return out
    raise ValueError(f"unknown orientation suite {kind!r}")
