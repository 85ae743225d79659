"""Randomised embedding of an oriented path by online edge exposure.

One run places ``ell`` vertices over ``ell - 1`` rounds. In round i the
unused vertices are visited in a uniformly random order (a lazily drawn
Fisher-Yates shuffle) and the pair joining the current endpoint to each
candidate is exposed, with the direction given by the orientation, until one
exposure comes up true on an edge of the host digraph.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field

import numpy as np

from .graphcore import Digraph, Orientation, OrientedPath, semi_degree
from .randgen import ExposureOracle, py_stream, rng_stream
from .stats import wilson_interval


@dataclass(frozen=True)
class EmbedParams:
    ell: int
    p_ex: float
    sigma: Orientation

    def __post_init__(self) -> None:
        if self.ell < 2:
            raise ValueError("ell must be >= 2")
        if not 0.0 < self.p_ex <= 1.0:
            raise ValueError("p_ex must lie in (0, 1]")
        if len(self.sigma) != self.ell - 1:
            raise ValueError(f"sigma must have length ell - 1 = {self.ell - 1}, got {len(self.sigma)}")


@dataclass
class EmbeddingTrace:
    """Record of one run.

    ``exposures`` holds ``(round, (tail, head), coin, in_host)`` tuples in the
    order they were made. ``placed`` is the vertex sequence built so far (the
    whole path on success).
    """

    placed: list[int]
    sigma: Orientation
    exposures: list[tuple[int, tuple[int, int], bool, bool]] = field(default_factory=list)
    failed_round: int | None = None
    host_semi_degree: int | None = None

    @property
    def success(self) -> bool:
        return self.failed_round is None

    @property
    def rounds(self) -> int:
        """Rounds that completed successfully."""
        return len(self.placed) - 1

    @property
    def path(self) -> OrientedPath | None:
        if not self.success:
            return None
        return OrientedPath(tuple(self.placed), self.sigma)

    def accepted(self) -> list[tuple[int, int]]:
        return [pair for _, pair, coin, in_host in self.exposures if coin and in_host]

    def exposed_pairs(self) -> set[tuple[int, int]]:
        return {pair for _, pair, _, _ in self.exposures}

    def interior(self) -> set[int]:
        """V(Q) minus its two ends (for a failed run, the partial path's ends)."""
        return set(self.placed[1:-1])


def embed_path(
    D: Digraph,
    params: EmbedParams,
    oracle: ExposureOracle,
    rng: random.Random,
    *,
    record_host_degree: bool = False,
) -> EmbeddingTrace:
    n = D.n
    ell = params.ell
    if ell > n:
        raise ValueError(f"cannot embed a path on {ell} vertices into {n} vertices")
    signs = params.sigma.signs
    out_adj = D.out_adj
    expose = oracle.expose

    x = rng.randrange(n)
    trace = EmbeddingTrace(placed=[x], sigma=params.sigma)
    if record_host_degree:
        trace.host_semi_degree = semi_degree(D)
    remaining = [v for v in range(n) if v != x]
    log = trace.exposures
    randrange = rng.randrange

    for i in range(1, ell):
        forward = signs[i - 1] == "+"
        m = len(remaining)
        chosen = -1
        for j in range(m):
            k = j + randrange(m - j)
            remaining[j], remaining[k] = remaining[k], remaining[j]
            y = remaining[j]
            if forward:
                u, v = x, y
            else:
                u, v = y, x
            coin = expose(u, v)
            in_host = bool((out_adj[u] >> v) & 1)
            log.append((i, (u, v), coin, in_host))
            if coin and in_host:
                chosen = j
                break
        if chosen < 0:
            trace.failed_round = i
            return trace
        x = remaining[chosen]
        remaining[chosen] = remaining[-1]
        remaining.pop()
        trace.placed.append(x)
    return trace


# ---------------------------------------------------------------------------
# parameter window

@dataclass(frozen=True)
class WindowReport:
    n: int
    ell: int
    delta: int
    p_ex: float
    lower: float
    upper: float
    lower_ratio: float
    upper_ratio: float
    slack: float

    @property
    def lower_ok(self) -> bool:
        return self.lower_ratio >= self.slack

    @property
    def upper_ok(self) -> bool:
        return self.upper_ratio >= self.slack

    @property
    def ok(self) -> bool:
        return self.lower_ok and self.upper_ok

    @property
    def nonempty(self) -> bool:
        return self.lower < self.upper


def check_param_window(n: int, ell: int, delta: int, p_ex: float, slack: float = 4.0) -> WindowReport:
    """Evaluate log n/(n-ell-delta) << p_ex << min{(n-ell)^2/(n^2 delta), (n delta)^(-1/2)}.

    ``<<`` is read as "by a factor of at least ``slack``".
    """
    gap = n - ell - delta
    if gap <= 0:
        raise ValueError("n - ell - delta must be positive")
    if p_ex <= 0:
        raise ValueError("p_ex must be positive")
    lower = math.log(n) / gap
    if delta > 0:
        upper = min((n - ell) ** 2 / (n * n * delta), 1.0 / math.sqrt(n * delta))
    else:
        upper = math.inf
    return WindowReport(
        n=n,
        ell=ell,
        delta=delta,
        p_ex=p_ex,
        lower=lower,
        upper=upper,
        lower_ratio=p_ex / lower,
        upper_ratio=upper / p_ex,
        slack=slack,
    )


# ---------------------------------------------------------------------------
# Monte Carlo estimation of the lemma's event probabilities

@dataclass
class EventProbTable:
    trials: int
    failures: int
    panel: list[tuple[int, int]]
    exposed_counts: np.ndarray
    avoid_counts: np.ndarray
    n: int
    ell: int
    p_ex: float
    rows: list[dict[str, object]] = field(default_factory=list)

    @property
    def pr_fail(self) -> float:
        return self.failures / self.trials

    @property
    def pr_fail_ci(self) -> tuple[float, float]:
        return wilson_interval(self.failures, self.trials)

    @property
    def max_pr_exposed(self) -> float:
        return float(self.exposed_counts.max()) / self.trials

    @property
    def max_pr_exposed_ci(self) -> tuple[float, float]:
        return wilson_interval(int(self.exposed_counts.max()), self.trials)

    @property
    def mean_pr_exposed(self) -> float:
        return float(self.exposed_counts.mean()) / self.trials

    @property
    def max_pr_avoid(self) -> float:
        return float(self.avoid_counts.max()) / self.trials

    @property
    def max_pr_avoid_ci(self) -> tuple[float, float]:
        return wilson_interval(int(self.avoid_counts.max()), self.trials)

    @property
    def mean_pr_avoid(self) -> float:
        return float(self.avoid_counts.mean()) / self.trials

    @property
    def exposed_bound(self) -> float:
        """1 / (n p_ex)."""
        return 1.0 / (self.n * self.p_ex)

    @property
    def avoid_bound(self) -> float:
        """((n - ell) / n)^2."""
        return ((self.n - self.ell) / self.n) ** 2


def sample_panel(n: int, size: int, seed: int) -> list[tuple[int, int]]:
    """Fixed random panel of distinct directed pairs (u != v)."""
    rng = rng_stream(seed, "panel")
    size = min(size, n * (n - 1))
    seen: set[tuple[int, int]] = set()
    panel = []
    while len(panel) < size:
        u, v = (int(a) for a in rng.integers(0, n, size=2))
        if u != v and (u, v) not in seen:
            seen.add((u, v))
            panel.append((u, v))
    return panel


def _run_trial(D: Digraph, params: EmbedParams, seed: int, trial: int):
    oracle = ExposureOracle.seeded(params.p_ex, seed, "embed", trial)
    return embed_path(D, params, oracle, py_stream(seed, "embed-order", trial))


def estimate_event_probs(
    D: Digraph,
    params: EmbedParams,
    trials: int,
    seed: int,
    panel_size: int = 200,
) -> EventProbTable:
    """Empirical Pr[F], panel-wise Pr[E_uv] and Pr[A_uv] over independent runs.

    Each trial uses its own oracle and ordering stream keyed by the trial index.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    n = D.n
    panel = sample_panel(n, panel_size, seed)
    panel_index = {pair: k for k, pair in enumerate(panel)}
    pu = np.array([u for u, _ in panel])
    pv = np.array([v for _, v in panel])
    exposed = np.zeros(len(panel), dtype=np.int64)
    avoid = np.zeros(len(panel), dtype=np.int64)
    failures = 0
    rows = []
    for trial in range(trials):
        tr = _run_trial(D, params, seed, trial)
        if not tr.success:
            failures += 1
        for _, pair, _, _ in tr.exposures:
            k = panel_index.get(pair)
            if k is not None:
                exposed[k] += 1
        inner = np.zeros(n, dtype=bool)
        inner[tr.placed[1:-1]] = True
        avoid += ~(inner[pu] | inner[pv])
        rows.append(
            {
                "trial": trial,
                "result": "success" if tr.success else "failure",
                "rounds": tr.rounds,
                "exposures": len(tr.exposures),
                "failed_round": "" if tr.failed_round is None else tr.failed_round,
            }
        )
    return EventProbTable(
        trials=trials,
        failures=failures,
        panel=panel,
        exposed_counts=exposed,
        avoid_counts=avoid,
        n=n,
        ell=params.ell,
        p_ex=params.p_ex,
        rows=rows,
    )
