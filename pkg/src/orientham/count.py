"""Counting copies of an oriented Hamilton cycle.

The sequential sampler grows a sigma-path by picking the next vertex
uniformly from the correctly oriented unused neighbours of the current end.
The inverse of a path's sampling probability, ``n * prod |R_i|``, is an
unbiased importance weight for the number of sigma-path vertex sequences;
multiplying by the closing-edge indicator and dividing by the cycle's
automorphism count gives an unbiased estimate of the number of copies.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .complete import DP_CAP, TooLargeError, has_closed_sigma_walk
from .graphcore import Digraph, Orientation, OrientedPath, iter_bits, oriented_automorphism_count
from .randgen import rng_stream
from .stats import wilson_interval

BRUTE_CAP = 10


@dataclass(frozen=True)
class SisSample:
    path: OrientedPath | None
    log_weight: float
    rounds_ok: bool | None
    sizes: tuple[int, ...]

    @property
    def weight(self) -> float:
        return 0.0 if self.path is None else math.exp(self.log_weight)


@dataclass(frozen=True)
class CountReport:
    estimate: float
    std_error: float
    samples: int
    expectation_formula: float
    exact: int | None = None

    def within(self, k: float = 3.0) -> bool | None:
        """``|estimate - exact| <= k * std_error``; None without an exact value."""
        if self.exact is None:
            return None
        return abs(self.estimate - self.exact) <= k * self.std_error + 1e-9 * max(1.0, self.exact)


def counting_path_length(n: int, p: float) -> int:
    """ell = n - n / (alpha ln ln n) with p = alpha^2 ln ln n ln n / n, clamped to [2, n]."""
    if n < 16:
        raise ValueError("needs n >= 16 so that ln ln n > 1")
    lln = math.log(math.log(n))
    alpha = math.sqrt(p * n / (lln * math.log(n)))
    return min(n, max(2, n - math.ceil(n / (alpha * lln))))


def _e_threshold(n: int, j: int, epsilon: float, p1: float) -> float:
    return (1.0 - epsilon) * (n - j) * p1


def sample_f_path(
    D: Digraph,
    sigma: Orientation,
    ell: int,
    seed: int | np.random.Generator,
    *,
    epsilon: float | None = None,
    p1: float | None = None,
) -> SisSample:
    """Draw one path from the sequential sampler and record every |R_i|.

    ``rounds_ok`` reports whether |R_j| >= (1 - epsilon)(n - j) p1 held in
    every round (None unless both ``epsilon`` and ``p1`` are given).
    """
    n = D.n
    if ell > n:
        raise ValueError("ell must be <= n")
    if len(sigma) < ell - 1:
        raise ValueError("sigma is shorter than ell - 1")
    rng = seed if isinstance(seed, np.random.Generator) else rng_stream(seed, "fpath")
    x = int(rng.integers(n))
    placed = [x]
    free = ((1 << n) - 1) & ~(1 << x)
    sizes = []
    log_w = math.log(n)
    ok = None if epsilon is None or p1 is None else True
    for i in range(1, ell):
        R = D.neighbours(x, sigma[i - 1]) & free
        size = R.bit_count()
        sizes.append(size)
        if ok is not None and size < _e_threshold(n, i, epsilon, p1):
            ok = False
        if size == 0:
            return SisSample(None, -math.inf, False if ok is not None else None, tuple(sizes))
        log_w += math.log(size)
        k = int(rng.integers(size))
        for idx, v in enumerate(iter_bits(R)):
            if idx == k:
                x = v
                break
        placed.append(x)
        free &= ~(1 << x)
    return SisSample(OrientedPath(tuple(placed), sigma[: ell - 1]), log_w, ok, tuple(sizes))


def sample_f_paths(
    D: Digraph,
    sigma: Orientation,
    ell: int,
    samples: int,
    rng: np.random.Generator,
    *,
    close: bool = False,
    epsilon: float | None = None,
    p1: float | None = None,
) -> tuple[np.ndarray, np.ndarray | None]:
    """Vectorised sampler: log importance weights of ``samples`` independent paths.

    Failed samples get ``-inf``. With ``close`` a sample also gets ``-inf``
    unless the closing edge between the last and first vertex (orientation
    ``sigma[n - 1]``) is present. Returns ``(log_weights, rounds_ok)``;
    ``rounds_ok`` is None unless ``epsilon`` and ``p1`` are supplied.
    """
    n = D.n
    A = D.matrix
    AT = A.T
    bits = sigma.as_bits()
    S = samples
    cur = rng.integers(0, n, size=S)
    first = cur.copy()
    visited = np.zeros((S, n), dtype=bool)
    rows = np.arange(S)
    visited[rows, cur] = True
    log_w = np.full(S, math.log(n))
    alive = np.ones(S, dtype=bool)
    ok = None if epsilon is None or p1 is None else np.ones(S, dtype=bool)
    for i in range(1, ell):
        nb = A[cur] if bits[i - 1] else AT[cur]
        cand = nb & ~visited
        size = cand.sum(axis=1)
        if ok is not None:
            ok &= size >= _e_threshold(n, i, epsilon, p1)
        alive &= size > 0
        log_w += np.log(np.maximum(size, 1))
        r = np.minimum((rng.random(S) * size).astype(np.int64), np.maximum(size - 1, 0))
        csum = np.cumsum(cand, axis=1)
        nxt = np.argmax(csum > r[:, None], axis=1)
        cur = np.where(alive, nxt, cur)
        visited[rows[alive], cur[alive]] = True
    if close:
        alive &= A[cur, first] if bits[n - 1] else A[first, cur]
    log_w[~alive] = -np.inf
    return log_w, ok


def sis_count_cycles(
    D: Digraph,
    sigma: Orientation,
    samples: int,
    seed: int,
    *keys: int | str,
    chunk: int = 200_000,
    exact: bool = False,
) -> CountReport:
    """Unbiased estimate of the number of copies of the sigma-cycle in ``D``.

    Samples come from the stream ``(seed, "sis", *keys)``.
    """
    n = D.n
    if len(sigma) != n:
        raise ValueError("sigma must have length n")
    aut = oriented_automorphism_count(sigma)
    rng = rng_stream(seed, "sis", *keys)
    total = 0.0
    total_sq = 0.0
    done = 0
    while done < samples:
        m = min(chunk, samples - done)
        log_w, _ = sample_f_paths(D, sigma, n, m, rng, close=True)
        w = np.exp(log_w)
        total += float(w.sum())
        total_sq += float((w * w).sum())
        done += m
    mean = total / samples
    var = max(total_sq / samples - mean * mean, 0.0) * samples / max(samples - 1, 1)
    se = math.sqrt(var / samples)
    return CountReport(
        estimate=mean / aut,
        std_error=se / aut,
        samples=samples,
        expectation_formula=float("nan"),
        exact=brute_count(D, sigma) if exact else None,
    )


def _count_sequences(D: Digraph, sigma: Orientation, length: int, closed: bool) -> int:
    """Enumerate vertex sequences x_0..x_{length-1} of distinct vertices following ``sigma``."""
    n = D.n
    signs = sigma.signs
    nbr_out, nbr_in = D.out_adj, D.in_adj
    full = (1 << n) - 1
    count = 0

    def extend(first: int, cur: int, used: int, depth: int) -> None:
        nonlocal count
        if depth == length:
            if closed:
                last_sign = signs[length - 1]
                if (nbr_out[cur] >> first) & 1 if last_sign == "+" else (nbr_in[cur] >> first) & 1:
                    count += 1
            else:
                count += 1
            return
        nxt = (nbr_out[cur] if signs[depth - 1] == "+" else nbr_in[cur]) & ~used & full
        for v in iter_bits(nxt):
            extend(first, v, used | (1 << v), depth + 1)

    for x in range(n):
        extend(x, x, 1 << x, 1)
    return count


def brute_count_paths(D: Digraph, sigma: Orientation, ell: int) -> int:
    """Number of sigma-path vertex sequences on ``ell`` vertices (labelled, by enumeration)."""
    if D.n > BRUTE_CAP:
        raise TooLargeError(f"n = {D.n} exceeds the brute-force cap {BRUTE_CAP}")
    return _count_sequences(D, sigma, ell, closed=False)


def brute_count(D: Digraph, sigma: Orientation, cap: int = BRUTE_CAP) -> int:
    """Exact number of subdigraphs of ``D`` isomorphic to the sigma-cycle."""
    n = D.n
    if n > cap:
        raise TooLargeError(f"n = {n} exceeds the brute-force cap {cap}")
    if len(sigma) != n:
        raise ValueError("sigma must have length n")
    sequences = _count_sequences(D, sigma, n, closed=True)
    aut = oriented_automorphism_count(sigma)
    copies, rem = divmod(sequences, aut)
    assert rem == 0, "sequence count must be a multiple of the automorphism count"
    return copies


def expected_copies(n: int, p: float, sigma: Orientation) -> float:
    """E[number of copies] in D(n, p): n! / |Aut| * p^n."""
    if len(sigma) != n:
        raise ValueError("sigma must have length n")
    return math.factorial(n) / oriented_automorphism_count(sigma) * p**n


def exists_oriented_hc(D: Digraph, sigma: Orientation, cap: int = DP_CAP) -> bool:
    """Exact test for a copy of the sigma-cycle, via the subset DP."""
    if D.n > cap:
        raise TooLargeError(f"n = {D.n} exceeds the DP cap {cap}")
    return has_closed_sigma_walk(D, sigma)


@dataclass(frozen=True)
class ThresholdPoint:
    c: float
    p: float
    hits: int
    trials: int

    @property
    def probability(self) -> float:
        return self.hits / self.trials

    @property
    def ci(self) -> tuple[float, float]:
        return wilson_interval(self.hits, self.trials)


def threshold_probe(
    n: int, c_values: list[float], sigma: Orientation, trials: int, seed: int
) -> list[ThresholdPoint]:
    """Empirical Pr[copy exists] at p = (ln n + c) / n for each ``c``.

    All values of ``c`` share the same uniforms per trial, so the sampled
    digraphs are nested and the estimated curve is monotone in ``c``.
    """
    if n > DP_CAP:
        raise TooLargeError(f"n = {n} exceeds the DP cap {DP_CAP}")
    order = sorted(range(len(c_values)), key=lambda k: c_values[k])
    ps = [min(1.0, max(0.0, (math.log(n) + c) / n)) for c in c_values]
    hits = [0] * len(c_values)
    for trial in range(trials):
        U = rng_stream(seed, "threshold", trial).random((n, n))
        found = False
        for k in order:
            # nested digraphs: once a copy exists it persists for larger c
            if not found and ps[k] > 0:
                D = Digraph.from_matrix(U < ps[k])
                found = exists_oriented_hc(D, sigma)
            hits[k] += found
    return [ThresholdPoint(c_values[k], ps[k], hits[k], trials) for k in range(len(c_values))]


def cycle_copies_report(
    D: Digraph, sigma: Orientation, p: float, samples: int, seed: int, exact: bool
) -> CountReport:
    """SIS estimate together with the exact expectation (and brute count if asked)."""
    rep = sis_count_cycles(D, sigma, samples, seed, exact=exact)
    return CountReport(
        estimate=rep.estimate,
        std_error=rep.std_error,
        samples=rep.samples,
        expectation_formula=expected_copies(D.n, p, sigma),
        exact=rep.exact,
    )


__all__ = [
    "CountReport",
    "SisSample",
    "ThresholdPoint",
    "brute_count",
    "brute_count_paths",
    "counting_path_length",
    "cycle_copies_report",
    "exists_oriented_hc",
    "expected_copies",
    "sample_f_path",
    "sample_f_paths",
    "sis_count_cycles",
    "threshold_probe",
]
