"""Submartingale tail bounds and a Monte Carlo harness that checks them.

The variance bound of the submartingale inequality is called ``var_bound``
here; ``sigma`` always means an orientation pattern elsewhere in the package.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .randgen import rng_stream


def wilson_interval(successes: int, trials: int, z: float = 1.96) -> tuple[float, float]:
    """Wilson score interval for a binomial proportion."""
    if trials <= 0:
        return (0.0, 1.0)
    phat = successes / trials
    denom = 1.0 + z * z / trials
    centre = (phat + z * z / (2 * trials)) / denom
    half = z * math.sqrt(phat * (1 - phat) / trials + z * z / (4 * trials * trials)) / denom
    return (max(0.0, centre - half), min(1.0, centre + half))


@dataclass(frozen=True)
class SubmartingaleBoundParams:
    N: int
    var_bound: float
    M: float
    m: float

    def __post_init__(self) -> None:
        if self.N < 1:
            raise ValueError("N must be >= 1")
        if self.m < 0:
            raise ValueError("tail offset m must be >= 0")
        if self.M <= 0:
            raise ValueError("M must be > 0")
        if self.var_bound < 0:
            raise ValueError("var_bound must be >= 0")


def submartingale_tail_bound(params: SubmartingaleBoundParams) -> float:
    """exp(-m^2 / (2 (N var_bound + M m / 3)))."""
    N, var_bound, M, m = params.N, params.var_bound, params.M, params.m
    if m < 0:
        raise ValueError("tail offset m must be >= 0")
    if m == 0:
        return 1.0
    denom = 2.0 * (N * var_bound + M * m / 3.0)
    if denom <= 0:
        raise ValueError("bound denominator must be positive")
    return math.exp(-(m * m) / denom)


def corollary_tail_bound(N: int, q: float, m: float) -> float:
    """Bound on Pr[at least qN + m of N events occur] when each has conditional probability <= q."""
    if not 0.0 <= q <= 1.0:
        raise ValueError("q must lie in [0, 1]")
    return submartingale_tail_bound(SubmartingaleBoundParams(N=N, var_bound=q, M=1.0, m=m))


# ---------------------------------------------------------------------------
# adaptive Bernoulli processes

@dataclass(frozen=True)
class EventModel:
    """A history-dependent Bernoulli process whose step probabilities never exceed ``q``.

    ``rule`` selects how the step probability depends on the history:

    * ``iid`` -- always ``high * q``.
    * ``after_success`` -- ``low * q`` right after an event occurred, else ``high * q``.
    * ``ahead`` -- ``low * q`` while the running count exceeds ``q * steps``, else ``high * q``.
    """

    rule: str = "iid"
    low: float = 0.5
    high: float = 1.0

    def __post_init__(self) -> None:
        if self.rule not in {"iid", "after_success", "ahead"}:
            raise ValueError(f"unknown event model rule {self.rule!r}")
        if not (0.0 <= self.low <= 1.0 and 0.0 <= self.high <= 1.0):
            raise ValueError("low and high are fractions of q and must lie in [0, 1]")

    @property
    def name(self) -> str:
        return "iid" if self.rule == "iid" else f"adaptive:{self.rule}"

    @classmethod
    def from_file(cls, path: str | Path) -> EventModel:
        """Read ``key = value`` lines (keys: rule, low, high)."""
        values: dict[str, str] = {}
        for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected 'key = value'")
            key, val = (s.strip() for s in line.split("=", 1))
            values[key] = val
        unknown = set(values) - {"rule", "low", "high"}
        if unknown:
            raise ValueError(f"{path}: unknown keys {sorted(unknown)}")
        return cls(
            rule=values.get("rule", "after_success"),
            low=float(values.get("low", 0.5)),
            high=float(values.get("high", 1.0)),
        )

    def simulate(self, N: int, q: float, runs: int, rng: np.random.Generator) -> np.ndarray:
        """Event counts of ``runs`` independent realisations of N steps."""
        counts = np.zeros(runs, dtype=np.int64)
        last = np.zeros(runs, dtype=bool)
        hi, lo = self.high * q, self.low * q
        for step in range(N):
            if self.rule == "iid":
                prob = hi
            elif self.rule == "after_success":
                prob = np.where(last, lo, hi)
            else:
                prob = np.where(counts > q * step, lo, hi)
            last = rng.random(runs) < prob
            counts += last
        return counts


@dataclass(frozen=True)
class TailCheckReport:
    model: str
    N: int
    q: float
    m: float
    runs: int
    threshold: float
    exceed: int
    fraction: float
    ci_low: float
    ci_high: float
    bound: float
    allowance: float

    @property
    def passed(self) -> bool:
        return self.fraction <= self.allowance

    def row(self) -> dict[str, object]:
        return {
            "model": self.model,
            "N": self.N,
            "q": repr(self.q),
            "m": repr(self.m),
            "runs": self.runs,
            "threshold": repr(self.threshold),
            "exceed": self.exceed,
            "fraction": repr(self.fraction),
            "ci_low": repr(self.ci_low),
            "ci_high": repr(self.ci_high),
            "bound": repr(self.bound),
            "allowance": repr(self.allowance),
            "passed": self.passed,
        }


def empirical_tail_check(
    model: EventModel | str, N: int, q: float, m: float, runs: int, seed: int
) -> TailCheckReport:
    """Fraction of runs with at least qN + m events, against the corollary bound.

    The allowance adds three binomial standard errors at the bound,
    ``3 * sqrt(bound / runs)``, to absorb simulation noise.
    """
    if isinstance(model, str):
        model = EventModel(rule=model)
    rng = rng_stream(seed, "tail", model.name)
    counts = model.simulate(N, q, runs, rng)
    threshold = q * N + m
    # float tolerance keeps integer thresholds like 0.01 * 10**4 + 50 exact
    exceed = int(np.count_nonzero(counts >= threshold - 1e-9))
    bound = corollary_tail_bound(N, q, m)
    lo, hi = wilson_interval(exceed, runs)
    return TailCheckReport(
        model=model.name,
        N=N,
        q=q,
        m=m,
        runs=runs,
        threshold=threshold,
        exceed=exceed,
        fraction=exceed / runs,
        ci_low=lo,
        ci_high=hi,
        bound=bound,
        allowance=bound + 3.0 * math.sqrt(bound / runs),
    )
