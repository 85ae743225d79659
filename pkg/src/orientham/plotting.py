"""Figures for the CLI report path. Every function writes one PNG and returns its path."""

from __future__ import annotations

from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402


def _save(fig, path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.tight_layout()
    # fixed metadata keeps repeated renders byte-identical
    fig.savefig(path, dpi=100, metadata={"Software": None})
    plt.close(fig)
    return path


def plot_threshold(points: Sequence, n: int, path: str | Path) -> Path:
    """Existence probability against c with Wilson error bars."""
    fig, ax = plt.subplots(figsize=(5, 3.5))
    cs = [pt.c for pt in points]
    probs = [pt.probability for pt in points]
    lo = [max(0.0, pt.probability - pt.ci[0]) for pt in points]
    hi = [max(0.0, pt.ci[1] - pt.probability) for pt in points]
    ax.errorbar(cs, probs, yerr=[lo, hi], marker="o", capsize=3)
    ax.set_xlabel("c  (p = (ln n + c) / n)")
    ax.set_ylabel("Pr[copy exists]")
    ax.set_ylim(-0.02, 1.02)
    ax.set_title(f"n = {n}")
    return _save(fig, path)


def plot_tail(rows: Sequence[dict], path: str | Path) -> Path:
    """Empirical tail fraction against the bound, one marker per (model, m) cell."""
    fig, ax = plt.subplots(figsize=(5, 3.5))
    models = sorted({r["model"] for r in rows})
    for model in models:
        sub = [r for r in rows if r["model"] == model]
        ms = [float(r["m"]) for r in sub]
        ax.semilogy(ms, [max(float(r["fraction"]), 1e-6) for r in sub], "o-", label=f"{model} empirical")
    first = [r for r in rows if r["model"] == models[0]]
    ax.semilogy([float(r["m"]) for r in first], [float(r["bound"]) for r in first], "k--", label="bound")
    ax.set_xlabel("m")
    ax.set_ylabel("Pr[count >= qN + m]")
    ax.legend(fontsize=7)
    return _save(fig, path)


def plot_embed(rows: Sequence[dict], path: str | Path) -> Path:
    """Histogram of exposures per embedding run."""
    fig, ax = plt.subplots(figsize=(5, 3.5))
    ax.hist([int(r["exposures"]) for r in rows], bins=30)
    ax.set_xlabel("exposures per run")
    ax.set_ylabel("runs")
    return _save(fig, path)


def plot_count(estimate: float, std_error: float, exact: int | None, formula: float, path: str | Path) -> Path:
    """Estimate with a 3-standard-error bar next to the exact count and the expectation."""
    fig, ax = plt.subplots(figsize=(4, 3.5))
    labels, values = ["estimate"], [estimate]
    if exact is not None:
        labels.append("exact")
        values.append(exact)
    labels.append("E[count]")
    values.append(formula)
    ax.bar(labels, values, color=["C0", "C1", "C2"][: len(values)])
    ax.errorbar([0], [estimate], yerr=[3 * std_error], color="k", capsize=4)
    ax.set_ylabel("copies")
    return _save(fig, path)


def plot_pack(records: Sequence[dict], path: str | Path) -> Path:
    """Per-run ledger maxima against their bounds."""
    fig, ax = plt.subplots(figsize=(5, 3.5))
    runs = [r["run"] for r in records]
    ax.plot(runs, [r["max_x"] for r in records], "o", label="max X")
    ax.plot(runs, [r["max_y"] for r in records], "s", label="max Y")
    if records:
        ax.axhline(records[0]["x_budget"], color="C0", ls="--", label="X budget")
        ax.axhline(records[0]["y_bound"], color="C1", ls=":", label="Y bound")
    ax.set_xlabel("run")
    ax.legend(fontsize=7)
    return _save(fig, path)
