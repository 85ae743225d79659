"""Command-line entry point.

Exit codes: 0 success, 1 algorithmic failure (a packing run failed, no
completing path, a tail check or acceptance criterion failed), 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from functools import partial
from pathlib import Path
from typing import Sequence

from . import plotting
from .acceptance import REPRODUCIBLE, determinism, pack_record, run_all, threshold_sanity
from .complete import CompletionInstance, TooLargeError, solve_completion
from .config import ConfigError, ExperimentConfig, load_config
from .count import BRUTE_CAP, cycle_copies_report, threshold_probe
from .embed import EmbedParams, estimate_event_probs
from .graphcore import Digraph, MalformedInputError, Orientation
from .pack import orientation_suite
from .randgen import derive_seed, rng_stream, sample_deficient_host, sample_dnp
from .records import Stopwatch, parallel_map, write_csv, write_jsonl, write_meta
from .stats import EventModel, empirical_tail_check

class UsageError(Exception):
    """Bad arguments that argparse itself cannot detect."""


# ---------------------------------------------------------------------------
# argument parsing

def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="key = value config file; flags override its values")
    p.add_argument("--seed", type=int, help="master seed")
    p.add_argument("--workers", type=int, help="worker processes (default: $ORIENTHAM_WORKERS or all cores)")
    p.add_argument("--out", help="output path")
    p.add_argument("--plot", help="also render a PNG figure to this path")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="orientham", description="Oriented Hamilton cycles in random digraphs.")
    parser.add_argument("--log-level", default="WARNING", choices=["DEBUG", "INFO", "WARNING", "ERROR"])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="sample D(n, p) and write it in the text format")
    _common(p)
    p.add_argument("--n", type=int)
    p.add_argument("--p", type=float)

    p = sub.add_parser("embed", help="estimate the path-embedding event probabilities")
    _common(p)
    p.add_argument("--n", type=int)
    p.add_argument("--p-ex", dest="p_ex", type=float)
    p.add_argument("--ell", type=int)
    p.add_argument("--delta", type=int)
    p.add_argument("--sigma", help="orientation file, a literal sign string, or 'random'")
    p.add_argument("--trials", type=int)
    p.add_argument("--panel-size", dest="panel_size", type=int)

    p = sub.add_parser("pack", help="pack oriented Hamilton cycles into D(n, p)")
    _common(p)
    p.add_argument("--n", type=int)
    p.add_argument("--p", type=float)
    p.add_argument("--epsilon", type=float)
    p.add_argument("--t", help="number of cycles or 'auto' for floor((1 - eps) n p)")
    p.add_argument("--sigmas", help="file with one orientation per line, or random|consistent|antidirected|mixed")
    p.add_argument("--runs", type=int)
    p.add_argument("--ell", type=int)
    p.add_argument("--p-ex", dest="p_ex", type=float)
    p.add_argument("--solver-budget", dest="solver_budget", type=int)
    p.add_argument("--no-budget", dest="enforce_budget", action="store_false", default=None,
                   help="record exposure-budget breaches instead of aborting")

    p = sub.add_parser("count", help="estimate the number of copies of an oriented Hamilton cycle")
    _common(p)
    p.add_argument("--n", type=int)
    p.add_argument("--p", type=float)
    p.add_argument("--sigma", help="orientation file, a literal sign string, random or consistent")
    p.add_argument("--samples", type=int)
    p.add_argument("--exact", action="store_true", default=None, help=f"also brute-force the count (n <= {BRUTE_CAP})")

    p = sub.add_parser("complete", help="find a spanning oriented path between two vertices")
    _common(p)
    p.add_argument("--graph", required=True, help="digraph in the text format")
    p.add_argument("--a", type=int, required=True)
    p.add_argument("--b", type=int, required=True)
    p.add_argument("--sigma", required=True, help="orientation of length n - 1")
    p.add_argument("--budget", type=int)

    p = sub.add_parser("threshold", help="existence probability at p = (ln n + c) / n")
    _common(p)
    p.add_argument("--n", type=int)
    p.add_argument("--c-list", dest="c_list", help="comma-separated values of c")
    p.add_argument("--trials", type=int)
    p.add_argument("--sigma", help="orientation file, a literal sign string, random or consistent")

    p = sub.add_parser("bound-check", help="empirical tail frequency against the concentration bound")
    _common(p)
    p.add_argument("--model", help="'iid' or 'adaptive:<file>' (file: rule/low/high lines)")
    p.add_argument("--N", type=int)
    p.add_argument("--q", type=float)
    p.add_argument("--m", type=float)
    p.add_argument("--runs", type=int)

    p = sub.add_parser("acceptance", help="run the acceptance suite and print a pass/fail table")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--outdir", default="acceptance_out")
    p.add_argument("--only", help="comma-separated criterion numbers")
    p.add_argument("--plot", help="directory for the threshold and tail figures")
    return parser


_CONFIG_KEYS = set(ExperimentConfig.__dataclass_fields__)


def _config(args: argparse.Namespace) -> ExperimentConfig:
    cfg = load_config(args.config) if getattr(args, "config", None) else ExperimentConfig()
    changes = {k: v for k, v in vars(args).items() if k in _CONFIG_KEYS}
    if isinstance(changes.get("t"), str):
        changes["t"] = None if changes["t"] == "auto" else _int(changes["t"], "t")
    if isinstance(changes.get("c_list"), str):
        try:
            changes["c_list"] = tuple(float(x) for x in changes["c_list"].split(",") if x.strip())
        except ValueError as exc:
            raise UsageError(f"--c-list: {exc}") from exc
    return cfg.updated(**changes)


def _int(text: str, name: str) -> int:
    try:
        return int(text)
    except ValueError as exc:
        raise UsageError(f"--{name} expects an integer or 'auto', got {text!r}") from exc


def _orientation(spec: str, length: int, seed: int, stream: str) -> Orientation:
    """Resolve an orientation argument: a file, a literal sign string, random or consistent."""
    if spec == "random":
        return Orientation.random(length, rng_stream(seed, stream))
    if spec == "consistent":
        return Orientation.consistent(length)
    if spec == "antidirected":
        return Orientation.antidirected(length)
    path = Path(spec)
    text = path.read_text() if path.is_file() else spec
    sigma = Orientation.parse(text)
    if len(sigma) != length:
        raise UsageError(f"orientation has length {len(sigma)}, expected {length}")
    return sigma


def _emit(path: str | None, text: str) -> None:
    if path:
        Path(path).write_text(text)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------------------
# subcommands

def cmd_gen(args: argparse.Namespace) -> int:
    cfg = _config(args)
    D = sample_dnp(cfg.n, cfg.p, cfg.seed, "gen")
    _emit(cfg.out, D.to_text())
    if cfg.out:
        print(f"wrote {D.n} vertices, {D.num_edges} edges to {cfg.out}", file=sys.stderr)
    return 0


def cmd_embed(args: argparse.Namespace) -> int:
    cfg = _config(args)
    if cfg.ell is None:
        raise UsageError("embed needs --ell")
    if cfg.p_ex is None or cfg.p_ex <= 0:
        raise UsageError("embed needs --p-ex > 0")
    if cfg.n - cfg.ell - cfg.delta <= 0:
        raise UsageError("need n - ell - delta > 0")
    sigma = _orientation(cfg.sigma, cfg.ell - 1, cfg.seed, "embed-sigma")
    with Stopwatch() as sw:
        D = sample_deficient_host(cfg.n, cfg.delta, cfg.seed, "embed-host")
        tab = estimate_event_probs(D, EmbedParams(cfg.ell, cfg.p_ex, sigma), cfg.trials, cfg.seed, cfg.panel_size)
    summary = {
        "pr_fail": tab.pr_fail,
        "max_pr_exposed": tab.max_pr_exposed,
        "exposed_bound": tab.exposed_bound,
        "max_pr_avoid": tab.max_pr_avoid,
        "avoid_bound": tab.avoid_bound,
    }
    fields = ["trial", "result", "rounds", "exposures", "failed_round"]
    write_csv(cfg.out, tab.rows, fields)
    if cfg.out:
        write_meta(cfg.out, cfg, "embed", sw.seconds, summary)
    if cfg.plot:
        plotting.plot_embed(tab.rows, cfg.plot)
    print(json.dumps(summary, sort_keys=True), file=sys.stderr)
    return 0


def _pack_job(job: tuple, cfg: ExperimentConfig) -> dict:
    run, run_seed, sigmas = job
    overrides = {"solver_budget": cfg.solver_budget, "dp_limit": cfg.dp_limit}
    if cfg.ell is not None:
        overrides["ell"] = cfg.ell
    if cfg.p_ex is not None:
        overrides["p_ex"] = cfg.p_ex
    return pack_record(run, run_seed, sigmas, cfg.n, cfg.p, cfg.epsilon, cfg.enforce_budget, **overrides)


def cmd_pack(args: argparse.Namespace) -> int:
    cfg = _config(args)
    logging.getLogger("orientham.pack").setLevel(logging.ERROR)
    fixed: list[Orientation] | None = None
    path = Path(cfg.sigmas)
    if path.is_file():
        fixed = [Orientation.parse(line) for line in path.read_text().splitlines() if line.strip()]
        t = len(fixed) if cfg.t is None else cfg.t
        if t > len(fixed):
            raise UsageError(f"--t {t} exceeds the {len(fixed)} orientations in {path}")
        fixed = fixed[:t]
        if any(len(s) != cfg.n for s in fixed):
            raise UsageError(f"every orientation in {path} must have length n = {cfg.n}")
    elif cfg.sigmas in {"random", "consistent", "antidirected", "mixed"}:
        t = math.floor((1 - cfg.epsilon) * cfg.n * cfg.p + 1e-9) if cfg.t is None else cfg.t
    else:
        raise UsageError(f"--sigmas must be a file or one of random|consistent|antidirected|mixed, got {cfg.sigmas!r}")
    jobs = []
    for r in range(cfg.runs):
        run_seed = derive_seed(cfg.seed, "pack-run", r)
        sigmas = fixed if fixed is not None else orientation_suite(cfg.sigmas, cfg.n, t, run_seed)
        jobs.append((r, run_seed, sigmas))
    with Stopwatch() as sw:
        records = parallel_map(partial(_pack_job, cfg=cfg), jobs, cfg.resolved_workers())
    if cfg.out:
        write_jsonl(cfg.out, records)
        write_meta(cfg.out, cfg, "pack", sw.seconds, {"runs": len(records), "successes": sum(r["success"] for r in records)})
    else:
        for rec in records:
            print(json.dumps(rec, sort_keys=True))
    if cfg.plot and t > 0:
        plotting.plot_pack([r for r in records if r["max_x"] is not None], cfg.plot)
    ok = sum(r["success"] and r["verified"] for r in records)
    print(f"{ok}/{len(records)} runs succeeded", file=sys.stderr)
    return 0 if ok == len(records) else 1


def cmd_count(args: argparse.Namespace) -> int:
    cfg = _config(args)
    if cfg.n < 3:
        raise UsageError("count needs n >= 3")
    if cfg.exact and cfg.n > BRUTE_CAP:
        raise UsageError(f"--exact needs n <= {BRUTE_CAP}")
    sigma = _orientation(cfg.sigma, cfg.n, cfg.seed, "count-sigma")
    D = sample_dnp(cfg.n, cfg.p, cfg.seed, "count-graph")
    with Stopwatch() as sw:
        rep = cycle_copies_report(D, sigma, cfg.p, cfg.samples, cfg.seed, cfg.exact)
    row = {
        "n": cfg.n,
        "p": repr(cfg.p),
        "sigma": sigma.signs,
        "samples": cfg.samples,
        "estimate": repr(rep.estimate),
        "stderr": repr(rep.std_error),
        "exact": "" if rep.exact is None else rep.exact,
        "formula": repr(rep.expectation_formula),
    }
    write_csv(cfg.out, [row])
    if cfg.out:
        write_meta(cfg.out, cfg, "count", sw.seconds, {"estimate": rep.estimate, "exact": rep.exact})
    if cfg.plot:
        plotting.plot_count(rep.estimate, rep.std_error, rep.exact, rep.expectation_formula, cfg.plot)
    return 0


def cmd_complete(args: argparse.Namespace) -> int:
    cfg = _config(args)
    D = Digraph.load(args.graph)
    sigma = Orientation.parse(args.sigma)
    for name, v in (("a", args.a), ("b", args.b)):
        if not 0 <= v < D.n:
            raise UsageError(f"--{name} {v} is not a vertex of the {D.n}-vertex digraph")
    try:
        inst = CompletionInstance(D, args.a, args.b, sigma)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    path = solve_completion(inst, cfg.budget, cfg.seed, dp_limit=cfg.dp_limit)
    if path is None:
        print("NONE")
        return 1
    print(" ".join(map(str, path.vertices)))
    return 0


def cmd_threshold(args: argparse.Namespace) -> int:
    cfg = _config(args)
    if cfg.n < 3:
        raise UsageError("threshold needs n >= 3")
    sigma = _orientation(cfg.sigma, cfg.n, cfg.seed, "threshold-sigma")
    with Stopwatch() as sw:
        points = threshold_probe(cfg.n, list(cfg.c_list), sigma, cfg.trials, cfg.seed)
    rows = [
        {
            "c": repr(pt.c),
            "p": repr(pt.p),
            "trials": pt.trials,
            "hits": pt.hits,
            "probability": repr(pt.probability),
            "ci_low": repr(pt.ci[0]),
            "ci_high": repr(pt.ci[1]),
        }
        for pt in points
    ]
    write_csv(cfg.out, rows)
    if cfg.out:
        write_meta(cfg.out, cfg, "threshold", sw.seconds, {"sigma": sigma.signs})
    if cfg.plot:
        plotting.plot_threshold(points, cfg.n, cfg.plot)
    return 0


def cmd_bound_check(args: argparse.Namespace) -> int:
    cfg = _config(args)
    if cfg.model == "iid":
        model = EventModel("iid")
    elif cfg.model.startswith("adaptive:"):
        model = EventModel.from_file(cfg.model.split(":", 1)[1])
    else:
        raise UsageError(f"--model must be 'iid' or 'adaptive:<file>', got {cfg.model!r}")
    with Stopwatch() as sw:
        rep = empirical_tail_check(model, cfg.N, cfg.q, cfg.m, cfg.runs, cfg.seed)
    row = rep.row()
    write_csv(cfg.out, [row])
    if cfg.out:
        write_meta(cfg.out, cfg, "bound-check", sw.seconds, {"passed": rep.passed})
    if cfg.plot:
        plotting.plot_tail([row], cfg.plot)
    return 0 if rep.passed else 1


def cmd_acceptance(args: argparse.Namespace) -> int:
    outdir = Path(args.outdir)
    if args.only:
        try:
            wanted = {int(x) for x in args.only.split(",")}
        except ValueError as exc:
            raise UsageError(f"--only: {exc}") from exc
        if not wanted <= set(range(1, 10)):
            raise UsageError("criteria are numbered 1-9")
        outdir.mkdir(parents=True, exist_ok=True)
        results = []
        for num in sorted(wanted):
            if num <= len(REPRODUCIBLE):
                res = REPRODUCIBLE[num - 1](outdir, args.seed)
            elif num == 8:
                res = determinism(outdir, args.seed)
            else:
                res = threshold_sanity(outdir, args.seed)
            print(res.line(), flush=True)
            results.append(res)
    else:
        results = run_all(outdir, args.seed, report=lambda line: print(line, flush=True))
    if args.plot:
        _acceptance_figures(outdir, Path(args.plot))
    passed = sum(r.passed for r in results)
    print(f"{passed}/{len(results)} criteria passed")
    return 0 if passed == len(results) else 1


def _acceptance_figures(outdir: Path, plotdir: Path) -> None:
    from .records import read_csv

    tail = outdir / "acc7_tail.csv"
    if tail.exists():
        plotting.plot_tail(read_csv(tail), plotdir / "tail.png")
    thr = outdir / "acc9_threshold.csv"
    if thr.exists():
        from .count import ThresholdPoint

        pts = [ThresholdPoint(float(r["c"]), float(r["p"]), int(r["hits"]), int(r["trials"])) for r in read_csv(thr)]
        plotting.plot_threshold(pts, 16, plotdir / "threshold.png")


COMMANDS = {
    "gen": cmd_gen,
    "embed": cmd_embed,
    "pack": cmd_pack,
    "count": cmd_count,
    "complete": cmd_complete,
    "threshold": cmd_threshold,
    "bound-check": cmd_bound_check,
    "acceptance": cmd_acceptance,
}


def run(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=args.log_level, format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except (UsageError, ConfigError, MalformedInputError, TooLargeError, FileNotFoundError) as exc:
        print(f"orientham {args.command}: error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        # remaining ValueErrors come from precondition checks on the arguments
        print(f"orientham {args.command}: error: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(run())
