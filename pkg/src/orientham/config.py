"""Flat ``key = value`` experiment configuration with typed validation."""

from __future__ import annotations

import dataclasses
import os
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Any

WORKERS_ENV = "ORIENTHAM_WORKERS"


class ConfigError(ValueError):
    """Malformed config file or an invalid value; the message names the line or field."""


@dataclass
class ExperimentConfig:
    """Every tunable of every subcommand; a subcommand reads the fields it needs.

    ``None`` means "derive the default" (written as ``auto``).
    """

    seed: int = 0
    workers: int | None = None
    out: str | None = None
    plot: str | None = None
    # digraph and packing
    n: int = 128
    p: float = 0.25
    epsilon: float = 0.5
    t: int | None = None
    ell: int | None = None
    p_ex: float | None = None
    delta: int = 0
    runs: int = 1
    sigmas: str = "mixed"
    solver_budget: int = 200_000
    dp_limit: int = 22
    enforce_budget: bool = True
    # embedding, counting, threshold
    sigma: str = "random"
    trials: int = 100
    panel_size: int = 200
    samples: int = 100_000
    exact: bool = False
    c_list: tuple[float, ...] = (-2.0, 0.0, 2.0, 4.0)
    # completion
    budget: int = 1_000_000
    # tail bounds
    model: str = "iid"
    N: int = 10_000
    q: float = 0.01
    m: float = 50.0

    def validate(self) -> ExperimentConfig:
        for name in ("p", "epsilon", "p_ex", "q"):
            v = getattr(self, name)
            if v is not None and not 0.0 <= v <= 1.0:
                raise ConfigError(f"{name} = {v!r} must lie in [0, 1]")
        for name in ("n", "runs", "trials", "samples", "solver_budget", "budget", "N", "panel_size", "dp_limit"):
            v = getattr(self, name)
            if v < 1:
                raise ConfigError(f"{name} = {v!r} must be positive")
        for name in ("t", "ell", "workers"):
            v = getattr(self, name)
            if v is not None and v < (0 if name == "t" else 1):
                raise ConfigError(f"{name} = {v!r} is out of range")
        if self.delta < 0:
            raise ConfigError(f"delta = {self.delta!r} must be >= 0")
        if self.m < 0:
            raise ConfigError(f"m = {self.m!r} must be >= 0")
        if self.seed < 0:
            raise ConfigError(f"seed = {self.seed!r} must be >= 0")
        return self

    def resolved_workers(self) -> int:
        if self.workers is not None:
            return self.workers
        env = os.environ.get(WORKERS_ENV)
        if env:
            try:
                return max(1, int(env))
            except ValueError as exc:
                raise ConfigError(f"{WORKERS_ENV} = {env!r} is not an integer") from exc
        return os.cpu_count() or 1

    def updated(self, **changes: Any) -> ExperimentConfig:
        """Copy with the non-None ``changes`` applied (CLI flags over file values)."""
        return dataclasses.replace(self, **{k: v for k, v in changes.items() if v is not None}).validate()

    def as_dict(self) -> dict[str, Any]:
        return {f.name: getattr(self, f.name) for f in fields(self)}


_FIELDS = {f.name: f for f in fields(ExperimentConfig)}


def _kind(name: str) -> str:
    t = str(_FIELDS[name].type)
    for kind in ("tuple", "bool", "float", "int", "str"):
        if kind in t:
            return kind
    raise AssertionError(t)  # pragma: no cover


def _optional(name: str) -> bool:
    return "None" in str(_FIELDS[name].type)


def _format(name: str, value: Any) -> str:
    if value is None:
        return "auto"
    kind = _kind(name)
    if kind == "tuple":
        return ", ".join(repr(float(x)) for x in value)
    if kind == "bool":
        return "true" if value else "false"
    if kind == "float":
        return repr(float(value))
    return str(value)


def _parse(name: str, text: str) -> Any:
    if text == "auto" and _optional(name):
        return None
    kind = _kind(name)
    try:
        if kind == "tuple":
            return tuple(float(x) for x in text.split(",") if x.strip())
        if kind == "bool":
            low = text.lower()
            if low not in {"true", "false", "1", "0", "yes", "no"}:
                raise ValueError(text)
            return low in {"true", "1", "yes"}
        if kind == "float":
            return float(text)
        if kind == "int":
            return int(text)
    except ValueError as exc:
        raise ConfigError(f"{name}: cannot parse {text!r} as {kind}") from exc
    if any(c in text for c in "#\n"):
        raise ConfigError(f"{name}: value may not contain '#' or newlines")
    return text


def parse_config(text: str, source: str = "<config>") -> ExperimentConfig:
    values: dict[str, Any] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value', got {raw.strip()!r}")
        key, val = (s.strip() for s in line.split("=", 1))
        if key not in _FIELDS:
            raise ConfigError(f"{source}:{lineno}: unknown key {key!r}")
        if key in values:
            raise ConfigError(f"{source}:{lineno}: duplicate key {key!r}")
        try:
            values[key] = _parse(key, val)
        except ConfigError as exc:
            raise ConfigError(f"{source}:{lineno}: {exc}") from exc
    return ExperimentConfig(**values).validate()


def dump_config(cfg: ExperimentConfig) -> str:
    return "".join(f"{name} = {_format(name, getattr(cfg, name))}\n" for name in _FIELDS)


def load_config(path: str | Path) -> ExperimentConfig:
    path = Path(path)
    return parse_config(path.read_text(), source=str(path))


def save_config(cfg: ExperimentConfig, path: str | Path) -> None:
    Path(path).write_text(dump_config(cfg))


__all__ = [
    "ConfigError",
    "ExperimentConfig",
    "WORKERS_ENV",
    "dump_config",
    "load_config",
    "parse_config",
    "save_config",
]
