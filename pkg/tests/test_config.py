import tempfile
from pathlib import Path

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from orientham.config import (
    WORKERS_ENV,
    ConfigError,
    ExperimentConfig,
    dump_config,
    load_config,
    parse_config,
    save_config,
)

probability = st.floats(0, 1, allow_nan=False)
positive = st.integers(1, 10**7)
safe_text = st.text(
    alphabet=st.characters(whitelist_categories=("L", "N"), whitelist_characters="-_./:"), min_size=1, max_size=20
).filter(lambda s: s != "auto")


@st.composite
def configs(draw):
    return ExperimentConfig(
        seed=draw(st.integers(0, 2**63)),
        workers=draw(st.none() | st.integers(1, 64)),
        out=draw(st.none() | safe_text),
        plot=draw(st.none() | safe_text),
        n=draw(positive),
        p=draw(probability),
        epsilon=draw(probability),
        t=draw(st.none() | st.integers(0, 1000)),
        ell=draw(st.none() | positive),
        p_ex=draw(st.none() | probability),
        delta=draw(st.integers(0, 100)),
        runs=draw(positive),
        sigmas=draw(safe_text),
        solver_budget=draw(positive),
        dp_limit=draw(st.integers(1, 24)),
        enforce_budget=draw(st.booleans()),
        sigma=draw(safe_text),
        trials=draw(positive),
        panel_size=draw(positive),
        samples=draw(positive),
        exact=draw(st.booleans()),
        c_list=tuple(draw(st.lists(st.floats(-1e6, 1e6, allow_nan=False), min_size=1, max_size=6))),
        budget=draw(positive),
        model=draw(safe_text),
        N=draw(positive),
        q=draw(probability),
        m=draw(st.floats(0, 1e6, allow_nan=False)),
    )


@given(configs())
def test_round_trip(cfg):
    assert parse_config(dump_config(cfg)) == cfg


@settings(max_examples=100)
@given(configs())
def test_round_trip_through_files(cfg):
    with tempfile.TemporaryDirectory() as tmp:
        path = Path(tmp) / "c.cfg"
        save_config(cfg, path)
        assert load_config(path) == cfg
        save_config(load_config(path), path)
        assert path.read_text() == dump_config(cfg)


def test_minimal_config_fills_defaults():
    cfg = parse_config("n = 64\np = 0.3\n")
    assert cfg.n == 64 and cfg.p == 0.3
    assert cfg.epsilon == ExperimentConfig().epsilon and cfg.t is None


def test_probability_out_of_range_names_field():
    with pytest.raises(ConfigError, match="p = 1.5"):
        parse_config("p = 1.5")


@pytest.mark.parametrize(
    "text, needle",
    [
        ("n = 3\nnonsense\n", ":2:"),
        ("colour = red\n", "unknown key"),
        ("n = 3\nn = 4\n", "duplicate"),
        ("n = three\n", ":1: n"),
        ("exact = maybe\n", "exact"),
        ("n = 0\n", "n = 0"),
        ("delta = -1\n", "delta"),
    ],
)
def test_parse_errors(text, needle):
    with pytest.raises(ConfigError, match=needle):
        parse_config(text)


def test_comments_and_auto():
    cfg = parse_config("# packing\nt = auto  # derive it\np_ex = 0.25\n")
    assert cfg.t is None and cfg.p_ex == 0.25


def test_updated_overrides_and_validates():
    cfg = ExperimentConfig().updated(n=10, p=None)
    assert cfg.n == 10 and cfg.p == ExperimentConfig().p
    with pytest.raises(ConfigError):
        cfg.updated(q=2.0)


def test_workers_env(monkeypatch):
    monkeypatch.setenv(WORKERS_ENV, "3")
    assert ExperimentConfig().resolved_workers() == 3
    assert ExperimentConfig(workers=2).resolved_workers() == 2
    monkeypatch.setenv(WORKERS_ENV, "many")
    with pytest.raises(ConfigError):
        ExperimentConfig().resolved_workers()
