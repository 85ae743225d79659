import json
import subprocess
import sys

import pytest

from orientham.cli import run
from orientham.graphcore import Digraph, Orientation, OrientedCycle
from orientham.records import read_csv, read_jsonl, strip_timing


def test_gen_complete(tmp_path, capsys):
    out = tmp_path / "g.txt"
    assert run(["gen", "--n", "10", "--p", "1", "--seed", "7", "--out", str(out)]) == 0
    D = Digraph.load(out)
    assert D.n == 10 and D.num_edges == 90


def test_gen_to_stdout(capsys):
    assert run(["gen", "--n", "5", "--p", "0", "--seed", "1"]) == 0
    assert capsys.readouterr().out == "5 0\n"


@pytest.mark.parametrize(
    "argv",
    [
        ["gen", "--n", "10", "--p", "1.5"],
        ["gen", "--bogus"],
        ["frobnicate"],
        [],
        ["count", "--n", "12", "--exact"],
        ["pack", "--sigmas", "zigzag"],
        ["pack", "--t", "many"],
        ["embed", "--n", "50", "--p-ex", "0.3"],
        ["threshold", "--n", "30"],
        ["bound-check", "--model", "weird"],
        ["acceptance", "--only", "12"],
    ],
)
def test_usage_errors_exit_2(argv, capsys):
    assert run(argv) == 2
    assert capsys.readouterr().err


def test_help_exits_0(capsys):
    assert run(["pack", "--help"]) == 0
    assert "--sigmas" in capsys.readouterr().out


def test_malformed_config_exit_2(tmp_path, capsys):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("n = 10\np 0.5\n")
    assert run(["gen", "--config", str(cfg)]) == 2
    assert ":2:" in capsys.readouterr().err


def test_config_file_with_flag_override(tmp_path):
    cfg = tmp_path / "c.cfg"
    cfg.write_text("n = 8\np = 1.0\nseed = 3\n")
    out = tmp_path / "g.txt"
    assert run(["gen", "--config", str(cfg), "--n", "6", "--out", str(out)]) == 0
    assert Digraph.load(out).num_edges == 30


def test_pack_t_zero_empty_success(tmp_path):
    out = tmp_path / "p.jsonl"
    assert run(["pack", "--n", "30", "--p", "0.9", "--t", "0", "--sigmas", "random", "--seed", "0", "--out", str(out)]) == 0
    (rec,) = read_jsonl(out)
    assert rec["success"] and rec["cycles"] == []


def test_pack_success_and_failure_codes(tmp_path):
    ok = tmp_path / "ok.jsonl"
    argv = ["pack", "--n", "40", "--p", "0.9", "--t", "1", "--sigmas", "random", "--runs", "2", "--out", str(ok), "--plot", str(tmp_path / "ok.png")]
    assert run(argv) == 0
    recs = read_jsonl(ok)
    assert all(r["success"] and r["verified"] for r in recs)
    assert len(recs[0]["cycles"][0]) == 40
    assert (tmp_path / "ok.png").exists()
    bad = tmp_path / "bad.jsonl"
    assert run(["pack", "--n", "128", "--p", "0.25", "--epsilon", "0.5", "--sigmas", "mixed", "--out", str(bad)]) == 1
    assert read_jsonl(bad)[0]["failure_stage"] == "stage1"


def test_pack_sigmas_file(tmp_path):
    sig = tmp_path / "s.txt"
    sig.write_text("+" * 40 + "\n" + "+-" * 20 + "\n")
    out = tmp_path / "p.jsonl"
    assert run(["pack", "--n", "40", "--p", "0.9", "--t", "1", "--sigmas", str(sig), "--out", str(out)]) == 0
    assert read_jsonl(out)[0]["sigmas"] == ["+" * 40]


def test_pack_reproducible_modulo_timing(tmp_path):
    a, b = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
    for path in (a, b):
        run(["pack", "--n", "40", "--p", "0.9", "--t", "1", "--sigmas", "mixed", "--runs", "2", "--seed", "4", "--out", str(path)])
    assert [strip_timing(r) for r in read_jsonl(a)] == [strip_timing(r) for r in read_jsonl(b)]
    assert "timing" in read_jsonl(a)[0]


def test_complete_prints_path_or_none(tmp_path, capsys):
    sigma = Orientation("++-+-+")
    C = OrientedCycle.canonical(sigma)
    g = tmp_path / "c.txt"
    Digraph.from_edges(6, C.edges()).save(g)
    assert run(["complete", "--graph", str(g), "--a", "0", "--b", "5", "--sigma", "++-+-", "--seed", "0"]) == 0
    assert capsys.readouterr().out.split() == ["0", "1", "2", "3", "4", "5"]
    assert run(["complete", "--graph", str(g), "--a", "0", "--b", "5", "--sigma", "+++++", "--seed", "0"]) == 1
    assert capsys.readouterr().out.strip() == "NONE"
    assert run(["complete", "--graph", str(g), "--a", "0", "--b", "9", "--sigma", "+++++", "--seed", "0"]) == 2


def test_count_csv(tmp_path):
    out = tmp_path / "c.csv"
    assert run(["count", "--n", "5", "--p", "1", "--sigma", "consistent", "--samples", "1000", "--seed", "0", "--exact", "--out", str(out)]) == 0
    (row,) = read_csv(out)
    assert float(row["estimate"]) == pytest.approx(24.0)
    assert row["exact"] == "24" and float(row["formula"]) == pytest.approx(24.0)
    meta = json.loads((tmp_path / "c.csv.meta.json").read_text())
    assert meta["config"]["n"] == 5 and "timing" in meta


def test_threshold_csv_and_plot(tmp_path):
    out = tmp_path / "t.csv"
    png = tmp_path / "t.png"
    assert run(["threshold", "--n", "10", "--c-list=-2,0,2", "--trials", "20", "--seed", "1", "--out", str(out), "--plot", str(png)]) == 0
    rows = read_csv(out)
    assert [float(r["c"]) for r in rows] == [-2.0, 0.0, 2.0]
    assert png.stat().st_size > 0


def test_bound_check_models(tmp_path):
    out = tmp_path / "b.csv"
    assert run(["bound-check", "--model", "iid", "--N", "1000", "--q", "0.01", "--m", "10", "--runs", "500", "--seed", "0", "--out", str(out)]) == 0
    assert read_csv(out)[0]["passed"] == "True"
    model = tmp_path / "m.txt"
    model.write_text("rule = after_success\nlow = 0.5\n")
    assert run(["bound-check", "--model", f"adaptive:{model}", "--N", "1000", "--q", "0.01", "--m", "10", "--runs", "500", "--seed", "0", "--out", str(out)]) == 0
    assert read_csv(out)[0]["model"] == "adaptive:after_success"


def test_embed_csv_columns(tmp_path):
    out = tmp_path / "e.csv"
    argv = ["embed", "--n", "60", "--p-ex", "0.3", "--ell", "40", "--delta", "2", "--sigma", "random", "--trials", "10", "--seed", "0", "--out", str(out)]
    assert run(argv) == 0
    rows = read_csv(out)
    assert list(rows[0]) == ["trial", "result", "rounds", "exposures", "failed_round"]
    first = out.read_bytes()
    assert run(argv) == 0
    assert out.read_bytes() == first


def test_acceptance_subset(tmp_path, capsys):
    assert run(["acceptance", "--only", "7,9", "--outdir", str(tmp_path), "--plot", str(tmp_path / "fig")]) == 0
    out = capsys.readouterr().out
    assert "[PASS] 7." in out and "[PASS] 9." in out
    assert (tmp_path / "fig" / "tail.png").exists() and (tmp_path / "fig" / "threshold.png").exists()


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "orientham", "gen", "--n", "4", "--p", "1", "--seed", "0"], capture_output=True, text=True)
    assert res.returncode == 0 and res.stdout.startswith("4 12")
