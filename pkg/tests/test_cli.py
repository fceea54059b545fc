import io
import json
import os
from pathlib import Path

import numpy as np
import pytest

from gptembed import bell as B
from gptembed import cli
from gptembed import gpt as G
from gptembed import tomo as T

GOLDEN = Path(__file__).parent / "golden"
COMMANDS = [
    [], ["gpt"], ["gpt", "make"], ["gpt", "validate"],
    ["embed"], ["embed", "verify"], ["embed", "make"], ["embed", "unitalize"],
    ["simulate"], ["simulate", "holevo"], ["simulate", "multivalence"], ["simulate", "sandwich"],
    ["bell"], ["bell", "max"], ["bell", "robustness"], ["bell", "threshold"], ["bell", "device"],
    ["context"], ["context", "demo"],
    ["tomo"], ["tomo", "run"],
]


def run(argv):
    out, err = io.StringIO(), io.StringIO()
    code = cli.dispatch([str(a) for a in argv], out, err)
    return code, out.getvalue(), err.getvalue()


def ok(argv):
    code, out, err = run(argv)
    assert code == 0, err
    return json.loads(out)


def help_text(argv, capsys, monkeypatch):
    monkeypatch.setenv("COLUMNS", "80")
    code = cli.dispatch(argv + ["--help"], io.StringIO(), io.StringIO())
    assert code == 0
    return capsys.readouterr().out


@pytest.mark.parametrize("argv", COMMANDS, ids=lambda a: "-".join(a) or "top")
def test_help_matches_golden(argv, capsys, monkeypatch):
    text = help_text(argv, capsys, monkeypatch)
    path = GOLDEN / (("_".join(argv) or "top") + ".txt")
    if os.environ.get("GPTEMBED_UPDATE_GOLDEN"):
        path.write_text(text)
    assert text == path.read_text()


def test_help_lists_common_flags(capsys, monkeypatch):
    text = help_text(["simulate", "holevo"], capsys, monkeypatch)
    for flag in ("--seed", "--samples", "--plot-data", "--epsilon", "--out"):
        assert flag in text


def test_bell_threshold():
    d = ok(["bell", "threshold", "--gpt", "gbit", "--reference", "quantum"])
    assert d["bound"]["threshold"] == pytest.approx((2 - np.sqrt(2)) / 64, abs=1e-6)
    assert d["config"]["reference"] == "quantum" and d["config"]["gpt"] == "gbit"


def test_bell_max_and_plot(tmp_path):
    d = ok(["bell", "max", "--plot-data", tmp_path / "p.csv"])
    assert d["gpt_max"] == pytest.approx(1.0) and d["classical_max"] == 0.75
    lines = (tmp_path / "p.csv").read_text().splitlines()
    assert lines[0] == "a,b,x,y,p" and len(lines) == 17


def test_bell_robustness_from_file(tmp_path):
    gb = G.make_gbit()
    f = B.chsh(gb)
    W = B.bipartite_from_behaviour(B.pr_box(), gb, gb, f.effects_a, f.effects_b)
    (tmp_path / "pr.json").write_text(json.dumps(W.to_dict()))
    d = ok(["bell", "robustness", "--state", tmp_path / "pr.json"])
    assert d["robustness"] == pytest.approx(0.5, abs=1e-7)


def test_bell_device():
    assert ok(["bell", "device"])["root"] == pytest.approx(0.101416, abs=1e-5)


def test_gpt_make_round_trip(tmp_path):
    ok(["gpt", "make", "classical", "--n", "3", "--out", tmp_path / "c3.json"])
    d = ok(["gpt", "validate", tmp_path / "c3.json"])
    assert d["validation"]["ok"] and d["dim"] == 3


def test_gpt_make_plot_square(tmp_path):
    ok(["gpt", "make", "gbit", "--plot-data", tmp_path / "sq.csv"])
    assert len((tmp_path / "sq.csv").read_text().splitlines()) == 5


def test_context_demo():
    d = ok(["context", "demo"])
    assert d["A"] == pytest.approx(1.0) and d["epsilon_bound"] == pytest.approx(1 / 6)


def test_context_demo_plot_notice(tmp_path):
    code, _, err = run(["context", "demo", "--plot-data", tmp_path / "x.csv"])
    assert code == 0 and "notice" in err and not (tmp_path / "x.csv").exists()


def test_embed_make_verify_unitalize(tmp_path):
    ok(["embed", "make", "subspace-isometry", "--out", tmp_path / "e.json"])
    d = ok(["embed", "verify", tmp_path / "e.json"])
    assert d["report"]["epsilon"] <= 1e-12 and not d["report"]["unital"]
    u = ok(["embed", "unitalize", tmp_path / "e.json"])
    assert u["report"]["unital"]


def test_embed_make_spin_factor():
    d = ok(["embed", "make", "spin-factor", "--d", "3"])
    assert d["report"]["epsilon"] <= 1e-12


def test_simulate_holevo_and_multivalence(tmp_path):
    d = ok(["simulate", "holevo", "gbit", "--out", tmp_path / "s.json"])
    assert d["check"]["deviation"] <= 1e-12
    m = ok(["simulate", "multivalence", tmp_path / "s.json"])
    assert m["multivalent"] and m["dimension"] == 1


def test_simulate_sandwich_plot(tmp_path):
    d = ok(["simulate", "sandwich", "spin:2", "--lambda", "0.9", "--plot-data", tmp_path / "v.csv"])
    rows = (tmp_path / "v.csv").read_text().splitlines()
    assert d["sandwich"]["inner_ok"] and len(rows) == len(d["sandwich"]["vertices"]) + 1


def test_tomo_run(tmp_path):
    gb = G.make_gbit()
    t = T.synthesize(gb.states, B.default_measurements(gb))
    (tmp_path / "c.csv").write_text(T.table_to_csv(t))
    d = ok(["tomo", "run", "--data", tmp_path / "c.csv", "--rank", "3", "--candidate", "gbit",
            "--functional", "chsh", "--plot-data", tmp_path / "r.csv"])
    assert d["report"]["verdict"] == T.CERTIFIED
    assert (tmp_path / "r.csv").read_text().splitlines()[0] == "rank,residual"


def test_domain_error_exit_code():
    code, out, err = run(["gpt", "validate", "nosuch:3"])
    assert code == 1 and out == ""
    assert "error" in json.loads(err)


def test_missing_file_exit_code(tmp_path):
    code, _, err = run(["embed", "verify", tmp_path / "missing.json"])
    assert code == 1 and json.loads(err)["error"] == "io-error"


def test_parse_error_exit_code(tmp_path):
    (tmp_path / "bad.csv").write_text("prep,meas,outcome,count\np,m,0,-3\np,m,1,1\n")
    code, _, err = run(["tomo", "run", "--data", tmp_path / "bad.csv", "--rank", "1"])
    assert code == 1 and json.loads(err)["error"] == "parse-error"


def test_usage_error_exit_code(capsys):
    assert run(["bell", "nope"])[0] == 2
    assert run(["gpt", "make", "classical", "--n", "x"])[0] == 2


@pytest.mark.parametrize("argv", [
    ["bell", "threshold"], ["simulate", "holevo", "spin:2", "--epsilon", "0.05", "--seed", "4"],
    ["embed", "make", "spin-factor", "--d", "2", "--seed", "3"], ["context", "demo"],
])
def test_byte_identical_output(argv):
    assert run(argv)[1] == run(argv)[1]
