import csv
import io
import json
import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import instances
from genai_forum import cli
from genai_forum.cli import RunConfig, emit_config, main, parse_config, run
from genai_forum.errors import ConfigError
from genai_forum.model import example1_instance, example2_instance

EXAMPLE1 = """\
# running example
r = 1
c_m = 0.6
c_train = 0.504
rc = exp_decay(3, 0.5, 0)
rs = linear(1, 1)
beta = 1
p1 = 1
T = 20
"""


def _write(tmp_path, text, name="run.cfg"):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


def test_parse_example1():
    cfg = parse_config(EXAMPLE1)
    assert cfg.instance == example1_instance()
    assert cfg.scheme is None


def test_infinite_beta():
    cfg = parse_config(EXAMPLE1.replace("beta = 1", "beta = inf"))
    assert math.isinf(cfg.instance.beta)


@pytest.mark.parametrize("text, code", [
    (EXAMPLE1.replace("exp_decay(3, 0.5, 0)", "exp_decay(3, 1.5, 0)"), ConfigError.INVALID_INSTANCE),
    (EXAMPLE1 + "colour = red\n", ConfigError.UNKNOWN_KEY),
    (EXAMPLE1.replace("T = 20", "T = twenty"), ConfigError.TYPE_MISMATCH),
    (EXAMPLE1.replace("T = 20", "T = 2.5"), ConfigError.TYPE_MISMATCH),
    (EXAMPLE1.replace("T = 20\n", ""), ConfigError.MISSING_KEY),
    (EXAMPLE1 + "r = 2\n", ConfigError.DUPLICATE_KEY),
    (EXAMPLE1 + "just text\n", ConfigError.SYNTAX),
    (EXAMPLE1.replace("linear(1, 1)", "cubic(1)"), ConfigError.SYNTAX),
    (EXAMPLE1.replace("p1 = 1", "p1 = 2"), ConfigError.INVALID_INSTANCE),
    (EXAMPLE1 + "scheme = cyclic:x\n", ConfigError.SYNTAX),
])
def test_parse_errors(text, code):
    with pytest.raises(ConfigError) as exc:
        parse_config(text)
    assert exc.value.code == code


def test_error_reports_line():
    with pytest.raises(ConfigError) as exc:
        parse_config(EXAMPLE1 + "colour = red\n")
    assert exc.value.line == 10 and exc.value.key == "colour"


def test_all_function_specs_parse():
    text = EXAMPLE1.replace("exp_decay(3, 0.5, 0)", "tabulated_decay(3, 2, 1; 0.5)").replace(
        "linear(1, 1)", "tabulated_network(0:1, 0.5:0.4, 1:0)")
    cfg = parse_config(text)
    assert cfg.instance.rc(5) == 0.5
    assert cfg.instance.rs(0.25) == pytest.approx(0.7)
    assert parse_config(emit_config(cfg)) == cfg


scheme_specs = st.one_of(
    st.sampled_from(["optimal:brute", "welfare-opt", "none:x0", "optimal:arms:0.01"]),
    st.integers(1, 9).map(lambda k: f"cyclic:{k}"),
    st.tuples(st.integers(1, 5), st.integers(1, 5)).map(lambda a: f"alternating:{a[0]}:{a[1]}"),
)


@given(instances(), st.none() | scheme_specs, st.none() | st.integers(1, 50),
       st.none() | st.floats(0.0, 1.0), st.none() | st.lists(st.floats(0.0, 1.0), min_size=1, max_size=5))
def test_round_trip(inst, scheme, delta, eps, p1s):
    cfg = RunConfig(instance=inst, scheme=scheme, delta=delta, eps=eps,
                    p1_values=None if p1s is None else tuple(p1s))
    text = emit_config(cfg)
    assert parse_config(text) == cfg
    assert emit_config(parse_config(text)) == text


def _rows(text):
    return list(csv.reader(io.StringIO(text)))


def test_simulate_csv(tmp_path):
    out = tmp_path / "traj.csv"
    assert main(["simulate", "--config", _write(tmp_path, EXAMPLE1), "--out", str(out)]) == 0
    rows = _rows(out.read_text())
    assert rows[0] == cli.TRAJECTORY_HEADER
    assert len(rows) == 21
    assert rows[1] == ["1", "1", "0", "3", "-0.104", "3", "-0.104", "1"]


def test_simulate_single_round(tmp_path):
    cfg = _write(tmp_path, EXAMPLE1.replace("T = 20", "T = 1"))
    out = tmp_path / "one.csv"
    assert main(["simulate", "--config", cfg, "--out", str(out)]) == 0
    assert len(_rows(out.read_text())) == 2


def test_simulate_is_deterministic(tmp_path):
    cfg = _write(tmp_path, EXAMPLE1)
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    main(["simulate", "--config", cfg, "--scheme", "cyclic:3", "--out", str(a)])
    main(["simulate", "--config", cfg, "--scheme", "cyclic:3", "--out", str(b)])
    assert a.read_bytes() == b.read_bytes()


def test_optimize_report():
    report = json.loads(run("optimize", parse_config(EXAMPLE1)))
    assert report["training_rounds"] == [1, 4, 7, 9, 12, 14, 17]
    arms_report = json.loads(run("optimize", parse_config(EXAMPLE1 + "eps = 0.01\n")))
    assert arms_report["optimality"] == "approx"


def test_cyclic_table():
    rows = _rows(run("cyclic", parse_config(EXAMPLE1 + "k_max = 3\n")))
    assert [r[0] for r in rows[1:]] == ["x^1", "x^2", "x^3", "x^2,3"]


def test_regulate_and_poa():
    rep = json.loads(run("regulate", parse_config(EXAMPLE1 + "delta = 3\n")))
    assert rep["mode"] == "crude" and rep["delta"] == 3
    rep = json.loads(run("regulate", parse_config(EXAMPLE1 + "scheme = cyclic:4\n")))
    assert rep["delta"] == 4
    strategic = EXAMPLE1.replace("beta = 1", "beta = inf").replace("c_train = 0.504", "c_train = 40")
    assert float(run("poa", parse_config(strategic))) == pytest.approx(10.0, abs=1e-4)


def test_figure1_orderings():
    rows = _rows(run("figure1", parse_config(EXAMPLE1)))
    assert rows[0] == ["round", "x0", "xr", "xw", "counterfactual"]
    last = [float(v) for v in rows[-1][1:]]
    x0, xr, xw, cf = last
    assert xw > xr > cf > x0
    crossings = [int(r[0]) for r in rows[1:] if float(r[1]) < float(r[4])]
    assert 5 <= crossings[0] <= 8


def test_figure2_clusters():
    ex2 = emit_config(RunConfig(example2_instance()))
    rows = _rows(run("figure2", parse_config(ex2 + "p1_values = 0.5, 0.6, 0.7, 0.8, 0.9, 1.0\n")))
    assert rows[0][1] == "p1=0.5"
    mid = [float(v) for v in rows[5][1:]]  # round 5
    assert max(mid[:3]) < 0.02 and min(mid[3:]) > 0.98


@pytest.mark.parametrize("argv_extra, text, code", [
    ([], EXAMPLE1 + "colour = 1\n", 2),
    (["--p-hat", "0.5", "--eps", "0.5", "--delta", "3"], EXAMPLE1, 3),
    ([], EXAMPLE1.replace("T = 20", "T = 30"), 4),
])
def test_exit_codes(tmp_path, argv_extra, text, code):
    command = "regulate" if "--p-hat" in argv_extra else "optimize"
    out = tmp_path / "never.txt"
    assert main([command, "--config", _write(tmp_path, text), "--out", str(out)] + argv_extra) == code
    assert not out.exists()


def test_convergence_exit_code(tmp_path, monkeypatch):
    from genai_forum import cyclic
    monkeypatch.setattr(cyclic, "transition_compose", lambda inst, gaps, a: 1.0 - a)
    cfg = _write(tmp_path, EXAMPLE1.replace("p1 = 1", "p1 = 0.2"))
    assert main(["cyclic", "--config", cfg, "--k-max", "2"]) == 5


def test_bad_scheme_override(tmp_path):
    assert main(["simulate", "--config", _write(tmp_path, EXAMPLE1), "--scheme", "0101"]) == 2
