import json
import os
import subprocess
import sys

import pytest

from oddform.cli import main
from oddform.config import ScenarioConfig, case_rng, preset_config
from oddform.errors import MalformedSpec

F2 = {"ring": {"kind": "modular", "m": 2}, "involution": "identity", "lambda": "1", "mu": "1", "n": 3}
Z4 = {"ring": {"kind": "modular", "m": 4}, "involution": "identity", "lambda": "1", "mu": "2", "n": 3}
G3 = {"ring": {"kind": "gaussian_modular", "m": 3}, "involution": "gaussian_conjugation",
      "lambda": "1", "mu": "1", "n": 3}


@pytest.fixture
def write(tmp_path):
    def _write(d, name="cfg.json"):
        p = tmp_path / name
        p.write_text(json.dumps(d))
        return str(p)
    return _write


def run(argv, capsys):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_config_round_trip():
    cfg = ScenarioConfig.from_dict({**Z4, "ideal": {"gens": ["2"]}, "seed": 5, "suite": {"k": 2}})
    again = ScenarioConfig.loads(cfg.dumps())
    assert again == cfg
    assert again.to_dict()["lambda"] == "1"
    assert preset_config("F2").ring == F2


@pytest.mark.parametrize("bad", [
    {k: v for k, v in F2.items() if k != "mu"},
    {**F2, "colour": "red"},
    {**F2, "seed": -1},
    {**F2, "seed": 2 ** 64},
    [1, 2],
])
def test_config_rejects_malformed(bad):
    with pytest.raises(MalformedSpec):
        ScenarioConfig.from_dict(bad)


def test_case_rng_is_counter_based():
    a = case_rng(3, "relations.S1", 7).integers(0, 1 << 30, size=4)
    b = case_rng(3, "relations.S1", 7).integers(0, 1 << 30, size=4)
    c = case_rng(3, "relations.S2", 7).integers(0, 1 << 30, size=4)
    d = case_rng(3, "relations.S1", 8).integers(0, 1 << 30, size=4)
    assert (a == b).all() and not (a == c).all() and not (a == d).all()


def test_validate_exit_codes(write, capsys):
    code, out, err = run(["validate", "--config", write(F2)], capsys)
    assert code == 0
    rep = json.loads(out)
    assert rep["counts"]["fail"] == 0 and "passed" in err
    bad = {**Z4, "lambda": "3", "mu": "1"}
    code, out, _ = run(["validate", "--config", write(bad)], capsys)
    assert code == 1
    assert json.loads(out)["findings"]
    code, _, err = run(["validate", "--config", write({k: v for k, v in F2.items() if k != "mu"})], capsys)
    assert code == 2 and "invalid input" in err
    code, _, _ = run(["validate", "--config", "/nonexistent/cfg.json"], capsys)
    assert code == 2


def test_validate_ideal_operations(write, capsys):
    cfg = {**Z4, "ideal": {"gens": ["2"]}, "suite": {"power": 2, "star": ["2"], "colon": ["2"]}}
    code, out, _ = run(["validate", "--config", write(cfg)], capsys)
    assert code == 0
    assert "ideal_operations" in json.loads(out)["result"]


def test_relations_report_and_out_file(write, tmp_path, capsys):
    out_path = tmp_path / "rep.json"
    code, out, _ = run(["relations", "--config", write(F2), "--exhaustive", "--out", str(out_path)], capsys)
    assert code == 0 and out == ""
    rep = json.loads(out_path.read_text())
    assert rep["suite"] == "relations" and rep["seed"] == 0
    assert "wall_time" not in rep


def test_timing_flag(write, capsys):
    code, out, _ = run(["relations", "--config", write(F2), "--samples", "5", "--timing"], capsys)
    assert code == 0
    assert "wall_time" in json.loads(out)


def test_samples_and_exhaustive_exclusive(write, capsys):
    with pytest.raises(SystemExit):
        main(["relations", "--config", write(F2), "--samples", "5", "--exhaustive"])
    code, _, _ = run(["relations", "--config", write(F2), "--samples", "0"], capsys)
    assert code == 2


def test_seeded_runs_are_reproducible(write, capsys):
    p = write({**G3, "seed": 42})
    _, a, _ = run(["relations", "--config", p, "--samples", "50"], capsys)
    _, b, _ = run(["relations", "--config", p, "--samples", "50"], capsys)
    _, c, _ = run(["relations", "--config", p, "--samples", "50", "--seed", "43"], capsys)
    assert a == b
    assert json.loads(c)["seed"] == 43


def test_closure_budget_hit(write, capsys):
    code, out, _ = run(["closure", "--config", write(F2), "--budget", "10"], capsys)
    assert code == 1
    rep = json.loads(out)
    assert any(f.get("budget_hit") for f in rep["findings"])


def test_closure_min_order(write, capsys):
    code, out, _ = run(["closure", "--config", write({**F2, "delta": {"kind": "min"}})], capsys)
    assert code == 0
    assert json.loads(out)["result"]["order"] == 20160


def test_non_unitary_seed_is_a_finding(write, capsys):
    rows = [["1" if i == j else "0" for j in range(7)] for i in range(7)]
    rows[0][6] = "1"
    cfg = {**F2, "delta": {"kind": "min"}, "subgroup": {"seed": [{"n": 3, "rows": rows}]}}
    code, out, _ = run(["closure", "--config", write(cfg)], capsys)
    assert code == 1
    assert json.loads(out)["findings"]


def test_report_identical_across_thread_counts(write, tmp_path):
    p = write({**F2, "delta": {"kind": "min"}, "seed": 3})
    outs = []
    for threads in ("1", "4", "8"):
        env = dict(os.environ, ODDFORM_THREADS=threads)
        res = subprocess.run([sys.executable, "-m", "oddform.cli", "closure", "--config", p],
                             capture_output=True, env=env, check=False)
        assert res.returncode == 0, res.stderr
        outs.append(res.stdout)
    assert outs[0] == outs[1] == outs[2]


def test_levels_and_sandwich_trivial(write, capsys):
    cfg = {**F2, "subgroup": {"seed": "trivial"}}
    for suite in ("levels", "sandwich"):
        code, out, _ = run([suite, "--config", write(cfg)], capsys)
        assert code == 0, out
