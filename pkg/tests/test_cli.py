import csv
import json
import math
import subprocess
import sys

import numpy as np
import pytest

from ergconv import cli
from ergconv.ergodicity import Discrepancy
from ergconv.errors import ConsistencyError

WALK = {
    "group": {"type": "lattice", "d": 1},
    "measure": [{"element": [1], "re": 0.5}, {"element": [2], "re": -0.5}],
    "analyses": [
        {"classify": {"p": [2, 1]}},
        {"iterate": {"p": 2, "horizon": 256}},
        {"spectrum": {"samples": True, "norms": [3]}},
        {"vague": {"horizon": 128}},
    ],
    "output": {"json": "out.json", "csv": "trace.csv", "svg": "plot.svg"},
    "seed": 3,
}


def write(tmp_path, obj, name="job.json"):
    path = tmp_path / name
    path.write_text(json.dumps(obj))
    return str(path)


def run(tmp_path, obj, *extra, command="analyze", out="out"):
    return cli.main([command, "--config", write(tmp_path, obj), "--out", str(tmp_path / out), *extra])


def test_normalize():
    got = cli.normalize({"a": 1 / 3, "b": [math.inf, -math.inf, math.nan], "c": 1 + 2j, "d": np.float64(2.5),
                         "e": np.bool_(True), "f": np.arange(2)})
    assert got == {"a": 0.3333333333, "b": ["inf", "-inf", "nan"], "c": [1.0, 2.0], "d": 2.5, "e": True, "f": [0, 1]}


def test_analyze_writes_all_outputs(tmp_path):
    assert run(tmp_path, WALK) == 0
    out = tmp_path / "out"
    report = json.loads((out / "out.json").read_text())
    assert report["inputs"]["seed"] == 3 and len(report["inputs"]["measure_digest"]) == 16
    assert report["verdicts"]["uniformly_mean_ergodic"] == "yes"
    classify = report["analyses"][0]["result"]
    assert set(classify["reports"]) == {"2", "1"} and classify["discrepancies"] == []
    with open(out / "trace.csv") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["vector", "n", "gap", "powernorm_over_n"] and len(rows) > 5
    with open(out / "trace_samples.csv") as fh:
        assert next(csv.reader(fh)) == ["t", "re", "im"]
    assert (out / "plot.svg").read_text().startswith("<?xml")


def test_outputs_are_byte_identical(tmp_path):
    assert run(tmp_path, WALK, out="a") == 0
    assert run(tmp_path, WALK, out="b") == 0
    for name in ("out.json", "trace.csv", "trace_samples.csv", "plot.svg"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes(), name


def test_seed_override(tmp_path):
    assert run(tmp_path, WALK, "--seed", "11") == 0
    assert json.loads((tmp_path / "out" / "out.json").read_text())["inputs"]["seed"] == 11


def test_subcommand_filters_analyses(tmp_path):
    assert run(tmp_path, WALK, command="spectrum") == 0
    report = json.loads((tmp_path / "out" / "out.json").read_text())
    assert [a["type"] for a in report["analyses"]] == ["spectrum"]
    job = {**WALK, "analyses": [{"classify": {}}], "output": {"json": "r.json"}}
    assert run(tmp_path, job, command="iterate") == 0
    report = json.loads((tmp_path / "out" / "r.json").read_text())
    assert [a["type"] for a in report["analyses"]] == ["iterate"]


def test_exit_code_config_error(tmp_path, capsys):
    bad = {**WALK, "analyses": [{"classify": {"p": [0.5]}}]}
    assert run(tmp_path, bad) == 1
    assert "p must lie" in capsys.readouterr().err
    assert cli.main(["analyze"]) == 1


def test_exit_code_resource_guard(tmp_path):
    job = {"group": {"type": "free", "k": 3},
           "measure": [{"element": "x1", "re": 0.5}, {"element": "x2^-1", "re": 0.5}, {"element": "x3", "re": 0.5}],
           "analyses": [{"iterate": {"p": 2, "horizon": 4096}}]}
    assert run(tmp_path, job, "--guard-mem-mb", "5") == 2


def test_exit_code_discrepancy(tmp_path, monkeypatch):
    fake = [Discrepancy("discrepancy", "mean_ergodic", "yes", "no", "forced")]
    monkeypatch.setattr(cli, "cross_check", lambda *a, **k: fake)
    assert run(tmp_path, {**WALK, "analyses": [{"classify": {}}]}) == 3


def test_exit_code_consistency_error(tmp_path, monkeypatch):
    def boom(*a, **k):
        raise ConsistencyError("UME=yes but CB=no")

    monkeypatch.setattr(cli, "classify", boom)
    assert run(tmp_path, {**WALK, "analyses": [{"classify": {}}]}) == 3


def test_module_entry_point(tmp_path):
    job = {**WALK, "analyses": [{"classify": {"p": [2], "cross_check": False}}], "output": {"json": "r.json"}}
    proc = subprocess.run([sys.executable, "-m", "ergconv", "analyze", "--config", write(tmp_path, job),
                           "--out", str(tmp_path)], capture_output=True, text=True, timeout=300)
    assert proc.returncode == 0, proc.stderr
    assert json.loads(proc.stdout)["uniformly_mean_ergodic"] == "yes"


@pytest.mark.slow
def test_reproduce_examples(tmp_path, capsys):
    assert cli.main(["reproduce-paper", "--out", str(tmp_path)]) == 0
    out = capsys.readouterr().out
    assert "FAIL" not in out and "24/24 rows pass" in out
    assert len(json.loads((tmp_path / "golden.json").read_text())) == 24
