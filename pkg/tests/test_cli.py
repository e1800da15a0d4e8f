import csv
import io
import json
from collections import Counter

import pytest

from stitchwalk.cli import (COLUMNS, EXIT_GRAPH, EXIT_IO, EXIT_OK, EXIT_SPEC, OUT_ENV, SCHEMA, ExperimentSpec,
                            SpecError, emit, fit_exponent, main, resolve_lambda, run_experiment, trial_seeds)


def parse_csv(text):
    lines = text.splitlines()
    assert lines[0] == f"# {SCHEMA}"
    return list(csv.DictReader(io.StringIO("\n".join(lines[1:]))))


def test_naive_rounds_equal_ell():
    rows = run_experiment(ExperimentSpec("cycle:8", "naive", [100], trials=3))
    for r in rows[:3]:
        assert r["rounds_total"] == 100


def test_emit_empty_and_one_row(tmp_path):
    text = emit([], "csv")
    assert text.splitlines() == [f"# {SCHEMA}", ",".join(COLUMNS)]
    rows = run_experiment(ExperimentSpec("cycle:8", "single", [12], lam=3, trials=1))
    trial_rows = [r for r in parse_csv(emit(rows)) if r["trial"] not in ("mean", "summary")]
    assert len(trial_rows) == 1
    out = tmp_path / "r.json"
    emit(rows, "json", str(out))
    d = json.loads(out.read_text())
    assert d["columns"] == list(COLUMNS) and len(d["rows"]) == len(rows)


@pytest.mark.parametrize("protocol", ["single", "many", "sod", "pos", "mh", "rst", "mixing", "naive"])
def test_every_protocol_runs_and_repeats(protocol):
    # a forced tiny lambda makes mixing estimation stitch every one of its K walks; keep the default there
    lam = None if protocol == "mixing" else 2
    spec = dict(graph="cycle:7", protocol=protocol, ell=[14], lam=lam, k=2, trials=2, seed=11)
    a = emit(run_experiment(ExperimentSpec(**spec)))
    b = emit(run_experiment(ExperimentSpec(**spec)))
    assert a == b
    rows = parse_csv(a)
    assert [r["trial"] for r in rows] == ["0", "1", "mean", "summary"]


def test_workers_do_not_change_results():
    spec = dict(graph="grid:9", protocol="single", ell=[16, 32], lam="sqrt", trials=4, seed=5)
    assert emit(run_experiment(ExperimentSpec(**spec))) == emit(run_experiment(ExperimentSpec(**spec, workers=2)))


def test_trial_seeds_prefix_stable():
    assert trial_seeds(3, 5)[:3] == trial_seeds(3, 3)
    assert len(set(trial_seeds(3, 50))) == 50


def test_resolve_lambda_and_fit():
    assert resolve_lambda("sqrt", 256, 32) == 91
    assert resolve_lambda("sqrt", 2, 32) == 2
    assert resolve_lambda(5, 100, 3) == 5
    assert abs(fit_exponent([1, 4, 16], [3, 6, 12]) - 0.5) < 1e-12
    assert fit_exponent([4], [2]) is None


def test_rst_frequency_table():
    rows = run_experiment(ExperimentSpec("complete:4", "rst", [0], trials=400, seed=2))
    table = Counter(r["digest"] for r in rows if isinstance(r["trial"], int))
    assert sum(table.values()) == 400 and len(table) == 16


def test_spec_validation():
    with pytest.raises(SpecError):
        ExperimentSpec("cycle:8", "bogus").validate()
    with pytest.raises(SpecError):
        ExperimentSpec("cycle:8", trials=0).validate()
    with pytest.raises(SpecError):
        ExperimentSpec("cycle:8", ell=[4], lam=9).validate()
    with pytest.raises(SpecError):
        ExperimentSpec.from_dict({"graph": "cycle:8", "colour": 1})


def test_exit_codes(tmp_path, capsys):
    assert main(["--graph", "cycle:8", "--protocol", "naive", "--ell", "5", "--out", "-"]) == EXIT_OK
    assert capsys.readouterr().out.startswith(f"# {SCHEMA}")
    assert main(["--graph", "cycle:8", "--trials", "0", "--out", "-"]) == EXIT_SPEC
    assert main(["--protocol", "naive"]) == EXIT_SPEC
    assert main(["--graph", "nosuch:8", "--out", "-"]) == EXIT_GRAPH
    blocker = tmp_path / "file"
    blocker.write_text("x")
    assert main(["--graph", "cycle:8", "--ell", "4", "--out", str(blocker / "r.csv")]) == EXIT_IO


def test_config_file_and_flag_override(tmp_path, capsys):
    cfg = tmp_path / "spec.json"
    cfg.write_text(json.dumps({"graph": "cycle:8", "protocol": "naive", "ell": [7], "trials": 2}))
    assert main(["--config", str(cfg), "--ell", "9", "--out", "-"]) == EXIT_OK
    rows = parse_csv(capsys.readouterr().out)
    assert [r["rounds_total"] for r in rows[:2]] == ["9", "9"]


def test_env_default_dir(tmp_path, monkeypatch, capsys):
    monkeypatch.setenv(OUT_ENV, str(tmp_path / "res"))
    assert main(["--graph", "cycle:8", "--protocol", "naive", "--ell", "3"]) == EXIT_OK
    path = capsys.readouterr().out.strip()
    assert path.startswith(str(tmp_path / "res")) and open(path).read().startswith("# ")
