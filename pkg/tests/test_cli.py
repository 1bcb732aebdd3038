import json

import pytest

from treeseries.cli import main
from treeseries.core import automaton_from_json, automaton_to_json
from treeseries.zoo import (
    BELL_RDS_TEXT,
    BELL_SPECIES_TEXT,
    CUBIC_DA_TEXT,
    bell_automaton,
)


@pytest.fixture()
def bell_path(tmp_path):
    path = tmp_path / "bell.json"
    path.write_text(automaton_to_json(bell_automaton()))
    return str(path)


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_series_table(bell_path, capsys):
    code, out, err = run(capsys, "series", "-a", bell_path, "-n", "6")
    assert code == 0 and err == ""
    lines = out.strip().splitlines()
    assert len(lines) == 7
    assert lines[-1].split() == ["6", "203/720"]


def test_series_counts_and_formats(bell_path, capsys):
    code, out, _ = run(capsys, "series", "-a", bell_path, "-n", "6", "--counts", "--format", "csv")
    assert code == 0
    assert out.strip().splitlines()[-1] == "6,203"
    code, out, _ = run(capsys, "series", "-a", bell_path, "-n", "2", "--format", "json")
    assert json.loads(out) == {"coefficients": ["1", "1", "1"]}


def test_series_deterministic(bell_path, capsys):
    _, first, _ = run(capsys, "series", "-a", bell_path, "-n", "8")
    _, second, _ = run(capsys, "series", "-a", bell_path, "-n", "8")
    assert first == second


def test_eval(bell_path, capsys):
    code, out, _ = run(
        capsys, "eval", "-a", bell_path, "-t", "(sigma2 (sigma0) (sigma0))", "--vector"
    )
    assert code == 0
    assert out.splitlines() == ["1", "1 0"]


def test_species_count(tmp_path, capsys):
    spec = tmp_path / "bell.spec"
    spec.write_text(BELL_SPECIES_TEXT + "\n")
    code, out, _ = run(capsys, "species", "count", "-f", str(spec), "-n", "6")
    assert code == 0
    assert out.strip() == "1 1 2 5 15 52 203"


def test_compile_and_equiv_cross_path(tmp_path, bell_path, capsys):
    rds = tmp_path / "bell.rds"
    rds.write_text(BELL_RDS_TEXT + "\n")
    out_path = tmp_path / "bell_from_rds.json"
    code, _, _ = run(capsys, "compile", "rda", "-f", str(rds), "-o", str(out_path))
    assert code == 0
    code, out, _ = run(
        capsys, "equiv", "-a", bell_path, "-b", str(out_path), "--cap", "20"
    )
    assert code == 0
    verdict = json.loads(out)
    assert verdict["verdict"] == "zero_up_to" and verdict["n"] == 20


def test_compile_da(tmp_path, capsys):
    eq = tmp_path / "cubic.da"
    eq.write_text(CUBIC_DA_TEXT + "\n")
    out_path = tmp_path / "cubic.json"
    code, _, _ = run(capsys, "compile", "da", "-f", str(eq), "-o", str(out_path))
    assert code == 0
    code, out, _ = run(capsys, "series", "-a", str(out_path), "-n", "7", "--format", "csv")
    assert out.strip().splitlines()[-1] == "7,-1/252"


def test_op_round_trip(tmp_path, bell_path, capsys):
    out_path = tmp_path / "sum.json"
    code, _, _ = run(
        capsys, "op", "gf-add", "-a", bell_path, "-b", bell_path, "-o", str(out_path)
    )
    assert code == 0
    text = out_path.read_text()
    again = automaton_from_json(text)
    assert automaton_to_json(again) == text  # canonical serialization


def test_op_scale_requires_constant(bell_path, capsys):
    code, _, err = run(capsys, "op", "gf-scale", "-a", bell_path)
    assert code == 2
    assert "error:" in err


def test_zero_require_decided_exit_code(tmp_path, bell_path, capsys):
    out_path = tmp_path / "cancel.json"
    run(capsys, "op", "gf-scale", "-a", bell_path, "-c", "-1", "-o", str(out_path))
    sum_path = tmp_path / "sum.json"
    run(capsys, "op", "gf-add", "-a", bell_path, "-b", str(out_path), "-o", str(sum_path))
    code, out, _ = run(capsys, "zero", "-a", str(sum_path), "--cap", "10")
    assert code == 0
    assert json.loads(out)["verdict"] == "zero_up_to"
    code, _, _ = run(
        capsys, "zero", "-a", str(sum_path), "--cap", "10", "--require-decided"
    )
    assert code == 4


def test_bad_json_exits_2(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    code, _, err = run(capsys, "series", "-a", str(bad), "-n", "3")
    assert code == 2
    assert err.startswith("error:")


def test_invariant_violation_exits_3(tmp_path, capsys):
    # inverse of a series with zero constant term
    from treeseries.core import automaton_to_json as dump
    from treeseries.zoo import labelled_trees_automaton

    path = tmp_path / "lt.json"
    path.write_text(dump(labelled_trees_automaton()))
    code, _, err = run(capsys, "op", "gf-inverse", "-a", str(path))
    assert code == 3
    assert "constant term" in err


def test_enum_trees(capsys):
    code, out, _ = run(capsys, "enum-trees", "--alphabet", "a/0,f/2", "-n", "2")
    assert code == 0
    assert out.splitlines() == [
        "(f (a) (f (a) (a)))",
        "(f (f (a) (a)) (a))",
    ]


def test_emit_system(bell_path, capsys):
    code, out, _ = run(capsys, "emit-system", "-a", bell_path, "--solve", "4")
    assert code == 0
    assert "Q(x) = x" in out
    assert "5/8" in out  # forward-solved coefficient 4


def test_bound(bell_path, capsys):
    code, out, _ = run(capsys, "bound", "-a", bell_path, "--format", "json")
    assert code == 0
    payload = json.loads(out)
    assert payload["M"] == 25
    assert payload["B"] == {"base": 2, "exponent": "838860800"}


def test_taylor(tmp_path, capsys):
    rds = tmp_path / "exp.rds"
    rds.write_text("y' = y ; y(0)=1\n")
    code, out, _ = run(capsys, "taylor", "-f", str(rds), "-n", "4")
    assert code == 0
    assert out.strip() == "y: 1 1 1/2 1/6 1/24"
