import json

import pytest
from click.testing import CliRunner

from csskit.cli import (
    CodeFileError,
    Context,
    PipelineConfig,
    apply_op,
    cli,
    parse,
    parse_report,
    render_report,
    report_json,
    run_pipeline,
    serialize,
)
from csskit.csscode import CssCode
from csskit.gf2core import BitMatrix
from csskit.weightred import copying, cone
from csskit.zoo import surface_code, toric_code


@pytest.fixture
def runner():
    return CliRunner()


def test_round_trip_toric():
    t = toric_code(2)
    assert parse(serialize(t)) == t


def test_serialization_is_canonical():
    c = cone(surface_code(3))
    text = serialize(c)
    again = parse(text)
    assert serialize(again) == text
    assert again.meta["cone"]["discs"] == c.meta["cone"]["discs"]


def test_empty_rows_survive():
    c = CssCode(BitMatrix(2, 3, [[0, 1], []]), BitMatrix.zeros(0, 3))
    assert parse(serialize(c)) == c


@pytest.mark.parametrize("text,line", [
    ("csskit-code 1\nn 3\nx 0 1\nz 0 5\n", 4),
    ("csskit-code 1\nn 3\nx 0 a\n", 3),
    ("csskit-code 1\nx 0 1\n", 2),
    ("csskit-code 1\nn 3\ny 0\n", 3),
    ("nonsense\n", 1),
    ("csskit-code 1\nn 2\nx 1 1\n", 3),
])
def test_parse_errors_report_line(text, line):
    with pytest.raises(CodeFileError) as e:
        parse(text)
    assert e.value.line == line


def test_anticommuting_file_needs_force():
    text = "csskit-code 1\nn 2\nx 0\nz 0\n"
    with pytest.raises(CodeFileError):
        parse(text)
    assert parse(text, force=True).n == 2


def test_unknown_step_rejected():
    with pytest.raises(ValueError):
        PipelineConfig(steps=[{"op": "fold"}])


def test_empty_pipeline_is_identity():
    t = toric_code(2)
    out, reps = run_pipeline(PipelineConfig(steps=[]), t, Context())
    assert out == t and len(reps) == 1 and reps[0].op == "measure"
    assert render_report(reps).splitlines()[0].split() == ["param", "0:measure"]


def test_weight_reduction_pipeline_surface_3():
    steps = [{"op": "copy"}, {"op": "gauge"}, {"op": "thicken", "l": 2}, {"op": "heights"},
             {"op": "cone"}, {"op": "reduce-cone"}]
    out, reps = run_pipeline(PipelineConfig(steps=steps), surface_code(3), Context(budget=18))
    assert all(r.ok for r in reps) and len(reps) == 6
    assert reps[-1].after["k"] == 1
    locality = max(reps[-1].after[k] for k in ("w_x", "w_z", "q_x", "q_z"))
    assert locality <= 10


def test_ddb_then_soundamp():
    steps = [{"op": "ddb", "t": 2}, {"op": "soundamp", "side": "x", "rho": "1/8"}]
    out, reps = run_pipeline(PipelineConfig(steps=steps), toric_code(2), Context(budget=20))
    assert all(r.ok for r in reps)
    assert reps[0].after["k"] == 2 and reps[1].after["n"] == reps[0].after["n"]


def test_copy_report_checks():
    out, rep = apply_op(toric_code(2), "copy", {}, Context())
    assert out == copying(toric_code(2)) and rep.ok
    names = {c.name for c in rep.checks}
    assert {"n = n q_x", "d_z = q_x d_z", "d_x unchanged"} <= names


def test_structured_report_round_trips():
    _, rep = apply_op(toric_code(2), "copy", {}, Context())
    text = report_json([rep])
    back = parse_report(text)
    assert report_json(back) == text and render_report(back) == render_report([rep])


def test_full_weight_reduction_report_has_eight_ledger_columns():
    _, rep = apply_op(surface_code(3), "wr-full", {}, Context(budget=16))
    assert rep.ok and len(rep.ledger) == 9
    table = render_report([rep])
    ledger_block = table.split("ledger for step")[1].splitlines()
    header = ledger_block[1].split()
    assert header[0] == "param" and header[1:] == [
        "post-copy", "post-gauge", "post-thicken", "cone", "thickened-cone",
        "full-height", "partial-height", "reduced-cone"]


# command line


def test_generate_and_analyze(runner, tmp_path):
    f = tmp_path / "t.txt"
    r = runner.invoke(cli, ["generate", "toric", "-p", "L=2", "-o", str(f)])
    assert r.exit_code == 0, r.output
    r = runner.invoke(cli, ["analyze", str(f), "--json"])
    assert r.exit_code == 0
    d = json.loads(r.output)
    assert (d["n"], d["k"], d["d_x"], d["d_z"]) == (8, 2, 2, 2)


def test_analyze_budget_exit(runner, tmp_path):
    f = tmp_path / "s.txt"
    runner.invoke(cli, ["generate", "surface", "-p", "d=4", "-o", str(f)])
    r = runner.invoke(cli, ["--budget", "2", "analyze", str(f)])
    assert r.exit_code == 3


def test_parse_error_exit(runner, tmp_path):
    f = tmp_path / "bad.txt"
    f.write_text("csskit-code 1\nn 2\nx 0 7\n")
    r = runner.invoke(cli, ["analyze", str(f)])
    assert r.exit_code == 2 and "line 3" in r.output


def test_force_and_verify(runner, tmp_path):
    f = tmp_path / "bad.txt"
    f.write_text("csskit-code 1\nn 2\nx 0\nz 0\n")
    assert runner.invoke(cli, ["verify", str(f)]).exit_code == 2
    assert runner.invoke(cli, ["--force", "verify", str(f)]).exit_code == 1


def test_verify_ok(runner, tmp_path):
    f = tmp_path / "t.txt"
    runner.invoke(cli, ["generate", "surface", "-p", "d=3", "-o", str(f)])
    r = runner.invoke(cli, ["--soundness", "verify", str(f)])
    assert r.exit_code == 0 and "d_x=3 d_z=3" in r.output and "rho_x=13/6" in r.output


def test_usage_error_exit(runner, tmp_path):
    f = tmp_path / "t.txt"
    runner.invoke(cli, ["generate", "toric", "-p", "L=2", "-o", str(f)])
    assert runner.invoke(cli, ["transform", str(f), "--op", "fold"]).exit_code == 2
    assert runner.invoke(cli, ["transform", str(f), "--op", "thicken"]).exit_code == 2


def test_transform_invariant_failure_exit(runner, tmp_path):
    f = tmp_path / "u.txt"
    f.write_text("csskit-code 1\nn 4\nx 0 1 2 3\nz 0 1 2 3\n")
    r = runner.invoke(cli, ["transform", str(f), "--op", "cone"])
    assert r.exit_code == 1


def test_pipeline_is_deterministic(runner, tmp_path):
    f = tmp_path / "s.txt"
    runner.invoke(cli, ["generate", "surface", "-p", "d=3", "-o", str(f)])
    cfg = tmp_path / "p.json"
    cfg.write_text(json.dumps({"steps": [{"op": "copy"}, {"op": "gauge"}, {"op": "thicken", "l": 2},
                                         {"op": "heights", "seed": 3}, {"op": "cone"}, {"op": "reduce-cone"}],
                               "budget": 16}))
    outs = []
    for i in range(2):
        o, rp = tmp_path / f"o{i}.txt", tmp_path / f"r{i}.json"
        r = runner.invoke(cli, ["pipeline", str(cfg), str(f), "-o", str(o), "--report", str(rp)])
        assert r.exit_code == 0, r.output
        outs.append((o.read_bytes(), rp.read_bytes()))
    assert outs[0] == outs[1]


def test_report_command(runner, tmp_path):
    f = tmp_path / "t.txt"
    runner.invoke(cli, ["generate", "toric", "-p", "L=2", "-o", str(f)])
    rp = tmp_path / "r.json"
    r = runner.invoke(cli, ["transform", str(f), "--op", "thicken", "--l", "2", "-o", str(tmp_path / "o.txt"),
                            "--report", str(rp)])
    assert r.exit_code == 0
    r = runner.invoke(cli, ["report", str(rp)])
    assert r.exit_code == 0 and "1:thicken" in r.output
    r = runner.invoke(cli, ["report", str(rp), "--format", "json"])
    assert r.output == rp.read_text()


def test_ael_transform(runner, tmp_path):
    outer, inner, block = tmp_path / "o.txt", tmp_path / "i.txt", tmp_path / "b.txt"
    runner.invoke(cli, ["generate", "surface", "-p", "d=3", "-o", str(outer)])
    inner.write_text("csskit-code 1\nn 4\nx 0 1 2 3\nz 0 1\nz 2 3\n")
    block.write_text("csskit-code 1\nn 4\n")
    r = runner.invoke(cli, ["transform", str(outer), "--op", "ael", "--inner", str(inner), "--block", str(block),
                            "-o", str(tmp_path / "out.txt")])
    assert r.exit_code == 0, r.output
    assert parse((tmp_path / "out.txt").read_text()).n == 52
