"""Command-line front end: code files, transform pipelines and reports.

Code files are plain text, one stabiliser per line::

    csskit-code 1
    n 4
    x 0 1 2 3
    z 0 1
    z 2 3
    meta {"family":"example"}

Exit codes: 0 ok, 1 invariant failure, 2 usage or parse error, 3 budget exceeded.
"""

from __future__ import annotations

import json
import sys
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any

import click

from csskit import balance, distamp, soundamp, weightred
from csskit.csscode import CodeParams, CssCode, MeasureOptions, measure, validate
from csskit.gf2core import BitMatrix, row_space_equal
from csskit.oracle import BudgetExceeded, brute_distance, quantum_soundness
from csskit.zoo import ZooSpec, repetition_pcm

FORMAT_HEADER = "csskit-code 1"
EXIT_OK, EXIT_INVARIANT, EXIT_USAGE, EXIT_BUDGET = 0, 1, 2, 3


class CodeFileError(ValueError):
    def __init__(self, line: int, msg: str):
        super().__init__(f"line {line}: {msg}")
        self.line = line


# ---------------------------------------------------------------- code files


def serialize(code: CssCode) -> str:
    lines = [FORMAT_HEADER, f"n {code.n}"]
    lines += [" ".join(["x", *map(str, s)]) for s in code.h_x.supports]
    lines += [" ".join(["z", *map(str, s)]) for s in code.h_z.supports]
    if code.meta:
        lines.append("meta " + json.dumps(code.meta, sort_keys=True, separators=(",", ":"), default=str))
    return "\n".join(lines) + "\n"


def parse(text: str, force: bool = False) -> CssCode:
    """Read a code file; anticommuting checks are rejected unless ``force``."""
    n = None
    rows: dict[str, list[list[int]]] = {"x": [], "z": []}
    meta: dict = {}
    seen_header = False
    for num, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if not seen_header:
            if line != FORMAT_HEADER:
                raise CodeFileError(num, f"expected header {FORMAT_HEADER!r}")
            seen_header = True
            continue
        key, _, rest = line.partition(" ")
        if key == "n":
            if n is not None:
                raise CodeFileError(num, "duplicate n")
            try:
                n = int(rest)
            except ValueError:
                raise CodeFileError(num, f"bad qubit count {rest!r}") from None
            if n < 0:
                raise CodeFileError(num, "negative qubit count")
        elif key in ("x", "z"):
            if n is None:
                raise CodeFileError(num, "stabiliser before n")
            try:
                cols = [int(t) for t in rest.split()]
            except ValueError:
                raise CodeFileError(num, "non-integer column index") from None
            bad = [c for c in cols if not 0 <= c < n]
            if bad:
                raise CodeFileError(num, f"column {bad[0]} out of range for n={n}")
            if len(set(cols)) != len(cols):
                raise CodeFileError(num, "repeated column index")
            rows[key].append(sorted(cols))
        elif key == "meta":
            try:
                meta = json.loads(rest)
            except json.JSONDecodeError as e:
                raise CodeFileError(num, f"bad metadata: {e.msg}") from None
        else:
            raise CodeFileError(num, f"unknown record {key!r}")
    if not seen_header:
        raise CodeFileError(1, "empty file")
    if n is None:
        raise CodeFileError(num, "missing n")
    code = CssCode(BitMatrix(len(rows["x"]), n, rows["x"]), BitMatrix(len(rows["z"]), n, rows["z"]), meta)
    rep = validate(code)
    if not rep.ok and not force:
        i, j = rep.anticommuting[0]
        raise CodeFileError(0, f"X-check {i} and Z-check {j} anticommute (use --force to load anyway)")
    return code


def load_code(path: str | Path, force: bool = False) -> CssCode:
    return parse(Path(path).read_text(), force)


# ---------------------------------------------------------------- transforms


@dataclass
class Check:
    name: str
    passed: bool | None
    detail: str = ""


@dataclass
class TransformReport:
    step: int
    op: str
    params: dict
    after: dict
    before: dict | None = None
    checks: list[Check] = field(default_factory=list)
    ledger: list[dict] | None = None
    extra: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return all(c.passed is not False for c in self.checks)

    def as_dict(self) -> dict:
        d = asdict(self)
        d["ok"] = self.ok
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "TransformReport":
        d = dict(d)
        d.pop("ok", None)
        d["checks"] = [Check(**c) for c in d.get("checks", [])]
        return cls(**d)


@dataclass
class Context:
    budget: int = 22
    seed: int = 0
    force: bool = False
    soundness: bool = False
    constants: dict | None = None
    base: Path = field(default_factory=Path.cwd)
    budget_explicit: bool = False


OPS = ("copy", "gauge", "thicken", "heights", "cone", "reduce-cone", "wr-full", "balance", "ddb", "soundamp", "ael")


@dataclass
class PipelineConfig:
    steps: list[dict]
    budget: int = 22
    soundness: bool = False
    ledger_constants: str | None = None
    report: str | None = None

    def __post_init__(self):
        for i, s in enumerate(self.steps):
            if s.get("op") not in OPS:
                raise ValueError(f"step {i}: unknown op {s.get('op')!r}")

    @classmethod
    def from_json(cls, text: str) -> "PipelineConfig":
        return cls(**json.loads(text))


def _check(checks: list[Check], name: str, cond: bool | None, detail: str = "") -> None:
    checks.append(Check(name, None if cond is None else bool(cond), detail))


def _eq_if(a, b):
    return None if a is None or b is None else a == b


def _params(code: CssCode, ctx: Context) -> CodeParams:
    return measure(code, MeasureOptions(distance=True, soundness=ctx.soundness, budget=ctx.budget))


def _file(ctx: Context, name: str) -> CssCode:
    p = Path(name)
    return load_code(p if p.is_absolute() else ctx.base / p, ctx.force)


def apply_op(code: CssCode, op: str, params: dict, ctx: Context, step: int = 0) -> tuple[CssCode, TransformReport]:
    """Apply one named transform and check the invariants that hold exactly for it."""
    params = dict(params)
    seed = params.setdefault("seed", ctx.seed)
    before = _params(code, ctx)
    checks: list[Check] = []
    ledger = None
    extra: dict = {}
    k_expected = before.k
    if op == "copy":
        out = weightred.copying(code)
    elif op == "gauge":
        out = weightred.gauging(code)
    elif op == "thicken":
        out = weightred.thicken(code, int(params["l"]))
    elif op == "heights":
        out, choice = weightred.choose_heights(code, params.get("strategy", "greedy"), seed=seed,
                                               restarts=params.get("restarts", 8), c=params.get("c", 4))
        extra["heights"] = {"q_z": choice.q_z, "target": choice.target, "met": choice.met_target}
    elif op == "cone":
        out = weightred.cone(code)
    elif op == "reduce-cone":
        out = weightred.reduce_cone(code, params.get("l2", "auto"))
    elif op == "wr-full":
        cfg = weightred.WeightReductionConfig(
            l1=params.get("l1"), l2=params.get("l2", "auto"), seed=seed, budget=ctx.budget,
            locality_target=params.get("locality_target"), constants=ctx.constants,
        )
        out, rows = weightred.weight_reduce_full(code, cfg)
        ledger = [r.as_dict() for r in rows]
    elif op in ("balance", "ddb"):
        r = balance.ClassicalCode(repetition_pcm(int(params.get("t", 2))))
        out = balance.distance_balance(code, r) if op == "balance" else balance.double_distance_balance(code, r)
        k_expected = before.k * r.dim ** (1 if op == "balance" else 2)
    elif op == "soundamp":
        side = params.get("side", "x")
        alpha = Fraction(params.get("alpha", "1/3"))
        if params.get("target") is not None:
            out, rounds = soundamp.amplify_to_constant(code, side, Fraction(params["target"]), alpha, seed,
                                                       params.get("max_rounds", 6), ctx.budget)
            extra["soundamp"] = out.meta["soundamp_trajectory"]
        else:
            rho = params.get("rho")
            cfg = soundamp.SaRoundConfig(alpha, None if rho is None else Fraction(rho), ctx.budget)
            out = soundamp.amplification_round(code, side, cfg, seed)
            rep = out.meta["soundamp"]
            extra["soundamp"] = rep
            _check(checks, "group sizes within growth bound", all(g["size_within_bound"] for g in rep["groups"]))
            _check(checks, "right degree cap", all(g["max_right_degree"] is None or g["max_right_degree"] <= g["right_cap"]
                                                   for g in rep["groups"]))
        hb, ha = (code.h_x, out.h_x) if side == "x" else (code.h_z, out.h_z)
        other_b, other_a = (code.h_z, out.h_z) if side == "x" else (code.h_x, out.h_x)
        _check(checks, "row space unchanged", row_space_equal(hb, ha))
        _check(checks, "other side unchanged", other_b == other_a)
    elif op == "ael":
        inner, blk = _file(ctx, params["inner"]), _file(ctx, params["block"])
        b = code.n // max(inner.k, 1)
        eps = float(params.get("eps", 1.0))
        g = distamp.sample_pseudorandom_graph(b, inner.n, eps, seed, check=b <= 10)
        if b <= 12:
            extra["measured_eps"] = distamp.verify_pseudorandom(g).measured_eps
        out = distamp.ael_amplify(code, inner, blk, g)
        _check(checks, "n = b * N_block", out.n == b * blk.n)
    else:
        raise click.UsageError(f"unknown op {op!r}")
    after = _params(out, ctx)
    _check(checks, "commutation", validate(out).ok)
    _check(checks, "dimension", after.k == k_expected, f"{after.k} vs {k_expected}")
    if op == "copy":
        q = before.q_x
        _check(checks, "n = n q_x", after.n == before.n * q)
        _check(checks, "w_z = q_x w_z", after.w_z == q * before.w_z)
        _check(checks, "q_x <= 3", after.q_x <= 3)
        _check(checks, "d_z = q_x d_z", _eq_if(after.d_z, None if before.d_z is None else q * before.d_z))
        _check(checks, "d_x unchanged", _eq_if(after.d_x, before.d_x))
    elif op == "gauge":
        _check(checks, "w_x <= 3", after.w_x <= 3)
    elif op == "thicken":
        l = int(params["l"])
        _check(checks, "d_x = l d_x", _eq_if(after.d_x, None if before.d_x is None else l * before.d_x))
        _check(checks, "d_z unchanged", _eq_if(after.d_z, before.d_z))
    elif op == "heights":
        _check(checks, "Z row space unchanged", row_space_equal(code.h_z, out.h_z))
        _check(checks, "d_z unchanged", _eq_if(after.d_z, before.d_z))
    elif op == "cone":
        _check(checks, "rank identity", out.meta.get("rank_identity", True))
        _check(checks, "d_x does not drop", None if after.d_x is None or before.d_x is None else after.d_x >= before.d_x)
    elif op == "wr-full":
        _check(checks, "ledger", all(r["status"] != "fail" for r in ledger),
               ",".join(r["stage"] for r in ledger if r["status"] == "fail"))
        if params.get("locality_target") is not None:
            _check(checks, "locality target", after.locality <= params["locality_target"])
    elif op == "soundamp":
        for key in ("n", "d_x", "d_z"):
            _check(checks, f"{key} unchanged", _eq_if(getattr(after, key), getattr(before, key)))
    out_meta = dict(out.meta)
    out_meta.setdefault("stage", op)
    out = CssCode(out.h_x, out.h_z, out_meta)
    return out, TransformReport(step, op, params, after.as_dict(), before.as_dict(), checks, ledger, extra)


def run_pipeline(cfg: PipelineConfig, code: CssCode, ctx: Context) -> tuple[CssCode, list[TransformReport]]:
    """Apply the configured steps in order; stops at the first failed step."""
    if not cfg.steps:
        return code, [TransformReport(0, "measure", {}, _params(code, ctx).as_dict())]
    reports = []
    for i, step in enumerate(cfg.steps):
        params = {k: v for k, v in step.items() if k != "op"}
        code, rep = apply_op(code, step["op"], params, ctx, i + 1)
        reports.append(rep)
        if not rep.ok:
            break
    return code, reports


# ---------------------------------------------------------------- reports

ROWS = ("n", "n_x", "n_z", "k", "d_x", "d_z", "rho_x", "rho_z", "w_x", "w_z", "q_x", "q_z")


def _cell(params: dict, key: str) -> str:
    v = params.get(key)
    if v is None:
        return "-"
    flag = params.get("method", {}).get(key)
    return f"{v}" if flag in (None, "exact") else f"{v} ({flag})"


def _table(headers: list[str], columns: list[dict], extra_rows: list[tuple[str, list[str]]] = ()) -> str:
    body = [["param", *headers]]
    for key in ROWS:
        body.append([key, *(_cell(c, key) for c in columns)])
    loc = []
    for c in columns:
        vals = [c.get(k) for k in ("w_x", "w_z", "q_x", "q_z")]
        loc.append(str(max(v for v in vals if v is not None)) if any(v is not None for v in vals) else "-")
    body.append(["locality", *loc])
    body += [[name, *vals] for name, vals in extra_rows]
    widths = [max(len(r[i]) for r in body) for i in range(len(body[0]))]
    return "\n".join("  ".join(cell.ljust(w) for cell, w in zip(r, widths)).rstrip() for r in body)


def render_report(reports: list[TransformReport]) -> str:
    """One column per stage; weight-reduction steps add their ledger table."""
    cols, heads, status = [], [], []
    if reports and reports[0].before is not None:
        cols.append(reports[0].before)
        heads.append("input")
        status.append("")
    for r in reports:
        cols.append(r.after)
        heads.append(f"{r.step}:{r.op}")
        status.append("ok" if r.ok else "FAIL")
    parts = [_table(heads, cols, [("status", status)])]
    for r in reports:
        failed = [c for c in r.checks if c.passed is False]
        for c in failed:
            parts.append(f"step {r.step} {r.op}: check failed: {c.name} {c.detail}".rstrip())
        if r.ledger:
            stages = [row for row in r.ledger if row["stage"] != "0"]
            parts.append(f"\nledger for step {r.step}")
            parts.append(_table([row["tag"] for row in stages], [row["params"] for row in stages],
                                [("ledger", [row["status"] for row in stages])]))
    return "\n".join(parts) + "\n"


def report_json(reports: list[TransformReport]) -> str:
    return json.dumps([r.as_dict() for r in reports], sort_keys=True, indent=1, default=str) + "\n"


def parse_report(text: str) -> list[TransformReport]:
    return [TransformReport.from_dict(d) for d in json.loads(text)]


# ---------------------------------------------------------------- click commands


def _ctx(ctx: click.Context) -> Context:
    return ctx.obj


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        click.echo(text, nl=False)


def _guard(fn):
    """Map library errors onto the documented exit codes."""
    import functools

    @functools.wraps(fn)
    def wrapper(*a, **kw):
        try:
            return fn(*a, **kw)
        except CodeFileError as e:
            click.echo(f"error: {e}", err=True)
            sys.exit(EXIT_USAGE)
        except BudgetExceeded as e:
            click.echo(f"budget exceeded: {e}", err=True)
            sys.exit(EXIT_BUDGET)
        except weightred.StageFailure as e:
            click.echo(f"stage {e.stage} failed: {e.report}", err=True)
            sys.exit(EXIT_INVARIANT)
        except (KeyError, TypeError) as e:
            click.echo(f"error: bad parameters: {e}", err=True)
            sys.exit(EXIT_USAGE)
        except (ValueError, AssertionError, RuntimeError) as e:
            click.echo(f"error: {e}", err=True)
            sys.exit(EXIT_INVARIANT)
    return wrapper


@click.group()
@click.option("--budget", default=22, show_default=True, help="Exponent cap for brute-force oracles.")
@click.option("--seed", default=0, show_default=True, help="Default seed for randomised steps.")
@click.option("--force", is_flag=True, help="Load code files even if their checks anticommute.")
@click.option("--ledger-constants", type=click.Path(exists=True, dir_okay=False), help="JSON file of ledger constants.")
@click.option("--soundness", is_flag=True, help="Also measure soundness in reports.")
@click.pass_context
def cli(ctx, budget, seed, force, ledger_constants, soundness):
    """Transform CSS codes and check them against exact oracles."""
    consts = json.loads(Path(ledger_constants).read_text()) if ledger_constants else None
    ctx.obj = Context(budget, seed, force, soundness, consts)
    ctx.obj.budget_explicit = ctx.get_parameter_source("budget") is not click.core.ParameterSource.DEFAULT


@cli.command()
@click.argument("family", type=click.Choice(["toric", "surface", "hypergraph_product", "cross", "random_css", "repetition"]))
@click.option("-p", "--param", "params", multiple=True, help="key=value, e.g. -p L=3")
@click.option("-o", "--output", type=click.Path(dir_okay=False))
@click.pass_context
@_guard
def generate(ctx, family, params, output):
    """Write a zoo code to a file (or stdout)."""
    kv = {}
    for p in params:
        key, sep, val = p.partition("=")
        if not sep:
            raise click.UsageError(f"parameter {p!r} is not key=value")
        kv[key] = int(val)
    code = ZooSpec(family, kv, _ctx(ctx).seed).build()
    meta = dict(code.meta)
    meta.setdefault("family", family)
    meta["params"] = kv
    _emit(serialize(CssCode(code.h_x, code.h_z, meta)), output)


@cli.command()
@click.argument("path", type=click.Path(exists=True, dir_okay=False))
@click.option("--json", "as_json", is_flag=True)
@click.pass_context
@_guard
def analyze(ctx, path, as_json):
    """Measure n, k, weights, distances (and soundness with --soundness)."""
    c = _ctx(ctx)
    code = load_code(path, c.force)
    p = _params(code, c)
    d = p.as_dict()
    if as_json:
        click.echo(json.dumps(d, sort_keys=True, indent=1))
    else:
        click.echo(_table([Path(path).name], [d]))
    wanted = ["d_x", "d_z"] + (["rho_x", "rho_z"] if c.soundness else [])
    if p.k and any(p.method.get(key) == "skipped" for key in wanted):
        sys.exit(EXIT_BUDGET)


@cli.command()
@click.argument("path", type=click.Path(exists=True, dir_okay=False))
@click.option("--op", required=True, type=click.Choice(OPS))
@click.option("--l", "l", type=int, help="Thickening length (thicken).")
@click.option("--l1", type=int)
@click.option("--l2", default="auto")
@click.option("--t", "t", type=int, help="Repetition length (balance, ddb).")
@click.option("--strategy", default="greedy")
@click.option("--side", type=click.Choice(["x", "z"]), default="x")
@click.option("--alpha", default="1/3")
@click.option("--rho", default=None, help="Supplied soundness for one soundamp round.")
@click.option("--target", default=None, help="Soundness target for repeated soundamp rounds.")
@click.option("--locality-target", type=int)
@click.option("--inner", type=click.Path(exists=True, dir_okay=False))
@click.option("--block", type=click.Path(exists=True, dir_okay=False))
@click.option("--eps", type=float, default=1.0)
@click.option("-o", "--output", type=click.Path(dir_okay=False))
@click.option("--report", "report_path", type=click.Path(dir_okay=False), help="Write the JSON report here.")
@click.pass_context
@_guard
def transform(ctx, path, op, l, l1, l2, t, strategy, side, alpha, rho, target, locality_target, inner, block, eps,
              output, report_path):
    """Apply a single transform."""
    c = _ctx(ctx)
    code = load_code(path, c.force)
    params: dict[str, Any] = {}
    if op == "thicken":
        if l is None:
            raise click.UsageError("--l is required for thicken")
        params["l"] = l
    elif op == "heights":
        params["strategy"] = strategy
    elif op == "reduce-cone":
        params["l2"] = l2 if l2 == "auto" else int(l2)
    elif op == "wr-full":
        params.update(l1=l1, l2=l2 if l2 == "auto" else int(l2), locality_target=locality_target)
    elif op in ("balance", "ddb"):
        params["t"] = t or 2
    elif op == "soundamp":
        params.update(side=side, alpha=alpha, rho=rho, target=target)
    elif op == "ael":
        if not inner or not block:
            raise click.UsageError("--inner and --block are required for ael")
        params.update(inner=str(Path(inner).resolve()), block=str(Path(block).resolve()), eps=eps)
    out, rep = apply_op(code, op, params, c, 1)
    _emit(serialize(out), output)
    if report_path:
        Path(report_path).write_text(report_json([rep]))
    if not rep.ok:
        click.echo(render_report([rep]), err=True)
        sys.exit(EXIT_INVARIANT)


@cli.command()
@click.argument("config", type=click.Path(exists=True, dir_okay=False))
@click.argument("path", type=click.Path(exists=True, dir_okay=False))
@click.option("-o", "--output", type=click.Path(dir_okay=False))
@click.option("--report", "report_path", type=click.Path(dir_okay=False))
@click.pass_context
@_guard
def pipeline(ctx, config, path, output, report_path):
    """Run the steps listed in a JSON pipeline config."""
    c = _ctx(ctx)
    try:
        cfg = PipelineConfig.from_json(Path(config).read_text())
    except (ValueError, TypeError) as e:
        raise CodeFileError(0, f"{config}: {e}") from None
    if not c.budget_explicit:
        c.budget = cfg.budget
    c.soundness = c.soundness or cfg.soundness
    c.base = Path(config).resolve().parent
    if cfg.ledger_constants and c.constants is None:
        c.constants = json.loads((c.base / cfg.ledger_constants).read_text())
    code = load_code(path, c.force)
    out, reports = run_pipeline(cfg, code, c)
    _emit(serialize(out), output)
    target = report_path or (str(c.base / cfg.report) if cfg.report else None)
    if target:
        Path(target).write_text(report_json(reports))
    click.echo(render_report(reports), err=True)
    if not all(r.ok for r in reports):
        sys.exit(EXIT_INVARIANT)


@cli.command()
@click.argument("path", type=click.Path(exists=True, dir_okay=False))
@click.pass_context
@_guard
def verify(ctx, path):
    """Check commutation, then compute exact distances (and soundness)."""
    c = _ctx(ctx)
    code = load_code(path, c.force)
    rep = validate(code)
    if not rep.ok:
        click.echo(f"anticommuting pairs: {rep.anticommuting[:10]}")
        sys.exit(EXIT_INVARIANT)
    click.echo(f"n={code.n} k={code.k} commutation ok")
    if code.k:
        dx, dz = brute_distance(code, c.budget)
        click.echo(f"d_x={dx} d_z={dz}")
    if c.soundness:
        rx, rz = quantum_soundness(code, c.budget)
        click.echo(f"rho_x={rx.rho} rho_z={rz.rho}")


@cli.command()
@click.argument("path", type=click.Path(exists=True, dir_okay=False))
@click.option("--format", "fmt", type=click.Choice(["table", "json"]), default="table")
@click.pass_context
@_guard
def report(ctx, path, fmt):
    """Render a JSON report as a table, or re-emit it canonically."""
    try:
        reports = parse_report(Path(path).read_text())
    except (json.JSONDecodeError, TypeError) as e:
        raise CodeFileError(0, f"bad report: {e}") from None
    click.echo(render_report(reports) if fmt == "table" else report_json(reports), nl=False)
    if not all(r.ok for r in reports):
        sys.exit(EXIT_INVARIANT)


def main() -> None:
    cli(prog_name="csskit")


if __name__ == "__main__":
    main()
