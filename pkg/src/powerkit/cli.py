"""Command-line front end.

Subcommands: solve (one-shot), wizard (interactive session), scenarios
(corpus regression run), ratify (Monte Carlo ratification of the closed
forms), curve (sweep tables), serve (HTTP service). Flag names are exactly
the design field names, so the CLI, the HTTP schemas, and the checklists
never drift apart.
"""

from __future__ import annotations

import dataclasses
import json
import sys
import time

import click

from .designs import EFFECT_FIELD, TESTS, InvalidDesignError, build_spec
from .grammar import ParseError, parse_command
from .oracle import SimPlan, default_grid, ratify, simulate_power
from .power import power_of
from .scenarios import CorpusError, load_corpus
from .selector import checklist, select
from .session import apply, export_transcript, new_session
from .solve import UnreachablePowerError, solve_effect, solve_n, solve_power

_FLOAT_FLAGS = ("delta", "sd", "ratio", "f", "p0", "p1", "w", "r", "hr", "pE", "pC",
                "ratio_k", "exposure_prev", "sigma", "psi", "rho2", "are", "alpha",
                "power")
_INT_FLAGS = ("k", "df", "n")


def main():
    cli(prog_name="powerkit")


@click.group()
def cli():
    """Statistical power analysis: solvers, wizard, service, oracle."""


def _common_flags(fn):
    # the explicit second name keeps mixed-case flags (--pE) intact; click
    # would otherwise lowercase the derived parameter name
    for name in reversed(_INT_FLAGS):
        fn = click.option(f"--{name}", name, type=int, default=None)(fn)
    for name in reversed(_FLOAT_FLAGS):
        fn = click.option(f"--{name}", name, type=float, default=None)(fn)
    fn = click.option("--tails", "tails", type=click.Choice(["one", "two"]),
                      default=None)(fn)
    return fn


def _collect_params(kwargs) -> dict:
    return {k: v for k, v in kwargs.items() if v is not None}


def _emit(result_dict: dict, fmt: str) -> None:
    if fmt == "machine":
        for key in sorted(result_dict):
            value = result_dict[key]
            if isinstance(value, list):
                value = ",".join(str(v) for v in value)
            click.echo(f"{key}={value}")
    else:
        click.echo(json.dumps(result_dict, indent=2, sort_keys=True))


@cli.command("solve")
@click.argument("test", type=click.Choice(sorted(TESTS)))
@click.option("--target", type=click.Choice(["sample_size", "power", "effect"]),
              default="sample_size", show_default=True)
@click.option("--format", "fmt", type=click.Choice(["human", "machine"]),
              default="human", show_default=True)
@_common_flags
def solve_cmd(test, target, fmt, tails, **kwargs):
    """Solve one design for sample size, achieved power, or minimal effect."""
    params = _collect_params(kwargs)
    alpha = params.pop("alpha", 0.05)
    power = params.pop("power", None)
    n = params.pop("n", None)
    tails = tails or "two"
    try:
        errors = {}
        spec = None
        try:
            spec = build_spec(test, params, alpha=alpha, tails=tails)
        except InvalidDesignError as exc:
            errors.update(exc.errors)
        if target in ("sample_size", "effect") and power is None:
            errors["power"] = "missing required flag --power"
        if target in ("power", "effect") and n is None:
            errors["n"] = "missing required flag --n"
        if errors:
            raise InvalidDesignError(errors)
        if target == "sample_size":
            result = solve_n(spec, power)
        elif target == "power":
            result = solve_power(spec, n)
        else:
            result = solve_effect(spec, n, power)
    except InvalidDesignError as exc:
        for fieldname, message in exc.errors.items():
            click.echo(f"error: {fieldname}: {message}", err=True)
        sys.exit(2)
    except UnreachablePowerError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(2)

    out = result.to_dict()
    out.update({"alpha": alpha, "tails": tails})
    defaults_applied = {f.name: f.default for f in TESTS[test].param_fields
                        if f.default is not None and f.name not in params}
    if defaults_applied:
        out["defaults_applied"] = defaults_applied if fmt == "human" else \
            ",".join(f"{k}={v}" for k, v in sorted(defaults_applied.items()))
    _emit(out, fmt)


@cli.command("wizard")
@click.option("--transcript", type=click.Path(dir_okay=False), default=None,
              help="write the session transcript here on exit")
def wizard_cmd(transcript):
    """Interactive design session: describe the study, fill in parameters,
    solve, then explore what-ifs. EOF (Ctrl-D) exits cleanly."""
    state = new_session()
    click.echo("powerkit wizard. Commands: describe / choose / set / unset / "
               "solve / whatif / explain / export. Ctrl-D to finish.")
    click.echo("Example: describe outcome=binary groups=2")
    while True:
        try:
            line = click.prompt("powerkit", prompt_suffix="> ")
        except (EOFError, click.exceptions.Abort):
            break
        if not line.strip():
            continue
        if line.strip() in ("quit", "exit"):
            break
        try:
            cmd = parse_command(line)
        except ParseError as exc:
            click.echo(f"  parse error: {exc}")
            continue
        state, reply = apply(state, cmd)
        prefix = "  ! " if reply.error else "  "
        for ln in reply.text.splitlines():
            click.echo(prefix + ln)
    if transcript:
        with open(transcript, "w", encoding="utf-8") as fh:
            fh.write(export_transcript(state))
        click.echo(f"transcript saved to {transcript}")
    else:
        click.echo(export_transcript(state))


@cli.command("scenarios")
@click.option("--corpus", "corpus_path", type=click.Path(exists=False), default=None,
              help="corpus file (default: bundled)")
@click.option("--format", "fmt", type=click.Choice(["human", "machine"]),
              default="human", show_default=True)
def scenarios_cmd(corpus_path, fmt):
    """Regression-run the scenario corpus: selection accuracy, sample-size
    agreement, and wall time per scenario. Nonzero exit on any mismatch."""
    try:
        records = load_corpus(corpus_path)
    except CorpusError as exc:
        click.echo(f"corpus error: {exc}", err=True)
        sys.exit(3)
    except OSError as exc:
        click.echo(f"corpus error: {exc}", err=True)
        sys.exit(3)

    sel_ok = size_ok = 0
    rows = []
    for rec in records:
        t0 = time.perf_counter()
        recommendation = select(rec.descriptor)
        spec = build_spec(rec.expected_test, rec.params, alpha=rec.alpha)
        result = solve_n(spec, rec.power)
        elapsed_ms = (time.perf_counter() - t0) * 1000.0
        sel_hit = recommendation.test == rec.expected_test
        size_hit = (list(result.n_per_arm) == rec.expected.get("n_per_arm")
                    and result.n_total == rec.expected.get("n_total")
                    and (rec.expected.get("events_required") is None
                         or result.events_required == rec.expected["events_required"]))
        sel_ok += sel_hit
        size_ok += size_hit
        rows.append((rec.id, recommendation.test, sel_hit, result.n_total, size_hit,
                     elapsed_ms))

    if fmt == "machine":
        for rid, test, sel_hit, n_total, size_hit, ms in rows:
            click.echo(f"id={rid} test={test} selection={'ok' if sel_hit else 'MISMATCH'} "
                       f"n_total={n_total} size={'ok' if size_hit else 'MISMATCH'} "
                       f"ms={ms:.1f}")
    else:
        for rid, test, sel_hit, n_total, size_hit, ms in rows:
            mark = "ok " if (sel_hit and size_hit) else "FAIL"
            click.echo(f"[{mark}] {rid:24s} -> {test:18s} n_total={n_total:<6d} "
                       f"({ms:.1f} ms)")
    click.echo(f"selection: {sel_ok}/{len(records)}  sample size: "
               f"{size_ok}/{len(records)}")
    if sel_ok != len(records) or size_ok != len(records):
        sys.exit(1)


@cli.command("ratify")
@click.option("--replications", type=int, default=100_000, show_default=True)
@click.option("--seed", type=int, default=20240, show_default=True)
@click.option("--only", "only", multiple=True,
              help="restrict the grid to these test ids (repeatable)")
@click.option("--format", "fmt", type=click.Choice(["human", "machine"]),
              default="human", show_default=True)
def ratify_cmd(replications, seed, only, fmt):
    """Monte Carlo ratification of every closed form over the bundled grid.

    The machine format is deterministic for a given seed; rerunning with the
    same seed yields a byte-identical report."""
    grid = default_grid()
    if only:
        grid = [row for row in grid if row[0] in only]
        if not grid:
            click.echo(f"error: no grid rows for {only}", err=True)
            sys.exit(2)
    rows = ratify(grid, replications=replications, seed=seed)
    failures = 0
    for row in rows:
        params = ",".join(f"{k}={v:g}" if isinstance(v, float) else f"{k}={v}"
                          for k, v in sorted(row.params.items()))
        if fmt == "machine":
            click.echo(
                f"test={row.test} params={params} goal={row.power_goal:g} "
                f"n={'/'.join(str(v) for v in row.n_per_arm)} "
                f"formula={row.formula_power:.6f} mc={row.p_hat:.6f} "
                f"se={row.se:.6f} z={row.z_units:+.2f} class={row.tolerance_class} "
                f"status={row.status}")
        else:
            click.echo(f"[{row.status:4s}] {row.test:18s} {params:46s} "
                       f"goal={row.power_goal:g} formula={row.formula_power:.4f} "
                       f"mc={row.p_hat:.4f} (z={row.z_units:+.1f})")
        failures += row.status == "fail"
    click.echo(f"rows={len(rows)} failures={failures}")
    if failures:
        sys.exit(1)


@cli.command("curve")
@click.argument("test", type=click.Choice(sorted(TESTS)))
@click.option("--sweep", type=click.Choice(["power", "n", "effect"]), required=True)
@click.option("--from", "lo", type=float, required=True)
@click.option("--to", "hi", type=float, required=True)
@click.option("--steps", type=int, default=10, show_default=True)
@click.option("--format", "fmt", type=click.Choice(["human", "machine"]),
              default="machine", show_default=True)
@_common_flags
def curve_cmd(test, sweep, lo, hi, steps, fmt, tails, **kwargs):
    """Emit a (sweep value, n or power) table for external plotting."""
    if steps < 2 or not hi > lo:
        click.echo("error: sweep range needs --to > --from and --steps >= 2", err=True)
        sys.exit(2)
    params = _collect_params(kwargs)
    alpha = params.pop("alpha", 0.05)
    power = params.pop("power", None)
    n = params.pop("n", None)
    tails = tails or "two"
    effect_field = EFFECT_FIELD[test]

    # an effect sweep reports power when --n is fixed, required n when
    # --power is fixed
    effect_y = "power" if n is not None else "n_total"
    header = {"power": ("power", "n_total"), "n": ("n", "power"),
              "effect": (effect_field, effect_y)}[sweep]
    click.echo(f"# {header[0]}\t{header[1]}")
    for i in range(steps):
        x = lo + (hi - lo) * i / (steps - 1)
        try:
            if sweep == "power":
                spec = build_spec(test, params, alpha=alpha, tails=tails)
                y = solve_n(spec, x).n_total
            elif sweep == "n":
                spec = build_spec(test, params, alpha=alpha, tails=tails)
                y = power_of(spec, int(round(x)))
                x = int(round(x))
            else:
                spec = build_spec(test, {**params, effect_field: x},
                                  alpha=alpha, tails=tails)
                if n is not None:
                    y = power_of(spec, n)
                else:
                    y = solve_n(spec, power).n_total
        except (InvalidDesignError, UnreachablePowerError) as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(2)
        x_txt = f"{x:.6g}" if isinstance(x, float) else str(x)
        y_txt = f"{y:.6f}" if isinstance(y, float) else str(y)
        click.echo(f"{x_txt}\t{y_txt}")


@cli.command("serve")
@click.option("--host", default="0.0.0.0", show_default=True)
@click.option("--port", type=int, default=None,
              help="listen port (default: POWERKIT_PORT or 5000)")
def serve_cmd(host, port):
    """Start the HTTP service (binds only after full initialization)."""
    from .service import serve
    serve(host=host, port=port)


if __name__ == "__main__":
    main()
