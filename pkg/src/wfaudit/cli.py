"""Command-line surface: stats | audit | sweep | validate | synth.

Figures are emitted as plot-ready CSV files; nothing is rendered. Exit codes:
0 success, 1 usage error, 2 data error.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from . import abstraction as ab
from . import audit as au
from . import economics as ec
from .agent import validate as run_validation
from .audit import DEFAULT_EXCEPTION_SET, GateConfig
from .config import (actor_rule_from_config, bins_from_config, level_from_str,
                     load_config, load_exception_set, resolve_schema,
                     schema_from_config)
from .errors import WfauditError
from .eventlog import chronological_split, compute_log_stats, ingest_csv
from .model import build_counts, occupancy
from .synth import GroundTruthProcess, generate, write_csv

DEFAULT_TAUS = (50, 200, 1000)
DEFAULT_H0S = tuple(x / 4 for x in range(4, 13))  # 1.0 .. 3.0 step 0.25


def _fmt(x) -> str:
    return repr(x) if isinstance(x, float) else str(x)


def _write_csv(path: Path, header: list, rows: list) -> None:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_fmt(v) for v in row))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def _write_json(path: Path, doc) -> None:
    path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def _floats(text: str) -> list:
    return [float(x) for x in text.split(",") if x.strip()]


def _ints(text: str) -> list:
    return [int(x) for x in text.split(",") if x.strip()]


def _setup(config_path, schema, exceptions):
    doc = load_config(config_path) if config_path else {}
    if schema:
        mapping = resolve_schema(schema)
    else:
        mapping = schema_from_config(doc) if doc else None
    if mapping is None:
        mapping = resolve_schema(None)
    actor_rule = actor_rule_from_config(doc)
    explicit_bins = bins_from_config(doc)
    exc = load_exception_set(exceptions) if exceptions else DEFAULT_EXCEPTION_SET
    return mapping, actor_rule, explicit_bins, exc


def _abstractor(log, level, actor_rule, explicit_bins):
    if explicit_bins is not None and level is ab.AbstractionLevel.L3:
        return ab.Abstractor(level=level, bins=explicit_bins, actor_rule=actor_rule)
    return ab.Abstractor.fit(log, level, actor_rule=actor_rule)


@click.group()
def cli():
    """Audit where a workflow event log statistically supports autonomous execution."""


@cli.command()
@click.argument("log_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--schema", default=None, help="'bpi2019', 'canonical', or a schema config file")
@click.option("--config", "config_path", default=None, type=click.Path(exists=True))
@click.option("--out", default=None, type=click.Path(file_okay=False))
def stats(log_path, schema, config_path, out):
    """Descriptive log statistics (case lengths, self-loops, start shares)."""
    mapping, _, _, _ = _setup(config_path, schema, None)
    log = ingest_csv(log_path, mapping)
    st = compute_log_stats(log)
    click.echo(f"cases                {st.n_cases}")
    click.echo(f"events               {st.n_events}")
    click.echo(f"activities           {st.n_activities}")
    click.echo(f"mean case length     {st.mean_case_len:.2f}")
    click.echo(f"median case length   {st.median_case_len:.1f}")
    click.echo(f"p99 case length      {st.p99_case_len:.1f}")
    click.echo(f"max case length      {st.max_case_len}")
    click.echo(f"self-loop transitions {st.selfloop_transition_rate:.3f}")
    click.echo(f"self-loop cases      {st.selfloop_case_rate:.3f}")
    top = sorted(st.start_activity_shares.items(), key=lambda kv: -kv[1])[:5]
    for act, share in top:
        click.echo(f"start {share:6.3f}  {act}")
    if out:
        outdir = Path(out)
        outdir.mkdir(parents=True, exist_ok=True)
        _write_json(outdir / "stats.json", st.to_dict())


@cli.command()
@click.argument("log_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--schema", default=None)
@click.option("--config", "config_path", default=None, type=click.Path(exists=True))
@click.option("--levels", default="l1,l2,l3", help="comma list of l1,l2,l3")
@click.option("--tau", default="50,200,1000", help="comma list of support thresholds")
@click.option("--exceptions", default=None, type=click.Path(exists=True))
@click.option("--out", default=".", type=click.Path(file_okay=False))
def audit(log_path, schema, config_path, levels, tau, exceptions, out):
    """Blind-mass audit per abstraction level (state counts, B curves)."""
    mapping, actor_rule, explicit_bins, exc = _setup(config_path, schema, exceptions)
    taus = _ints(tau)
    log = ingest_csv(log_path, mapping)
    outdir = Path(out)
    outdir.mkdir(parents=True, exist_ok=True)
    table_rows = []
    curve_rows = []
    for lvl_name in levels.split(","):
        level = level_from_str(lvl_name.strip())
        abstr = _abstractor(log, level, actor_rule, explicit_bins)
        counts = build_counts(log, abstr)
        occ = occupancy(counts)
        weights = au.risk_weights(counts, exc)
        curve = au.blind_mass_curve(counts, occ, weights, taus)
        row = [level.value, counts.n_states, counts.n_pairs]
        for i, t in enumerate(taus):
            row += [curve.state_mass[i], curve.sa_mass[i], curve.sa_risk_mass[i]]
            curve_rows.append([level.value, t, curve.state_mass[i],
                               curve.sa_mass[i], curve.sa_risk_mass[i]])
        table_rows.append(row)
        click.echo(f"{level.value}: {counts.n_states} states, {counts.n_pairs} SA pairs")
    header = ["level", "states", "sa_pairs"]
    for t in taus:
        header += [f"b_state_{t}", f"b_sa_{t}", f"b_sa_risk_{t}"]
    _write_csv(outdir / "audit_table.csv", header, table_rows)
    _write_csv(outdir / "blind_mass_curve.csv",
               ["level", "tau", "state_mass", "sa_mass", "sa_risk_mass"], curve_rows)
    click.echo(f"wrote {outdir / 'audit_table.csv'} and {outdir / 'blind_mass_curve.csv'}")


@cli.command()
@click.argument("log_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--schema", default=None)
@click.option("--config", "config_path", default=None, type=click.Path(exists=True))
@click.option("--level", default="l3")
@click.option("--tau", default="50")
@click.option("--h0", default=",".join(str(h) for h in DEFAULT_H0S))
@click.option("--w0", default="0.6")
@click.option("--split", default=0.8, type=float)
@click.option("--ca", default=1.0, type=float, help="cost per autonomous decision")
@click.option("--ch", default=10.0, type=float, help="cost per escalated decision")
@click.option("--lambda", "error_penalty", default=0.0, type=float)
@click.option("--exceptions", default=None, type=click.Path(exists=True))
@click.option("--out", default=".", type=click.Path(file_okay=False))
def sweep(log_path, schema, config_path, level, tau, h0, w0, split, ca, ch,
          error_penalty, exceptions, out):
    """Autonomy envelope on the full log and cost frontier on the split."""
    mapping, actor_rule, explicit_bins, exc = _setup(config_path, schema, exceptions)
    lvl = level_from_str(level)
    taus, h0s, w0s = _ints(tau), _floats(h0), _floats(w0)
    log = ingest_csv(log_path, mapping)
    outdir = Path(out)
    outdir.mkdir(parents=True, exist_ok=True)

    abstr = _abstractor(log, lvl, actor_rule, explicit_bins)
    counts = build_counts(log, abstr)
    weights = au.risk_weights(counts, exc)
    env_rows = []
    for t in taus:
        for w in w0s:
            for h in h0s:
                shares = au.autonomy_shares(log, counts, weights,
                                            GateConfig(tau=t, h0=h, w0=w), abstr)
                env_rows.append([t, h, w, shares.a_event, shares.a_case])
    _write_csv(outdir / "autonomy_envelope.csv",
               ["tau", "h0", "w0", "a_event", "a_case"], env_rows)

    train, test = chronological_split(log, split)
    train_abstr = _abstractor(train, lvl, actor_rule, explicit_bins)
    train_counts = build_counts(train, train_abstr)
    train_weights = au.risk_weights(train_counts, exc)
    test_occ = occupancy(build_counts(test, train_abstr))
    grid = [GateConfig(tau=t, h0=h, w0=w) for t in taus for w in w0s for h in h0s]
    params = ec.CostParams(c_autonomous=ca, c_human=ch, error_penalty=error_penalty)
    points = ec.sweep_frontier(test, train_counts, train_weights, grid, params,
                               train_abstr, test_occ)
    _write_csv(outdir / "frontier.csv",
               ["tau", "h0", "w0", "touches_per_case", "safe_completion_test",
                "safe_completion_surrogate", "zero_touch_test", "cost", "cost_lambda"],
               [[p.cfg.tau, p.cfg.h0, p.cfg.w0, p.touches_per_case, p.safe_completion,
                 p.safe_completion_surrogate, p.zero_touch, p.cost_per_case,
                 p.cost_with_error] for p in points])
    click.echo(f"wrote {outdir / 'autonomy_envelope.csv'} and {outdir / 'frontier.csv'}")


@cli.command()
@click.argument("log_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--schema", default=None)
@click.option("--config", "config_path", default=None, type=click.Path(exists=True))
@click.option("--level", default="l3")
@click.option("--tau", default=50, type=int)
@click.option("--h0", default=",".join(str(h) for h in DEFAULT_H0S))
@click.option("--w0", default=0.6, type=float)
@click.option("--split", default=0.8, type=float)
@click.option("--band", default="1.5,2.0", help="entropy band (h_lo, h_hi] for gateway states")
@click.option("--exceptions", default=None, type=click.Path(exists=True))
@click.option("--out", default=".", type=click.Path(file_okay=False))
def validate(log_path, schema, config_path, level, tau, h0, w0, split, band,
             exceptions, out):
    """Held-out agent run vs theoretical surrogates across an h0 grid."""
    mapping, actor_rule, explicit_bins, exc = _setup(config_path, schema, exceptions)
    lvl = level_from_str(level)
    h0s = _floats(h0)
    h_lo, h_hi = _floats(band)
    log = ingest_csv(log_path, mapping)
    outdir = Path(out)
    outdir.mkdir(parents=True, exist_ok=True)

    train, test = chronological_split(log, split)
    abstr = _abstractor(train, lvl, actor_rule, explicit_bins)
    train_counts = build_counts(train, abstr)
    weights = au.risk_weights(train_counts, exc)
    report = run_validation(test, train_counts, weights, h0s, tau, w0, abstr)
    _write_csv(outdir / "validation.csv",
               ["h0", "m_step_theory", "m_step_test", "r_safe_theory", "r_safe_test",
                "c0_theory", "c0_test", "case_autonomy", "touches_per_case"],
               [[s.cfg.h0, s.m_step_theory, s.m_step_test, s.r_safe_theory,
                 s.r_safe_test, s.c0_theory, s.c0_test, s.case_autonomy,
                 s.touches_per_case] for s in report.summaries])
    _write_json(outdir / "step_gap.json", {
        "mean_abs_step_gap": report.mean_abs_step_gap,
        "max_abs_step_gap": report.max_abs_step_gap,
        "h0_grid": h0s,
    })
    gw = au.gateway_band_analysis(test, train_counts, weights,
                                  GateConfig(tau=tau, h0=h_hi, w0=w0),
                                  (h_lo, h_hi), abstr)
    _write_json(outdir / "gateway_band.json", {
        "band": [h_lo, h_hi],
        "n_states": gw.n_states,
        "decision_share": gw.decision_share,
        "case_share": gw.case_share,
        "states": [list(s) for s in gw.states],
    })
    for s in report.summaries:
        click.echo(f"h0={s.cfg.h0:5.2f} m_theory={s.m_step_theory} m_test={s.m_step_test} "
                   f"r_safe={s.r_safe_test:.3f} c0={s.c0_test:.3f} "
                   f"touches={s.touches_per_case:.2f}")
    click.echo(f"mean abs step gap: {report.mean_abs_step_gap}")


@cli.command()
@click.argument("process_spec", type=click.Path(exists=True, dir_okay=False))
@click.option("--n", default=100, type=int, help="number of cases")
@click.option("--seed", default=0, type=int)
@click.option("--out", "out_file", required=True, type=click.Path(dir_okay=False))
def synth(process_spec, n, seed, out_file):
    """Generate a CSV log from a ground-truth process spec (TOML/JSON)."""
    process = GroundTruthProcess.from_dict(load_config(process_spec))
    log = generate(process, n, seed)
    write_csv(log, out_file)
    click.echo(f"wrote {log.n_cases} cases / {log.n_events} events to {out_file}")


def main(argv=None) -> int:
    try:
        cli.main(args=argv, standalone_mode=False)
    except click.UsageError as exc:
        click.echo(f"usage error: {exc.format_message()}", err=True)
        return 1
    except click.ClickException as exc:
        exc.show()
        return 1
    except click.Abort:
        return 1
    except (WfauditError, OSError, ValueError) as exc:
        click.echo(f"error: {type(exc).__name__}: {exc}", err=True)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
