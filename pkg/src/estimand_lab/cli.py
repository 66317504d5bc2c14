"""Command-line entry point.

Subcommands: ``simulate | truth | estimate | compare | check``. All file
output is CSV with floats printed to 17 significant digits (lossless
round-trip); every output directory also receives ``manifest.json``
recording the exact scenario, seeds, spec hash and kernel backend, so a
repeated run with an identical manifest reproduces the CSVs byte for byte.

Exit codes: 0 success, 2 user-input error, 3 I/O error, 4 estimand
undefined on this population, 5 estimation instability.
"""
from __future__ import annotations

import csv
import dataclasses
import hashlib
import io
import json
import sys
from datetime import datetime, timezone

import click
import numpy as np

from . import __version__, _kernels
from .analysis_sets import build_sets, randomization_balance_check
from .dgp import ScenarioConfig, config_to_text, load_config, simulate_population
from .errors import (
    BootstrapInstabilityError,
    ConfigError,
    EstimandLabError,
    EstimandUndefinedError,
    ParseError,
    PlanError,
)
from .estimators import bootstrap_plan, execute_plan
from .oracle import oracle_from_plan
from .potential_outcomes import (
    CASE_LABELS,
    DEATH_LABELS,
    PrincipalStratum,
    derive_observed_table,
    strata_of,
)
from .replication import gap_study, run_replications
from .rng import split_seed
from .speclang import parse_spec, plan_of

EXIT_INPUT = 2
EXIT_IO = 3
EXIT_UNDEFINED = 4
EXIT_UNSTABLE = 5


def _fmt(x) -> str:
    """17-significant-digit float rendering; empty cell for missing."""
    if x is None:
        return ""
    if isinstance(x, float) and not np.isfinite(x):
        return ""
    if isinstance(x, (float, np.floating)):
        return f"{float(x):.17g}"
    return str(x)


def _fail(code: int, message: str):
    click.echo(f"error: {message}", err=True)
    sys.exit(code)


def _load_inputs(config_path, spec_path=None, seed=None):
    try:
        cfg = load_config(config_path)
    except ConfigError as exc:
        _fail(EXIT_INPUT, f"{config_path}: {exc}")
    except OSError as exc:
        _fail(EXIT_IO, str(exc))
    if seed is not None:
        cfg = dataclasses.replace(cfg, seed=seed)
    if spec_path is None:
        return cfg, None, None
    try:
        with open(spec_path, "r", encoding="utf-8") as fh:
            source = fh.read()
    except OSError as exc:
        _fail(EXIT_IO, str(exc))
    try:
        specs = parse_spec(source)
    except ParseError as exc:
        _fail(EXIT_INPUT, f"{spec_path}:{exc}")
    return cfg, specs, source


def _manifest(cfg: ScenarioConfig, *, command: str, replications: int = 1,
              spec_source: str | None = None, n_boot: int = 0) -> dict:
    return {
        "tool_version": __version__,
        "command": command,
        "backend": _kernels.BACKEND,
        "seed": cfg.seed,
        "replications": replications,
        "n_boot": n_boot,
        "spec_sha256": hashlib.sha256(spec_source.encode()).hexdigest()
        if spec_source is not None else None,
        "config": config_to_text(cfg),
        "created_utc": datetime.now(timezone.utc).isoformat(),
    }


def _write_manifest(out_dir, manifest: dict):
    with open(out_dir / "manifest.json", "w", encoding="utf-8", newline="\n") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _write_csv(path, header, rows):
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(header)
            writer.writerows(rows)
    except OSError as exc:
        _fail(EXIT_IO, str(exc))


@click.group()
@click.version_option(__version__)
def main():
    """Simulate two-arm trials with intercurrent events and compare
    observed-data estimators against exact potential-outcome oracles."""


@main.command()
@click.option("--config", "config_path", required=True, type=click.Path(), help="Scenario file.")
@click.option("--out", "out_dir", required=True, type=click.Path(), help="Output directory.")
@click.option("--seed", type=int, default=None, help="Override the config seed.")
@click.option("--emit-latent", is_flag=True,
              help="Also write latent.csv (the oracle-only potential table).")
def simulate(config_path, out_dir, seed, emit_latent):
    """Write observed.csv (and optionally latent.csv) for one simulated cohort."""
    import pathlib

    cfg, _, _ = _load_inputs(config_path, seed=seed)
    out = pathlib.Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        _fail(EXIT_IO, str(exc))
    pop = simulate_population(cfg)
    obs = derive_observed_table(pop)

    k = cfg.k
    header = (
        ["id"] + [f"c{j + 1}" for j in range(k)]
        + ["r_obs", "x_obs", "m_obs", "death_obs", "t_obs", "y1_obs", "y2_obs",
           "figure2_case", "enrolled", "any_dose", "post_rand_data",
           "protocol_deviation"]
    )
    rows = []
    for i in range(obs.n):
        rows.append(
            [int(obs.ids[i])]
            + [_fmt(float(obs.c[i, j])) for j in range(k)]
            + [int(obs.r_obs[i]), int(obs.x_obs[i]), int(obs.m_obs[i]),
               DEATH_LABELS[int(obs.death_obs[i])], int(obs.t_obs[i]),
               _fmt(None if np.isnan(obs.y1_obs[i]) else float(obs.y1_obs[i])),
               _fmt(None if np.isnan(obs.y2_obs[i]) else float(obs.y2_obs[i])),
               CASE_LABELS[int(obs.case[i])], int(obs.enrolled[i]),
               int(obs.any_dose[i]), int(obs.post_rand_data[i]),
               int(obs.deviation[i])]
        )
    _write_csv(out / "observed.csv", header, rows)

    if emit_latent:
        strata = strata_of(pop)
        lheader = (
            ["id"] + [f"c{j + 1}" for j in range(k)]
            + ["s", "r", "x_r0", "x_r1",
               "y1_x0", "y1_x1", "y2_x0", "y2_x1",
               "y1_free_x0", "y1_free_x1", "y2_free_x0", "y2_free_x1",
               "m_x0", "m_x1", "death_x0", "death_x1", "t_x0", "t_x1",
               "w_x0", "w_x1", "dev_x0", "dev_x1",
               "any_dose", "post_rand_data", "stratum"]
        )
        lrows = []
        for i in range(pop.n):
            lrows.append(
                [int(pop.ids[i])]
                + [_fmt(float(pop.c[i, j])) for j in range(k)]
                + [int(pop.s[i]), int(pop.r[i]),
                   int(pop.x_under[i, 0]), int(pop.x_under[i, 1]),
                   _fmt(float(pop.y1_under[i, 0])), _fmt(float(pop.y1_under[i, 1])),
                   _fmt(float(pop.y2_under[i, 0])), _fmt(float(pop.y2_under[i, 1])),
                   _fmt(float(pop.y1_free[i, 0])), _fmt(float(pop.y1_free[i, 1])),
                   _fmt(float(pop.y2_free[i, 0])), _fmt(float(pop.y2_free[i, 1])),
                   int(pop.m_under[i, 0]), int(pop.m_under[i, 1]),
                   DEATH_LABELS[int(pop.death_under[i, 0])],
                   DEATH_LABELS[int(pop.death_under[i, 1])],
                   int(pop.t_under[i, 0]), int(pop.t_under[i, 1]),
                   int(pop.w_under[i, 0]), int(pop.w_under[i, 1]),
                   int(pop.dev_under[i, 0]), int(pop.dev_under[i, 1]),
                   int(pop.any_dose[i]), int(pop.post_rand_data[i]),
                   PrincipalStratum(int(strata[i])).name]
            )
        _write_csv(out / "latent.csv", lheader, lrows)

    _write_manifest(out, _manifest(cfg, command="simulate"))


@main.command()
@click.option("--config", "config_path", required=True, type=click.Path())
@click.option("--spec", "spec_path", required=True, type=click.Path())
@click.option("--seed", type=int, default=None, help="Override the config seed.")
def truth(config_path, spec_path, seed):
    """Print the oracle value of every estimand in the spec file (CSV to stdout)."""
    cfg, specs, _ = _load_inputs(config_path, spec_path, seed=seed)
    plans = _plans_or_fail(specs)
    pop = simulate_population(cfg)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["name", "strategy", "value", "population_size_used", "endpoint"])
    for spec, plan in plans:
        try:
            val = oracle_from_plan(pop, plan)
        except EstimandUndefinedError as exc:
            _fail(EXIT_UNDEFINED, f"estimand {spec.name!r}: {exc}")
        writer.writerow([spec.name, spec.strategy_label(), _fmt(val.value),
                         val.population_size_used, val.endpoint_used])
    click.echo(buf.getvalue(), nl=False)


def _plans_or_fail(specs):
    plans = []
    for spec in specs:
        try:
            plans.append((spec, plan_of(spec)))
        except PlanError as exc:
            _fail(EXIT_INPUT, str(exc))
    return plans


@main.command()
@click.option("--config", "config_path", required=True, type=click.Path())
@click.option("--spec", "spec_path", required=True, type=click.Path())
@click.option("--reps", type=int, default=1, show_default=True,
              help="Number of simulated replications.")
@click.option("--boot", "n_boot", type=int, default=0, show_default=True,
              help="Bootstrap resamples per replication (0 = model-based CI).")
@click.option("--out", "out_dir", required=True, type=click.Path())
@click.option("--seed", type=int, default=None, help="Override the config seed.")
def estimate(config_path, spec_path, reps, n_boot, out_dir, seed):
    """Estimate every estimand on simulated observed data, with a summary block."""
    import pathlib

    if reps < 1:
        _fail(EXIT_INPUT, "--reps must be >= 1")
    if n_boot < 0 or (0 < n_boot < 100):
        _fail(EXIT_INPUT, "--boot must be 0 or >= 100")
    cfg, specs, spec_source = _load_inputs(config_path, spec_path, seed=seed)
    plans = _plans_or_fail(specs)
    out = pathlib.Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        _fail(EXIT_IO, str(exc))

    def one_rep(r, rep_cfg):
        pop = simulate_population(rep_cfg)
        obs = derive_observed_table(pop)
        rows = []
        for spec, plan in plans:
            oracle_val = oracle_from_plan(pop, plan).value
            try:
                if n_boot:
                    res = bootstrap_plan(obs, plan, n_boot=n_boot, seed=rep_cfg.seed)
                else:
                    res = execute_plan(plan, obs, seed=rep_cfg.seed)
                rows.append((spec.name, res, oracle_val, ""))
            except EstimandLabError as exc:
                rows.append((spec.name, None, oracle_val, type(exc).__name__))
        return rows

    per_rep = run_replications(cfg, reps, one_rep)

    result_rows = []
    by_name: dict = {name: ([], []) for name, _ in ((s.name, None) for s, _ in plans)}
    for r, rows in enumerate(per_rep):
        for name, res, oracle_val, failure in rows:
            points, oracles = by_name[name]
            if res is None:
                result_rows.append([name, r, "", "", "", "", "", "", failure])
                points.append(np.nan)
            else:
                result_rows.append([
                    name, r, _fmt(res.point), _fmt(res.std_error),
                    _fmt(res.ci_low), _fmt(res.ci_high), res.n_used,
                    res.n_imputations, "",
                ])
                points.append(res.point)
            oracles.append(oracle_val)
    _write_csv(
        out / "results.csv",
        ["estimand", "replication", "point", "std_error", "ci_low", "ci_high",
         "n_used", "n_imputations", "failure"],
        result_rows,
    )

    summary_rows = []
    worst_failure_rate = 0.0
    for spec, plan in plans:
        points, oracles = by_name[spec.name]
        points = np.array(points)
        oracles = np.array(oracles)
        ok = np.isfinite(points)
        n_failed = int((~ok).sum())
        worst_failure_rate = max(worst_failure_rate, n_failed / reps)
        if ok.any():
            gaps = points[ok] - oracles[ok]
            mean_gap = float(gaps.mean())
            mc_se = float(gaps.std(ddof=1) / np.sqrt(len(gaps))) if len(gaps) > 1 else 0.0
            summary_rows.append([
                spec.name, spec.strategy_label(), reps, n_failed,
                _fmt(float(points[ok].mean())), _fmt(mc_se),
                _fmt(float(oracles[ok].mean())), _fmt(mean_gap),
                int(abs(mean_gap) <= 3.0 * mc_se) if mc_se > 0 else 1,
            ])
        else:
            summary_rows.append([spec.name, spec.strategy_label(), reps, n_failed,
                                 "", "", _fmt(float(oracles.mean())), "", 0])
    _write_csv(
        out / "summary.csv",
        ["estimand", "strategy", "replications", "failures", "mean_point",
         "mc_se", "mean_oracle", "mean_gap", "abs_gap_le_3mcse"],
        summary_rows,
    )
    _write_manifest(out, _manifest(cfg, command="estimate", replications=reps,
                                   spec_source=spec_source, n_boot=n_boot))
    if worst_failure_rate > 0.5:
        _fail(EXIT_UNSTABLE,
              f"estimator failed in {worst_failure_rate:.0%} of replications")


@main.command()
@click.option("--config", "config_path", required=True, type=click.Path())
@click.option("--spec", "spec_path", required=True, type=click.Path())
@click.option("--reps", type=int, default=50, show_default=True)
@click.option("--out", "out_dir", required=True, type=click.Path())
@click.option("--seed", type=int, default=None, help="Override the config seed.")
def compare(config_path, spec_path, reps, out_dir, seed):
    """Contrast each estimand across analysis sets (ITTS vs FAS vs PPS)."""
    import pathlib

    if reps < 1:
        _fail(EXIT_INPUT, "--reps must be >= 1")
    cfg, specs, spec_source = _load_inputs(config_path, spec_path, seed=seed)
    plans = _plans_or_fail(specs)
    out = pathlib.Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        _fail(EXIT_IO, str(exc))

    set_names = ("itts", "fas", "pps")

    def one_rep(r, rep_cfg):
        pop = simulate_population(rep_cfg)
        obs = derive_observed_table(pop)
        sets = build_sets(obs)
        rows = {}
        for spec, plan in plans:
            oracle_val = oracle_from_plan(pop, plan).value
            for set_name in set_names:
                sub = obs.subset(sets.mask(set_name))
                try:
                    point = execute_plan(plan, sub, seed=rep_cfg.seed).point
                except EstimandLabError:
                    point = np.nan
                try:
                    balance = randomization_balance_check(sub, "itts")
                    max_smd = balance.max_abs_smd
                    flagged = balance.any_flagged
                except EstimandLabError:
                    max_smd, flagged = np.nan, True
                rows[(spec.name, set_name)] = (point, oracle_val, max_smd, flagged)
        return rows

    per_rep = run_replications(cfg, reps, one_rep)

    out_rows = []
    for spec, plan in plans:
        for set_name in set_names:
            entries = [rep[(spec.name, set_name)] for rep in per_rep]
            points = np.array([e[0] for e in entries])
            oracles = np.array([e[1] for e in entries])
            smds = np.array([e[2] for e in entries])
            flagged = np.array([e[3] for e in entries])
            ok = np.isfinite(points)
            gaps = points[ok] - oracles[ok]
            mc_se = float(gaps.std(ddof=1) / np.sqrt(len(gaps))) if len(gaps) > 1 else 0.0
            mean_gap = float(gaps.mean()) if ok.any() else np.nan
            out_rows.append([
                spec.name, set_name, reps, int((~ok).sum()),
                _fmt(float(points[ok].mean()) if ok.any() else None),
                _fmt(mc_se), _fmt(float(oracles.mean())),
                _fmt(mean_gap),
                int(abs(mean_gap) > 3.0 * mc_se) if ok.any() and mc_se > 0 else "",
                _fmt(float(np.nanmean(smds))),
                int(flagged.mean() > 0.5),
            ])
    _write_csv(
        out / "comparison.csv",
        ["estimand", "analysis_set", "replications", "failures", "mean_point",
         "mc_se", "mean_oracle", "mean_gap", "gap_exceeds_3mcse",
         "mean_max_abs_smd", "smd_flagged"],
        out_rows,
    )
    _write_manifest(out, _manifest(cfg, command="compare", replications=reps,
                                   spec_source=spec_source))


@main.command()
@click.argument("spec_paths", nargs=-1, required=True, type=click.Path())
def check(spec_paths):
    """Parse .estimand files and report the first error, if any."""
    for path in spec_paths:
        try:
            with open(path, "r", encoding="utf-8") as fh:
                specs = parse_spec(fh.read())
        except OSError as exc:
            _fail(EXIT_IO, str(exc))
        except ParseError as exc:
            _fail(EXIT_INPUT, f"{path}:{exc}")
        click.echo(f"{path}: {len(specs)} estimand(s) OK")


if __name__ == "__main__":
    main()
