"""Command-line front end: scenario runs, sampling campaigns, comparisons.

Subcommands: simulate, sample-tau, fit-tau, compare, validate-config.
Exit codes: 0 success (and safety verdict passed), 2 configuration error,
3 run or fit failure.

Output files are written atomically (temp file + rename); a failed command
leaves no partial files.  Identical config and seed reproduce outputs
byte-for-byte.  ETSAFE_LOG_LEVEL (error | info | debug) controls stderr
logging.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys
from typing import Optional

import numpy as np

from .config import ConfigError, ScenarioConfig, parse_config
from .engine import (
    AssumptionCheckError,
    RunAbortedError,
    RunResult,
    run_greedy_impulsive,
    run_intermittent_filter,
    run_maneuver,
)
from .inter_event import (
    FitError,
    collect_inter_event_samples,
    fit_inter_event_model,
    load_model,
    load_samples,
    save_model,
    save_samples,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_RUN = 3

log = logging.getLogger("etsafe")


def _setup_logging() -> None:
    level = os.environ.get("ETSAFE_LOG_LEVEL", "info").lower()
    mapping = {"error": logging.ERROR, "info": logging.INFO, "debug": logging.DEBUG}
    logging.basicConfig(
        stream=sys.stderr,
        level=mapping.get(level, logging.INFO),
        format="%(levelname)s %(name)s: %(message)s",
    )


# --- Writers ---


def _fmt(x) -> str:
    return repr(float(x))


def _atomic_write(path: str, content: str) -> None:
    tmp = f"{path}.tmp"
    with open(tmp, "w", encoding="utf-8") as fh:
        fh.write(content)
    os.replace(tmp, path)


def write_trajectory_csv(path: str, result: RunResult, kind: str) -> None:
    """Satellite columns: t,rx,ry,rz,vx,vy,vz,r,h,xi_active_monitor,filter_state.
    Planar columns: t,x1,x2,h,xi_active_monitor,filter_state."""
    traj = result.trajectory
    lines = []
    if kind == "satellite":
        lines.append("t,rx,ry,rz,vx,vy,vz,r,h,xi_active_monitor,filter_state")
        radii = np.linalg.norm(traj.states[:, :3], axis=1)
        for i in range(len(traj.times)):
            s = traj.states[i]
            lines.append(
                ",".join(
                    [_fmt(traj.times[i])]
                    + [_fmt(v) for v in s]
                    + [_fmt(radii[i]), _fmt(traj.h[i]), _fmt(traj.xi_active[i])]
                    + [str(int(traj.filter_on[i]))]
                )
            )
    else:
        lines.append("t,x1,x2,h,xi_active_monitor,filter_state")
        for i in range(len(traj.times)):
            s = traj.states[i]
            lines.append(
                ",".join(
                    [_fmt(traj.times[i]), _fmt(s[0]), _fmt(s[1])]
                    + [_fmt(traj.h[i]), _fmt(traj.xi_active[i])]
                    + [str(int(traj.filter_on[i]))]
                )
            )
    _atomic_write(path, "\n".join(lines) + "\n")


def write_events_csv(path: str, result: RunResult) -> None:
    """Columns: t,kind,trigger_id,h_before,h_after,xi_after,dv_mag
    (dv_mag empty for filter toggles)."""
    lines = ["t,kind,trigger_id,h_before,h_after,xi_after,dv_mag"]
    for e in result.events:
        dv = "" if e.impulse_magnitude is None else _fmt(e.impulse_magnitude)
        lines.append(
            ",".join(
                [
                    _fmt(e.time),
                    e.kind,
                    e.trigger_id,
                    _fmt(e.h_before),
                    _fmt(e.h_after),
                    _fmt(e.xi_after),
                    dv,
                ]
            )
        )
    _atomic_write(path, "\n".join(lines) + "\n")


def _jsonable(value):
    if value is None:
        return None
    if isinstance(value, (bool, int, str)):
        return value
    value = float(value)
    return value if math.isfinite(value) else None


def summary_document(result: RunResult, cfg: ScenarioConfig) -> dict:
    s = result.summary
    doc = {
        "scheme": s.scheme,
        "scenario_kind": cfg.kind,
        "horizon": _jsonable(s.horizon),
        "seed": s.seed,
        "gamma": _jsonable(s.gamma),
        "d_bar": _jsonable(s.d_bar),
        "step_size": _jsonable(s.step_size),
        "time_tolerance": _jsonable(s.time_tolerance),
        "value_tolerance": _jsonable(s.value_tolerance),
        "jump_count": s.jump_count,
        "filter_on_count": s.filter_on_count,
        "filter_off_count": s.filter_off_count,
        "event_count": s.event_count,
        "min_inter_event_time": _jsonable(s.min_inter_event_time),
        "mean_inter_event_time": _jsonable(s.mean_inter_event_time),
        "median_inter_event_time": _jsonable(s.median_inter_event_time),
        "min_h": _jsonable(s.min_h),
        "min_xi_flow": _jsonable(s.min_xi_flow),
        "miet_lower_bound": _jsonable(s.miet_lower_bound),
        "min_post_jump_margin": _jsonable(s.min_post_jump_margin),
        "aborted": s.aborted,
        "horizon_truncated": s.horizon_truncated,
        "assumption_check_samples": s.assumption_check_samples,
        "max_on_duration": _jsonable(s.max_on_duration),
        "hours_per_time_unit": _jsonable(cfg.hours_per_time_unit),
        "horizon_hours": _jsonable(s.horizon * cfg.hours_per_time_unit),
    }
    return doc


def write_summary_json(path: str, result: RunResult, cfg: ScenarioConfig) -> None:
    _atomic_write(path, json.dumps(summary_document(result, cfg), indent=2) + "\n")


def _write_run_outputs(out_dir: str, result: RunResult, cfg: ScenarioConfig) -> None:
    os.makedirs(out_dir, exist_ok=True)
    write_trajectory_csv(os.path.join(out_dir, "trajectory.csv"), result, cfg.kind)
    write_events_csv(os.path.join(out_dir, "events.csv"), result)
    write_summary_json(os.path.join(out_dir, "summary.json"), result, cfg)


# --- Run helpers ---


def _load_config(path: str, seed: Optional[int], horizon: Optional[float]) -> ScenarioConfig:
    cfg = parse_config(path)
    if seed is not None:
        if seed < 0:
            raise ConfigError("--seed must be >= 0")
        cfg.seed = seed
    if horizon is not None:
        if not horizon > 0.0:
            raise ConfigError("--horizon must be > 0")
        cfg.horizon = horizon
    return cfg


def _execute(cfg: ScenarioConfig, scheme: str) -> RunResult:
    if cfg.kind == "satellite":
        scenario = cfg.build_satellite()
        if scheme == "greedy":
            return run_greedy_impulsive(scenario, cfg.initial_state, cfg.horizon, seed=cfg.seed)
        model = load_model(cfg.tau_model_path)
        return run_maneuver(scenario, model, cfg.initial_state, cfg.horizon, seed=cfg.seed)
    scenario = cfg.build_planar()
    return run_intermittent_filter(scenario, cfg.initial_state, cfg.horizon, seed=cfg.seed)


# --- Subcommands ---


def cmd_validate_config(config_path: str) -> int:
    try:
        parse_config(config_path)
    except ConfigError as err:
        log.error("%s", err)
        return EXIT_CONFIG
    print(f"config ok: {config_path}")
    return EXIT_OK


def cmd_simulate(
    config_path: str,
    out_dir: str,
    seed: Optional[int] = None,
    horizon: Optional[float] = None,
) -> int:
    try:
        cfg = _load_config(config_path, seed, horizon)
    except ConfigError as err:
        log.error("%s", err)
        return EXIT_CONFIG
    try:
        result = _execute(cfg, cfg.trigger_scheme)
    except AssumptionCheckError as err:
        log.error("configuration rejected: %s", err)
        return EXIT_CONFIG
    except (RunAbortedError, FileNotFoundError) as err:
        log.error("run failed: %s", err)
        return EXIT_RUN
    _write_run_outputs(out_dir, result, cfg)
    s = result.summary
    safe = s.min_h >= -cfg.value_tolerance
    print(
        f"scheme={s.scheme} events={s.event_count} min_h={s.min_h!r} "
        f"safe={safe} out={out_dir}"
    )
    return EXIT_OK if safe else EXIT_RUN


def cmd_sample_tau(
    config_path: str,
    out_path: str,
    grid: Optional[str] = None,
    n: Optional[int] = None,
    seed: Optional[int] = None,
    max_wait: Optional[float] = None,
) -> int:
    try:
        cfg = _load_config(config_path, seed, None)
        if cfg.kind != "satellite":
            raise ConfigError("sample-tau needs a satellite scenario")
        radius_grid = (
            np.array([float(tok) for tok in grid.replace(",", " ").split()])
            if grid
            else cfg.tau_radius_grid
        )
        n_per_radius = n if n is not None else cfg.tau_n_per_radius
        wait = max_wait if max_wait is not None else cfg.tau_max_wait
        scenario = cfg.build_satellite()
    except ConfigError as err:
        log.error("%s", err)
        return EXIT_CONFIG
    try:
        samples = collect_inter_event_samples(
            scenario, radius_grid, n_per_radius, seed=cfg.seed, max_wait=wait
        )
    except (ValueError, RunAbortedError) as err:
        log.error("sampling failed: %s", err)
        return EXIT_RUN
    save_samples(samples, out_path)
    frac = samples.censored_count / max(len(samples.radius), 1)
    print(
        f"samples={len(samples.radius)} censored={samples.censored_count} "
        f"({100.0 * frac:.1f}%) out={out_path}"
    )
    if frac >= 0.05:
        log.warning("censoring fraction %.1f%% exceeds the 5%% budget", 100.0 * frac)
    return EXIT_OK


def cmd_fit_tau(
    samples_path: str,
    out_path: str,
    basis: str = "piecewise-linear",
    statistic: str = "median",
    degree: int = 3,
) -> int:
    try:
        samples = load_samples(samples_path)
    except (OSError, ValueError) as err:
        log.error("cannot load samples: %s", err)
        return EXIT_CONFIG
    try:
        model = fit_inter_event_model(samples, basis=basis, statistic=statistic, degree=degree)
    except FitError as err:
        log.error("fit failed: %s", err)
        return EXIT_RUN
    save_model(model, out_path)
    print(
        f"model basis={model.basis} levels={len(model.knots)} "
        f"range=[{model.h_min!r}, {model.h_max!r}] residual={model.residual!r} out={out_path}"
    )
    return EXIT_OK


def cmd_compare(
    config_path: str,
    tau_model_path: str,
    out_dir: str,
    seed: Optional[int] = None,
    horizon: Optional[float] = None,
) -> int:
    try:
        cfg = _load_config(config_path, seed, horizon)
        if cfg.kind != "satellite":
            raise ConfigError("compare needs a satellite scenario")
    except ConfigError as err:
        log.error("%s", err)
        return EXIT_CONFIG
    try:
        model = load_model(tau_model_path)
        scenario = cfg.build_satellite()
        greedy = run_greedy_impulsive(scenario, cfg.initial_state, cfg.horizon, seed=cfg.seed)
        maneuver = run_maneuver(scenario, model, cfg.initial_state, cfg.horizon, seed=cfg.seed)
    except (RunAbortedError, FileNotFoundError, ValueError) as err:
        log.error("comparison failed: %s", err)
        return EXIT_RUN

    os.makedirs(out_dir, exist_ok=True)
    _write_run_outputs(os.path.join(out_dir, "greedy"), greedy, cfg)
    _write_run_outputs(os.path.join(out_dir, "maneuver"), maneuver, cfg)

    g, m = greedy.summary, maneuver.summary
    reduction = None
    if g.jump_count > 0:
        reduction = 1.0 - m.jump_count / g.jump_count
    doc = {
        "greedy_jump_count": g.jump_count,
        "maneuver_jump_count": m.jump_count,
        "reduction": _jsonable(reduction),
        "greedy_mean_inter_event_time": _jsonable(g.mean_inter_event_time),
        "maneuver_mean_inter_event_time": _jsonable(m.mean_inter_event_time),
        "greedy_median_inter_event_time": _jsonable(g.median_inter_event_time),
        "maneuver_median_inter_event_time": _jsonable(m.median_inter_event_time),
        "greedy_min_h": _jsonable(g.min_h),
        "maneuver_min_h": _jsonable(m.min_h),
        "seed": cfg.seed,
        "horizon": _jsonable(cfg.horizon),
    }
    _atomic_write(os.path.join(out_dir, "comparison.json"), json.dumps(doc, indent=2) + "\n")

    both_safe = (
        g.min_h >= -cfg.value_tolerance and m.min_h >= -cfg.value_tolerance
    )
    print(
        f"greedy={g.jump_count} maneuver={m.jump_count} "
        f"reduction={reduction!r} safe={both_safe} out={out_dir}"
    )
    return EXIT_OK if both_safe else EXIT_RUN


# --- Entry point ---


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="etsafe",
        description="Event-triggered safety simulations: impulsive orbit keeping "
        "and intermittent safety filtering.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run one scenario and write outputs")
    sim.add_argument("--config", required=True)
    sim.add_argument("--out", required=True, help="output directory")
    sim.add_argument("--seed", type=int, default=None, help="override [scenario] seed")
    sim.add_argument("--horizon", type=float, default=None, help="override [scenario] horizon")

    smp = sub.add_parser("sample-tau", help="collect inter-event-time samples")
    smp.add_argument("--config", required=True)
    smp.add_argument("--out", required=True, help="output CSV path")
    smp.add_argument("--grid", default=None, help="comma-separated radii")
    smp.add_argument("--n", type=int, default=None, help="samples per radius")
    smp.add_argument("--seed", type=int, default=None)
    smp.add_argument("--max-wait", type=float, default=None)

    fit = sub.add_parser("fit-tau", help="fit the inter-event-time model")
    fit.add_argument("--samples", required=True)
    fit.add_argument("--out", required=True, help="output JSON path")
    fit.add_argument("--basis", default="piecewise-linear",
                     choices=["piecewise-linear", "polynomial"])
    fit.add_argument("--statistic", default="median", choices=["median", "mean"])
    fit.add_argument("--degree", type=int, default=3)

    cmp_ = sub.add_parser("compare", help="paired greedy vs maneuver runs")
    cmp_.add_argument("--config", required=True)
    cmp_.add_argument("--tau-model", required=True)
    cmp_.add_argument("--out", required=True, help="output directory")
    cmp_.add_argument("--seed", type=int, default=None)
    cmp_.add_argument("--horizon", type=float, default=None)

    val = sub.add_parser("validate-config", help="check a config file")
    val.add_argument("--config", required=True)

    return parser


def main(argv: Optional[list[str]] = None) -> int:
    _setup_logging()
    args = build_parser().parse_args(argv)
    if args.command == "simulate":
        return cmd_simulate(args.config, args.out, args.seed, args.horizon)
    if args.command == "sample-tau":
        return cmd_sample_tau(
            args.config, args.out, args.grid, args.n, args.seed, args.max_wait
        )
    if args.command == "fit-tau":
        return cmd_fit_tau(args.samples, args.out, args.basis, args.statistic, args.degree)
    if args.command == "compare":
        return cmd_compare(args.config, args.tau_model, args.out, args.seed, args.horizon)
    if args.command == "validate-config":
        return cmd_validate_config(args.config)
    return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
