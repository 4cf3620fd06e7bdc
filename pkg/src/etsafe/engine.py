"""Hybrid simulation loops: greedy impulsive safety, two-impulse maneuvers,
and the event-triggered intermittent safety filter, with safety auditing.

Shared semantics
----------------
Flow segments integrate ``dx/dt = F(x) + d(t)`` with the realized disturbance
while the *monitors* evaluate disturbance-free margins; the worst-case
``|grad h| d_bar`` term inside the margins covers the gap.  Each segment ends
either at the horizon or at a located monitor crossing, where an event fires:

* greedy: every crossing of the barrier-condition margin triggers a
  station-keeping impulse; the post-jump buffer guarantees a minimum dwell
  before the margin can reach zero again (see :func:`miet_bound`).
* maneuver: impulses come in pairs.  The first is timed greedily; the second
  fires at the earlier of the safety crossing and the expected-payoff
  crossing, the latter only armed once the expected inter-event time of the
  first impulse has elapsed.
* intermittent: the safety filter toggles; while off, the nominal loop runs
  until the barrier-condition margin under the nominal controller crosses
  zero; while on, a rate-promoting filter raises h until the margin recovers
  past a hysteresis gap.

After every jump, monitoring stays disarmed for one integrator step (the
post-jump buffer makes an instant re-fire impossible in exact arithmetic;
the dwell removes the tolerance-level residue of it).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .barrier import (
    BarrierSpec,
    barrier_condition_margin,
    barrier_value,
    maneuver_timing_margin,
)
from .dynamics import apply_impulse
from .inter_event import InterEventTimeModel
from .numerics import propagate_until
from .orbital import station_keeping_impulse, verify_jump_conditions
from .safety_filter import build_constraint, project
from .scenarios import PlanarScenario, SatelliteScenario


class RunAbortedError(RuntimeError):
    """A run could not continue; carries the diagnostic state and time."""

    def __init__(self, message: str, t: float, x: np.ndarray):
        super().__init__(f"{message} (t={t!r})")
        self.t = t
        self.x = np.array(x, dtype=float)


class AssumptionCheckError(ValueError):
    """Nominal-safety pre-run sampling check failed; configuration rejected."""


@dataclass(frozen=True)
class EventRecord:
    """One discrete event of a hybrid run.

    ``kind`` is jump / filter_on / filter_off; ``trigger_id`` names the fired
    condition: safety (barrier-condition margin), timing (expected-payoff
    margin), deadline (payoff margin already nonpositive when it armed), or
    initial (forced at the start state).  ``pair_role`` marks maneuver
    impulses as first/second of their pair.
    """

    time: float
    kind: str
    trigger_id: str
    state_before: np.ndarray
    state_after: np.ndarray
    h_before: float
    h_after: float
    xi_after: float
    impulse_magnitude: Optional[float] = None
    pair_role: Optional[str] = None


@dataclass
class Trajectory:
    """Dense hybrid-trajectory samples.

    ``xi_active`` holds the value of the monitor guarding each segment (the
    quantity that stays positive in segment interiors).  At jumps two samples
    share a timestamp: the pre-jump and post-jump states.
    """

    times: np.ndarray
    states: np.ndarray
    h: np.ndarray
    xi_active: np.ndarray
    filter_on: np.ndarray


@dataclass(frozen=True)
class RunSummary:
    scheme: str
    horizon: float
    seed: int
    gamma: float
    d_bar: float
    step_size: float
    time_tolerance: float
    value_tolerance: float
    jump_count: int
    filter_on_count: int
    filter_off_count: int
    event_count: int
    min_inter_event_time: Optional[float]
    mean_inter_event_time: Optional[float]
    median_inter_event_time: Optional[float]
    min_h: float
    min_xi_flow: float
    miet_lower_bound: Optional[float]
    min_post_jump_margin: Optional[float]
    aborted: bool
    horizon_truncated: bool
    assumption_check_samples: Optional[int] = None
    max_on_duration: Optional[float] = None


@dataclass(frozen=True)
class RunResult:
    events: list[EventRecord]
    trajectory: Trajectory
    summary: RunSummary


class _TrajectoryBuilder:
    def __init__(self, b: BarrierSpec):
        self._b = b
        self.times: list[np.ndarray] = []
        self.states: list[np.ndarray] = []
        self.xi: list[np.ndarray] = []
        self.filter_on: list[np.ndarray] = []

    def add_segment(
        self,
        times: np.ndarray,
        states: np.ndarray,
        monitor_values: np.ndarray,
        monitor: Callable[[np.ndarray], float],
        filter_state: int,
    ) -> None:
        vals = monitor_values[:, 0].copy() if monitor_values.size else np.full(len(times), np.nan)
        missing = ~np.isfinite(vals)
        for i in np.where(missing)[0]:
            vals[i] = monitor(states[i])
        start = 1 if self._repeats_last(times, states, filter_state) else 0
        self.times.append(times[start:])
        self.states.append(states[start:])
        self.xi.append(vals[start:])
        self.filter_on.append(np.full(len(times) - start, filter_state, dtype=np.int8))

    def _repeats_last(self, times: np.ndarray, states: np.ndarray, filter_state: int) -> bool:
        """Segment starts restate the previous sample except across filter
        toggles, where the repeated timestamp carries the new filter flag."""
        if not self.times or len(self.times[-1]) == 0 or len(times) == 0:
            return False
        return (
            times[0] == self.times[-1][-1]
            and filter_state == int(self.filter_on[-1][-1])
            and bool(np.array_equal(states[0], self.states[-1][-1]))
        )

    def add_point(self, t: float, x: np.ndarray, xi: float, filter_state: int) -> None:
        self.times.append(np.array([t]))
        self.states.append(np.array([x]))
        self.xi.append(np.array([xi]))
        self.filter_on.append(np.array([filter_state], dtype=np.int8))

    def build(self) -> Trajectory:
        times = np.concatenate(self.times) if self.times else np.empty(0)
        states = np.vstack(self.states) if self.states else np.empty((0, 0))
        xi = np.concatenate(self.xi) if self.xi else np.empty(0)
        fon = np.concatenate(self.filter_on) if self.filter_on else np.empty(0, dtype=np.int8)
        h = np.array([self._b.h(s) for s in states])
        return Trajectory(times=times, states=states, h=h, xi_active=xi, filter_on=fon)


# --- Greedy impulsive scheme ---


def run_greedy_impulsive(
    scenario: SatelliteScenario, x0: np.ndarray, horizon: float, seed: int = 0
) -> RunResult:
    """On-demand impulsive safety: jump exactly when the margin reaches zero.

    Every flow segment keeps the barrier-condition margin positive in its
    interior; every jump passes the in-set and buffer checks.  ``seed`` is
    recorded in the summary; the disturbance realization is keyed by the
    scenario's disturbance seed (stream 0).
    """
    events, traj = _run_impulsive(scenario, x0, horizon, tau_model=None)
    return _finalize_impulsive(scenario, "greedy", events, traj, horizon, seed)


def run_maneuver(
    scenario: SatelliteScenario,
    tau_model: InterEventTimeModel,
    x0: np.ndarray,
    horizon: float,
    seed: int = 0,
) -> RunResult:
    """Two-impulse maneuvers: greedy first impulse, payoff-timed second."""
    events, traj = _run_impulsive(scenario, x0, horizon, tau_model=tau_model)
    return _finalize_impulsive(scenario, "maneuver", events, traj, horizon, seed)


def _run_impulsive(
    scenario: SatelliteScenario,
    x0: np.ndarray,
    horizon: float,
    tau_model: Optional[InterEventTimeModel],
) -> tuple[list[EventRecord], Trajectory]:
    b = scenario.barrier
    g = scenario.gravity
    flow = scenario.nominal_flow()
    field = scenario.disturbed_field(horizon, stream=0)
    safety = lambda x: barrier_condition_margin(b, flow, x)

    x = np.array(x0, dtype=float)
    t = 0.0
    if barrier_value(b, x) < 0.0:
        raise RunAbortedError("initial state outside the safe set", t, x)

    events: list[EventRecord] = []
    builder = _TrajectoryBuilder(b)
    paired = tau_model is not None
    next_role = "first"
    # gate for the payoff monitor of a pending second impulse
    gate_time: Optional[float] = None

    def do_jump(t_e: float, x_e: np.ndarray, trigger_id: str, role: Optional[str]) -> np.ndarray:
        try:
            dv = station_keeping_impulse(scenario.controller, b, g, x_e)
        except Exception as err:
            raise RunAbortedError(f"station-keeping impulse failed: {err}", t_e, x_e) from err
        x_post = apply_impulse(x_e, dv)
        check = verify_jump_conditions(b, g, x_post, scenario.controller.post_jump_margin)
        if not check.ok:
            raise RunAbortedError(
                f"post-jump conditions violated: h={check.h_value!r}, xi={check.xi_value!r}",
                t_e,
                x_e,
            )
        events.append(
            EventRecord(
                time=t_e,
                kind="jump",
                trigger_id=trigger_id,
                state_before=x_e.copy(),
                state_after=x_post.copy(),
                h_before=barrier_value(b, x_e),
                h_after=check.h_value,
                xi_after=check.xi_value,
                impulse_magnitude=float(np.linalg.norm(dv)),
                pair_role=role,
            )
        )
        builder.add_point(t_e, x_post, check.xi_value, 0)
        return x_post

    if safety(x) <= 0.0:
        if not scenario.allow_initial_jump:
            raise RunAbortedError("margin nonpositive at start and initial jump disabled", t, x)
        builder.add_point(t, x, safety(x), 0)
        x = do_jump(t, x, "initial", next_role if paired else None)
        if paired:
            gate_time = t + tau_model.tau(barrier_value(b, x))
            next_role = "second"
        just_jumped = True
    else:
        just_jumped = False

    end = horizon
    while t < end - 1e-12:
        if paired and next_role == "second":
            t, x, just_jumped = _second_of_pair_segment(
                scenario, tau_model, field, safety, builder,
                t, x, end, gate_time, just_jumped, do_jump,
            )
            if just_jumped:
                next_role = "first"
                gate_time = None
            continue

        times, states, vals, crossing = propagate_until(
            field, x, t, end - t, [safety],
            scenario.integrator, scenario.events,
            dwell_steps=1 if just_jumped else 0,
        )
        builder.add_segment(times, states, vals, safety, 0)
        if crossing is None:
            t = end
            break
        role = next_role if paired else None
        x = do_jump(crossing.time, crossing.state, "safety", role)
        t = crossing.time
        just_jumped = True
        if paired:
            if next_role == "first":
                gate_time = t + tau_model.tau(barrier_value(b, x))
                next_role = "second"
            else:
                next_role = "first"
                gate_time = None

    return events, builder.build()


def _second_of_pair_segment(
    scenario: SatelliteScenario,
    tau_model: InterEventTimeModel,
    field,
    safety: Callable[[np.ndarray], float],
    builder: _TrajectoryBuilder,
    t: float,
    x: np.ndarray,
    end: float,
    gate_time: float,
    just_jumped: bool,
    do_jump,
) -> tuple[float, np.ndarray, bool]:
    """Advance one phase of a pending second impulse; returns (t, x, jumped)."""
    b = scenario.barrier
    flow = scenario.nominal_flow()
    payoff = lambda s: maneuver_timing_margin(tau_model, b, flow, s)

    if t < gate_time - 1e-12:
        # phase A: payoff monitor not yet armed, safety only
        seg_end = min(gate_time, end)
        times, states, vals, crossing = propagate_until(
            field, x, t, seg_end - t, [safety],
            scenario.integrator, scenario.events,
            dwell_steps=1 if just_jumped else 0,
        )
        builder.add_segment(times, states, vals, safety, 0)
        if crossing is not None:
            x_post = do_jump(crossing.time, crossing.state, "safety", "second")
            return crossing.time, x_post, True
        if seg_end >= end:
            return end, states[-1], False
        t, x = seg_end, states[-1]
        # the gate itself fires if the payoff margin is already nonpositive
        if payoff(x) <= 0.0:
            x_post = do_jump(t, x, "deadline", "second")
            return t, x_post, True
        just_jumped = False

    # phase B: safety and payoff both monitored
    times, states, vals, crossing = propagate_until(
        field, x, t, end - t, [safety, payoff],
        scenario.integrator, scenario.events,
        dwell_steps=1 if just_jumped else 0,
    )
    builder.add_segment(times, states, vals, safety, 0)
    if crossing is None:
        return end, states[-1], False
    trigger_id = "safety" if crossing.monitor_index == 0 else "timing"
    x_post = do_jump(crossing.time, crossing.state, trigger_id, "second")
    return crossing.time, x_post, True


def _finalize_impulsive(
    scenario: SatelliteScenario,
    scheme: str,
    events: list[EventRecord],
    traj: Trajectory,
    horizon: float,
    seed: int,
) -> RunResult:
    jump_times = [e.time for e in events if e.kind == "jump"]
    diffs = np.diff(jump_times) if len(jump_times) >= 2 else np.empty(0)
    margins = [e.xi_after for e in events if e.kind == "jump"]
    bound = miet_bound(
        scenario.barrier,
        scenario.nominal_flow(),
        satellite_region_sampler(scenario),
        scenario.controller.post_jump_margin,
    )
    min_h, min_xi, _ = audit_safety(traj, scenario.barrier, scenario.events.value_tolerance)
    summary = RunSummary(
        scheme=scheme,
        horizon=horizon,
        seed=seed,
        gamma=scenario.barrier.gamma,
        d_bar=scenario.barrier.d_bar,
        step_size=scenario.integrator.step_size,
        time_tolerance=scenario.events.time_tolerance,
        value_tolerance=scenario.events.value_tolerance,
        jump_count=len(jump_times),
        filter_on_count=0,
        filter_off_count=0,
        event_count=len(events),
        min_inter_event_time=float(diffs.min()) if diffs.size else None,
        mean_inter_event_time=float(diffs.mean()) if diffs.size else None,
        median_inter_event_time=float(np.median(diffs)) if diffs.size else None,
        min_h=min_h,
        min_xi_flow=min_xi,
        miet_lower_bound=bound,
        min_post_jump_margin=float(min(margins)) if margins else None,
        aborted=False,
        horizon_truncated=False,
    )
    return RunResult(events=events, trajectory=traj, summary=summary)


# --- Intermittent safety filter ---


def run_intermittent_filter(
    scenario: PlanarScenario, x0: np.ndarray, horizon: float, seed: int = 0
) -> RunResult:
    """Toggle a rate-promoting safety filter by hysteresis triggers.

    Off periods run the nominal loop and end when the barrier-condition
    margin under the nominal controller crosses zero; on periods run the
    promoting filter (dh/dt >= promote_rate despite the disturbance) and end
    once the margin recovers to the hysteresis gap.  The nominal-safety
    pre-check (margin >= gap wherever h >= recovery_level) is sampled before
    the run; failure rejects the configuration, since without it the off
    trigger has no guarantee of ever firing.
    """
    b = scenario.barrier
    sys = scenario.system
    k_nom = scenario.k_nom()
    nominal_flow = scenario.nominal_flow()
    n_checked = check_nominal_safety_assumption(scenario)
    dist = scenario.disturbance.realize(horizon, stream=0)

    on_margin = lambda x: barrier_condition_margin(b, nominal_flow, x)
    # the off trigger fires when the margin has RISEN back to the gap, so the
    # monitored (positive-inside) quantity is gap - margin
    off_monitor = lambda x: scenario.hysteresis_gap - on_margin(x)

    def nominal_field(t: float, x: np.ndarray) -> np.ndarray:
        return sys.closed_loop(x, k_nom(x)) + dist(t, x)

    def filtered_field(t: float, x: np.ndarray) -> np.ndarray:
        con = build_constraint(b, sys, x, mode="promoting", promote_rate=scenario.promote_rate)
        u = project(k_nom(x), con)
        return sys.closed_loop(x, u) + dist(t, x)

    x = np.array(x0, dtype=float)
    t = 0.0
    if barrier_value(b, x) < 0.0:
        raise RunAbortedError("initial state outside the safe set", t, x)

    events: list[EventRecord] = []
    builder = _TrajectoryBuilder(b)
    filter_on = on_margin(x) <= 0.0
    if filter_on:
        events.append(_filter_event(t, x, "filter_on", "initial", b, on_margin(x)))

    def record_toggle(t_e: float, x_e: np.ndarray, kind: str) -> None:
        events.append(_filter_event(t_e, x_e, kind, "safety", b, on_margin(x_e)))

    while t < horizon - 1e-12:
        if filter_on:
            times, states, vals, crossing = propagate_until(
                filtered_field, x, t, horizon - t, [off_monitor],
                scenario.integrator, scenario.events,
            )
            builder.add_segment(times, states, vals, off_monitor, 1)
        else:
            times, states, vals, crossing = propagate_until(
                nominal_field, x, t, horizon - t, [on_margin],
                scenario.integrator, scenario.events,
            )
            builder.add_segment(times, states, vals, on_margin, 0)
        if crossing is None:
            t = horizon
            break
        t, x = crossing.time, crossing.state
        record_toggle(t, x, "filter_off" if filter_on else "filter_on")
        filter_on = not filter_on

    traj = builder.build()
    on_count = sum(1 for e in events if e.kind == "filter_on")
    off_count = sum(1 for e in events if e.kind == "filter_off")
    truncated = filter_on  # horizon ended inside an on period
    off_durations = _off_durations(events, horizon)
    on_durations = _on_durations(events)
    bound = miet_bound(
        b, nominal_flow, planar_region_sampler(scenario), scenario.hysteresis_gap
    )
    min_h, min_xi, _ = audit_safety(traj, b, scenario.events.value_tolerance)
    summary = RunSummary(
        scheme="intermittent",
        horizon=horizon,
        seed=seed,
        gamma=b.gamma,
        d_bar=b.d_bar,
        step_size=scenario.integrator.step_size,
        time_tolerance=scenario.events.time_tolerance,
        value_tolerance=scenario.events.value_tolerance,
        jump_count=0,
        filter_on_count=on_count,
        filter_off_count=off_count,
        event_count=len(events),
        min_inter_event_time=float(np.min(off_durations)) if len(off_durations) else None,
        mean_inter_event_time=float(np.mean(off_durations)) if len(off_durations) else None,
        median_inter_event_time=float(np.median(off_durations)) if len(off_durations) else None,
        min_h=min_h,
        min_xi_flow=min_xi,
        miet_lower_bound=bound,
        min_post_jump_margin=None,
        aborted=False,
        horizon_truncated=truncated,
        assumption_check_samples=n_checked,
        max_on_duration=float(np.max(on_durations)) if len(on_durations) else None,
    )
    return RunResult(events=events, trajectory=traj, summary=summary)


def _filter_event(
    t: float, x: np.ndarray, kind: str, trigger_id: str, b: BarrierSpec, xi: float
) -> EventRecord:
    return EventRecord(
        time=t,
        kind=kind,
        trigger_id=trigger_id,
        state_before=np.array(x, dtype=float),
        state_after=np.array(x, dtype=float),
        h_before=barrier_value(b, x),
        h_after=barrier_value(b, x),
        xi_after=xi,
    )


def _on_durations(events: Sequence[EventRecord]) -> np.ndarray:
    """Durations of completed on periods (filter_on to next filter_off)."""
    durations = []
    t_on: Optional[float] = None
    for e in events:
        if e.kind == "filter_on":
            t_on = e.time
        elif e.kind == "filter_off" and t_on is not None:
            durations.append(e.time - t_on)
            t_on = None
    return np.array(durations)


def _off_durations(events: Sequence[EventRecord], horizon: float) -> np.ndarray:
    """Durations between each filter_off and the following filter_on."""
    durations = []
    t_off: Optional[float] = None
    for e in events:
        if e.kind == "filter_off":
            t_off = e.time
        elif e.kind == "filter_on" and t_off is not None:
            durations.append(e.time - t_off)
            t_off = None
    return np.array(durations)


def check_nominal_safety_assumption(
    scenario: PlanarScenario, n_grid: int = 60, n_random: int = 2000, seed: int = 0
) -> int:
    """Sampled verification that the nominal loop is safe above the recovery level.

    Checks ``barrier_condition_margin >= hysteresis_gap`` over a polar grid
    plus seeded random points of ``{x : h(x) >= recovery_level}``.  Raises
    AssumptionCheckError at the first violation; returns the number of points
    checked.
    """
    b = scenario.barrier
    nominal_flow = scenario.nominal_flow()
    gap = scenario.hysteresis_gap
    # recover the radius of the recovery shell by bisection along a ray
    # (exact for the radially symmetric disk barrier)
    probe = np.array([1.0, 0.0])
    lo, hi = 0.0, 10.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if b.h(mid * probe) >= scenario.recovery_level:
            lo = mid
        else:
            hi = mid
    s_max = lo

    points = []
    for s in np.linspace(0.0, s_max, n_grid):
        for ang in np.linspace(0.0, 2.0 * np.pi, n_grid, endpoint=False):
            points.append([s * np.cos(ang), s * np.sin(ang)])
    rng = np.random.default_rng(seed)
    for _ in range(n_random):
        ang = rng.uniform(0.0, 2.0 * np.pi)
        s = s_max * np.sqrt(rng.uniform())
        points.append([s * np.cos(ang), s * np.sin(ang)])

    checked = 0
    for p in points:
        x = np.array(p)
        if b.h(x) < scenario.recovery_level:
            continue
        checked += 1
        margin = barrier_condition_margin(b, nominal_flow, x)
        if margin < gap:
            raise AssumptionCheckError(
                "nominal loop violates the safety margin above the recovery level: "
                f"margin {margin!r} < gap {gap!r} at x={x.tolist()!r}; "
                "increase the class-K gain or lower the recovery level"
            )
    return checked


# --- Bounds and audits ---


def miet_bound_formula(margin: float, l_xi: float, b_sup: float, d_bar: float) -> float:
    """Closed-form dwell-time bound ``margin / (l_xi * (b_sup + d_bar))``.

    After an event the monitored margin is at least ``margin``; it cannot
    decay to zero faster than its Lipschitz constant times the state speed,
    so consecutive events are at least this far apart.  A zero denominator
    means the margin cannot decay at all: the bound is infinite.
    """
    if not margin > 0.0:
        raise ValueError("margin must be > 0")
    denom = l_xi * (b_sup + d_bar)
    if denom == 0.0:
        return float("inf")
    return margin / denom


def miet_bound(
    b: BarrierSpec,
    flow: Callable[[np.ndarray], np.ndarray],
    region_sampler: Callable[[int], np.ndarray],
    margin: float,
    n_samples: int = 2000,
    inflation: float = 1.1,
    fd_eps: float = 1e-6,
    forced_l_xi: Optional[float] = None,
    forced_b_sup: Optional[float] = None,
) -> float:
    """Minimum inter-event time implied by the post-event margin.

    Estimates the flow-speed bound and the margin's Lipschitz constant by
    dense sampling over the operating region (finite differences for the
    gradient), inflates both by 10% against sampling optimism, and plugs them
    into :func:`miet_bound_formula`.  Forced constants bypass sampling and
    inflation (used by tests pinning the closed form).
    """
    if forced_l_xi is not None and forced_b_sup is not None:
        return miet_bound_formula(margin, forced_l_xi, forced_b_sup, b.d_bar)

    states = region_sampler(n_samples)
    xi = lambda x: barrier_condition_margin(b, flow, x)
    b_sup = 0.0
    l_xi = 0.0
    for x in states:
        speed = float(np.linalg.norm(flow(x)))
        if not math.isfinite(speed):
            raise ValueError(f"non-finite flow sample at x={x.tolist()!r}")
        b_sup = max(b_sup, speed)
        grad_sq = 0.0
        for i in range(len(x)):
            xp = np.array(x)
            xm = np.array(x)
            xp[i] += fd_eps
            xm[i] -= fd_eps
            di = (xi(xp) - xi(xm)) / (2.0 * fd_eps)
            if not math.isfinite(di):
                raise ValueError(f"non-finite margin gradient at x={x.tolist()!r}")
            grad_sq += di * di
        l_xi = max(l_xi, math.sqrt(grad_sq))
    return miet_bound_formula(margin, inflation * l_xi, inflation * b_sup, b.d_bar)


def satellite_region_sampler(scenario: SatelliteScenario, seed: int = 0):
    """States covering the safe band with sub-escape speeds."""
    R = scenario.gravity.R
    mu = scenario.gravity.mu

    def sampler(n: int) -> np.ndarray:
        rng = np.random.default_rng(seed)
        radii = rng.uniform(1.6 * R, 2.4 * R, n)
        dirs = rng.normal(size=(n, 3))
        dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
        vdirs = rng.normal(size=(n, 3))
        vdirs /= np.linalg.norm(vdirs, axis=1, keepdims=True)
        speeds = rng.uniform(0.0, 0.99, n) * np.sqrt(2.0 * mu / radii)
        return np.hstack([radii[:, None] * dirs, speeds[:, None] * vdirs])

    return sampler


def planar_region_sampler(scenario: PlanarScenario, seed: int = 0):
    """States covering the planar safe disk."""
    probe = np.array([1.0, 0.0])
    b = scenario.barrier
    lo, hi = 0.0, 10.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if b.h(mid * probe) >= 0.0:
            lo = mid
        else:
            hi = mid
    rho = lo

    def sampler(n: int) -> np.ndarray:
        rng = np.random.default_rng(seed)
        ang = rng.uniform(0.0, 2.0 * np.pi, n)
        s = rho * np.sqrt(rng.uniform(size=n))
        return np.stack([s * np.cos(ang), s * np.sin(ang)], axis=1)

    return sampler


def audit_safety(
    traj: Trajectory, b: BarrierSpec, value_tolerance: float
) -> tuple[float, float, bool]:
    """Scan dense samples: (min h, min active-monitor value, safe verdict).

    The verdict is safe iff min h >= -value_tolerance.
    """
    if len(traj.times) == 0:
        return float("nan"), float("nan"), False
    min_h = float(np.min(traj.h))
    finite = traj.xi_active[np.isfinite(traj.xi_active)]
    min_xi = float(np.min(finite)) if len(finite) else float("nan")
    return min_h, min_xi, bool(min_h >= -value_tolerance)
