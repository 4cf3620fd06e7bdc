"""Hybrid run loop tests: greedy, maneuver, intermittent, bounds, audits."""

import numpy as np
import pytest

from etsafe.barrier import (
    barrier_condition_margin,
    orbital_range_barrier,
    planar_disk_barrier,
)
from etsafe.dynamics import DisturbanceModel, GravityModel
from etsafe.engine import (
    AssumptionCheckError,
    RunAbortedError,
    Trajectory,
    audit_safety,
    check_nominal_safety_assumption,
    miet_bound,
    miet_bound_formula,
    run_greedy_impulsive,
    run_intermittent_filter,
    run_maneuver,
    satellite_region_sampler,
)
from etsafe.inter_event import InterEventTimeModel
from etsafe.numerics import EventLocatorConfig, IntegratorConfig
from etsafe.orbital import StationKeepingConfig
from etsafe.scenarios import PlanarScenario, SatelliteScenario


def satellite_scenario(seed=1, kind="seeded-piecewise-constant", gamma=0.1, d_bar=1e-3):
    g = GravityModel()
    return SatelliteScenario(
        gravity=g,
        barrier=orbital_range_barrier(g, gamma=gamma, d_bar=d_bar),
        controller=StationKeepingConfig(),
        disturbance=DisturbanceModel(kind=kind, d_bar=d_bar, seed=seed, hold_time=1.0)
        if kind != "none"
        else DisturbanceModel(kind="none", d_bar=d_bar),
        integrator=IntegratorConfig(step_size=0.05),
        events=EventLocatorConfig(),
    )


def planar_scenario(seed=2, goal=(1.05, 0.0), gamma=2.0, d_bar=0.01, kind="seeded-piecewise-constant"):
    return PlanarScenario(
        barrier=planar_disk_barrier(rho=1.0, gamma=gamma, d_bar=d_bar),
        goal=np.array(goal),
        gain=1.0,
        disturbance=DisturbanceModel(kind=kind, d_bar=d_bar, seed=seed, hold_time=0.5, dim=2)
        if kind != "none"
        else DisturbanceModel(kind="none", d_bar=d_bar, dim=2),
        promote_rate=0.05,
        hysteresis_gap=0.05,
        recovery_level=0.2,
        integrator=IntegratorConfig(step_size=0.01),
        events=EventLocatorConfig(),
    )


def constant_tau_model(value=50.0):
    return InterEventTimeModel(
        basis="piecewise-linear",
        knots=np.array([0.0, 0.16]),
        coefficients=np.array([value, value]),
        h_min=0.0,
        h_max=0.16,
        residual=0.0,
    )


def fitted_like_tau_model():
    # shape of a real campaign: short dwell near the boundary, long at center
    knots = np.array([0.0194, 0.0576, 0.1024, 0.1375, 0.16])
    values = np.array([6.0, 8.0, 12.0, 650.0, 1200.0])
    return InterEventTimeModel(
        basis="piecewise-linear",
        knots=knots,
        coefficients=values,
        h_min=float(knots[0]),
        h_max=float(knots[-1]),
        residual=0.0,
    )


CIRCULAR_MID = np.array([2.0, 0.0, 0.0, 0.0, np.sqrt(0.5), 0.0])
X0 = np.array([2.2, 0.0, 0.0, 0.0, np.sqrt(1.0 / 2.2), 0.0])


class TestGreedy:
    def test_no_disturbance_no_jumps(self):
        scn = satellite_scenario(kind="none")
        res = run_greedy_impulsive(scn, CIRCULAR_MID, 200.0)
        assert res.summary.jump_count == 0
        assert res.summary.min_h == pytest.approx(0.16, abs=1e-6)

    def test_disturbed_run_is_safe_with_jumps(self):
        scn = satellite_scenario(seed=1)
        res = run_greedy_impulsive(scn, X0, 3000.0, seed=1)
        s = res.summary
        assert s.jump_count > 0
        assert s.min_h >= -1e-9
        assert s.min_post_jump_margin >= scn.controller.post_jump_margin
        # flow-interior monitor values only graze zero at firing times
        assert s.min_xi_flow >= -(
            s.value_tolerance + 5.0 * s.time_tolerance  # margin slope is O(1)
        )

    def test_observed_dwell_beats_analytic_bound(self):
        scn = satellite_scenario(seed=1)
        res = run_greedy_impulsive(scn, X0, 3000.0, seed=1)
        s = res.summary
        if s.min_inter_event_time is not None:
            assert s.min_inter_event_time >= s.miet_lower_bound

    def test_jump_records_are_consistent(self):
        scn = satellite_scenario(seed=1)
        res = run_greedy_impulsive(scn, X0, 3000.0)
        times = [e.time for e in res.events]
        assert all(t2 > t1 for t1, t2 in zip(times, times[1:]))
        for e in res.events:
            assert e.kind == "jump"
            assert np.array_equal(e.state_before[:3], e.state_after[:3])
            assert e.h_after >= 0.0
            assert e.xi_after >= scn.controller.post_jump_margin
            assert e.impulse_magnitude > 0.0

    def test_initial_jump_when_margin_nonpositive(self):
        scn = satellite_scenario(seed=1)
        # strongly outward-moving state near the outer boundary violates the margin
        x0 = np.array([2.35, 0.0, 0.0, 0.12, np.sqrt(1.0 / 2.35), 0.0])
        assert barrier_condition_margin(scn.barrier, scn.nominal_flow(), x0) <= 0.0
        res = run_greedy_impulsive(scn, x0, 50.0)
        assert res.events[0].trigger_id == "initial"
        assert res.events[0].time == 0.0

    def test_initial_jump_disabled_aborts(self):
        scn = satellite_scenario(seed=1)
        scn = SatelliteScenario(
            gravity=scn.gravity,
            barrier=scn.barrier,
            controller=scn.controller,
            disturbance=scn.disturbance,
            integrator=scn.integrator,
            events=scn.events,
            allow_initial_jump=False,
        )
        x0 = np.array([2.35, 0.0, 0.0, 0.12, np.sqrt(1.0 / 2.35), 0.0])
        with pytest.raises(RunAbortedError):
            run_greedy_impulsive(scn, x0, 50.0)

    def test_unsafe_start_aborts(self):
        scn = satellite_scenario()
        x0 = np.array([1.5, 0.0, 0.0, 0.0, 0.8, 0.0])
        with pytest.raises(RunAbortedError):
            run_greedy_impulsive(scn, x0, 10.0)

    def test_deterministic(self):
        scn = satellite_scenario(seed=1)
        r1 = run_greedy_impulsive(scn, X0, 1200.0)
        r2 = run_greedy_impulsive(scn, X0, 1200.0)
        assert [e.time for e in r1.events] == [e.time for e in r2.events]
        assert np.array_equal(r1.trajectory.states, r2.trajectory.states)


class TestManeuver:
    def test_constant_model_degenerates_to_greedy(self):
        # A flat expected-dwell model never fires the payoff trigger, so jump
        # times match the greedy run exactly; only pair labels differ.
        scn = satellite_scenario(seed=1)
        greedy = run_greedy_impulsive(scn, X0, 2000.0)
        maneuver = run_maneuver(scn, constant_tau_model(50.0), X0, 2000.0)
        t_g = [e.time for e in greedy.events]
        t_m = [e.time for e in maneuver.events]
        assert len(t_g) == len(t_m)
        assert np.allclose(t_g, t_m, atol=1e-9)
        roles = [e.pair_role for e in maneuver.events]
        assert roles == ["first", "second"] * (len(roles) // 2) + ["first"] * (len(roles) % 2)
        assert all(e.trigger_id in ("safety", "initial") for e in maneuver.events)

    def test_pair_roles_alternate(self):
        scn = satellite_scenario(seed=1)
        res = run_maneuver(scn, fitted_like_tau_model(), X0, 3000.0)
        roles = [e.pair_role for e in res.events]
        for i, role in enumerate(roles):
            assert role == ("first" if i % 2 == 0 else "second")

    def test_timing_events_respect_gate(self):
        # Every payoff-triggered second impulse fires no earlier than the
        # first impulse time plus the expected dwell at the first impulse.
        scn = satellite_scenario(seed=1)
        model = fitted_like_tau_model()
        res = run_maneuver(scn, model, X0, 3000.0)
        events = res.events
        timing_seen = 0
        for i, e in enumerate(events):
            if e.trigger_id in ("timing", "deadline"):
                timing_seen += 1
                first = events[i - 1]
                assert first.pair_role == "first"
                gate = first.time + model.tau(first.h_after)
                assert e.time >= gate - 1e-9
        assert res.summary.jump_count == len(events)

    def test_maneuver_is_safe(self):
        scn = satellite_scenario(seed=1)
        res = run_maneuver(scn, fitted_like_tau_model(), X0, 3000.0)
        assert res.summary.min_h >= -1e-9
        assert res.summary.min_post_jump_margin >= scn.controller.post_jump_margin

    def test_reduces_jump_count_on_paired_run(self):
        scn = satellite_scenario(seed=1)
        greedy = run_greedy_impulsive(scn, X0, 6000.0)
        maneuver = run_maneuver(scn, fitted_like_tau_model(), X0, 6000.0)
        assert maneuver.summary.jump_count < greedy.summary.jump_count


class TestIntermittent:
    def test_default_run_cycles_and_stays_safe(self):
        scn = planar_scenario()
        res = run_intermittent_filter(scn, np.zeros(2), 100.0, seed=2)
        s = res.summary
        assert s.filter_on_count >= 1
        assert s.filter_off_count >= 1
        assert s.min_h >= -1e-9
        assert s.assumption_check_samples > 1000

    def test_events_alternate_strictly(self):
        scn = planar_scenario()
        res = run_intermittent_filter(scn, np.zeros(2), 60.0)
        kinds = [e.kind for e in res.events]
        for a, b in zip(kinds, kinds[1:]):
            assert a != b
        if kinds:
            assert kinds[0] == "filter_on"

    def test_on_durations_within_recovery_bound(self):
        scn = planar_scenario()
        res = run_intermittent_filter(scn, np.zeros(2), 60.0)
        events = res.events
        for i, e in enumerate(events):
            if e.kind == "filter_off":
                on = events[i - 1]
                bound = (scn.recovery_level - on.h_before) / scn.promote_rate
                assert e.time - on.time <= bound + scn.events.time_tolerance

    def test_barrier_rises_at_promoted_rate_during_on(self):
        scn = planar_scenario()
        res = run_intermittent_filter(scn, np.zeros(2), 60.0)
        traj = res.trajectory
        on = traj.filter_on.astype(bool)
        dt = np.diff(traj.times)
        dh = np.diff(traj.h)
        # within-ON consecutive samples (both flagged, strictly increasing time)
        inside = on[:-1] & on[1:] & (dt > 1e-12)
        rates = dh[inside] / dt[inside]
        assert len(rates) > 0
        assert np.min(rates) >= scn.promote_rate - 1e-6

    def test_filter_off_margin_at_gap(self):
        scn = planar_scenario()
        res = run_intermittent_filter(scn, np.zeros(2), 60.0)
        for e in res.events:
            if e.kind == "filter_off":
                assert e.xi_after == pytest.approx(scn.hysteresis_gap, abs=1e-6)

    def test_origin_goal_without_disturbance_never_filters(self):
        scn = planar_scenario(goal=(0.0, 0.0), kind="none", d_bar=0.0)
        res = run_intermittent_filter(scn, np.array([0.8, 0.3]), 50.0)
        assert res.summary.filter_on_count == 0
        assert res.summary.min_h >= -1e-9

    def test_assumption_check_rejects_weak_gain(self):
        # gamma = 0.4 cannot dominate the outward pull of the boundary goal
        # above the recovery level, so the configuration must be rejected.
        scn = planar_scenario(gamma=0.4)
        with pytest.raises(AssumptionCheckError):
            check_nominal_safety_assumption(scn)
        with pytest.raises(AssumptionCheckError):
            run_intermittent_filter(scn, np.zeros(2), 10.0)

    def test_off_periods_beat_miet_bound(self):
        scn = planar_scenario()
        res = run_intermittent_filter(scn, np.zeros(2), 100.0)
        assert res.summary.min_inter_event_time is not None
        assert res.summary.min_inter_event_time >= res.summary.miet_lower_bound


class TestMietBound:
    def test_forced_constants_closed_form(self):
        b = orbital_range_barrier(GravityModel(), gamma=0.1, d_bar=0.01)
        got = miet_bound(
            b, lambda x: x, lambda n: np.empty((0, 6)), margin=0.01,
            forced_l_xi=0.5, forced_b_sup=1.2,
        )
        assert abs(got - 0.01 / (0.5 * 1.21)) <= 1e-12

    def test_formula_linear_in_margin(self):
        one = miet_bound_formula(0.01, 0.7, 1.1, 0.01)
        two = miet_bound_formula(0.02, 0.7, 1.1, 0.01)
        assert two == pytest.approx(2.0 * one, rel=1e-12)

    def test_sampled_bound_is_positive_and_small(self):
        scn = satellite_scenario()
        bound = miet_bound(
            scn.barrier,
            scn.nominal_flow(),
            satellite_region_sampler(scn),
            scn.controller.post_jump_margin,
        )
        assert 0.0 < bound < 1.0

    def test_margin_slope_along_flow_respects_constants(self):
        # Consecutive margin samples along a flow segment can differ by at
        # most L_xi (B + d_bar) dt plus higher-order terms; the sampled
        # constants (inflated 10%) must cover the observed slope.
        scn = satellite_scenario(seed=3)
        b = scn.barrier
        flow = scn.nominal_flow()
        sampler = satellite_region_sampler(scn)
        states = sampler(400)
        b_sup = max(float(np.linalg.norm(flow(x))) for x in states)
        l_xi = 0.0
        eps = 1e-6
        for x in states[:200]:
            grad_sq = 0.0
            for i in range(6):
                xp, xm = x.copy(), x.copy()
                xp[i] += eps
                xm[i] -= eps
                grad_sq += (
                    (barrier_condition_margin(b, flow, xp) - barrier_condition_margin(b, flow, xm))
                    / (2 * eps)
                ) ** 2
            l_xi = max(l_xi, np.sqrt(grad_sq))
        res = run_greedy_impulsive(scn, X0, 300.0)
        traj = res.trajectory
        dt = np.diff(traj.times)
        dxi = np.abs(np.diff(traj.xi_active))
        ok = dt > 1e-12
        rate_bound = 1.1 * l_xi * (1.1 * b_sup + b.d_bar)
        assert np.all(dxi[ok] <= rate_bound * dt[ok] * (1.0 + 1e-3) + 1e-9)


class TestAuditSafety:
    def test_accepted_run_is_safe(self):
        scn = satellite_scenario(seed=1)
        res = run_greedy_impulsive(scn, X0, 500.0)
        min_h, min_xi, safe = audit_safety(res.trajectory, scn.barrier, 1e-9)
        assert safe
        assert min_h == res.summary.min_h

    def test_corrupted_trajectory_flagged_unsafe(self):
        scn = satellite_scenario(seed=1)
        res = run_greedy_impulsive(scn, X0, 100.0)
        traj = res.trajectory
        bad_states = traj.states.copy()
        bad_states[-1, :3] = [2.5, 0.0, 0.0]  # outside the band: h = -0.01
        bad = Trajectory(
            times=traj.times,
            states=bad_states,
            h=np.array([scn.barrier.h(s) for s in bad_states]),
            xi_active=traj.xi_active,
            filter_on=traj.filter_on,
        )
        _, _, safe = audit_safety(bad, scn.barrier, 1e-9)
        assert not safe
