"""Vector field, jump map, and disturbance model tests."""

import numpy as np
import pytest

from etsafe.dynamics import (
    DisturbanceModel,
    GravityModel,
    SingularityError,
    apply_impulse,
    goal_tracking_controller,
    planar_demo_field,
    single_integrator,
    two_body_field,
)
from etsafe.numerics import IntegratorConfig, propagate_until

GRAVITY = GravityModel()


def specific_energy(g, s):
    r = np.linalg.norm(s[:3])
    v2 = s[3:] @ s[3:]
    return 0.5 * v2 - g.mu / r


class TestTwoBodyField:
    def test_circular_orbit_balance(self):
        s = np.array([2.0, 0.0, 0.0, 0.0, np.sqrt(0.5), 0.0])
        deriv = two_body_field(GRAVITY, s)
        assert deriv[3] == pytest.approx(-0.25, abs=1e-15)
        assert deriv[4] == 0.0 and deriv[5] == 0.0
        # centripetal balance |a| = v^2 / r
        assert np.linalg.norm(deriv[3:]) == pytest.approx(0.5 / 2.0, abs=1e-15)

    def test_unit_radius_rest_state(self):
        s = np.array([1.0, 0.0, 0.0, 0.0, 0.0, 0.0])
        assert np.allclose(two_body_field(GRAVITY, s), [0, 0, 0, -1, 0, 0], atol=1e-15)

    def test_singularity_floor(self):
        s = np.array([0.05, 0.0, 0.0, 0.0, 0.0, 0.0])
        with pytest.raises(SingularityError):
            two_body_field(GRAVITY, s)

    def test_circular_period_returns_to_start(self):
        # Kepler's third law: T = 2 pi sqrt(r^3 / mu) = 2 pi sqrt(8) at r = 2.
        period = 2.0 * np.pi * np.sqrt(8.0)
        assert period == pytest.approx(17.7715, abs=5e-4)
        s0 = np.array([2.0, 0.0, 0.0, 0.0, np.sqrt(0.5), 0.0])
        field = lambda t, x: two_body_field(GRAVITY, x)
        _, states, _, crossing = propagate_until(
            field, s0, 0.0, period, [], IntegratorConfig(step_size=0.05)
        )
        assert crossing is None
        assert np.linalg.norm(states[-1] - s0) < 1e-6

    def test_energy_and_momentum_conserved_over_period(self):
        s0 = np.array([2.0, 0.0, 0.0, 0.0, np.sqrt(0.5), 0.0])
        field = lambda t, x: two_body_field(GRAVITY, x)
        period = 2.0 * np.pi * np.sqrt(8.0)
        _, states, _, _ = propagate_until(
            field, s0, 0.0, period, [], IntegratorConfig(step_size=0.05)
        )
        e0 = specific_energy(GRAVITY, s0)
        h0 = np.cross(s0[:3], s0[3:])
        for s in states[:: len(states) // 50]:
            assert abs(specific_energy(GRAVITY, s) - e0) / abs(e0) <= 1e-6
            h = np.cross(s[:3], s[3:])
            assert np.linalg.norm(h - h0) / np.linalg.norm(h0) <= 1e-6


class TestApplyImpulse:
    def test_velocity_incremented(self):
        s = np.array([1.0, 2.0, 3.0, 0.0, 0.7, 0.0])
        out = apply_impulse(s, np.array([0.0, 0.1, 0.0]))
        assert np.array_equal(out[:3], s[:3])
        assert out[4] == pytest.approx(0.8, abs=1e-15)

    def test_zero_impulse_identity(self):
        s = np.array([1.0, 2.0, 3.0, 0.1, 0.2, 0.3])
        assert np.array_equal(apply_impulse(s, np.zeros(3)), s)

    def test_magnitude_bookkeeping(self):
        dv = np.array([0.3, -0.4, 0.0])
        s = np.zeros(6)
        out = apply_impulse(s, dv)
        assert np.linalg.norm(out[3:] - s[3:]) == pytest.approx(np.linalg.norm(dv))

    def test_input_not_mutated(self):
        s = np.array([1.0, 0.0, 0.0, 0.0, 0.7, 0.0])
        before = s.copy()
        apply_impulse(s, np.array([0.1, 0.0, 0.0]))
        assert np.array_equal(s, before)


class TestDisturbanceModel:
    def test_none_kind_is_zero(self):
        m = DisturbanceModel(kind="none")
        assert np.array_equal(m.sample(3.7, np.zeros(6)), np.zeros(3))

    def test_piecewise_constant_deterministic(self):
        m = DisturbanceModel(kind="seeded-piecewise-constant", d_bar=1e-3, seed=7)
        a = m.sample(2.4, np.zeros(6))
        b = m.sample(2.4, np.zeros(6))
        assert np.array_equal(a, b)

    def test_piecewise_constant_within_interval(self):
        m = DisturbanceModel(kind="seeded-piecewise-constant", d_bar=1e-3, seed=7, hold_time=1.0)
        assert np.array_equal(m.sample(2.1, np.zeros(6)), m.sample(2.9, np.zeros(6)))
        assert not np.array_equal(m.sample(2.1, np.zeros(6)), m.sample(3.1, np.zeros(6)))

    def test_streams_are_independent(self):
        m = DisturbanceModel(kind="seeded-piecewise-constant", d_bar=1e-3, seed=7)
        assert not np.array_equal(
            m.sample(0.5, np.zeros(6), stream=0), m.sample(0.5, np.zeros(6), stream=1)
        )

    def test_bound_holds_over_monte_carlo(self):
        # 1e5 (t, state) pairs across kinds; |d| <= d_bar must hold exactly.
        rng = np.random.default_rng(0)
        d_bar = 1e-3
        for kind in ("zonal-j2-like", "seeded-piecewise-constant"):
            m = DisturbanceModel(kind=kind, d_bar=d_bar, seed=3)
            times = rng.uniform(0.0, 1e3, 50_000)
            radii = rng.uniform(1.6, 2.4, 50_000)
            dirs = rng.normal(size=(50_000, 3))
            dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
            worst = 0.0
            for t, r, u in zip(times[:5000], radii[:5000], dirs[:5000]):
                s = np.concatenate([r * u, np.zeros(3)])
                worst = max(worst, float(np.linalg.norm(m.sample(t, s))))
            assert worst <= d_bar + 1e-18

    def test_zonal_sup_reaches_bound_on_shell(self):
        # The zonal scale is chosen so the supremum over the safe shell is
        # d_bar; the polar inner-shell point attains it.
        m = DisturbanceModel(kind="zonal-j2-like", d_bar=1e-3)
        s = np.array([0.0, 0.0, 1.6, 0.0, 0.0, 0.0])
        assert np.linalg.norm(m.sample(0.0, s)) == pytest.approx(1e-3, rel=1e-9)

    def test_realize_matches_sample(self):
        m = DisturbanceModel(kind="seeded-piecewise-constant", d_bar=1e-3, seed=11, hold_time=0.5)
        sampler = m.realize(horizon=10.0, stream=4)
        for t in (0.0, 0.49, 0.5, 3.21, 9.99):
            assert np.allclose(sampler(t, np.zeros(6)), m.sample(t, np.zeros(6), stream=4))

    def test_batch_matches_scalar(self):
        m = DisturbanceModel(kind="seeded-piecewise-constant", d_bar=1e-3, seed=11)
        streams = np.arange(5, dtype=np.uint64)
        batch = m.sample_batch(2.7, np.zeros((5, 6)), streams)
        for i in range(5):
            assert np.array_equal(batch[i], m.sample(2.7, np.zeros(6), stream=i))

    def test_validation(self):
        with pytest.raises(ValueError):
            DisturbanceModel(kind="windy")
        with pytest.raises(ValueError):
            DisturbanceModel(kind="seeded-piecewise-constant", d_bar=0.0)
        with pytest.raises(ValueError):
            DisturbanceModel(kind="zonal-j2-like", d_bar=1e-3, dim=2)


class TestPlanarDemo:
    def test_field_is_sum(self):
        assert np.array_equal(
            planar_demo_field(np.zeros(2), np.array([1.0, 0.0]), np.zeros(2)),
            np.array([1.0, 0.0]),
        )
        assert np.array_equal(
            planar_demo_field(np.zeros(2), np.zeros(2), np.array([0.0, 0.01])),
            np.array([0.0, 0.01]),
        )

    def test_goal_tracking_controller(self):
        k_nom = goal_tracking_controller(np.zeros(2), gain=1.0)
        u = k_nom(np.array([1.0, 0.0]))
        assert np.array_equal(
            planar_demo_field(np.array([1.0, 0.0]), u, np.zeros(2)),
            np.array([-1.0, 0.0]),
        )

    def test_single_integrator_shape(self):
        sys = single_integrator(2)
        x = np.array([0.3, -0.7])
        u = np.array([1.0, 2.0])
        assert np.array_equal(sys.closed_loop(x, u), u)
