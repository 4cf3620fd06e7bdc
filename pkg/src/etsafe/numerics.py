"""Fixed-step integration with dense interpolation and bracketed event location.

The simulation loops in :mod:`etsafe.engine` alternate smooth flow with
instantaneous events (impulses, filter toggles).  Everything here is built for
that pattern: a classical RK4 stepper, within-step interpolation so events can
be located between grid points, and a bisection root finder that preserves the
left-most sign change (the earliest event wins).

All functions are pure and deterministic: identical inputs produce
bit-identical outputs.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

Field = Callable[[float, np.ndarray], np.ndarray]
Monitor = Callable[[np.ndarray], float]

_VALID_INTERPOLATIONS = ("linear", "cubic-hermite")


class IntegrationFailureError(RuntimeError):
    """A vector field returned a non-finite derivative."""

    def __init__(self, t: float, x: np.ndarray, message: str = "non-finite derivative"):
        super().__init__(f"{message} at t={t!r}, x={np.asarray(x).tolist()!r}")
        self.t = t
        self.x = np.array(x, dtype=float)


class BracketError(ValueError):
    """locate_zero_crossing was called without a valid downward bracket."""


@dataclass(frozen=True)
class IntegratorConfig:
    """Fixed-step integrator settings.

    step_size is in scenario time units and must be positive.
    """

    step_size: float = 0.05
    interpolation: str = "cubic-hermite"

    def __post_init__(self) -> None:
        if not self.step_size > 0.0:
            raise ValueError(f"step_size must be > 0, got {self.step_size}")
        if self.interpolation not in _VALID_INTERPOLATIONS:
            raise ValueError(
                f"interpolation must be one of {_VALID_INTERPOLATIONS}, got {self.interpolation!r}"
            )


@dataclass(frozen=True)
class EventLocatorConfig:
    """Tolerances for bracketed event location."""

    time_tolerance: float = 1e-9
    value_tolerance: float = 1e-9
    max_bisections: int = 200

    def __post_init__(self) -> None:
        if not self.time_tolerance > 0.0:
            raise ValueError("time_tolerance must be > 0")
        if not self.value_tolerance > 0.0:
            raise ValueError("value_tolerance must be > 0")
        if self.max_bisections < 1:
            raise ValueError("max_bisections must be >= 1")


@dataclass(frozen=True)
class CrossingResult:
    """A located downward zero crossing.

    ``degraded`` is set when the bisection budget ran out before either
    tolerance was met; the reported time is then the best bracket midpoint.
    """

    time: float
    value: float
    degraded: bool = False


@dataclass(frozen=True)
class MonitorCrossing:
    """Earliest monitor crossing found by :func:`propagate_until`."""

    monitor_index: int
    time: float
    state: np.ndarray
    value: float
    degraded: bool = False


def rk4_step(field: Field, x: np.ndarray, t: float, dt: float) -> np.ndarray:
    """Single classical 4th-order Runge-Kutta step of ``dx/dt = field(t, x)``.

    Raises IntegrationFailureError if any stage derivative is non-finite.
    """
    if not dt > 0.0:
        raise ValueError(f"dt must be > 0, got {dt}")
    k1 = field(t, x)
    _require_finite(k1, t, x)
    half = 0.5 * dt
    k2 = field(t + half, x + half * k1)
    _require_finite(k2, t, x)
    k3 = field(t + half, x + half * k2)
    _require_finite(k3, t, x)
    k4 = field(t + dt, x + dt * k3)
    _require_finite(k4, t, x)
    return x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def _require_finite(k: np.ndarray, t: float, x: np.ndarray) -> None:
    if not np.all(np.isfinite(k)):
        raise IntegrationFailureError(t, x)


def hermite_interpolant(
    t0: float,
    x0: np.ndarray,
    f0: np.ndarray,
    t1: float,
    x1: np.ndarray,
    f1: np.ndarray,
) -> Callable[[float], np.ndarray]:
    """Cubic Hermite interpolant matching states and derivatives at both ends."""
    dt = t1 - t0

    def interp(t: float) -> np.ndarray:
        s = (t - t0) / dt
        s2 = s * s
        s3 = s2 * s
        h00 = 2.0 * s3 - 3.0 * s2 + 1.0
        h10 = s3 - 2.0 * s2 + s
        h01 = -2.0 * s3 + 3.0 * s2
        h11 = s3 - s2
        return h00 * x0 + (h10 * dt) * f0 + h01 * x1 + (h11 * dt) * f1

    return interp


def linear_interpolant(
    t0: float, x0: np.ndarray, t1: float, x1: np.ndarray
) -> Callable[[float], np.ndarray]:
    dt = t1 - t0

    def interp(t: float) -> np.ndarray:
        s = (t - t0) / dt
        return (1.0 - s) * x0 + s * x1

    return interp


def locate_zero_crossing(
    g: Callable[[float], float],
    t_lo: float,
    t_hi: float,
    cfg: EventLocatorConfig,
) -> CrossingResult:
    """Locate the earliest downward crossing of ``g`` inside ``[t_lo, t_hi]``.

    Requires ``g(t_lo) > 0`` and ``g(t_hi) <= 0``.  Bisection always keeps the
    left-most sign-change bracket, so the returned time is the earliest
    crossing up to tolerance.  The returned point satisfies ``g(t) <= 0`` and
    either ``|g(t)| <= value_tolerance`` or the final bracket width is at most
    ``time_tolerance`` (except in the degraded case, see CrossingResult).
    """
    g_lo = g(t_lo)
    if not g_lo > 0.0:
        raise BracketError(f"g(t_lo) must be > 0, got {g_lo!r} at t={t_lo!r}")
    g_hi = g(t_hi)
    if g_hi > 0.0:
        raise BracketError(f"g(t_hi) must be <= 0, got {g_hi!r} at t={t_hi!r}")

    lo, hi = t_lo, t_hi
    val_hi = g_hi
    for _ in range(cfg.max_bisections):
        if abs(val_hi) <= cfg.value_tolerance or (hi - lo) <= cfg.time_tolerance:
            return CrossingResult(time=hi, value=val_hi)
        mid = 0.5 * (lo + hi)
        g_mid = g(mid)
        if g_mid <= 0.0:
            hi = mid
            val_hi = g_mid
            if abs(g_mid) <= cfg.value_tolerance:
                return CrossingResult(time=mid, value=g_mid)
        else:
            lo = mid
    mid = 0.5 * (lo + hi)
    return CrossingResult(time=mid, value=g(mid), degraded=True)


def propagate_until(
    field: Field,
    x0: np.ndarray,
    t0: float,
    horizon: float,
    monitors: Sequence[Monitor],
    integrator: IntegratorConfig = IntegratorConfig(),
    events: EventLocatorConfig = EventLocatorConfig(),
    dwell_steps: int = 0,
) -> tuple[np.ndarray, np.ndarray, np.ndarray, Optional[MonitorCrossing]]:
    """Propagate until a monitor crosses zero downward or the horizon ends.

    Steps with RK4 at the configured step size, checking each monitor's sign at
    every step endpoint.  A downward sign change (previous value > 0, new value
    <= 0) is refined with bisection on the interpolated in-step trajectory,
    with the monitor re-evaluated on interpolated states.  A monitor that is
    already <= 0 when monitoring starts is an immediate event at that time.

    Monitoring is suppressed for the first ``dwell_steps`` integration steps;
    callers use this to prevent tolerance-level re-firing just after a jump.

    Returns ``(times, states, monitor_values, crossing)``:

    * ``times``  - shape (N,), dense sample times, starting at t0.  The final
      sample is the crossing time if an event fired, else ``t0 + horizon``.
    * ``states`` - shape (N, n), states at those times.
    * ``monitor_values`` - shape (N, len(monitors)); NaN where a monitor was
      not evaluated (suppressed by dwell).
    * ``crossing`` - earliest MonitorCrossing, or None.
    """
    if not horizon > 0.0:
        raise ValueError(f"horizon must be > 0, got {horizon}")
    dt = integrator.step_size
    n_monitors = len(monitors)

    x = np.array(x0, dtype=float)
    times = [t0]
    states = [x.copy()]
    values = [np.full(n_monitors, np.nan)]

    n_full = int(np.floor(horizon / dt + 1e-12))
    remainder = horizon - n_full * dt
    if remainder < 1e-12 * max(1.0, abs(horizon)):
        remainder = 0.0
    total_steps = n_full + (1 if remainder > 0.0 else 0)

    prev_vals: Optional[np.ndarray] = None
    if dwell_steps <= 0:
        prev_vals = np.array([m(x) for m in monitors]) if n_monitors else np.empty(0)
        values[0] = prev_vals.copy() if n_monitors else values[0]
        hit = _immediate_crossing(prev_vals)
        if hit is not None:
            crossing = MonitorCrossing(hit, t0, x.copy(), float(prev_vals[hit]))
            return (
                np.array(times),
                np.array(states),
                np.array(values),
                crossing,
            )

    for step in range(total_steps):
        step_dt = dt if step < n_full else remainder
        t_start = t0 + step * dt
        t_end = t_start + step_dt
        x_new = rk4_step(field, x, t_start, step_dt)
        armed = (step + 1) >= max(dwell_steps, 1)

        new_vals = np.full(n_monitors, np.nan)
        crossing: Optional[MonitorCrossing] = None
        if armed and n_monitors:
            new_vals = np.array([m(x_new) for m in monitors])
            if prev_vals is None:
                # Monitoring starts at this sample; a value already <= 0 is an
                # immediate event here rather than a located crossing.
                hit = _immediate_crossing(new_vals)
                if hit is not None:
                    crossing = MonitorCrossing(hit, t_end, x_new.copy(), float(new_vals[hit]))
            else:
                crossing = _refine_step_crossings(
                    field, monitors, prev_vals, new_vals,
                    t_start, x, t_end, x_new, integrator, events,
                )
            prev_vals = new_vals

        if crossing is not None:
            times.append(crossing.time)
            states.append(crossing.state.copy())
            cross_vals = np.array([m(crossing.state) for m in monitors])
            values.append(cross_vals)
            return np.array(times), np.array(states), np.array(values), crossing

        times.append(t_end)
        states.append(x_new.copy())
        values.append(new_vals)
        x = x_new

    return np.array(times), np.array(states), np.array(values), None


def _immediate_crossing(vals: np.ndarray) -> Optional[int]:
    if vals.size == 0:
        return None
    idx = int(np.argmin(vals))
    return idx if vals[idx] <= 0.0 else None


def _refine_step_crossings(
    field: Field,
    monitors: Sequence[Monitor],
    prev_vals: np.ndarray,
    new_vals: np.ndarray,
    t_start: float,
    x_start: np.ndarray,
    t_end: float,
    x_end: np.ndarray,
    integrator: IntegratorConfig,
    events: EventLocatorConfig,
) -> Optional[MonitorCrossing]:
    """Refine every monitor that changed sign in this step; earliest wins."""
    crossed = [
        i for i in range(len(monitors)) if prev_vals[i] > 0.0 and new_vals[i] <= 0.0
    ]
    if not crossed:
        return None

    if integrator.interpolation == "cubic-hermite":
        f0 = field(t_start, x_start)
        f1 = field(t_end, x_end)
        interp = hermite_interpolant(t_start, x_start, f0, t_end, x_end, f1)
    else:
        interp = linear_interpolant(t_start, x_start, t_end, x_end)

    best: Optional[MonitorCrossing] = None
    for i in crossed:
        m = monitors[i]
        result = locate_zero_crossing(
            lambda t: m(interp(t)), t_start, t_end, events
        )
        if best is None or result.time < best.time:
            best = MonitorCrossing(
                monitor_index=i,
                time=result.time,
                state=interp(result.time),
                value=result.value,
                degraded=result.degraded,
            )
    return best
