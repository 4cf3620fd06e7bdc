"""Expected inter-event time as a function of barrier value.

The maneuver scheme needs to know, before firing, how long the next quiet
period is expected to last.  Rather than learning that over the full state
space, the barrier value h serves as a one-dimensional proxy: states are
sampled at fixed orbital radii (fixed h), pushed through the station-keeping
impulse, and propagated until the safety trigger fires again; the elapsed
times per h level are summarized and a curve is fit through the level
statistics.  The fitted model and its derivative feed
:func:`etsafe.barrier.maneuver_timing_margin`.

Sample collection is embarrassingly parallel and fully deterministic: sample
(j, i) of the campaign is keyed by (seed, radius index j, sample index i),
and the whole batch is propagated vectorized with per-sample disturbance
streams.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass

import numpy as np

from .barrier import barrier_condition_margin
from .dynamics import _hash_uniforms, _hash_unit_vectors, apply_impulse, two_body_field
from .numerics import hermite_interpolant, linear_interpolant, locate_zero_crossing
from .orbital import ControllerInfeasibleError, station_keeping_impulse
from .scenarios import SatelliteScenario

_BASES = ("piecewise-linear", "polynomial")

# Hash-key tags for sample geometry; far above any disturbance interval index.
_PLANE_TAG = np.uint64(1) << np.uint64(40)
_ANGLE_TAG = np.uint64(2) << np.uint64(40)

_LEVEL_DECIMALS = 9  # h values are pooled after rounding to this many digits


class FitError(ValueError):
    """Curve fit is impossible for the requested basis and data."""


@dataclass(frozen=True)
class TauEval:
    """Model evaluation: value, derivative, and an extrapolation flag.

    Outside the fitted range both value and derivative are clamped to their
    boundary values, which is conservative: extrapolation can never invent a
    sign change of the derivative.
    """

    value: float
    derivative: float
    extrapolated: bool


@dataclass(frozen=True)
class InterEventTimeModel:
    """Fitted map from barrier value to expected inter-event time.

    ``knots``/``coefficients`` are the interpolation nodes for the
    piecewise-linear basis, or the ascending power-basis coefficients for the
    polynomial basis (knots then holds the fitted levels for reference).
    """

    basis: str
    knots: np.ndarray
    coefficients: np.ndarray
    h_min: float
    h_max: float
    residual: float
    statistic: str = "median"

    def evaluate(self, h: float) -> TauEval:
        extrapolated = h < self.h_min or h > self.h_max
        hc = min(max(float(h), self.h_min), self.h_max)
        if self.basis == "piecewise-linear":
            value = float(np.interp(hc, self.knots, self.coefficients))
            if len(self.knots) < 2:
                derivative = 0.0
            else:
                seg = int(np.searchsorted(self.knots, hc, side="right")) - 1
                seg = min(max(seg, 0), len(self.knots) - 2)
                dh = self.knots[seg + 1] - self.knots[seg]
                derivative = float(
                    (self.coefficients[seg + 1] - self.coefficients[seg]) / dh
                )
        else:
            value = float(np.polynomial.polynomial.polyval(hc, self.coefficients))
            dcoef = np.polynomial.polynomial.polyder(self.coefficients)
            derivative = float(np.polynomial.polynomial.polyval(hc, dcoef))
        return TauEval(value=value, derivative=derivative, extrapolated=extrapolated)

    def tau(self, h: float) -> float:
        return self.evaluate(h).value

    def dtau_dh(self, h: float) -> float:
        return self.evaluate(h).derivative


@dataclass(frozen=True)
class InterEventSampleSet:
    """Raw campaign records plus the keys needed to reproduce them.

    One record per (radius, sample index).  Censored records (controller
    infeasible, or no trigger within the wait cap) keep their row with
    ``censored = True`` and are dropped from fitting.
    """

    radius: np.ndarray
    h: np.ndarray
    inter_event_time: np.ndarray
    censored: np.ndarray
    seed: int
    n_per_radius: int
    max_wait: float

    def __post_init__(self) -> None:
        n = len(self.radius)
        if not (len(self.h) == len(self.inter_event_time) == len(self.censored) == n):
            raise ValueError("record columns must have equal length")
        accepted = self.inter_event_time[~self.censored]
        if len(accepted) and not np.all(accepted > 0.0):
            raise ValueError("accepted inter-event times must be > 0")

    @property
    def censored_count(self) -> int:
        return int(np.sum(self.censored))

    def accepted(self) -> tuple[np.ndarray, np.ndarray]:
        """(h, inter_event_time) of the non-censored records."""
        keep = ~self.censored
        return self.h[keep], self.inter_event_time[keep]

    def level_statistics(self, statistic: str = "median") -> tuple[np.ndarray, np.ndarray]:
        """Per-h-level summary of the accepted records, sorted by h.

        Radii symmetric about the band center share an h value and pool into
        one level (after rounding to 9 decimals).
        """
        h, t = self.accepted()
        keys = np.round(h, _LEVEL_DECIMALS)
        levels = np.unique(keys)
        reducer = np.median if statistic == "median" else np.mean
        if statistic not in ("median", "mean"):
            raise ValueError(f"unknown statistic {statistic!r}")
        stats = np.array([reducer(t[keys == lv]) for lv in levels])
        return levels, stats


# --- Campaign collection (vectorized batch propagation) ---


def collect_inter_event_samples(
    scenario: SatelliteScenario,
    radius_grid: np.ndarray,
    n_per_radius: int,
    seed: int,
    max_wait: float = 6000.0,
) -> InterEventSampleSet:
    """Sample inter-event times of the station-keeping loop at fixed radii.

    For each radius, ``n_per_radius`` craft are placed at hash-derived random
    orbital planes and phase angles with circular tangential speed, kicked
    once by the station-keeping impulse, and propagated under per-sample
    disturbance streams until the barrier-condition margin crosses zero.  The
    elapsed time is recorded against h(radius).  Craft still quiet at
    ``max_wait`` are censored, as are (rare) controller-infeasible starts.
    """
    g = scenario.gravity
    radius_grid = np.asarray(radius_grid, dtype=float)
    inner = 2.0 * g.R - 0.4 * g.R
    outer = 2.0 * g.R + 0.4 * g.R
    if np.any(radius_grid <= inner) or np.any(radius_grid >= outer):
        raise ValueError(f"radii must lie strictly inside ({inner}, {outer})")
    if n_per_radius < 1:
        raise ValueError("n_per_radius must be >= 1")

    n_total = len(radius_grid) * n_per_radius
    streams = np.arange(1, n_total + 1, dtype=np.uint64)  # stream 0 is the main run
    radii = np.repeat(radius_grid, n_per_radius)

    states = _initial_states(g.mu, radii, seed, streams)

    censored = np.zeros(n_total, dtype=bool)
    times = np.full(n_total, np.nan)
    for i in range(n_total):
        try:
            dv = station_keeping_impulse(scenario.controller, scenario.barrier, g, states[i])
        except ControllerInfeasibleError:
            censored[i] = True
            times[i] = 0.0
            continue
        states[i] = apply_impulse(states[i], dv)

    live = ~censored
    fired_times = _propagate_batch_until_trigger(
        scenario, states[live], streams[live], max_wait
    )
    times[live] = fired_times
    capped = live.copy()
    capped[live] = ~np.isfinite(fired_times)
    times[capped] = max_wait
    censored |= capped

    h_col = np.array([scenario.barrier.h(np.array([r, 0, 0, 0, 0, 0])) for r in radii])
    return InterEventSampleSet(
        radius=radii,
        h=h_col,
        inter_event_time=times,
        censored=censored,
        seed=seed,
        n_per_radius=n_per_radius,
        max_wait=max_wait,
    )


def _initial_states(mu: float, radii: np.ndarray, seed: int, streams: np.ndarray) -> np.ndarray:
    """Random-plane, random-phase circular states at the given radii."""
    n = len(radii)
    normals = _hash_unit_vectors(seed, streams, np.full(n, _PLANE_TAG, dtype=np.uint64), 3)
    angles = 2.0 * np.pi * _hash_uniforms(
        seed, streams, np.full(n, _ANGLE_TAG, dtype=np.uint64), 1
    )[:, 0]

    # in-plane basis: e1 perpendicular to the normal, e2 completes the triad
    ref = np.where(
        (np.abs(normals[:, 2]) < 0.9)[:, None],
        np.tile(np.array([0.0, 0.0, 1.0]), (n, 1)),
        np.tile(np.array([1.0, 0.0, 0.0]), (n, 1)),
    )
    e1 = np.cross(normals, ref)
    e1 /= np.linalg.norm(e1, axis=1, keepdims=True)
    e2 = np.cross(normals, e1)

    r_hat = np.cos(angles)[:, None] * e1 + np.sin(angles)[:, None] * e2
    t_hat = np.cross(normals, r_hat)
    v_circ = np.sqrt(mu / radii)

    states = np.empty((n, 6))
    states[:, :3] = radii[:, None] * r_hat
    states[:, 3:] = v_circ[:, None] * t_hat
    return states


def _two_body_batch(states: np.ndarray, mu: float) -> np.ndarray:
    pos = states[:, :3]
    r = np.linalg.norm(pos, axis=1, keepdims=True)
    out = np.empty_like(states)
    out[:, :3] = states[:, 3:]
    out[:, 3:] = (-mu / (r * r * r)) * pos
    return out


def margin_batch(states: np.ndarray, R: float, gamma: float, d_bar: float) -> np.ndarray:
    """Vectorized barrier-condition margin for the orbital range barrier.

    Must agree with :func:`etsafe.barrier.barrier_condition_margin` evaluated
    per state (covered by tests); hardcodes the linear class-K rate.
    """
    pos = states[:, :3]
    vel = states[:, 3:]
    r = np.linalg.norm(pos, axis=1)
    rdot = np.einsum("ij,ij->i", pos, vel) / r
    delta = r - 2.0 * R
    h = (0.4 * R) ** 2 - delta * delta
    return -2.0 * delta * rdot - 2.0 * np.abs(delta) * d_bar + gamma * h


def _propagate_batch_until_trigger(
    scenario: SatelliteScenario,
    states0: np.ndarray,
    streams: np.ndarray,
    max_wait: float,
) -> np.ndarray:
    """First margin zero-crossing time per sample; NaN where max_wait passed."""
    g = scenario.gravity
    b = scenario.barrier
    dist = scenario.disturbance
    dt = scenario.integrator.step_size
    gamma = b.gamma
    if not np.isfinite(gamma):
        raise ValueError("batch campaign requires the linear class-K orbital barrier")

    n = len(states0)
    out = np.full(n, np.nan)
    states = np.array(states0, dtype=float)
    indices = np.arange(n)
    margins = margin_batch(states, g.R, gamma, b.d_bar)
    n_steps = int(np.ceil(max_wait / dt))

    interval_cache: dict[int, np.ndarray] = {}

    def disturbance_at(t: float) -> np.ndarray:
        if dist.kind == "none":
            return np.zeros((len(indices), 3))
        if dist.kind == "zonal-j2-like":
            return dist.sample_batch(t, states, streams[indices])
        k = int(np.floor(t / dist.hold_time))
        if k not in interval_cache:
            if len(interval_cache) > 4:
                interval_cache.clear()
            # full-width table keyed by the actual stream ids, then subset
            interval_cache[k] = dist.d_bar * _hash_unit_vectors(
                dist.seed, streams, np.full(n, k, dtype=np.uint64), dist.dim
            )
        return interval_cache[k][indices]

    def rhs(t: float, x: np.ndarray) -> np.ndarray:
        out_ = _two_body_batch(x, g.mu)
        out_[:, 3:] += disturbance_at(t)
        return out_

    for k in range(n_steps):
        if len(indices) == 0:
            break
        t0 = k * dt
        k1 = rhs(t0, states)
        k2 = rhs(t0 + 0.5 * dt, states + 0.5 * dt * k1)
        k3 = rhs(t0 + 0.5 * dt, states + 0.5 * dt * k2)
        k4 = rhs(t0 + dt, states + dt * k3)
        new_states = states + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        new_margins = margin_batch(new_states, g.R, gamma, b.d_bar)

        fired = (margins > 0.0) & (new_margins <= 0.0)
        if np.any(fired):
            for j in np.where(fired)[0]:
                out[indices[j]] = _refine_sample_crossing(
                    scenario, states[j], new_states[j], t0, dt, int(streams[indices[j]])
                )
            keep = ~fired
            indices = indices[keep]
            states = new_states[keep]
            margins = new_margins[keep]
        else:
            states = new_states
            margins = new_margins
    return out


def _refine_sample_crossing(
    scenario: SatelliteScenario,
    x0: np.ndarray,
    x1: np.ndarray,
    t0: float,
    dt: float,
    stream: int,
) -> float:
    """Scalar in-step refinement matching the engine's event semantics."""
    g = scenario.gravity
    b = scenario.barrier
    flow = scenario.nominal_flow()
    monitor = lambda x: barrier_condition_margin(b, flow, x)

    if scenario.integrator.interpolation == "cubic-hermite":
        d0 = scenario.disturbance.sample(t0, x0, stream)
        d1 = scenario.disturbance.sample(t0 + dt, x1, stream)
        f0 = two_body_field(g, x0)
        f0[3:] += d0
        f1 = two_body_field(g, x1)
        f1[3:] += d1
        interp = hermite_interpolant(t0, x0, f0, t0 + dt, x1, f1)
    else:
        interp = linear_interpolant(t0, x0, t0 + dt, x1)

    if monitor(x0) <= 0.0:  # margin grazed zero within tolerance at step start
        return t0
    res = locate_zero_crossing(lambda t: monitor(interp(t)), t0, t0 + dt, scenario.events)
    return res.time


# --- Fitting ---


def fit_inter_event_model(
    samples: InterEventSampleSet,
    basis: str = "piecewise-linear",
    statistic: str = "median",
    degree: int = 3,
) -> InterEventTimeModel:
    """Least-squares fit of the per-level statistics against h.

    The default piecewise-linear basis with knots at the levels interpolates
    the level statistics exactly (residual 0), keeping the fitted curve
    monotone wherever the statistics are.  The polynomial basis is retained
    for smoother-derivative experiments and requires degree < number of
    levels.
    """
    if basis not in _BASES:
        raise FitError(f"unknown basis {basis!r}")
    levels, stats = samples.level_statistics(statistic)
    if len(levels) < 2:
        raise FitError(f"need >= 2 distinct h levels, got {len(levels)}")

    if basis == "piecewise-linear":
        return InterEventTimeModel(
            basis=basis,
            knots=levels,
            coefficients=stats,
            h_min=float(levels[0]),
            h_max=float(levels[-1]),
            residual=0.0,
            statistic=statistic,
        )

    if degree >= len(levels):
        raise FitError(
            f"polynomial degree {degree} needs more than {degree} levels, got {len(levels)}"
        )
    coeffs = np.polynomial.polynomial.polyfit(levels, stats, degree)
    fitted = np.polynomial.polynomial.polyval(levels, coeffs)
    residual = float(np.sqrt(np.mean((fitted - stats) ** 2)))
    return InterEventTimeModel(
        basis=basis,
        knots=levels,
        coefficients=coeffs,
        h_min=float(levels[0]),
        h_max=float(levels[-1]),
        residual=residual,
        statistic=statistic,
    )


# --- Serialization (documented plain-text formats) ---


def save_samples(samples: InterEventSampleSet, path: str) -> None:
    """CSV columns: radius, h, inter_event_time, censored (0/1).

    Campaign keys ride along as '#'-prefixed header comments.  Written
    atomically (temp file + rename).
    """
    lines = [
        "# etsafe inter-event samples",
        f"# seed={samples.seed} n_per_radius={samples.n_per_radius} max_wait={samples.max_wait!r}",
        "radius,h,inter_event_time,censored",
    ]
    for r, h, t, c in zip(
        samples.radius, samples.h, samples.inter_event_time, samples.censored
    ):
        lines.append(f"{float(r)!r},{float(h)!r},{float(t)!r},{int(c)}")
    _atomic_write(path, "\n".join(lines) + "\n")


def load_samples(path: str) -> InterEventSampleSet:
    seed, n_per_radius, max_wait = 0, 0, float("nan")
    rows = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                for token in line[1:].split():
                    if token.startswith("seed="):
                        seed = int(token[5:])
                    elif token.startswith("n_per_radius="):
                        n_per_radius = int(token[13:])
                    elif token.startswith("max_wait="):
                        max_wait = float(token[9:])
                continue
            if line.startswith("radius,"):
                continue
            r, h, t, c = line.split(",")
            rows.append((float(r), float(h), float(t), bool(int(c))))
    if not rows:
        raise ValueError(f"no sample rows in {path}")
    arr = np.array(rows, dtype=float)
    return InterEventSampleSet(
        radius=arr[:, 0],
        h=arr[:, 1],
        inter_event_time=arr[:, 2],
        censored=arr[:, 3].astype(bool),
        seed=seed,
        n_per_radius=n_per_radius,
        max_wait=max_wait,
    )


def save_model(model: InterEventTimeModel, path: str) -> None:
    """JSON document: basis id, knots, coefficients, fitted range, residual."""
    doc = {
        "basis": model.basis,
        "knots": [float(k) for k in model.knots],
        "coefficients": [float(c) for c in model.coefficients],
        "h_min": model.h_min,
        "h_max": model.h_max,
        "residual": model.residual,
        "statistic": model.statistic,
    }
    _atomic_write(path, json.dumps(doc, indent=2) + "\n")


def load_model(path: str) -> InterEventTimeModel:
    with open(path, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    return InterEventTimeModel(
        basis=doc["basis"],
        knots=np.array(doc["knots"], dtype=float),
        coefficients=np.array(doc["coefficients"], dtype=float),
        h_min=float(doc["h_min"]),
        h_max=float(doc["h_max"]),
        residual=float(doc["residual"]),
        statistic=doc.get("statistic", "median"),
    )


def _atomic_write(path: str, content: str) -> None:
    tmp = f"{path}.tmp"
    with open(tmp, "w", encoding="utf-8") as fh:
        fh.write(content)
    os.replace(tmp, path)
