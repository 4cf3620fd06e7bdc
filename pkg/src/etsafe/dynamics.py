"""Vector fields, jump maps, and bounded disturbance models.

Units are normalized: the central body has gravitational parameter mu = 1 and
mean radius R = 1, so all lengths are in body radii and time is the
corresponding dynamical unit.  Satellite states are flat 6-vectors
``[rx, ry, rz, vx, vy, vz]`` in a body-centered inertial frame.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np


class SingularityError(RuntimeError):
    """Radius fell below the singularity floor (crash into the central body)."""


@dataclass(frozen=True)
class GravityModel:
    """Point-mass central body."""

    mu: float = 1.0
    R: float = 1.0

    def __post_init__(self) -> None:
        if not self.mu > 0.0:
            raise ValueError("mu must be > 0")
        if not self.R > 0.0:
            raise ValueError("R must be > 0")


def two_body_field(
    g: GravityModel, s: np.ndarray, singularity_floor: Optional[float] = None
) -> np.ndarray:
    """Two-body derivative ``d/dt [r, v] = [v, -mu r / |r|^3]``.

    The floor (default 0.1 R) only guards pathological configurations; the
    safe set keeps the radius well above it.
    """
    floor = 0.1 * g.R if singularity_floor is None else singularity_floor
    pos = s[:3]
    r = float(np.sqrt(pos[0] * pos[0] + pos[1] * pos[1] + pos[2] * pos[2]))
    if r < floor:
        raise SingularityError(f"radius {r!r} below singularity floor {floor!r}")
    out = np.empty(6)
    out[:3] = s[3:]
    out[3:] = (-g.mu / (r * r * r)) * pos
    return out


def apply_impulse(s: np.ndarray, dv: np.ndarray) -> np.ndarray:
    """Instantaneous velocity change: position unchanged, velocity += dv."""
    out = np.array(s, dtype=float)
    out[3:] += dv
    return out


# --- Seeded disturbance models ---
#
# The piecewise-constant kind draws its held vectors from a counter-based
# integer hash instead of a stateful RNG: the value on interval k of stream s
# is a pure function of (seed, s, k), so scalar simulation, batched sampling
# campaigns, and parallel sub-runs all see identical realizations.

_SM_GAMMA = np.uint64(0x9E3779B97F4A7C15)
_SM_MUL1 = np.uint64(0xBF58476D1CE4E5B9)
_SM_MUL2 = np.uint64(0x94D049BB133111EB)
_STREAM_SALT = np.uint64(0xD1342543DE82EF95)
_INTERVAL_SALT = np.uint64(0xAF251AF3B0F025B5)


def _splitmix64(z: np.ndarray) -> np.ndarray:
    z = (z + _SM_GAMMA).astype(np.uint64)
    z = ((z ^ (z >> np.uint64(30))) * _SM_MUL1).astype(np.uint64)
    z = ((z ^ (z >> np.uint64(27))) * _SM_MUL2).astype(np.uint64)
    return (z ^ (z >> np.uint64(31))).astype(np.uint64)


def _hash_uniforms(
    seed: int, streams: np.ndarray, intervals: np.ndarray, count: int
) -> np.ndarray:
    """(N, count) uniforms in (0, 1], deterministic in all keys.

    ``streams`` and ``intervals`` are broadcast against each other.
    """
    base = _splitmix64(np.uint64(seed) * np.ones(1, dtype=np.uint64))[0]
    z = _splitmix64(base ^ (np.asarray(streams, dtype=np.uint64) * _STREAM_SALT))
    z = _splitmix64(z ^ (np.asarray(intervals, dtype=np.uint64) * _INTERVAL_SALT))
    cols = []
    for _ in range(count):
        z = _splitmix64(z)
        cols.append(((z >> np.uint64(11)).astype(np.float64) + 1.0) * 2.0**-53)
    return np.stack(cols, axis=-1)


def _hash_unit_vectors(
    seed: int, streams: np.ndarray, intervals: np.ndarray, dim: int
) -> np.ndarray:
    """(N, dim) unit vectors, uniform on the sphere, via Box-Muller."""
    n_pairs = (dim + 1) // 2
    u = _hash_uniforms(seed, streams, intervals, 2 * n_pairs)
    radius = np.sqrt(-2.0 * np.log(u[..., 0::2]))
    angle = 2.0 * np.pi * u[..., 1::2]
    normals = np.empty(u.shape)
    normals[..., 0::2] = radius * np.cos(angle)
    normals[..., 1::2] = radius * np.sin(angle)
    vecs = normals[..., :dim]
    norms = np.linalg.norm(vecs, axis=-1, keepdims=True)
    norms[norms < 1e-300] = 1.0
    return vecs / norms


_DISTURBANCE_KINDS = ("none", "zonal-j2-like", "seeded-piecewise-constant")


@dataclass(frozen=True)
class DisturbanceModel:
    """Bounded disturbance acceleration, ``|d| <= d_bar`` at all times.

    Kinds:

    * ``none``: identically zero.
    * ``zonal-j2-like``: smooth, state-dependent oblateness-style field,
      scaled so its supremum over the shell ``shell_inner <= r <= shell_outer``
      equals d_bar.  3-D only.
    * ``seeded-piecewise-constant``: a vector of magnitude d_bar with a fresh
      hash-derived direction every ``hold_time``, per (seed, stream).

    Every emitted sample is clamped to the bound, so the invariant
    ``|d| <= d_bar`` holds exactly.
    """

    kind: str = "none"
    d_bar: float = 0.0
    seed: int = 0
    hold_time: float = 1.0
    dim: int = 3
    shell_inner: float = 1.6
    shell_outer: float = 2.4

    def __post_init__(self) -> None:
        if self.kind not in _DISTURBANCE_KINDS:
            raise ValueError(f"unknown disturbance kind {self.kind!r}")
        if self.d_bar < 0.0:
            raise ValueError("d_bar must be >= 0")
        if self.kind != "none" and not self.d_bar > 0.0:
            raise ValueError(f"kind {self.kind!r} requires d_bar > 0")
        if self.kind == "seeded-piecewise-constant" and not self.hold_time > 0.0:
            raise ValueError("hold_time must be > 0")
        if self.kind == "zonal-j2-like" and self.dim != 3:
            raise ValueError("zonal-j2-like disturbance is 3-D only")
        if self.dim not in (2, 3):
            raise ValueError("dim must be 2 or 3")

    def sample(self, t: float, s: np.ndarray, stream: int = 0) -> np.ndarray:
        """Disturbance vector at time t and state s, clamped to d_bar."""
        if self.kind == "none":
            return np.zeros(self.dim)
        if self.kind == "seeded-piecewise-constant":
            interval = int(np.floor(t / self.hold_time))
            direction = _hash_unit_vectors(
                self.seed,
                np.array([stream], dtype=np.uint64),
                np.array([interval], dtype=np.uint64),
                self.dim,
            )[0]
            return self.d_bar * direction
        return self._clamp(self._zonal(s))

    def sample_batch(self, t: float, states: np.ndarray, streams: np.ndarray) -> np.ndarray:
        """Vectorized twin of :meth:`sample`; one row per stream."""
        n = len(streams)
        if self.kind == "none":
            return np.zeros((n, self.dim))
        if self.kind == "seeded-piecewise-constant":
            interval = int(np.floor(t / self.hold_time))
            intervals = np.full(n, interval, dtype=np.uint64)
            return self.d_bar * _hash_unit_vectors(self.seed, streams, intervals, self.dim)
        out = np.empty((n, self.dim))
        for i in range(n):
            out[i] = self._clamp(self._zonal(states[i]))
        return out

    def _zonal(self, s: np.ndarray) -> np.ndarray:
        pos = s[:3]
        r2 = float(pos @ pos)
        r = np.sqrt(r2)
        if r < 1e-12:
            return np.zeros(3)
        # Oblateness-style direction field; its direction-factor norm peaks at
        # 2 over the poles, and 1/r^4 peaks at the inner shell radius, so the
        # scale below makes sup |d| over the shell equal d_bar.
        scale = self.d_bar * self.shell_inner**4 / 2.0
        z2_r2 = pos[2] * pos[2] / r2
        vec = np.array(
            [
                pos[0] * (5.0 * z2_r2 - 1.0),
                pos[1] * (5.0 * z2_r2 - 1.0),
                pos[2] * (5.0 * z2_r2 - 3.0),
            ]
        ) / r
        return (scale / (r2 * r2)) * vec

    def _clamp(self, d: np.ndarray) -> np.ndarray:
        norm = float(np.linalg.norm(d))
        if norm > self.d_bar:
            return d * (self.d_bar / norm)
        return d

    def realize(self, horizon: float, stream: int = 0) -> Callable[[float, np.ndarray], np.ndarray]:
        """Fast per-run sampler ``d(t, s)`` valid for ``0 <= t <= horizon``.

        For the piecewise-constant kind the whole hold-interval table is
        precomputed in one vectorized pass.
        """
        if self.kind == "none":
            zero = np.zeros(self.dim)
            zero.flags.writeable = False
            return lambda t, s: zero
        if self.kind == "zonal-j2-like":
            return lambda t, s: self._clamp(self._zonal(s))

        n_intervals = int(np.floor(horizon / self.hold_time)) + 2
        streams = np.full(n_intervals, stream, dtype=np.uint64)
        intervals = np.arange(n_intervals, dtype=np.uint64)
        table = self.d_bar * _hash_unit_vectors(self.seed, streams, intervals, self.dim)
        table.flags.writeable = False
        hold = self.hold_time
        last = n_intervals - 1

        def sampler(t: float, s: np.ndarray) -> np.ndarray:
            k = int(t / hold)
            return table[k if k < last else last]

        return sampler


# --- Control-affine systems and the planar demo ---


@dataclass(frozen=True)
class ControlAffineSystem:
    """System ``dx/dt = drift(x) + input_matrix(x) @ u + d``."""

    drift: Callable[[np.ndarray], np.ndarray]
    input_matrix: Callable[[np.ndarray], np.ndarray]
    state_dim: int
    input_dim: int

    def closed_loop(self, x: np.ndarray, u: np.ndarray) -> np.ndarray:
        return self.drift(x) + self.input_matrix(x) @ u


def single_integrator(dim: int = 2) -> ControlAffineSystem:
    """``dx/dt = u + d``: the desk-scale instance used by the planar demo."""
    eye = np.eye(dim)
    eye.flags.writeable = False
    return ControlAffineSystem(
        drift=lambda x: np.zeros(dim),
        input_matrix=lambda x: eye,
        state_dim=dim,
        input_dim=dim,
    )


def planar_demo_field(x: np.ndarray, u: np.ndarray, d: np.ndarray) -> np.ndarray:
    """Single-integrator planar dynamics: returns ``u + d``."""
    return u + d


def goal_tracking_controller(goal: np.ndarray, gain: float = 1.0) -> Callable[[np.ndarray], np.ndarray]:
    """Proportional nominal controller ``k_nom(x) = -gain * (x - goal)``."""
    goal = np.array(goal, dtype=float)

    def k_nom(x: np.ndarray) -> np.ndarray:
        return -gain * (x - goal)

    return k_nom
