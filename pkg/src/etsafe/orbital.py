"""Keplerian machinery and the impulsive station-keeping controller.

The controller keeps the orbital radius inside an annular band around
``2R`` by firing velocity impulses.  Each impulse re-shapes the osculating
orbit in place (position is unchanged, the orbital plane is preserved) so
that:

* one apsis of the new ellipse sits at the blended target radius
  ``r_target(r) = 2R + retarget_gain * (r - 2R)``, halfway back toward the
  band center by default, and
* the craft sits at a prescribed true anomaly whose magnitude grows linearly
  from 0 at the band center to pi/2 at either boundary, on the branch that
  moves the craft back toward the center: outbound (anomaly in (0, pi/2])
  when inside the center radius, inbound (anomaly in [-pi, -pi/2)) when
  outside it.

Near a boundary this maximizes the corrective radial rate; near the center
the new orbit degenerates to a circle at the current radius.  Both choices
make the post-impulse barrier-condition margin large, which is what the
post-jump buffer check requires.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .barrier import BarrierSpec, barrier_condition_margin, barrier_value
from .dynamics import GravityModel, apply_impulse, two_body_field


class EscapeOrbitError(ValueError):
    """State has nonnegative specific energy; no bound orbit exists."""


class RectilinearError(ValueError):
    """Angular momentum too small to define an orbital plane."""


class UnreachableRadiusError(ValueError):
    """vis-viva has no real speed for this (radius, semi-major axis) pair."""


class ControllerInfeasibleError(RuntimeError):
    """No plane-preserving elliptic retarget satisfies the jump conditions."""

    def __init__(self, message: str, state: np.ndarray | None = None):
        super().__init__(message)
        self.state = None if state is None else np.array(state, dtype=float)


@dataclass(frozen=True)
class OrbitalElements:
    """Classical elements of a bound two-body orbit.

    ``true_anomaly`` is normalized to (-pi, pi].  Degenerate geometries use
    the usual conventions: equatorial orbits take the node along +x
    (raan = 0), circular orbits take periapsis along the node
    (arg_periapsis = 0).
    """

    semi_major_axis: float
    eccentricity: float
    inclination: float
    raan: float
    arg_periapsis: float
    true_anomaly: float


@dataclass(frozen=True)
class StationKeepingConfig:
    """Impulse controller parameters.

    post_jump_margin is the required barrier-condition margin immediately
    after each jump; it buys the guaranteed dwell time between events.
    """

    post_jump_margin: float = 0.01
    retarget_gain: float = 0.5

    def __post_init__(self) -> None:
        if not self.post_jump_margin > 0.0:
            raise ValueError("post_jump_margin must be > 0")
        if not 0.0 <= self.retarget_gain < 1.0:
            raise ValueError("retarget_gain must be in [0, 1)")


@dataclass(frozen=True)
class JumpCheck:
    """Verdict of the post-jump conditions: in-set and margin-buffered."""

    ok: bool
    h_value: float
    xi_value: float


_ANGULAR_MOMENTUM_FLOOR = 1e-9


def elements_from_state(g: GravityModel, s: np.ndarray) -> OrbitalElements:
    """Convert an inertial state to osculating classical elements.

    Raises EscapeOrbitError for nonnegative specific energy and
    RectilinearError when the angular momentum is below the floor.
    """
    r_vec = np.asarray(s[:3], dtype=float)
    v_vec = np.asarray(s[3:6], dtype=float)
    r = float(np.linalg.norm(r_vec))
    if not r > 0.0:
        raise ValueError("position norm must be > 0")
    v2 = float(v_vec @ v_vec)
    energy = 0.5 * v2 - g.mu / r
    if energy >= 0.0:
        raise EscapeOrbitError(f"specific energy {energy!r} >= 0")
    h_vec = np.cross(r_vec, v_vec)
    h = float(np.linalg.norm(h_vec))
    if h < _ANGULAR_MOMENTUM_FLOOR:
        raise RectilinearError(f"angular momentum {h!r} below floor")

    a = -g.mu / (2.0 * energy)
    e_vec = np.cross(v_vec, h_vec) / g.mu - r_vec / r
    e = float(np.linalg.norm(e_vec))

    h_hat = h_vec / h
    inclination = float(np.arccos(np.clip(h_vec[2] / h, -1.0, 1.0)))
    node = np.array([-h_vec[1], h_vec[0], 0.0])
    n_norm = float(np.linalg.norm(node))

    tol = 1e-12
    if n_norm > tol:
        node_hat = node / n_norm
        raan = float(np.arctan2(node_hat[1], node_hat[0]))
    else:
        node_hat = np.array([1.0, 0.0, 0.0])
        raan = 0.0

    if e > tol:
        peri_hat = e_vec / e
        node_perp = np.cross(h_hat, node_hat)
        arg_periapsis = float(np.arctan2(peri_hat @ node_perp, peri_hat @ node_hat))
    else:
        peri_hat = node_hat
        arg_periapsis = 0.0

    peri_perp = np.cross(h_hat, peri_hat)
    true_anomaly = float(np.arctan2(r_vec @ peri_perp, r_vec @ peri_hat))
    if true_anomaly <= -np.pi:
        true_anomaly = np.pi

    return OrbitalElements(
        semi_major_axis=a,
        eccentricity=e,
        inclination=inclination,
        raan=raan,
        arg_periapsis=arg_periapsis,
        true_anomaly=true_anomaly,
    )


def state_from_elements(g: GravityModel, el: OrbitalElements) -> np.ndarray:
    """Inverse of :func:`elements_from_state` for elliptic orbits."""
    a, e = el.semi_major_axis, el.eccentricity
    if not a > 0.0:
        raise ValueError("semi_major_axis must be > 0")
    if not 0.0 <= e < 1.0:
        raise EscapeOrbitError(f"eccentricity {e!r} not in [0, 1)")
    p = a * (1.0 - e * e)
    nu = el.true_anomaly
    r = p / (1.0 + e * np.cos(nu))
    h = np.sqrt(g.mu * p)

    r_pf = np.array([r * np.cos(nu), r * np.sin(nu), 0.0])
    v_pf = (g.mu / h) * np.array([-np.sin(nu), e + np.cos(nu), 0.0])

    cos_o, sin_o = np.cos(el.raan), np.sin(el.raan)
    cos_i, sin_i = np.cos(el.inclination), np.sin(el.inclination)
    cos_w, sin_w = np.cos(el.arg_periapsis), np.sin(el.arg_periapsis)
    rot = np.array(
        [
            [
                cos_o * cos_w - sin_o * sin_w * cos_i,
                -cos_o * sin_w - sin_o * cos_w * cos_i,
                sin_o * sin_i,
            ],
            [
                sin_o * cos_w + cos_o * sin_w * cos_i,
                -sin_o * sin_w + cos_o * cos_w * cos_i,
                -cos_o * sin_i,
            ],
            [sin_w * sin_i, cos_w * sin_i, cos_i],
        ]
    )
    out = np.empty(6)
    out[:3] = rot @ r_pf
    out[3:] = rot @ v_pf
    return out


def vis_viva_speed(g: GravityModel, r: float, a: float) -> float:
    """Orbital speed at radius r on an orbit of semi-major axis a.

    ``sqrt(mu (2/r - 1/a))``; raises UnreachableRadiusError when the orbit
    never reaches that radius.
    """
    val = 2.0 / r - 1.0 / a
    if not val > 0.0:
        raise UnreachableRadiusError(f"2/r - 1/a = {val!r} <= 0 for r={r!r}, a={a!r}")
    return float(np.sqrt(g.mu * val))


def _placed_anomaly(r: float, R: float, center: float = 2.0, half_width: float = 0.4) -> float:
    """Post-jump true anomaly from the placement rule (see module docstring)."""
    frac = min(abs(r - center * R) / (half_width * R), 1.0)
    if r >= center * R:
        return -np.pi + frac * (np.pi / 2.0)
    return frac * (np.pi / 2.0)


def _transfer_ellipse(r: float, nu: float, r_target: float) -> tuple[float, float]:
    """Eccentricity and semi-latus rectum of the plane-fixed retarget ellipse.

    The ellipse passes through radius r at true anomaly nu and has an apsis at
    r_target: the periapsis when the craft is outside the target, the apoapsis
    when inside.  Both branches keep e in [0, 1) for any anomaly produced by
    the placement rule.
    """
    cos_nu = np.cos(nu)
    if r >= r_target:
        denom = r * cos_nu - r_target  # periapsis branch
    else:
        denom = r * cos_nu + r_target  # apoapsis branch
    if abs(denom) < 1e-14:
        raise ControllerInfeasibleError(
            f"degenerate conic: r={r!r}, nu={nu!r}, r_target={r_target!r}"
        )
    e = (r_target - r) / denom
    p = r * (1.0 + e * cos_nu)
    if not (0.0 <= e < 1.0) or not p > 0.0:
        raise ControllerInfeasibleError(
            f"no elliptic retarget: e={e!r}, p={p!r} for r={r!r}, r_target={r_target!r}"
        )
    return float(e), float(p)


def station_keeping_impulse(
    cfg: StationKeepingConfig,
    b: BarrierSpec,
    g: GravityModel,
    s: np.ndarray,
) -> np.ndarray:
    """Velocity impulse that re-injects the craft on a safe, buffered orbit.

    Solves for the post-impulse velocity (same position, same orbital plane
    and rotation sense) realizing the retarget ellipse and placement rule
    described at module level, then verifies the post-jump buffer: the
    barrier-condition margin after the jump must be at least
    ``cfg.post_jump_margin``.  If the blended target radius fails that check,
    the impulse is re-solved targeting the band center exactly
    (retarget_gain of 0 for this jump only), which maximizes the buffer.

    Raises ControllerInfeasibleError when the craft is outside the safe band,
    the plane is undefined, or neither target satisfies the buffer.
    """
    s = np.asarray(s, dtype=float)
    pos = s[:3]
    vel = s[3:6]
    r = float(np.linalg.norm(pos))
    if barrier_value(b, s) < 0.0:
        raise ControllerInfeasibleError(
            f"state outside safe band: r={r!r}", state=s
        )
    h_vec = np.cross(pos, vel)
    h_norm = float(np.linalg.norm(h_vec))
    if h_norm < _ANGULAR_MOMENTUM_FLOOR:
        raise RectilinearError("orbital plane undefined: angular momentum near zero")
    n_hat = h_vec / h_norm
    r_hat = pos / r
    t_hat = np.cross(n_hat, r_hat)

    flow = lambda x: two_body_field(g, x)
    nu = _placed_anomaly(r, g.R)
    for gain in (cfg.retarget_gain, 0.0):
        r_target = 2.0 * g.R + gain * (r - 2.0 * g.R)
        e, p = _transfer_ellipse(r, nu, r_target)
        h_new = np.sqrt(g.mu * p)
        v_radial = (g.mu / h_new) * e * np.sin(nu)
        v_tangential = h_new / r
        v_new = v_radial * r_hat + v_tangential * t_hat
        dv = v_new - vel
        post = apply_impulse(s, dv)
        if barrier_condition_margin(b, flow, post) >= cfg.post_jump_margin:
            return dv
        if gain == 0.0:
            break
    raise ControllerInfeasibleError(
        f"post-jump margin below {cfg.post_jump_margin!r} even when retargeting "
        f"the band center from r={r!r}",
        state=s,
    )


def verify_jump_conditions(
    b: BarrierSpec, g: GravityModel, s_post: np.ndarray, margin: float
) -> JumpCheck:
    """Audit a post-jump state: h >= 0 and barrier-condition margin >= margin.

    With margin = 0 this reduces to the plain barrier-condition check.
    """
    h_val = barrier_value(b, s_post)
    xi_val = barrier_condition_margin(b, lambda x: two_body_field(g, x), s_post)
    return JumpCheck(ok=(h_val >= 0.0 and xi_val >= margin), h_value=h_val, xi_value=xi_val)
