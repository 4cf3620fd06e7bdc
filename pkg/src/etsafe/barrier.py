"""Barrier functions and the trigger margins built from them.

A barrier function h defines the safe set as its zero superlevel set
(h >= 0 is safe).  Safety monitoring reduces to watching the scalar margin

    barrier_condition_margin(x) = dh/dt along the flow
                                  - |grad h| * d_bar          (disturbance worst case)
                                  + alpha(h(x))               (class-K rate)

which is nonnegative exactly when the robust barrier condition holds.  Every
trigger in this package is a zero crossing of this margin, of a shifted copy
of it (hysteresis), or of the expected-inter-event-time trend in
:func:`maneuver_timing_margin`.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING, Callable

import numpy as np

from .dynamics import GravityModel

if TYPE_CHECKING:
    from .inter_event import InterEventTimeModel

Flow = Callable[[np.ndarray], np.ndarray]


class GradientMismatchError(ValueError):
    """Analytic gradient disagrees with finite differences of h."""


def linear_class_k(gain: float) -> Callable[[float], float]:
    """Linear class-K rate ``alpha(h) = gain * h``."""
    if not gain > 0.0:
        raise ValueError("gain must be > 0")

    def alpha(h: float) -> float:
        return gain * h

    return alpha


@dataclass(frozen=True)
class BarrierSpec:
    """A barrier function with its gradient, class-K rate, and noise bound.

    d_bar must equal the disturbance model's bound; the margin functions below
    use exactly this declared value in their robust terms.
    """

    h: Callable[[np.ndarray], float]
    grad_h: Callable[[np.ndarray], np.ndarray]
    alpha: Callable[[float], float]
    d_bar: float
    gamma: float = float("nan")  # gain of a linear alpha, recorded for reporting

    def __post_init__(self) -> None:
        if self.d_bar < 0.0:
            raise ValueError("d_bar must be >= 0")


def check_class_k(alpha: Callable[[float], float], h_max: float, n: int = 64) -> None:
    """Sampled check that alpha(0) = 0 and alpha is strictly increasing."""
    if abs(alpha(0.0)) > 1e-12:
        raise ValueError(f"alpha(0) must be 0, got {alpha(0.0)!r}")
    grid = np.linspace(0.0, h_max, n)
    vals = np.array([alpha(float(v)) for v in grid])
    if not np.all(np.diff(vals) > 0.0):
        raise ValueError("alpha must be strictly increasing on the evaluated range")


def check_gradient(
    b: BarrierSpec,
    states: np.ndarray,
    rel_tol: float = 1e-5,
    eps: float = 1e-6,
) -> float:
    """Compare grad_h against central finite differences of h.

    Returns the worst relative error over the given states; raises
    GradientMismatchError when it exceeds rel_tol.
    """
    worst = 0.0
    for x in np.atleast_2d(states):
        g = np.asarray(b.grad_h(x), dtype=float)
        fd = np.empty_like(g)
        for i in range(len(x)):
            xp = np.array(x, dtype=float)
            xm = np.array(x, dtype=float)
            xp[i] += eps
            xm[i] -= eps
            fd[i] = (b.h(xp) - b.h(xm)) / (2.0 * eps)
        scale = max(float(np.linalg.norm(g)), 1.0)
        err = float(np.linalg.norm(fd - g)) / scale
        worst = max(worst, err)
    if worst > rel_tol:
        raise GradientMismatchError(
            f"gradient mismatch: relative error {worst:.3e} > {rel_tol:.1e}"
        )
    return worst


def orbital_range_barrier(
    g: GravityModel,
    gamma: float,
    d_bar: float,
    half_width: float = 0.4,
    center: float = 2.0,
) -> BarrierSpec:
    """Annular range barrier keeping the orbital radius near ``center * R``.

    h(r, v) = (half_width R)^2 - (|r| - center R)^2, which is zero exactly at
    r = (center +- half_width) R and positive strictly inside.  The gradient
    lives in the position block only; velocity does not enter h.
    """
    hw = half_width * g.R
    c = center * g.R

    def h(x: np.ndarray) -> float:
        r = float(np.linalg.norm(x[:3]))
        return hw * hw - (r - c) ** 2

    def grad_h(x: np.ndarray) -> np.ndarray:
        pos = x[:3]
        r = float(np.linalg.norm(pos))
        out = np.zeros(6)
        out[:3] = (-2.0 * (r - c) / r) * pos
        return out

    alpha = linear_class_k(gamma)
    check_class_k(alpha, hw * hw)
    spec = BarrierSpec(h=h, grad_h=grad_h, alpha=alpha, d_bar=d_bar, gamma=gamma)
    _self_check(spec, _orbital_check_states(g, c, hw))
    return spec


def planar_disk_barrier(rho: float, gamma: float, d_bar: float) -> BarrierSpec:
    """Disk barrier for the planar demo: h(x) = rho^2 - |x|^2."""
    if not rho > 0.0:
        raise ValueError("rho must be > 0")

    def h(x: np.ndarray) -> float:
        return rho * rho - float(x @ x)

    def grad_h(x: np.ndarray) -> np.ndarray:
        return -2.0 * np.asarray(x, dtype=float)

    alpha = linear_class_k(gamma)
    check_class_k(alpha, rho * rho)
    spec = BarrierSpec(h=h, grad_h=grad_h, alpha=alpha, d_bar=d_bar, gamma=gamma)
    _self_check(spec, _disk_check_states(rho))
    return spec


def _orbital_check_states(g: GravityModel, center: float, half_width: float) -> np.ndarray:
    # Deterministic spread of radii/directions inside the safe shell; catches
    # hand-derivation errors in grad_h at construction time.
    radii = np.linspace(center - 0.9 * half_width, center + 0.9 * half_width, 8)
    angles = np.linspace(0.0, 2.0 * np.pi, 7, endpoint=False)
    states = []
    for r in radii:
        for a in angles:
            states.append(
                [r * np.cos(a), r * np.sin(a) * 0.8, r * np.sin(a) * 0.6, 0.1, -0.2, 0.05]
            )
    return np.array(states)


def _disk_check_states(rho: float) -> np.ndarray:
    radii = np.linspace(0.1 * rho, 0.95 * rho, 6)
    angles = np.linspace(0.0, 2.0 * np.pi, 7, endpoint=False)
    return np.array(
        [[r * np.cos(a), r * np.sin(a)] for r in radii for a in angles]
    )


def _self_check(spec: BarrierSpec, states: np.ndarray) -> None:
    check_gradient(spec, states)


# --- Margin (trigger condition) evaluations ---


def barrier_value(b: BarrierSpec, x: np.ndarray) -> float:
    """h(x)."""
    return float(b.h(x))


def lie_derivative(b: BarrierSpec, field_value: np.ndarray, x: np.ndarray) -> float:
    """Directional derivative of h along a flow value: grad_h(x) . field_value."""
    return float(np.asarray(b.grad_h(x)) @ np.asarray(field_value))


def barrier_condition_margin(b: BarrierSpec, flow: Flow, x: np.ndarray) -> float:
    """Robust barrier-condition margin along the control-free flow.

    Positive means the barrier condition holds with room to spare; the
    on-demand triggers fire when this reaches zero.  ``flow`` is the
    disturbance-free closed-loop field (disturbance is covered by the
    ``|grad h| * d_bar`` term).
    """
    grad = np.asarray(b.grad_h(x), dtype=float)
    lfh = float(grad @ np.asarray(flow(x)))
    return lfh - float(np.linalg.norm(grad)) * b.d_bar + b.alpha(b.h(x))


def filter_off_margin(b: BarrierSpec, nominal_flow: Flow, x: np.ndarray, gap: float) -> float:
    """Margin whose rise through zero allows switching the safety filter off.

    Equals ``barrier_condition_margin`` under the nominal closed loop minus a
    hysteresis gap, so the filter only disengages once the nominal controller
    satisfies the barrier condition with that much slack.  A zero gap reduces
    this to the on-trigger margin; running scenarios require a positive gap
    (enforced at scenario construction) for the off-period dwell guarantee.
    """
    if gap < 0.0:
        raise ValueError("gap must be >= 0")
    return barrier_condition_margin(b, nominal_flow, x) - gap


def maneuver_timing_margin(
    model: "InterEventTimeModel", b: BarrierSpec, flow: Flow, x: np.ndarray
) -> float:
    """Margin that fires when the expected inter-event payoff stops improving.

    The fitted model maps the barrier value to the expected time until the
    next safety trigger.  Along the flow that expectation changes at rate
    ``model'(h(x)) * dh/dt``; this margin is ``(1 + rate) / 2`` and crosses
    zero exactly when the expectation decays faster than real time advances,
    i.e. when waiting longer no longer pays.  Outside the fitted range the
    model derivative is clamped, which never fabricates a firing.
    """
    grad = np.asarray(b.grad_h(x), dtype=float)
    lfh = float(grad @ np.asarray(flow(x)))
    rate = model.evaluate(b.h(x)).derivative * lfh
    return 0.5 * (1.0 + rate)
