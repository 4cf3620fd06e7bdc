"""Shared test helpers."""

import numpy as np


def grid_projection_oracle(u_nom, con, n=201):
    """Brute-force argmin over an n x n grid on a box containing u_nom and the
    analytic projection.

    Returns (best feasible grid point, grid resolution) with resolution the
    cell diagonal.  The distance objective is flat along the constraint
    boundary, so the oracle pins the optimal objective value to within one
    cell, not the optimal point; comparisons are made in the objective.
    """
    candidates = [u_nom]
    a_sq = float(con.a @ con.a)
    if a_sq > 0.0:
        candidates.append(u_nom + ((con.rhs - float(con.a @ u_nom)) / a_sq) * con.a)
    pts = np.array(candidates)
    lo = pts.min(axis=0) - 0.5
    hi = pts.max(axis=0) + 0.5
    xs = np.linspace(lo[0], hi[0], n)
    ys = np.linspace(lo[1], hi[1], n)
    gx, gy = np.meshgrid(xs, ys)
    grid = np.stack([gx.ravel(), gy.ravel()], axis=1)
    feasible = grid @ con.a >= con.rhs
    grid = grid[feasible]
    dists = np.sum((grid - u_nom) ** 2, axis=1)
    best = grid[np.argmin(dists)]
    resolution = float(np.linalg.norm((hi - lo) / (n - 1)))
    return best, resolution


def oracle_deviation(u_nom, u_closed_form, u_grid, con):
    """Objective-space deviation between the closed form and the grid oracle.

    The closed form must be feasible and must not lose to any feasible grid
    point; the grid's best must not be more than one cell diagonal worse.
    Returns the absolute objective gap.
    """
    d_cf = float(np.linalg.norm(u_closed_form - u_nom))
    d_grid = float(np.linalg.norm(u_grid - u_nom))
    assert float(con.a @ u_closed_form) >= con.rhs - 1e-9
    assert d_cf <= d_grid + 1e-12  # grid never beats the closed form
    return abs(d_grid - d_cf)
