"""Brute-force checks of screening verdicts by sampling operating points."""

from __future__ import annotations

import numpy as np

from .grid import Grid, PtdfMatrix
from .solver import EQ, GE, LE, Status
from .solver.simplex import solve_dense
from .uc import ConstraintMask


def sample_dispatch_points(grid: Grid, ptdf: PtdfMatrix, d, mask: ConstraintMask, n: int,
                           rng: np.random.Generator, max_tries: int | None = None,
                           backend: str | None = None) -> np.ndarray:
    """Up to ``n`` dispatch vectors feasible for the model restricted to ``mask``.

    Each draw picks a random commitment and a random objective, then takes
    the optimal vertex of the dispatch LP. Vertices are where a dropped
    limit would first be crossed, so they are the points worth checking.
    Commitments found infeasible are remembered and not solved again.
    """
    d = np.asarray(d, dtype=float)
    G = grid.n_generators
    sens = ptdf.values[:, grid.gen_bus]
    shift = ptdf.values @ d
    cap = grid.capacities
    rows = [np.ones(G)]
    senses = [EQ]
    rhs = [d.sum()]
    for k in np.flatnonzero(mask.keep_upper):
        rows.append(sens[k]); senses.append(LE); rhs.append(cap[k] + shift[k])
    for k in np.flatnonzero(mask.keep_lower):
        rows.append(sens[k]); senses.append(GE); rhs.append(-cap[k] + shift[k])
    A = np.array(rows)
    senses = np.array(senses)
    rhs = np.array(rhs)
    pts = []
    dead: set[bytes] = set()
    tries = 0
    max_tries = max_tries or 4 * n
    while len(pts) < n and tries < max_tries:
        tries += 1
        u = rng.random(G) < rng.uniform(0.3, 1.0)
        if not u.any():
            u[rng.integers(G)] = True
        key = u.tobytes()
        if key in dead:
            continue
        out = solve_dense(rng.standard_normal(G), A, senses, rhs, u * grid.p_min, u * grid.p_max,
                          backend=backend)
        if out.optimal:
            pts.append(out.x)
        elif out.status is Status.INFEASIBLE:
            dead.add(key)
    return np.array(pts).reshape(-1, G)


def removed_side_violation(grid: Grid, ptdf: PtdfMatrix, d, points: np.ndarray,
                           mask: ConstraintMask) -> float:
    """Largest overshoot of a dropped limit over the sampled points (0 if none)."""
    if points.size == 0:
        return 0.0
    q = points @ grid.gen_incidence.T - np.asarray(d, dtype=float)
    f = q @ ptdf.values.T
    cap = grid.capacities
    over_up = np.where(~mask.keep_upper, f - cap, -np.inf)
    over_lo = np.where(~mask.keep_lower, -cap - f, -np.inf)
    worst = max(over_up.max(), over_lo.max())
    return float(max(worst, 0.0))
