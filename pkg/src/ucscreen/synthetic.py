"""Random connected test systems with sized line capacities."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InfeasibleProblem
from .grid import Generator, Grid, Line, build_ptdf, line_flows
from .uc import solve_uc


@dataclass(frozen=True)
class SyntheticCase:
    grid: Grid
    xi: np.ndarray
    load_range: tuple[float, float]

    @property
    def allocation(self) -> dict[str, float]:
        return dict(zip(self.grid.buses, map(float, self.xi)))


def _merit_dispatch(costs, pmin, pmax, load):
    """Copper-plate dispatch: commit in merit order until capacity covers load."""
    order = np.argsort(costs, kind="stable")
    u = np.zeros(costs.size, bool)
    cap = 0.0
    for g in order:
        if cap >= load:
            break
        u[g] = True
        cap += pmax[g]
    p = np.where(u, pmin, 0.0)
    rest = load - p.sum()
    for g in order:
        if not u[g] or rest <= 0:
            continue
        step = min(pmax[g] - p[g], rest)
        p[g] += step
        rest -= step
    return p


def random_grid(n_buses: int, n_generators: int, seed: int = 0, extra_lines: int | None = None,
                load_share: float = 0.6, load_range=(0.35, 0.65), tightness=(0.6, 1.4),
                n_samples: int = 64, n_checks: int = 12) -> SyntheticCase:
    """Random spanning tree plus chords, random fleet and nodal allocation.

    ``load_range`` is a fraction of installed capacity. Each line capacity is
    a random multiple (drawn from ``tightness``) of the largest flow seen
    under copper-plate merit-order dispatch over sampled loads, so some lines
    bind and others never do. All capacities are then scaled up by 10%
    steps until the full UC is feasible at ``n_checks`` probe demands
    spread over the load range.
    """
    if n_buses < 2 or n_generators < 1:
        raise ValueError("need at least two buses and one generator")
    rng = np.random.default_rng(seed)
    buses = tuple(f"n{k + 1}" for k in range(n_buses))
    edges: set[tuple[int, int]] = set()
    perm = rng.permutation(n_buses)
    for k in range(1, n_buses):
        a, b = int(perm[k]), int(perm[rng.integers(0, k)])
        edges.add((min(a, b), max(a, b)))
    if extra_lines is None:
        extra_lines = max(1, n_buses // 2)
    tries = 0
    target = min(len(edges) + extra_lines, n_buses * (n_buses - 1) // 2)
    while len(edges) < target and tries < 100 * n_buses:
        a, b = sorted(map(int, rng.choice(n_buses, 2, replace=False)))
        edges.add((a, b))
        tries += 1
    edges_l = sorted(edges)
    suscept = rng.uniform(0.5, 2.0, len(edges_l))

    pmax = np.round(rng.uniform(30.0, 120.0, n_generators), 1)
    pmin = np.round(pmax * rng.uniform(0.0, 0.4, n_generators), 1)
    costs = np.round(rng.uniform(5.0, 50.0, n_generators), 2)
    gen_bus = rng.choice(n_buses, n_generators, replace=n_generators > n_buses)
    gens = tuple(Generator(f"g{k + 1}", buses[int(b)], float(costs[k]), float(pmin[k]), float(pmax[k]))
                 for k, b in enumerate(gen_bus))

    n_load = max(1, int(round(load_share * n_buses)))
    load_bus = rng.choice(n_buses, n_load, replace=False)
    xi = np.zeros(n_buses)
    xi[load_bus] = rng.uniform(0.2, 1.0, n_load)
    xi /= xi.sum()
    total = float(pmax.sum())
    lo, hi = load_range[0] * total, load_range[1] * total

    probe = Grid(buses, tuple(Line(f"l{k + 1}", buses[a], buses[b], float(s), 1.0)
                              for k, ((a, b), s) in enumerate(zip(edges_l, suscept))), gens, buses[0])
    ptdf = build_ptdf(probe)
    peak = np.zeros(len(edges_l))
    M = probe.gen_incidence
    for L in np.linspace(lo, hi, n_samples):
        d = L * xi * rng.uniform(0.95, 1.05, n_buses)
        p = _merit_dispatch(costs, pmin, pmax, d.sum())
        peak = np.maximum(peak, np.abs(line_flows(ptdf, M @ p - d)))
    caps = np.maximum(peak * rng.uniform(*tightness, len(edges_l)), 0.05 * hi)
    probes = [L * xi * rng.uniform(0.95, 1.05, n_buses) for L in np.linspace(lo, hi, n_checks)]
    for _ in range(30):
        lines = tuple(Line(f"l{k + 1}", buses[a], buses[b], float(s), float(np.round(c, 2)))
                      for k, ((a, b), s, c) in enumerate(zip(edges_l, suscept, caps)))
        grid = Grid(buses, lines, gens, buses[0], name=f"synthetic{n_buses}-s{seed}")
        if all(_feasible(grid, ptdf, d) for d in probes):
            break
        caps = caps * 1.1
    return SyntheticCase(grid, xi, (float(lo), float(hi)))


def _feasible(grid: Grid, ptdf, d) -> bool:
    try:
        solve_uc(grid, ptdf, d)
    except InfeasibleProblem:
        return False
    return True
