from __future__ import annotations

import numpy as np
import pytest
from oracles import PTDF_L1_N3, T3_INJECTION, T4_FLOW_L1, T4_INJECTION

from ucscreen.errors import DimensionMismatch, DisconnectedGraph
from ucscreen.grid import Generator, Grid, Line, build_ptdf, line_flows, load_grid, save_grid
from ucscreen.synthetic import random_grid


def test_five_node_ptdf_entry(five):
    grid, ptdf = five
    assert ptdf.values.shape == (5, 5)
    assert ptdf.row("l1")[grid.bus_index["n3"]] == pytest.approx(PTDF_L1_N3, abs=1e-12)
    assert np.all(ptdf.values[:, grid.bus_index["n1"]] == 0.0)


def test_t4_flow_on_l1(five):
    _, ptdf = five
    f = line_flows(ptdf, T4_INJECTION)
    assert abs(f[0]) == pytest.approx(T4_FLOW_L1, abs=1e-9)


def test_t3_l4_at_capacity(five):
    grid, ptdf = five
    f = line_flows(ptdf, T3_INJECTION)
    assert abs(f[3]) == pytest.approx(grid.lines[3].capacity, abs=1e-9)


def test_zero_injection_zero_flow(five):
    _, ptdf = five
    assert np.all(line_flows(ptdf, np.zeros(5)) == 0.0)


def test_dimension_mismatch(five):
    _, ptdf = five
    with pytest.raises(DimensionMismatch):
        line_flows(ptdf, np.zeros(4))


def _random_network(rng, n, extra):
    case = random_grid(n, 2, seed=int(rng.integers(1 << 30)), extra_lines=extra, n_checks=1)
    return case.grid


def test_slack_invariance(rng):
    for _ in range(10):
        n = int(rng.integers(3, 21))
        grid = _random_network(rng, n, int(rng.integers(0, n)))
        a = build_ptdf(grid, grid.buses[0])
        b = build_ptdf(grid, grid.buses[int(rng.integers(1, n))])
        for _ in range(10):
            q = rng.normal(size=n)
            q -= q.mean()
            assert np.allclose(line_flows(a, q), line_flows(b, q), atol=1e-9)


def test_kcl(rng):
    for _ in range(20):
        n = int(rng.integers(3, 15))
        grid = _random_network(rng, n, 3)
        ptdf = build_ptdf(grid)
        q = rng.normal(size=n)
        q -= q.mean()
        f = line_flows(ptdf, q)
        # incidence^T f is the net outflow at each bus
        assert np.allclose(grid.incidence.T @ f, q, atol=1e-9)


def test_radial_flows_match_subtree_sums(rng):
    grid = _random_network(rng, 12, 0)
    assert grid.n_lines == 11
    ptdf = build_ptdf(grid)
    q = rng.normal(size=12)
    q -= q.mean()
    f = line_flows(ptdf, q)
    for k, ln in enumerate(grid.lines):
        # buses reachable from from_bus without crossing this line
        adj = {b: [] for b in grid.buses}
        for j, other in enumerate(grid.lines):
            if j != k:
                adj[other.from_bus].append(other.to_bus)
                adj[other.to_bus].append(other.from_bus)
        seen, stack = {ln.from_bus}, [ln.from_bus]
        while stack:
            for nb in adj[stack.pop()]:
                if nb not in seen:
                    seen.add(nb)
                    stack.append(nb)
        side = sum(q[grid.bus_index[b]] for b in seen)
        assert f[k] == pytest.approx(side, abs=1e-9)


def test_disconnected_raises():
    g = Grid(("a", "b", "c"), (Line("x", "a", "b", 1.0, 5.0),), (Generator("g", "a", 1.0, 0.0, 1.0),), "a")
    with pytest.raises(DisconnectedGraph):
        build_ptdf(g)


def test_line_validation():
    with pytest.raises(ValueError):
        Line("x", "a", "a", 1.0, 1.0)
    with pytest.raises(ValueError):
        Line("x", "a", "b", 1.0, 0.0)
    with pytest.raises(ValueError):
        Generator("g", "a", 1.0, 5.0, 1.0)


def test_json_round_trip(five, tmp_path):
    grid, _ = five
    save_grid(grid, tmp_path / "g.json")
    assert load_grid(tmp_path / "g.json") == grid


def test_outage_and_connectivity(five):
    grid, _ = five
    g = grid.without_line("l3")
    assert g.n_lines == 4 and g.is_connected()
    assert not g.without_line("l1").is_connected()
