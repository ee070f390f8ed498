from __future__ import annotations

import math

import numpy as np
import pytest
from oracles import (FIVE_NODE_PER_LINE, FIVE_NODE_RETAINED, FIVE_NODE_SIDES, TWO_NODE_UB_EXTREME,
                     max_flow_over_commitments)

from ucscreen import cases
from ucscreen.costbound import CostBoundModel, fit_cost_bound
from ucscreen.demandset import Box, Singleton, box_from_history, generate_history, hull_from_history
from ucscreen.errors import ConfigMismatch, LineSetMismatch
from ucscreen.grid import build_ptdf
from ucscreen.harness.pipeline import method_configs, training_costs
from ucscreen.screening import (MethodConfig, ScreeningResult, build_bounding_model, intersect,
                                screen_all, screen_line)
from ucscreen.synthetic import random_grid

FLIP = {"lower": "upper", "upper": "lower"}


@pytest.fixture(scope="module")
def five_results():
    grid = cases.five_node()
    ptdf = build_ptdf(grid)
    hist = cases.five_node_history()
    D, C, _ = training_costs(grid, ptdf, hist)
    cb = fit_cost_bound(D, C, n_segments=1)
    return grid, {m: screen_all(grid, ptdf, mc) for m, mc in method_configs(hist, cb).items()}


def _two_box():
    return Box(np.array([0.0, 80.0]), np.array([0.0, 120.0]))


def test_two_node_bn_extreme(two, backend):
    grid, ptdf = two
    b = screen_line(grid, ptdf, "l1", "upper", MethodConfig(_two_box()), backend=backend)
    assert b.extreme_flow == pytest.approx(100.0, abs=1e-6)
    assert not b.removable


def test_two_node_ub_extreme(two, backend):
    grid, ptdf = two
    cfg = MethodConfig(_two_box(), CostBoundModel.constant(2000.0, 80.0, 120.0))
    b = screen_line(grid, ptdf, "l1", "upper", cfg, backend=backend)
    assert b.extreme_flow == pytest.approx(TWO_NODE_UB_EXTREME, abs=1e-6)
    assert b.removable


def test_two_node_budget_row(two):
    grid, ptdf = two
    cfg = MethodConfig(_two_box(), CostBoundModel.constant(2000.0, 80.0, 120.0))
    lp = build_bounding_model(grid, ptdf, "l1", "upper", cfg)
    row = next(r for r in lp.rows if r.name == "cost_budget")
    coefs = {lp.var_names[i]: v for i, v in zip(row.idx, row.val)}
    assert coefs["p[g1]"] == 50.0
    assert coefs["p[g2]"] == 10.0
    # single segment: y fixed to one carrying -intercept, z carrying -slope = 0
    assert coefs.get("y[0]", 0.0) == -2000.0
    assert row.sense == "<=" and row.rhs == 0.0
    assert not lp.is_mip


def test_multi_segment_budget_is_mip(two):
    grid, ptdf = two
    D = np.linspace(80, 120, 9)
    cb = fit_cost_bound(D, 10 * D + np.where(D > 100, 5 * (D - 100), 0.0), n_segments=2)
    lp = build_bounding_model(grid, ptdf, "l1", "upper", MethodConfig(_two_box(), cb))
    assert lp.is_mip and sum(lp.binary) == 2


def test_singleton_pins_demand(two):
    grid, ptdf = two
    b = screen_line(grid, ptdf, "l1", "upper", MethodConfig(Singleton(np.array([0.0, 50.0]))))
    assert b.extreme_flow == pytest.approx(50.0, abs=1e-6)
    assert b.removable


def test_five_node_totals(five_results):
    _, res = five_results
    assert {m: r.n_retained for m, r in res.items()} == FIVE_NODE_RETAINED


@pytest.mark.parametrize("method", sorted(FIVE_NODE_PER_LINE))
def test_five_node_per_line(five_results, method):
    _, res = five_results
    assert res[method].retained_per_line() == FIVE_NODE_PER_LINE[method]


@pytest.mark.parametrize("method", sorted(FIVE_NODE_SIDES))
def test_five_node_sides_up_to_flip(five_results, method):
    _, res = five_results
    r = res[method]
    for lid in r.line_ids:
        got = {side for (l, side) in r.bounds if l == lid and not r.bounds[(l, side)].removable}
        want = FIVE_NODE_SIDES[method].get(lid, set())
        assert got == want or got == {FLIP[s] for s in want}, lid


def test_l4_never_removable(five_results):
    _, res = five_results
    for r in res.values():
        assert not r.bounds[("l4", "upper")].removable
        assert not r.bounds[("l4", "lower")].removable


def test_loose_capacities_remove_everything(five):
    grid, _ = five
    loose = grid.scaled_capacities(10.0)
    res = screen_all(loose, build_ptdf(loose), MethodConfig(box_from_history(cases.five_node_history())))
    assert res.n_retained == 0


def test_intersection_algebra(five_results):
    _, res = five_results
    bn, cc, ub = res["bn"], res["cc"], res["ub"]
    assert intersect([cc]).removable_set == cc.removable_set
    assert intersect([cc, cc]).removable_set == cc.removable_set
    assert intersect([ub, cc]).removable_set == ub.removable_set & cc.removable_set
    assert intersect([bn, cc]).n_removable <= min(bn.n_removable, cc.n_removable)


def test_line_set_mismatch(five_results, two):
    _, res = five_results
    grid, ptdf = two
    other = screen_all(grid, ptdf, MethodConfig(_two_box()))
    with pytest.raises(LineSetMismatch):
        intersect([res["bn"], other])
    with pytest.raises(ValueError):
        intersect([])


def test_config_mismatch(five):
    grid, ptdf = five
    with pytest.raises(ConfigMismatch):
        build_bounding_model(grid, ptdf, "l1", "upper", MethodConfig(_two_box()))
    with pytest.raises(ConfigMismatch):
        build_bounding_model(grid, ptdf, "l1", "upper", MethodConfig(Singleton(np.ones(3))))


def test_certificate_round_trip(five_results, tmp_path):
    grid, res = five_results
    for r in res.values():
        r.save(tmp_path / "c.json")
        back = ScreeningResult.load(tmp_path / "c.json")
        assert back.removable_set == r.removable_set
        assert back.digest == r.digest and back.method == r.method
        assert np.array_equal(back.to_mask(grid).keep_upper, r.to_mask(grid).keep_upper)
        for key, b in r.bounds.items():
            e = back.bounds[key].extreme_flow
            assert (math.isnan(e) and math.isnan(b.extreme_flow)) or e == b.extreme_flow


def test_workers_match_serial(five):
    grid, ptdf = five
    cfg = MethodConfig(hull_from_history(cases.five_node_history()))
    a = screen_all(grid, ptdf, cfg)
    b = screen_all(grid, ptdf, cfg, workers=2)
    assert a.removable_set == b.removable_set
    for key in a.bounds:
        assert a.bounds[key].extreme_flow == pytest.approx(b.bounds[key].extreme_flow, abs=1e-9)


def _random_instance(seed: int):
    rng = np.random.default_rng(seed)
    case = random_grid(int(rng.integers(5, 9)), int(rng.integers(3, 6)), seed=seed)
    hist = generate_history(case.xi, 60, case.load_range, seed=seed, buses=case.grid.buses)
    return case, hist


@pytest.mark.parametrize("seed", range(4))
def test_nesting_on_random_grids(seed):
    case, hist = _random_instance(seed)
    grid = case.grid
    ptdf = build_ptdf(grid)
    D, C, _ = training_costs(grid, ptdf, hist)
    cb = fit_cost_bound(D, C, elbow_max=3)
    rem = {m: screen_all(grid, ptdf, mc).removable_set for m, mc in method_configs(hist, cb).items()}
    assert rem["bn"] <= rem["ub"] <= rem["ubcc"]
    assert rem["bn"] <= rem["cc"] <= rem["ubcc"]


@pytest.mark.parametrize("seed", range(4))
def test_relaxation_dominates_integer_extreme(seed):
    case, hist = _random_instance(seed)
    grid = case.grid
    ptdf = build_ptdf(grid)
    d = hist.values[0]
    cfg = MethodConfig(Singleton(d))
    for k in range(grid.n_lines):
        for side in ("upper", "lower"):
            ref = max_flow_over_commitments(grid, ptdf, d, k, side)
            if ref is None:
                continue
            ext = screen_line(grid, ptdf, k, side, cfg).extreme_flow
            if side == "upper":
                assert ext >= ref - 1e-6
            else:
                assert ext <= ref + 1e-6
