from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from oracles import FIVE_TRAIN_C, FIVE_TRAIN_D, FIVE_TRAIN_INTERCEPT, FIVE_TRAIN_LOSS, FIVE_TRAIN_SLOPE

from ucscreen.costbound import (CostBoundModel, Segment, choose_elbow, find_breakpoints,
                                fit_cost_bound, fit_quantile_pwl, pinball_loss, quantile_loss_curve)
from ucscreen.errors import OutOfFittedRange, TooFewPoints


def test_five_node_single_segment():
    cb = fit_cost_bound(FIVE_TRAIN_D, FIVE_TRAIN_C, n_segments=1)
    seg = cb.segments[0]
    assert seg.slope == pytest.approx(FIVE_TRAIN_SLOPE, rel=1e-9)
    assert seg.intercept == pytest.approx(FIVE_TRAIN_INTERCEPT, rel=1e-9)
    assert cb(71.8) == pytest.approx(872.0, abs=0.5)
    assert cb(55.0) == pytest.approx(275.0, abs=1e-6)
    assert pinball_loss(cb, FIVE_TRAIN_D, FIVE_TRAIN_C) == pytest.approx(FIVE_TRAIN_LOSS, rel=1e-9)


def test_envelope_property_five_node():
    cb = fit_cost_bound(FIVE_TRAIN_D, FIVE_TRAIN_C, n_segments=1)
    for d, c in zip(FIVE_TRAIN_D, FIVE_TRAIN_C):
        assert cb(d) - c >= -1e-9


def _kinked(rng, n=200, kink=50.0):
    D = rng.uniform(30.0, 70.0, n)
    C = np.where(D < kink, 10.0 * D, 10.0 * kink + 40.0 * (D - kink))
    return D, C


def test_kink_recovered(rng):
    D, C = _kinked(rng)
    bp = find_breakpoints(D, C, 2)
    spacing = np.max(np.diff(np.sort(D)))
    assert abs(bp[1] - 50.0) <= spacing


def test_two_segment_envelope(rng):
    D, C = _kinked(rng)
    C = C + rng.uniform(0.0, 20.0, D.size)
    cb = fit_cost_bound(D, C, n_segments=2)
    assert len(cb) == 2
    assert all(cb(d) >= c - 1e-9 for d, c in zip(D, C))


def test_loss_curve_monotone_and_elbow(rng):
    D, C = _kinked(rng)
    losses = quantile_loss_curve(D, C, 5)
    assert np.all(np.diff(losses) <= 1e-9)
    assert losses[1] <= 1e-6 * losses[0]
    assert choose_elbow(losses) == 2


def test_elbow_edge_cases():
    assert choose_elbow([5.0]) == 1
    assert choose_elbow([3.0, 3.0, 3.0]) == 1
    assert choose_elbow([10.0, 2.0, 1.5, 1.2]) == 2


def test_breakpoint_membership_and_range():
    cb = CostBoundModel((Segment(0.0, 10.0, 0.0, 1.0), Segment(10.0, 20.0, 100.0, 0.0)))
    assert cb.segment_index(10.0) == 0
    assert cb(10.0) == pytest.approx(10.0)
    assert cb(10.5) == pytest.approx(100.0)
    with pytest.raises(OutOfFittedRange):
        cb(25.0)
    assert cb.extended(25.0) == pytest.approx(100.0)
    assert cb.extended(-5.0) == pytest.approx(-5.0)
    assert cb.widened(10.0)(25.0) == pytest.approx(100.0)


def test_too_few_points():
    with pytest.raises(TooFewPoints):
        fit_cost_bound([1.0], [2.0], n_segments=1)
    with pytest.raises(TooFewPoints):
        find_breakpoints([1.0, 2.0, 3.0], [1.0, 2.0, 3.0], 2)


def test_round_trip(tmp_path):
    cb = fit_cost_bound(FIVE_TRAIN_D, FIVE_TRAIN_C, n_segments=1)
    cb.save(tmp_path / "cb.json")
    assert CostBoundModel.load(tmp_path / "cb.json") == cb


def test_points_on_breakpoint_are_covered_by_both_sides():
    D = np.array([0.0, 1.0, 2.0, 3.0, 4.0])
    C = np.array([0.0, 1.0, 5.0, 1.0, 0.0])
    cb = fit_quantile_pwl(D, C, [0.0, 2.0, 4.0])
    assert cb.segments[0](2.0) >= 5.0 - 1e-9 and cb.segments[1](2.0) >= 5.0 - 1e-9


@settings(max_examples=40, deadline=None)
@given(st.lists(st.tuples(st.floats(0, 100), st.floats(0, 1000)), min_size=6, max_size=40),
       st.integers(1, 3))
def test_envelope_holds_for_any_data(points, n):
    D = np.array([p[0] for p in points])
    C = np.array([p[1] for p in points])
    if np.unique(D).size < 2 * n:
        return
    try:
        cb = fit_cost_bound(D, C, n_segments=n)
    except TooFewPoints:
        return
    assert all(cb(d) - c >= -1e-9 * max(1.0, abs(c)) for d, c in zip(D, C))
