from __future__ import annotations

import numpy as np
import pytest
from oracles import enumerate_milp, random_bounded_lp, random_milp, scipy_lp

from ucscreen.errors import NodeBudgetExceeded
from ucscreen.solver import EQ, GE, LE, LinearProgram, Status, solve, solve_lp, solve_milp
from ucscreen.solver.simplex import solve_dense


def test_two_node_relaxed_lp(backend):
    # max p1 with only the unit limit left: reaches 100
    lp = LinearProgram(sense="max")
    p1 = lp.add_var("p1", 0.0, 100.0, obj=1.0)
    p2 = lp.add_var("p2", 0.0, 100.0)
    d2 = lp.add_var("d2", 80.0, 120.0)
    lp.add_constraint([p1, p2, d2], [1, 1, -1], EQ, 0.0)
    out = solve_lp(lp, backend=backend)
    assert out.status is Status.OPTIMAL
    assert out.objective == pytest.approx(100.0, abs=1e-9)


def test_textbook_lp(backend):
    # max 3x + 5y, x <= 4, 2y <= 12, 3x + 2y <= 18 -> 36 at (2, 6)
    lp = LinearProgram(sense="max")
    x = lp.add_var("x", obj=3.0)
    y = lp.add_var("y", obj=5.0)
    lp.add_constraint([x], [1.0], LE, 4.0)
    lp.add_constraint([y], [2.0], LE, 12.0)
    lp.add_constraint([x, y], [3.0, 2.0], LE, 18.0)
    out = solve_lp(lp, backend=backend)
    assert out.objective == pytest.approx(36.0)
    assert np.allclose(out.x, [2.0, 6.0])


def test_infeasible_and_unbounded(backend):
    lp = LinearProgram()
    x = lp.add_var("x", 0.0, 1.0)
    lp.add_constraint([x], [1.0], GE, 2.0)
    assert solve_lp(lp, backend=backend).status is Status.INFEASIBLE
    lp = LinearProgram(sense="max")
    x = lp.add_var("x", obj=1.0)
    y = lp.add_var("y")
    lp.add_constraint([x, y], [1.0, -1.0], LE, 1.0)
    assert solve_lp(lp, backend=backend).status is Status.UNBOUNDED


def test_free_variables_and_equalities(backend):
    lp = LinearProgram()
    x = lp.add_var("x", -np.inf, np.inf, obj=1.0)
    y = lp.add_var("y", -np.inf, np.inf, obj=2.0)
    lp.add_constraint([x, y], [1.0, 1.0], EQ, 3.0)
    lp.add_constraint([x], [1.0], LE, 10.0)
    out = solve_lp(lp, backend=backend)
    # objective is 6 - x on the line, so x runs to its limit
    assert out.objective == pytest.approx(-4.0)
    assert np.allclose(out.x, [10.0, -7.0])


def test_scipy_oracle_random_lps(backend):
    rng = np.random.default_rng(7)
    for _ in range(150):
        m, n = int(rng.integers(1, 12)), int(rng.integers(1, 15))
        c, A, senses, rhs, lb, ub = random_bounded_lp(rng, m, n)
        status, ref = scipy_lp(c, A, senses, rhs, lb, ub)
        out = solve_dense(c, A, senses, rhs, lb, ub, backend=backend)
        assert status == 0 and out.optimal
        assert out.objective == pytest.approx(ref, rel=1e-7, abs=1e-7)


def _viol(A, senses, rhs, x):
    act = A @ x
    v = np.where(senses == LE, act - rhs, np.where(senses == GE, rhs - act, np.abs(act - rhs)))
    return max(v.max(initial=0.0), 0.0)


def test_primal_feasibility_and_duality(backend):
    rng = np.random.default_rng(11)
    for _ in range(100):
        c, A, senses, rhs, lb, ub = random_bounded_lp(rng, int(rng.integers(2, 10)), int(rng.integers(2, 12)))
        out = solve_dense(c, A, senses, rhs, lb, ub, backend=backend)
        x, y = out.x, out.duals
        assert _viol(A, senses, rhs, x) <= 1e-7 * max(1.0, np.abs(rhs).max())
        assert np.all(x >= lb - 1e-9) and np.all(x <= ub + 1e-9)
        # minimization duals: <= rows nonpositive, >= rows nonnegative
        assert np.all(y[senses == LE] <= 1e-7) and np.all(y[senses == GE] >= -1e-7)
        slack = A @ x - rhs
        assert np.all(np.abs(y * slack) <= 1e-6)
        d = c - A.T @ y
        inner = (x > lb + 1e-7) & (x < ub - 1e-7)
        assert np.all(np.abs(d[inner]) <= 1e-6)
        assert np.all(d[np.isclose(x, lb, atol=1e-7) & ~inner] >= -1e-6)
        assert np.all(d[np.isclose(x, ub, atol=1e-7) & ~inner] <= 1e-6)
        # strong duality with bound terms
        assert c @ x == pytest.approx(y @ rhs + d @ x, abs=1e-6)


def test_backends_agree():
    rng = np.random.default_rng(3)
    for _ in range(50):
        prob = random_bounded_lp(rng, 8, 10)
        a = solve_dense(*prob, backend="numpy")
        b = solve_dense(*prob, backend="numba")
        assert a.objective == pytest.approx(b.objective, rel=1e-9, abs=1e-9)


def test_milp_matches_enumeration(backend):
    rng = np.random.default_rng(5)
    for k in range(40):
        lp = random_milp(rng, int(rng.integers(1, 9)), int(rng.integers(0, 3)), int(rng.integers(1, 6)))
        ref = enumerate_milp(lp)
        out = solve_milp(lp, backend=backend)
        assert ref is not None
        assert out.status is Status.OPTIMAL
        assert out.objective == pytest.approx(ref, rel=1e-6, abs=1e-6)
        assert np.allclose(out.x[lp.binary], np.round(out.x[lp.binary]))


def test_milp_infeasible():
    lp = LinearProgram()
    b = lp.add_vars("b", 2, lb=0, ub=1, binary=True)
    lp.add_constraint(b, [1.0, 1.0], EQ, 1.5)
    assert solve_milp(lp).status is Status.INFEASIBLE


def test_node_budget():
    rng = np.random.default_rng(1)
    lp = LinearProgram(sense="max")
    n = 14
    b = lp.add_vars("b", n, lb=0, ub=1, obj=rng.uniform(1, 2, n), binary=True)
    lp.add_constraint(b, rng.uniform(1, 2, n), LE, 7.3)
    with pytest.raises(NodeBudgetExceeded):
        solve_milp(lp, node_limit=3)


def test_solve_dispatch_and_lp_guard():
    lp = LinearProgram()
    lp.add_var("b", 0, 1, obj=1.0, binary=True)
    with pytest.raises(ValueError):
        solve_lp(lp)
    assert solve(lp).objective == pytest.approx(0.0)


def test_lp_text_dump():
    lp = LinearProgram(sense="max", name="demo")
    x = lp.add_var("x", 0, 4, obj=3.0)
    y = lp.add_var("y", obj=-1.0, binary=True, ub=1)
    lp.add_constraint([x, y], [1.0, 2.0], LE, 5.0, name="c1")
    text = lp.to_lp_text()
    assert "Maximize" in text and "c1: 1 x + 2 y <= 5" in text
    assert "Binaries" in text and text.rstrip().endswith("End")
