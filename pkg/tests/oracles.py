"""Independent reference computations used by the tests.

Nothing here calls the package's solver: enumeration is brute force and
continuous subproblems go to scipy's HiGHS.
"""

from __future__ import annotations

import itertools

import numpy as np
from scipy.optimize import linprog

from ucscreen.solver import EQ, GE, LE, LinearProgram

# Hand-derived reference values for the bundled systems.
FIVE_NODE_COSTS = {"t1": 275.0, "t2": 575.0, "t3": 772.5, "t4": 611.0}
FIVE_NODE_RETAINED = {"bn": 7, "ub": 6, "cc": 5, "ubcc": 3}
FIVE_NODE_PER_LINE = {
    "bn": {"l1": 2, "l2": 1, "l3": 1, "l4": 2, "l5": 1},
    "ubcc": {"l1": 1, "l2": 0, "l3": 0, "l4": 2, "l5": 0},
}
# expected retained sides, keyed by line
FIVE_NODE_SIDES = {
    "bn": {"l1": {"lower", "upper"}, "l2": {"upper"}, "l3": {"upper"}, "l4": {"lower", "upper"},
           "l5": {"lower"}},
    "ubcc": {"l1": {"upper"}, "l4": {"lower", "upper"}},
}
# loop flow on the ring with unit susceptances: l1 carries 0.6 of an n3 injection
# withdrawn at the slack, against its orientation
PTDF_L1_N3 = -0.6
T4_INJECTION = np.array([16.8, 0.0, 55.0, -58.0, -13.8])
T4_FLOW_L1 = 7.04
T3_INJECTION = np.array([28.5, 0.0, 40.5, 0.0, -69.0])
# five-node training points (D, cost) and the one-segment upper-envelope fit
FIVE_TRAIN_D = np.array([55.0, 75.0, 69.0])
FIVE_TRAIN_C = np.array([275.0, 575.0, 772.5])
FIVE_TRAIN_SLOPE = 497.5 / 14.0
FIVE_TRAIN_INTERCEPT = 275.0 - 55.0 * 497.5 / 14.0
FIVE_TRAIN_LOSS = (FIVE_TRAIN_INTERCEPT + FIVE_TRAIN_SLOPE * 75.0) - 575.0
# two-node example: max p1 s.t. 50 p1 + 10 p2 <= 2000, p1 + p2 = d2, d2 in [80, 120]
TWO_NODE_UB_EXTREME = (2000.0 - 10.0 * 80.0) / 40.0


def random_bounded_lp(rng: np.random.Generator, m: int, n: int):
    """Feasible LP with finite variable bounds (so never unbounded)."""
    A = rng.normal(size=(m, n))
    A[rng.random((m, n)) < 0.3] = 0.0
    lb = rng.uniform(-2.0, 0.0, n)
    ub = lb + rng.uniform(0.5, 4.0, n)
    x0 = rng.uniform(lb, ub)
    kinds = rng.choice([LE, GE, EQ], size=m, p=[0.45, 0.45, 0.1])
    act = A @ x0
    rhs = np.where(kinds == LE, act + rng.uniform(0, 1, m),
                   np.where(kinds == GE, act - rng.uniform(0, 1, m), act))
    c = rng.normal(size=n)
    return c, A, kinds, rhs, lb, ub


def scipy_lp(c, A, senses, rhs, lb, ub):
    """(status, objective) from HiGHS for a min problem."""
    le, ge, eq = senses == LE, senses == GE, senses == EQ
    A_ub = np.vstack([A[le], -A[ge]])
    b_ub = np.concatenate([rhs[le], -rhs[ge]])
    res = linprog(c, A_ub=A_ub if A_ub.size else None, b_ub=b_ub if A_ub.size else None,
                  A_eq=A[eq] if eq.any() else None, b_eq=rhs[eq] if eq.any() else None,
                  bounds=list(zip(lb, ub)), method="highs")
    return res.status, (res.fun if res.status == 0 else None)


def random_milp(rng: np.random.Generator, n_bin: int, n_cont: int, m: int) -> LinearProgram:
    """Mixed-binary minimization that is feasible at a random binary point."""
    lp = LinearProgram(sense="min" if rng.random() < 0.5 else "max", name="random_milp")
    b = lp.add_vars("b", n_bin, lb=0.0, ub=1.0, obj=rng.normal(size=n_bin), binary=True)
    x = lp.add_vars("x", n_cont, lb=0.0, ub=rng.uniform(1.0, 5.0, n_cont), obj=rng.normal(size=n_cont)) \
        if n_cont else np.array([], dtype=np.int64)
    cols = np.concatenate([b, x])
    b0 = (rng.random(n_bin) < 0.5).astype(float)
    x0 = rng.uniform(0.0, 1.0, n_cont)
    z0 = np.concatenate([b0, x0])
    for _ in range(m):
        a = rng.normal(size=cols.size)
        a[rng.random(cols.size) < 0.3] = 0.0
        if rng.random() < 0.5:
            lp.add_constraint(cols, a, LE, float(a @ z0 + rng.uniform(0.0, 1.5)))
        else:
            lp.add_constraint(cols, a, GE, float(a @ z0 - rng.uniform(0.0, 1.5)))
    return lp


def enumerate_milp(lp: LinearProgram) -> float | None:
    """Optimum by trying every binary assignment; ``None`` if infeasible."""
    c, A, senses, rhs, lb, ub, binary = lp.dense()
    bins = np.flatnonzero(binary)
    cont = np.flatnonzero(~binary)
    sign = -1.0 if lp.maximize else 1.0
    best = None
    if cont.size == 0:
        Z = np.array(list(itertools.product((0.0, 1.0), repeat=bins.size)))
        X = np.zeros((Z.shape[0], c.size))
        X[:, bins] = Z
        act = X @ A.T
        tol = 1e-9
        ok = np.ones(Z.shape[0], bool)
        ok &= np.all(np.where(senses == LE, act <= rhs + tol, True), axis=1)
        ok &= np.all(np.where(senses == GE, act >= rhs - tol, True), axis=1)
        ok &= np.all(np.where(senses == EQ, np.abs(act - rhs) <= tol, True), axis=1)
        if not ok.any():
            return None
        vals = sign * (X[ok] @ c)
        return float(sign * vals.min())
    for z in itertools.product((0.0, 1.0), repeat=bins.size):
        z = np.array(z)
        shift = A[:, bins] @ z if bins.size else np.zeros(A.shape[0])
        status, val = scipy_lp(sign * c[cont], A[:, cont], senses, rhs - shift, lb[cont], ub[cont])
        if status != 0:
            continue
        tot = sign * float(c[bins] @ z) + val
        if best is None or tot < best:
            best = tot
    return None if best is None else sign * best


def enumerate_uc(grid, ptdf, d):
    """Cheapest commitment by trying all 2^G on/off patterns with a HiGHS dispatch LP."""
    G = grid.n_generators
    sens = ptdf.values[:, grid.gen_bus]
    shift = ptdf.values @ d
    A = np.vstack([np.ones(G), sens, sens])
    senses = np.array([EQ] + [LE] * grid.n_lines + [GE] * grid.n_lines)
    rhs = np.concatenate([[d.sum()], grid.capacities + shift, -grid.capacities + shift])
    best = None
    for u in itertools.product((0.0, 1.0), repeat=G):
        u = np.array(u)
        status, val = scipy_lp(grid.costs, A, senses, rhs, u * grid.p_min, u * grid.p_max)
        if status == 0 and (best is None or val < best[0]):
            best = (val, u)
    return best


def max_flow_over_commitments(grid, ptdf, d, line: int, side: str):
    """Extreme flow on ``line`` over every integer commitment, other limits enforced."""
    G = grid.n_generators
    sens = ptdf.values[:, grid.gen_bus]
    shift = ptdf.values @ d
    others = [k for k in range(grid.n_lines) if k != line]
    A = np.vstack([np.ones(G), sens[others], sens[others]])
    senses = np.array([EQ] + [LE] * len(others) + [GE] * len(others))
    rhs = np.concatenate([[d.sum()], grid.capacities[others] + shift[others],
                          -grid.capacities[others] + shift[others]])
    sgn = -1.0 if side == "upper" else 1.0
    best = None
    for u in itertools.product((0.0, 1.0), repeat=G):
        u = np.array(u)
        status, val = scipy_lp(sgn * sens[line], A, senses, rhs, u * grid.p_min, u * grid.p_max)
        if status == 0:
            flow = sgn * val - shift[line]
            if best is None or (flow > best if side == "upper" else flow < best):
                best = flow
    return best
