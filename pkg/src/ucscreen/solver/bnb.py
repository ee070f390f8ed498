"""Best-bound branch-and-bound over binary variables."""

from __future__ import annotations

import heapq
import itertools
import math

import numpy as np

from ..errors import NodeBudgetExceeded
from .model import LinearProgram, SolveOutcome, Status
from .simplex import TOL_FEAS, TOL_OPT, solve_dense, solve_lp

INT_TOL = 1e-6


def solve_milp(lp: LinearProgram, gap: float = 1e-6, backend: str | None = None,
               node_limit: int = 100_000, depth_limit: int | None = None,
               tol_feas: float = TOL_FEAS, tol_opt: float = TOL_OPT) -> SolveOutcome:
    """Solve a mixed-binary program to relative gap ``gap``.

    Node selection is best-bound (ties by creation order), branching picks the
    most fractional binary (ties by lowest index). Each node is an LP solved
    from scratch. Raises :class:`NodeBudgetExceeded` when ``node_limit`` LPs
    or ``depth_limit`` levels are exceeded without closing the gap.
    """
    c, A, senses, rhs, lb, ub, binary = lp.dense()
    sign = -1.0 if lp.maximize else 1.0
    bins = np.flatnonzero(binary)

    def relax(lo, hi):
        return solve_dense(c, A, senses, rhs, lo, hi, maximize=lp.maximize, backend=backend,
                           tol_feas=tol_feas, tol_opt=tol_opt)

    if bins.size == 0:
        return relax(lb, ub)

    counter = itertools.count()
    nodes = 0
    best_obj = math.inf  # in minimization sense
    best_x = None
    heap: list = []

    def evaluate(lo, hi, depth):
        nonlocal nodes, best_obj, best_x
        nodes += 1
        if nodes > node_limit:
            raise NodeBudgetExceeded(f"node limit {node_limit} reached")
        out = relax(lo, hi)
        if out.status is Status.UNBOUNDED:
            return out
        if out.status is not Status.OPTIMAL:
            return None
        val = sign * out.objective
        if val >= best_obj - _gap_abs(best_obj, gap):
            return None
        xb = out.x[bins]
        frac = np.abs(xb - np.round(xb))
        if frac.max() <= INT_TOL:
            best_obj, best_x = val, out.x.copy()
            return None
        k = int(np.argmax(frac))
        heapq.heappush(heap, (val, next(counter), depth, int(bins[k]), lo, hi))
        return None

    root = evaluate(lb.copy(), ub.copy(), 0)
    if root is not None:
        return SolveOutcome(Status.UNBOUNDED, nodes=nodes)

    bound = -math.inf
    while heap:
        val, _, depth, var, lo, hi = heapq.heappop(heap)
        bound = val
        if val >= best_obj - _gap_abs(best_obj, gap):
            break
        if depth_limit is not None and depth + 1 > depth_limit:
            raise NodeBudgetExceeded(f"depth limit {depth_limit} reached")
        for v in (0.0, 1.0):
            clo, chi = lo.copy(), hi.copy()
            clo[var] = chi[var] = v
            if evaluate(clo, chi, depth + 1) is not None:
                return SolveOutcome(Status.UNBOUNDED, nodes=nodes)
    else:
        bound = best_obj

    if best_x is None:
        return SolveOutcome(Status.INFEASIBLE, nodes=nodes)

    # polish: re-solve with the binaries pinned to their rounded values
    lo, hi = lb.copy(), ub.copy()
    lo[bins] = hi[bins] = np.round(best_x[bins])
    final = relax(lo, hi)
    if final.status is Status.OPTIMAL and sign * final.objective <= best_obj + _gap_abs(best_obj, gap):
        x, obj = final.x, final.objective
    else:
        x, obj = best_x, sign * best_obj
        x[bins] = np.round(x[bins])
    return SolveOutcome(Status.OPTIMAL, objective=obj, x=x, nodes=nodes,
                        iterations=final.iterations, bound=sign * min(bound, best_obj))


def _gap_abs(incumbent: float, gap: float) -> float:
    if not math.isfinite(incumbent):
        return 0.0
    return gap * max(1.0, abs(incumbent))


def solve(lp: LinearProgram, **kwargs) -> SolveOutcome:
    """Dispatch to :func:`solve_milp` or the plain LP path."""
    if lp.is_mip:
        return solve_milp(lp, **kwargs)
    kwargs.pop("gap", None)
    kwargs.pop("node_limit", None)
    kwargs.pop("depth_limit", None)
    return solve_lp(lp, **kwargs)
