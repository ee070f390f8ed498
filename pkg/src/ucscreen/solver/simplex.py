"""Two-phase driver around the simplex kernels."""

from __future__ import annotations

import logging
import math
import warnings

import numpy as np

from .._accel import HAVE_NUMBA, default_backend
from ..errors import NumericalBreakdown
from . import kernels
from .model import EQ, GE, LE, LinearProgram, SolveOutcome, Status

logger = logging.getLogger(__name__)

TOL_FEAS = 1e-7
TOL_OPT = 1e-7
PIVOT_TOL = 1e-9


def _core(backend: str | None):
    backend = backend or default_backend()
    if backend == "numba":
        if not HAVE_NUMBA:
            warnings.warn("numba unavailable, using numpy simplex", RuntimeWarning)
            return kernels.core_numpy
        return kernels.core_numba
    if backend == "numpy":
        return kernels.core_numpy
    raise ValueError(f"unknown backend {backend!r}")


def solve_lp(lp: LinearProgram, backend: str | None = None, tol_feas: float = TOL_FEAS,
             tol_opt: float = TOL_OPT, max_iter: int | None = None) -> SolveOutcome:
    """Solve a continuous LP.

    Returns an outcome whose status is optimal, infeasible or unbounded.
    Duals are the row multipliers ``y`` with ``c - A^T y`` equal to the
    reduced costs, in the model's own objective sense.
    """
    if lp.is_mip:
        raise ValueError("model has binary variables; use solve_milp")
    c, A, senses, rhs, lb, ub, _ = lp.dense()
    return solve_dense(c, A, senses, rhs, lb, ub, maximize=lp.maximize, backend=backend,
                       tol_feas=tol_feas, tol_opt=tol_opt, max_iter=max_iter)


def solve_dense(c, A, senses, rhs, lb, ub, maximize=False, backend=None,
                tol_feas=TOL_FEAS, tol_opt=TOL_OPT, max_iter=None) -> SolveOutcome:
    core = _core(backend)
    m, n = A.shape
    sign = -1.0 if maximize else 1.0
    cmin = sign * np.asarray(c, dtype=float)
    lb = np.asarray(lb, dtype=float)
    ub = np.asarray(ub, dtype=float)
    if np.any(lb > ub):
        return SolveOutcome(Status.INFEASIBLE)

    if m == 0:
        return _solve_box(cmin, lb, ub, sign)

    le = senses == LE
    ge = senses == GE
    ineq = np.flatnonzero(le | ge)
    ns = ineq.size
    # A x + S s = b with slack columns; then one artificial per row
    ntot = n + ns + m
    Af = np.zeros((m, ntot))
    Af[:, :n] = A
    Af[ineq, n + np.arange(ns)] = np.where(le[ineq], 1.0, -1.0)
    lo = np.concatenate([lb, np.zeros(ns), np.zeros(m)])
    hi = np.concatenate([ub, np.full(ns, np.inf), np.full(m, np.inf)])
    b = np.asarray(rhs, dtype=float).copy()

    x = np.zeros(ntot)
    state = np.empty(ntot, dtype=np.int64)
    nz = n + ns
    fin_lo = np.isfinite(lo[:nz])
    fin_hi = np.isfinite(hi[:nz])
    x[:nz] = np.where(fin_lo, lo[:nz], np.where(fin_hi, hi[:nz], 0.0))
    state[:nz] = np.where(fin_lo, kernels.AT_LOWER, np.where(fin_hi, kernels.AT_UPPER, kernels.FREE))
    resid = b - Af[:, :nz] @ x[:nz]
    art_sign = np.where(resid >= 0.0, 1.0, -1.0)
    art = nz + np.arange(m)
    Af[np.arange(m), art] = art_sign
    x[art] = np.abs(resid)
    state[art] = kernels.BASIC
    basis = art.astype(np.int64).copy()

    if max_iter is None:
        max_iter = 50 * (m + ntot) + 1000
    scale = max(1.0, float(np.abs(b).max(initial=0.0)))

    c1 = np.zeros(ntot)
    c1[art] = 1.0
    st1, it1, _ = _run(core, c1, Af, b, lo, hi, x, basis, state, max_iter, tol_opt)
    if st1 != kernels.OPTIMAL:
        raise NumericalBreakdown(f"phase 1 ended with kernel status {st1} after {it1} pivots")
    infeas = float(x[art].sum())
    if infeas > tol_feas * scale:
        return SolveOutcome(Status.INFEASIBLE, iterations=it1)

    hi[art] = 0.0
    nonbasic_art = art[state[art] != kernels.BASIC]
    x[nonbasic_art] = 0.0
    state[nonbasic_art] = kernels.AT_LOWER
    c2 = np.zeros(ntot)
    c2[:n] = cmin
    st2, it2, y = _run(core, c2, Af, b, lo, hi, x, basis, state, max_iter, tol_opt)
    iters = it1 + it2
    if st2 == kernels.UNBOUNDED:
        return SolveOutcome(Status.UNBOUNDED, iterations=iters)
    if st2 != kernels.OPTIMAL:
        raise NumericalBreakdown(f"phase 2 hit the pivot budget ({iters} pivots)")

    xs = np.clip(x[:n], lb, ub)
    viol = _violation(A, senses, rhs, xs)
    if viol > 1e-6 * scale:
        raise NumericalBreakdown(f"solution violates constraints by {viol:.3g}")
    obj = float(np.dot(c, xs))
    return SolveOutcome(Status.OPTIMAL, objective=obj, x=xs, duals=sign * y,
                        iterations=iters, bound=obj)


def _run(core, c, A, b, lo, hi, x, basis, state, max_iter, tol_opt):
    try:
        return core(c, A, b, lo, hi, x, basis, state, int(max_iter), float(tol_opt), PIVOT_TOL)
    except (np.linalg.LinAlgError, ZeroDivisionError) as exc:
        raise NumericalBreakdown(f"singular basis: {exc}") from exc


def _violation(A, senses, rhs, x) -> float:
    act = A @ x
    d = act - rhs
    v = np.where(senses == LE, np.maximum(d, 0.0),
                 np.where(senses == GE, np.maximum(-d, 0.0), np.abs(d)))
    return float(v.max(initial=0.0))


def _solve_box(cmin, lb, ub, sign) -> SolveOutcome:
    x = np.empty_like(cmin)
    for j, cj in enumerate(cmin):
        if cj > 0:
            x[j] = lb[j]
        elif cj < 0:
            x[j] = ub[j]
        else:
            x[j] = lb[j] if math.isfinite(lb[j]) else (ub[j] if math.isfinite(ub[j]) else 0.0)
        if not math.isfinite(x[j]):
            return SolveOutcome(Status.UNBOUNDED)
    obj = float(sign * np.dot(cmin, x))
    return SolveOutcome(Status.OPTIMAL, objective=obj, x=x, duals=np.zeros(0), bound=obj)


__all__ = ["solve_lp", "solve_dense", "TOL_FEAS", "TOL_OPT", "EQ", "GE", "LE"]
