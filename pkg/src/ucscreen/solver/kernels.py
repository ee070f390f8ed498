"""Bounded-variable revised simplex iterations.

Two implementations of one algorithm: ``core_numba`` is written as explicit
loops for ``numba.njit``; ``core_numpy`` is the vectorized fallback. Both
solve

    min c x  s.t.  A x = b,  lo <= x <= hi

starting from a primal-feasible basis, and update ``x``, ``basis`` and
``state`` in place. Pricing is Dantzig's rule; after ``DEGEN_SWITCH``
consecutive degenerate pivots it falls back to Bland's rule until the next
nondegenerate step.

State codes per variable: 0 basic, 1 at lower bound, 2 at upper bound,
3 free nonbasic held at zero.
"""

from __future__ import annotations

import numpy as np

from .._accel import njit

BASIC, AT_LOWER, AT_UPPER, FREE = 0, 1, 2, 3
OPTIMAL, UNBOUNDED, ITER_LIMIT = 0, 1, 3

REFACTOR_EVERY = 64
DEGEN_SWITCH = 30
DEGEN_STEP = 1e-12
TIE_TOL = 1e-11


@njit(cache=True)
def core_numba(c, A, b, lo, hi, x, basis, state, max_iter, tol_opt, piv_tol):
    m, n = A.shape
    Binv = np.zeros((m, m))
    y = np.zeros(m)
    alpha = np.zeros(m)
    it = 0
    since = REFACTOR_EVERY
    bland = False
    degen = 0
    status = ITER_LIMIT
    while True:
        if since >= REFACTOR_EVERY:
            B = np.empty((m, m))
            for i in range(m):
                col = basis[i]
                for k in range(m):
                    B[k, i] = A[k, col]
            Binv = np.linalg.inv(B)
            r = b.copy()
            for j in range(n):
                if state[j] != BASIC:
                    xj = x[j]
                    if xj != 0.0:
                        for k in range(m):
                            r[k] -= A[k, j] * xj
            for i in range(m):
                s = 0.0
                for k in range(m):
                    s += Binv[i, k] * r[k]
                x[basis[i]] = s
            since = 0

        for k in range(m):
            s = 0.0
            for i in range(m):
                s += c[basis[i]] * Binv[i, k]
            y[k] = s

        enter = -1
        edir = 0
        best = 0.0
        for j in range(n):
            st = state[j]
            if st == BASIC or lo[j] == hi[j]:
                continue
            dj = c[j]
            for k in range(m):
                dj -= y[k] * A[k, j]
            dr = 0
            score = 0.0
            if dj < -tol_opt and (st == AT_LOWER or st == FREE):
                dr = 1
                score = -dj
            elif dj > tol_opt and (st == AT_UPPER or st == FREE):
                dr = -1
                score = dj
            if dr != 0:
                if bland:
                    enter = j
                    edir = dr
                    break
                if score > best:
                    best = score
                    enter = j
                    edir = dr

        if enter < 0:
            if since > 0:
                since = REFACTOR_EVERY
                continue
            status = OPTIMAL
            break
        if it >= max_iter:
            status = ITER_LIMIT
            break
        it += 1

        for i in range(m):
            s = 0.0
            for k in range(m):
                s += Binv[i, k] * A[k, enter]
            alpha[i] = s

        tmax = np.inf
        leave = -1
        to_upper = False
        for i in range(m):
            rate = -edir * alpha[i]
            bi = basis[i]
            if rate < -piv_tol:
                if lo[bi] == -np.inf:
                    continue
                t = (x[bi] - lo[bi]) / (-rate)
                up = False
            elif rate > piv_tol:
                if hi[bi] == np.inf:
                    continue
                t = (hi[bi] - x[bi]) / rate
                up = True
            else:
                continue
            if t < 0.0:
                t = 0.0
            take = False
            if leave < 0 or t < tmax - TIE_TOL:
                take = True
            elif t <= tmax + TIE_TOL:
                if bland:
                    take = bi < basis[leave]
                else:
                    take = abs(alpha[i]) > abs(alpha[leave])
            if take:
                if t < tmax:
                    tmax = t
                leave = i
                to_upper = up

        span = hi[enter] - lo[enter]
        if span < np.inf and span <= tmax:
            # bound flip, basis unchanged
            t = span
            for i in range(m):
                x[basis[i]] -= edir * t * alpha[i]
            if edir > 0:
                x[enter] = hi[enter]
                state[enter] = AT_UPPER
            else:
                x[enter] = lo[enter]
                state[enter] = AT_LOWER
        elif leave < 0:
            status = UNBOUNDED
            break
        else:
            t = tmax
            for i in range(m):
                x[basis[i]] -= edir * t * alpha[i]
            x[enter] += edir * t
            k_out = basis[leave]
            if to_upper:
                x[k_out] = hi[k_out]
                state[k_out] = AT_UPPER
            else:
                x[k_out] = lo[k_out]
                state[k_out] = AT_LOWER
            basis[leave] = enter
            state[enter] = BASIC
            piv = alpha[leave]
            for k in range(m):
                Binv[leave, k] /= piv
            for i in range(m):
                if i != leave:
                    f = alpha[i]
                    if f != 0.0:
                        for k in range(m):
                            Binv[i, k] -= f * Binv[leave, k]
            since += 1

        if t <= DEGEN_STEP:
            degen += 1
            if degen > DEGEN_SWITCH:
                bland = True
        else:
            degen = 0
            bland = False

    return status, it, y


def core_numpy(c, A, b, lo, hi, x, basis, state, max_iter, tol_opt, piv_tol):
    m, n = A.shape
    Binv = np.zeros((m, m))
    y = np.zeros(m)
    it = 0
    since = REFACTOR_EVERY
    bland = False
    degen = 0
    fixed = lo == hi
    while True:
        if since >= REFACTOR_EVERY:
            Binv = np.linalg.inv(A[:, basis])
            nb = state != BASIC
            r = b - A[:, nb] @ x[nb]
            x[basis] = Binv @ r
            since = 0

        y = c[basis] @ Binv
        d = c - y @ A
        nonbasic = (state != BASIC) & ~fixed
        inc = nonbasic & (d < -tol_opt) & ((state == AT_LOWER) | (state == FREE))
        dec = nonbasic & (d > tol_opt) & ((state == AT_UPPER) | (state == FREE)) & ~inc
        score = np.where(inc, -d, np.where(dec, d, 0.0))
        if not score.any():
            if since > 0:
                since = REFACTOR_EVERY
                continue
            return OPTIMAL, it, y
        if it >= max_iter:
            return ITER_LIMIT, it, y
        it += 1
        enter = int(np.flatnonzero(score > 0.0)[0]) if bland else int(np.argmax(score))
        edir = 1 if inc[enter] else -1

        alpha = Binv @ A[:, enter]
        rate = -edir * alpha
        xb = x[basis]
        lob, hib = lo[basis], hi[basis]
        ratios = np.full(m, np.inf)
        down = (rate < -piv_tol) & np.isfinite(lob)
        up = (rate > piv_tol) & np.isfinite(hib)
        ratios[down] = (xb[down] - lob[down]) / (-rate[down])
        ratios[up] = (hib[up] - xb[up]) / rate[up]
        ratios = np.maximum(ratios, 0.0)
        tmax = ratios.min() if m else np.inf

        span = hi[enter] - lo[enter]
        if np.isfinite(span) and span <= tmax:
            x[basis] -= edir * span * alpha
            if edir > 0:
                x[enter] = hi[enter]
                state[enter] = AT_UPPER
            else:
                x[enter] = lo[enter]
                state[enter] = AT_LOWER
            t = span
        elif not np.isfinite(tmax):
            return UNBOUNDED, it, y
        else:
            ties = np.flatnonzero(ratios <= tmax + TIE_TOL)
            if bland:
                leave = int(ties[np.argmin(basis[ties])])
            else:
                leave = int(ties[np.argmax(np.abs(alpha[ties]))])
            t = tmax
            x[basis] -= edir * t * alpha
            x[enter] += edir * t
            k_out = basis[leave]
            if up[leave]:
                x[k_out] = hi[k_out]
                state[k_out] = AT_UPPER
            else:
                x[k_out] = lo[k_out]
                state[k_out] = AT_LOWER
            basis[leave] = enter
            state[enter] = BASIC
            Binv[leave] /= alpha[leave]
            col = alpha.copy()
            col[leave] = 0.0
            Binv -= np.outer(col, Binv[leave])
            since += 1

        if t <= DEGEN_STEP:
            degen += 1
            if degen > DEGEN_SWITCH:
                bland = True
        else:
            degen = 0
            bland = False
