"""Bounded-variable two-phase revised simplex.

Solves   min c^T x   s.t.  A x (<=, =, >=) b,   lo <= x <= up

with dense algebra. Small by design: the bound certificates only ever
need LPs whose rows are the active cutting planes plus a handful of
equalities (row generation in bounds.py keeps them that way). Dantzig
pricing with a Bland fallback after a degenerate streak; all tie-breaks
are index-based, so runs are deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["LpResult", "solve_lp", "kkt_residual"]

_PIVOT_TINY = 1e-11
_OPT_TOL = 1e-9
_FEAS_TOL = 1e-7
_DEGEN_STREAK = 30

AT_LO, AT_UP, BASIC = 0, 1, 2


@dataclass
class LpResult:
    status: str            # optimal | infeasible | unbounded | stalled
    x: np.ndarray          # original variables
    obj: float
    y: np.ndarray          # row duals (senses as given)
    z: np.ndarray          # reduced costs of the original variables
    iterations: int


def solve_lp(c, lo, up, A, b, senses, max_iter: int | None = None) -> LpResult:
    """senses is a string per row: '<', '=' or '>'."""
    c = np.asarray(c, dtype=float)
    lo = np.asarray(lo, dtype=float)
    up = np.asarray(up, dtype=float)
    A = np.asarray(A, dtype=float).reshape(len(senses), -1) if len(senses) \
        else np.zeros((0, c.size))
    b = np.asarray(b, dtype=float)
    nvar = c.size
    m = len(senses)

    # normalize '>' to '<' and attach slacks
    A = A.copy()
    b = b.copy()
    flip = np.array([s == ">" for s in senses], dtype=bool)
    A[flip] *= -1.0
    b[flip] *= -1.0
    ineq = np.flatnonzero([s != "=" for s in senses])
    nslack = ineq.size
    ncols = nvar + nslack
    Aw = np.zeros((m, ncols + m))        # room for artificials
    Aw[:, :nvar] = A
    for s_pos, row in enumerate(ineq):
        Aw[row, nvar + s_pos] = 1.0
    low = np.concatenate([lo, np.zeros(nslack), np.zeros(m)])
    upp = np.concatenate([up, np.full(nslack, np.inf), np.full(m, np.inf)])

    # start: structurals at a finite bound, slacks at zero
    x = np.zeros(ncols + m)
    for j in range(ncols):
        if np.isfinite(low[j]):
            x[j] = low[j]
        elif np.isfinite(upp[j]):
            x[j] = upp[j]
    status = np.full(ncols + m, AT_LO, dtype=np.int8)
    status[:ncols][~np.isfinite(low[:ncols])] = AT_UP

    r = b - Aw[:, :ncols] @ x[:ncols]
    for i in range(m):
        Aw[i, ncols + i] = 1.0 if r[i] >= 0 else -1.0
        x[ncols + i] = abs(r[i])
    basis = list(range(ncols, ncols + m))
    status[ncols:] = BASIC

    if max_iter is None:
        max_iter = 200 + 50 * (m + ncols)

    # phase 1
    c1 = np.zeros(ncols + m)
    c1[ncols:] = 1.0
    st, iters1 = _iterate(c1, low, upp, Aw, b, basis, status, x, max_iter)
    if st != "optimal":
        return LpResult(st, x[:nvar], np.nan, np.zeros(m), np.zeros(nvar), iters1)
    if float(c1 @ x) > _FEAS_TOL:
        return LpResult("infeasible", x[:nvar], np.nan, np.zeros(m),
                        np.zeros(nvar), iters1)
    # pin artificials at zero and refresh the basic values once
    low[ncols:] = 0.0
    upp[ncols:] = 0.0
    x[ncols:] = np.where(status[ncols:] == BASIC, x[ncols:], 0.0)
    _refresh(Aw, b, basis, status, x)

    # phase 2
    c2 = np.concatenate([c, np.zeros(nslack + m)])
    st, iters2 = _iterate(c2, low, upp, Aw, b, basis, status, x, max_iter)
    if st != "optimal":
        return LpResult(st, x[:nvar], np.nan, np.zeros(m), np.zeros(nvar),
                        iters1 + iters2)
    if m:
        yw = np.linalg.solve(Aw[:, basis].T, c2[basis])
        z_full = c2 - Aw.T @ yw
        y = np.where(flip, -yw, yw)
    else:
        z_full = c2.copy()
        y = np.zeros(0)
    return LpResult("optimal", x[:nvar].copy(), float(c @ x[:nvar]),
                    y, z_full[:nvar], iters1 + iters2)


def _refresh(Aw, b, basis, status, x):
    m = len(basis)
    if m == 0:
        return
    nb_mask = status != BASIC
    rhs = b - Aw[:, nb_mask] @ x[nb_mask]
    xb = np.linalg.solve(Aw[:, basis], rhs)
    x[basis] = xb


def _iterate(c, low, upp, Aw, b, basis, status, x, max_iter):
    m = len(basis)
    if m == 0:
        # pure bound minimization
        for j in range(c.size):
            if low[j] == upp[j]:
                continue
            if c[j] > 0:
                if not np.isfinite(low[j]):
                    return "unbounded", 0
                x[j] = low[j]
            elif c[j] < 0:
                if not np.isfinite(upp[j]):
                    return "unbounded", 0
                x[j] = upp[j]
        return "optimal", 0
    bland = False
    streak = 0
    for it in range(1, max_iter + 1):
        if it % 64 == 0:
            _refresh(Aw, b, basis, status, x)
        B = Aw[:, basis]
        try:
            pi = np.linalg.solve(B.T, c[basis])
        except np.linalg.LinAlgError:
            return "stalled", it
        z = c - Aw.T @ pi
        free = (status != BASIC) & (low != upp)
        down = free & (status == AT_LO) & (z < -_OPT_TOL)
        upv = free & (status == AT_UP) & (z > _OPT_TOL)
        cand = np.flatnonzero(down | upv)
        if cand.size == 0:
            return "optimal", it - 1
        if bland:
            e = int(cand[0])
        else:
            e = int(cand[np.argmax(np.abs(z[cand]))])
        delta = 1.0 if status[e] == AT_LO else -1.0
        u = np.linalg.solve(B, Aw[:, e])
        t_best = upp[e] - low[e]          # bound flip distance (may be inf)
        leave_pos = -1
        piv = 0.0
        for pos in range(m):
            d = delta * u[pos]
            i = basis[pos]
            if d > _PIVOT_TINY:
                tt = (x[i] - low[i]) / d
            elif d < -_PIVOT_TINY:
                tt = (upp[i] - x[i]) / (-d)
            else:
                continue
            if tt < t_best - 1e-12 or (
                    tt < t_best + 1e-12 and leave_pos >= 0
                    and abs(u[pos]) > piv):
                t_best = tt
                leave_pos = pos
                piv = abs(u[pos])
        if not np.isfinite(t_best):
            return "unbounded", it
        t_best = max(t_best, 0.0)
        x[basis] -= delta * t_best * u
        x[e] += delta * t_best
        if leave_pos < 0:
            status[e] = AT_UP if status[e] == AT_LO else AT_LO
            x[e] = upp[e] if status[e] == AT_UP else low[e]
        else:
            out = basis[leave_pos]
            d = delta * u[leave_pos]
            if d > 0:
                status[out] = AT_LO
                x[out] = low[out]
            else:
                status[out] = AT_UP
                x[out] = upp[out]
            basis[leave_pos] = e
            status[e] = BASIC
        if t_best < 1e-10:
            streak += 1
            if streak > _DEGEN_STREAK:
                bland = True
        else:
            streak = 0
            bland = False
    return "stalled", max_iter


def kkt_residual(c, lo, up, A, b, senses, x, y, z) -> float:
    """Worst KKT violation of a candidate primal/dual pair.

    Checks row feasibility, bound feasibility, sign of the duals,
    complementary slackness of rows and of variable bounds, and
    stationarity c - A^T y = z.
    """
    c = np.asarray(c, dtype=float)
    x = np.asarray(x, dtype=float)
    worst = 0.0
    if len(senses):
        A = np.asarray(A, dtype=float).reshape(len(senses), -1)
        act = A @ x
        for i, s in enumerate(senses):
            if s == "=":
                worst = max(worst, abs(act[i] - b[i]))
            elif s == "<":
                worst = max(worst, act[i] - b[i])
                worst = max(worst, y[i])              # y_i <= 0
                worst = max(worst, abs(y[i] * (b[i] - act[i])))
            else:
                worst = max(worst, b[i] - act[i])
                worst = max(worst, -y[i])             # y_i >= 0
                worst = max(worst, abs(y[i] * (act[i] - b[i])))
        worst = max(worst, float(np.max(np.abs(c - A.T @ y - z))))
    else:
        worst = max(worst, float(np.max(np.abs(c - z))) if c.size else 0.0)
    lo = np.asarray(lo, dtype=float)
    up = np.asarray(up, dtype=float)
    worst = max(worst, float(np.max(np.maximum(lo - x, 0.0), initial=0.0)))
    worst = max(worst, float(np.max(np.maximum(x - up, 0.0), initial=0.0)))
    for j in range(x.size):
        if z[j] > 0:
            worst = max(worst, abs(z[j]) * abs(x[j] - lo[j]))
        elif z[j] < 0:
            worst = max(worst, abs(z[j]) * abs(up[j] - x[j]))
    return worst
