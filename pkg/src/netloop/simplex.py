"""Dense two-phase primal simplex with variable bounds.

Solves   min cᵀx   s.t.  A_eq x = b_eq,  A_ub x <= b_ub,  lower <= x <= upper

entirely in numpy.  Upper bounds are handled implicitly (nonbasic
variables may sit at either bound, and "bound flips" never touch the
basis), which keeps the tableau at one row per constraint — the relaxed
scheduling programs have hundreds of 0/1-bounded columns, and writing
their bounds as rows would triple the tableau.

Scope: every LP produced by this package has a bounded feasible region
(all structural variables live in boxes), so "unbounded" is reported only
defensively.  Determinism: entering/leaving selections break ties by
lowest index, and Bland's rule takes over after a run of degenerate
pivots, so identical inputs always take the identical pivot path.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import SolverError

_RC_TOL = 1e-9        # reduced-cost optimality tolerance
_PIV_TOL = 1e-9       # minimum acceptable pivot magnitude
_FEAS_TOL = 1e-7      # phase-1 residual treated as infeasibility
_DEGEN_RUN = 40       # degenerate pivots before switching to Bland's rule

_AT_LOWER = 0
_AT_UPPER = 1
_BASIC = 2

_STATUS_UNBOUNDED = -2


@dataclass
class LpResult:
    status: str                  # "optimal" | "infeasible" | "unbounded"
    x: np.ndarray | None = None  # full-length solution (original variable order)
    objective: float | None = None
    iterations: int = 0


def solve_lp(c, A_eq, b_eq, A_ub, b_ub, lower, upper) -> LpResult:
    c = np.asarray(c, dtype=float).reshape(-1)
    n = c.size
    lower = np.asarray(lower, dtype=float).reshape(-1)
    upper = np.asarray(upper, dtype=float).reshape(-1)
    A_eq = np.zeros((0, n)) if A_eq is None else np.asarray(A_eq, dtype=float).reshape(-1, n)
    b_eq = np.zeros(0) if b_eq is None else np.asarray(b_eq, dtype=float).reshape(-1)
    A_ub = np.zeros((0, n)) if A_ub is None else np.asarray(A_ub, dtype=float).reshape(-1, n)
    b_ub = np.zeros(0) if b_ub is None else np.asarray(b_ub, dtype=float).reshape(-1)

    if np.any(lower > upper + 1e-12):
        return LpResult(status="infeasible")

    # Shift x = lower + y so every bound is [0, width]; width-0 variables
    # are substituted out entirely.
    width = upper - lower
    free_idx = np.flatnonzero(width > 1e-12)

    beq = b_eq - A_eq @ lower
    bub = b_ub - A_ub @ lower

    res = _solve_shifted(c[free_idx], A_eq[:, free_idx], beq,
                         A_ub[:, free_idx], bub, width[free_idx])
    if res.status != "optimal":
        return res
    x = lower.astype(float).copy()
    x[free_idx] += res.x
    return LpResult(status="optimal", x=x, objective=float(c @ x),
                    iterations=res.iterations)


def _solve_shifted(c, A_eq, b_eq, A_ub, b_ub, ub) -> LpResult:
    """Core solver for 0 <= y <= ub (entries of ub may be +inf)."""
    n = c.size
    m_eq, m_ub = A_eq.shape[0], A_ub.shape[0]
    m = m_eq + m_ub

    if m == 0:
        if np.any((c < -_RC_TOL) & ~np.isfinite(ub)):
            return LpResult(status="unbounded")
        y = np.where(c < -_RC_TOL, np.where(np.isfinite(ub), ub, 0.0), 0.0)
        return LpResult(status="optimal", x=y, objective=float(c @ y))

    # Equality system [A_eq; A_ub | I_slack] z = b, slack bounds [0, inf).
    nc = n + m_ub
    A = np.zeros((m, nc))
    A[:m_eq, :n] = A_eq
    A[m_eq:, :n] = A_ub
    A[m_eq:, n:] = np.eye(m_ub)
    b = np.concatenate([b_eq, b_ub])
    ubz = np.concatenate([ub, np.full(m_ub, np.inf)])

    neg = b < 0
    A[neg] *= -1.0
    b = np.abs(b)

    # Phase 1.  Inequality rows that kept their sign start from their own
    # slack column; only equality rows and sign-flipped inequalities (whose
    # slack coefficient became -1) need artificial columns.  The relaxed
    # scheduling programs are almost entirely b>=0 inequalities, so this
    # keeps the artificial block tiny.
    needs_art = np.ones(m, dtype=bool)
    needs_art[m_eq:] = neg[m_eq:]
    art_rows = np.flatnonzero(needs_art)
    n_art = art_rows.size

    T = np.hstack([A, np.zeros((m, n_art))])
    T[art_rows, nc + np.arange(n_art)] = 1.0
    xB = b.copy()
    basis = np.empty(m, dtype=int)
    basis[~needs_art] = n + (np.flatnonzero(~needs_art) - m_eq)  # own slack
    basis[art_rows] = nc + np.arange(n_art)
    state = np.full(nc + n_art, _AT_LOWER, dtype=np.int8)
    state[basis] = _BASIC
    ub_full = np.concatenate([ubz, np.full(n_art, np.inf)])
    c1 = np.zeros(nc + n_art)
    c1[nc:] = 1.0

    it1 = _iterate(T, xB, basis, state, ub_full, c1, allow_cols=nc)
    if it1 < 0:
        if it1 == _STATUS_UNBOUNDED:
            raise SolverError("phase-1 objective unbounded (cannot happen)")
        raise SolverError("phase-1 simplex exceeded iteration cap")
    scale = max(1.0, float(np.abs(b).max())) if m else 1.0
    if float(c1[basis] @ xB) > _FEAS_TOL * scale:
        return LpResult(status="infeasible", iterations=it1)

    # Drive surviving artificials out of the basis; drop redundant rows.
    keep_rows = np.ones(m, dtype=bool)
    for r in range(m):
        if basis[r] >= nc:
            cand = np.flatnonzero(np.abs(T[r, :nc]) > _PIV_TOL)
            cand = [int(j) for j in cand if state[j] != _BASIC]
            if cand:
                _swap_in(T, xB, basis, state, r, cand[0], ub_full)
            else:
                keep_rows[r] = False
    if not keep_rows.all():
        T = T[keep_rows]
        xB = xB[keep_rows]
        basis = basis[keep_rows]

    # Phase 2 on the real columns only.
    T = np.ascontiguousarray(T[:, :nc])
    state = state[:nc]
    c2 = np.concatenate([c, np.zeros(nc - n)])

    it2 = _iterate(T, xB, basis, state, ubz, c2, allow_cols=nc)
    if it2 == _STATUS_UNBOUNDED:
        return LpResult(status="unbounded", iterations=it1)
    if it2 < 0:
        raise SolverError("phase-2 simplex exceeded iteration cap")

    y = np.zeros(n)
    up = (state[:n] == _AT_UPPER) & np.isfinite(ubz[:n])
    y[up] = ubz[:n][up]
    for r, j in enumerate(basis):
        if j < n:
            y[j] = xB[r]
    y = np.clip(y, 0.0, np.where(np.isfinite(ubz[:n]), ubz[:n], np.inf))
    return LpResult(status="optimal", x=y, objective=float(c @ y),
                    iterations=it1 + it2)


def _swap_in(T, xB, basis, state, row: int, col: int, ub) -> None:
    """Degenerate basis swap: bring ``col`` (nonbasic, at a bound) into the
    basis at ``row`` whose current basic variable sits at value ~0."""
    val = 0.0 if state[col] == _AT_LOWER else ub[col]
    state[basis[row]] = _AT_LOWER
    state[col] = _BASIC
    basis[row] = col
    piv = T[row, col]
    T[row] /= piv
    colv = T[:, col].copy()
    colv[row] = 0.0
    T -= np.outer(colv, T[row])
    xB[row] = val


def _iterate(T, xB, basis, state, ub, cost, allow_cols: int) -> int:
    """Primal simplex loop.  Returns the iteration count on optimality,
    -1 on iteration cap, -2 on an unbounded ray."""
    m = T.shape[0]
    cap = 200 * (m + allow_cols) + 1000
    degen_run = 0
    it = 0
    while True:
        it += 1
        if it > cap:
            return -1

        rc = cost[:allow_cols] - cost[basis] @ T[:, :allow_cols]
        at_lo = state[:allow_cols] == _AT_LOWER
        at_up = state[:allow_cols] == _AT_UPPER
        viol = np.where(at_lo, -rc, np.where(at_up, rc, 0.0))
        if degen_run >= _DEGEN_RUN:
            elig = np.flatnonzero(viol > _RC_TOL)
            if elig.size == 0:
                return it
            j = int(elig[0])                      # Bland's rule
        else:
            j = int(np.argmax(viol))
            if viol[j] <= _RC_TOL:
                return it

        direction = 1.0 if state[j] == _AT_LOWER else -1.0
        col = T[:, j] * direction

        # Ratio test: basic variables hitting a bound, or the entering
        # variable crossing its own box.
        delta = np.inf
        leave_row = -1
        pos = col > _PIV_TOL
        if np.any(pos):
            rows = np.flatnonzero(pos)
            ratios = xB[rows] / col[rows]
            rmin = float(ratios.min())
            tie = rows[ratios <= rmin + 1e-12]
            leave_row = int(tie[np.argmin(basis[tie])])
            delta = max(0.0, rmin)
        neg_rows = np.flatnonzero(col < -_PIV_TOL)
        if neg_rows.size:
            head = ub[basis[neg_rows]] - xB[neg_rows]
            ratios = head / (-col[neg_rows])
            rmin = float(ratios.min())
            if rmin < delta - 1e-12:
                delta = max(0.0, rmin)
                tie = neg_rows[ratios <= rmin + 1e-12]
                leave_row = int(tie[np.argmin(basis[tie])])

        if ub[j] < delta - 1e-12:
            # Bound flip: crosses its box, basis unchanged.
            xB -= ub[j] * col
            state[j] = _AT_UPPER if state[j] == _AT_LOWER else _AT_LOWER
            degen_run = 0
            continue
        if not np.isfinite(delta):
            return _STATUS_UNBOUNDED

        degen_run = degen_run + 1 if delta <= 1e-12 else 0

        leaving = basis[leave_row]
        lcol = col[leave_row]
        xB -= delta * col
        enter_val = delta if state[j] == _AT_LOWER else ub[j] - delta
        state[leaving] = _AT_LOWER if lcol > 0 else _AT_UPPER
        if state[leaving] == _AT_UPPER and not np.isfinite(ub[leaving]):
            state[leaving] = _AT_LOWER  # defensive: cannot actually happen
        state[j] = _BASIC
        basis[leave_row] = j

        piv = T[leave_row, j]
        if abs(piv) < _PIV_TOL:
            raise SolverError("numerically singular pivot")
        T[leave_row] /= piv
        colv = T[:, j].copy()
        colv[leave_row] = 0.0
        T -= np.outer(colv, T[leave_row])
        xB[leave_row] = enter_val
