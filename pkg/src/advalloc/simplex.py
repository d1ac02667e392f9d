"""Dense two-phase primal simplex for small/medium LPs.

Solves  min c'x  s.t.  A_ub x <= b_ub,  A_eq x = b_eq,  x >= 0.

Tableau form with explicit slack and artificial columns. Entering variable by
Dantzig's rule (most negative reduced cost, lowest index on ties); a stall of
degenerate pivots switches to Bland's rule, which guarantees termination.
Pivot tolerance 1e-9. Leaving row: minimum ratio, ties broken by the smallest
basis variable index.
"""
from __future__ import annotations

import dataclasses

import numpy as np

PIVOT_TOL = 1e-9
FEAS_TOL = 1e-7
STALL_LIMIT = 256


class SimplexError(RuntimeError):
    """Iteration limit or numerical breakdown."""


class InfeasibleError(SimplexError):
    """Phase 1 ended with positive artificial mass."""


class UnboundedError(SimplexError):
    """A negative reduced cost column has no positive entries."""


@dataclasses.dataclass
class LpSolution:
    x: np.ndarray
    objective: float
    iterations: int


def _pivot(T: np.ndarray, obj: np.ndarray, basis: np.ndarray, row: int, col: int) -> None:
    T[row] /= T[row, col]
    factors = T[:, col].copy()
    factors[row] = 0.0
    T -= np.outer(factors, T[row])
    obj -= obj[col] * T[row]
    basis[row] = col


def _run(T: np.ndarray, obj: np.ndarray, basis: np.ndarray, allowed: np.ndarray,
         max_iter: int) -> int:
    """Minimize obj over the tableau; returns pivots used."""
    iters = 0
    bland = False
    stall = 0
    last_val = obj[-1]
    while True:
        cols = obj[:-1].copy()
        cols[~allowed] = 0.0
        cols[basis] = 0.0
        if bland:
            candidates = np.flatnonzero(cols < -PIVOT_TOL)
            if candidates.size == 0:
                return iters
            col = int(candidates[0])
        else:
            col = int(np.argmin(cols))
            if cols[col] >= -PIVOT_TOL:
                return iters
        ratios = np.full(T.shape[0], np.inf)
        positive = T[:, col] > PIVOT_TOL
        ratios[positive] = T[positive, -1] / T[positive, col]
        best = ratios.min()
        if not np.isfinite(best):
            raise UnboundedError("unbounded: no positive pivot in entering column")
        tied = np.flatnonzero(ratios <= best + PIVOT_TOL)
        row = int(tied[np.argmin(basis[tied])])
        _pivot(T, obj, basis, row, col)
        iters += 1
        if iters > max_iter:
            raise SimplexError(f"iteration limit {max_iter} exceeded")
        if abs(obj[-1] - last_val) <= PIVOT_TOL:
            stall += 1
            if stall >= STALL_LIMIT:
                bland = True
        else:
            stall = 0
            bland = False
        last_val = obj[-1]


def solve_lp(c, A_ub=None, b_ub=None, A_eq=None, b_eq=None, *,
             max_iter: int | None = None) -> LpSolution:
    c = np.asarray(c, dtype=np.float64)
    n = c.shape[0]
    blocks = []
    rhs = []
    n_ub = 0
    if A_ub is not None:
        A_ub = np.atleast_2d(np.asarray(A_ub, dtype=np.float64))
        b_ub = np.atleast_1d(np.asarray(b_ub, dtype=np.float64))
        if A_ub.shape != (b_ub.shape[0], n):
            raise ValueError(f"A_ub shape {A_ub.shape} inconsistent with c/b_ub")
        n_ub = A_ub.shape[0]
        blocks.append(A_ub)
        rhs.append(b_ub)
    if A_eq is not None:
        A_eq = np.atleast_2d(np.asarray(A_eq, dtype=np.float64))
        b_eq = np.atleast_1d(np.asarray(b_eq, dtype=np.float64))
        if A_eq.shape != (b_eq.shape[0], n):
            raise ValueError(f"A_eq shape {A_eq.shape} inconsistent with c/b_eq")
        blocks.append(A_eq)
        rhs.append(b_eq)
    if not blocks:
        raise ValueError("no constraints given")
    A = np.vstack(blocks)
    b = np.concatenate(rhs)
    m = A.shape[0]

    # slack columns for the <= rows
    slack = np.zeros((m, n_ub))
    slack[np.arange(n_ub), np.arange(n_ub)] = 1.0
    A = np.hstack([A, slack])
    neg = b < 0
    A[neg] *= -1
    b = np.abs(b)

    # artificials wherever the slack cannot start basic
    needs_art = np.ones(m, dtype=bool)
    needs_art[:n_ub] = neg[:n_ub]
    art_rows = np.flatnonzero(needs_art)
    n_cols = A.shape[1]
    art = np.zeros((m, art_rows.size))
    art[art_rows, np.arange(art_rows.size)] = 1.0
    T = np.hstack([A, art, b[:, None]])
    total = n_cols + art_rows.size

    basis = np.empty(m, dtype=np.int64)
    basis[~needs_art] = n + np.flatnonzero(~needs_art)  # their own slack
    basis[art_rows] = n_cols + np.arange(art_rows.size)
    allowed = np.ones(total, dtype=bool)
    if max_iter is None:
        max_iter = 2000 + 200 * (m + total)

    iterations = 0
    if art_rows.size:
        phase1 = np.zeros(total + 1)
        phase1[n_cols:total] = 1.0
        # canonicalize: zero the cost entries of the basic artificials
        phase1 -= T[np.isin(basis, np.arange(n_cols, total))].sum(axis=0)
        iterations += _run(T, phase1, basis, allowed, max_iter)
        if phase1[-1] < -FEAS_TOL:  # obj[-1] = -objective value
            raise InfeasibleError(f"infeasible: artificial mass {-phase1[-1]:.3e}")
        # drive surviving artificials out of the basis or drop redundant rows
        keep = np.ones(m, dtype=bool)
        for i in range(m):
            if basis[i] >= n_cols:
                entries = np.abs(T[i, :n_cols])
                j = int(np.argmax(entries))
                if entries[j] > PIVOT_TOL:
                    dummy = np.zeros(total + 1)
                    _pivot(T, dummy, basis, i, j)
                else:
                    keep[i] = False
        if not keep.all():
            T = T[keep]
            basis = basis[keep]
            m = T.shape[0]
        allowed[n_cols:] = False

    obj = np.zeros(total + 1)
    obj[:n] = c
    for i, col in enumerate(basis):
        if obj[col] != 0.0:
            obj -= obj[col] * T[i]
    iterations += _run(T, obj, basis, allowed, max_iter)

    x_full = np.zeros(total)
    x_full[basis] = T[:, -1]
    x = x_full[:n]
    return LpSolution(x=x, objective=float(c @ x), iterations=iterations)
