"""Dense two-phase simplex for small linear programs.

Solves  min c.x  s.t.  A_ub x <= b_ub,  A_eq x = b_eq,  x >= 0  with
Bland's rule throughout, so cycling is impossible and runs are fully
deterministic.  The problems this package generates have a handful of
variables, so a dense exact-pivot tableau beats anything fancier.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import UnboundedProblemError

_PIVOT_TOL = 1e-11
_COST_TOL = 1e-11
_FEAS_TOL = 1e-8


@dataclass(frozen=True, slots=True)
class SimplexResult:
    status: str                # "optimal" | "infeasible"
    x: np.ndarray | None
    objective: float | None


def solve_lp(c, A_ub=None, b_ub=None, A_eq=None, b_eq=None) -> SimplexResult:
    c = np.asarray(c, dtype=float)
    n = c.size
    rows: list[np.ndarray] = []
    rhs: list[float] = []
    senses: list[str] = []
    if A_ub is not None:
        A_ub = np.asarray(A_ub, dtype=float)
        b_ub = np.asarray(b_ub, dtype=float)
        for row, b in zip(A_ub, b_ub):
            rows.append(row)
            rhs.append(float(b))
            senses.append("<")
    if A_eq is not None:
        A_eq = np.asarray(A_eq, dtype=float)
        b_eq = np.asarray(b_eq, dtype=float)
        for row, b in zip(A_eq, b_eq):
            rows.append(row)
            rhs.append(float(b))
            senses.append("=")
    m = len(rows)
    if m == 0:
        raise ValueError("at least one constraint is required")

    # Row scaling for conditioning, then normalize RHS signs.
    A = np.array(rows, dtype=float)
    b = np.array(rhs, dtype=float)
    for i in range(m):
        scale = max(np.max(np.abs(A[i])), abs(b[i]))
        if scale > 0.0:
            A[i] /= scale
            b[i] /= scale
        if b[i] < 0.0:
            A[i] = -A[i]
            b[i] = -b[i]
            if senses[i] == "<":
                senses[i] = ">"

    n_slack = sum(1 for s in senses if s in "<>")
    n_art = sum(1 for s in senses if s in ">=")
    total = n + n_slack + n_art
    T = np.zeros((m, total + 1))
    T[:, :n] = A
    T[:, -1] = b
    basis = np.empty(m, dtype=int)
    slack_at = n
    art_at = n + n_slack
    art_cols = []
    for i, sense in enumerate(senses):
        if sense == "<":
            T[i, slack_at] = 1.0
            basis[i] = slack_at
            slack_at += 1
        elif sense == ">":
            T[i, slack_at] = -1.0
            slack_at += 1
            T[i, art_at] = 1.0
            basis[i] = art_at
            art_cols.append(art_at)
            art_at += 1
        else:
            T[i, art_at] = 1.0
            basis[i] = art_at
            art_cols.append(art_at)
            art_at += 1
    art_cols = set(art_cols)

    # Phase 1: minimize the artificial total.
    if art_cols:
        cost = np.zeros(total + 1)
        for j in art_cols:
            cost[j] = 1.0
        for i in range(m):
            if basis[i] in art_cols:
                cost -= T[i]
        _iterate(T, basis, cost, banned=frozenset())
        if -cost[-1] > _FEAS_TOL:
            return SimplexResult(status="infeasible", x=None, objective=None)
        _drive_out_artificials(T, basis, art_cols)

    # Phase 2: the real objective; artificial columns may not re-enter.
    cost = np.zeros(total + 1)
    cost[:n] = c
    for i in range(m):
        bj = basis[i]
        if cost[bj] != 0.0:
            cost = cost - cost[bj] * T[i]
    _iterate(T, basis, cost, banned=frozenset(art_cols))

    x = np.zeros(n)
    for i in range(m):
        if basis[i] < n:
            x[basis[i]] = T[i, -1]
    return SimplexResult(status="optimal", x=x, objective=float(c @ x))


def _iterate(T: np.ndarray, basis: np.ndarray, cost: np.ndarray,
             banned: frozenset[int]) -> None:
    m, width = T.shape
    total = width - 1
    while True:
        entering = -1
        for j in range(total):  # Bland: lowest eligible index
            if j in banned:
                continue
            if cost[j] < -_COST_TOL:
                entering = j
                break
        if entering < 0:
            return
        leaving = -1
        best = np.inf
        for i in range(m):
            a = T[i, entering]
            if a > _PIVOT_TOL:
                ratio = T[i, -1] / a
                if ratio < best - 1e-12 or (abs(ratio - best) <= 1e-12 and
                                            (leaving < 0 or basis[i] < basis[leaving])):
                    best = ratio
                    leaving = i
        if leaving < 0:
            raise UnboundedProblemError("objective unbounded below")
        _pivot(T, basis, cost, leaving, entering)


def _pivot(T, basis, cost, row, col) -> None:
    T[row] /= T[row, col]
    for i in range(T.shape[0]):
        if i != row and T[i, col] != 0.0:
            T[i] -= T[i, col] * T[row]
    if cost[col] != 0.0:
        cost -= cost[col] * T[row]
    basis[row] = col


def _drive_out_artificials(T, basis, art_cols) -> None:
    for i in range(T.shape[0]):
        if basis[i] in art_cols:
            for j in range(T.shape[1] - 1):
                if j not in art_cols and abs(T[i, j]) > _PIVOT_TOL:
                    dummy = np.zeros(T.shape[1])
                    _pivot(T, basis, dummy, i, j)
                    break
            # all-zero row: redundant constraint, the artificial stays at 0
