"""Minimum-cost one-to-one assignment (Hungarian / shortest augmenting path).

The solver guarantees a deterministic result: among all minimum-cost
assignments it returns the one whose row-to-column mapping is
lexicographically smallest. The common case (a unique optimum) is detected
from the dual variables and skips the refinement pass entirely.
"""

from __future__ import annotations

import math

import numpy as np

_INF = math.inf


def _augmenting_path_solve(cost: np.ndarray) -> tuple[list[int], np.ndarray, np.ndarray]:
    """Solve LSA for an n x m matrix with n <= m.

    Returns (col_of_row, row_duals, col_duals). Classic O(n^2 m) shortest
    augmenting path with potentials; column scans in ascending order make the
    raw output deterministic.
    """
    n, m = cost.shape
    u = [0.0] * (n + 1)
    v = [0.0] * (m + 1)
    p = [0] * (m + 1)  # p[j] = 1-based row matched to column j; 0 = free
    way = [0] * (m + 1)
    for i in range(1, n + 1):
        p[0] = i
        j0 = 0
        minv = [_INF] * (m + 1)
        used = [False] * (m + 1)
        while True:
            used[j0] = True
            i0 = p[j0]
            delta = _INF
            j1 = 0
            row = cost[i0 - 1]
            ui0 = u[i0]
            for j in range(1, m + 1):
                if used[j]:
                    continue
                cur = row[j - 1] - ui0 - v[j]
                if cur < minv[j]:
                    minv[j] = cur
                    way[j] = j0
                if minv[j] < delta:
                    delta = minv[j]
                    j1 = j
            for j in range(m + 1):
                if used[j]:
                    u[p[j]] += delta
                    v[j] -= delta
                else:
                    minv[j] -= delta
            j0 = j1
            if p[j0] == 0:
                break
        while j0:
            j1 = way[j0]
            p[j0] = p[j1]
            j0 = j1
    col_of_row = [-1] * n
    for j in range(1, m + 1):
        if p[j]:
            col_of_row[p[j] - 1] = j - 1
    return col_of_row, np.array(u[1:]), np.array(v[1:])


def _assignment_cost(cost: np.ndarray, cols: list[int]) -> float:
    return float(sum(cost[i, j] for i, j in enumerate(cols)))


def _optimum_is_unique(cost: np.ndarray, cols: list[int], u: np.ndarray, v: np.ndarray) -> bool:
    """Complementary slackness: if the matched edges are the only tight ones,
    no alternative optimum exists. Rectangular matrices skip this shortcut."""
    n, m = cost.shape
    if n != m:
        return False
    reduced = cost - u[:, None] - v[None, :]
    tol = 1e-12 * (1.0 + float(np.max(np.abs(cost))))
    return int(np.count_nonzero(reduced <= tol)) <= n


def _lexicographic_refine(cost: np.ndarray, total: float) -> list[int]:
    """Smallest row-to-column mapping among assignments of cost ``total``."""
    n, m = cost.shape
    tol = 1e-9 * (1.0 + abs(total))
    rows = list(range(n))
    cols = list(range(m))
    chosen: list[int] = []
    remaining_total = total
    for _ in range(n):
        i = rows.pop(0)
        picked = None
        for jpos, j in enumerate(cols):
            sub = cost[np.ix_(rows, [c for c in cols if c != j])]
            if sub.shape[0] == 0:
                sub_cost = 0.0
            else:  # n <= m keeps every sub-problem wide, so it stays solvable
                sub_cols, _, _ = _augmenting_path_solve(np.ascontiguousarray(sub))
                sub_cost = _assignment_cost(sub, sub_cols)
            if cost[i, j] + sub_cost <= remaining_total + tol:
                picked = (jpos, j)
                break
        if picked is None:  # numerically impossible, but fail loudly
            raise RuntimeError("lexicographic refinement lost the optimum")
        jpos, j = picked
        chosen.append(j)
        remaining_total -= cost[i, j]
        cols.pop(jpos)
    return chosen


def solve_assignment(cost) -> list[tuple[int, int]]:
    """Minimum-total-cost one-to-one assignment.

    Accepts any n x m matrix of finite costs and returns min(n, m) pairs
    (row, col) sorted by row. Ties between equal-cost optima are broken by
    the lexicographically smallest row-to-column mapping.
    """
    c = np.asarray(cost, dtype=float)
    if c.ndim != 2:
        raise ValueError("cost matrix must be 2-D")
    if c.size == 0:
        return []
    if not np.all(np.isfinite(c)):
        raise ValueError("cost matrix entries must be finite")

    if c.shape[0] <= c.shape[1]:
        cols, u, v = _augmenting_path_solve(c)
        if not _optimum_is_unique(c, cols, u, v):
            cols = _lexicographic_refine(c, _assignment_cost(c, cols))
        return [(i, j) for i, j in enumerate(cols)]

    # more rows than columns: assign every column, leave extra rows out
    ct = np.ascontiguousarray(c.T)
    rows_of_col, u, v = _augmenting_path_solve(ct)
    pairs = [(r, j) for j, r in enumerate(rows_of_col)]
    total = float(sum(c[r, j] for r, j in pairs))
    # refinement must operate in row-major order on the original matrix: fix
    # each row in turn to its smallest feasible column (or to no column)
    pairs = _refine_tall(c, total)
    return sorted(pairs)


def _refine_tall(cost: np.ndarray, total: float) -> list[tuple[int, int]]:
    """Lexicographic refinement for n > m: per row, prefer the smallest
    column, and prefer assigning a row over skipping it only if optimal."""
    n, m = cost.shape
    tol = 1e-9 * (1.0 + abs(total))
    rows = list(range(n))
    cols = list(range(m))
    out: list[tuple[int, int]] = []
    remaining = total
    while rows and cols:
        i = rows.pop(0)
        best = None
        for j in cols:
            rest_rows = rows
            rest_cols = [c for c in cols if c != j]
            sub_cost = _tall_cost(cost, rest_rows, rest_cols)
            if cost[i, j] + sub_cost <= remaining + tol:
                best = j
                break
        if best is None:
            # row i stays unassigned; remaining columns must be coverable
            sub_cost = _tall_cost(cost, rows, cols)
            if sub_cost > remaining + tol:
                raise RuntimeError("lexicographic refinement lost the optimum")
            continue
        out.append((i, best))
        remaining -= cost[i, best]
        cols.remove(best)
    return out


def _tall_cost(cost: np.ndarray, rows: list[int], cols: list[int]) -> float:
    if not cols:
        return 0.0
    if len(rows) < len(cols):
        return _INF
    sub = cost[np.ix_(rows, cols)].T  # columns become rows: len(cols) <= len(rows)
    sub_cols, _, _ = _augmenting_path_solve(np.ascontiguousarray(sub))
    return _assignment_cost(sub, sub_cols)
