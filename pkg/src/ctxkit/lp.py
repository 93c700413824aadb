"""Dense two-phase simplex for small linear programs.

Problems are posed as::

    maximize    c @ x
    subject to  A_ub @ x <= b_ub
                A_eq @ x == b_eq
                x >= 0

Pivoting follows Bland's rule (smallest eligible index for both the entering
and the leaving variable), so degenerate problems terminate.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"


class LpError(ValueError):
    """Malformed linear program."""


def _as_matrix(a, n, name):
    if a is None:
        return np.zeros((0, n))
    a = np.array(a, dtype=float)
    if a.ndim == 1 and a.size == 0:
        a = a.reshape(0, n)
    if a.ndim != 2:
        raise LpError(f"{name} must be 2-dimensional")
    if a.shape[1] != n:
        raise LpError(f"{name} has {a.shape[1]} columns, objective has {n}")
    return a


def _as_vector(b, m, name):
    if b is None:
        b = np.zeros(0)
    b = np.array(b, dtype=float).ravel()
    if b.size != m:
        raise LpError(f"{name} has length {b.size}, matrix has {m} rows")
    return b


@dataclass(frozen=True, eq=False)
class LpProblem:
    objective: np.ndarray
    ineq_matrix: np.ndarray | None = None
    ineq_rhs: np.ndarray | None = None
    eq_matrix: np.ndarray | None = None
    eq_rhs: np.ndarray | None = None

    def __post_init__(self):
        c = np.array(self.objective, dtype=float).ravel()
        n = c.size
        a_ub = _as_matrix(self.ineq_matrix, n, "ineq_matrix")
        b_ub = _as_vector(self.ineq_rhs, a_ub.shape[0], "ineq_rhs")
        a_eq = _as_matrix(self.eq_matrix, n, "eq_matrix")
        b_eq = _as_vector(self.eq_rhs, a_eq.shape[0], "eq_rhs")
        for name, arr in [("objective", c), ("ineq_matrix", a_ub), ("ineq_rhs", b_ub),
                          ("eq_matrix", a_eq), ("eq_rhs", b_eq)]:
            if not np.all(np.isfinite(arr)):
                raise LpError(f"{name} contains NaN or infinite values")
        object.__setattr__(self, "objective", c)
        object.__setattr__(self, "ineq_matrix", a_ub)
        object.__setattr__(self, "ineq_rhs", b_ub)
        object.__setattr__(self, "eq_matrix", a_eq)
        object.__setattr__(self, "eq_rhs", b_eq)

    @property
    def n_vars(self) -> int:
        return self.objective.size

    def is_feasible(self, x, tol=1e-9) -> bool:
        x = np.asarray(x, dtype=float)
        scale = 1.0 + max(np.abs(self.ineq_rhs).max(initial=0), np.abs(self.eq_rhs).max(initial=0))
        return bool(
            np.all(x >= -tol * scale)
            and np.all(self.ineq_matrix @ x <= self.ineq_rhs + tol * scale)
            and np.all(np.abs(self.eq_matrix @ x - self.eq_rhs) <= tol * scale)
        )


@dataclass(frozen=True, eq=False)
class LpSolution:
    status: str
    objective_value: float
    solution: np.ndarray
    iterations: int

    @property
    def optimal(self) -> bool:
        return self.status == OPTIMAL


class _Tableau:
    """Rows ``[A | b]`` plus a basis; the reduced-cost row is computed per phase."""

    def __init__(self, a, b, basis, tol, max_iter):
        self.t = np.hstack([a, b[:, None]])
        self.basis = list(basis)
        self.tol = tol
        self.max_iter = max_iter
        self.iterations = 0

    def pivot(self, row, col):
        t = self.t
        t[row] /= t[row, col]
        colv = t[:, col].copy()
        colv[row] = 0.0
        t -= np.outer(colv, t[row])
        self.basis[row] = col

    def run(self, cost, allowed):
        """Maximize ``cost @ x`` over the current basis; returns False if unbounded."""
        t, tol = self.t, self.tol
        while True:
            cb = cost[self.basis]
            reduced = cost[allowed] - cb @ t[:, allowed]
            eligible = np.flatnonzero(reduced > tol)
            if eligible.size == 0:
                return True
            col = int(allowed[eligible[0]])
            column = t[:, col]
            rows = np.flatnonzero(column > tol)
            if rows.size == 0:
                return False
            ratios = t[rows, -1] / column[rows]
            best = ratios.min()
            ties = rows[ratios <= best + tol * max(1.0, abs(best))]
            row = int(min(ties, key=lambda r: self.basis[r]))
            self.pivot(row, col)
            self.iterations += 1
            if self.iterations > self.max_iter:
                raise RuntimeError("simplex exceeded its iteration limit")

    def values(self, n):
        x = np.zeros(n)
        for r, var in enumerate(self.basis):
            if var < n:
                x[var] = self.t[r, -1]
        return x


def solve_max(problem: LpProblem, tol: float = 1e-9, max_iter: int = 100_000) -> LpSolution:
    """Maximize ``problem`` with the two-phase simplex method."""
    c = problem.objective
    n = c.size
    a_ub, b_ub = problem.ineq_matrix, problem.ineq_rhs
    a_eq, b_eq = problem.eq_matrix, problem.eq_rhs
    m_ub, m_eq = a_ub.shape[0], a_eq.shape[0]
    m = m_ub + m_eq

    # columns: original | slacks | artificials
    a = np.zeros((m, n + m_ub))
    a[:m_ub, :n] = a_ub
    a[:m_ub, n:] = np.eye(m_ub)
    a[m_ub:, :n] = a_eq
    b = np.concatenate([b_ub, b_eq])
    flip = b < 0
    a[flip] *= -1
    b = np.where(flip, -b, b)

    needs_art = [r for r in range(m) if r >= m_ub or flip[r]]
    art = np.zeros((m, len(needs_art)))
    for k, r in enumerate(needs_art):
        art[r, k] = 1.0
    a = np.hstack([a, art])
    n_struct = n + m_ub
    n_total = a.shape[1]
    basis = [n + r for r in range(m)]
    for k, r in enumerate(needs_art):
        basis[r] = n_struct + k

    tab = _Tableau(a, b, basis, tol, max_iter)
    scale = 1.0 + np.abs(b).max(initial=0.0)

    if needs_art:
        cost1 = np.zeros(n_total)
        cost1[n_struct:] = -1.0
        tab.run(cost1, np.arange(n_total))
        infeasibility = sum(tab.t[r, -1] for r, v in enumerate(tab.basis) if v >= n_struct)
        if infeasibility > tol * scale:
            return LpSolution(INFEASIBLE, float("nan"), np.full(n, np.nan), tab.iterations)
        # drive zero-level artificials out of the basis; drop redundant rows
        keep = []
        for r in range(m):
            if tab.basis[r] >= n_struct:
                row = tab.t[r, :n_struct]
                cands = np.flatnonzero(np.abs(row) > tol)
                if cands.size == 0:
                    continue
                tab.pivot(r, int(cands[0]))
            keep.append(r)
        tab.t = np.hstack([tab.t[keep, :n_struct], tab.t[keep, -1:]])
        tab.basis = [tab.basis[r] for r in keep]

    cost2 = np.zeros(n_struct)
    cost2[:n] = c
    if not tab.run(cost2, np.arange(n_struct)):
        return LpSolution(UNBOUNDED, float("inf"), np.full(n, np.nan), tab.iterations)
    x = np.clip(tab.values(n), 0.0, None)
    return LpSolution(OPTIMAL, float(c @ x), x, tab.iterations)
