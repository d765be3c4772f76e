"""Column program min ||w||_1 subject to ||A w - b||_inf <= lambda.

This single LP shape instantiates every estimation stage. Solved in the
standard u/v splitting (w = u - v, u,v >= 0) with 2p variables and 2p
inequality rows. Columns with ||b||_inf <= lambda short-circuit to w = 0,
which is optimal whenever feasible.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import linprog

from .exceptions import DataError, DimensionMismatch, Infeasible, NumericalFailure

__all__ = [
    "ColumnProblem",
    "ColumnSolution",
    "solve_column",
    "solve_matrix",
    "soft_threshold",
    "FEASIBILITY_TOL",
    "OBJECTIVE_TOL",
]

FEASIBILITY_TOL = 1e-7
OBJECTIVE_TOL = 1e-6

_LINPROG_OPTIONS = {"presolve": False}


@dataclass(frozen=True)
class ColumnProblem:
    """One column instance: matrix ``a``, target ``b``, radius ``lam``."""

    a: np.ndarray
    b: np.ndarray
    lam: float

    def __post_init__(self):
        a = np.asarray(self.a, dtype=float)
        b = np.asarray(self.b, dtype=float)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise DimensionMismatch(f"constraint matrix must be square, got shape {a.shape}")
        if b.shape != (a.shape[0],):
            raise DimensionMismatch(f"rhs shape {b.shape} does not match matrix dim {a.shape[0]}")
        if not (np.all(np.isfinite(a)) and np.all(np.isfinite(b)) and np.isfinite(self.lam)):
            raise DataError("column problem entries must be finite")
        if self.lam < 0:
            raise DataError(f"lambda must be nonnegative, got {self.lam}")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "lam", float(self.lam))


@dataclass(frozen=True)
class ColumnSolution:
    omega: np.ndarray
    objective: float
    max_violation: float
    status: str


def _stacked_constraints(a):
    """The fixed inequality block [[A, -A], [-A, A]] shared by all columns of A."""
    p = a.shape[0]
    out = np.empty((2 * p, 2 * p))
    out[:p, :p] = a
    out[:p, p:] = -a
    out[p:, :p] = -a
    out[p:, p:] = a
    return out


def _solve_one(a, b, lam, a_ub, cost):
    p = a.shape[0]
    b_max = float(np.max(np.abs(b))) if p else 0.0
    if b_max <= lam:
        return ColumnSolution(np.zeros(p), 0.0, b_max, "optimal")
    b_ub = np.concatenate((b + lam, lam - b))
    res = linprog(
        cost,
        A_ub=a_ub,
        b_ub=b_ub,
        bounds=(0, None),
        method="highs",
        options=_LINPROG_OPTIONS,
    )
    if res.status == 2:
        raise Infeasible(f"no solution with residual <= {lam:.6g}")
    if res.status != 0:
        raise NumericalFailure(f"LP backend stopped with status {res.status}: {res.message}")
    omega = res.x[:p] - res.x[p:]
    violation = float(np.max(np.abs(a @ omega - b)))
    if violation > lam + FEASIBILITY_TOL:
        raise NumericalFailure(
            f"returned point violates the constraint: {violation:.3e} > {lam:.3e} + tol"
        )
    return ColumnSolution(omega, float(np.sum(np.abs(omega))), violation, "optimal")


def solve_column(prob):
    """Solve one ColumnProblem to optimality.

    Raises Infeasible when the constraint set is empty (lambda too small for
    this A, b) and NumericalFailure when the backend stalls or the returned
    point misses the feasibility tolerance.
    """
    a_ub = _stacked_constraints(prob.a)
    cost = np.ones(2 * prob.a.shape[0])
    return _solve_one(prob.a, prob.b, prob.lam, a_ub, cost)


def solve_matrix(a, b, lam):
    """Solve the column program for every column of ``b`` against one ``a``.

    Returns the p x q solution matrix. Per-column failures are collected and
    re-raised once, naming every offending column.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionMismatch(f"constraint matrix must be square, got shape {a.shape}")
    if b.ndim != 2 or b.shape[0] != a.shape[0]:
        raise DimensionMismatch(f"rhs shape {b.shape} does not match matrix dim {a.shape[0]}")
    if not (np.all(np.isfinite(a)) and np.all(np.isfinite(b)) and np.isfinite(lam)):
        raise DataError("solve_matrix inputs must be finite")
    if lam < 0:
        raise DataError(f"lambda must be nonnegative, got {lam}")
    p, q = b.shape
    a_ub = _stacked_constraints(a)
    cost = np.ones(2 * p)
    out = np.empty((p, q))
    failures = []
    for j in range(q):
        try:
            out[:, j] = _solve_one(a, b[:, j], float(lam), a_ub, cost).omega
        except (Infeasible, NumericalFailure) as exc:
            failures.append((j, exc))
    if failures:
        cols = ", ".join(str(j) for j, _ in failures)
        kind = type(failures[0][1])
        raise kind(f"column(s) {cols} failed: {failures[0][1]}")
    return out


def soft_threshold(a, t):
    """Entrywise soft-thresholding sign(a) * max(|a| - t, 0)."""
    if t < 0:
        raise DataError(f"threshold must be nonnegative, got {t}")
    a = np.asarray(a, dtype=float)
    return np.sign(a) * np.maximum(np.abs(a) - t, 0.0)
