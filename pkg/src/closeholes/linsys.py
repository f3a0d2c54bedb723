"""Bordered dense linear systems.

Unit-mass and zero-mean normalizations enter every solve in this package
as constraint rows; the matching border columns complement the range of
the rank-deficient Fredholm blocks so a single LU factorization applies.
"""

from __future__ import annotations

import numpy as np

from .errors import SolverError


def solve_bordered(A, border_cols, constraint_rows, rhs, rhs_constraints,
                   label="bordered system", cond_limit=1e14):
    """Solve [[A, C], [B, 0]] [x; lam] = [rhs; rhs_c].

    Returns ``(x, lam)``.  ``lam`` vanishes (up to discretization error)
    whenever the continuous problem is consistent; a large ``lam`` is a
    useful diagnostic for broken geometry or quadrature.
    """
    A = np.asarray(A, dtype=float)
    n = A.shape[0]
    C = np.asarray(border_cols, dtype=float).reshape(n, -1)
    B = np.asarray(constraint_rows, dtype=float).reshape(-1, n)
    k = C.shape[1]
    if B.shape[0] != k:
        raise ValueError("need as many constraint rows as border columns")
    M = np.zeros((n + k, n + k))
    M[:n, :n] = A
    M[:n, n:] = C
    M[n:, :n] = B
    b = np.concatenate([np.asarray(rhs, dtype=float), np.asarray(rhs_constraints, dtype=float)])
    try:
        sol = np.linalg.solve(M, b)
    except np.linalg.LinAlgError as exc:
        raise SolverError(f"{label}: singular matrix") from exc
    if not np.all(np.isfinite(sol)):
        raise SolverError(f"{label}: non-finite solution")
    return sol[:n], sol[n:]


def solve_square(A, rhs, label="dense system"):
    try:
        x = np.linalg.solve(np.asarray(A, dtype=float), np.asarray(rhs, dtype=float))
    except np.linalg.LinAlgError as exc:
        raise SolverError(f"{label}: singular matrix") from exc
    if not np.all(np.isfinite(x)):
        raise SolverError(f"{label}: non-finite solution")
    return x


def condition_number(A):
    return float(np.linalg.cond(A))
