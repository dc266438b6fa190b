"""Dense two-phase simplex for the small linear programs of the solver.

Inner problems have at most ``2k`` variables, all boxed, plus a handful
of user rows, so a dense tableau is the right tool.  Bland's rule picks
both the entering and the leaving variable, so degenerate pivots cannot
cycle.

Variables are shifted onto their lower bounds and the upper bounds become
ordinary rows; every row gets an artificial variable in phase one.  The
phase-one optimum is kept as :attr:`LpResult.infeasibility`, which the
solver uses as a distance-to-feasibility when searching for a start.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import StrEnum

import numpy as np

from ltebounds_core.exceptions import DomainError, LteBoundsError


class LpStatus(StrEnum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"


@dataclass(frozen=True, eq=False)
class LpResult:
    """Outcome of :func:`solve_lp`.

    Attributes:
        status: Optimal or infeasible.
        x: Optimal point, or ``None`` when infeasible.
        value: Objective at ``x`` (``nan`` when infeasible).
        infeasibility: Phase-one residual; ``0`` for feasible programs.
        iterations: Pivots over both phases.
    """

    status: LpStatus
    x: np.ndarray | None
    value: float
    infeasibility: float
    iterations: int


def _rows(a: object, b: object, n: int, name: str) -> tuple[np.ndarray, np.ndarray]:
    if a is None:
        return np.zeros((0, n)), np.zeros(0)
    matrix = np.atleast_2d(np.asarray(a, dtype=float))
    rhs = np.atleast_1d(np.asarray(b, dtype=float))
    if matrix.size == 0:
        return np.zeros((0, n)), np.zeros(0)
    if matrix.shape[1] != n or rhs.shape != (matrix.shape[0],):
        raise DomainError(
            f"{name} rows have shape {matrix.shape} with rhs {rhs.shape}; expected {n} columns"
        )
    return matrix, rhs


def _pivot(tableau: np.ndarray, row: int, col: int) -> None:
    tableau[row] /= tableau[row, col]
    column = tableau[:, col].copy()
    column[row] = 0.0
    tableau -= np.outer(column, tableau[row])


def _iterate(tableau: np.ndarray, basis: list[int], n_cols: int, tol: float, limit: int) -> int:
    for iteration in range(limit):
        candidates = np.flatnonzero(tableau[-1, :n_cols] < -tol)
        if candidates.size == 0:
            return iteration
        col = int(candidates[0])
        column = tableau[:-1, col]
        positive = column > tol
        if not positive.any():
            raise DomainError("linear program is unbounded")
        ratios = np.full(column.shape, np.inf)
        ratios[positive] = tableau[:-1, -1][positive] / column[positive]
        best = ratios.min()
        ties = np.flatnonzero(ratios <= best + tol)
        row = int(min(ties, key=lambda r: basis[r]))
        _pivot(tableau, row, col)
        basis[row] = col
    raise LteBoundsError(f"simplex did not terminate within {limit} pivots")


def solve_lp(
    c: np.ndarray,
    *,
    lower: np.ndarray,
    upper: np.ndarray,
    a_ub: np.ndarray | None = None,
    b_ub: np.ndarray | None = None,
    a_eq: np.ndarray | None = None,
    b_eq: np.ndarray | None = None,
    maximize: bool = False,
    tol: float = 1e-10,
) -> LpResult:
    """Optimize ``c @ x`` subject to ``a_ub @ x <= b_ub``, ``a_eq @ x = b_eq``
    and ``lower <= x <= upper``.

    Args:
        c: Objective coefficients, length ``n``.
        lower: Finite lower bounds, length ``n``.
        upper: Finite upper bounds, length ``n``.
        a_ub: Inequality rows, shape ``(r, n)``.
        b_ub: Inequality right-hand sides.
        a_eq: Equality rows, shape ``(q, n)``.
        b_eq: Equality right-hand sides.
        maximize: Maximize instead of minimize.
        tol: Pivoting tolerance.

    Returns:
        An :class:`LpResult`.

    Raises:
        DomainError: On inconsistent shapes.
    """
    c = np.asarray(c, dtype=float).ravel()
    n = c.size
    lower = np.broadcast_to(np.asarray(lower, dtype=float), (n,)).copy()
    upper = np.broadcast_to(np.asarray(upper, dtype=float), (n,)).copy()
    a_ub, b_ub = _rows(a_ub, b_ub, n, "inequality")
    a_eq, b_eq = _rows(a_eq, b_eq, n, "equality")

    span = upper - lower
    if np.any(span < -tol):
        return LpResult(LpStatus.INFEASIBLE, None, np.nan, float(np.max(-span)), 0)
    span = np.maximum(span, 0.0)

    # x = lower + y with 0 <= y <= span; upper bounds become rows.
    rows_ub = np.vstack([a_ub, np.eye(n)])
    rhs_ub = np.concatenate([b_ub - a_ub @ lower, span])
    m_ub, m_eq = rows_ub.shape[0], a_eq.shape[0]
    m = m_ub + m_eq
    n_struct = n + m_ub

    body = np.zeros((m, n_struct))
    body[:m_ub, :n] = rows_ub
    body[:m_ub, n:] = np.eye(m_ub)
    body[m_ub:, :n] = a_eq
    rhs = np.concatenate([rhs_ub, b_eq - a_eq @ lower])
    flip = rhs < 0.0
    body[flip] *= -1.0
    rhs[flip] *= -1.0

    tableau = np.zeros((m + 1, n_struct + m + 1))
    tableau[:m, :n_struct] = body
    tableau[:m, n_struct : n_struct + m] = np.eye(m)
    tableau[:m, -1] = rhs
    tableau[-1, :n_struct] = -body.sum(axis=0)
    tableau[-1, -1] = -rhs.sum()
    basis = list(range(n_struct, n_struct + m))
    limit = 50 * (m + n_struct + m)

    iterations = _iterate(tableau, basis, n_struct + m, tol, limit)
    residual = max(-float(tableau[-1, -1]), 0.0)
    if residual > 1e-9 * max(1.0, float(rhs.sum())):
        return LpResult(LpStatus.INFEASIBLE, None, np.nan, residual, iterations)

    keep: list[int] = []
    for row in range(m):
        if basis[row] >= n_struct:
            movable = np.flatnonzero(np.abs(tableau[row, :n_struct]) > tol)
            if movable.size == 0:
                continue  # redundant row
            _pivot(tableau, row, int(movable[0]))
            basis[row] = int(movable[0])
        keep.append(row)

    phase_two = np.zeros((len(keep) + 1, n_struct + 1))
    phase_two[:-1, :n_struct] = tableau[keep, :n_struct]
    phase_two[:-1, -1] = tableau[keep, -1]
    basis = [basis[row] for row in keep]
    cost = np.zeros(n_struct)
    cost[:n] = -c if maximize else c
    phase_two[-1, :n_struct] = cost
    for row, var in enumerate(basis):
        if cost[var] != 0.0:
            phase_two[-1] -= cost[var] * phase_two[row]

    iterations += _iterate(phase_two, basis, n_struct, tol, limit)
    y = np.zeros(n_struct)
    for row, var in enumerate(basis):
        y[var] = phase_two[row, -1]
    x = np.clip(lower + y[:n], lower, lower + span)
    return LpResult(LpStatus.OPTIMAL, x, float(c @ x), 0.0, iterations)
