"""Dense two-phase tableau simplex with Bland's anti-cycling rule.

Solves   min c.x   s.t.  A_ub x <= b_ub,  A_eq x = b_eq,  x >= 0.

Sized for the small linear programs this package builds (tens of variables);
everything is kept in one dense numpy tableau. Bland's smallest-index pivot
rule is used throughout because the offloading relaxation is highly
degenerate (epigraph rows with zero right-hand sides) and cycling is a real
risk with classic most-negative pricing.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

_TOL = 1e-9


class SimplexError(RuntimeError):
    """The LP could not be solved (infeasible, unbounded, or pivot limit)."""


@dataclass
class LpResult:
    x: np.ndarray
    value: float
    pivots: int


def solve_lp(c, a_ub=None, b_ub=None, a_eq=None, b_eq=None,
             max_pivots: int = 100_000) -> LpResult:
    c = np.asarray(c, dtype=float)
    n_var = c.size
    a_ub = np.zeros((0, n_var)) if a_ub is None else np.asarray(a_ub, dtype=float)
    b_ub = np.zeros(0) if b_ub is None else np.asarray(b_ub, dtype=float)
    a_eq = np.zeros((0, n_var)) if a_eq is None else np.asarray(a_eq, dtype=float)
    b_eq = np.zeros(0) if b_eq is None else np.asarray(b_eq, dtype=float)
    if (b_ub < 0).any() or (b_eq < 0).any():
        raise SimplexError("right-hand sides must be nonnegative")

    n_ub, n_eq = a_ub.shape[0], a_eq.shape[0]
    n_rows = n_ub + n_eq
    n_slack = n_ub
    n_art = n_eq
    n_cols = n_var + n_slack + n_art

    table = np.zeros((n_rows, n_cols + 1))
    table[:n_ub, :n_var] = a_ub
    table[n_ub:, :n_var] = a_eq
    table[:n_ub, n_var:n_var + n_slack] = np.eye(n_ub)
    table[n_ub:, n_var + n_slack:n_cols] = np.eye(n_eq)
    table[:n_ub, -1] = b_ub
    table[n_ub:, -1] = b_eq

    # initial basis: slack on every <= row, artificial on every == row
    basis = list(range(n_var, n_var + n_slack)) + list(range(n_var + n_slack, n_cols))
    pivots = 0

    def iterate(cost: np.ndarray, allowed_cols: int) -> None:
        nonlocal pivots
        z = np.concatenate([cost.astype(float), [0.0]])
        for r, b in enumerate(basis):
            coeff = z[b]
            if coeff != 0.0:
                z[:n_cols] -= coeff * table[r, :n_cols]
                z[-1] -= coeff * table[r, -1]
        while True:
            entering = -1
            for j in range(allowed_cols):
                if z[j] < -_TOL:
                    entering = j  # Bland: smallest improving index
                    break
            if entering < 0:
                return
            leaving = -1
            best_ratio = np.inf
            for r in range(n_rows):
                a = table[r, entering]
                if a > _TOL:
                    ratio = table[r, -1] / a
                    if ratio < best_ratio - _TOL or (
                        ratio < best_ratio + _TOL
                        and (leaving < 0 or basis[r] < basis[leaving])
                    ):
                        best_ratio = ratio
                        leaving = r
            if leaving < 0:
                raise SimplexError("LP is unbounded")
            _pivot(table, leaving, entering)
            coeff = z[entering]
            z[:n_cols] -= coeff * table[leaving, :n_cols]
            z[-1] -= coeff * table[leaving, -1]
            basis[leaving] = entering
            pivots += 1
            if pivots > max_pivots:
                raise SimplexError(f"pivot limit {max_pivots} exceeded")

    if n_art:
        phase1 = np.zeros(n_cols)
        phase1[n_var + n_slack:] = 1.0
        iterate(phase1, n_cols)
        residual = sum(table[r, -1] for r, b in enumerate(basis) if b >= n_var + n_slack)
        if residual > 1e-7:
            raise SimplexError("LP is infeasible")
        # drive any degenerate artificial out of the basis
        for r in range(n_rows):
            if basis[r] >= n_var + n_slack:
                for j in range(n_var + n_slack):
                    if abs(table[r, j]) > _TOL:
                        _pivot(table, r, j)
                        basis[r] = j
                        pivots += 1
                        break

    phase2 = np.zeros(n_cols)
    phase2[:n_var] = c
    iterate(phase2, n_var + n_slack)  # artificials may not re-enter

    x = np.zeros(n_cols)
    for r, b in enumerate(basis):
        x[b] = table[r, -1]
    solution = x[:n_var]
    return LpResult(x=solution, value=float(c @ solution), pivots=pivots)


def _pivot(table: np.ndarray, row: int, col: int) -> None:
    table[row] /= table[row, col]
    for r in range(table.shape[0]):
        if r != row and table[r, col] != 0.0:
            table[r] -= table[r, col] * table[row]
