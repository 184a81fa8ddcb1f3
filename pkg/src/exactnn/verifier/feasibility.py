"""Exact linear feasibility over the rationals.

Decides whether a conjunction of linear constraints (including strict ones)
has a solution, returning a witness point when it does. Free variables are
split into nonnegative pairs; strictness is handled without epsilon
constants by maximising a slack variable t added to every strict row: the
strict system is feasible exactly when the optimum of t (capped at 1) is
positive, and the maximiser is an interior witness for the strict rows.

The solver is a two-phase tableau simplex over ``fractions.Fraction`` with
Bland's rule, so it terminates on every input and never rounds.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from ..matrix import Scalar

COMPARATORS = ("<=", "<", ">=", ">", "==")


@dataclass(frozen=True)
class LinearConstraint:
    """coeffs . x  <comparator>  rhs."""

    coeffs: tuple
    comparator: str
    rhs: Scalar

    def __post_init__(self):
        object.__setattr__(self, "coeffs", tuple(self.coeffs))
        if self.comparator not in COMPARATORS:
            raise ValueError(f"unknown comparator: {self.comparator!r}")

    def holds(self, x) -> bool:
        value = sum(c * v for c, v in zip(self.coeffs, x))
        return {
            "<=": value <= self.rhs,
            "<": value < self.rhs,
            ">=": value >= self.rhs,
            ">": value > self.rhs,
            "==": value == self.rhs,
        }[self.comparator]


def _normalize(constraints):
    """Rewrite everything as (coeffs, rhs, strict) meaning coeffs.x (<|<=) rhs."""
    rows = []
    for con in constraints:
        a = [Fraction(c) for c in con.coeffs]
        b = Fraction(con.rhs)
        if con.comparator == "<=":
            rows.append((a, b, False))
        elif con.comparator == "<":
            rows.append((a, b, True))
        elif con.comparator == ">=":
            rows.append(([-c for c in a], -b, False))
        elif con.comparator == ">":
            rows.append(([-c for c in a], -b, True))
        else:  # ==
            rows.append((a, b, False))
            rows.append(([-c for c in a], -b, False))
    return rows


def _pivot(tableau, basis, row, col):
    piv = tableau[row][col]
    tableau[row] = [v / piv for v in tableau[row]]
    for r, line in enumerate(tableau):
        if r != row and line[col] != 0:
            factor = line[col]
            tableau[r] = [v - factor * p for v, p in zip(line, tableau[row])]
    basis[row] = col


def _simplex_min(tableau, basis, costs):
    """Minimise costs . y on {Ay = b, y >= 0} given a starting basis.

    ``tableau`` rows are [A | b] with b >= 0 under the current basis. Bland's
    rule (lowest eligible index) guarantees termination. Returns the optimal
    objective value; the tableau/basis are updated in place.
    """
    m = len(tableau)
    n = len(tableau[0]) - 1
    while True:
        # reduced costs: c_j - c_B . B^-1 A_j
        duals = [costs[basis[r]] for r in range(m)]
        entering = -1
        for j in range(n):
            reduced = costs[j] - sum(duals[r] * tableau[r][j] for r in range(m))
            if reduced < 0:
                entering = j
                break
        if entering < 0:
            return sum(duals[r] * tableau[r][n] for r in range(m))
        leaving = -1
        best = None
        for r in range(m):
            a = tableau[r][entering]
            if a > 0:
                ratio = tableau[r][n] / a
                if best is None or ratio < best or (ratio == best and basis[r] < basis[leaving]):
                    best = ratio
                    leaving = r
        if leaving < 0:
            raise RuntimeError("unbounded objective in feasibility subproblem")
        _pivot(tableau, basis, leaving, entering)


def find_feasible_point(num_vars: int, constraints) -> list | None:
    """A rational point satisfying every constraint, or None when infeasible."""
    rows = _normalize(constraints)
    if num_vars == 0:
        ok = all((b > 0 if strict else b >= 0) for _, b, strict in rows)
        return [] if ok else None
    any_strict = any(strict for _, _, strict in rows)

    # Variables: x_i = y[2i] - y[2i+1]; y[2*num_vars] = t when strict rows exist.
    width = 2 * num_vars + (1 if any_strict else 0)
    t_col = 2 * num_vars
    ineqs = []
    for a, b, strict in rows:
        line = [Fraction(0)] * width
        for i, c in enumerate(a):
            line[2 * i] = c
            line[2 * i + 1] = -c
        if strict:
            line[t_col] = Fraction(1)
        ineqs.append((line, b))
    if any_strict:
        cap = [Fraction(0)] * width
        cap[t_col] = Fraction(1)
        ineqs.append((cap, Fraction(1)))

    # Standard form: add one slack per row, flip rows to make rhs nonnegative,
    # then one artificial per row for the phase-1 basis.
    m = len(ineqs)
    total = width + m + m
    tableau = []
    basis = []
    for r, (line, b) in enumerate(ineqs):
        row = line + [Fraction(0)] * (m + m) + [b]
        row[width + r] = Fraction(1)  # slack
        if b < 0:
            row = [-v for v in row]
        row[width + m + r] = Fraction(1)  # artificial
        tableau.append(row)
        basis.append(width + m + r)

    phase1 = [Fraction(0)] * total
    for j in range(width + m, total):
        phase1[j] = Fraction(1)
    if _simplex_min(tableau, basis, phase1) > 0:
        return None

    # Drive leftover artificials out of the basis; drop redundant rows.
    for r in range(len(tableau) - 1, -1, -1):
        if basis[r] >= width + m:
            pivot_col = next(
                (j for j in range(width + m) if tableau[r][j] != 0), None
            )
            if pivot_col is None:
                del tableau[r]
                del basis[r]
            else:
                _pivot(tableau, basis, r, pivot_col)
    tableau = [row[: width + m] + [row[-1]] for row in tableau]

    if any_strict:
        phase2 = [Fraction(0)] * (width + m)
        phase2[t_col] = Fraction(-1)  # maximise t
        _simplex_min(tableau, basis, phase2)

    solution = [Fraction(0)] * (width + m)
    for r, col in enumerate(basis):
        solution[col] = tableau[r][-1]
    if any_strict and solution[t_col] <= 0:
        return None
    return [solution[2 * i] - solution[2 * i + 1] for i in range(num_vars)]
