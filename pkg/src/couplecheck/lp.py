"""Exact linear feasibility: is there an ``x >= 0`` with ``A x = b``?

The question is answered by the first phase of the simplex method, run in exact rational
arithmetic with Bland's rule, which cannot cycle. Every coupling-existence question in this
package reduces to it: the unknowns are the masses of the atoms of a coupling.
"""

from __future__ import annotations

import enum
import logging
import math
from collections.abc import Sequence
from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple

from . import errors
from .system import to_rational

log = logging.getLogger(__name__)


class Verdict(enum.Enum):
    FEASIBLE = "feasible"
    INFEASIBLE = "infeasible"


@dataclass(frozen=True)
class LinearSystem:
    """The constraints ``A x = b, x >= 0``, with a dense matrix ``A``.

    Parameters
    ----------
    matrix
        ``m`` rows of ``n`` coefficients.
    rhs
        the ``m`` right-hand sides.
    variable_names
        the ``n`` variable labels, only used for diagnostics.
    """

    matrix: tuple[tuple[Fraction, ...], ...]
    rhs: tuple[Fraction, ...]
    variable_names: tuple[str, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "matrix", tuple(tuple(to_rational(a) for a in row) for row in self.matrix))
        object.__setattr__(self, "rhs", tuple(to_rational(b) for b in self.rhs))
        object.__setattr__(self, "variable_names", tuple(self.variable_names))

    @property
    def shape(self) -> tuple[int, int]:
        return len(self.matrix), len(self.variable_names)

    def check_dimensions(self) -> None:
        m, n = self.shape
        if m < 1 or n < 1:
            msg = f"need at least one constraint and one variable, got {m}x{n}"
            raise errors.DimensionMismatch(msg)
        if len(self.rhs) != m:
            msg = f"{m} constraint rows but {len(self.rhs)} right-hand sides"
            raise errors.DimensionMismatch(msg)
        for i, row in enumerate(self.matrix):
            if len(row) != n:
                msg = f"row {i} has {len(row)} coefficients, expected {n}"
                raise errors.DimensionMismatch(msg)

    def is_solution(self, x: Sequence[Fraction]) -> bool:
        """Whether ``x`` is nonnegative and satisfies every constraint exactly."""
        if len(x) != self.shape[1] or any(v < 0 for v in x):
            return False
        return all(
            sum((a * v for a, v in zip(row, x, strict=True) if a), Fraction(0)) == b
            for row, b in zip(self.matrix, self.rhs, strict=True)
        )


class FeasibilityResult(NamedTuple):
    verdict: Verdict
    """Whether the constraints can be satisfied."""
    witness: tuple[Fraction, ...] | None = None
    """A solution, given iff the verdict is feasible. It is a vertex of the feasible polytope, but
    not any particular one."""

    @property
    def feasible(self) -> bool:
        return self.verdict is Verdict.FEASIBLE


def solve_feasibility(problem: LinearSystem) -> FeasibilityResult:
    """Decide whether ``{x >= 0 : A x = b}`` is empty, exactly.

    Redundant and inconsistent rows need no special treatment, every row gets an artificial
    variable. The result only depends on the input.

    Raises
    ------
    ~couplecheck.errors.DimensionMismatch
        if the shapes of matrix, right-hand side and variable names do not agree.
    """
    problem.check_dimensions()
    m, n = problem.shape

    # flip rows so that b >= 0.
    rows = [list(r) if b >= 0 else [-a for a in r] for r, b in zip(problem.matrix, problem.rhs, strict=True)]
    rhs = [abs(b) for b in problem.rhs]

    fixed = _presolve(rows, rhs)
    free = [j for j in range(n) if j not in fixed]
    log.debug("LP with %d rows, %d variables (%d fixed to zero by presolve)", m, n, len(fixed))

    if not free:
        feasible = all(b == 0 for b in rhs)
        witness = tuple(Fraction(0) for _ in range(n)) if feasible else None
        return _checked(problem, witness)

    values = _phase_one([[row[j] for j in free] for row in rows], rhs)
    if values is None:
        return FeasibilityResult(Verdict.INFEASIBLE)

    witness = [Fraction(0)] * n
    for k, j in enumerate(free):
        witness[j] = values[k]
    return _checked(problem, tuple(witness))


def _checked(problem: LinearSystem, witness: tuple[Fraction, ...] | None) -> FeasibilityResult:
    if witness is None:
        return FeasibilityResult(Verdict.INFEASIBLE)
    if not problem.is_solution(witness):
        msg = "simplex produced a witness that does not satisfy the constraints"
        raise RuntimeError(msg)
    return FeasibilityResult(Verdict.FEASIBLE, witness)


def _presolve(rows: list[list[Fraction]], rhs: list[Fraction]) -> set[int]:
    """Find the variables forced to zero by a row ``sum a_j x_j = 0`` with all ``a_j >= 0``."""
    fixed: set[int] = set()
    changed = True
    while changed:
        changed = False
        for row, b in zip(rows, rhs, strict=True):
            if b != 0:
                continue
            support = [j for j, a in enumerate(row) if a and j not in fixed]
            if support and (all(row[j] > 0 for j in support) or all(row[j] < 0 for j in support)):
                fixed.update(support)
                changed = True
    return fixed


def _phase_one(rows: list[list[Fraction]], rhs: list[Fraction]) -> list[Fraction] | None:
    """Minimize the sum of one artificial variable per row, with Bland's rule.

    Returns the values of the original variables if the minimum is zero, ``None`` otherwise.
    Artificial variables are dropped as soon as they leave the basis.

    The tableau is kept in integers: every row (and the objective row) only ever gets multiplied
    by positive integers, so all signs and zero tests read the same as in the rational tableau.
    """
    m, n = len(rows), len(rows[0])
    width = n + m

    # columns 0..n-1 are the original variables, n..n+m-1 the artificial ones, the last one the
    # right-hand side.
    tableau = [
        _integer_row([*row, *(Fraction(int(i == k)) for k in range(m)), b])
        for i, (row, b) in enumerate(zip(rows, rhs, strict=True))
    ]
    cost = _integer_row(
        [
            *(-sum((row[j] for row in rows), Fraction(0)) for j in range(n)),
            *(Fraction(0) for _ in range(m)),
            -sum(rhs, Fraction(0)),
        ]
    )
    basis = list(range(n, width))
    dropped: set[int] = set()

    n_pivots = 0
    while True:
        entering = next((j for j in range(width) if cost[j] < 0 and j not in dropped), None)
        if entering is None:
            break

        leaving = None
        for i, row in enumerate(tableau):
            a = row[entering]
            if a <= 0:
                continue
            if leaving is None:
                leaving = i
                continue
            best = tableau[leaving]
            # row[-1] / a against best[-1] / best[entering], both denominators positive.
            lhs, rhs_best = row[-1] * best[entering], best[-1] * a
            if lhs < rhs_best or (lhs == rhs_best and basis[i] < basis[leaving]):
                leaving = i
        if leaving is None:
            # cannot happen: the phase-one objective is bounded below by zero.
            msg = "phase-one objective is unbounded"
            raise RuntimeError(msg)

        _pivot(tableau, cost, leaving, entering)
        if basis[leaving] >= n:
            dropped.add(basis[leaving])
        basis[leaving] = entering
        n_pivots += 1

    log.debug("phase one finished after %d pivots, residual is zero: %s", n_pivots, cost[-1] == 0)
    if cost[-1] != 0:
        return None

    values = [Fraction(0)] * n
    for row, j in zip(tableau, basis, strict=True):
        if j < n:
            values[j] = Fraction(row[-1], row[j])
    return values


def _integer_row(row: Sequence[Fraction]) -> list[int]:
    """``row`` times the smallest positive integer that clears all denominators."""
    scale = math.lcm(*(a.denominator for a in row))
    return _reduced([a.numerator * (scale // a.denominator) for a in row])


def _reduced(row: list[int]) -> list[int]:
    g = math.gcd(*row)
    if g > 1:
        return [a // g for a in row]
    return row


def _pivot(tableau: list[list[int]], cost: list[int], r: int, s: int) -> None:
    """Pivot on row ``r``, column ``s`` in place, eliminating column ``s`` from every other row."""
    pivot_row = tableau[r]
    p = pivot_row[s]
    nonzero = [(j, a) for j, a in enumerate(pivot_row) if a]

    for i, row in enumerate([*tableau, cost]):
        f = row[s]
        if i == r or not f:
            continue
        scaled = [p * a for a in row]
        for j, a in nonzero:
            scaled[j] -= f * a
        row[:] = _reduced(scaled)
