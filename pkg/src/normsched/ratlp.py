"""Exact linear programming over ``fractions.Fraction``.

Two-phase primal simplex on a dense tableau with Bland's rule (lowest index
enters, ties in the ratio test leave by lowest basic index), so degenerate
problems terminate.  Variable bounds are handled by shifting, splitting free
variables and adding rows for upper bounds.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

OPTIMAL = "Optimal"
INFEASIBLE = "Infeasible"
UNBOUNDED = "Unbounded"

_RELS = {"<=": "<=", "≤": "<=", "=": "=", "==": "=", ">=": ">=", "≥": ">="}


@dataclass
class LinearProgram:
    """Minimize ``objective . v`` subject to ``(coeffs, rel, rhs)`` rows.

    ``coeffs`` may be a dense sequence or a ``{index: value}`` mapping.
    ``bounds`` holds ``(lower, upper)`` per variable (``None`` = unbounded);
    by default every variable is nonnegative.
    """

    objective: Sequence
    constraints: list = field(default_factory=list)
    bounds: list | None = None
    names: list | None = None

    def __post_init__(self):
        self.objective = [Fraction(c) for c in self.objective]
        n = len(self.objective)
        rows = []
        for coeffs, rel, rhs in self.constraints:
            if rel not in _RELS:
                raise ValueError(f"unknown relation {rel!r}")
            if isinstance(coeffs, dict):
                row = {int(k): Fraction(v) for k, v in coeffs.items() if v != 0}
            else:
                if len(coeffs) != n:
                    raise ValueError("constraint width does not match the objective")
                row = {k: Fraction(v) for k, v in enumerate(coeffs) if v != 0}
            if any(k < 0 or k >= n for k in row):
                raise ValueError("constraint refers to an unknown variable")
            rows.append((row, _RELS[rel], Fraction(rhs)))
        self.constraints = rows
        if self.bounds is None:
            self.bounds = [(Fraction(0), None)] * n
        if len(self.bounds) != n:
            raise ValueError("one bound pair per variable is required")
        self.bounds = [
            (None if lo is None else Fraction(lo), None if hi is None else Fraction(hi)) for lo, hi in self.bounds
        ]

    @property
    def num_vars(self) -> int:
        return len(self.objective)

    def add(self, coeffs, rel, rhs) -> None:
        self.constraints.append(LinearProgram([0] * self.num_vars, [(coeffs, rel, rhs)]).constraints[0])

    def value_of(self, assignment) -> Fraction:
        return sum((c * x for c, x in zip(self.objective, assignment)), Fraction(0))

    def violations(self, assignment) -> list[str]:
        """Constraints and bounds the assignment breaks (exact check)."""
        out = []
        for k, (row, rel, rhs) in enumerate(self.constraints):
            lhs = sum((v * assignment[j] for j, v in row.items()), Fraction(0))
            if (rel == "<=" and lhs > rhs) or (rel == ">=" and lhs < rhs) or (rel == "=" and lhs != rhs):
                out.append(f"row {k}: {lhs} {rel} {rhs} fails")
        for j, (lo, hi) in enumerate(self.bounds):
            if lo is not None and assignment[j] < lo:
                out.append(f"variable {j} below {lo}")
            if hi is not None and assignment[j] > hi:
                out.append(f"variable {j} above {hi}")
        return out


@dataclass
class LpSolution:
    status: str
    value: Fraction | None = None
    assignment: list | None = None
    basis: tuple = ()
    pivots: int = 0

    @property
    def optimal(self) -> bool:
        return self.status == OPTIMAL


class _Tableau:
    """Rows ``A x = b`` with an explicit basis; column ``n`` is the rhs."""

    def __init__(self, rows, rhs, basis, ncols):
        self.rows = [r + [b] for r, b in zip(rows, rhs)]
        self.basis = list(basis)
        self.n = ncols
        self.pivots = 0

    def pivot(self, r: int, c: int, cost: list | None = None) -> None:
        prow = self.rows[r]
        inv = 1 / prow[c]
        if inv != 1:
            prow = [v * inv if v else v for v in prow]
            self.rows[r] = prow
        nz = [k for k, v in enumerate(prow) if v]
        for i, row in enumerate(self.rows):
            if i == r:
                continue
            f = row[c]
            if f:
                for k in nz:
                    row[k] -= f * prow[k]
        if cost is not None:
            f = cost[c]
            if f:
                for k in nz:
                    cost[k] -= f * prow[k]
        self.basis[r] = c
        self.pivots += 1

    def reduced_costs(self, c_full: list) -> list:
        cost = list(c_full) + [Fraction(0)]
        for r, b in enumerate(self.basis):
            f = cost[b]
            if f:
                for k, v in enumerate(self.rows[r]):
                    if v:
                        cost[k] -= f * v
        return cost

    def run(self, cost: list, allowed: int) -> str:
        """Minimize; ``cost`` is the reduced-cost row (last entry = -value)."""
        while True:
            enter = next((k for k in range(allowed) if cost[k] < 0), None)
            if enter is None:
                return OPTIMAL
            best = None
            for r, row in enumerate(self.rows):
                a = row[enter]
                if a > 0:
                    ratio = row[-1] / a
                    key = (ratio, self.basis[r])
                    if best is None or key < best[0]:
                        best = (key, r)
            if best is None:
                return UNBOUNDED
            self.pivot(best[1], enter, cost)


def _standard_form(lp: LinearProgram):
    """Map to ``min c'x'`` with ``x' >= 0`` and equality rows.

    Returns (columns of original variables as (col, sign) lists plus shift,
    rows, rhs, c, number of structural columns, slack basis hints).
    """
    cols = []  # per original variable: (shift, [(col, sign)])
    ncol = 0
    extra_rows = []
    for j, (lo, hi) in enumerate(lp.bounds):
        if lo is not None:
            cols.append((lo, [(ncol, 1)]))
            if hi is not None:
                extra_rows.append(({ncol: Fraction(1)}, "<=", hi - lo))
            ncol += 1
        elif hi is not None:
            cols.append((hi, [(ncol, -1)]))
            ncol += 1
        else:
            cols.append((Fraction(0), [(ncol, 1), (ncol + 1, -1)]))
            ncol += 2
    rows = []
    for row, rel, rhs in lp.constraints:
        new = {}
        b = rhs
        for j, v in row.items():
            shift, parts = cols[j]
            b -= v * shift
            for c, s in parts:
                new[c] = new.get(c, Fraction(0)) + s * v
        rows.append((new, rel, b))
    rows += extra_rows
    c = [Fraction(0)] * ncol
    const = Fraction(0)
    for j, v in enumerate(lp.objective):
        shift, parts = cols[j]
        const += v * shift
        for col, s in parts:
            c[col] += s * v
    return cols, rows, c, const, ncol


def solve_lp(lp: LinearProgram, basis: Sequence[int] | None = None) -> LpSolution:
    """Exact optimum of ``lp`` (status Optimal, Infeasible or Unbounded).

    ``basis`` (from a previous ``LpSolution``) warm-starts phase 2 when it is
    still a feasible basis; otherwise the solve starts cold.
    """
    cols, rows, c, const, nstruct = _standard_form(lp)
    m = len(rows)
    # slack/surplus columns
    ncol = nstruct
    dense = []
    rhs = []
    slack_of = {}
    for i, (row, rel, b) in enumerate(rows):
        sign = 1
        if b < 0:
            sign, b = -1, -b
            rel = {"<=": ">=", ">=": "<=", "=": "="}[rel]
        entries = {k: sign * v for k, v in row.items()}
        if rel != "=":
            entries[ncol] = Fraction(1 if rel == "<=" else -1)
            slack_of[i] = (ncol, rel == "<=")
            ncol += 1
        dense.append(entries)
        rhs.append(b)
    nreal = ncol
    # artificials for rows without a usable slack
    start_basis = []
    for i in range(m):
        if i in slack_of and slack_of[i][1]:
            start_basis.append(slack_of[i][0])
        else:
            dense[i][ncol] = Fraction(1)
            start_basis.append(ncol)
            ncol += 1
    full = [[e.get(k, Fraction(0)) for k in range(ncol)] for e in dense]
    tab = _Tableau(full, rhs, start_basis, ncol)
    c_full = c + [Fraction(0)] * (ncol - nstruct)

    warm = False
    if basis is not None and len(basis) == m and all(0 <= b < nreal for b in basis):
        warm = _try_basis(tab, list(basis))
    if not warm:
        tab = _Tableau(full, rhs, start_basis, ncol)
        if ncol > nreal:
            phase1 = [Fraction(0)] * nreal + [Fraction(1)] * (ncol - nreal)
            cost = tab.reduced_costs(phase1)
            tab.run(cost, ncol)
            if -cost[-1] != 0:
                return LpSolution(INFEASIBLE, pivots=tab.pivots)
            _drive_out_artificials(tab, nreal)
    cost = tab.reduced_costs(c_full)
    for k in range(nreal, ncol):
        cost[k] = Fraction(0)
    status = tab.run(cost, nreal)
    if status == UNBOUNDED:
        return LpSolution(UNBOUNDED, pivots=tab.pivots)
    x = [Fraction(0)] * ncol
    for r, b in enumerate(tab.basis):
        x[b] = tab.rows[r][-1]
    assignment = []
    for shift, parts in cols:
        assignment.append(shift + sum((s * x[col] for col, s in parts), Fraction(0)))
    value = lp.value_of(assignment)
    return LpSolution(OPTIMAL, value, assignment, tuple(tab.basis), tab.pivots)


def _try_basis(tab: _Tableau, basis: list[int]) -> bool:
    for r, col in enumerate(basis):
        piv = next((i for i in range(r, len(tab.rows)) if tab.rows[i][col] != 0), None)
        if piv is None:
            return False
        tab.rows[r], tab.rows[piv] = tab.rows[piv], tab.rows[r]
        tab.basis[r], tab.basis[piv] = tab.basis[piv], tab.basis[r]
        tab.pivot(r, col)
    return all(row[-1] >= 0 for row in tab.rows)


def _drive_out_artificials(tab: _Tableau, nreal: int) -> None:
    """Pivot zero-valued artificials out of the basis; drop redundant rows."""
    r = 0
    while r < len(tab.rows):
        if tab.basis[r] >= nreal:
            row = tab.rows[r]
            col = next((k for k in range(nreal) if row[k] != 0), None)
            if col is None:
                del tab.rows[r]
                del tab.basis[r]
                continue
            tab.pivot(r, col)
        r += 1
    for row in tab.rows:
        for k in range(nreal, tab.n):
            row[k] = Fraction(0)


def dump_tableau(lp: LinearProgram) -> str:
    """Human-readable listing of the LP rows (debug aid)."""
    lines = ["min " + " + ".join(f"{c}*x{j}" for j, c in enumerate(lp.objective) if c)]
    for row, rel, rhs in lp.constraints:
        lhs = " + ".join(f"{v}*x{j}" for j, v in sorted(row.items())) or "0"
        lines.append(f"  {lhs} {rel} {rhs}")
    for j, (lo, hi) in enumerate(lp.bounds):
        if (lo, hi) != (0, None):
            lines.append(f"  {lo} <= x{j} <= {hi}")
    return "\n".join(lines)
