"""Exact two-phase simplex over Fractions.

Variables are nonnegative. Rows are sparse ``{column: coefficient}`` dicts.
Pricing is Dantzig's rule until a run of degenerate pivots, after which the
solver stays on Bland's rule, which cannot cycle.
"""
from fractions import Fraction
from typing import Dict, List, Literal, Mapping, Optional, Tuple

import structlog

from .config import get_config
from .errors import NonConvergenceError
from .exact import ExactModel, Rational

logger = structlog.get_logger()

Row = Dict[int, Fraction]


class LPResult(ExactModel):
    status: Literal["optimal", "infeasible", "unbounded"]
    value: Optional[Rational] = None
    x: Tuple[Rational, ...] = ()
    iterations: int = 0

    @property
    def optimal(self) -> bool:
        return self.status == "optimal"


class LinearProgram:
    """Builder for ``minimize c.x`` subject to linear rows and ``x >= 0``."""

    def __init__(self, n_vars: int):
        self.n_vars = n_vars
        self._rows: List[Tuple[Row, str, Fraction]] = []
        self._logger = logger.bind(component="lp")

    def _add(self, coeffs: Mapping[int, object], sense: str, rhs: object) -> None:
        row = {j: Fraction(v) for j, v in coeffs.items() if v != 0}
        self._rows.append((row, sense, Fraction(rhs)))

    def add_le(self, coeffs: Mapping[int, object], rhs: object) -> None:
        self._add(coeffs, "<=", rhs)

    def add_ge(self, coeffs: Mapping[int, object], rhs: object) -> None:
        self._add(coeffs, ">=", rhs)

    def add_eq(self, coeffs: Mapping[int, object], rhs: object) -> None:
        self._add(coeffs, "=", rhs)

    @property
    def n_rows(self) -> int:
        return len(self._rows)

    def minimize(self, objective: Mapping[int, object]) -> LPResult:
        cost = {j: Fraction(v) for j, v in objective.items() if v != 0}
        result = _Simplex(self.n_vars, self._rows).solve(cost)
        self._logger.debug(
            "lp_solved",
            status=result.status,
            rows=self.n_rows,
            columns=self.n_vars,
            iterations=result.iterations,
        )
        return result

    def maximize(self, objective: Mapping[int, object]) -> LPResult:
        result = self.minimize({j: -Fraction(v) for j, v in objective.items()})
        if result.value is not None:
            result = result.model_copy(update={"value": -result.value})
        return result


class _Simplex:
    def __init__(self, n_vars: int, constraints: List[Tuple[Row, str, Fraction]]):
        lp_config = get_config().lp
        self.max_iterations = lp_config.max_iterations
        self.bland_after = lp_config.bland_after_degenerate
        self.n_vars = n_vars
        self.rows: List[Row] = []
        self.rhs: List[Fraction] = []
        self.basis: List[int] = []
        self.artificial: set = set()
        self.iterations = 0

        column = n_vars
        for coeffs, sense, b in constraints:
            row = dict(coeffs)
            if b < 0:
                row = {j: -v for j, v in row.items()}
                b = -b
                sense = {"<=": ">=", ">=": "<=", "=": "="}[sense]
            if sense == "<=":
                row[column] = Fraction(1)
                self.basis.append(column)
                column += 1
            else:
                if sense == ">=":
                    row[column] = Fraction(-1)
                    column += 1
                row[column] = Fraction(1)
                self.artificial.add(column)
                self.basis.append(column)
                column += 1
            self.rows.append(row)
            self.rhs.append(b)
        self.n_columns = column

    def _pivot(self, r: int, e: int, d: Row, value: List[Fraction]) -> None:
        row = self.rows[r]
        piv = row[e]
        if piv != 1:
            row = {j: v / piv for j, v in row.items()}
            self.rows[r] = row
            self.rhs[r] /= piv
        for i, other in enumerate(self.rows):
            if i == r or e not in other:
                continue
            f = other[e]
            for j, v in row.items():
                nv = other.get(j, 0) - f * v
                if nv:
                    other[j] = nv
                else:
                    other.pop(j, None)
            self.rhs[i] -= f * self.rhs[r]
        if e in d:
            f = d[e]
            for j, v in row.items():
                nv = d.get(j, 0) - f * v
                if nv:
                    d[j] = nv
                else:
                    d.pop(j, None)
            value[0] += f * self.rhs[r]
        self.basis[r] = e

    def _run(self, d: Row, value: List[Fraction], allowed) -> str:
        degenerate_streak = 0
        bland = False
        while True:
            candidates = [j for j, v in d.items() if v < 0 and allowed(j)]
            if not candidates:
                return "optimal"
            if bland:
                e = min(candidates)
            else:
                e = min(candidates, key=lambda j: (d[j], j))
            best = None
            for i, row in enumerate(self.rows):
                a = row.get(e)
                if a is not None and a > 0:
                    key = (self.rhs[i] / a, self.basis[i])
                    if best is None or key < best[0]:
                        best = (key, i)
            if best is None:
                return "unbounded"
            r = best[1]
            degenerate_streak = degenerate_streak + 1 if self.rhs[r] == 0 else 0
            if degenerate_streak > self.bland_after:
                bland = True
            self._pivot(r, e, d, value)
            self.iterations += 1
            if self.iterations > self.max_iterations:
                raise NonConvergenceError(
                    "simplex iteration cap exceeded",
                    {"iterations": self.iterations, "rows": len(self.rows)},
                )

    def _phase_one(self) -> bool:
        if not self.artificial:
            return True
        d: Row = {}
        value = [Fraction(0)]
        for i, b in enumerate(self.basis):
            if b in self.artificial:
                value[0] += self.rhs[i]
                for j, v in self.rows[i].items():
                    if j not in self.artificial:
                        d[j] = d.get(j, 0) - v
        d = {j: v for j, v in d.items() if v}
        # minimizing sum of artificials; value tracks that sum
        self._run(d, value, lambda j: j not in self.artificial)
        if value[0] != 0:
            return False

        i = 0
        while i < len(self.rows):
            if self.basis[i] in self.artificial:
                row = self.rows[i]
                e = next((j for j in sorted(row) if j not in self.artificial), None)
                if e is None:
                    del self.rows[i]
                    del self.rhs[i]
                    del self.basis[i]
                    continue
                self._pivot(i, e, {}, [Fraction(0)])
            i += 1
        for row in self.rows:
            for j in [j for j in row if j in self.artificial]:
                del row[j]
        return True

    def solve(self, cost: Row) -> LPResult:
        if not self._phase_one():
            return LPResult(status="infeasible", iterations=self.iterations)

        d: Row = dict(cost)
        value = [Fraction(0)]
        for i, b in enumerate(self.basis):
            cb = cost.get(b)
            if cb:
                value[0] += cb * self.rhs[i]
                for j, v in self.rows[i].items():
                    nv = d.get(j, 0) - cb * v
                    if nv:
                        d[j] = nv
                    else:
                        d.pop(j, None)
        status = self._run(d, value, lambda j: j not in self.artificial)
        if status == "unbounded":
            return LPResult(status="unbounded", iterations=self.iterations)

        x = [Fraction(0)] * self.n_vars
        for i, b in enumerate(self.basis):
            if b < self.n_vars:
                x[b] = self.rhs[i]
        return LPResult(status="optimal", value=value[0], x=tuple(x), iterations=self.iterations)
