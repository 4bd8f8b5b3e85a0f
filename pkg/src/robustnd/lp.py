"""Exact rational linear programming at desk scale.

Dense two-phase simplex over exact rationals.  Dantzig pricing is used while
progress is made; after a run of degenerate pivots the engine switches to
Bland's rule, which guarantees termination, and switches back on the next
improving pivot.  Tie-breaking is always lowest index, so results are fully
deterministic.

Certificates
------------
Every result is certified and self-checked before it is returned:

* ``optimal``: the primal vector is a basic feasible point, the dual vector
  (one multiplier per row) satisfies sign feasibility and complementary
  slackness, and the dual objective equals the primal objective exactly.
  Dual sign convention for a minimization problem: ``>= 0`` on ``>=`` rows,
  ``<= 0`` on ``<=`` rows, free on ``=`` rows; for maximization the signs
  flip.  Reduced costs ``c_j - sum_i y_i a_ij`` pin variables to their
  finite bounds under the usual complementary-slackness rules.
* ``infeasible``: a Farkas ray with one entry per row (``>= 0`` on ``<=``
  rows, ``<= 0`` on ``>=`` rows, free on ``=`` rows).  Aggregating the rows
  with these weights yields a single inequality whose minimum over the
  variable box exceeds its right-hand side.
* ``unbounded``: a feasible point plus an improving ray that respects all
  rows and bounds.

The tableau runs on ``gmpy2.mpq`` when available (a drop-in exact rational
about an order of magnitude faster than ``fractions.Fraction``); all inputs
and outputs are ``Fraction`` and :func:`check_certificate` re-verifies every
claim in plain ``Fraction`` arithmetic with no pivoting.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Mapping, Sequence

try:  # exact rational scalar for the tableau
    from gmpy2 import mpq as _Q
except ImportError:  # pragma: no cover - gmpy2 is a declared dependency
    _Q = Fraction

_Q0 = _Q(0)
_Q1 = _Q(1)

ZERO = Fraction(0)
ONE = Fraction(1)

LE = "<="
EQ = "="
GE = ">="

MIN = "min"
MAX = "max"

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"

_BLAND_TRIGGER = 20  # consecutive degenerate pivots before Bland's rule engages


class LpError(Exception):
    """Base class for LP engine errors."""


class LpFormatError(LpError):
    """Malformed input: inconsistent dimensions or unknown senses."""


class LpInternalError(LpError):
    """A produced certificate failed its self-check (engine bug guard)."""


def _q(x: Fraction):
    return _Q(x.numerator, x.denominator)


def _fr(x) -> Fraction:
    return Fraction(int(x.numerator), int(x.denominator))


@dataclass(frozen=True)
class LpRow:
    """Sparse row ``sum coeffs . x  (<=|=|>=)  rhs``."""

    coeffs: tuple[tuple[int, Fraction], ...]
    sense: str
    rhs: Fraction


@dataclass(frozen=True)
class LinearProgram:
    sense: str
    objective: tuple[Fraction, ...]
    rows: tuple[LpRow, ...]
    lower: tuple[Fraction | None, ...]
    upper: tuple[Fraction | None, ...]

    @property
    def num_vars(self) -> int:
        return len(self.objective)


@dataclass(frozen=True)
class LpResult:
    status: str
    x: tuple[Fraction, ...] | None = None
    objective: Fraction | None = None
    dual: tuple[Fraction, ...] | None = None
    farkas_ray: tuple[Fraction, ...] | None = None
    unbounded_point: tuple[Fraction, ...] | None = None
    unbounded_direction: tuple[Fraction, ...] | None = None


class LpBuilder:
    """Convenience builder with named variables and sparse rows."""

    def __init__(self, sense: str = MIN):
        if sense not in (MIN, MAX):
            raise LpFormatError(f"unknown objective sense {sense!r}")
        self.sense = sense
        self._obj: list[Fraction] = []
        self._lower: list[Fraction | None] = []
        self._upper: list[Fraction | None] = []
        self._names: list[str] = []
        self._rows: list[LpRow] = []

    def add_var(
        self,
        name: str = "",
        *,
        lower: Fraction | None = ZERO,
        upper: Fraction | None = None,
        objective: Fraction = ZERO,
    ) -> int:
        self._obj.append(objective)
        self._lower.append(lower)
        self._upper.append(upper)
        self._names.append(name or f"x{len(self._names)}")
        return len(self._obj) - 1

    def add_row(
        self,
        coeffs: Mapping[int, Fraction] | Sequence[tuple[int, Fraction]],
        sense: str,
        rhs: Fraction,
    ) -> int:
        if sense not in (LE, EQ, GE):
            raise LpFormatError(f"unknown row sense {sense!r}")
        items = coeffs.items() if isinstance(coeffs, Mapping) else coeffs
        cleaned = tuple(sorted((j, v) for j, v in items if v != 0))
        for j, _ in cleaned:
            if not (0 <= j < len(self._obj)):
                raise LpFormatError(f"row references unknown variable {j}")
        self._rows.append(LpRow(cleaned, sense, rhs))
        return len(self._rows) - 1

    def set_objective(self, j: int, value: Fraction) -> None:
        self._obj[j] = value

    def build(self) -> LinearProgram:
        return LinearProgram(
            sense=self.sense,
            objective=tuple(self._obj),
            rows=tuple(self._rows),
            lower=tuple(self._lower),
            upper=tuple(self._upper),
        )


def _validate(lp: LinearProgram) -> None:
    n = lp.num_vars
    if lp.sense not in (MIN, MAX):
        raise LpFormatError(f"unknown objective sense {lp.sense!r}")
    if len(lp.lower) != n or len(lp.upper) != n:
        raise LpFormatError("bound vectors do not match the variable count")
    for i, row in enumerate(lp.rows):
        if row.sense not in (LE, EQ, GE):
            raise LpFormatError(f"row {i} has unknown sense {row.sense!r}")
        for j, _ in row.coeffs:
            if not (0 <= j < n):
                raise LpFormatError(f"row {i} references unknown variable {j}")


# Column translations to the nonnegative standard form.
_SHIFT = 0  # x = l + y
_NEGATE = 1  # x = u - y
_SPLIT = 2  # x = y_pos - y_neg


class ParametricSolver:
    """Simplex solver that can re-optimize after objective changes.

    The constraint system is converted and factored once; subsequent calls
    with a new objective restart the primal simplex from the last basis.
    """

    def __init__(self, lp: LinearProgram):
        _validate(lp)
        self.lp = lp
        self._minimize = lp.sense == MIN
        self._build_standard_form()
        self._solved = False
        self._feasible_basis = False
        self._infeasible_result: LpResult | None = None

    # -- standard form -------------------------------------------------

    def _build_standard_form(self) -> None:
        lp = self.lp
        n = lp.num_vars
        self._trans: list[tuple[int, Fraction | None, int]] = []  # (kind, anchor, col)
        cols = 0
        for j in range(n):
            lo, up = lp.lower[j], lp.upper[j]
            if lo is not None:
                self._trans.append((_SHIFT, lo, cols))
                cols += 1
            elif up is not None:
                self._trans.append((_NEGATE, up, cols))
                cols += 1
            else:
                self._trans.append((_SPLIT, None, cols))
                cols += 2
        self._n_struct = cols

        # std rows: user rows first, then y_j <= u_j - l_j for doubly bounded
        # variables.  Each std row: (dense coeffs over struct cols, sense, rhs).
        std_rows: list[tuple[dict[int, object], str, object]] = []
        for row in lp.rows:
            coeffs: dict[int, object] = {}
            rhs = _q(row.rhs)
            for j, v in row.coeffs:
                kind, anchor, col = self._trans[j]
                qv = _q(v)
                if kind == _SHIFT:
                    coeffs[col] = coeffs.get(col, _Q0) + qv
                    rhs -= qv * _q(anchor)
                elif kind == _NEGATE:
                    coeffs[col] = coeffs.get(col, _Q0) - qv
                    rhs -= qv * _q(anchor)
                else:
                    coeffs[col] = coeffs.get(col, _Q0) + qv
                    coeffs[col + 1] = coeffs.get(col + 1, _Q0) - qv
            std_rows.append((coeffs, row.sense, rhs))
        self._n_user_rows = len(lp.rows)
        self._bound_row_vars: list[int] = []
        for j in range(n):
            lo, up = lp.lower[j], lp.upper[j]
            if lo is not None and up is not None:
                col = self._trans[j][2]
                std_rows.append(({col: _Q1}, LE, _q(up - lo)))
                self._bound_row_vars.append(j)

        m = len(std_rows)
        n_slack = sum(1 for _, sense, _ in std_rows if sense != EQ)
        self._n_slack = n_slack
        self._slack_col_of_row: list[int | None] = [None] * m
        self._art_col_of_row: list[int | None] = [None] * m
        self._flip: list[bool] = [False] * m

        slack_base = self._n_struct
        next_slack = slack_base
        # First pass: assign slack columns and flips.
        sense_sign: list[int] = [0] * m  # slack/surplus coefficient before flip
        for i, (_, sense, rhs) in enumerate(std_rows):
            if sense != EQ:
                self._slack_col_of_row[i] = next_slack
                sense_sign[i] = 1 if sense == LE else -1
                next_slack += 1
            self._flip[i] = rhs < 0
        art_base = slack_base + n_slack
        next_art = art_base
        init_col: list[int] = [0] * m
        for i in range(m):
            coef = sense_sign[i] * (-1 if self._flip[i] else 1)
            if coef == 1:
                init_col[i] = self._slack_col_of_row[i]  # type: ignore[assignment]
            else:
                self._art_col_of_row[i] = next_art
                init_col[i] = next_art
                next_art += 1
        self._n_art = next_art - art_base
        self._art_base = art_base
        self._init_col = init_col
        total = art_base + self._n_art

        # Dense tableau rows with rhs in the last position.
        tableau: list[list] = []
        for i, (coeffs, sense, rhs) in enumerate(std_rows):
            dense = [_Q0] * (total + 1)
            sign = -1 if self._flip[i] else 1
            for col, v in coeffs.items():
                if v:
                    dense[col] = sign * v
            sc = self._slack_col_of_row[i]
            if sc is not None:
                dense[sc] = _Q(sense_sign[i] * sign)
            ac = self._art_col_of_row[i]
            if ac is not None:
                dense[ac] = _Q1
            dense[total] = sign * rhs
            tableau.append(dense)
        self._tableau = tableau
        self._total_cols = total
        self._basis = [init_col[i] for i in range(m)]
        self._row_ids = list(range(m))  # original std row index of each tableau row

    def _struct_costs(self, objective: Sequence[Fraction]) -> list:
        """Phase-2 costs over structural columns (sign-adjusted for max)."""
        costs = [_Q0] * self._total_cols
        sgn = 1 if self._minimize else -1
        for j, c in enumerate(objective):
            if c == 0:
                continue
            kind, _, col = self._trans[j]
            qc = _Q(sgn) * _q(c)
            if kind == _SHIFT:
                costs[col] += qc
            elif kind == _NEGATE:
                costs[col] -= qc
            else:
                costs[col] += qc
                costs[col + 1] -= qc
        return costs

    # -- simplex core ----------------------------------------------------

    def _pivot(self, prow: int, pcol: int, zrow: list) -> None:
        T = self._tableau
        row = T[prow]
        piv = row[pcol]
        if piv != 1:
            inv = _Q1 / piv
            T[prow] = row = [v * inv if v else v for v in row]
        for i, other in enumerate(T):
            if i == prow:
                continue
            f = other[pcol]
            if f:
                T[i] = [a - f * b if b else a for a, b in zip(other, row)]
        f = zrow[pcol]
        if f:
            zrow[:] = [a - f * b if b else a for a, b in zip(zrow, row)]
        self._basis[prow] = pcol

    def _run_simplex(self, zrow: list, allowed_end: int) -> str:
        """Minimize c_B-relative costs; returns 'optimal' or 'unbounded'.

        ``zrow`` holds reduced costs (rhs slot ignored); columns with index
        >= allowed_end (the artificials) never enter the basis.
        """
        T = self._tableau
        rhs_idx = self._total_cols
        degenerate_streak = 0
        bland = False
        pivots = 0
        while True:
            pivots += 1
            if pivots > 1_000_000:  # Bland's rule makes this unreachable
                raise LpInternalError("pivot limit exceeded")
            pcol = -1
            if bland:
                for j in range(allowed_end):
                    if zrow[j] < 0:
                        pcol = j
                        break
            else:
                best = _Q0
                for j in range(allowed_end):
                    v = zrow[j]
                    if v < best:
                        best = v
                        pcol = j
            if pcol < 0:
                return OPTIMAL
            prow = -1
            best_ratio = None
            for i, row in enumerate(T):
                a = row[pcol]
                if a > 0:
                    ratio = row[rhs_idx] / a
                    if (
                        best_ratio is None
                        or ratio < best_ratio
                        or (ratio == best_ratio and self._basis[i] < self._basis[prow])
                    ):
                        best_ratio = ratio
                        prow = i
            if prow < 0:
                self._unbounded_col = pcol
                return UNBOUNDED
            if best_ratio == 0:
                degenerate_streak += 1
                if degenerate_streak >= _BLAND_TRIGGER:
                    bland = True
            else:
                degenerate_streak = 0
                bland = False
            self._pivot(prow, pcol, zrow)

    def _reduced_costs(self, costs: list) -> list:
        zrow = list(costs) + [_Q0]
        T = self._tableau
        for i, col in enumerate(self._basis):
            cb = costs[col]
            if cb:
                row = T[i]
                zrow[:] = [a - cb * b if b else a for a, b in zip(zrow, row)]
        return zrow

    def _phase_one(self) -> bool:
        """Returns True if a feasible basis was reached."""
        if self._n_art == 0:
            self._feasible_basis = True
            return True
        costs = [_Q0] * self._total_cols
        for k in range(self._n_art):
            costs[self._art_base + k] = _Q1
        zrow = self._reduced_costs(costs)
        status = self._run_simplex(zrow, allowed_end=self._art_base)
        if status != OPTIMAL:  # pragma: no cover - phase 1 is bounded below
            raise LpInternalError("phase 1 cannot be unbounded")
        value = sum(
            (self._tableau[i][self._total_cols] for i, c in enumerate(self._basis) if c >= self._art_base),
            _Q0,
        )
        if value > 0:
            self._phase1_costs = costs
            return False
        # Drive artificials out of the basis; delete rows that became 0 = 0.
        for i in reversed(range(len(self._basis))):
            if self._basis[i] < self._art_base:
                continue
            row = self._tableau[i]
            pcol = next((j for j in range(self._art_base) if row[j]), None)
            if pcol is None:
                del self._tableau[i]
                del self._basis[i]
                del self._row_ids[i]
            else:
                self._pivot(i, pcol, zrow)
        self._feasible_basis = True
        return True

    def _dual_std(self, costs: list) -> list:
        """Multipliers over all original std rows for the given cost vector."""
        T = self._tableau
        m_std = self._n_user_rows + len(self._bound_row_vars)
        y = [_Q0] * m_std
        cb = [(i, costs[col]) for i, col in enumerate(self._basis) if costs[col]]
        for r in range(m_std):
            col = self._init_col[r]
            y[r] = sum((c * T[i][col] for i, c in cb), _Q0)
        return y

    def _user_dual(self, y_std: list) -> tuple[Fraction, ...]:
        sgn = 1 if self._minimize else -1
        out = []
        for i in range(self._n_user_rows):
            v = -y_std[i] if self._flip[i] else y_std[i]
            out.append(Fraction(sgn) * _fr(v))
        return tuple(out)

    def _user_x(self) -> tuple[Fraction, ...]:
        xstd = [_Q0] * self._total_cols
        rhs_idx = self._total_cols
        for i, col in enumerate(self._basis):
            xstd[col] = self._tableau[i][rhs_idx]
        out = []
        for kind, anchor, col in self._trans:
            if kind == _SHIFT:
                out.append(anchor + _fr(xstd[col]))
            elif kind == _NEGATE:
                out.append(anchor - _fr(xstd[col]))
            else:
                out.append(_fr(xstd[col]) - _fr(xstd[col + 1]))
        return tuple(out)

    def _user_direction(self, pcol: int) -> tuple[Fraction, ...]:
        """Improving ray from an unbounded entering column."""
        delta = [_Q0] * self._total_cols
        delta[pcol] = _Q1
        rhs_idx = self._total_cols
        for i, col in enumerate(self._basis):
            v = self._tableau[i][pcol]
            if v:
                delta[col] -= v
        out = []
        for kind, _, col in self._trans:
            if kind == _SHIFT:
                out.append(_fr(delta[col]))
            elif kind == _NEGATE:
                out.append(-_fr(delta[col]))
            else:
                out.append(_fr(delta[col]) - _fr(delta[col + 1]))
        return tuple(out)

    # -- public API ------------------------------------------------------

    def solve(self, objective: Sequence[Fraction] | None = None) -> LpResult:
        """Solve with the stored constraints; ``objective`` overrides the
        program's objective vector (same sense) and restarts from the last
        feasible basis when one is available."""
        obj = tuple(objective) if objective is not None else self.lp.objective
        if len(obj) != self.lp.num_vars:
            raise LpFormatError("objective length does not match variable count")

        if self._infeasible_result is not None:
            return self._infeasible_result

        empty = _box_empty_var(self.lp)
        if empty is not None:
            result = LpResult(status=INFEASIBLE, farkas_ray=tuple(ZERO for _ in self.lp.rows))
            self._infeasible_result = result
            self._check(result, obj)
            return result

        if not self._feasible_basis:
            if not self._phase_one():
                y_std = self._dual_std(self._phase1_costs)
                ray = []
                for i in range(self._n_user_rows):
                    w = -y_std[i] if self._flip[i] else y_std[i]
                    ray.append(-_fr(w))
                result = LpResult(status=INFEASIBLE, farkas_ray=tuple(ray))
                self._infeasible_result = result
                self._check(result, obj)
                return result

        costs = self._struct_costs(obj)
        zrow = self._reduced_costs(costs)
        status = self._run_simplex(zrow, allowed_end=self._art_base)
        if status == UNBOUNDED:
            point = self._user_x()
            direction = self._user_direction(self._unbounded_col)
            result = LpResult(
                status=UNBOUNDED, unbounded_point=point, unbounded_direction=direction
            )
            self._check(result, obj)
            return result

        x = self._user_x()
        value = sum((c * v for c, v in zip(obj, x)), ZERO)
        dual = self._user_dual(self._dual_std(costs))
        result = LpResult(status=OPTIMAL, x=x, objective=value, dual=dual)
        self._check(result, obj)
        return result

    def _check(self, result: LpResult, obj: tuple[Fraction, ...]) -> None:
        lp = self.lp
        if obj != lp.objective:
            lp = LinearProgram(lp.sense, obj, lp.rows, lp.lower, lp.upper)
        if not check_certificate(lp, result):
            raise LpInternalError(f"result failed self-certification: {result.status}")


def solve(lp: LinearProgram) -> LpResult:
    """Solve an LP exactly; the result always passes :func:`check_certificate`."""
    return ParametricSolver(lp).solve()


# ---------------------------------------------------------------------------
# Certificate checking: pure rational arithmetic, no pivoting.
# ---------------------------------------------------------------------------


def _box_empty_var(lp: LinearProgram) -> int | None:
    for j in range(lp.num_vars):
        lo, up = lp.lower[j], lp.upper[j]
        if lo is not None and up is not None and lo > up:
            return j
    return None


def _row_value(row: LpRow, x: Sequence[Fraction]) -> Fraction:
    return sum((v * x[j] for j, v in row.coeffs), ZERO)


def _primal_feasible(lp: LinearProgram, x: Sequence[Fraction]) -> bool:
    if len(x) != lp.num_vars:
        return False
    for j, xv in enumerate(x):
        lo, up = lp.lower[j], lp.upper[j]
        if lo is not None and xv < lo:
            return False
        if up is not None and xv > up:
            return False
    for row in lp.rows:
        val = _row_value(row, x)
        if row.sense == LE and val > row.rhs:
            return False
        if row.sense == GE and val < row.rhs:
            return False
        if row.sense == EQ and val != row.rhs:
            return False
    return True


def _check_optimal(lp: LinearProgram, result: LpResult) -> bool:
    x, dual = result.x, result.dual
    if x is None or dual is None or result.objective is None:
        return False
    if len(dual) != len(lp.rows):
        return False
    if not _primal_feasible(lp, x):
        return False
    if sum((c * v for c, v in zip(lp.objective, x)), ZERO) != result.objective:
        return False

    # Normalize to minimization: flip objective and duals for max problems.
    sgn = 1 if lp.sense == MIN else -1
    obj = [Fraction(sgn) * c for c in lp.objective]
    y = [Fraction(sgn) * v for v in dual]

    reduced = list(obj)
    for yi, row in zip(y, lp.rows):
        if yi == 0:
            continue
        for j, v in row.coeffs:
            reduced[j] -= yi * v

    dual_value = ZERO
    for yi, row in zip(y, lp.rows):
        val = _row_value(row, x)
        if row.sense == LE and (yi > 0 or (yi != 0 and val != row.rhs)):
            return False
        if row.sense == GE and (yi < 0 or (yi != 0 and val != row.rhs)):
            return False
        dual_value += yi * row.rhs
    for j, rj in enumerate(reduced):
        lo, up = lp.lower[j], lp.upper[j]
        if rj > 0:
            if lo is None or x[j] != lo:
                return False
            dual_value += rj * lo
        elif rj < 0:
            if up is None or x[j] != up:
                return False
            dual_value += rj * up
    return dual_value == Fraction(sgn) * result.objective


def _check_infeasible(lp: LinearProgram, result: LpResult) -> bool:
    ray = result.farkas_ray
    if ray is None or len(ray) != len(lp.rows):
        return False
    if _box_empty_var(lp) is not None:
        # The variable box itself is empty; infeasibility is self-evident.
        return True
    combined = [ZERO] * lp.num_vars
    rhs = ZERO
    for ri, row in zip(ray, lp.rows):
        if row.sense == LE and ri < 0:
            return False
        if row.sense == GE and ri > 0:
            return False
        if ri == 0:
            continue
        for j, v in row.coeffs:
            combined[j] += ri * v
        rhs += ri * row.rhs
    box_min = ZERO
    for j, cj in enumerate(combined):
        if cj > 0:
            lo = lp.lower[j]
            if lo is None:
                return False
            box_min += cj * lo
        elif cj < 0:
            up = lp.upper[j]
            if up is None:
                return False
            box_min += cj * up
    return box_min > rhs


def _check_unbounded(lp: LinearProgram, result: LpResult) -> bool:
    x, d = result.unbounded_point, result.unbounded_direction
    if x is None or d is None:
        return False
    if not _primal_feasible(lp, x):
        return False
    for j, dj in enumerate(d):
        if dj > 0 and lp.upper[j] is not None:
            return False
        if dj < 0 and lp.lower[j] is not None:
            return False
    for row in lp.rows:
        val = _row_value(row, d)
        if row.sense == LE and val > 0:
            return False
        if row.sense == GE and val < 0:
            return False
        if row.sense == EQ and val != 0:
            return False
    gain = sum((c * v for c, v in zip(lp.objective, d)), ZERO)
    return gain < 0 if lp.sense == MIN else gain > 0


def check_certificate(lp: LinearProgram, result: LpResult) -> bool:
    """True iff the claimed status is certified by the attached data."""
    _validate(lp)
    if result.status == OPTIMAL:
        return _check_optimal(lp, result)
    if result.status == INFEASIBLE:
        return _check_infeasible(lp, result)
    if result.status == UNBOUNDED:
        return _check_unbounded(lp, result)
    return False
