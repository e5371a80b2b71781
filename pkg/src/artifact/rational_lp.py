"""Exact rational linear programming.

``solve_lp`` maximises a linear objective and returns a primal optimum
together with a dual certificate, both as ``Fraction`` vectors. The
reference path is a two-phase tableau simplex with Bland's rule. The
default ``auto`` path first asks HiGHS for a floating-point vertex, rounds
it to nearby rationals and keeps the result only if exact verification of
primal feasibility, dual feasibility and equal objectives succeeds;
otherwise it falls back to the exact simplex.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import lcm
from typing import Mapping, Sequence

Rat = Fraction

LE, GE, EQ = "<=", ">=", "=="


def rat(x) -> Fraction:
    """Parse ints, Fractions and strings like ``"19/8"`` or ``"2"``."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x.strip())
    raise TypeError(f"cannot convert {x!r} to an exact rational")


def fmt_rat(x: Fraction) -> str:
    """Render as ``p/q``; integers keep a ``/1``-free form only when q == 1."""
    x = Fraction(x)
    return f"{x.numerator}/{x.denominator}" if x.denominator != 1 else str(x.numerator)


@dataclass
class Constraint:
    coeffs: dict[int, Fraction]
    rel: str
    rhs: Fraction
    tag: object = None


@dataclass
class LinearProgram:
    """maximize objective·x subject to constraints; var_lower[i] is 0 or None (free)."""
    num_vars: int
    objective: dict[int, Fraction]
    constraints: list[Constraint] = field(default_factory=list)
    var_lower: list[Fraction | None] = None

    def __post_init__(self):
        if self.var_lower is None:
            self.var_lower = [Fraction(0)] * self.num_vars

    def add(self, coeffs: Mapping[int, object], rel: str, rhs=0, tag=None) -> int:
        if rel not in (LE, GE, EQ):
            raise ValueError(f"unknown relation {rel!r}")
        clean = {}
        for j, c in coeffs.items():
            if not 0 <= j < self.num_vars:
                raise ValueError(f"variable index {j} out of range")
            c = rat(c)
            if c:
                clean[j] = c
        self.constraints.append(Constraint(clean, rel, rat(rhs), tag))
        return len(self.constraints) - 1

    def key(self) -> tuple:
        """Hashable canonical form, used to deduplicate identical programs."""
        rows = sorted((tuple(sorted(c.coeffs.items())), c.rel, c.rhs) for c in self.constraints)
        return (self.num_vars, tuple(sorted(self.objective.items())), tuple(rows), tuple(self.var_lower))


@dataclass
class LpSolution:
    status: str  # "optimal", "infeasible" or "unbounded"
    value: Fraction | None = None
    primal: list[Fraction] | None = None
    dual: list[Fraction] | None = None
    method: str = ""


def _dot(coeffs: Mapping[int, Fraction], x: Sequence[Fraction]) -> Fraction:
    return sum((c * x[j] for j, c in coeffs.items()), Fraction(0))


def verify_certificate(lp: LinearProgram, sol: LpSolution) -> str | None:
    """Exact optimality check. Returns None when fine, else a description of the first violation."""
    if sol.status != "optimal":
        return f"solution status is {sol.status}"
    x, y = sol.primal, sol.dual
    if len(x) != lp.num_vars or len(y) != len(lp.constraints):
        return "vector lengths do not match the program"
    for j, lo in enumerate(lp.var_lower):
        if lo is not None and x[j] < lo:
            return f"primal variable {j} below its bound"
    for i, c in enumerate(lp.constraints):
        lhs = _dot(c.coeffs, x)
        if (c.rel == LE and lhs > c.rhs) or (c.rel == GE and lhs < c.rhs) or (c.rel == EQ and lhs != c.rhs):
            return f"primal infeasible at constraint {i}"
        if (c.rel == LE and y[i] < 0) or (c.rel == GE and y[i] > 0):
            return f"dual multiplier {i} has the wrong sign"
        if y[i] and lhs != c.rhs:
            return f"complementary slackness fails at constraint {i}"
    # reduced costs: A^T y - c must be >= 0 on bounded vars, == 0 on free ones
    red = [-lp.objective.get(j, Fraction(0)) for j in range(lp.num_vars)]
    for i, c in enumerate(lp.constraints):
        if y[i]:
            for j, a in c.coeffs.items():
                red[j] += a * y[i]
    for j, r in enumerate(red):
        lo = lp.var_lower[j]
        if lo is None and r != 0:
            return f"dual constraint for free variable {j} is not tight"
        if lo is not None and r < 0:
            return f"dual infeasible at variable {j}"
        if lo is not None and r and x[j] != lo:
            return f"complementary slackness fails at variable {j}"
    primal_obj = _dot(lp.objective, x)
    dual_obj = sum((c.rhs * y[i] for i, c in enumerate(lp.constraints)), Fraction(0))
    dual_obj += sum((red[j] * lo for j, lo in enumerate(lp.var_lower) if lo), Fraction(0))
    if primal_obj != dual_obj:
        return f"objective mismatch: primal {primal_obj} vs dual {dual_obj}"
    if sol.value is not None and sol.value != primal_obj:
        return f"reported value {sol.value} differs from primal objective {primal_obj}"
    return None


def solve_lp(lp: LinearProgram, method: str = "auto") -> LpSolution:
    """Solve exactly. ``method`` is "auto", "exact" or "highs" (highs still verifies exactly)."""
    if method not in ("auto", "exact", "highs"):
        raise ValueError(f"unknown method {method!r}")
    if method != "exact":
        sol = _solve_highs(lp)
        if sol is not None:
            return sol
        if method == "highs":
            raise RuntimeError("floating-point solve could not be certified exactly")
    return _solve_exact(lp)


# ---------------------------------------------------------------- exact simplex

def _solve_exact(lp: LinearProgram) -> LpSolution:
    n = lp.num_vars
    # column map: original var j -> list of (tableau column, sign); lower bounds shifted to 0
    cols: list[list[tuple[int, int]]] = []
    ncol = 0
    for j in range(n):
        if lp.var_lower[j] is None:
            cols.append([(ncol, 1), (ncol + 1, -1)])
            ncol += 2
        else:
            cols.append([(ncol, 1)])
            ncol += 1
    shift = [lo or Fraction(0) for lo in lp.var_lower]
    rows: list[dict[int, Fraction]] = []
    rhs: list[Fraction] = []
    flips: list[int] = []
    for c in lp.constraints:
        row: dict[int, Fraction] = {}
        b = c.rhs - sum((a * shift[j] for j, a in c.coeffs.items()), Fraction(0))
        for j, a in c.coeffs.items():
            for col, s in cols[j]:
                row[col] = a * s
        if c.rel != EQ:
            row[ncol] = Fraction(1 if c.rel == LE else -1)
            ncol += 1
        sign = 1
        if b < 0:
            sign = -1
            row = {k: -v for k, v in row.items()}
            b = -b
        rows.append(row)
        rhs.append(b)
        flips.append(sign)
    m = len(rows)
    art0 = ncol
    width = ncol + m
    # dense tableau rows: [coeffs..., rhs]
    T = []
    for i in range(m):
        r = [Fraction(0)] * (width + 1)
        for k, v in rows[i].items():
            r[k] = v
        r[art0 + i] = Fraction(1)
        r[width] = rhs[i]
        T.append(r)
    basis = [art0 + i for i in range(m)]

    # phase one: maximise -sum(artificials)
    cost1 = [Fraction(0)] * width
    for i in range(m):
        cost1[art0 + i] = Fraction(-1)
    status = _simplex(T, basis, cost1, width, allowed=width)
    feas = sum((T[i][width] for i in range(m) if basis[i] >= art0), Fraction(0))
    if feas != 0:
        return LpSolution("infeasible", method="exact")
    # drive remaining artificials out of the basis where possible
    for i in range(m):
        if basis[i] >= art0:
            piv = next((k for k in range(art0) if T[i][k] != 0), None)
            if piv is not None:
                _pivot(T, basis, i, piv, width)

    cost2 = [Fraction(0)] * width
    for j in range(n):
        cj = lp.objective.get(j, Fraction(0))
        for col, s in cols[j]:
            cost2[col] = cj * s
    status = _simplex(T, basis, cost2, width, allowed=art0)
    if status == "unbounded":
        return LpSolution("unbounded", method="exact")

    xs = [Fraction(0)] * width
    for i in range(m):
        xs[basis[i]] = T[i][width]
    primal = []
    for j in range(n):
        v = sum((xs[col] * s for col, s in cols[j]), Fraction(0)) + shift[j]
        primal.append(v)
    # dual y_i = c_B B^-1 e_i, read off the artificial columns
    cb = [cost2[b] for b in basis]
    dual = []
    for i in range(m):
        col = art0 + i
        y = sum((cb[r] * T[r][col] for r in range(m) if T[r][col]), Fraction(0))
        dual.append(y * flips[i])
    value = _dot(lp.objective, primal)
    return LpSolution("optimal", value, primal, dual, method="exact")


def _pivot(T, basis, r, c, width):
    prow = T[r]
    p = prow[c]
    if p != 1:
        inv = 1 / p
        for k in range(width + 1):
            if prow[k]:
                prow[k] *= inv
    nz = [k for k in range(width + 1) if prow[k]]
    for i, row in enumerate(T):
        if i != r:
            f = row[c]
            if f:
                for k in nz:
                    row[k] -= f * prow[k]
    basis[r] = c


def _simplex(T, basis, cost, width, allowed) -> str:
    """Maximise cost·x over the tableau with Bland's rule; columns >= allowed never enter."""
    m = len(T)
    while True:
        in_basis = set(basis)
        cb = [cost[b] for b in basis]
        enter = None
        for k in range(allowed):
            if k in in_basis:
                continue
            red = cost[k] - sum((cb[i] * T[i][k] for i in range(m) if T[i][k]), Fraction(0))
            if red > 0:
                enter = k
                break
        if enter is None:
            return "optimal"
        best = None
        for i in range(m):
            a = T[i][enter]
            if a > 0:
                ratio = T[i][width] / a
                if best is None or ratio < best[0] or (ratio == best[0] and basis[i] < basis[best[1]]):
                    best = (ratio, i)
        if best is None:
            return "unbounded"
        _pivot(T, basis, best[1], enter, width)


# ---------------------------------------------------------------- HiGHS fast path

_LIMITS = (1000, 10 ** 5, 10 ** 7)


@dataclass
class FloatResult:
    status: str
    value: float = 0.0
    x: list[float] = field(default_factory=list)
    y: list[float] = field(default_factory=list)


class FloatModel:
    """A HiGHS model holding a base program; extra rows can be solved against it repeatedly.

    Re-solves warm start from the previous basis, which makes scanning many
    programs that share their bulk (the Shannon cone) cheap.
    """

    def __init__(self, lp: LinearProgram):
        import highspy
        import numpy as np
        self._np = np
        self._inf = highspy.kHighsInf
        self.lp = lp
        self.n = lp.num_vars
        self.base_rows = len(lp.constraints)
        h = highspy.Highs()
        h.setOptionValue("output_flag", False)
        h.setOptionValue("random_seed", 0)
        lower = np.array([-self._inf if lo is None else float(lo) for lo in lp.var_lower])
        h.addVars(self.n, lower, np.full(self.n, self._inf))
        cost = np.zeros(self.n)
        for j, v in lp.objective.items():
            cost[j] = -float(v)
        h.changeColsCost(self.n, np.arange(self.n, dtype=np.int32), cost)
        self.h = h
        self._add(lp.constraints)

    def _add(self, cons: Sequence[Constraint]):
        if not cons:
            return
        np = self._np
        lo, hi, starts, idx, val = [], [], [], [], []
        for c in cons:
            r = float(c.rhs)
            lo.append(r if c.rel != LE else -self._inf)
            hi.append(r if c.rel != GE else self._inf)
            starts.append(len(idx))
            for j, a in c.coeffs.items():
                idx.append(j)
                val.append(float(a))
        self.h.addRows(len(cons), np.array(lo), np.array(hi), len(idx), np.array(starts, dtype=np.int32),
                       np.array(idx, dtype=np.int32), np.array(val, dtype=float))

    def solve(self, extra: Sequence[Constraint] = ()) -> FloatResult:
        import highspy
        self._add(extra)
        try:
            self.h.run()
            st = self.h.getModelStatus()
            if st == highspy.HighsModelStatus.kInfeasible:
                return FloatResult("infeasible")
            if st in (highspy.HighsModelStatus.kUnbounded, highspy.HighsModelStatus.kUnboundedOrInfeasible):
                return FloatResult("unbounded")
            if st != highspy.HighsModelStatus.kOptimal:
                return FloatResult("unknown")
            sol = self.h.getSolution()
            x = list(sol.col_value)
            y = [-d for d in sol.row_dual]
            return FloatResult("optimal", -self.h.getInfo().objective_function_value, x, y)
        finally:
            if extra:
                k = len(extra)
                self.h.deleteRows(k, self._np.arange(self.base_rows, self.base_rows + k, dtype=self._np.int32))


def certify(lp: LinearProgram, fr: FloatResult) -> LpSolution | None:
    """Round a floating vertex to rationals and keep it only if it verifies exactly."""
    if fr.status != "optimal":
        return None
    for limit in _LIMITS:
        x = [_round(v, limit) for v in fr.x]
        y = [_round(v, limit) for v in fr.y]
        sol = LpSolution("optimal", _dot(lp.objective, x), x, y, method="highs")
        if verify_certificate(lp, sol) is None:
            return sol
    return None


def _solve_highs(lp: LinearProgram) -> LpSolution | None:
    try:
        fr = FloatModel(lp).solve()
    except ImportError:  # pragma: no cover - highspy is a declared dependency
        return None
    return certify(lp, fr)


def _round(v: float, limit: int) -> Fraction:
    r = round(v)
    if abs(v - r) < 1e-9:
        return Fraction(r)
    return Fraction(v).limit_denominator(limit)


def common_denominator(values: Sequence[Fraction]) -> int:
    return lcm(1, *(Fraction(v).denominator for v in values))
