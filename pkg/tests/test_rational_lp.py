import itertools
import random
from fractions import Fraction as F

import pytest
from hypothesis import given, settings, strategies as st

from artifact.rational_lp import (EQ, GE, LE, LinearProgram, LpSolution, fmt_rat, rat, solve_lp,
                                  verify_certificate)


def test_rational_arithmetic():
    w = F(2)
    assert 2 / (w + 1) == F(2, 3)
    w = rat("19/8")
    assert 2 * w / (w + 1) == F(38, 27)
    assert F(1, 3) + F(1, 6) == F(1, 2)
    with pytest.raises(ZeroDivisionError):
        F(1) / F(0)
    assert fmt_rat(F(38, 27)) == "38/27" and fmt_rat(F(3)) == "3"
    assert rat(" 9/4 ") == F(9, 4)
    with pytest.raises(TypeError):
        rat(0.5)


def test_tiny_programs():
    lp = LinearProgram(1, {0: 1})
    lp.add({0: 1}, LE, F(3, 2))
    lp.add({0: 1}, LE, 2)
    sol = solve_lp(lp)
    assert sol.status == "optimal" and sol.value == F(3, 2)
    assert verify_certificate(lp, sol) is None

    lp = LinearProgram(1, {0: 1})
    lp.add({0: 1}, GE, 1)
    lp.add({0: 1}, LE, 0)
    assert solve_lp(lp).status == "infeasible"
    assert solve_lp(lp, "exact").status == "infeasible"

    lp = LinearProgram(2, {0: 1})
    lp.add({0: 1, 1: -1}, LE, 1)
    assert solve_lp(lp, "exact").status == "unbounded"


def test_triangle_inner_program():
    # max t with t <= h(XYZ), edge domination, and the elemental cone, at ω = 2
    from artifact.width import osubw
    from artifact.hypergraph import triangle
    assert osubw(triangle(), 2).width == F(4, 3)


def test_verify_catches_perturbations():
    lp = LinearProgram(2, {0: 1, 1: 1})
    lp.add({0: 1}, LE, 1)
    lp.add({1: 1}, LE, 2)
    lp.add({0: 1, 1: 1}, LE, 5)
    sol = solve_lp(lp, "exact")
    assert verify_certificate(lp, sol) is None
    bad_dual = LpSolution(sol.status, sol.value, sol.primal, [y + (1 if i == 0 else 0) for i, y in enumerate(sol.dual)])
    assert verify_certificate(lp, bad_dual) is not None
    bad_primal = LpSolution(sol.status, sol.value, [sol.primal[0] + 1, sol.primal[1]], sol.dual)
    assert "infeasible" in verify_certificate(lp, bad_primal)


def _random_lp(rng, n, m, box=8):
    lp = LinearProgram(n, {j: rng.randint(-3, 5) for j in range(n)})
    for _ in range(m):
        lp.add({j: rng.randint(-4, 4) for j in range(n)}, rng.choice([LE, LE, GE, EQ]) if rng.random() < 0.3 else LE,
               rng.randint(-2, 10))
    for j in range(n):
        lp.add({j: 1}, LE, box)
    return lp


def _solve_square(a, b):
    n = len(a)
    m = [row[:] + [bi] for row, bi in zip(a, b)]
    for c in range(n):
        p = next((r for r in range(c, n) if m[r][c]), None)
        if p is None:
            return None
        m[c], m[p] = m[p], m[c]
        for r in range(n):
            if r != c and m[r][c]:
                f = m[r][c] / m[c][c]
                m[r] = [x - f * y for x, y in zip(m[r], m[c])]
    return [m[i][n] / m[i][i] for i in range(n)]


def _vertex_optimum(lp):
    rows = [(c.coeffs, c.rel, c.rhs) for c in lp.constraints]
    rows += [({j: F(1)}, GE, F(0)) for j in range(lp.num_vars)]
    n = lp.num_vars
    best = None
    for pick in itertools.combinations(range(len(rows)), n):
        a = [[F(rows[i][0].get(j, 0)) for j in range(n)] for i in pick]
        x = _solve_square(a, [rows[i][2] for i in pick])
        if x is None:
            continue
        ok = True
        for co, rel, rhs in rows:
            v = sum(F(c) * x[j] for j, c in co.items())
            if (rel == LE and v > rhs) or (rel == GE and v < rhs) or (rel == EQ and v != rhs):
                ok = False
                break
        if ok:
            val = sum(F(c) * x[j] for j, c in lp.objective.items())
            best = val if best is None else max(best, val)
    return best


def test_matches_vertex_enumeration():
    rng = random.Random(5)
    for _ in range(150):
        lp = _random_lp(rng, rng.randint(1, 4), rng.randint(1, 6))
        want = _vertex_optimum(lp)
        for method in ("exact", "auto"):
            sol = solve_lp(lp, method)
            if want is None:
                assert sol.status == "infeasible"
            else:
                assert sol.status == "optimal" and sol.value == want
                assert verify_certificate(lp, sol) is None


def test_exact_and_floating_paths_agree_on_larger_programs():
    rng = random.Random(11)
    for _ in range(60):
        lp = _random_lp(rng, rng.randint(4, 8), rng.randint(6, 12))
        a, b = solve_lp(lp, "exact"), solve_lp(lp, "auto")
        assert a.status == b.status
        if a.status == "optimal":
            assert a.value == b.value
            assert verify_certificate(lp, a) is None and verify_certificate(lp, b) is None


def test_determinism():
    lp = _random_lp(random.Random(3), 6, 10)
    a, b = solve_lp(lp, "exact"), solve_lp(lp, "exact")
    assert (a.status, a.value, a.primal, a.dual) == (b.status, b.value, b.primal, b.dual)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.integers(1, 20), min_size=1, max_size=5))
def test_min_of_bounds(bounds):
    lp = LinearProgram(1, {0: 1})
    for b in bounds:
        lp.add({0: 1}, LE, b)
    sol = solve_lp(lp, "exact")
    assert sol.value == min(bounds)
    assert sum(sol.dual) == 1
