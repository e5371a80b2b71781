"""Acceptance criteria 1-10. Each test records a PASS/FAIL line shown in the terminal summary."""
import math
import random
import time
from fractions import Fraction as F

import numpy as np
import pytest

from artifact import engine as E
from artifact import shannon as S
from artifact import width as W
from artifact.cli import random_database
from artifact.entropy import Polymatroid, modular, random_polymatroid
from artifact.hypergraph import Hypergraph, clique, four_cycle, popcount, pyramid, triangle

from conftest import ACCEPTANCE, FOUR_CLIQUE, FOUR_CYCLE, TRIANGLE, random_db, skewed_db

OMEGAS = (F(2), F(9, 4), F(19, 8), F(5, 2), F(3))


def record(n, ok, detail):
    ACCEPTANCE[n] = (ok, detail)
    assert ok, detail


# ---------------------------------------------------------------- 1

def test_criterion_1_golden_widths():
    bad, slow = [], 0.0
    cases = []
    for w in OMEGAS:
        cases.append(("triangle", triangle(), w, 2 * w / (w + 1)))
        cases.append(("4-clique", clique(4), w, (w + 1) / 2))
        cases.append(("4-cycle", four_cycle(), w, 2 - F(3) / (2 * min(w, F(5, 2)) + 1)))
    for w in (F(2), F(3)):
        cases.append(("3-pyramid", pyramid(3), w, 2 - 1 / w))
    for name, hg, w, want in cases:
        t = time.perf_counter()
        got = W.osubw(hg, w, mode="exhaustive").width
        dt = time.perf_counter() - t
        slow = max(slow, dt)
        if got != want or dt >= 60:
            bad.append(f"{name}@{w}: {got} vs {want} ({dt:.1f}s)")
    for hg in (triangle(), four_cycle()):
        got = W.subw(hg).width
        if got != F(3, 2):
            bad.append(f"subw {hg}: {got}")
    record(1, not bad, f"{len(cases) + 2} exact widths, slowest {slow:.1f}s" + (f"; mismatches {bad}" if bad else ""))


# ---------------------------------------------------------------- 2

def test_criterion_2_collapse():
    graphs = {"edge": Hypergraph.from_edges(["XY"]), "triangle": triangle(), "4-cycle": four_cycle(),
              "4-clique": clique(4), "3-pyramid": pyramid(3)}
    bad = []
    for name, hg in graphs.items():
        sw = W.subw(hg).width
        if W.osubw(hg, 3).width != sw:
            bad.append(f"{name}: osubw(3) != subw {sw}")
        for w in (F(2), F(9, 4), F(19, 8), F(5, 2), F(11, 4)):
            if W.osubw(hg, w).width > sw:
                bad.append(f"{name}@{w} exceeds subw")
    record(2, not bad, "osubw(H,3) = subw(H) and osubw <= subw on 5 hypergraphs x 6 omegas"
           + (f"; {bad}" if bad else ""))


# ---------------------------------------------------------------- 3

def pyramid_witness(w):
    # vertex 0 is the apex Y, vertices 1..3 the base
    def h(m):
        j = popcount(m >> 1)
        if not m & 1:
            return F(1) if j == 3 else F(j) / w
        return [1 - 1 / w, F(1), (w + 1) / w, 2 - 1 / w][j]
    return Polymatroid.from_function(4, h)


def test_criterion_3_lower_bound_witnesses():
    bad, slow = [], 0.0
    half = F(1, 2)
    for w in OMEGAS:
        checks = [
            ("5-clique", clique(5), modular(5, [half] * 5), w / 2 + 1),
            ("6-clique", clique(6), modular(6, [half] * 6),
             F(math.ceil(6 / 3), 2) + F(math.ceil(5 / 3), 2) + (6 // 3) * (w - 2) / 2),
            ("3-pyramid", pyramid(3), pyramid_witness(w), 2 - 1 / w),
        ]
        for name, hg, h, want in checks:
            t = time.perf_counter()
            got = W.osubw_lower_bound(hg, w, h)
            dt = time.perf_counter() - t
            slow = max(slow, dt)
            if got != want or dt >= 120:
                bad.append(f"{name}@{w}: {got} vs {want}")
    record(3, not bad, f"15 witness evaluations exact, slowest {slow:.1f}s" + (f"; {bad}" if bad else ""))


# ---------------------------------------------------------------- 4

def test_criterion_4_cycle_exponent():
    step = F(1, 20)
    rows, bad = [], []
    for w in (F(2), F(5, 2), F(3)):
        got = W.square_cycle_exponent(4, w, step)
        want = 2 - F(3) / (2 * min(w, F(5, 2)) + 1)
        rows.append(f"{w}:{got}")
        if abs(got - want) > step:
            bad.append(f"{w}: {got} vs {want}")
    record(4, not bad, "squareC_4 " + ", ".join(rows) + (f"; outside band {bad}" if bad else ""))


# ---------------------------------------------------------------- 5

_TERMS = {
    "decomposition": lambda x, y, z: ([(x | y, 0)], [(x, 0), (y, x)]),
    "composition": lambda x, y, z: ([(x, 0), (y, x)], [(x | y, 0)]),
    "monotonicity": lambda x, y, z: ([(x | y, 0)], [(x, 0)]),
    "submodularity": lambda x, y, z: ([(y, x)], [(y & ~(x | z), x | z)]),
}


def _cond(H, y, x):
    return H[:, x | y] - H[:, x]


def _prefix_monotone(ineq, steps, H) -> bool:
    """Vectorised over polymatroids: every step can only lower the RHS value, and the end dominates the LHS."""
    total = np.zeros(H.shape[0], dtype=np.int64)
    for w, y, x in ineq.rhs:
        total += int(w) * _cond(H, y & ~x, x)
    for st in steps:
        y = st.y & ~st.x
        take, give = _TERMS[st.kind](st.x, y, st.z)
        delta = sum(_cond(H, b, a) for b, a in give if b) - sum(_cond(H, b, a) for b, a in take if b)
        if (delta > 0).any():
            return False
        total = total + delta
    lhs = np.array([S.lhs_value(ineq, Polymatroid(ineq.k, tuple(F(int(v)) for v in row))) for row in H])
    return bool((total >= lhs).all())


def test_criterion_5_certificate_pipeline():
    rng = random.Random(55)
    count, bad = 0, []
    for name, hg in (("triangle", triangle()), ("4-cycle", four_cycle()), ("4-clique", clique(4))):
        # integral random polymatroids (denominators are at most 2, so double them)
        H = np.array([[int(2 * v) for v in random_polymatroid(hg.k, rng).values] for _ in range(100)], dtype=np.int64)
        for w in (F(2), F(19, 8), F(3)):
            rep = W.osubw(hg, w)
            for i, rec in enumerate(rep.records):
                # non-maximal LPs were only scanned in floating point; certify them exactly too
                W.exact_record(hg, w - 2, rec)
                count += 1
                ineq = S.from_dual(rec.lp(hg, w - 2), rec.solution, hg.k, w)
                ineq = S.integralize(ineq)
                S.find_farkas(ineq)
                if ineq.ratio() != rec.value or not ineq.is_integral():
                    bad.append(f"{name}@{w}#{i} ratio")
                steps = S.build_proof_sequence(ineq)
                if S.replay_sequence(ineq, steps) is not None:
                    bad.append(f"{name}@{w}#{i} replay")
                elif not _prefix_monotone(ineq, steps, H):
                    bad.append(f"{name}@{w}#{i} monotonicity")
    record(5, not bad, f"{count} LPs (every deduplicated LP of each family) certified, replayed and checked on 100 polymatroids"
           + (f"; {bad[:5]}" if bad else ""))


# ---------------------------------------------------------------- 6

def _certificates(limit):
    out, seen = [], set()
    for hg in (triangle(), four_cycle(), clique(4), pyramid(3)):
        for w in (F(2), F(9, 4), F(19, 8), F(5, 2), F(8, 3), F(3)):
            rep = W.osubw(hg, w, mode="pruned")
            for rec in rep.records:
                if rec.solution is None:
                    continue
                ineq = S.integralize(S.from_dual(rec.lp(hg, w - 2), rec.solution, hg.k, w))
                key = (ineq.k, ineq.omega, ineq.plain, ineq.mm, ineq.rhs)
                if key not in seen:
                    seen.add(key)
                    out.append(ineq)
                if len(out) == limit:
                    return out
    return out


def test_criterion_6_reset():
    certs = _certificates(50)
    bad, calls = [], 0
    for n, c in enumerate(certs):
        before = {(y, x): w for w, y, x in c.rhs}
        for i0, (w0, y0, x0) in enumerate(c.rhs):
            if x0 or w0 <= 0:
                continue
            calls += 1
            r = S.reset(c, i0)
            after = {(y, x): w for w, y, x in r.rhs}
            tag = f"cert {n} i0={i0}"
            if after.get((y0, 0), 0) > w0 - 1:
                bad.append(f"{tag}: w_i0 not reduced")
            if any(v > before.get(k, 0) for k, v in after.items()):
                bad.append(f"{tag}: some weight grew")
            if c.mass - r.mass > 1:
                bad.append(f"{tag}: mass dropped by {c.mass - r.mass}")
            if S.validate(r) is not None or not r.is_integral():
                bad.append(f"{tag}: {S.validate(r)}")
            if not all(S.is_dominant(j.alpha, j.beta, j.zeta, j.kappa, r.omega) for j in r.mm):
                bad.append(f"{tag}: dominance lost")
    ok = len(certs) == 50 and not bad
    record(6, ok, f"{calls} resets on {len(certs)} certificates" + (f"; {bad[:5]}" if bad else ""))


# ---------------------------------------------------------------- 7

def test_criterion_7_execution():
    rng = random.Random(7)
    plan = [("triangle", TRIANGLE, 1000), ("4-cycle", FOUR_CYCLE, 500), ("4-clique", FOUR_CLIQUE, 500)]
    densities = [0.02, 0.05, 0.1, 0.2, 0.35]
    bad, runs, true_count = [], 0, 0
    for name, q, n in plan:
        for i in range(n):
            dom = 2 + i % 29
            db = random_db(q, rng, dom=dom, density=densities[(i // 29) % len(densities)])
            want = E.brute_force(q, db)
            true_count += want
            for w in (F(2), F(19, 8), F(3)):
                runs += 1
                got = E.evaluate(q, db, w)
                if got != want:
                    bad.append(f"{name} #{i} omega={w}")
                if q is TRIANGLE and E.evaluate_triangle(db, w) != got:
                    bad.append(f"{name} #{i} omega={w} triangle pipeline")
    record(7, not bad, f"{runs} evaluations on 2000 instances ({true_count} true) agree with brute force"
           + (f"; {bad[:5]}" if bad else ""))


# ---------------------------------------------------------------- 8

# frozen from the calibration run over skewed instances (max observed ratio was about 0.4)
SIZE_C, SIZE_E = 1, 0


def test_criterion_8_panda_properties():
    rng = random.Random(8)
    worst, runs, bad = 0.0, 0, []
    for name, q in (("triangle", TRIANGLE), ("4-cycle", FOUR_CYCLE), ("4-clique", FOUR_CLIQUE)):
        hg = q.hypergraph()
        comp = E.compile_query(hg, F(19, 8))
        dbs = []
        for i in range(200):
            db = skewed_db(q, rng, rng.randint(10, 60)) if i % 2 else random_db(q, rng, dom=rng.randint(2, 12))
            dbs.append((db, E.full_join(q, db).rows))
        for j, cert in enumerate(comp.certificates):
            for db, joined in dbs:
                runs += 1
                out = E.panda_ddr(q, db, cert.ineq)
                n = db.N
                cap = SIZE_C * n ** float(cert.ineq.ratio()) * (1 + math.log2(max(n, 1))) ** SIZE_E
                top = max(out.sizes(), default=0)
                if n:
                    worst = max(worst, top / (n ** float(cert.ineq.ratio())))
                if top > cap:
                    bad.append(f"{name} cert {j}: size {top} > {cap:.0f} (N={n})")
                for t in joined:
                    if not out.covers(hg, dict(zip(q.variables, t))):
                        bad.append(f"{name} cert {j}: tuple {t} uncovered")
                        break
    record(8, not bad, f"{runs} runs covered; max table / N^opt = {worst:.2f} with (c, e) = ({SIZE_C}, {SIZE_E})"
           + (f"; {bad[:5]}" if bad else ""))


# ---------------------------------------------------------------- 9

def test_criterion_9_matmul():
    rng = np.random.default_rng(9)
    bad = 0
    for i in range(200):
        if i % 2:
            n = int(rng.integers(1, 65))
            a, b = rng.integers(-9, 10, (n, n)), rng.integers(-9, 10, (n, n))
        else:
            p, q, r = int(rng.integers(1, 33)), int(rng.integers(1, 9)), int(rng.integers(1, 65))
            a, b = rng.integers(-9, 10, (p, q)), rng.integers(-9, 10, (q, r))
        want = E.matmul(E.DenseMatrix(a), E.DenseMatrix(b), "naive").entries
        for got in (E.strassen(a, b) if a.shape[0] == a.shape[1] == b.shape[1] else None,
                    E.strassen(a, b, cutoff=2) if a.shape[0] == a.shape[1] == b.shape[1] else None,
                    E.matmul(E.DenseMatrix(a), E.DenseMatrix(b), "strassen", cutoff=4).entries,
                    E.blocked_rect(a, b, cutoff=2),
                    E.matmul(E.DenseMatrix(a), E.DenseMatrix(b), "blocked_rect").entries):
            if got is not None and not np.array_equal(got, want):
                bad += 1
    record(9, bad == 0, f"200 random products, strassen and blocked_rect equal naive" + (f"; {bad} mismatches" if bad else ""))


# ---------------------------------------------------------------- 10

def test_criterion_10_runtime_shape():
    w = F(19, 8)
    q = E.Query.of({"R": "XY", "S": "YZ", "T": "XZ"})
    rng = random.Random(10)
    ratios = []
    for n in (100, 1000, 10000):
        db = random_database(q, n, rng)
        led = E.WorkLedger()
        E.evaluate_triangle(db, w, led)
        N = db.N
        ratios.append(led.units / (N ** float(2 * w / (w + 1)) * (1 + math.log2(N))))
    c = ratios[0] * 2
    ok = all(r <= c for r in ratios)
    record(10, ok, "work / (N^(2w/(w+1)) (1+log N)) at N=1e2,1e3,1e4: "
           + ", ".join(f"{r:.3f}" for r in ratios) + f" (C = {c:.3f})")
