import random
from dataclasses import replace
from fractions import Fraction as F

import pytest

from artifact import shannon as S
from artifact import width as W
from artifact.entropy import random_polymatroid
from artifact.errors import NotShannonError
from artifact.hypergraph import clique, four_cycle, triangle
from artifact.shannon import MmGroup, OmegaShannonInequality, ProofStep

X, Y, Z = 1, 2, 4
XY, YZ, XZ, XYZ = 3, 6, 5, 7


def triangle_certificate(w):
    """ω·h(XYZ) + [h(X) + h(Y) + γ·h(Z)] <= 2h(XY) + (ω-1)h(YZ) + (ω-1)h(XZ)."""
    w = F(w)
    ineq = OmegaShannonInequality(3, w, ((w, XYZ),), (MmGroup(F(1), F(1), w - 2, F(1), X, Y, Z),),
                                  ((F(2), XY, 0), (w - 1, YZ, 0), (w - 1, XZ, 0)))
    return replace(ineq, witness=S.find_farkas(ineq))


def extracted(hg, w, index=None):
    rep = W.osubw(hg, w)
    recs = [r for r in rep.records if r.solution is not None]
    rec = recs[index] if index is not None else rep.records[rep.argmax_lp]
    return rec, S.from_dual(rec.lp(hg, F(w) - 2), rec.solution, hg.k, w)


def test_from_dual_ratio_equals_optimum():
    rec, ineq = extracted(triangle(), F(8, 3))
    assert ineq.ratio() == rec.value == F(16, 11)
    assert S.validate(ineq) is None


def test_hand_certificate_is_valid():
    for w in (2, F(19, 8), F(8, 3), 3):
        c = triangle_certificate(w)
        assert S.validate(c) is None
        assert S.check_unconditional_mass(c) is None


def test_degenerate_program():
    e = W.Hypergraph.from_edges(["XY"])
    rep = W.osubw(e, 2)
    rec = rep.records[rep.argmax_lp]
    ineq = S.from_dual(rec.lp(e, 0), rec.solution, 2, 2)
    assert ineq.ratio() == 1
    assert ineq.plain == ((1, 3),) and ineq.rhs == ((1, 3, 0),)


def test_integralize_examples():
    c = S.integralize(triangle_certificate(F(8, 3)))
    assert c.plain == ((8, XYZ),)
    assert c.mm[0].coeffs() == (3, 3, 2, 3)
    assert sorted(c.rhs) == [(5, XZ, 0), (5, YZ, 0), (6, XY, 0)]
    assert S.integralize(c) == c
    # halve the ω = 5/2 certificate: κ = α = β = 1/2, ζ = 1/4 comes back scaled by 4
    half = triangle_certificate(F(5, 2))
    half = OmegaShannonInequality(3, half.omega, tuple((l / 2, u) for l, u in half.plain),
                                  (MmGroup(F(1, 2), F(1, 2), F(1, 4), F(1, 2), X, Y, Z),),
                                  tuple((w / 2, y, x) for w, y, x in half.rhs))
    out = S.integralize(half)
    assert out.mm[0].coeffs() == (2, 2, 1, 2)
    assert out.ratio() == half.ratio()


def test_find_farkas():
    taut = OmegaShannonInequality(3, F(2), ((F(1), X),), (), ((F(1), X, 0),))
    wit = S.find_farkas(taut)
    assert wit.m == () and wit.s == ()
    bogus = OmegaShannonInequality(3, F(2), ((F(1), XY),), (), ((F(1), X, 0),))
    with pytest.raises(NotShannonError):
        S.find_farkas(bogus)
    wit = S.find_farkas(triangle_certificate(2))
    assert wit.s and all(a > 0 for a, *_ in wit.s)


def test_unconditional_mass():
    assert S.check_unconditional_mass(triangle_certificate(F(19, 8))) is None
    assert S.check_unconditional_mass(OmegaShannonInequality(3, F(2), ((F(1), X),), (), ((F(1), X, 0),))) is None
    bad = OmegaShannonInequality(3, F(2), ((F(2), X),), (), ((F(1), X, 0),))
    assert S.check_unconditional_mass(bad) is not None


def test_reset_examples():
    c = S.integralize(triangle_certificate(F(8, 3)))
    i0 = next(i for i, (w, y, x) in enumerate(c.rhs) if y == XY)
    r = S.reset(c, i0)
    assert S.validate(r) is None
    assert c.mass - r.mass == 1
    one = S.integralize(OmegaShannonInequality(2, F(2), ((F(1), 3),), (), ((F(1), 3, 0),)))
    empty = S.reset(one, 0)
    assert empty.mass == 0 and empty.weight == 0
    with pytest.raises(ValueError):
        S.reset(c, 99)


def test_proof_sequences():
    c = S.integralize(triangle_certificate(F(8, 3)))
    seq = S.build_proof_sequence(c)
    assert S.replay_sequence(c, seq) is None
    kinds = [s.kind for s in seq]
    assert kinds.count("decomposition") >= 1 and kinds.count("composition") >= 1
    taut = S.integralize(OmegaShannonInequality(3, F(2), ((F(1), X),), (), ((F(1), X, 0),)))
    assert S.build_proof_sequence(taut) == []
    assert S.replay_sequence(taut, []) is None


def test_replay_flags_missing_operands():
    c = S.integralize(triangle_certificate(2))
    bad = [ProofStep("composition", X, YZ)]
    err = S.replay_sequence(c, bad)
    assert err is not None and "0" in err


def test_rendering():
    c = S.integralize(triangle_certificate(2))
    text = S.render_inequality(c, triangle())
    assert "h(XYZ)" in text and "<=" in text
    assert ProofStep("decomposition", X, Y).render(triangle()) == "h(XY) → h(X) + h(Y|X)"
    assert ProofStep("submodularity", X, Y, Z).render(triangle()) == "h(Y|X) → h(Y|XZ)"


@pytest.mark.parametrize("hg,w", [(triangle(), F(19, 8)), (four_cycle(), 2), (four_cycle(), F(19, 8)),
                                  (clique(4), F(5, 2))], ids=["triangle", "4-cycle-2", "4-cycle-19/8", "4-clique"])
def test_pipeline_on_width_families(hg, w):
    rep = W.osubw(hg, w)
    rng = random.Random(1)
    hs = [random_polymatroid(hg.k, rng) for _ in range(20)]
    for rec in rep.records:
        if rec.solution is None:
            continue
        ineq = S.integralize(S.from_dual(rec.lp(hg, F(w) - 2), rec.solution, hg.k, w))
        assert S.check_unconditional_mass(ineq) is None
        assert ineq.ratio() == rec.value
        seq = S.build_proof_sequence(ineq)
        assert S.replay_sequence(ineq, seq) is None
        for h in hs:
            vals = S.prefix_values(ineq, seq, h)
            assert all(a >= b for a, b in zip(vals, vals[1:]))
            assert vals[-1] >= S.lhs_value(ineq, h)


def test_iterated_reset_terminates():
    _, ineq = extracted(four_cycle(), 2)
    cur = S.integralize(ineq)
    budget = cur.weight
    steps = 0
    while True:
        idx = [i for i, (w, y, x) in enumerate(cur.rhs) if x == 0 and w > 0]
        if not idx:
            break
        nxt = S.reset(cur, idx[0])
        assert cur.mass - nxt.mass <= 1
        assert S.validate(nxt) is None
        cur = nxt
        steps += 1
        assert steps <= budget
