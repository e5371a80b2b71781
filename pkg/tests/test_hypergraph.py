import random

import pytest

from artifact.hypergraph import (Hypergraph, TreeDecomposition, eliminate, elimination_trace,
                                 enumerate_gveos, enumerate_veos, four_cycle, incidence, td_from_veo,
                                 triangle, validate_td, is_subset, clique, pyramid, automorphisms)


def S(hg, text):
    return hg.parse_set(text)


@pytest.fixture
def c4():
    # vertices A, B, C, D with edges AB, BC, CD, DA
    return Hypergraph.from_edges(["AB", "BC", "CD", "DA"], "ABCD")


def test_incidence_examples(c4):
    h = Hypergraph.from_edges(["ABC", "ABD", "CDE"], "ABCDE")
    b, u, n = incidence(h, S(h, "A"))
    assert set(b) == {S(h, "ABC"), S(h, "ABD")}
    assert u == S(h, "ABCD") and n == S(h, "BCD")

    t = triangle()
    b, u, n = incidence(t, S(t, "Y"))
    assert set(b) == {S(t, "XY"), S(t, "YZ")} and u == t.vertices and n == S(t, "XZ")

    b, u, n = incidence(c4, S(c4, "BD"))
    assert len(b) == 4 and u == c4.vertices and n == S(c4, "AC")


def test_incidence_rejects_bad_blocks(c4):
    with pytest.raises(ValueError):
        incidence(c4, 0)
    with pytest.raises(ValueError):
        incidence(c4, 1 << 7)


def test_eliminate(c4):
    h2 = eliminate(c4, S(c4, "B"))
    assert h2.vertices == S(c4, "ACD")
    assert set(h2.edges) == {S(c4, "AC"), S(c4, "CD"), S(c4, "AD")}
    h2 = eliminate(c4, S(c4, "A"))
    assert set(h2.edges) == {S(c4, "BD"), S(c4, "BC"), S(c4, "CD")}
    e = Hypergraph.from_edges(["XY"])
    empty = eliminate(e, e.vertices)
    assert empty.vertices == 0 and empty.edges == ()


def test_elimination_trace_examples(c4):
    t = triangle()
    tr = elimination_trace(t, [S(t, "X"), S(t, "Y"), S(t, "Z")])
    assert tr.unions == (S(t, "XYZ"), S(t, "YZ"), S(t, "Z"))
    assert tr.trimmed == (0,)

    tr = elimination_trace(c4, [S(c4, v) for v in "BCDA"])
    assert tr.unions == (S(c4, "ABC"), S(c4, "ACD"), S(c4, "AD"), S(c4, "A"))
    assert tr.trimmed == (0, 1)

    tr = elimination_trace(c4, [S(c4, v) for v in "ABCD"])
    assert tr.unions[:2] == (S(c4, "ABD"), S(c4, "BCD"))
    assert tr.trimmed == (0, 1)


def test_elimination_trace_rejects_non_partitions(c4):
    with pytest.raises(ValueError):
        elimination_trace(c4, [S(c4, "AB"), S(c4, "BC"), S(c4, "D")])
    with pytest.raises(ValueError):
        elimination_trace(c4, [S(c4, "AB")])


@pytest.mark.parametrize("k,count", [(1, 1), (2, 3), (3, 13), (4, 75), (5, 541)])
def test_gveo_counts_are_ordered_bell_numbers(k, count):
    orders = list(enumerate_gveos(k))
    assert len(orders) == count
    assert len(set(orders)) == count
    full = (1 << k) - 1
    for o in orders:
        acc = 0
        for b in o:
            assert b and not b & acc
            acc |= b
        assert acc == full


def test_gveo_order_is_deterministic():
    assert list(enumerate_gveos(4)) == list(enumerate_gveos(4))
    with pytest.raises(ValueError):
        list(enumerate_gveos(0))


def test_td_from_veo_examples(c4):
    td = td_from_veo(c4, [S(c4, v) for v in "BCDA"])
    assert set(td.bags) == {S(c4, "ABC"), S(c4, "ACD")}
    td = td_from_veo(c4, [S(c4, v) for v in "ABCD"])
    assert set(td.bags) == {S(c4, "ABD"), S(c4, "BCD")}
    t = triangle()
    for sigma in enumerate_veos(t.vertices):
        assert td_from_veo(t, sigma).bags == (t.vertices,)


def test_validate_td(c4):
    assert validate_td(c4, TreeDecomposition((c4.vertices,))) is None
    v = validate_td(c4, TreeDecomposition((S(c4, "AB"), S(c4, "CD")), ((0, 1),)))
    assert v.kind == "edge-cover" and v.witness in (S(c4, "BC"), S(c4, "AD"))
    assert validate_td(c4, TreeDecomposition((S(c4, "ABC"), S(c4, "ACD")), ((0, 1),))) is None
    bad = TreeDecomposition((S(c4, "AB"), S(c4, "BC"), S(c4, "CD"), S(c4, "DA")), ((0, 1), (1, 2), (2, 3)))
    assert validate_td(c4, bad).kind == "running-intersection"


@pytest.mark.parametrize("hg", [triangle(), four_cycle(), clique(4), pyramid(3), clique(5)],
                         ids=["triangle", "4-cycle", "4-clique", "3-pyramid", "5-clique"])
def test_every_veo_yields_a_valid_td(hg):
    for sigma in enumerate_veos(hg.vertices):
        td = td_from_veo(hg, sigma)
        assert validate_td(hg, td) is None
        tr = elimination_trace(hg, sigma)
        assert all(any(is_subset(b, u) for u in tr.unions) for b in td.bags)
        # non-redundant after pruning
        assert not any(i != j and is_subset(a, b) for i, a in enumerate(td.bags) for j, b in enumerate(td.bags))


def test_trace_shape_on_all_gveos():
    hg = pyramid(3)
    for sigma in enumerate_gveos(hg.k):
        tr = elimination_trace(hg, sigma)
        assert len(tr.hypergraphs) == len(sigma)
        assert tr.hypergraphs[0] == hg
        for i in range(len(sigma) - 1):
            assert tr.hypergraphs[i + 1].vertices == tr.hypergraphs[i].vertices & ~sigma[i]


def test_refinement_is_subsumed():
    rng = random.Random(7)
    for hg in (four_cycle(), clique(4), pyramid(3), Hypergraph.from_edges(["AB", "BC", "CD", "DE", "EA", "AC"])):
        orders = list(enumerate_gveos(hg.k))
        for _ in range(60):
            sigma = list(rng.choice(orders))
            splittable = [i for i, b in enumerate(sigma) if bin(b).count("1") > 1]
            if not splittable:
                continue
            i = rng.choice(splittable)
            members = [1 << j for j in range(hg.k) if sigma[i] >> j & 1]
            rng.shuffle(members)
            cut = rng.randrange(1, len(members))
            first = sum(members[:cut])
            refined = sigma[:i] + [first, sigma[i] & ~first] + sigma[i + 1:]
            old = elimination_trace(hg, sigma).unions
            for u in elimination_trace(hg, refined).unions:
                assert any(is_subset(u, o) for o in old)


def test_hypergraph_canonicalization():
    h = Hypergraph.from_edges(["XY", "YX", "X", "YZ"])
    assert len(h.edges) == 3          # duplicate removed, contained edge kept
    with pytest.raises(ValueError):
        Hypergraph.from_edges(["XY"], ["X", "Y", "Z"])
    with pytest.raises(ValueError):
        Hypergraph(tuple("ABC"), (0,))
    with pytest.raises(ValueError):
        Hypergraph(tuple(f"v{i}" for i in range(17)), (1,))


def test_automorphisms_of_the_triangle():
    assert len(automorphisms(triangle())) == 6
    assert len(automorphisms(four_cycle())) == 8
