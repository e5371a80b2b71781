"""Submodular width and ω-submodular width by reduction to finitely many LPs.

Both widths have the shape max_h min_σ max_i min_o max_b L(h) where every
L is linear in h. Each σ becomes a *clause*: a list of alternatives (one per
elimination step i), each holding mandatory leaves (h(U_i)) and disjunctive
groups (the three lines of an MM term). Distributing min over max turns the
width into a max over *head sets*, i.e. sets of leaves that pick one
alternative per clause and one line per group, of the LP

    max t  s.t.  t <= L(h) for every leaf L,  h in Γ ∩ ED.

Exhaustive mode enumerates all inclusion-minimal head sets and solves one LP
per automorphism class. Pruned mode runs a branch-and-bound over the same
choice tree, guided by which clause the current LP optimum violates.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

from .entropy import (NO_MM, MmTerm, Polymatroid, add_term, check_polymatroid, elemental,
                      emm_terms, evaluate, is_edge_dominated, mm_value, modular, random_polymatroid)
from .errors import ResourceError
from .hypergraph import (Hypergraph, VertexSet, automorphisms, bits, elimination_trace, enumerate_gveos,
                         enumerate_veos, is_subset, permute, td_from_veo)
from .rational_lp import GE, LE, FloatModel, LinearProgram, LpSolution, certify, fmt_rat, rat, solve_lp

EXHAUSTIVE_MAX_K = 4
PRUNED_MAX_K = 6
SUBW_MAX_K = 6
FLOAT_TOL = 1e-7

# Leaf keys:
#   ("U", mask)                      t <= h(mask)
#   ("MM", dims, g, gdim)            t <= line of MM(dims | g) whose gamma sits on gdim
# dims is the sorted triple of dimension masks.


def leaf_form(key: tuple, gamma: Fraction) -> dict:
    if key[0] == "U":
        return {key[1]: Fraction(1)}
    _, dims, g, gdim = key
    form: dict = {}
    for d in dims:
        add_term(form, d | g, gamma if d == gdim else 1)
    add_term(form, g, -(1 + gamma))
    return form


def term_leaves(t: MmTerm) -> tuple[tuple, ...]:
    dims = tuple(sorted(t.dims))
    return tuple(("MM", dims, t.g, d) for d in dims)


def fmt_leaf(hg: Hypergraph, key: tuple) -> str:
    if key[0] == "U":
        return f"h({hg.fmt(key[1])})"
    _, dims, g, gdim = key
    parts = []
    for d in dims:
        s = f"h({hg.fmt(d)}|{hg.fmt(g)})" if g else f"h({hg.fmt(d)})"
        parts.append(("γ" if d == gdim else "") + s)
    return " + ".join(parts) + (f" + h({hg.fmt(g)})" if g else "")


def permute_leaf(perm: Sequence[int], key: tuple) -> tuple:
    if key[0] == "U":
        return ("U", permute(perm, key[1]))
    _, dims, g, gdim = key
    return ("MM", tuple(sorted(permute(perm, d) for d in dims)), permute(perm, g), permute(perm, gdim))


@dataclass(frozen=True)
class Alternative:
    mandatory: tuple[tuple, ...]
    groups: tuple[tuple[tuple, ...], ...]
    step: int = 0            # elimination step index (0-based) inside the order
    terms: tuple[MmTerm, ...] = ()


@dataclass(frozen=True)
class Clause:
    alternatives: tuple[Alternative, ...]
    order: tuple[VertexSet, ...] = ()   # the elimination order (or bags, for TDs)

    def signature(self) -> frozenset:
        return frozenset((a.mandatory, frozenset(a.groups)) for a in self.alternatives)


# ---------------------------------------------------------------- clause builders

class _EmmCache:
    def __init__(self):
        self.cache: dict = {}

    def terms(self, hg: Hypergraph, x: VertexSet) -> list[MmTerm]:
        key = (hg.edges, hg.vertices, x)
        if key not in self.cache:
            self.cache[key] = emm_terms(hg, x)
        return self.cache[key]


def _check_k(hg: Hypergraph, limit: int, what: str):
    if hg.vertices != (1 << hg.k) - 1:
        raise ValueError("width computations need a hypergraph over all of its named vertices")
    if hg.k > limit:
        raise ResourceError(f"{what} supports at most {limit} vertices, got {hg.k}")


def osubw_clauses(hg: Hypergraph, emm: _EmmCache | None = None) -> list[Clause]:
    """One clause per GVEO (identical clauses merged), trimmed steps only."""
    emm = emm or _EmmCache()
    out: dict = {}
    for sigma in enumerate_gveos(hg.k):
        tr = elimination_trace(hg, sigma)
        alts = []
        for i in tr.trimmed:
            terms = tuple(emm.terms(tr.hypergraphs[i], sigma[i]))
            groups = tuple(term_leaves(t) for t in terms)
            alts.append(Alternative((("U", tr.unions[i]),), groups, i, terms))
        c = Clause(tuple(alts), sigma)
        out.setdefault(c.signature(), c)
    return list(out.values())


def subw_clauses(hg: Hypergraph, via: str = "td") -> list[Clause]:
    out: dict = {}
    if via == "td":
        for sigma in enumerate_veos(hg.vertices):
            td = td_from_veo(hg, sigma)
            bags = tuple(sorted(set(td.bags)))
            c = Clause(tuple(Alternative((("U", b),), ()) for b in bags), bags)
            out.setdefault(c.signature(), c)
    elif via == "gveo":
        for sigma in enumerate_gveos(hg.k):
            tr = elimination_trace(hg, sigma)
            c = Clause(tuple(Alternative((("U", tr.unions[i]),), (), i) for i in tr.trimmed), sigma)
            out.setdefault(c.signature(), c)
    else:
        raise ValueError(f"unknown subw route {via!r}")
    return list(out.values())


def clique_clauses(hg: Hypergraph, emm: _EmmCache | None = None) -> list[Clause]:
    """The simplified clique expression min(h(V), min over first blocks of EMM): one clause."""
    if not is_clique(hg):
        raise ValueError("osubw_clique needs a clique hypergraph")
    emm = emm or _EmmCache()
    groups: dict = {}
    for x in range(1, 1 << hg.k):
        for t in emm.terms(hg, x):
            groups.setdefault(t.key(), t)
    terms = tuple(groups[k] for k in sorted(groups))
    alt = Alternative((("U", hg.vertices),), tuple(term_leaves(t) for t in terms), 0, terms)
    return [Clause((alt,), ())]


def is_clique(hg: Hypergraph) -> bool:
    pairs = {(1 << i) | (1 << j) for i in range(hg.k) for j in range(i + 1, hg.k)}
    return hg.k >= 2 and set(hg.edges) == pairs


# ---------------------------------------------------------------- dominance between leaves

class Dominance:
    """Decides exactly whether L_a(h) <= L_b(h) for every polymatroid h."""

    def __init__(self, k: int, gamma: Fraction, seed: int = 0):
        self.k = k
        self.gamma = gamma
        self.cache: dict = {}
        self.forms: dict = {}
        import random
        rng = random.Random(seed)
        full = (1 << k) - 1
        probes = [modular(k, [1 if j == i else 0 for j in range(k)]) for i in range(k)]
        probes += [Polymatroid.from_function(k, lambda m, s=s: 1 if m & s else 0) for s in range(1, full + 1)]
        probes += [random_polymatroid(k, rng) for _ in range(24)]
        self.probes = probes

    def form(self, key):
        if key not in self.forms:
            self.forms[key] = leaf_form(key, self.gamma)
        return self.forms[key]

    def le(self, a: tuple, b: tuple) -> bool:
        if a == b:
            return True
        ck = (a, b)
        if ck in self.cache:
            return self.cache[ck]
        fa, fb = self.form(a), self.form(b)
        if a[0] == "U" and b[0] == "U":
            res = is_subset(a[1], b[1])
        elif any(evaluate(fa, p) > evaluate(fb, p) for p in self.probes):
            res = False
        else:
            res = self._lp(fa, fb)
        self.cache[ck] = res
        return res

    def _lp(self, fa, fb) -> bool:
        # max (fa - fb)(h) over h in Γ with h(V) <= 1 is 0 exactly when fa <= fb on Γ
        n = 1 << self.k
        obj: dict = {}
        for m, c in fa.items():
            add_term(obj, m, c)
        for m, c in fb.items():
            add_term(obj, m, -c)
        lp = LinearProgram(n, obj)
        for c in elemental(self.k):
            lp.add(dict(c.form), GE, 0)
        lp.add({n - 1: 1}, LE, 1)
        sol = solve_lp(lp)
        return sol.status == "optimal" and sol.value <= 0


# ---------------------------------------------------------------- LP construction

def base_lp(hg: Hypergraph) -> LinearProgram:
    """Variables: 0 is t, mask m >= 1 is h(m). Elemental Shannon rows then edge bounds."""
    n = 1 << hg.k
    lp = LinearProgram(n, {0: Fraction(1)})
    for c in elemental(hg.k):
        lp.add(dict(c.form), GE, 0, tag=("shannon", c))
    for e in hg.edges:
        lp.add({e: 1}, LE, 1, tag=("edge", e))
    return lp


def leaf_rows(leaves: Iterable[tuple], gamma: Fraction) -> list:
    from .rational_lp import Constraint
    rows = []
    for key in leaves:
        coeffs = {0: Fraction(1)}
        for m, c in leaf_form(key, gamma).items():
            coeffs[m] = coeffs.get(m, 0) - c
        rows.append(Constraint({j: v for j, v in coeffs.items() if v}, LE, Fraction(0), ("leaf", key)))
    return rows


def head_lp(hg: Hypergraph, leaves: Sequence[tuple], gamma: Fraction) -> LinearProgram:
    lp = base_lp(hg)
    lp.constraints.extend(leaf_rows(leaves, gamma))
    return lp


def witness_of(hg: Hypergraph, sol: LpSolution) -> Polymatroid:
    vals = [Fraction(0)] + [sol.primal[m] for m in range(1, 1 << hg.k)]
    return Polymatroid(hg.k, tuple(vals))


# ---------------------------------------------------------------- reports

@dataclass
class LpRecord:
    leaves: tuple[tuple, ...]
    value: Fraction | None = None       # exact value when certified
    approx: float = 0.0
    solution: LpSolution | None = None
    terminal: str = ""                   # B&B: "leaf" or "pruned"; exhaustive: "enumerated"

    def lp(self, hg: Hypergraph, gamma: Fraction) -> LinearProgram:
        return head_lp(hg, self.leaves, gamma)


@dataclass
class PlanStep:
    block: VertexSet
    union: VertexSet
    choice: object  # "join" or an MmTerm
    trimmed: bool = True


@dataclass
class WidthReport:
    width: Fraction
    witness: Polymatroid
    argmax_lp: int
    plan: list[PlanStep]
    lp_count: int
    records: list[LpRecord] = field(default_factory=list)
    mode: str = "exhaustive"
    omega: Fraction | None = None
    classic: bool = False
    headsets_before_dedup: int = 0
    hypergraph: Hypergraph | None = None


# ---------------------------------------------------------------- exhaustive enumeration

def _covered(leaf, s: frozenset, dom: Dominance) -> bool:
    return leaf in s or any(dom.le(x, leaf) for x in s)


def _increments(clause: Clause, s: frozenset, dom: Dominance):
    """Minimal leaf sets to add to ``s`` so that some alternative of ``clause`` holds; None if none needed."""
    incs: set = set()
    for alt in clause.alternatives:
        base = frozenset(l for l in alt.mandatory if not _covered(l, s, dom))
        open_groups = [g for g in alt.groups if not any(_covered(l, s, dom) for l in g)]
        if not base and not open_groups:
            return None
        for combo in itertools.product(*open_groups):
            incs.add(base | frozenset(combo))
    # only a strictly smaller set can be a proper subset, so compare across sizes
    by_size: dict = {}
    for inc in incs:
        by_size.setdefault(len(inc), []).append(inc)
    minimal = []
    kept: list = []
    for n in sorted(by_size):
        layer = sorted(by_size[n], key=sorted)
        fresh = [inc for inc in layer if not any(m <= inc for m in kept)]
        kept.extend(fresh)
        minimal.extend(fresh)
    return minimal


def enumerate_headsets(clauses: Sequence[Clause], dom: Dominance, limit: int = 2_000_000) -> list[frozenset]:
    out: list[frozenset] = []

    def dfs(idx: int, s: frozenset):
        while idx < len(clauses):
            incs = _increments(clauses[idx], s, dom)
            if incs is None:
                idx += 1
                continue
            for inc in incs:
                dfs(idx + 1, s | inc)
            return
        out.append(s)
        if len(out) > limit:
            raise ResourceError(f"more than {limit} head sets")

    dfs(0, frozenset())
    return out


def _reduce(s: frozenset, dom: Dominance) -> frozenset:
    keep = []
    items = sorted(s)
    for a in items:
        redundant = False
        for b in items:
            if b != a and dom.le(b, a) and not (dom.le(a, b) and a < b):
                redundant = True
                break
        if not redundant:
            keep.append(a)
    return frozenset(keep)


class _Canon:
    """Canonical forms of leaf sets under hypergraph automorphisms.

    Leaves get integer ids (orbits closed under the group), a set becomes a
    bitmask over ids, and each permutation acts through per-byte lookup
    tables. The canonical form is the smallest image.
    """

    def __init__(self, hg: Hypergraph):
        self.perms = automorphisms(hg)
        self.ids: dict = {}
        self.keys: list = []
        self.tables: list | None = None

    def _id(self, key):
        if key not in self.ids:
            for p in self.perms:
                img = permute_leaf(p, key)
                if img not in self.ids:
                    self.ids[img] = len(self.keys)
                    self.keys.append(img)
            self.tables = None
        return self.ids[key]

    def _build(self):
        n = len(self.keys)
        chunks = (n + 7) // 8
        tables = []
        for p in self.perms:
            img = [self.ids[permute_leaf(p, k)] for k in self.keys]
            per = []
            for c in range(chunks):
                t = [0] * 256
                for byte in range(256):
                    m = 0
                    for b in range(8):
                        if byte >> b & 1 and c * 8 + b < n:
                            m |= 1 << img[c * 8 + b]
                    t[byte] = m
                per.append(t)
            tables.append(per)
        self.tables = tables

    def canon(self, s: frozenset) -> frozenset:
        mask = 0
        for k in s:
            mask |= 1 << self._id(k)
        if self.tables is None:
            self._build()
        nbytes = (mask.bit_length() + 7) // 8
        parts = [(c, mask >> (8 * c) & 255) for c in range(nbytes)]
        parts = [(c, b) for c, b in parts if b]
        best = None
        for per in self.tables:
            img = 0
            for c, b in parts:
                img |= per[c][b]
            if best is None or img < best:
                best = img
        return frozenset(self.keys[i] for i in bits(best))


# ---------------------------------------------------------------- solving a family

def _solve_family(hg: Hypergraph, gamma: Fraction, headsets: Sequence[tuple]) -> list[LpRecord]:
    base = base_lp(hg)
    model = FloatModel(base)
    recs = []
    for leaves in headsets:
        fr = model.solve(leaf_rows(leaves, gamma))
        if fr.status != "optimal":
            raise RuntimeError(f"width LP not optimal: {fr.status}")
        recs.append(LpRecord(tuple(leaves), approx=fr.value))
    best = max(r.approx for r in recs)
    for r in recs:
        if r.approx >= best - FLOAT_TOL:
            exact_record(hg, gamma, r, model)
    return recs


def exact_record(hg: Hypergraph, gamma: Fraction, rec: LpRecord, model: FloatModel | None = None) -> LpRecord:
    if rec.solution is not None:
        return rec
    lp = head_lp(hg, rec.leaves, gamma)
    sol = None
    if model is not None:
        sol = certify(lp, model.solve(leaf_rows(rec.leaves, gamma)))
    if sol is None:
        sol = solve_lp(lp)
    rec.solution = sol
    rec.value = sol.value
    return rec


def _finish(hg: Hypergraph, gamma: Fraction | None, recs: list[LpRecord], mode: str, clauses,
            before: int, classic: bool) -> WidthReport:
    certified = [i for i, r in enumerate(recs) if r.value is not None]
    top = max(recs[i].value for i in certified)
    arg = min(i for i in certified if recs[i].value == top)
    for r in recs:
        if r.value is None and r.approx > float(top) + FLOAT_TOL:
            raise RuntimeError("floating scan disagrees with exact certification")
    witness = witness_of(hg, recs[arg].solution)
    plan = best_plan(hg, witness, gamma) if gamma is not None else []
    omega = None if gamma is None else gamma + 2
    return WidthReport(top, witness, arg, plan, len(recs), recs, mode, omega, classic, before, hg)


def _exhaustive(hg: Hypergraph, clauses: list[Clause], gamma: Fraction, classic: bool) -> WidthReport:
    dom = Dominance(hg.k, gamma)
    raw = enumerate_headsets(clauses, dom)
    canon = _Canon(hg)
    uniq: dict = {}
    for s in raw:
        c = canon.canon(_reduce(s, dom))
        uniq.setdefault(c, None)
    headsets = [tuple(sorted(s)) for s in uniq]
    headsets.sort(key=lambda t: (len(t), t))
    recs = _solve_family(hg, gamma, headsets)
    for r in recs:
        r.terminal = "enumerated"
    return _finish(hg, None if classic else gamma, recs, "exhaustive", clauses, len(raw), classic)


# ---------------------------------------------------------------- branch and bound

@dataclass
class _Node:
    leaves: frozenset
    commits: tuple  # sorted (clause index, alternative index) pairs


class _Values:
    """Exact leaf values at one polymatroid, computed on demand."""

    def __init__(self, h: Sequence[Fraction], forms):
        self.h = h
        self.forms = forms
        self.cache: dict = {}

    def __call__(self, leaf) -> Fraction:
        if leaf not in self.cache:
            self.cache[leaf] = evaluate(self.forms(leaf), self.h)
        return self.cache[leaf]

    def group(self, g) -> Fraction:
        return max(self(l) for l in g)

    def alternative(self, alt: Alternative) -> Fraction:
        vals = [self(l) for l in alt.mandatory] + [self.group(g) for g in alt.groups]
        return min(vals)

    def clause(self, cl: Clause) -> Fraction:
        return max(self.alternative(a) for a in cl.alternatives)


def clause_objective(clauses: Sequence[Clause], h: Polymatroid, gamma: Fraction) -> Fraction:
    """The min-max objective (min over clauses) evaluated at a fixed polymatroid."""
    vals = _Values(h.values, lambda key: leaf_form(key, gamma))
    return min(vals.clause(c) for c in clauses)


def _branch_and_bound(hg: Hypergraph, clauses: list[Clause], gamma: Fraction, classic: bool,
                      node_limit: int = 200_000) -> WidthReport:
    """Best-first-ish DFS over partial choices.

    Every solved node yields an ED polymatroid h*, so the objective at h* is a
    valid lower bound and feeds the incumbent. A node stops when its LP bound
    is at most the incumbent (pruned) or when h* already meets its own bound
    (leaf). Otherwise it branches on the constraint h* violates with the
    fewest children. Terminal nodes cover every full choice, each with LP
    value at most the width.
    """
    base = base_lp(hg)
    model = FloatModel(base)
    forms_cache: dict = {}

    def forms(key):
        if key not in forms_cache:
            forms_cache[key] = leaf_form(key, gamma)
        return forms_cache[key]

    def solve(leaves):
        leaves = tuple(sorted(leaves))
        lp = head_lp(hg, leaves, gamma)
        sol = certify(lp, model.solve(leaf_rows(leaves, gamma))) or solve_lp(lp)
        return LpRecord(leaves, sol.value, float(sol.value), sol)

    incumbent: Fraction | None = None
    best: LpRecord | None = None
    terminals: list[LpRecord] = []
    # every clause value is at most h(V), so this leaf keeps the root bounded
    stack = [(frozenset({("U", hg.vertices)}), ())]
    visited = 0
    while stack:
        leaves, commits_t = stack.pop()
        visited += 1
        if visited > node_limit:
            raise ResourceError(f"branch-and-bound exceeded {node_limit} nodes")
        rec = solve(leaves)
        v = rec.value
        if incumbent is not None and v <= incumbent:
            rec.terminal = "pruned"
            terminals.append(rec)
            continue
        vals = _Values(rec.solution.primal, forms)
        per_clause = [vals.clause(c) for c in clauses]
        f = min(per_clause)
        if incumbent is None or f > incumbent:
            incumbent, best = f, rec
        if f >= v:
            rec.terminal = "leaf"
            terminals.append(rec)
            continue
        commits = dict(commits_t)
        children = None
        rank = None
        for ci, cl in enumerate(clauses):
            if ci in commits:
                alt = cl.alternatives[commits[ci]]
                if vals.alternative(alt) >= v:
                    continue
                low = [l for l in alt.mandatory if vals(l) < v]
                if low:  # cannot happen: mandatory leaves are in the LP
                    continue
                g = min(alt.groups, key=vals.group)
                opts = [(leaves | {l}, commits_t) for l in g]
                r = (len(opts), vals.group(g))
            else:
                if per_clause[ci] >= v:
                    continue
                opts = []
                for ai, a in enumerate(cl.alternatives):
                    opts.append((leaves | set(a.mandatory), tuple(sorted(commits_t + ((ci, ai),)))))
                r = (len(opts), per_clause[ci])
            if rank is None or r < rank:
                children, rank = opts, r
        if children is None:
            raise RuntimeError("branch-and-bound found no violated constraint below the LP bound")
        stack.extend(reversed(children))
    if best not in terminals:
        best.terminal = "incumbent"
        terminals.append(best)
    arg = terminals.index(best)
    witness = witness_of(hg, best.solution)
    plan = [] if classic else best_plan(hg, witness, gamma)
    return WidthReport(incumbent, witness, arg, plan, visited, terminals, "pruned",
                       None if classic else gamma + 2, classic, visited, hg)


# ---------------------------------------------------------------- public API

def subw(hg: Hypergraph, mode: str = "exhaustive", via: str = "td") -> WidthReport:
    """Submodular width, through tree decompositions (or GVEOs with ``via="gveo"``)."""
    _check_k(hg, SUBW_MAX_K, "subw")
    clauses = subw_clauses(hg, via)
    if mode == "pruned":
        return _branch_and_bound(hg, clauses, Fraction(0), True)
    return _exhaustive(hg, clauses, Fraction(0), True)


def _gamma(omega) -> Fraction:
    omega = rat(omega)
    if not 2 <= omega <= 3:
        raise ValueError("omega must be a rational in [2, 3]")
    return omega - 2


def osubw(hg: Hypergraph, omega, mode: str = "exhaustive") -> WidthReport:
    gamma = _gamma(omega)
    if mode == "exhaustive":
        _check_k(hg, EXHAUSTIVE_MAX_K, "exhaustive osubw")
        return _exhaustive(hg, osubw_clauses(hg), gamma, False)
    if mode == "pruned":
        _check_k(hg, PRUNED_MAX_K, "pruned osubw")
        return _branch_and_bound(hg, osubw_clauses(hg), gamma, False)
    raise ValueError(f"unknown mode {mode!r}")


def osubw_clique(hg: Hypergraph, omega, mode: str = "exhaustive") -> WidthReport:
    gamma = _gamma(omega)
    _check_k(hg, PRUNED_MAX_K, "osubw_clique")
    clauses = clique_clauses(hg)
    before = 3 ** len(clauses[0].alternatives[0].groups)
    if mode == "pruned":
        rep = _branch_and_bound(hg, clauses, gamma, False)
    else:
        if hg.k > EXHAUSTIVE_MAX_K:
            raise ResourceError(f"exhaustive clique expansion has {before} head sets")
        rep = _exhaustive(hg, clauses, gamma, False)
    rep.headsets_before_dedup = before if mode != "pruned" else rep.headsets_before_dedup
    return rep


def step_cost(h: Polymatroid, hg_i: Hypergraph, block: VertexSet, union: VertexSet, gamma: Fraction,
              emm: _EmmCache | None = None) -> tuple[Fraction, object]:
    """min(h(U_i), EMM_i) and the choice attaining it ("join" or the best MmTerm)."""
    terms = (emm.terms(hg_i, block) if emm else emm_terms(hg_i, block))
    best, choice = h(union), "join"
    for t in terms:
        v = mm_value(h, t, gamma)
        if v < best:
            best, choice = v, t
    return best, choice


def order_cost(hg: Hypergraph, h: Polymatroid, sigma, gamma, emm=None, trimmed_only=True) -> Fraction:
    tr = elimination_trace(hg, sigma)
    idx = tr.trimmed if trimmed_only else range(len(sigma))
    return max(step_cost(h, tr.hypergraphs[i], sigma[i], tr.unions[i], gamma, emm)[0] for i in idx)


def _best_order(hg: Hypergraph, h: Polymatroid, gamma: Fraction):
    """(cost, σ) minimising the max over trimmed steps of min(h(U_i), EMM_i) at ``h``."""
    emm = _EmmCache()
    memo: dict = {}
    best = None
    for sigma in enumerate_gveos(hg.k):
        tr = elimination_trace(hg, sigma)
        worst = Fraction(0)
        for i in tr.trimmed:
            key = (tr.hypergraphs[i].edges, tr.hypergraphs[i].vertices, sigma[i])
            if key not in memo:
                memo[key] = step_cost(h, tr.hypergraphs[i], sigma[i], tr.unions[i], gamma, emm)[0]
            worst = max(worst, memo[key])
            if best is not None and worst >= best[0]:
                break
        else:
            if best is None or worst < best[0]:
                best = (worst, sigma)
    return best


def osubw_lower_bound(hg: Hypergraph, omega, witness: Polymatroid) -> Fraction:
    """min over GVEOs of max over trimmed steps of min(h(U_i), EMM_i) at a fixed polymatroid."""
    gamma = _gamma(omega)
    if witness.k != hg.k or check_polymatroid(witness) is not None:
        raise ValueError("witness is not a polymatroid over the hypergraph's vertices")
    if not is_edge_dominated(hg, witness):
        raise ValueError("witness violates an edge-domination bound")
    return _best_order(hg, witness, gamma)[0]


def subw_lower_bound(hg: Hypergraph, witness: Polymatroid) -> Fraction:
    best = None
    for sigma in enumerate_gveos(hg.k):
        tr = elimination_trace(hg, sigma)
        worst = max(witness(tr.unions[i]) for i in tr.trimmed)
        best = worst if best is None else min(best, worst)
    return best


def best_plan(hg: Hypergraph, h: Polymatroid, gamma: Fraction) -> list[PlanStep]:
    """The GVEO minimising the trimmed cost at ``h``, with the cheapest choice per step."""
    sigma = _best_order(hg, h, gamma)[1]
    tr = elimination_trace(hg, sigma)
    steps = []
    for i, block in enumerate(sigma):
        _, choice = step_cost(h, tr.hypergraphs[i], block, tr.unions[i], gamma)
        steps.append(PlanStep(block, tr.unions[i], choice, i in tr.trimmed))
    return steps


# ---------------------------------------------------------------- closed forms

def closed_form(family: str, omega, **params) -> Fraction:
    w = rat(omega)
    g = w - 2
    if family == "clique":
        k = params.get("k", 3)
        if k == 3:
            return 2 * w / (w + 1)
        if k == 4:
            return (w + 1) / 2
        if k == 5:
            return w / 2 + 1
        return closed_form("cliqueK", w, k=k)
    if family == "cliqueK":
        k = params["k"]
        return (Fraction(math.ceil(k / 3)) + math.ceil((k - 1) / 3) + (k // 3) * g) / 2
    if family == "cycle4":
        return 2 - Fraction(3) / (2 * min(w, Fraction(5, 2)) + 1)
    if family == "pyramid3":
        return 2 - 1 / w
    if family == "pyramidK":
        k = params["k"]
        return 2 - Fraction(2) / (w * (k - 1) - k + 3)
    if family == "example2":
        return 2 - 1 / (2 * (w - 2) + 3)
    raise ValueError(f"unknown family {family!r}")


# ---------------------------------------------------------------- squareC_k

CYCLE_GRID_BUDGET = 5_000_000


def square_omega(a, b, c, omega) -> Fraction:
    g = rat(omega) - 2
    a, b, c = rat(a), rat(b), rat(c)
    return max(a + b + g * c, a + g * b + c, g * a + b + c)


def square_cycle_exponent(k: int, omega, grid_step) -> Fraction:
    """The squareC_k max-min over degree vectors on a grid, computed exactly.

    Raising d⁻_i or d⁺_i without changing d_i = max(d⁻_i, d⁺_i) can only raise
    every P, so the maximum is attained with d⁻_i = d⁺_i = d_i and the search
    runs over one grid value per vertex. The split step takes the max of the
    two sub-arcs and the final product, since the order runs all three.
    """
    import numpy as np
    if k < 3:
        raise ValueError("cycles need k >= 3")
    w = rat(omega)
    step = rat(grid_step)
    steps = 1 / step
    if steps.denominator != 1 or steps < 1:
        raise ValueError("grid_step must divide 1 into an integer number of steps")
    s = steps.numerator
    if (s + 1) ** k > CYCLE_GRID_BUDGET:
        raise ResourceError(f"grid has {(s + 1) ** k} points, budget is {CYCLE_GRID_BUDGET}")
    p, q = w.numerator, w.denominator
    gp = p - 2 * q           # gamma = gp / q
    scale = s * q            # every quantity is an integer over s*q
    grid = np.indices((s + 1,) * k).reshape(k, -1).astype(np.int64)  # d_i * s
    d = grid * q                                                      # d_i * scale
    one = scale

    def sq(i, r, j):
        a, b, c = (s - grid[i]) * q, (s - grid[r]) * q, (s - grid[j]) * q
        ga, gb, gc = (s - grid[i]) * gp, (s - grid[r]) * gp, (s - grid[j]) * gp
        return np.maximum(np.maximum(a + b + gc, a + gb + c), ga + b + c)

    P: dict = {}
    for i in range(k):
        P[(i, 1)] = np.full(grid.shape[1], one, dtype=np.int64)
    for length in range(2, k):
        for i in range(k):
            j = (i + length) % k
            best = np.minimum(P[(i, length - 1)] + d[(j - 1) % k], P[((i + 1) % k, length - 1)] + d[(i + 1) % k])
            for off in range(1, length):
                r = (i + off) % k
                split = np.maximum(np.maximum(P[(i, off)], P[(r, length - off)]), sq(i, r, j))
                best = np.minimum(best, split)
            P[(i, length)] = best
    val = np.min(2 * one - d, axis=0)
    for i in range(k):
        for j in range(i + 1, k):
            pair = np.maximum(P[(i, j - i)], P[(j, k - (j - i))])
            val = np.minimum(val, pair)
    return Fraction(int(val.max()), scale)


# ---------------------------------------------------------------- fractional edge cover

def frac_edge_cover(hg: Hypergraph) -> Fraction:
    n = len(hg.edges)
    lp = LinearProgram(n, {i: Fraction(-1) for i in range(n)})
    for v in bits(hg.vertices):
        lp.add({i: 1 for i, e in enumerate(hg.edges) if e >> v & 1}, GE, 1)
    sol = solve_lp(lp)
    return -sol.value


def agm_check(hg: Hypergraph, h: Polymatroid) -> bool:
    return h(hg.vertices) <= frac_edge_cover(hg)
