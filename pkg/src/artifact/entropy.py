"""Polymatroids, Shannon constraints and matrix-multiplication cost expressions.

Linear forms over entropy terms are dicts ``{mask: coefficient}``. The empty
set never appears as a key since h(∅) = 0 is substituted everywhere.
"""
from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from .hypergraph import Hypergraph, VertexSet, bits, incidence, is_subset, popcount, subsets

LinearForm = dict  # mask -> Fraction


def add_term(form: dict, mask: VertexSet, coef) -> None:
    if mask == 0 or not coef:
        return
    v = form.get(mask, 0) + coef
    if v:
        form[mask] = v
    else:
        form.pop(mask, None)


def evaluate(form: Mapping[VertexSet, Fraction], h: "Polymatroid | Sequence[Fraction]") -> Fraction:
    vals = h.values if isinstance(h, Polymatroid) else h
    return sum((c * vals[m] for m, c in form.items()), Fraction(0))


@dataclass(frozen=True)
class Polymatroid:
    k: int
    values: tuple[Fraction, ...]

    def __post_init__(self):
        if len(self.values) != 1 << self.k:
            raise ValueError("a polymatroid table needs 2^k entries")

    @classmethod
    def from_function(cls, k: int, fn) -> "Polymatroid":
        return cls(k, tuple(Fraction(fn(m)) for m in range(1 << k)))

    @classmethod
    def from_dict(cls, k: int, table: Mapping[VertexSet, object]) -> "Polymatroid":
        return cls(k, tuple(Fraction(table.get(m, 0)) for m in range(1 << k)))

    def __call__(self, s: VertexSet) -> Fraction:
        return self.values[s]

    def scale(self, c) -> "Polymatroid":
        return Polymatroid(self.k, tuple(v * c for v in self.values))


def conditional(h: Polymatroid, y: VertexSet, x: VertexSet) -> Fraction:
    """h(Y|X) = h(XY) - h(X)."""
    return h(x | y) - h(x)


@dataclass(frozen=True)
class ShannonConstraint:
    """Elemental inequality ``form >= 0``."""
    kind: str  # "monotone" or "submodular"
    form: tuple[tuple[VertexSet, int], ...]
    # monotone: (x, rest) meaning h(x|rest) >= 0 with rest = V minus x
    # submodular: (x, y, a) meaning h(x;y|a) >= 0
    args: tuple[VertexSet, ...]

    def describe(self, h: Hypergraph | None = None) -> str:
        f = h.fmt if h else (lambda s: format(s, "b"))
        if self.kind == "monotone":
            x, rest = self.args
            return f"h({f(x)}|{f(rest)}) >= 0"
        x, y, a = self.args
        return f"h({f(x)};{f(y)}|{f(a)}) >= 0"


def elemental_constraints(k: int) -> list[ShannonConstraint]:
    """k monotonicity and C(k,2)*2^(k-2) submodularity inequalities generating the cone."""
    full = (1 << k) - 1
    out = []
    for i in range(k):
        x = 1 << i
        rest = full & ~x
        form = {full: 1}
        add_term(form, rest, -1)
        out.append(ShannonConstraint("monotone", tuple(sorted(form.items())), (x, rest)))
    for i in range(k):
        for j in range(i + 1, k):
            x, y = 1 << i, 1 << j
            for a in subsets(full & ~(x | y)):
                form: dict = {}
                add_term(form, a | x, 1)
                add_term(form, a | y, 1)
                add_term(form, a | x | y, -1)
                add_term(form, a, -1)
                out.append(ShannonConstraint("submodular", tuple(sorted(form.items())), (x, y, a)))
    return out


_ELEMENTAL_CACHE: dict[int, list[ShannonConstraint]] = {}


def elemental(k: int) -> list[ShannonConstraint]:
    if k not in _ELEMENTAL_CACHE:
        _ELEMENTAL_CACHE[k] = elemental_constraints(k)
    return _ELEMENTAL_CACHE[k]


def check_polymatroid(h: Polymatroid | Sequence) -> ShannonConstraint | str | None:
    """None when ``h`` is a polymatroid; otherwise the first violated constraint."""
    vals = h.values if isinstance(h, Polymatroid) else tuple(h)
    n = len(vals)
    k = n.bit_length() - 1
    if n != 1 << k:
        return "table length is not a power of two"
    if vals[0] != 0:
        return "h(empty) != 0"
    for c in elemental(k):
        if sum(coef * vals[m] for m, coef in c.form) < 0:
            return c
    return None


def ed_constraints(h: Hypergraph) -> list[tuple[VertexSet, Fraction]]:
    """One bound h(Z) <= 1 per hyperedge Z, as (Z, 1) pairs."""
    return [(e, Fraction(1)) for e in h.edges]


def is_edge_dominated(hg: Hypergraph, h: Polymatroid) -> bool:
    return all(h(e) <= 1 for e in hg.edges)


# ---------------------------------------------------------------- MM expressions

@dataclass(frozen=True)
class MmTerm:
    """MM(X;Y;Z|G); in elimination use Z is the eliminated block."""
    x: VertexSet
    y: VertexSet
    z: VertexSet
    g: VertexSet = 0

    def __post_init__(self):
        parts = (self.x, self.y, self.z, self.g)
        total = 0
        for p in parts:
            if p & total:
                raise ValueError("MM dimensions must be pairwise disjoint")
            total |= p

    @property
    def dims(self) -> tuple[VertexSet, VertexSet, VertexSet]:
        return (self.x, self.y, self.z)

    def key(self) -> tuple:
        """The expression is symmetric in its three dimensions."""
        return (tuple(sorted(self.dims)), self.g)

    def branch(self, which: int, gamma: Fraction) -> LinearForm:
        """Linear form of the line where dimension ``which`` (0, 1, 2) carries gamma."""
        form: dict = {}
        for idx, d in enumerate(self.dims):
            add_term(form, d | self.g, gamma if idx == which else 1)
        add_term(form, self.g, -(1 + gamma))
        return form

    def branches(self, gamma: Fraction) -> list[LinearForm]:
        return [self.branch(i, gamma) for i in range(3)]

    def fmt(self, hg: Hypergraph) -> str:
        s = f"MM({hg.fmt(self.x)};{hg.fmt(self.y)};{hg.fmt(self.z)}"
        return s + (f"|{hg.fmt(self.g)})" if self.g else ")")


def mm_value(h: Polymatroid, t: MmTerm, gamma) -> Fraction:
    gamma = Fraction(gamma)
    cx, cy, cz = (conditional(h, d, t.g) for d in t.dims)
    base = h(t.g)
    return max(cx + cy + gamma * cz, cx + gamma * cy + cz, gamma * cx + cy + cz) + base


def emm_terms(hg: Hypergraph, x: VertexSet) -> list[MmTerm]:
    """All non-trivial MM arrangements for eliminating block ``x``, deduplicated.

    Only the unions A = ∪𝒜 and B = ∪ℬ matter, so we range over masks
    A, B ⊇ x inside U directly. A mask is reachable iff it is the union of
    the boundary edges it contains, and the pair is admissible iff every
    boundary edge fits in A or in B (then 𝒜, ℬ can be taken maximal).
    """
    boundary, u, nb = incidence(hg, x)
    reach = {}
    for extra in subsets(nb):
        a = x | extra
        cover = 0
        for e in boundary:
            if e & ~a == 0:
                cover |= e
        if cover == a:
            reach[a] = [e for e in boundary if e & ~a == 0]
    seen = set()
    out = []
    for a, ea in reach.items():
        for b, eb in reach.items():
            if a | b != u:
                continue
            inside = set(ea) | set(eb)
            if len(inside) != len(boundary):
                continue
            lo = (a & b) & ~x
            free = (a ^ b) & ~x
            for extra in subsets(free):
                g = lo | extra
                d1 = (a & ~b) & ~g
                d2 = (b & ~a) & ~g
                if not d1 or not d2:
                    continue
                term = MmTerm(min(d1, d2), max(d1, d2), x, g)
                if term not in seen:
                    seen.add(term)
                    out.append(term)
    out.sort(key=lambda t: (t.g, t.x, t.y))
    return out


def emm_terms_literal(hg: Hypergraph, x: VertexSet) -> list[MmTerm]:
    """Reference enumeration over every (𝒜, ℬ) assignment of boundary edges. Exponential; for tests."""
    boundary, _, _ = incidence(hg, x)
    seen = set()
    out = []
    # each boundary edge goes to A only (0), B only (1) or both (2)
    for code in range(3 ** len(boundary)):
        a = b = 0
        in_a = in_b = False
        c = code
        for e in boundary:
            slot = c % 3
            c //= 3
            if slot != 1:
                a |= e
                in_a = True
            if slot != 0:
                b |= e
                in_b = True
        if not (in_a and in_b) or not is_subset(x, a & b):
            continue
        lo = (a & b) & ~x
        free = (a ^ b) & ~x
        for extra in subsets(free):
            g = lo | extra
            d1 = (a & ~b) & ~g
            d2 = (b & ~a) & ~g
            if not d1 or not d2:
                continue
            term = MmTerm(min(d1, d2), max(d1, d2), x, g)
            if term not in seen:
                seen.add(term)
                out.append(term)
    out.sort(key=lambda t: (t.g, t.x, t.y))
    return out


class _NoMM:
    """EMM over an empty arrangement list: no matrix multiplication is available."""
    _inst = None

    def __new__(cls):
        if cls._inst is None:
            cls._inst = super().__new__(cls)
        return cls._inst

    def __repr__(self):
        return "NO_MM"


NO_MM = _NoMM()


def emm_value(h: Polymatroid, hg: Hypergraph, x: VertexSet, gamma) -> Fraction | _NoMM:
    terms = emm_terms(hg, x)
    if not terms:
        return NO_MM
    return min(mm_value(h, t, gamma) for t in terms)


# ---------------------------------------------------------------- random polymatroids

def random_polymatroid(k: int, rng: random.Random, atoms: int = 6, max_weight: int = 6) -> Polymatroid:
    """Random polymatroid: a conic mix of coverage functions and truncated ranks.

    Each vertex is a random subset of weighted atoms (entropic, so Shannon
    holds); a truncation min(h, r) of a modular part adds non-modular shape.
    """
    weights = [Fraction(rng.randint(1, max_weight)) for _ in range(atoms)]
    owns = [rng.getrandbits(atoms) for _ in range(k)]
    cap = Fraction(rng.randint(1, k + 1))
    unit = [Fraction(rng.randint(0, 2)) for _ in range(k)]
    mix = Fraction(rng.randint(0, 3), 2)
    vals = []
    for m in range(1 << k):
        cover = 0
        mod = Fraction(0)
        for i in bits(m):
            cover |= owns[i]
            mod += unit[i]
        cov = sum((weights[a] for a in range(atoms) if cover >> a & 1), Fraction(0))
        vals.append(cov + mix * min(mod, cap))
    return Polymatroid(k, tuple(vals))


def random_ed_polymatroid(hg: Hypergraph, rng: random.Random, **kw) -> Polymatroid:
    """Random polymatroid scaled so that every hyperedge has entropy at most 1."""
    h = random_polymatroid(hg.k, rng, **kw)
    top = max(h(e) for e in hg.edges)
    if top == 0:
        return h
    return h.scale(Fraction(1) / top)


def modular(k: int, weights: Sequence) -> Polymatroid:
    w = [Fraction(x) for x in weights]
    return Polymatroid.from_function(k, lambda m: sum((w[i] for i in bits(m)), Fraction(0)))


def vertex_tripartitions(full: VertexSet) -> Iterable[tuple[VertexSet, VertexSet, VertexSet]]:
    for a in subsets(full):
        if not a:
            continue
        rest = full & ~a
        for b in subsets(rest):
            c = rest & ~b
            if b and c:
                yield a, b, c


__all__ = [
    "LinearForm", "Polymatroid", "conditional", "elemental_constraints", "check_polymatroid",
    "ed_constraints", "MmTerm", "mm_value", "emm_terms", "emm_value", "NO_MM", "random_polymatroid",
    "random_ed_polymatroid", "modular", "add_term", "evaluate", "popcount",
]
