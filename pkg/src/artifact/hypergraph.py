"""Hypergraphs over bitmask vertex sets, elimination orders and tree decompositions.

A vertex set is a plain ``int`` whose bit ``i`` marks vertex ``i``. Every
structure here is immutable, and vertex indices stay global across
eliminations so sets from different steps can be compared directly.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Sequence

CAPACITY = 16

VertexSet = int


def bits(s: VertexSet) -> Iterator[int]:
    """Yield the vertex indices of ``s`` in ascending order."""
    while s:
        low = s & -s
        yield low.bit_length() - 1
        s ^= low


def popcount(s: VertexSet) -> int:
    return bin(s).count("1")


def subsets(s: VertexSet) -> Iterator[VertexSet]:
    """All subsets of ``s`` (including 0 and ``s``) in ascending numeric order."""
    sub = 0
    while True:
        yield sub
        if sub == s:
            return
        sub = (sub - s) & s


def is_subset(a: VertexSet, b: VertexSet) -> bool:
    return a & ~b == 0


def mask_of(indices) -> VertexSet:
    m = 0
    for i in indices:
        m |= 1 << i
    return m


@dataclass(frozen=True)
class Hypergraph:
    names: tuple[str, ...]
    edges: tuple[VertexSet, ...]
    vertices: VertexSet = -1

    def __post_init__(self):
        k = len(self.names)
        if k > CAPACITY:
            raise ValueError(f"at most {CAPACITY} vertices supported, got {k}")
        if len(set(self.names)) != k:
            raise ValueError("vertex names must be distinct")
        full = (1 << k) - 1
        verts = full if self.vertices == -1 else self.vertices
        if verts & ~full:
            raise ValueError("vertex mask exceeds the name table")
        canon = []
        for e in self.edges:
            if e == 0:
                raise ValueError("hyperedges must be non-empty")
            if e & ~verts:
                raise ValueError("hyperedge mentions a vertex outside the hypergraph")
            canon.append(e)
        object.__setattr__(self, "vertices", verts)
        object.__setattr__(self, "edges", tuple(sorted(set(canon))))

    @classmethod
    def from_edges(cls, edges: Sequence[Sequence[str]], names: Sequence[str] | None = None) -> "Hypergraph":
        """Build a hypergraph from named edges; isolated vertices are rejected."""
        if names is None:
            seen: list[str] = []
            for e in edges:
                for v in e:
                    if v not in seen:
                        seen.append(v)
            names = seen
        index = {v: i for i, v in enumerate(names)}
        masks = []
        for e in edges:
            try:
                masks.append(mask_of(index[v] for v in e))
            except KeyError as exc:
                raise ValueError(f"unknown vertex {exc.args[0]!r}") from None
        h = cls(tuple(names), tuple(masks))
        covered = 0
        for m in h.edges:
            covered |= m
        if covered != h.vertices:
            missing = [names[i] for i in bits(h.vertices & ~covered)]
            raise ValueError(f"isolated vertices: {missing}")
        return h

    @property
    def k(self) -> int:
        return len(self.names)

    def fmt(self, s: VertexSet) -> str:
        """Render a vertex set by concatenating names, e.g. ``XYZ``."""
        if s == 0:
            return "{}"
        parts = [self.names[i] for i in bits(s)]
        if all(len(p) == 1 for p in parts):
            return "".join(parts)
        return "{" + ",".join(parts) + "}"

    def parse_set(self, text: str) -> VertexSet:
        index = {v: i for i, v in enumerate(self.names)}
        if all(len(n) == 1 for n in self.names) and "," not in text:
            return mask_of(index[c] for c in text)
        return mask_of(index[c.strip()] for c in text.strip("{}").split(",") if c.strip())

    def __str__(self):
        return "(" + self.fmt(self.vertices) + "; " + ", ".join(self.fmt(e) for e in self.edges) + ")"


def _check_block(h: Hypergraph, x: VertexSet):
    if x == 0 or x & ~h.vertices:
        raise ValueError(f"invalid vertex set {x:#x} for {h}")


def incidence(h: Hypergraph, x: VertexSet) -> tuple[tuple[VertexSet, ...], VertexSet, VertexSet]:
    """Return (boundary edges, their union U, neighbours N = U minus x)."""
    _check_block(h, x)
    boundary = tuple(e for e in h.edges if e & x)
    u = 0
    for e in boundary:
        u |= e
    return boundary, u, u & ~x


def eliminate(h: Hypergraph, x: VertexSet) -> Hypergraph:
    boundary, _, n = incidence(h, x)
    kept = [e for e in h.edges if not e & x]
    if n:
        kept.append(n)
    return Hypergraph(h.names, tuple(kept), h.vertices & ~x)


@dataclass(frozen=True)
class EliminationTrace:
    hypergraphs: tuple[Hypergraph, ...]
    boundaries: tuple[tuple[VertexSet, ...], ...]
    unions: tuple[VertexSet, ...]
    trimmed: tuple[int, ...]  # 0-based step indices


def elimination_trace(h: Hypergraph, sigma: Sequence[VertexSet]) -> EliminationTrace:
    seen = 0
    for block in sigma:
        if block == 0 or block & seen:
            raise ValueError("elimination order blocks must be non-empty and disjoint")
        seen |= block
    if seen != h.vertices:
        raise ValueError("elimination order must partition the vertex set")
    graphs, bounds, unions = [], [], []
    cur = h
    for block in sigma:
        graphs.append(cur)
        b, u, _ = incidence(cur, block)
        bounds.append(b)
        unions.append(u)
        cur = eliminate(cur, block)
    trimmed = tuple(i for i, u in enumerate(unions)
                    if not any(is_subset(u, unions[j]) for j in range(i)))
    return EliminationTrace(tuple(graphs), tuple(bounds), tuple(unions), trimmed)


def enumerate_gveos(k: int) -> Iterator[tuple[VertexSet, ...]]:
    """Every ordered set partition of ``{0..k-1}``, first blocks in ascending bit order."""
    if not 1 <= k <= CAPACITY:
        raise ValueError(f"vertex count must be in 1..{CAPACITY}")
    yield from ordered_partitions((1 << k) - 1)


def ordered_partitions(s: VertexSet) -> Iterator[tuple[VertexSet, ...]]:
    if s == 0:
        yield ()
        return
    for first in subsets(s):
        if first == 0:
            continue
        for rest in ordered_partitions(s & ~first):
            yield (first,) + rest


def enumerate_veos(vertices: VertexSet) -> Iterator[tuple[VertexSet, ...]]:
    """Single-vertex elimination orders, i.e. permutations of the vertex set."""
    if vertices == 0:
        yield ()
        return
    for v in bits(vertices):
        for rest in enumerate_veos(vertices & ~(1 << v)):
            yield (1 << v,) + rest


@dataclass(frozen=True)
class TreeDecomposition:
    bags: tuple[VertexSet, ...]
    tree_edges: tuple[tuple[int, int], ...] = field(default=())


def td_from_veo(h: Hypergraph, sigma: Sequence[VertexSet]) -> TreeDecomposition:
    """Tree decomposition induced by a single-vertex elimination order.

    Bag i is U_i. It hangs below the bag of the earliest later step that
    eliminates one of its neighbours. Bags contained in another bag are then
    contracted into a neighbour on the tree path towards the container.
    """
    if any(popcount(b) != 1 for b in sigma):
        raise ValueError("td_from_veo needs singleton blocks")
    tr = elimination_trace(h, sigma)
    n = len(sigma)
    bags = list(tr.unions)
    adj: dict[int, set[int]] = {i: set() for i in range(n)}
    for i in range(n):
        nb = bags[i] & ~sigma[i]
        for j in range(i + 1, n):
            if sigma[j] & nb:
                adj[i].add(j)
                adj[j].add(i)
                break
    # the forest above is connected through the last bags only if the
    # hypergraph is connected; join components at their roots otherwise
    roots = [i for i in range(n) if not any(j > i for j in adj[i])]
    for a, b in zip(roots, roots[1:]):
        adj[a].add(b)
        adj[b].add(a)
    alive = set(range(n))
    changed = True
    while changed:
        changed = False
        for i in sorted(alive):
            target = next((j for j in sorted(adj[i]) if is_subset(bags[i], bags[j])), None)
            if target is None:
                if any(j != i and is_subset(bags[i], bags[j]) for j in alive):
                    # containment holds along the path, so some neighbour has it
                    raise AssertionError("running intersection broken during pruning")
                continue
            for j in adj[i]:
                if j != target:
                    adj[j].discard(i)
                    adj[j].add(target)
                    adj[target].add(j)
            adj[target].discard(i)
            del adj[i]
            alive.discard(i)
            changed = True
            break
    order = sorted(alive)
    pos = {old: new for new, old in enumerate(order)}
    edges = sorted({(min(pos[a], pos[b]), max(pos[a], pos[b])) for a in order for b in adj[a]})
    return TreeDecomposition(tuple(bags[i] for i in order), tuple(edges))


@dataclass(frozen=True)
class TdViolation:
    kind: str  # "edge-cover", "running-intersection" or "not-a-tree"
    witness: VertexSet | int
    detail: str


def validate_td(h: Hypergraph, td: TreeDecomposition) -> TdViolation | None:
    """Return None when ``td`` is a valid decomposition of ``h``, else the first violation."""
    n = len(td.bags)
    if n == 0:
        return TdViolation("edge-cover", h.edges[0] if h.edges else 0, "no bags")
    adj: dict[int, set[int]] = {i: set() for i in range(n)}
    for a, b in td.tree_edges:
        if not (0 <= a < n and 0 <= b < n) or a == b:
            return TdViolation("not-a-tree", a, f"bad tree edge ({a}, {b})")
        adj[a].add(b)
        adj[b].add(a)
    if len(set(map(tuple, map(sorted, td.tree_edges)))) != n - 1 or len(_component(adj, 0, range(n))) != n:
        return TdViolation("not-a-tree", 0, "tree edges do not form a spanning tree")
    for e in h.edges:
        if not any(is_subset(e, bag) for bag in td.bags):
            return TdViolation("edge-cover", e, f"edge {h.fmt(e)} is in no bag")
    for v in bits(h.vertices):
        holders = [i for i, bag in enumerate(td.bags) if bag >> v & 1]
        if holders and len(_component(adj, holders[0], holders)) != len(holders):
            return TdViolation("running-intersection", 1 << v,
                               f"bags holding {h.names[v]} are disconnected")
    return None


def _component(adj: dict[int, set[int]], start: int, allowed) -> set[int]:
    allowed = set(allowed)
    seen = {start}
    stack = [start]
    while stack:
        cur = stack.pop()
        for nxt in adj[cur]:
            if nxt in allowed and nxt not in seen:
                seen.add(nxt)
                stack.append(nxt)
    return seen


def automorphisms(h: Hypergraph) -> list[tuple[int, ...]]:
    """Vertex permutations mapping the edge set onto itself (identity first)."""
    k = h.k
    edge_set = set(h.edges)
    out = []

    def apply(perm, s):
        return mask_of(perm[i] for i in bits(s))

    def extend(perm: list[int], used: int):
        i = len(perm)
        if i == k:
            if {apply(perm, e) for e in h.edges} == edge_set:
                out.append(tuple(perm))
            return
        for j in range(k):
            if not used >> j & 1:
                perm.append(j)
                extend(perm, used | 1 << j)
                perm.pop()

    extend([], 0)
    return out


def permute(perm: Sequence[int], s: VertexSet) -> VertexSet:
    return mask_of(perm[i] for i in bits(s))


# Named example hypergraphs used across tests and the command line.

def triangle() -> Hypergraph:
    return Hypergraph.from_edges(["XY", "YZ", "XZ"], "XYZ")


def four_cycle() -> Hypergraph:
    return Hypergraph.from_edges(["AB", "BC", "CD", "DA"], "ABCD")


def clique(k: int) -> Hypergraph:
    names = "XYZWVU"[:k] if k <= 6 else [f"X{i}" for i in range(1, k + 1)]
    return Hypergraph.from_edges([[names[i], names[j]] for i in range(k) for j in range(i + 1, k)], list(names))


def cycle(k: int) -> Hypergraph:
    names = [f"X{i}" for i in range(1, k + 1)]
    return Hypergraph.from_edges([[names[i], names[(i + 1) % k]] for i in range(k)], names)


def pyramid(k: int) -> Hypergraph:
    names = ["Y"] + [f"X{i}" for i in range(1, k + 1)]
    edges = [["Y", f"X{i}"] for i in range(1, k + 1)] + [names[1:]]
    return Hypergraph.from_edges(edges, names)
