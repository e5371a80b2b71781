"""Query evaluation: relations, degree partitioning, matrix multiplication, PANDA-ω and plans.

Data values are interned to dense ints when a Database is built, so every
relation holds tuples of ints and every join is integer keyed.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .entropy import emm_terms
from .errors import DefectError, ResourceError
from .hypergraph import Hypergraph, bits, elimination_trace, enumerate_gveos, is_subset
from .rational_lp import rat
from .shannon import (OmegaShannonInequality, build_proof_sequence, find_farkas, from_dual,
                      integralize, normalize, reset)
from . import width as W

STRASSEN_CUTOFF = 64
ENGINE_MAX_K = W.PRUNED_MAX_K
PANDA_STEP_LIMIT = 2_000_000


# ---------------------------------------------------------------- relations

class Relation:
    """A set of tuples over named variables. Treated as immutable."""

    __slots__ = ("schema", "rows", "name")

    def __init__(self, schema: Sequence[str], rows: Iterable = (), name: str = ""):
        self.schema = tuple(schema)
        if len(set(self.schema)) != len(self.schema):
            raise ValueError(f"repeated variable in schema {self.schema}")
        self.rows = rows if isinstance(rows, frozenset) else frozenset(tuple(r) for r in rows)
        n = len(self.schema)
        for r in self.rows:
            if len(r) != n:
                raise ValueError(f"row {r} does not match schema {self.schema}")
            break
        self.name = name

    def __len__(self):
        return len(self.rows)

    def __iter__(self):
        return iter(self.rows)

    def __repr__(self):
        return f"Relation({self.name or '?'}{self.schema}, {len(self.rows)} rows)"

    def ordered(self, schema: Sequence[str]) -> frozenset:
        """Rows re-ordered to ``schema`` (a permutation of ours)."""
        if set(schema) != set(self.schema) or len(schema) != len(self.schema):
            raise ValueError(f"{schema} is not a permutation of {self.schema}")
        if tuple(schema) == self.schema:
            return self.rows
        pos = [self.schema.index(v) for v in schema]
        return frozenset(tuple(r[p] for p in pos) for r in self.rows)


def _positions(schema: Sequence[str], vars_: Sequence[str]) -> list[int]:
    try:
        return [schema.index(v) for v in vars_]
    except ValueError:
        raise ValueError(f"variables {tuple(vars_)} not all in schema {tuple(schema)}") from None


def project(r: Relation, vars_: Sequence[str]) -> Relation:
    vars_ = tuple(vars_)
    if vars_ == r.schema:
        return r
    pos = _positions(r.schema, vars_)
    return Relation(vars_, frozenset(tuple(t[p] for p in pos) for t in r.rows))


def join(r: Relation, s: Relation) -> Relation:
    """Natural hash join; output schema is r's columns then s's new ones."""
    common = [v for v in r.schema if v in s.schema]
    extra = [v for v in s.schema if v not in r.schema]
    if len(r) > len(s):
        build, probe, build_first = s, r, False
    else:
        build, probe, build_first = r, s, True
    bpos = _positions(build.schema, common)
    ppos = _positions(probe.schema, common)
    index: dict = {}
    for t in build.rows:
        index.setdefault(tuple(t[p] for p in bpos), []).append(t)
    spos = _positions(s.schema, extra)
    out = set()
    for t in probe.rows:
        for u in index.get(tuple(t[p] for p in ppos), ()):
            a, b = (u, t) if build_first else (t, u)
            out.add(a + tuple(b[p] for p in spos))
    return Relation(r.schema + tuple(extra), frozenset(out))


def semijoin(r: Relation, s: Relation) -> Relation:
    common = [v for v in r.schema if v in s.schema]
    if not common:
        return r if len(s) else Relation(r.schema)
    keys = {tuple(t[p] for p in _positions(s.schema, common)) for t in s.rows}
    pos = _positions(r.schema, common)
    return Relation(r.schema, frozenset(t for t in r.rows if tuple(t[p] for p in pos) in keys))


def intersect(r: Relation, s: Relation) -> Relation:
    return Relation(r.schema, r.rows & s.ordered(r.schema))


def union(r: Relation, s: Relation) -> Relation:
    return Relation(r.schema, r.rows | s.ordered(r.schema))


# ---------------------------------------------------------------- degrees

def _groups(r: Relation, y: Sequence[str], x: Sequence[str]) -> tuple[list[str], dict]:
    xs = [v for v in x if v in r.schema]
    ys = [v for v in y if v not in x]
    ypos = _positions(r.schema, ys)
    xpos = [r.schema.index(v) for v in xs]
    out: dict = {}
    for t in r.rows:
        out.setdefault(tuple(t[p] for p in xpos), set()).add(tuple(t[p] for p in ypos))
    return xs, out


def degree(r: Relation, y: Sequence[str], x: Sequence[str]) -> int:
    """deg_R(Y|X): the largest number of distinct Y-extensions of one X binding."""
    _, g = _groups(r, y, x)
    return max((len(v) for v in g.values()), default=0)


def degree_at(r: Relation, y: Sequence[str], x: Sequence[str], value: Sequence) -> int:
    """Degree at one binding; ``value`` lines up with ``x``, and only the columns present in R are used."""
    if len(value) != len(x):
        raise ValueError("binding length differs from the conditioning variables")
    xs, g = _groups(r, y, x)
    key = tuple(value[list(x).index(v)] for v in xs)
    return len(g.get(key, ()))


def partition_by_degree(r: Relation, y: Sequence[str], x: Sequence[str], delta) -> tuple[Relation, Relation]:
    """Split R into heavy X-bindings (degree above delta, projected) and the light rows."""
    if delta <= 0:
        raise ValueError("degree threshold must be positive")
    xs, g = _groups(r, y, x)
    heavy = {k for k, v in g.items() if len(v) > delta}
    pos = [r.schema.index(v) for v in xs]
    light = frozenset(t for t in r.rows if tuple(t[p] for p in pos) not in heavy)
    return Relation(tuple(xs), frozenset(heavy)), Relation(r.schema, light)


def bucket_by_degree(r: Relation, y: Sequence[str], x: Sequence[str]) -> list[tuple[Relation, tuple[int, int]]]:
    """Group rows by the power-of-two band [2^i, 2^(i+1)) holding their X-binding's degree."""
    xs, g = _groups(r, y, x)
    band: dict = {}
    for k, v in g.items():
        band.setdefault(len(v).bit_length() - 1, set()).add(k)
    pos = [r.schema.index(v) for v in xs]
    out = []
    for i in sorted(band):
        keys = band[i]
        rows = frozenset(t for t in r.rows if tuple(t[p] for p in pos) in keys)
        out.append((Relation(r.schema, rows), (1 << i, 1 << (i + 1))))
    return out


# ---------------------------------------------------------------- database and queries

@dataclass(frozen=True)
class Query:
    name: str
    atoms: tuple[tuple[str, tuple[str, ...]], ...]

    def __post_init__(self):
        if not self.atoms:
            raise ValueError("a query needs at least one atom")
        seen = set()
        for a, vs in self.atoms:
            if a in seen:
                raise ValueError(f"duplicate atom name {a!r}")
            if not vs:
                raise ValueError(f"atom {a!r} has no variables")
            if len(set(vs)) != len(vs):
                raise ValueError(f"atom {a!r} repeats a variable")
            seen.add(a)

    @classmethod
    def of(cls, text_atoms: dict | Sequence, name: str = "Q") -> "Query":
        """``Query.of({"R": "XY", "S": "YZ"})`` or a list of (name, vars) pairs."""
        items = text_atoms.items() if isinstance(text_atoms, dict) else text_atoms
        return cls(name, tuple((a, tuple(vs)) for a, vs in items))

    @property
    def variables(self) -> tuple[str, ...]:
        out: list[str] = []
        for _, vs in self.atoms:
            out.extend(v for v in vs if v not in out)
        return tuple(out)

    def hypergraph(self) -> Hypergraph:
        return Hypergraph.from_edges([vs for _, vs in self.atoms], self.variables)


class Database:
    """Relations by atom name, with all values interned to dense ints."""

    def __init__(self):
        self.relations: dict[str, Relation] = {}
        self.ids: dict = {}
        self.values: list = []

    def intern(self, v) -> int:
        i = self.ids.get(v)
        if i is None:
            i = self.ids[v] = len(self.values)
            self.values.append(v)
        return i

    def add(self, name: str, schema: Sequence[str], rows: Iterable) -> Relation:
        r = Relation(schema, frozenset(tuple(self.intern(v) for v in row) for row in rows), name)
        self.relations[name] = r
        return r

    @classmethod
    def from_rows(cls, query: Query, data: dict) -> "Database":
        db = cls()
        for a, vs in query.atoms:
            db.add(a, vs, data.get(a, ()))
        return db

    @property
    def N(self) -> int:
        return sum(len(r) for r in self.relations.values())


def _atom(db: Database, name: str, vs: Sequence[str]) -> Relation:
    try:
        r = db.relations[name]
    except KeyError:
        raise ValueError(f"database has no relation {name!r}") from None
    if len(r.schema) != len(vs):
        raise ValueError(f"relation {name!r} has arity {len(r.schema)}, query uses {len(vs)}")
    # the query's variable names win over the stored header
    return Relation(tuple(vs), r.rows, name)


def brute_force(q: Query, db: Database) -> bool:
    """Nested-loop join in atom order, with an index on already bound columns."""
    atoms = [_atom(db, a, vs) for a, vs in q.atoms]
    if any(not len(r) for r in atoms):
        return False
    bound: set = set()
    plan = []
    for r in atoms:
        key = [i for i, v in enumerate(r.schema) if v in bound]
        index: dict = {}
        for t in r.rows:
            index.setdefault(tuple(t[i] for i in key), []).append(t)
        plan.append((r.schema, key, index))
        bound.update(r.schema)

    def go(i: int, env: dict) -> bool:
        if i == len(plan):
            return True
        schema, key, index = plan[i]
        for t in index.get(tuple(env[schema[p]] for p in key), ()):
            nxt = dict(env)
            nxt.update(zip(schema, t))
            if go(i + 1, nxt):
                return True
        return False

    return go(0, {})


def full_join(q: Query, db: Database) -> Relation:
    """All satisfying assignments over ``q.variables`` (test oracle for coverage)."""
    atoms = [_atom(db, a, vs) for a, vs in q.atoms]
    out = atoms[0]
    for r in atoms[1:]:
        out = join(out, r)
    return project(out, q.variables)


# ---------------------------------------------------------------- matrices

@dataclass
class DenseMatrix:
    entries: np.ndarray
    row_index: dict = field(default_factory=dict)
    col_index: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.entries.ndim != 2:
            raise ValueError("matrix entries must be two-dimensional")
        if not self.row_index:
            self.row_index = {i: i for i in range(self.entries.shape[0])}
        if not self.col_index:
            self.col_index = {j: j for j in range(self.entries.shape[1])}
        if (len(self.row_index), len(self.col_index)) != self.entries.shape:
            raise ValueError("index maps do not match the matrix shape")

    @property
    def rows(self) -> int:
        return self.entries.shape[0]

    @property
    def cols(self) -> int:
        return self.entries.shape[1]


def _dtype_for(a: np.ndarray, b: np.ndarray):
    if a.dtype == object or b.dtype == object:
        return object
    if not a.size or not b.size:
        return np.int64
    bound = int(np.abs(a).max()) * int(np.abs(b).max()) * max(a.shape[1], 1)
    # Strassen sums up to four partial products per level; leave headroom for that
    levels = max(1, max(a.shape + b.shape)).bit_length()
    return np.int64 if bound * 4 ** levels < 2 ** 62 else object


def _naive(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    out = np.zeros((a.shape[0], b.shape[1]), dtype=a.dtype)
    for i in range(a.shape[0]):
        for j in range(a.shape[1]):
            if a[i, j]:
                out[i] += a[i, j] * b[j]
    return out


def _strassen(a: np.ndarray, b: np.ndarray, cutoff: int) -> np.ndarray:
    n = a.shape[0]
    if n <= cutoff:
        return a @ b if a.dtype != object else _naive(a, b)
    h = n // 2
    a11, a12, a21, a22 = a[:h, :h], a[:h, h:], a[h:, :h], a[h:, h:]
    b11, b12, b21, b22 = b[:h, :h], b[:h, h:], b[h:, :h], b[h:, h:]
    m1 = _strassen(a11 + a22, b11 + b22, cutoff)
    m2 = _strassen(a21 + a22, b11, cutoff)
    m3 = _strassen(a11, b12 - b22, cutoff)
    m4 = _strassen(a22, b21 - b11, cutoff)
    m5 = _strassen(a11 + a12, b22, cutoff)
    m6 = _strassen(a21 - a11, b11 + b12, cutoff)
    m7 = _strassen(a12 - a22, b21 + b22, cutoff)
    out = np.empty((n, n), dtype=a.dtype)
    out[:h, :h] = m1 + m4 - m5 + m7
    out[:h, h:] = m3 + m5
    out[h:, :h] = m2 + m4
    out[h:, h:] = m1 - m2 + m3 + m6
    return out


def strassen(a: np.ndarray, b: np.ndarray, cutoff: int = STRASSEN_CUTOFF) -> np.ndarray:
    m, k = a.shape
    p = b.shape[1]
    n = 1
    while n < max(m, k, p, 1):
        n *= 2
    dt = _dtype_for(a, b)
    pa = np.zeros((n, n), dtype=dt)
    pb = np.zeros((n, n), dtype=dt)
    pa[:m, :k] = a
    pb[:k, :p] = b
    return _strassen(pa, pb, max(cutoff, 1))[:m, :p]


def blocked_rect(a: np.ndarray, b: np.ndarray, cutoff: int = STRASSEN_CUTOFF) -> np.ndarray:
    """Cut an (m×k)·(k×p) product into d×d blocks, d the smallest dimension, each done by Strassen."""
    m, k = a.shape
    p = b.shape[1]
    dt = _dtype_for(a, b)
    if not (m and k and p):
        return np.zeros((m, p), dtype=dt)
    d = min(m, k, p)
    up = lambda v: -(-v // d) * d  # noqa: E731
    pa = np.zeros((up(m), up(k)), dtype=dt)
    pb = np.zeros((up(k), up(p)), dtype=dt)
    pa[:m, :k] = a
    pb[:k, :p] = b
    out = np.zeros((up(m), up(p)), dtype=dt)
    for i in range(0, up(m), d):
        for l in range(0, up(p), d):
            acc = out[i:i + d, l:l + d]
            for j in range(0, up(k), d):
                acc += strassen(pa[i:i + d, j:j + d], pb[j:j + d, l:l + d], cutoff)
    return out[:m, :p]


def matmul(a: DenseMatrix, b: DenseMatrix, algorithm: str = "strassen", cutoff: int = STRASSEN_CUTOFF) -> DenseMatrix:
    if a.cols != b.rows:
        raise ValueError(f"cannot multiply {a.rows}×{a.cols} by {b.rows}×{b.cols}")
    x, y = a.entries, b.entries
    if algorithm == "naive":
        dt = _dtype_for(x, y)
        c = _naive(x.astype(dt), y.astype(dt))
    elif algorithm == "strassen":
        c = strassen(x, y, cutoff)
    elif algorithm == "blocked_rect":
        c = blocked_rect(x, y, cutoff)
    else:
        raise ValueError(f"unknown algorithm {algorithm!r}")
    return DenseMatrix(c, dict(a.row_index), dict(b.col_index))


def mm_work(a: int, b: int, c: int, omega) -> float:
    """Cost model of a blocked product: (abc / d³) blocks of size d, each d^ω."""
    d = min(a, b, c)
    if not d:
        return 0.0
    return a * b * c / d ** 3 * d ** float(omega)


class WorkLedger:
    def __init__(self):
        self.units = 0.0
        self.items: list[tuple[str, float]] = []

    def charge(self, what: str, amount) -> None:
        self.units += amount
        self.items.append((what, float(amount)))


def group_by_mm(left: Relation, right: Relation, contract: Sequence[str],
                algorithm: str = "strassen", ledger: WorkLedger | None = None, omega=3) -> Relation:
    """Boolean product per group binding.

    Variables shared by both sides but not contracted form the group G. For
    each g we multiply the slice left(row, contract) by right(contract, col)
    and keep the (row, col, g) combinations with a nonzero count.
    """
    contract = tuple(contract)
    group = tuple(v for v in left.schema if v in right.schema and v not in contract)
    rvars = tuple(v for v in left.schema if v not in contract and v not in group)
    cvars = tuple(v for v in right.schema if v not in contract and v not in group)
    for v in contract:
        if v not in left.schema or v not in right.schema:
            raise ValueError(f"contracted variable {v!r} missing from one side")
    lp = (_positions(left.schema, group), _positions(left.schema, rvars), _positions(left.schema, contract))
    rp = (_positions(right.schema, group), _positions(right.schema, contract), _positions(right.schema, cvars))
    lslices: dict = {}
    for t in left.rows:
        lslices.setdefault(tuple(t[p] for p in lp[0]), []).append(
            (tuple(t[p] for p in lp[1]), tuple(t[p] for p in lp[2])))
    rslices: dict = {}
    for t in right.rows:
        rslices.setdefault(tuple(t[p] for p in rp[0]), []).append(
            (tuple(t[p] for p in rp[1]), tuple(t[p] for p in rp[2])))
    out = set()
    for g, lrows in lslices.items():
        rrows = rslices.get(g)
        if not rrows:
            continue
        ri, ki, ci = {}, {}, {}
        for r, k in lrows:
            ri.setdefault(r, len(ri))
            ki.setdefault(k, len(ki))
        for k, c in rrows:
            ci.setdefault(c, len(ci))
        kk = dict(ki)
        for k, _ in rrows:
            kk.setdefault(k, len(kk))
        a = np.zeros((len(ri), len(kk)), dtype=np.int64)
        b = np.zeros((len(kk), len(ci)), dtype=np.int64)
        for r, k in lrows:
            a[ri[r], kk[k]] = 1
        for k, c in rrows:
            b[kk[k], ci[c]] = 1
        if ledger is not None:
            ledger.charge("mm", mm_work(len(ri), len(kk), len(ci), omega))
        c = matmul(DenseMatrix(a), DenseMatrix(b), algorithm).entries
        rkeys = list(ri)
        ckeys = list(ci)
        for i, j in zip(*np.nonzero(c)):
            out.add(rkeys[i] + ckeys[j] + g)
    return Relation(rvars + cvars + group, frozenset(out))


# ---------------------------------------------------------------- triangle pipeline

def triangle_delta(n: int, omega) -> int:
    """⌈N^((ω-1)/(ω+1))⌉ computed exactly for rational ω."""
    omega = rat(omega)
    p, q = omega.numerator, omega.denominator
    if n <= 1:
        return 1
    # D^(p+q) >= N^(p-q)  <=>  D >= N^((ω-1)/(ω+1))
    target = n ** (p - q)
    d = max(1, int(n ** float((omega - 1) / (omega + 1))) - 1)
    while d ** (p + q) < target:
        d += 1
    while d > 1 and (d - 1) ** (p + q) >= target:
        d -= 1
    return d


def _find_triangle(db: Database) -> tuple[Relation, Relation, Relation, str, str, str]:
    try:
        r, s, t = db.relations["R"], db.relations["S"], db.relations["T"]
    except KeyError:
        raise ValueError("triangle evaluation needs relations R, S and T") from None
    if not (len(r.schema) == len(s.schema) == len(t.schema) == 2):
        raise ValueError("triangle relations must be binary")
    x, y = r.schema
    if s.schema[0] != y or s.schema[1] in (x, y):
        raise ValueError(f"S must be over ({y}, Z), got {s.schema}")
    z = s.schema[1]
    if set(t.schema) != {x, z}:
        raise ValueError(f"T must be over ({x}, {z}), got {t.schema}")
    return r, s, Relation((x, z), t.ordered((x, z)), "T"), x, y, z


def _light_pass(big: Relation, light: Relation, check: Relation, on: str, ledger: WorkLedger,
                cap: int, what: str) -> bool:
    """big ⋈ light on one variable, each produced tuple probed against ``check``."""
    idx: dict = {}
    lp = light.schema.index(on)
    for t in light.rows:
        idx.setdefault(t[lp], []).append(t)
    bp = big.schema.index(on)
    schema = big.schema + tuple(v for v in light.schema if v not in big.schema)
    cpos = [schema.index(v) for v in check.schema]
    lo = 1 - lp
    work = 0
    found = False
    for t in big.rows:
        for u in idx.get(t[bp], ()):
            work += 1
            row = t + (u[lo],)
            if tuple(row[p] for p in cpos) in check.rows:
                found = True
    ledger.charge(what, work)
    if work > cap:
        raise DefectError(f"{what} did {work} work, above the N·Δ bound {cap}")
    return found


def evaluate_triangle(db: Database, omega, ledger: WorkLedger | None = None) -> bool:
    """The heavy/light triangle algorithm with a work ledger.

    Three partition+join passes catch triangles with a light vertex; the
    all-heavy ones come out of one matrix product followed by a join with T.
    """
    r, s, t, x, y, z = _find_triangle(db)
    ledger = ledger if ledger is not None else WorkLedger()
    n = db.N
    if not (len(r) and len(s) and len(t)):
        return False
    delta = triangle_delta(n, omega)
    cap = n * delta
    ledger.charge("scan", n)
    r_h, r_l = partition_by_degree(r, (y,), (x,), delta)
    s_h, s_l = partition_by_degree(s, (z,), (y,), delta)
    t_zx = Relation((z, x), t.ordered((z, x)), "T")
    t_h, t_l = partition_by_degree(t_zx, (x,), (z,), delta)
    hits = [
        _light_pass(t, r_l, s, x, ledger, cap, "light X"),
        _light_pass(r, s_l, t, y, ledger, cap, "light Y"),
        _light_pass(s, t_l, r, z, ledger, cap, "light Z"),
    ]
    dims = (len(r_h), len(s_h), len(t_h))
    bound = n / delta
    if any(d > bound for d in dims):
        raise DefectError(f"heavy part {dims} exceeds N/Δ = {bound}")
    m1 = semijoin(semijoin(r, r_h), Relation((y,), s_h.rows))
    m2 = semijoin(semijoin(s, s_h), Relation((z,), t_h.rows))
    ledger.charge("build", len(m1) + len(m2))
    m = group_by_mm(m1, m2, (y,), ledger=ledger, omega=omega)
    q_h = semijoin(m, t)
    ledger.charge("final join", len(m) + len(t))
    return any(hits) or bool(len(q_h))


# ---------------------------------------------------------------- PANDA-ω for one disjunctive rule

@dataclass
class MmTriple:
    """Tables for one MM group: s over XG, t over YG, w over ZG (None when ζ = 0)."""
    x: int
    y: int
    z: int
    g: int
    s: Relation
    t: Relation
    w: Relation | None
    exponents: tuple[Fraction, Fraction, Fraction]


@dataclass
class OutputTables:
    P: list[tuple[int, Relation]] = field(default_factory=list)
    triples: list[MmTriple] = field(default_factory=list)
    branches: int = 0
    resets: int = 0
    drops: int = 0

    def covers(self, hg: Hypergraph, assignment: dict) -> bool:
        def has(rel: Relation | None) -> bool:
            return rel is None or tuple(assignment[v] for v in rel.schema) in rel.rows
        if any(has(p) for _, p in self.P):
            return True
        return any(has(tr.s) and has(tr.t) and has(tr.w) for tr in self.triples)

    def sizes(self) -> list[int]:
        out = [len(p) for _, p in self.P]
        for tr in self.triples:
            out += [len(tr.s), len(tr.t)] + ([len(tr.w)] if tr.w is not None else [])
        return out


_SEQ_CACHE: dict = {}


def _prepared(ineq: OmegaShannonInequality):
    """Integral, normalized inequality with witness plus its proof sequence; memoized on the terms."""
    key = (ineq.k, ineq.omega, ineq.plain, ineq.mm, ineq.rhs)
    hit = _SEQ_CACHE.get(key)
    if hit is None:
        if ineq.witness is None:
            ineq = replace(ineq, witness=find_farkas(ineq))
        ineq = normalize(integralize(ineq))
        if not ineq.is_integral():
            ineq = normalize(integralize(replace(ineq, witness=None)))
        hit = (ineq, _runs(build_proof_sequence(ineq), ineq), _needs(ineq))
        if len(_SEQ_CACHE) > 50_000:
            _SEQ_CACHE.clear()
        _SEQ_CACHE[key] = hit
    return hit


def _apply_n(ms: dict, st, n: int) -> bool:
    """Unit-count effect of ``n`` copies of a step; False if some term runs short."""
    x, y = st.x, st.y & ~st.x
    if st.kind == "decomposition":
        take, give = [(x | y, 0)], [(x, 0), (y, x)]
    elif st.kind == "composition":
        take, give = [(x, 0), (y, x)], [(x | y, 0)]
    elif st.kind == "monotonicity":
        take, give = [(x | y, 0)], [(x, 0)]
    else:
        take, give = [(y, x)], [(y & ~(x | st.z), x | st.z)]
    for k in take:
        if k[0]:
            if ms.get(k, 0) < n:
                return False
            ms[k] -= n
    for k in give:
        if k[0]:
            ms[k] = ms.get(k, 0) + n
    return True


def _runs(steps, ineq: OmegaShannonInequality, max_period: int = 8) -> list:
    """Batch tandem repeats of short blocks into (step, count) pairs.

    Unit counts do not depend on the data, so a batch is kept only when
    replaying the counts shows every step still has its inputs.
    """
    ms: dict = {}
    for w, y, x in ineq.rhs:
        ms[(y & ~x, x)] = ms.get((y & ~x, x), 0) + int(w)
    out: list = []
    i = 0
    while i < len(steps):
        best = None
        for p in range(1, max_period + 1):
            block = steps[i:i + p]
            if len(block) < p:
                break
            r = 1
            while steps[i + r * p:i + (r + 1) * p] == block:
                r += 1
            if r > 1 and (best is None or r * p > best[0] * best[1]):
                best = (r, p)
        if best:
            r, p = best
            trial = dict(ms)
            if all(_apply_n(trial, st, r) for st in steps[i:i + p]):
                ms = trial
                out.extend((st, r) for st in steps[i:i + p])
                i += r * p
                continue
        _apply_n(ms, steps[i], 1)
        out.append((steps[i], 1))
        i += 1
    return out


def _needs(ineq: OmegaShannonInequality):
    """Integer requirements for the two stopping conditions, precomputed once."""
    lam = [u for l, u in ineq.plain if l > 0]
    groups = []
    for j, grp in enumerate(ineq.mm):
        need = [((grp.x, grp.g), int(grp.alpha)), ((grp.y, grp.g), int(grp.beta)), ((grp.z, grp.g), int(grp.zeta))]
        if grp.g:
            need.append(((grp.g, 0), int(grp.kappa)))
        groups.append((j, grp, need, [(k, c) for k, c in need if c > 0]))
    watched = {(u, 0) for u in lam} | {k for *_, pos in groups for k, _ in pos}
    return lam, groups, watched


def _as_rhs(ms: dict) -> tuple:
    return tuple(sorted(((Fraction(c), y, x) for (y, x), c in ms.items() if c), key=lambda t: (t[2], t[1])))


class _Fits:
    """Exact test of Π base^exp ≤ N^opt with rational exponents."""

    def __init__(self, n: int, opt: Fraction):
        self.n = max(n, 1)
        self.opt = Fraction(opt)
        self.memo: dict = {}

    def __call__(self, factors: Sequence[tuple[int, Fraction]], scale: Fraction = Fraction(1)) -> bool:
        key = (tuple(factors), scale)
        hit = self.memo.get(key)
        if hit is None:
            hit = self.memo[key] = self._test(factors, scale)
        return hit

    def _test(self, factors, scale) -> bool:
        if any(b == 0 and e > 0 for b, e in factors):
            return True
        exps = [Fraction(e) for _, e in factors] + [self.opt * scale]
        d = 1
        for e in exps:
            d = math.lcm(d, e.denominator)
        lhs = 1
        for b, e in factors:
            lhs *= b ** int(e * d)
        return lhs <= self.n ** int(self.opt * scale * d)


class _Panda:
    def __init__(self, hg: Hypergraph, tables: dict, n: int, opt: Fraction):
        self.hg = hg
        self.fits = _Fits(n, opt)
        self.init = tables
        self.out = OutputTables()
        self.steps = 0
        self.pin: list = []          # keep cached objects alive so id() keys stay unique
        self.cache: dict = {}

    def names(self, mask: int) -> tuple[str, ...]:
        return tuple(self.hg.names[i] for i in bits(mask))

    def _memo(self, key, fn):
        hit = self.cache.get(key)
        if hit is None:
            hit = self.cache[key] = fn()
            self.pin.append(hit)
        return hit

    def proj(self, r: Relation, mask: int) -> Relation:
        return self._memo(("p", id(r), mask), lambda: project(r, self.names(mask)))

    def deg(self, r: Relation, y: int, x: int) -> int:
        return self._memo(("d", id(r), y, x), lambda: [degree(r, self.names(y), self.names(x))])[0]

    def buckets(self, r: Relation, x: int, y: int) -> list[Relation]:
        """Degree bands, each halved when needed so |π_X(B)|·deg_B(Y|X) ≤ |R|."""
        def build():
            xs, ys = self.names(x), self.names(y)
            base = len(r)
            out = []
            for b, _ in bucket_by_degree(r, ys, xs):
                _, g = _groups(b, ys, xs)
                if len(g) * max(len(v) for v in g.values()) <= base:
                    out.append(b)
                    continue
                keys = sorted(g, key=lambda k: len(g[k]))
                pos = [b.schema.index(v) for v in xs if v in b.schema]
                half = len(keys) // 2
                for part in (set(keys[:half]), set(keys[half:])):
                    out.append(Relation(b.schema, frozenset(t for t in b.rows if tuple(t[p] for p in pos) in part)))
            return out
        return self._memo(("b", id(r), x, y), build)

    def put(self, tables: dict, key, r: Relation) -> None:
        old = tables.get(key)
        if old is None or old is r:
            tables[key] = r
        elif set(old.schema) == set(r.schema):
            tables[key] = self._memo(("i", id(old), id(r)), lambda: intersect(old, r))
        elif len(r) < len(old):
            tables[key] = r

    # -- driver

    def run(self, ineq: OmegaShannonInequality) -> OutputTables:
        ineq, steps, _ = _prepared(ineq)
        tables: dict = {}
        ms: dict = {}
        for w, y, x in ineq.rhs:
            ms[(y & ~x, x)] = ms.get((y & ~x, x), 0) + int(w)
            tables[(y & ~x, x)] = self.init[y]
        # oversized inputs are dropped up front with reset()
        while True:
            big = [k for k in ms if k[1] == 0 and not self.fits([(len(tables[k]), Fraction(1))])]
            if not big:
                break
            ineq = self._reset(ineq, big[0])
            ms = self._ms(ineq)
        if ineq.mass <= 0:
            raise DefectError("PANDA started with no LHS mass")
        prep = _prepared(ineq)
        self._go(*prep, 0, self._ms(prep[0]), tables, {})
        return self.out

    @staticmethod
    def _ms(ineq: OmegaShannonInequality) -> dict:
        ms: dict = {}
        for w, y, x in ineq.rhs:
            ms[(y & ~x, x)] = ms.get((y & ~x, x), 0) + int(w)
        return ms

    def _reset(self, ineq: OmegaShannonInequality, key) -> OmegaShannonInequality:
        ineq = _prepared(ineq)[0]
        idx = [i for i, (w, y, x) in enumerate(ineq.rhs) if (y & ~x, x) == key and w > 0]
        if not idx:
            raise DefectError("reset target missing from the inequality")
        self.out.resets += 1
        out = reset(ineq, idx[0])
        if out.mass <= 0:
            raise DefectError("reset left no LHS mass")
        return out

    def _reform(self, ineq: OmegaShannonInequality, ms: dict, mm=None):
        cur = replace(ineq, mm=ineq.mm if mm is None else mm, rhs=_as_rhs(ms), witness=None)
        if cur.mass <= 0:
            raise DefectError("PANDA branch ran out of LHS mass")
        return _prepared(cur)

    def _check(self, ineq, needs, ms, tables):
        """Stop (True), continue (None), or a reformed (ineq, steps, needs) after dropping a group."""
        lam, groups, _ = needs
        for u in lam:
            if (u, 0) in ms:
                self.out.P.append((u, self.proj(tables[(u, 0)], u)))
                return True
        for j, grp, need, pos in groups:
            if any(ms.get(k, 0) < c for k, c in pos):
                continue
            gt = tables.get((grp.g, 0)) if grp.g else None
            parts = []
            for (key, c) in need[:3]:
                if c <= 0:
                    parts.append(None)
                    continue
                r = tables[key]
                mask = key[0] | grp.g
                if not set(self.names(mask)) <= set(r.schema):
                    parts.append(project(join(r, gt), self.names(mask)))
                else:
                    parts.append(self.proj(r, mask))
            gn = self.names(grp.g)
            if grp.g:
                keyset = set(project(gt, gn).rows)
                for p in parts:
                    if p is not None:
                        keyset &= set(project(p, gn).rows)
                gkeys = Relation(gn, frozenset(keyset))
                parts = [None if p is None else semijoin(p, gkeys) for p in parts]
                ng = len(keyset)
            else:
                ng = 1 if all(p is None or len(p) for p in parts) else 0
            factors = [(ng, grp.kappa)]
            for p, dim, c in zip(parts, (grp.x, grp.y, grp.z), (grp.alpha, grp.beta, grp.zeta)):
                if p is not None:
                    factors.append((degree(p, self.names(dim), gn), c))
            if self.fits(factors, grp.kappa):
                k = grp.kappa
                self.out.triples.append(MmTriple(grp.x, grp.y, grp.z, grp.g, parts[0], parts[1], parts[2],
                                                 (grp.alpha / k, grp.beta / k, grp.zeta / k)))
                return True
            # too expensive: drop the group from both sides
            self.out.drops += 1
            ms = dict(ms)
            for key, c in need:
                if c > 0:
                    ms[key] -= c
                    if not ms[key]:
                        del ms[key]
            return self._reform(ineq, ms, tuple(g for i, g in enumerate(ineq.mm) if i != j))
        return None

    def _go(self, ineq, steps, needs, pc, ms, tables, choices):
        self.out.branches += 1
        dirty = True
        while True:
            self.steps += 1
            if self.steps > PANDA_STEP_LIMIT:
                raise ResourceError("PANDA exceeded its step budget")
            r = self._check(ineq, needs, ms, tables) if dirty else None
            dirty = False
            if r is True:
                return
            if r is not None:
                ineq, steps, needs = r
                pc = 0
                ms = self._ms(ineq)
                dirty = True
                continue
            if pc >= len(steps):
                raise DefectError("proof sequence ended before any LHS term was reached")
            st, n = steps[pc]
            pc += 1
            x, y = st.x, st.y & ~st.x
            dirty = bool(self._touches(st, x, y) & needs[2])
            if st.kind == "decomposition":
                key = (x | y, 0)
                rel = self.proj(tables[key], x | y)
                self._take(ms, key, n)
                if not x:
                    self._give(ms, tables, (y, 0), rel, n)
                    continue
                ck = (id(rel), x, y)
                if ck in choices:
                    self._split(ms, tables, x, y, choices[ck], n)
                    continue
                for b in self.buckets(rel, x, y):
                    ms2, t2, c2 = dict(ms), dict(tables), dict(choices)
                    c2[ck] = b
                    self._split(ms2, t2, x, y, b, n)
                    self._go(ineq, steps, needs, pc, ms2, t2, c2)
                return
            if st.kind == "composition":
                s = tables[(y, x)]
                if x:
                    rx = tables[(x, 0)]
                    ok = self.fits([(len(rx), Fraction(1)), (self.deg(s, y, x), Fraction(1))])
                else:
                    rx, ok = None, True
                if ok:
                    self._take(ms, (x, 0), n)
                    self._take(ms, (y, x), n)
                    res = self.proj(s, y) if rx is None else \
                        self._memo(("j", id(rx), id(s), x | y), lambda: project(join(rx, s), self.names(x | y)))
                    self._give(ms, tables, (x | y, 0), res, n)
                    continue
                self._take(ms, (x, 0))
                self._take(ms, (y, x))
                # the join would be too large: compose symbolically, then drop the result
                ms[(x | y, 0)] = ms.get((x | y, 0), 0) + 1
                cur = self._reform(ineq, ms)[0]
                ineq, steps, needs = _prepared(self._reset(cur, (x | y, 0)))
                pc = 0
                ms = self._ms(ineq)
                dirty = True
                continue
            if st.kind == "monotonicity":
                rel = tables[(x | y, 0)]
                self._take(ms, (x | y, 0), n)
                if x:
                    self._give(ms, tables, (x, 0), self.proj(rel, x), n)
                continue
            if st.kind == "submodularity":
                rel = tables[(y, x)]
                self._take(ms, (y, x), n)
                ny = y & ~(x | st.z)
                if ny:
                    self._give(ms, tables, (ny, x | st.z), rel, n)
                continue
            raise DefectError(f"unknown proof step {st.kind!r}")

    @staticmethod
    def _touches(st, x, y) -> set:
        if st.kind == "decomposition":
            return {(x, 0), (y, x)}
        if st.kind == "composition":
            return {(x | y, 0)}
        if st.kind == "monotonicity":
            return {(x, 0)}
        return {(y & ~(x | st.z), x | st.z)}

    def _split(self, ms, tables, x, y, bucket: Relation, n: int = 1):
        self._give(ms, tables, (x, 0), self.proj(bucket, x), n)
        self._give(ms, tables, (y, x), bucket, n)

    @staticmethod
    def _take(ms, key, n: int = 1):
        if not key[0]:
            return
        c = ms.get(key, 0)
        if c < n:
            raise DefectError(f"proof step needs h({key[0]:b}|{key[1]:b}) which is not on the RHS")
        if c == n:
            del ms[key]
        else:
            ms[key] = c - n

    def _give(self, ms, tables, key, rel, n: int = 1):
        if not key[0]:
            return
        ms[key] = ms.get(key, 0) + n
        self.put(tables, key, rel)


def edge_tables(q: Query, db: Database) -> tuple[Hypergraph, dict]:
    """Per hyperedge mask, the intersection of the atoms over it, columns in vertex order."""
    hg = q.hypergraph()
    index = {v: i for i, v in enumerate(hg.names)}
    out: dict = {}
    for a, vs in q.atoms:
        r = _atom(db, a, vs)
        mask = 0
        for v in vs:
            mask |= 1 << index[v]
        order = tuple(hg.names[i] for i in bits(mask))
        r = Relation(order, r.ordered(order), a)
        out[mask] = intersect(out[mask], r) if mask in out else r
    return hg, out


def panda_ddr(q: Query, db: Database, cert: OmegaShannonInequality, atom_map: dict | None = None,
              opt: Fraction | None = None) -> OutputTables:
    """Evaluate the disjunctive rule certified by ``cert`` on ``db``.

    ``atom_map`` maps an RHS edge mask to its relation; by default the
    atoms over that edge (intersected). obj is opt·log₂N with opt the
    certificate's ratio unless given.
    """
    if not cert.is_integral() or cert.witness is None:
        raise ValueError("panda_ddr needs an integral certificate with its witness")
    hg, tables = edge_tables(q, db)
    if atom_map:
        tables.update(atom_map)
    for w, y, x in cert.rhs:
        if x or y not in tables:
            raise ValueError("certificate RHS terms must be unconditional hyperedges of the query")
    n = db.N
    opt = cert.ratio() if opt is None else opt
    return _Panda(hg, tables, n, opt).run(cert)


# ---------------------------------------------------------------- full evaluation

@dataclass
class Certificate:
    leaves: tuple
    value: Fraction
    ineq: OmegaShannonInequality


@dataclass
class _Order:
    sigma: tuple
    trimmed: frozenset
    unions: tuple
    terms: dict          # step -> list of (MmTerm, A-side mask, B-side mask)


@dataclass
class CompiledQuery:
    hg: Hypergraph
    omega: Fraction
    width: Fraction
    certificates: list[Certificate]
    orders: list[_Order]


_COMPILED: dict = {}


def _minimal_family(recs) -> list:
    sets = []
    for r in recs:
        if r.terminal not in ("leaf", "pruned"):
            continue
        s = frozenset(r.leaves)
        if s not in [t for t, _ in sets]:
            sets.append((s, r))
    sets.sort(key=lambda p: len(p[0]))
    keep = []
    for s, r in sets:
        if not any(t <= s for t, _ in keep):
            keep.append((s, r))
    return [r for _, r in keep]


def compile_query(hg: Hypergraph, omega) -> CompiledQuery:
    """Everything that depends only on (Q, ω): certificates and plan skeletons."""
    omega = rat(omega)
    key = (hg.names, hg.edges, omega)
    hit = _COMPILED.get(key)
    if hit is not None:
        return hit
    if hg.k > ENGINE_MAX_K:
        raise ResourceError(f"evaluation supports at most {ENGINE_MAX_K} variables")
    gamma = omega - 2
    rep = W.osubw(hg, omega, mode="pruned")
    certs = []
    for rec in _minimal_family(rep.records):
        lp = rec.lp(hg, gamma)
        ineq = integralize(from_dual(lp, rec.solution, hg.k, omega))
        certs.append(Certificate(rec.leaves, rec.value, ineq))
    orders = []
    for sigma in enumerate_gveos(hg.k):
        tr = elimination_trace(hg, sigma)
        terms = {}
        for i in tr.trimmed:
            cur = tr.hypergraphs[i]
            lst = []
            for t in emm_terms(cur, sigma[i]):
                a = t.x | t.z | t.g
                b = t.y | t.z | t.g
                lst.append((t, a, b))
            terms[i] = lst
        orders.append(_Order(tuple(sigma), frozenset(tr.trimmed), tr.unions, terms))
    out = CompiledQuery(hg, omega, rep.width, certs, orders)
    _COMPILED[key] = out
    return out


class _Tables:
    """P tables by U and MM line tables by (dims, G, γ-dim), united over certificates and branches."""

    def __init__(self, hg: Hypergraph):
        self.hg = hg
        self.P: dict = {}
        self.lines: dict = {}

    def add(self, out: OutputTables):
        for u, p in out.P:
            self.P[u] = union(self.P[u], p) if u in self.P else p
        for tr in out.triples:
            key = (tuple(sorted((tr.x, tr.y, tr.z))), tr.g, tr.z)
            slot = self.lines.setdefault(key, {})
            for dim, rel in ((tr.x, tr.s), (tr.y, tr.t), (tr.z, tr.w)):
                if rel is not None:
                    slot[dim] = union(slot[dim], rel) if dim in slot else rel

    def mm(self, dims: tuple, g: int) -> dict | None:
        """Per-dimension tables intersected over the three lines, or None if a line is missing."""
        per: dict = {}
        for gdim in dims:
            slot = self.lines.get((dims, g, gdim))
            if slot is None:
                return None
            for d, rel in slot.items():
                per[d] = intersect(per[d], rel) if d in per else rel
        if set(per) != set(dims):
            return None
        return per


def _names(hg: Hypergraph, mask: int) -> tuple[str, ...]:
    return tuple(hg.names[i] for i in bits(mask))


def _filter(base: Relation, atoms: Iterable[Relation]) -> Relation:
    for a in atoms:
        base = semijoin(base, a)
    return base


def _run_order(hg: Hypergraph, order: _Order, atoms: dict, tabs: _Tables, omega) -> bool:
    cur = dict(atoms)
    made: dict = {}     # step -> relation over U_i minus X_i, kept for contained steps
    for i, block in enumerate(order.sigma):
        u = order.unions[i]
        bound = [m for m in cur if m & block]
        rest = u & ~block
        rels = [cur[m] for m in bound]
        if i in order.trimmed:
            pieces = []
            p = tabs.P.get(u)
            if p is not None and len(p):
                pieces.append(project(_filter(p, rels), _names(hg, rest)))
            for t, a, b in order.terms[i]:
                per = tabs.mm(tuple(sorted(t.dims)), t.g)
                if per is None:
                    continue
                left_atoms = [cur[m] for m in bound if is_subset(m, a)]
                right_atoms = [cur[m] for m in bound if is_subset(m, b)]
                if len(set(left_atoms) | set(right_atoms)) != len(rels):
                    raise DefectError("MM term leaves a boundary atom unassigned")
                left = _filter(join(per[t.x], per[t.z]), left_atoms)
                right = _filter(join(per[t.z], per[t.y]), right_atoms)
                prod = group_by_mm(project(left, _names(hg, a)), project(right, _names(hg, b)),
                                   _names(hg, t.z), omega=omega)
                pieces.append(project(prod, _names(hg, rest)))
            if not pieces:
                return False
            res = pieces[0]
            for pc in pieces[1:]:
                res = union(res, pc)
        else:
            j = next(j for j in range(i) if is_subset(u, order.unions[j]))
            base = project(made[j], _names(hg, u)) if u & ~(order.unions[j] & ~order.sigma[j]) == 0 else None
            if base is None:
                raise DefectError("contained step does not fit inside the earlier result")
            res = project(_filter(base, rels), _names(hg, rest))
        made[i] = res if rest else None
        for m in bound:
            del cur[m]
        if not len(res):
            return False
        if rest:
            cur[rest] = intersect(cur[rest], res) if rest in cur else res
            made[i] = cur[rest]
    return True


def evaluate(q: Query, db: Database, omega, stats: dict | None = None) -> bool:
    """Boolean answer through PANDA-ω certificates and ω-query plans."""
    hg, atoms = edge_tables(q, db)
    if any(not len(r) for r in atoms.values()):
        return False
    comp = compile_query(hg, omega)
    tabs = _Tables(hg)
    n = db.N
    for cert in comp.certificates:
        out = _Panda(hg, atoms, n, cert.value).run(cert.ineq)
        tabs.add(out)
        if stats is not None:
            stats["branches"] = stats.get("branches", 0) + out.branches
            stats["resets"] = stats.get("resets", 0) + out.resets
    # the search seeds every head set with h(V); its table answers directly
    pv = tabs.P.get(hg.vertices)
    if pv is not None and len(_filter(pv, atoms.values())):
        return True
    for order in comp.orders:
        if _run_order(hg, order, atoms, tabs, comp.omega):
            if stats is not None:
                stats["order"] = order.sigma
            return True
    return False
