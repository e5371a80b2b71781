"""ω-Shannon inequalities: extraction from LP duals, Farkas witnesses, reset, proof sequences.

An inequality has the shape

    Σ λ h(U) + Σ_j [α h(X|G) + β h(Y|G) + ζ h(Z|G) + κ h(G)]  <=  Σ w h(Y_i|X_i)

and its Farkas witness (m, s) turns RHS - LHS into Σ m h(Y|X) + Σ s h(Y;Z|X),
which we check as a symbolic identity over the 2^k entropy variables.
Conditional terms are stored as (Y, X) with Y and X disjoint.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from fractions import Fraction
from math import lcm
from typing import Sequence

from .entropy import add_term, elemental, evaluate
from .errors import DefectError, NotShannonError
from .hypergraph import Hypergraph, is_subset
from .rational_lp import EQ, LinearProgram, LpSolution, fmt_rat, rat, solve_lp


@dataclass(frozen=True)
class MmGroup:
    alpha: Fraction
    beta: Fraction
    zeta: Fraction
    kappa: Fraction
    x: int
    y: int
    z: int
    g: int = 0

    def coeffs(self):
        return (self.alpha, self.beta, self.zeta, self.kappa)


@dataclass(frozen=True)
class FarkasWitness:
    m: tuple[tuple[Fraction, int, int], ...] = ()          # (m_p, Y_p, X_p)
    s: tuple[tuple[Fraction, int, int, int], ...] = ()     # (s_q, Y_q, Z_q, X_q)

    def scale(self, c) -> "FarkasWitness":
        return FarkasWitness(tuple((a * c, y, x) for a, y, x in self.m),
                             tuple((a * c, y, z, x) for a, y, z, x in self.s))


@dataclass(frozen=True)
class OmegaShannonInequality:
    k: int
    omega: Fraction
    plain: tuple[tuple[Fraction, int], ...] = ()            # (λ, U)
    mm: tuple[MmGroup, ...] = ()
    rhs: tuple[tuple[Fraction, int, int], ...] = ()         # (w, Y, X)
    witness: FarkasWitness | None = None

    @property
    def mass(self) -> Fraction:
        return sum((l for l, _ in self.plain), Fraction(0)) + sum((j.kappa for j in self.mm), Fraction(0))

    @property
    def weight(self) -> Fraction:
        return sum((w for w, _, _ in self.rhs), Fraction(0))

    def ratio(self) -> Fraction:
        return self.weight / self.mass

    def is_integral(self) -> bool:
        nums = [l for l, _ in self.plain] + [c for j in self.mm for c in j.coeffs()] + [w for w, _, _ in self.rhs]
        if self.witness is not None:
            nums += [a for a, *_ in self.witness.m] + [a for a, *_ in self.witness.s]
        return all(Fraction(v).denominator == 1 for v in nums)


def cond_form(form: dict, y: int, x: int, c) -> None:
    """Add c·h(Y|X) to ``form``."""
    add_term(form, y | x, c)
    add_term(form, x, -c)


def lhs_form(ineq: OmegaShannonInequality) -> dict:
    form: dict = {}
    for lam, u in ineq.plain:
        add_term(form, u, lam)
    for j in ineq.mm:
        cond_form(form, j.x, j.g, j.alpha)
        cond_form(form, j.y, j.g, j.beta)
        cond_form(form, j.z, j.g, j.zeta)
        add_term(form, j.g, j.kappa)
    return form


def rhs_form(ineq: OmegaShannonInequality) -> dict:
    form: dict = {}
    for w, y, x in ineq.rhs:
        cond_form(form, y, x, w)
    return form


def witness_form(wit: FarkasWitness) -> dict:
    form: dict = {}
    for a, y, x in wit.m:
        cond_form(form, y, x, a)
    for a, y, z, x in wit.s:
        # h(Y;Z|X) = h(XY) + h(XZ) - h(X) - h(XYZ)
        add_term(form, x | y, a)
        add_term(form, x | z, a)
        add_term(form, x, -a)
        add_term(form, x | y | z, -a)
    return form


def identity_residual(ineq: OmegaShannonInequality, wit: FarkasWitness | None = None) -> dict:
    """RHS - LHS - witness as a form; empty exactly when the Farkas identity holds."""
    wit = wit or ineq.witness
    out = dict(rhs_form(ineq))
    for m, c in lhs_form(ineq).items():
        add_term(out, m, -c)
    for m, c in witness_form(wit).items():
        add_term(out, m, -c)
    return out


def is_dominant(a, b, z, kappa, omega) -> bool:
    if kappa <= 0:
        return False
    return a >= kappa and b >= kappa and z >= 0 and a + b + z >= omega * kappa


def check_shape(ineq: OmegaShannonInequality) -> str | None:
    for lam, _ in ineq.plain:
        if lam < 0:
            return "negative λ"
    for w, y, x in ineq.rhs:
        if w < 0:
            return "negative w"
        if y & x:
            return "conditional term with overlapping sides"
    for j in ineq.mm:
        if not is_dominant(j.alpha, j.beta, j.zeta, j.kappa, ineq.omega):
            return f"triple ({j.alpha}, {j.beta}, {j.zeta}) / {j.kappa} is not ω-dominant"
    return None


def validate(ineq: OmegaShannonInequality) -> str | None:
    """Shape, dominance and the stored Farkas identity (with non-negative multipliers)."""
    err = check_shape(ineq)
    if err:
        return err
    if ineq.witness is None:
        return "no Farkas witness stored"
    if any(a < 0 for a, *_ in ineq.witness.m) or any(a < 0 for a, *_ in ineq.witness.s):
        return "negative Farkas multiplier"
    if identity_residual(ineq):
        return "Farkas identity does not hold"
    return None


# ---------------------------------------------------------------- extraction

def from_dual(lp: LinearProgram, sol: LpSolution, k: int, omega) -> OmegaShannonInequality:
    """Read an inequality off an optimal dual of a width LP built by ``width.head_lp``.

    Leaf rows carry tags ("leaf", key); edge rows carry ("edge", mask). A U leaf
    with multiplier y gives λ = y; an MM leaf gives κ = α = β = y and ζ = γy on
    the dimension carrying γ.
    """
    if sol.status != "optimal" or sol.dual is None:
        raise ValueError("from_dual needs an optimal solution with duals")
    omega = rat(omega)
    gamma = omega - 2
    plain: dict = {}
    mm = []
    rhs: dict = {}
    for c, y in zip(lp.constraints, sol.dual):
        if not y or not isinstance(c.tag, tuple):
            continue
        kind = c.tag[0]
        if kind == "leaf":
            key = c.tag[1]
            if key[0] == "U":
                plain[key[1]] = plain.get(key[1], 0) + y
            else:
                _, dims, g, gdim = key
                a, b = [d for d in dims if d != gdim]
                mm.append(MmGroup(y, y, gamma * y, y, a, b, gdim, g))
        elif kind == "edge":
            rhs[c.tag[1]] = rhs.get(c.tag[1], 0) + y
    ineq = OmegaShannonInequality(
        k, omega, tuple(sorted((v, u) for u, v in plain.items())), tuple(mm),
        tuple(sorted(((w, e, 0) for e, w in rhs.items()), key=lambda t: (t[1], t[2]))))
    if ineq.mass and ineq.ratio() != sol.value:
        raise DefectError(f"dual ratio {ineq.ratio()} differs from LP value {sol.value}")
    return replace(ineq, witness=find_farkas(ineq))


def find_farkas(ineq: OmegaShannonInequality) -> FarkasWitness:
    """Non-negative elemental multipliers making the identity exact, or NotShannonError."""
    k = ineq.k
    target = rhs_form(ineq)
    for m, c in lhs_form(ineq).items():
        add_term(target, m, -c)
    cons = elemental(k)
    lp = LinearProgram(len(cons), {j: Fraction(-1) for j in range(len(cons))})
    for mask in range(1, 1 << k):
        row = {j: c for j, con in enumerate(cons) for m, c in con.form if m == mask}
        lp.add(row, EQ, target.get(mask, 0))
    sol = solve_lp(lp)
    if sol.status != "optimal":
        raise NotShannonError("no Shannon derivation exists for this inequality")
    m_terms, s_terms = [], []
    for j, con in enumerate(cons):
        a = sol.primal[j]
        if not a:
            continue
        if con.kind == "monotone":
            x, rest = con.args
            m_terms.append((a, x, rest))
        else:
            x, y, base = con.args
            s_terms.append((a, x, y, base))
    wit = FarkasWitness(tuple(m_terms), tuple(s_terms))
    if identity_residual(ineq, wit):
        raise DefectError("Farkas solution does not reproduce the identity")
    return wit


def check_unconditional_mass(ineq: OmegaShannonInequality) -> str | None:
    free = sum((w for w, _, x in ineq.rhs if x == 0), Fraction(0))
    if ineq.mass > free:
        return f"mass {ineq.mass} exceeds unconditional weight {free}"
    return None


def integralize(ineq: OmegaShannonInequality) -> OmegaShannonInequality:
    """Scale everything, witness included, by one LCM of denominators."""
    wit = ineq.witness or find_farkas(ineq)
    nums = [l for l, _ in ineq.plain] + [c for j in ineq.mm for c in j.coeffs()] + [w for w, _, _ in ineq.rhs]
    nums += [a for a, *_ in wit.m] + [a for a, *_ in wit.s]
    d = 1
    for v in nums:
        d = lcm(d, Fraction(v).denominator)
    if d == 1:
        return replace(ineq, witness=wit)
    out = OmegaShannonInequality(
        ineq.k, ineq.omega,
        tuple((l * d, u) for l, u in ineq.plain),
        tuple(MmGroup(j.alpha * d, j.beta * d, j.zeta * d, j.kappa * d, j.x, j.y, j.z, j.g) for j in ineq.mm),
        tuple((w * d, y, x) for w, y, x in ineq.rhs),
        wit.scale(d))
    err = validate(out)
    if err:
        raise DefectError(f"integralized inequality failed validation: {err}")
    return out


# ---------------------------------------------------------------- mutable state shared by reset and proof sequences

class _State:
    """Integral identity bookkeeping: LHS coefficients, RHS multiset, witness multisets."""

    def __init__(self, ineq: OmegaShannonInequality):
        if not ineq.is_integral() or ineq.witness is None:
            raise ValueError("needs an integral inequality with its Farkas witness")
        self.k = ineq.k
        self.omega = ineq.omega
        self.lam: dict = {}
        for l, u in ineq.plain:
            self.lam[u] = self.lam.get(u, 0) + int(l)
        self.groups = [[int(j.alpha), int(j.beta), int(j.zeta), int(j.kappa), j.x, j.y, j.z, j.g] for j in ineq.mm]
        self.w: dict = {}
        for w, y, x in ineq.rhs:
            self.bump(self.w, (y & ~x, x), int(w))
        self.m: dict = {}
        for a, y, x in ineq.witness.m:
            self.bump(self.m, (y & ~x, x), int(a))
        self.s: dict = {}
        for a, y, z, x in ineq.witness.s:
            self.bump(self.s, (min(y, z), max(y, z), x), int(a))

    @staticmethod
    def bump(d: dict, key, c: int):
        v = d.get(key, 0) + c
        if v < 0:
            raise DefectError(f"negative multiplicity for {key}")
        if v:
            d[key] = v
        else:
            d.pop(key, None)

    def debt_w(self, mask: int, c: int = 1):
        if mask:
            self.bump(self.w, (mask, 0), c)

    def to_inequality(self) -> OmegaShannonInequality:
        plain = tuple(sorted((Fraction(v), u) for u, v in self.lam.items() if v))
        mm = tuple(MmGroup(Fraction(a), Fraction(b), Fraction(z), Fraction(kp), x, y, zz, g)
                   for a, b, z, kp, x, y, zz, g in self.groups if kp > 0)
        rhs = tuple(sorted(((Fraction(v), y, x) for (y, x), v in self.w.items()), key=lambda t: (t[2], t[1])))
        wit = FarkasWitness(tuple((Fraction(v), y, x) for (y, x), v in sorted(self.m.items())),
                            tuple((Fraction(v), y, z, x) for (y, z, x), v in sorted(self.s.items())))
        return OmegaShannonInequality(self.k, self.omega, plain, mm, rhs, wit)


# ---------------------------------------------------------------- reset

def reset(ineq: OmegaShannonInequality, i0: int) -> OmegaShannonInequality:
    """Drop one unit of the unconditional RHS term ``ineq.rhs[i0]``, losing at most one unit of mass."""
    if not 0 <= i0 < len(ineq.rhs):
        raise ValueError("rhs index out of range")
    w0, y0, x0 = ineq.rhs[i0]
    if x0 != 0 or w0 <= 0:
        raise ValueError("reset needs an unconditional RHS term with positive weight")
    st = _State(ineq)
    st.bump(st.w, (y0, 0), -1)
    target = y0   # an unconditional h(target) now sits on the RHS side of the identity as debt
    while target:
        if st.lam.get(target, 0) > 0:
            st.bump(st.lam, target, -1)
            break
        hit = False
        for grp in st.groups:
            a, b, z, kp, gx, gy, gz, g = grp
            if kp <= 0:
                continue
            for slot, dim in ((0, gx), (1, gy), (2, gz)):
                if grp[slot] > 0 and dim | g == target:
                    grp[slot] -= 1
                    grp[3] -= 1
                    hit = True
                    break
            if hit:
                break
        if not hit:
            for grp in st.groups:
                if grp[3] > 0 and grp[7] == target and grp[3] > max(grp[0], grp[1], grp[2]):
                    grp[3] -= 1
                    hit = True
                    break
        if hit:
            _drop_empty_groups(st)
            break
        target = _absorb(st, target)
    return _checked(st.to_inequality(), "reset")


def _drop_empty_groups(st: _State):
    keep = []
    for grp in st.groups:
        if grp[3] > 0:
            keep.append(grp)
            continue
        # leftover conditionals of a dead group become slack in the witness
        for slot, dim in ((0, grp[4]), (1, grp[5]), (2, grp[6])):
            if grp[slot]:
                st.bump(st.m, (dim, grp[7]), grp[slot])
    st.groups = keep


def _absorb(st: _State, target: int) -> int:
    """Cancel the debt h(target) against an RHS or witness term; returns the new debt."""
    for (y, x) in sorted(st.w):
        if x == target:
            st.bump(st.w, (y, x), -1)
            return y | x
    for (y, x) in sorted(st.m):
        if y | x == target:
            st.bump(st.m, (y, x), -1)
            return x
    for (y, z, x) in sorted(st.s):
        for a, b in ((y, z), (z, y)):
            if a | x == target:
                st.bump(st.s, (y, z, x), -1)
                st.bump(st.m, (b, x), 1)
                return x | y | z
    raise DefectError(f"no term cancels h({target:b}) in the identity")


def _checked(ineq: OmegaShannonInequality, what: str) -> OmegaShannonInequality:
    err = validate(ineq)
    if err:
        raise DefectError(f"{what} produced an invalid inequality: {err}")
    return ineq


# ---------------------------------------------------------------- proof sequences

@dataclass(frozen=True)
class ProofStep:
    """decomposition h(XY) → h(X) + h(Y|X); composition the reverse;
    monotonicity h(XY) → h(X); submodularity h(Y|X) → h(Y|XZ)."""
    kind: str
    x: int
    y: int
    z: int = 0

    def render(self, hg: Hypergraph | None = None, k: int = 0) -> str:
        f = hg.fmt if hg else (lambda s: _default_fmt(s))
        x, y, z = self.x, self.y, self.z

        def h(a, b=0):
            return f"h({f(a)}|{f(b)})" if b else f"h({f(a)})"
        if self.kind == "decomposition":
            return f"{h(x | y)} → {h(x)} + {h(y, x)}"
        if self.kind == "composition":
            return f"{h(x)} + {h(y, x)} → {h(x | y)}"
        if self.kind == "monotonicity":
            return f"{h(x | y)} → {h(x)}"
        return f"{h(y, x)} → {h(y, x | z)}"


def _default_fmt(s: int) -> str:
    names = "ABCDEFGHIJKLMNOP"
    return "".join(names[i] for i in range(16) if s >> i & 1) or "∅"


def normalize(ineq: OmegaShannonInequality) -> OmegaShannonInequality:
    """Clip α, β, ζ to κ so every group starts well-behaved (κ ≥ max(α, β, ζ)).

    Lowering LHS coefficients of conditional terms keeps the inequality valid;
    the removed mass moves into the Farkas witness as m-terms.
    """
    if all(j.kappa >= max(j.alpha, j.beta, j.zeta) for j in ineq.mm):
        return ineq
    wit = ineq.witness or find_farkas(ineq)
    extra = list(wit.m)
    groups = []
    for j in ineq.mm:
        a, b, z = (min(c, j.kappa) for c in (j.alpha, j.beta, j.zeta))
        for old, new, dim in ((j.alpha, a, j.x), (j.beta, b, j.y), (j.zeta, z, j.z)):
            if old > new:
                extra.append((old - new, dim, j.g))
        groups.append(MmGroup(a, b, z, j.kappa, j.x, j.y, j.z, j.g))
    return replace(ineq, mm=tuple(groups), witness=FarkasWitness(tuple(extra), wit.s))


def build_proof_sequence(ineq: OmegaShannonInequality) -> list[ProofStep]:
    """Rewrite the RHS into the LHS one unconditional term at a time.

    Hat coefficients count LHS units already matched by RHS terms. Each round
    takes an unconditional RHS term h(W) and either matches it (plain term,
    a group's X/Y/Z line, or its h(G)) or cancels it against a witness or RHS
    term, emitting the corresponding steps.
    """
    ineq = normalize(ineq)
    st = _State(ineq)
    hat = [[0, 0, 0, 0] for _ in st.groups]
    steps: list[ProofStep] = []

    def open_mass():
        for g, h in zip(st.groups, hat):
            if not g[7]:
                # h(∅) = 0, so κ̂ rises for free as far as well-behavedness allows
                h[3] = g[3] - max(g[0] - h[0], g[1] - h[1], g[2] - h[2])
        return sum(st.lam.values()) + sum(g[3] - h[3] for g, h in zip(st.groups, hat))

    guard = 0
    while open_mass() > 0:
        guard += 1
        if guard > 10_000_000:
            raise DefectError("proof sequence construction did not terminate")
        free = sorted(y for (y, x) in st.w if x == 0)
        if not free:
            raise DefectError("no unconditional RHS term left while LHS mass remains")
        w = free[0]
        if st.lam.get(w, 0) > 0:
            st.bump(st.lam, w, -1)
            st.bump(st.w, (w, 0), -1)
            steps.append(("match", w))
            continue
        done = False
        for gi, grp in enumerate(st.groups):
            g = grp[7]
            for slot, dim in ((0, grp[4]), (1, grp[5]), (2, grp[6])):
                if dim | g == w and grp[slot] > hat[gi][slot]:
                    if g:
                        steps.append(ProofStep("decomposition", g, dim))
                        st.debt_w(g)
                    st.bump(st.w, (w, 0), -1)
                    hat[gi][slot] += 1
                    steps.append(("hat", gi, slot))
                    done = True
                    break
            if done:
                break
        if done:
            continue
        for gi, grp in enumerate(st.groups):
            h = hat[gi]
            if grp[7] == w and grp[3] - h[3] > max(grp[0] - h[0], grp[1] - h[1], grp[2] - h[2]):
                h[3] += 1
                st.bump(st.w, (w, 0), -1)
                steps.append(("hat", gi, 3))
                done = True
                break
        if done:
            continue
        steps.extend(_cancel(st, w))
    # drop the bookkeeping markers; matched units stay in the multiset
    real = [s for s in steps if isinstance(s, ProofStep)]
    return real


def _cancel(st: _State, w: int) -> list[ProofStep]:
    for (y, x) in sorted(st.w):
        if x == w:
            st.bump(st.w, (w, 0), -1)
            st.bump(st.w, (y, x), -1)
            st.debt_w(y | x)
            return [ProofStep("composition", w, y)]
    for (y, x) in sorted(st.m):
        if y | x == w:
            st.bump(st.m, (y, x), -1)
            st.bump(st.w, (w, 0), -1)
            st.debt_w(x)
            return [ProofStep("monotonicity", x, y)]
    for (y, z, x) in sorted(st.s):
        for a, b in ((y, z), (z, y)):
            if a | x == w:
                st.bump(st.s, (y, z, x), -1)
                st.bump(st.w, (w, 0), -1)
                out = []
                if x:
                    out.append(ProofStep("decomposition", x, a))
                    st.debt_w(x)
                st.bump(st.w, (a, x | b), 1)
                out.append(ProofStep("submodularity", x, a, b))
                return out
    raise DefectError(f"no term cancels h({w:b}) on the RHS")


# ---------------------------------------------------------------- replay

def _rhs_multiset(ineq: OmegaShannonInequality) -> dict:
    ms: dict = {}
    for w, y, x in ineq.rhs:
        key = (y & ~x, x)
        ms[key] = ms.get(key, 0) + w
    return ms


def _lhs_multiset(ineq: OmegaShannonInequality) -> dict:
    ms: dict = {}

    def put(y, x, c):
        if c and y & ~x:
            ms[(y & ~x, x)] = ms.get((y & ~x, x), 0) + c
    for l, u in ineq.plain:
        put(u, 0, l)
    for j in ineq.mm:
        put(j.x, j.g, j.alpha)
        put(j.y, j.g, j.beta)
        put(j.z, j.g, j.zeta)
        put(j.g, 0, j.kappa)
    return ms


def apply_step(ms: dict, step: ProofStep) -> str | None:
    """Apply one unit step in place; returns an error message when inapplicable."""
    def take(key):
        if key[0] == 0:
            return True
        if ms.get(key, 0) < 1:
            return False
        ms[key] -= 1
        if not ms[key]:
            del ms[key]
        return True

    def give(key):
        if key[0]:
            ms[key] = ms.get(key, 0) + 1

    x, y, z = step.x, step.y, step.z
    y = y & ~x
    if step.kind == "decomposition":
        if not take((x | y, 0)):
            return f"h({x | y:b}) missing"
        give((x, 0))
        give((y, x))
    elif step.kind == "composition":
        if ms.get((x, 0), 0) < 1 and x:
            return f"h({x:b}) missing"
        if ms.get((y, x), 0) < 1:
            return f"h({y:b}|{x:b}) missing"
        take((x, 0))
        take((y, x))
        give((x | y, 0))
    elif step.kind == "monotonicity":
        if not take((x | y, 0)):
            return f"h({x | y:b}) missing"
        give((x, 0))
    elif step.kind == "submodularity":
        if not take((y, x)):
            return f"h({y:b}|{x:b}) missing"
        give((y & ~(x | z), x | z))
    else:
        return f"unknown step kind {step.kind!r}"
    return None


def replay_sequence(ineq: OmegaShannonInequality, steps: Sequence[ProofStep]) -> str | None:
    """None when the steps turn the RHS into a multiset dominating the LHS; else the first problem."""
    ms = _rhs_multiset(ineq)
    for idx, st in enumerate(steps):
        err = apply_step(ms, st)
        if err:
            return f"step {idx} ({st.kind}) not applicable: {err}"
    for key, c in _lhs_multiset(ineq).items():
        if ms.get(key, 0) < c:
            return f"final terms do not cover h({key[0]:b}|{key[1]:b}): have {ms.get(key, 0)}, need {c}"
    return None


def multiset_value(ms: dict, h) -> Fraction:
    vals = h.values if hasattr(h, "values") else h
    return sum((c * (vals[y | x] - vals[x]) for (y, x), c in ms.items()), Fraction(0))


def prefix_values(ineq: OmegaShannonInequality, steps: Sequence[ProofStep], h) -> list[Fraction]:
    """Value of the running multiset at ``h`` before and after every step."""
    ms = _rhs_multiset(ineq)
    out = [multiset_value(ms, h)]
    for st in steps:
        if apply_step(ms, st):
            break
        out.append(multiset_value(ms, h))
    return out


def lhs_value(ineq: OmegaShannonInequality, h) -> Fraction:
    return evaluate(lhs_form(ineq), h)


# ---------------------------------------------------------------- text

def render_inequality(ineq: OmegaShannonInequality, hg: Hypergraph | None = None) -> str:
    f = hg.fmt if hg else _default_fmt

    def h(y, x=0):
        return f"h({f(y)}|{f(x)})" if x else f"h({f(y)})"

    def co(c):
        return "" if c == 1 else fmt_rat(c) + "·"
    left = [co(l) + h(u) for l, u in ineq.plain]
    for j in ineq.mm:
        part = [co(j.alpha) + h(j.x, j.g), co(j.beta) + h(j.y, j.g)]
        if j.zeta:
            part.append(co(j.zeta) + h(j.z, j.g))
        if j.g:
            part.append(co(j.kappa) + h(j.g))
        else:
            part.append(f"[κ={fmt_rat(j.kappa)}]")
        left.append("(" + " + ".join(part) + ")")
    right = [co(w) + h(y, x) for w, y, x in ineq.rhs]
    return (" + ".join(left) or "0") + " <= " + (" + ".join(right) or "0")


def render_sequence(steps: Sequence[ProofStep], hg: Hypergraph | None = None) -> str:
    return "\n".join(s.render(hg) for s in steps)
