"""Command-line front end: query/TSV parsing, subcommands, JSON reports.

Exit codes: 0 success, 1 answer false, 2 usage or input error,
3 resource budget exceeded, 4 internal defect.
"""
from __future__ import annotations

import argparse
import json
import random
import re
import sys
import time
from fractions import Fraction
from pathlib import Path

from . import engine as E
from . import width as W
from .errors import DefectError, NotShannonError, ResourceError
from .hypergraph import Hypergraph
from .rational_lp import fmt_rat, rat
from .shannon import (build_proof_sequence, from_dual, integralize, render_inequality,
                      render_sequence, replay_sequence)

QuerySpec = E.Query

EXIT_OK, EXIT_FALSE, EXIT_USAGE, EXIT_RESOURCE, EXIT_DEFECT = 0, 1, 2, 3, 4


class InputError(ValueError):
    """Malformed query or data file; carries a location when known."""

    def __init__(self, msg: str, path=None, line: int | None = None, col: int | None = None):
        where = str(path) if path else "<input>"
        if line is not None:
            where += f":{line}"
            if col is not None:
                where += f":{col}"
        super().__init__(f"{where}: {msg}")
        self.line, self.col = line, col


# ---------------------------------------------------------------- query files

_TOKEN = re.compile(r"\s+|#[^\n]*|:-|[A-Za-z_][A-Za-z0-9_]*|[(),.]|.", re.S)


def _tokens(text: str):
    line, col = 1, 1
    for m in _TOKEN.finditer(text):
        tok = m.group()
        if not tok.isspace() and not tok.startswith("#"):
            yield tok, line, col
        nl = tok.count("\n")
        if nl:
            line += nl
            col = len(tok) - tok.rfind("\n")
        else:
            col += len(tok)
    yield "", line, col


def parse_query_text(text: str, path=None) -> QuerySpec:
    """``Name() :- Atom(v1,...,vk) {, Atom(...)} .`` with ``#`` line comments."""
    toks = list(_tokens(text))
    pos = 0

    def peek():
        return toks[pos]

    def fail(msg, tok=None):
        t, line, col = tok or peek()
        got = "end of input" if t == "" else repr(t)
        raise InputError(f"{msg}, got {got}", path, line, col)

    def expect(want):
        nonlocal pos
        if peek()[0] != want:
            fail(f"expected {want!r}")
        pos += 1

    def ident(what):
        nonlocal pos
        t = peek()[0]
        if not re.fullmatch(r"[A-Za-z_][A-Za-z0-9_]*", t):
            fail(f"expected {what}")
        pos += 1
        return t

    name = ident("query name")
    expect("(")
    expect(")")
    expect(":-")
    atoms = []
    seen = set()
    while True:
        at = peek()
        a = ident("atom name")
        if a in seen:
            raise InputError(f"duplicate atom name {a!r}", path, at[1], at[2])
        seen.add(a)
        expect("(")
        if peek()[0] == ")":
            raise InputError(f"atom {a!r} has arity 0", path, at[1], at[2])
        vs = [ident("variable")]
        while peek()[0] == ",":
            pos += 1
            vs.append(ident("variable"))
        expect(")")
        if len(set(vs)) != len(vs):
            raise InputError(f"atom {a!r} repeats a variable", path, at[1], at[2])
        atoms.append((a, tuple(vs)))
        if peek()[0] == ",":
            pos += 1
            continue
        break
    expect(".")
    if peek()[0] != "":
        fail("expected end of input")
    q = E.Query(name, tuple(atoms))
    try:
        q.hypergraph()
    except ValueError as exc:
        raise InputError(str(exc), path) from None
    return q


def parse_query(path) -> QuerySpec:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise InputError(f"cannot read query: {exc.strerror}", path) from None
    return parse_query_text(text, path)


# ---------------------------------------------------------------- data files

def load_database(directory, spec: QuerySpec) -> E.Database:
    """One ``<Atom>.tsv`` per atom; the header must list the atom's variables in order."""
    directory = Path(directory)
    data = {}
    for a, vs in spec.atoms:
        f = directory / f"{a}.tsv"
        try:
            lines = f.read_text().split("\n")
        except OSError as exc:
            raise InputError(f"missing data file for atom {a!r} ({exc.strerror})", f) from None
        if lines and lines[-1] == "":
            lines.pop()
        if not lines or tuple(lines[0].split("\t")) != vs:
            got = lines[0].split("\t") if lines else []
            raise InputError(f"header mismatch: expected {list(vs)}, got {got}", f, 1)
        rows = []
        for i, ln in enumerate(lines[1:], start=2):
            ln = ln.rstrip("\r")
            if ln == "":
                continue
            row = tuple(ln.split("\t"))
            if len(row) != len(vs):
                raise InputError(f"ragged row: {len(row)} fields, expected {len(vs)}", f, i)
            rows.append(row)
        data[a] = rows
    return E.Database.from_rows(spec, data)


# ---------------------------------------------------------------- reports

def _mask_str(hg: Hypergraph, m: int) -> str:
    # bit i (from the right) is the i-th variable in first-appearance order
    return format(m, f"0{hg.k}b")


def _plan_json(hg: Hypergraph, plan) -> list:
    out = []
    for st in plan:
        choice = st.choice if st.choice == "join" else st.choice.fmt(hg)
        out.append({"block": hg.fmt(st.block), "union": hg.fmt(st.union),
                    "choice": choice, "trimmed": st.trimmed})
    return out


def width_report(q: QuerySpec, rep: W.WidthReport, omega: Fraction, wall_ms: int) -> dict:
    hg = q.hypergraph()
    return {
        "query": q.name,
        "omega": fmt_rat(omega),
        "width": fmt_rat(rep.width),
        "classic": rep.classic,
        "witness": {_mask_str(hg, m): fmt_rat(v) for m, v in enumerate(rep.witness.values) if m},
        "plan": _plan_json(hg, rep.plan),
        "lp_count": rep.lp_count,
        "mode": rep.mode,
        "wall_ms": wall_ms,
    }


def witness_from_report(report: dict, k: int):
    """Rebuild the witness polymatroid stored in a JSON report."""
    from .entropy import Polymatroid
    table = {int(s, 2): Fraction(v) for s, v in report["witness"].items()}
    return Polymatroid.from_dict(k, table)


# ---------------------------------------------------------------- commands

def _omega(text: str) -> Fraction:
    try:
        w = rat(text)
    except (ValueError, ZeroDivisionError):
        raise InputError(f"omega must be a rational like 19/8, got {text!r}") from None
    if not 2 <= w <= 3:
        raise InputError(f"omega must lie in [2, 3], got {text}")
    return w


def cmd_width(args, out) -> int:
    q = parse_query(args.query)
    hg = q.hypergraph()
    omega = _omega(args.omega)
    t0 = time.perf_counter()
    rep = W.subw(hg, mode=args.mode) if args.classic else W.osubw(hg, omega, mode=args.mode)
    wall = int((time.perf_counter() - t0) * 1000)
    print(fmt_rat(rep.width), file=out)
    if args.json:
        Path(args.json).write_text(json.dumps(width_report(q, rep, omega, wall), indent=2) + "\n")
    return EXIT_OK


def _answer(flag: bool, out) -> int:
    print("true" if flag else "false", file=out)
    return EXIT_OK if flag else EXIT_FALSE


def cmd_solve(args, out) -> int:
    q = parse_query(args.query)
    db = load_database(args.data, q)
    got = E.evaluate(q, db, _omega(args.omega))
    if args.oracle_check:
        want = E.brute_force(q, db)
        if want != got:
            raise DefectError(f"evaluate returned {got}, brute force {want}")
    return _answer(got, out)


def cmd_oracle(args, out) -> int:
    q = parse_query(args.query)
    return _answer(E.brute_force(q, load_database(args.data, q)), out)


def cmd_prove(args, out) -> int:
    q = parse_query(args.query)
    hg = q.hypergraph()
    omega = _omega(args.omega)
    rep = W.osubw(hg, omega, mode=args.mode)
    idx = rep.argmax_lp if args.lp is None else args.lp
    if not 0 <= idx < len(rep.records):
        raise InputError(f"--lp must be in [0, {len(rep.records) - 1}]")
    rec = rep.records[idx]
    if rec.solution is None:
        raise InputError(f"LP {idx} has no certified solution")
    ineq = integralize(from_dual(rec.lp(hg, omega - 2), rec.solution, hg.k, omega))
    steps = build_proof_sequence(ineq)
    err = replay_sequence(ineq, steps)
    if err:
        raise DefectError(f"proof sequence does not replay: {err}")
    print(f"LP {idx} of {len(rep.records)}, value {fmt_rat(rec.value)}", file=out)
    print(render_inequality(ineq, hg), file=out)
    print(f"ratio {fmt_rat(ineq.ratio())}", file=out)
    print(render_sequence(steps, hg), file=out)
    return EXIT_OK


def cmd_cycle_exp(args, out) -> int:
    step = rat(args.grid)
    v = W.square_cycle_exponent(args.k, _omega(args.omega), step)
    print(f"{fmt_rat(v)}\tband [{fmt_rat(v - step)}, {fmt_rat(v + step)}]", file=out)
    return EXIT_OK


def random_database(q: QuerySpec, n: int, rng: random.Random) -> E.Database:
    """About ``n`` tuples split over the atoms, on a domain sized so joins are not trivial."""
    per = max(1, n // len(q.atoms))
    data = {}
    for a, vs in q.atoms:
        dom = max(2, round(per ** (1 / len(vs)) * 1.5))
        data[a] = [tuple(rng.randrange(dom) for _ in vs) for _ in range(per)]
    return E.Database.from_rows(q, data)


def cmd_bench(args, out, err) -> int:
    q = parse_query(args.query)
    omega = _omega(args.omega)
    try:
        sizes = [int(s) for s in args.sizes.split(",")]
    except ValueError:
        raise InputError(f"--sizes must be comma-separated integers, got {args.sizes!r}") from None
    rng = random.Random(args.seed)
    try:
        E._find_triangle(random_database(q, 3, random.Random(0)))
        tri = True
    except ValueError:
        tri = False
    print("N\tanswer\twork", file=out)
    for n in sizes:
        db = random_database(q, n, rng)
        t0 = time.perf_counter()
        if tri:
            ledger = E.WorkLedger()
            ans = E.evaluate_triangle(db, omega, ledger)
            work = round(ledger.units)
        else:
            stats: dict = {}
            ans = E.evaluate(q, db, omega, stats)
            work = stats.get("branches", 0)
        ms = (time.perf_counter() - t0) * 1000
        print(f"{db.N}\t{str(ans).lower()}\t{work}", file=out)
        # wall time goes to stderr so stdout stays byte-identical across runs
        print(f"N={db.N} wall_ms={ms:.0f}", file=err)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="artifact", description="ω-submodular width and query evaluation")
    sub = p.add_subparsers(dest="cmd", required=True)

    s = sub.add_parser("width", help="width of a query as an exact rational")
    s.add_argument("--query", required=True)
    s.add_argument("--omega", required=True)
    s.add_argument("--classic", action="store_true", help="compute subw instead")
    s.add_argument("--mode", choices=("exhaustive", "pruned"), default="exhaustive")
    s.add_argument("--json")

    s = sub.add_parser("solve", help="evaluate a Boolean query")
    s.add_argument("--query", required=True)
    s.add_argument("--data", required=True)
    s.add_argument("--omega", required=True)
    s.add_argument("--oracle-check", action="store_true")

    s = sub.add_parser("oracle", help="brute-force answer")
    s.add_argument("--query", required=True)
    s.add_argument("--data", required=True)

    s = sub.add_parser("prove", help="print a certificate and its proof sequence")
    s.add_argument("--query", required=True)
    s.add_argument("--omega", required=True)
    s.add_argument("--lp", type=int)
    s.add_argument("--mode", choices=("exhaustive", "pruned"), default="exhaustive")

    s = sub.add_parser("cycle-exp", help="squareC_k on a grid")
    s.add_argument("--k", type=int, required=True)
    s.add_argument("--omega", required=True)
    s.add_argument("--grid", required=True)

    s = sub.add_parser("bench", help="work counters on random instances")
    s.add_argument("--query", required=True)
    s.add_argument("--omega", required=True)
    s.add_argument("--sizes", default="100,1000,10000")
    s.add_argument("--seed", type=int, default=0)
    return p


def main(argv=None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    try:
        if args.cmd == "width":
            return cmd_width(args, out)
        if args.cmd == "solve":
            return cmd_solve(args, out)
        if args.cmd == "oracle":
            return cmd_oracle(args, out)
        if args.cmd == "prove":
            return cmd_prove(args, out)
        if args.cmd == "cycle-exp":
            return cmd_cycle_exp(args, out)
        return cmd_bench(args, out, err)
    except ResourceError as exc:
        print(f"resource budget exceeded: {exc}", file=err)
        return EXIT_RESOURCE
    except (DefectError, NotShannonError) as exc:
        print(f"internal defect: {exc}", file=err)
        return EXIT_DEFECT
    except (InputError, ValueError) as exc:
        print(f"error: {exc}", file=err)
        return EXIT_USAGE
    except Exception as exc:  # anything else is a bug
        print(f"internal defect: {type(exc).__name__}: {exc}", file=err)
        return EXIT_DEFECT


if __name__ == "__main__":
    sys.exit(main())
