import random

import pytest

from artifact import engine as E

TRIANGLE = E.Query.of({"R": "XY", "S": "YZ", "T": "XZ"})
FOUR_CYCLE = E.Query.of({"R": "AB", "S": "BC", "T": "CD", "U": "DA"})
FOUR_CLIQUE = E.Query.of({"R": "XY", "S": "XZ", "T": "XW", "U": "YZ", "V": "YW", "Q": "ZW"})

# acceptance results collected here and echoed in the terminal summary
ACCEPTANCE: dict = {}


def random_db(q, rng: random.Random, dom: int | None = None, density: float | None = None):
    """Each atom keeps every tuple of dom^arity independently with the given density."""
    dom = dom or rng.randint(2, 30)
    density = density if density is not None else rng.choice([0.02, 0.05, 0.1, 0.2, 0.4])
    data = {}
    for a, vs in q.atoms:
        total = dom ** len(vs)
        m = min(total, max(1, round(density * total)))
        rows = set()
        while len(rows) < m:
            rows.add(tuple(rng.randrange(dom) for _ in vs))
        data[a] = rows
    return E.Database.from_rows(q, data)


def skewed_db(q, rng: random.Random, n: int = 60):
    """A few heavy hitters plus a uniform background; exercises the degree buckets."""
    data = {}
    for a, vs in q.atoms:
        rows = set()
        hub = rng.randrange(3)
        for _ in range(n):
            if rng.random() < 0.5:
                t = [rng.randrange(40) for _ in vs]
                t[rng.randrange(len(vs))] = hub
                rows.add(tuple(t))
            else:
                rows.add(tuple(rng.randrange(12) for _ in vs))
        data[a] = rows
    return E.Database.from_rows(q, data)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[k]
        terminalreporter.write_line(f"criterion {k}: {'PASS' if ok else 'FAIL'} - {detail}")


@pytest.fixture
def rng():
    return random.Random(1234)
