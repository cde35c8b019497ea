import random
from itertools import combinations, product

import pytest

from creaturekit import caps
from creaturekit.core import Family, HSpec, PartialFn


def all_partial_fns(hspec: HSpec, indices=None):
    """Every non-empty partial function on the given indices, in canonical order."""
    idx = range(hspec.length) if indices is None else indices
    out = []
    for r in range(1, len(idx) + 1):
        for dom in combinations(idx, r):
            for vals in product(*(range(hspec.sizes[i]) for i in dom)):
                out.append(PartialFn(tuple(zip(dom, vals))))
    return sorted(out)


def random_family(rng: random.Random, hspec: HSpec, max_members=4, lo=0, hi=None, max_dom=None):
    hi = hspec.length if hi is None else hi
    idx = list(range(lo, hi))
    members = []
    for _ in range(rng.randint(1, max_members)):
        size = rng.randint(1, min(len(idx), max_dom or len(idx)))
        dom = sorted(rng.sample(idx, size))
        members.append(PartialFn(tuple((i, rng.randrange(hspec.sizes[i])) for i in dom)))
    return Family(tuple(members), hspec)


@pytest.fixture
def raise_caps(monkeypatch):
    """Set CREATUREKIT_CAPS for one test."""

    def _set(raw: str):
        monkeypatch.setenv("CREATUREKIT_CAPS", raw)
        caps._parse.cache_clear()

    yield _set
    caps._parse.cache_clear()


# -- acceptance summary ------------------------------------------------------------

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def criterion():
    """Record one PASS/FAIL line for the acceptance summary."""

    def _record(number: int, ok: bool, detail: str) -> bool:
        line = f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        return ok

    return _record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
