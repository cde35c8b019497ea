"""Brute-force reference implementations.

These evaluate definitions as literally as is practical and share no search
code with the production modules.  They exist for tests and for the CLI's
``--oracle`` flag; nothing on the production path calls them.
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from itertools import chain, combinations, product

from . import caps as _caps
from .core import Family, PartialFn, refines, restrict_to
from .errors import CapExceeded


def _powerset(items, min_size=0):
    items = list(items)
    return chain.from_iterable(combinations(items, r) for r in range(min_size, len(items) + 1))


def _check_oracle_cap(d: Family) -> None:
    _caps.check(d.total_dom, _caps.load_caps().oracle_HN_total_dom, "oracle sum of domain sizes")


# -- Hall norms ----------------------------------------------------------------


def hn_plus_bruteforce(d: Family) -> int:
    """Largest k+1 such that some assignment of k-subsets is pairwise disjoint."""
    _check_oracle_cap(d)
    members = d.members
    k = 0
    while True:
        nxt = k + 1
        found = False
        for choice in product(*(combinations(sorted(f.dom), nxt) for f in members)):
            flat = [i for c in choice for i in c]
            if len(flat) == len(set(flat)):
                found = True
                break
        if not found:
            return k + 1
        k = nxt


def _best_disjoint_cover(doms: tuple[int, ...]) -> int:
    best = 0
    for sub in _powerset(doms):
        union = 0
        for m in sub:
            union |= m
        if union.bit_count() == sum(m.bit_count() for m in sub):  # pairwise disjoint
            best = max(best, union.bit_count())
    return best


@lru_cache(maxsize=None)
def _hn_doms(doms: tuple[int, ...]) -> int:
    """hn from the multiset of domains (as bitmasks), by the literal definition."""
    covers = [(len(sub), _best_disjoint_cover(sub)) for sub in _powerset(doms, 1)]
    k = 0
    # k qualifies iff every D' has a disjoint D'' covering k * |D'| indices
    while all(cover >= (k + 1) * n for n, cover in covers):
        k += 1
    return k + 1


def _dom_mask(f: PartialFn) -> int:
    return sum(1 << i for i, _ in f.entries)


def _hn_members(members) -> int:
    return _hn_doms(tuple(sorted(_dom_mask(f) for f in members)))


def hn_bruteforce(d: Family) -> int:
    _check_oracle_cap(d)
    return _hn_members(d.members)


def restrictions(f: PartialFn) -> list[PartialFn]:
    return [restrict_to(f, idx) for idx in _powerset(sorted(f.dom), 1)]


def HN_bruteforce(d: Family, literal_limit: int = 7) -> int:
    """max hn(d') over families d' of restrictions of members with d ⪯ d'.

    When the pool R of restrictions is small every subset of R is tried.
    Otherwise the search runs over families with one restriction per member:
    any admissible d' contains such a family, and hn can only grow when
    members are removed, so the maximum is the same.  Choices are visited by
    decreasing smallest member size s, since hn <= 1 + s; once the best value
    found reaches s + 1 nothing later can beat it.
    """
    _check_oracle_cap(d)
    pool = sorted({g for f in d.members for g in restrictions(f)})
    if len(pool) <= literal_limit:
        best = 1
        for sub in _powerset(pool, 1):
            cand = Family(sub, d.hspec)
            if refines(d, cand):
                best = max(best, _hn_members(cand.members))
        return best
    best = _hn_members(d.members)
    per_member = [[(g, _dom_mask(g), len(g)) for g in restrictions(f)] for f in d.members]
    for s in range(min(len(f) for f in d.members), 0, -1):
        if s + 1 <= best:
            break
        options = [[x for x in gs if x[2] >= s] for gs in per_member]
        for choice in product(*options):
            if min(x[2] for x in choice) != s:
                continue  # seen at a larger s
            masks = tuple(sorted({g: m for g, m, _ in choice}.values()))
            best = max(best, _hn_doms(masks))
            if best == s + 1:
                break
    return best


# -- possibilities -------------------------------------------------------------


def pos_bruteforce(w, creatures) -> set[tuple[int, ...]]:
    """Filter every sequence of the final length through every creature."""
    if not creatures:
        return {tuple(w)}
    hspec = creatures[0].hspec
    top = creatures[-1].m_up
    _caps.check(hspec.product(0, top), _caps.load_caps().oracle_pos_product, "oracle sequence count")
    w = tuple(w)
    out = set()
    for v in hspec.segments(0, top):
        if v[: len(w)] != w:
            continue
        if all(t.accepts(v[: t.m_dn], v[: t.m_up]) for t in creatures):
            out.add(v)
    return out


# -- measured trees ------------------------------------------------------------


def fronts(tree, node=()):
    """Every front of the subtree at ``node``, as frozensets of nodes."""
    yield frozenset([node])
    kids = tree.children(node)
    if not kids:
        return
    for combo in product(*(list(fronts(tree, c)) for c in kids)):
        yield frozenset().union(*combo)


def mu_F_fronts(tree) -> Fraction:
    """Minimum of mu_front over explicitly enumerated fronts."""
    from .measured import mu_front

    if tree.is_empty:
        return Fraction(0)
    c = _caps.load_caps()
    if tree.depth > c.oracle_front_depth:
        raise CapExceeded(f"front oracle needs depth <= {c.oracle_front_depth}")
    best = None
    for n, A in enumerate(fronts(tree)):
        if n >= c.oracle_front_count:
            raise CapExceeded("too many fronts to enumerate")
        v = mu_front(tree, A, validate=False)  # enumerated fronts are valid by construction
        if best is None or v < best:
            best = v
    return best


def count_fronts(tree, node=()) -> int:
    kids = tree.children(node)
    total = 1
    for c in kids:
        total *= count_fronts(tree, c)
    return 1 + total if kids else 1


__all__ = [
    "hn_bruteforce",
    "hn_plus_bruteforce",
    "HN_bruteforce",
    "pos_bruteforce",
    "mu_F_fronts",
    "fronts",
    "count_fronts",
    "restrictions",
]
