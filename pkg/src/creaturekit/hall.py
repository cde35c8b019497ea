"""The three Hall norms of a family of partial functions.

hn_plus  largest k+1 such that a k-selector exists (disjoint k-element picks
         from the domains, one pick per member).
hn       1 + min over non-empty subfamilies D' of floor(mdc(D') / |D'|), where
         mdc is the best coverage by a subfamily with pairwise disjoint domains.
HN       the largest hn of any family that d refines.

Domains are handled as integer bitmasks throughout.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations
from typing import Iterable, Sequence

from . import caps as _caps
from .core import Family, PartialFn, restrict_to
from .errors import PropertyFailure


def _mask(f: PartialFn) -> int:
    m = 0
    for i, _ in f.entries:
        m |= 1 << i
    return m


def _bits(mask: int) -> list[int]:
    out = []
    i = 0
    while mask:
        if mask & 1:
            out.append(i)
        mask >>= 1
        i += 1
    return out


def _check_caps(d: Family, HN: bool = False) -> None:
    c = _caps.load_caps()
    _caps.check(len(d), c.hn_members, "|d|")
    _caps.check(d.total_dom, c.HN_total_dom if HN else c.hn_total_dom, "sum of domain sizes")


# -- selectors -----------------------------------------------------------------


@dataclass(frozen=True)
class Selector:
    """A k-selector: member -> k indices of its domain, pairwise disjoint."""

    k: int
    assignment: tuple[tuple[PartialFn, tuple[int, ...]], ...]

    def validate(self, d: Family) -> None:
        picked = dict(self.assignment)
        if set(picked) != set(d.members):
            raise PropertyFailure("selector does not cover exactly the family", self.to_json())
        seen: set[int] = set()
        for f, idx in self.assignment:
            if len(set(idx)) != self.k or not set(idx) <= f.dom:
                raise PropertyFailure(f"bad selector set for {f!r}", self.to_json())
            if seen & set(idx):
                raise PropertyFailure("selector sets overlap", self.to_json())
            seen |= set(idx)

    def to_json(self) -> dict:
        return {"k": self.k, "sets": [[f.to_json(), list(idx)] for f, idx in self.assignment]}


def _matching_size(adj: Sequence[Sequence[int]]) -> int:
    """Maximum bipartite matching by augmenting paths (Kuhn)."""
    match_right: dict[int, int] = {}

    def augment(u: int, seen: set[int]) -> bool:
        for r in adj[u]:
            if r in seen:
                continue
            seen.add(r)
            if r not in match_right or augment(match_right[r], seen):
                match_right[r] = u
                return True
        return False

    return sum(1 for u in range(len(adj)) if augment(u, set()))


def _kfold_feasible(doms: Sequence[Sequence[int]], need: Sequence[int], banned: set[int]) -> bool:
    """Can member j get need[j] distinct indices from doms[j] with all picks disjoint?"""
    adj = []
    for dom, k in zip(doms, need):
        free = [i for i in dom if i not in banned]
        if len(free) < k:
            return False
        adj.extend([free] * k)
    return _matching_size(adj) == len(adj)


def find_selector(d: Family, k: int) -> Selector | None:
    """Lexicographically least k-selector, or None when none exists.

    Existence is decided by k-fold bipartite matching (each member replicated
    k times against level indices); the least one is then fixed greedily,
    re-checking feasibility after every pick.
    """
    doms = [sorted(f.dom) for f in d.members]
    if k == 0:
        return Selector(0, tuple((f, ()) for f in d.members))
    if not _kfold_feasible(doms, [k] * len(doms), set()):
        return None
    need = [k] * len(doms)
    banned: set[int] = set()
    picks: list[list[int]] = [[] for _ in doms]
    for j, dom in enumerate(doms):
        for _ in range(k):
            last = picks[j][-1] if picks[j] else -1
            for i in dom:
                if i <= last or i in banned:
                    continue
                banned.add(i)
                need[j] -= 1
                if _kfold_feasible(doms, need, banned):
                    picks[j].append(i)
                    break
                banned.discard(i)
                need[j] += 1
            else:  # pragma: no cover - feasibility was established above
                raise AssertionError("greedy selector completion failed")
    return Selector(k, tuple((f, tuple(p)) for f, p in zip(d.members, picks)))


def hn_plus_matching(d: Family) -> tuple[int, Selector]:
    """Witness route: (value, selector for value-1).

    The value is certified both ways: a (value-1)-selector is returned and no
    value-selector exists by the matching deficiency.
    """
    _check_caps(d)
    doms = [sorted(f.dom) for f in d.members]
    k = 0
    while _kfold_feasible(doms, [k + 1] * len(doms), set()):
        k += 1
    sel = find_selector(d, k)
    assert sel is not None
    return k + 1, sel


# -- hn_plus by the subset formula ---------------------------------------------


def _subsets(n: int) -> Iterable[tuple[int, ...]]:
    for size in range(1, n + 1):
        yield from combinations(range(n), size)


def hn_plus(d: Family) -> int:
    """1 + min over non-empty D' of floor(|union of domains| / |D'|)."""
    _check_caps(d)
    masks = [_mask(f) for f in d.members]
    best = None
    for sub in _subsets(len(masks)):
        u = 0
        for j in sub:
            u |= masks[j]
        q = u.bit_count() // len(sub)
        if best is None or q < best:
            best = q
            if best == 0:
                break
    return 1 + best


# -- hn ------------------------------------------------------------------------


def _mdc_masks(masks: Iterable[int]) -> int:
    """Best coverage by pairwise disjoint domains (branch and bound)."""
    ms = sorted(set(masks), key=lambda m: (-m.bit_count(), m))
    n = len(ms)
    suffix = [0] * (n + 1)
    for j in range(n - 1, -1, -1):
        suffix[j] = suffix[j + 1] | ms[j]
    best = 0

    def go(j: int, used: int, value: int) -> None:
        nonlocal best
        if value > best:
            best = value
        if j == n:
            return
        if value + (suffix[j] & ~used).bit_count() <= best:
            return
        m = ms[j]
        if not (m & used):
            go(j + 1, used | m, value + m.bit_count())
        go(j + 1, used, value)

    go(0, 0, 0)
    return best


def max_disjoint_cover(d: Family | Iterable[PartialFn]) -> int:
    members = d.members if isinstance(d, Family) else tuple(d)
    return _mdc_masks(_mask(f) for f in members)


def _hn_masks(masks: Sequence[int]) -> int:
    best = None
    memo: dict[frozenset, int] = {}
    for sub in _subsets(len(masks)):
        key = frozenset(masks[j] for j in sub)
        cover = memo.get(key)
        if cover is None:
            cover = memo[key] = _mdc_masks(key)
        q = cover // len(sub)
        if best is None or q < best:
            best = q
            if best == 0:
                break
    return 1 + best


def hn(d: Family) -> int:
    _check_caps(d)
    return _hn_masks([_mask(f) for f in d.members])


# -- HN ------------------------------------------------------------------------


def _disjoint_refinement(d: Family, k: int) -> list[PartialFn] | None:
    """Pairwise-disjoint-domain family G of k-element restrictions covering d.

    Members are processed in canonical order; a member already extending some
    g in G reuses it (this never hurts: its would-be new domain stays free for
    later members), otherwise it takes a fresh k-subset of its free indices,
    tried in lexicographic order.  The first success is returned.
    """
    members = list(d.members)
    doms = [sorted(f.dom) for f in members]
    if any(len(dm) < k for dm in doms):
        return None
    G: list[PartialFn] = []

    def covered(f: PartialFn) -> bool:
        return any(g.issubfn(f) for g in G)

    def go(j: int, used: int) -> bool:
        if j == len(members):
            return True
        f = members[j]
        if covered(f):
            return go(j + 1, used)
        # every later uncovered member needs k free indices somewhere
        for f2, dm2 in zip(members[j + 1 :], doms[j + 1 :]):
            if not covered(f2) and sum(1 for i in dm2 if not (used >> i) & 1) < k:
                return False
        free = [i for i in doms[j] if not (used >> i) & 1]
        for pick in combinations(free, k):
            g = restrict_to(f, pick)
            G.append(g)
            m = 0
            for i in pick:
                m |= 1 << i
            if go(j + 1, used | m):
                return True
            G.pop()
        return False

    return sorted(G) if go(0, 0) else None


def HN(d: Family) -> tuple[int, Family]:
    """(HN(d), witness G) with G disjoint-domain, d ⪯ G and hn(G) = HN(d).

    Any family d' with d ⪯ d' can be shrunk to one restriction per member of d
    without lowering hn, and an (hn-1)-selector of that family cuts it down to
    pairwise disjoint k-element restrictions.  So HN(d) - 1 is the largest k
    admitting such a G, and hn_plus(d) - 1 is a feasible starting point.
    """
    _check_caps(d, HN=True)
    return _HN(d)


@lru_cache(maxsize=4096)
def _HN(d: Family) -> tuple[int, Family]:
    # creatures, cut and escape all ask for HN of the same payload
    lo = hn_plus(d) - 1
    hi = min(len(f) for f in d.members)
    for k in range(hi, lo - 1, -1):
        if k == 0:
            return 1, d
        G = _disjoint_refinement(d, k)
        if G is not None:
            return k + 1, Family(tuple(G), d.hspec)
    raise PropertyFailure("no disjoint refinement at the hn_plus level", d.to_json())


@dataclass(frozen=True)
class NormReport:
    hn: int
    hn_plus: int
    HN: int
    selector: Selector | None = None
    refinement: Family | None = None

    def to_json(self) -> dict:
        return {
            "hn": self.hn,
            "hn_plus": self.hn_plus,
            "HN": self.HN,
            "selector": self.selector.to_json() if self.selector else None,
            "refinement": self.refinement.to_json() if self.refinement else None,
        }


def norm_report(d: Family, witnesses: bool = True) -> NormReport:
    a = hn(d)
    b = hn_plus(d)
    c, G = HN(d)
    sel = find_selector(d, b - 1) if witnesses else None
    if not a <= b <= c:
        raise PropertyFailure("Hall norm chain violated", d.to_json())
    return NormReport(a, b, c, sel, G if witnesses else None)
