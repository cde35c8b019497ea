"""Creatures, possibilities and finite candidates.

A creature constrains how a sequence of length ``m_dn`` may be extended to
length ``m_up``.  Creatures built by an example system delegate their ``val``
relation to that system; bare creatures carry ``val`` as an explicit set of
``(u, v)`` pairs.

Norms are kept twice: ``nor`` is the real value used for display, and the
exact pair ``(nor_base, pre_norm)`` says ``nor = log_{nor_base}(pre_norm)``
(or ``nor = pre_norm`` when ``nor_base`` is None).  Comparisons go through
:func:`nor_cmp`, which uses the exact form whenever both sides share a base.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Hashable, Iterable, Sequence

from .core import HSpec
from .errors import InvalidInput, PropertyFailure

NOR_TOL = 1e-9


def norm_value(base: int | None, pre: Fraction) -> float:
    if base is None:
        return float(pre)
    return math.log(pre) / math.log(base) if pre > 0 else float("-inf")


@dataclass(frozen=True)
class Creature:
    m_dn: int
    m_up: int
    hspec: HSpec
    pre_norm: Fraction
    nor_base: int | None
    kind: str = "EXPLICIT"
    payload: Hashable = None
    system: Any = field(default=None, repr=False)

    def __post_init__(self):
        if not self.m_dn < self.m_up:
            raise InvalidInput(f"creature needs m_dn < m_up, got [{self.m_dn}, {self.m_up})")
        self.hspec.check_interval(self.m_dn, self.m_up)
        object.__setattr__(self, "pre_norm", Fraction(self.pre_norm))

    @property
    def nor(self) -> float:
        return norm_value(self.nor_base, self.pre_norm)

    @property
    def interval(self) -> tuple[int, int]:
        return self.m_dn, self.m_up

    # -- val ---------------------------------------------------------------

    def accepts(self, u: Sequence[int], v: Sequence[int]) -> bool:
        """``<u, v> ∈ val``."""
        u, v = tuple(u), tuple(v)
        if len(u) != self.m_dn or len(v) != self.m_up or v[: self.m_dn] != u:
            return False
        if self.system is None:
            return (u, v) in self.payload
        return self.system.accepts(self, u, v)

    def in_dom(self, u: Sequence[int]) -> bool:
        u = tuple(u)
        if len(u) != self.m_dn:
            return False
        if self.system is None:
            return any(pu == u for pu, _ in self.payload)
        return self.system.in_dom(self, u)

    def extensions(self, u: Sequence[int]) -> list[tuple[int, ...]]:
        """All v with ``<u, v> ∈ val``, in lexicographic order."""
        u = tuple(u)
        if self.system is None:
            return sorted(v for pu, v in self.payload if pu == u)
        return self.system.extensions(self, u)

    def val_pairs(self) -> set[tuple[tuple[int, ...], tuple[int, ...]]]:
        """Extensional val (exponential; for small windows only)."""
        if self.system is None:
            return set(self.payload)
        return {(u, v) for u in self.hspec.segments(0, self.m_dn) for v in self.extensions(u)}

    def to_json(self) -> dict:
        if self.system is None:
            payload = {"val": [[list(u), list(v)] for u, v in sorted(self.payload)], "nor": _frac_json(self.pre_norm)}
        else:
            payload = self.system.payload_json(self)
        return {"m_dn": self.m_dn, "m_up": self.m_up, "system": self.kind, "payload": payload}


def _frac_json(x: Fraction):
    return x.numerator if x.denominator == 1 else [x.numerator, x.denominator]


def explicit_creature(hspec: HSpec, m_dn: int, m_up: int, pairs: Iterable, nor=0) -> Creature:
    """A creature given by its val relation; nor is taken as a plain number."""
    pairs = frozenset((tuple(u), tuple(v)) for u, v in pairs)
    if not pairs:
        raise InvalidInput("val must be non-empty")
    for u, v in pairs:
        hspec.check_sequence(v)
        if len(u) != m_dn or len(v) != m_up or v[:m_dn] != u:
            raise InvalidInput(f"pair {u}->{v} does not fit the interval [{m_dn}, {m_up})")
    return Creature(m_dn, m_up, hspec, Fraction(nor), None, "EXPLICIT", pairs, None)


def nor_cmp(s, t) -> int:
    """-1, 0, 1 as nor[s] is below, equal to, above nor[t]."""
    if s.nor_base == t.nor_base:
        a, b = s.pre_norm, t.pre_norm
    else:
        a, b = s.nor, t.nor
        if abs(a - b) <= NOR_TOL:
            return 0
    return (a > b) - (a < b)


# -- tree creatures ------------------------------------------------------------


@dataclass(frozen=True)
class TreeCreature:
    """A local tree creature: a root ``eta`` and its admissible one-step successors."""

    eta: tuple[int, ...]
    pos_set: frozenset
    hspec: HSpec
    pre_norm: Fraction
    nor_base: int | None = None
    kind: str = "EXPLICIT"
    payload: Hashable = None
    system: Any = field(default=None, repr=False)

    def __post_init__(self):
        eta = self.hspec.check_sequence(self.eta)
        object.__setattr__(self, "eta", eta)
        object.__setattr__(self, "pos_set", frozenset(tuple(x) for x in self.pos_set))
        object.__setattr__(self, "pre_norm", Fraction(self.pre_norm))
        if not self.pos_set:
            raise InvalidInput("tree creature needs a non-empty pos set")
        n = len(eta)
        for nu in self.pos_set:
            if len(nu) != n + 1 or nu[:n] != eta:
                raise InvalidInput(f"{nu} is not a one-step extension of {eta}")
            self.hspec.check_sequence(nu)

    @property
    def nor(self) -> float:
        return norm_value(self.nor_base, self.pre_norm)

    @property
    def level(self) -> int:
        return len(self.eta)

    @property
    def values(self) -> frozenset[int]:
        return frozenset(nu[-1] for nu in self.pos_set)

    def to_json(self) -> dict:
        if self.system is None:
            payload = {"pos": sorted(self.values), "nor": _frac_json(self.pre_norm)}
        else:
            payload = self.system.payload_json(self)
        return {"eta": list(self.eta), "system": self.kind, "payload": payload}


def um_creature(hspec: HSpec, eta: Sequence[int], A: Iterable[int]) -> TreeCreature:
    """Branching creature ``(m, eta, A)`` with pos = {eta⌢a : a ∈ A} and nor = |A|."""
    eta = tuple(eta)
    A = frozenset(A)
    return TreeCreature(eta, frozenset(eta + (a,) for a in A), hspec, Fraction(len(A)), None, "UM", A)


# -- possibilities -------------------------------------------------------------


def check_chain(creatures: Sequence[Creature]) -> None:
    for a, b in zip(creatures, creatures[1:]):
        if a.m_up != b.m_dn:
            raise InvalidInput(f"interval mismatch: [{a.m_dn},{a.m_up}) then [{b.m_dn},{b.m_up})")
        if a.hspec != b.hspec:
            raise InvalidInput("creatures over different HSpecs")


def pos(w: Sequence[int], creatures: Sequence[Creature]) -> set[tuple[int, ...]]:
    """Sequences of length m_up(t_n) extending w admitted by every creature."""
    w = tuple(w)
    if not creatures:
        return {w}
    check_chain(creatures)
    t0 = creatures[0]
    if len(w) != t0.m_dn or not t0.in_dom(w):
        raise InvalidInput(f"w={list(w)} is not in dom(val) of the first creature")
    frontier = {w}
    for t in creatures:
        frontier = {v for u in frontier for v in t.extensions(u)}
    return frontier


def prefix_closure(seqs: Iterable[Sequence[int]]) -> set[tuple[int, ...]]:
    out = set()
    for v in seqs:
        v = tuple(v)
        for n in range(len(v) + 1):
            out.add(v[:n])
    return out


# -- finite candidates ---------------------------------------------------------


@dataclass(frozen=True)
class FiniteCandidate:
    w: tuple[int, ...]
    creatures: tuple[Creature, ...]

    def __post_init__(self):
        object.__setattr__(self, "w", tuple(self.w))
        object.__setattr__(self, "creatures", tuple(self.creatures))

    def validate(self) -> "FiniteCandidate":
        cs = self.creatures
        if not cs:
            return self
        check_chain(cs)
        if len(self.w) != cs[0].m_dn or not cs[0].in_dom(self.w):
            raise PropertyFailure("w is not in dom(val[t_0])", self.to_json())
        frontier = {self.w}
        for i, t in enumerate(cs[:-1]):
            frontier = {v for u in frontier for v in t.extensions(u)}
            nxt = cs[i + 1]
            for v in sorted(frontier):
                if not nxt.in_dom(v):
                    raise PropertyFailure(f"pos after t_{i} leaves dom(val[t_{i + 1}]) at {list(v)}", self.to_json())
        return self

    @property
    def top(self) -> int:
        return self.creatures[-1].m_up if self.creatures else len(self.w)

    def pos(self) -> set[tuple[int, ...]]:
        return pos(self.w, self.creatures)

    def POS(self) -> set[tuple[int, ...]]:
        return prefix_closure(self.pos())

    def to_json(self) -> dict:
        return {"w": list(self.w), "creatures": [t.to_json() for t in self.creatures]}


def POS(c: FiniteCandidate) -> set[tuple[int, ...]]:
    return c.POS()


# -- the three operations ------------------------------------------------------


@dataclass(frozen=True)
class Decide:
    w_star: tuple[int, ...]

    def to_json(self):
        return {"op": "decide", "w": list(self.w_star)}


@dataclass(frozen=True)
class Compose:
    """Consecutive blocks (given by their lengths) replaced by one creature each."""

    grouping: tuple[int, ...]
    replacements: tuple[Creature, ...]

    def to_json(self):
        return {"op": "compose", "grouping": list(self.grouping), "replacements": [t.to_json() for t in self.replacements]}


@dataclass(frozen=True)
class Decompose:
    """One splitting per creature; ``(t,)`` leaves t in place."""

    splittings: tuple[tuple[Creature, ...], ...]

    def to_json(self):
        return {"op": "decompose", "splittings": [[s.to_json() for s in sp] for sp in self.splittings]}


def fc_apply(c: FiniteCandidate, op, system) -> FiniteCandidate:
    cs = c.creatures
    if isinstance(op, Decide):
        ws = tuple(op.w_star)
        if ws == c.w:
            return c
        ends = [t.m_up for t in cs]
        if len(ws) not in ends:
            raise PropertyFailure(f"decided sequence length {len(ws)} is not a creature boundary")
        k = ends.index(len(ws)) + 1
        if ws not in pos(c.w, cs[:k]):
            raise PropertyFailure(f"{list(ws)} is not in pos(w, t_0..t_{k - 1})")
        return FiniteCandidate(ws, cs[k:]).validate()
    if isinstance(op, Compose):
        if sum(op.grouping) != len(cs) or len(op.grouping) != len(op.replacements) or min(op.grouping, default=1) < 1:
            raise InvalidInput("grouping must split the creature list into consecutive non-empty blocks")
        out, i = [], 0
        for j, (size, s) in enumerate(zip(op.grouping, op.replacements)):
            block = list(cs[i : i + size])
            if not system.sigma_member(s, block):
                raise PropertyFailure(f"replacement {j} is not in Σ of creatures {i}..{i + size - 1}")
            out.append(s)
            i += size
        return FiniteCandidate(c.w, tuple(out)).validate()
    if isinstance(op, Decompose):
        if len(op.splittings) != len(cs):
            raise InvalidInput("one splitting per creature is required")
        out = []
        for i, (t, sp) in enumerate(zip(cs, op.splittings)):
            sp = tuple(sp)
            if sp != (t,) and not system.sigma_bot_member(list(sp), t):
                raise PropertyFailure(f"splitting {i} is not in Σ⊥(t_{i})")
            out.extend(sp)
        return FiniteCandidate(c.w, tuple(out)).validate()
    raise InvalidInput(f"unknown operation {op!r}")


# -- order search --------------------------------------------------------------


@dataclass
class LeqResult:
    found: bool
    chain: list = field(default_factory=list)  # list of (op, resulting candidate)
    explored: int = 0

    def to_json(self) -> dict:
        return {
            "found": self.found,
            "steps": [op.to_json() for op, _ in self.chain],
            "explored": self.explored,
        }


def _moves(d: FiniteCandidate, target: FiniteCandidate, system):
    """Candidate operations from d that can still lead to target.

    Decide only ever moves w towards target.w; compose and decompose draw
    their replacements from the target's creatures plus the system's own
    canonical joins and splits.
    """
    cs = d.creatures
    tw = target.w
    # decide
    for k, t in enumerate(cs, 1):
        if t.m_up > len(tw):
            break
        ws = tw[: t.m_up]
        yield Decide(ws)
    # compose: one block replaced, everything else kept
    tgt = {t.interval: t for t in target.creatures}
    for i in range(len(cs)):
        for j in range(i, len(cs)):
            block = list(cs[i : j + 1])
            cands = []
            iv = (block[0].m_dn, block[-1].m_up)
            if iv in tgt:
                cands.append(tgt[iv])
            cands.extend(system.join_candidates(block))
            seen = set()
            for s in cands:
                if s in seen or (len(block) == 1 and s == block[0]):
                    continue
                seen.add(s)
                grouping = (1,) * i + (j - i + 1,) + (1,) * (len(cs) - j - 1)
                reps = cs[:i] + (s,) + cs[j + 1 :]
                yield Compose(grouping, reps)
    # decompose one creature at the target's boundaries
    bounds = {t.m_dn for t in target.creatures} | {len(tw)}
    for i, t in enumerate(cs):
        cuts = sorted(b for b in bounds if t.m_dn < b < t.m_up)
        if not cuts:
            continue
        for sp in system.split_candidates(t, cuts, tgt):
            sps = tuple((x,) for x in cs[:i]) + (tuple(sp),) + tuple((x,) for x in cs[i + 1 :])
            yield Decompose(sps)


def fc_leq_witness(c0: FiniteCandidate, c1: FiniteCandidate, system, budget: int = 6, max_nodes: int | None = None) -> LeqResult:
    """Breadth-first search for a chain of operations from c0 to c1.

    ``budget`` bounds the chain length.  Intermediate candidates are never
    filtered by norm.  Since every step can only shrink POS, a candidate d
    with POS(c1) ⊄ POS(d) is abandoned.
    """
    from . import caps as _caps

    if budget < 1:
        raise InvalidInput("budget must be >= 1")
    if not getattr(system, "really_finitary", False):
        raise InvalidInput(f"system {system.kind} is not really finitary")
    if max_nodes is None:
        max_nodes = _caps.load_caps().fc_search_nodes
    c0.validate()
    c1.validate()
    if c0 == c1:
        return LeqResult(True, [], 1)
    goal_pos = c1.POS()
    if not goal_pos <= c0.POS():
        return LeqResult(False, [], 1)
    parent: dict[FiniteCandidate, tuple] = {c0: (None, None)}
    queue = deque([(c0, 0)])
    explored = 0
    while queue:
        d, depth = queue.popleft()
        explored += 1
        if depth >= budget or explored > max_nodes:
            continue
        for op in _moves(d, c1, system):
            try:
                e = fc_apply(d, op, system)
            except (PropertyFailure, InvalidInput):
                continue
            if e in parent:
                continue
            if not goal_pos <= e.POS():
                continue
            parent[e] = (d, op)
            if e == c1:
                chain = []
                x = e
                while parent[x][0] is not None:
                    prev, o = parent[x]
                    chain.append((o, x))
                    x = prev
                chain.reverse()
                return LeqResult(True, chain, explored)
            queue.append((e, depth + 1))
    return LeqResult(False, [], explored)


def replay(c0: FiniteCandidate, chain, system) -> FiniteCandidate:
    """Re-apply a certificate chain step by step, checking each result."""
    d = c0
    for op, expected in chain:
        d = fc_apply(d, op, system)
        if d != expected:
            raise PropertyFailure("certificate step does not reproduce the recorded candidate")
    return d


# -- finite tree candidates ----------------------------------------------------


@dataclass(frozen=True)
class FiniteTreeCandidate:
    """A finite tree S with uniform top level and a creature at every non-maximal node."""

    nodes: frozenset
    lev: int
    creatures: tuple  # sorted (eta, TreeCreature) pairs

    def __post_init__(self):
        object.__setattr__(self, "nodes", frozenset(tuple(x) for x in self.nodes))
        object.__setattr__(self, "creatures", tuple(sorted(self.creatures, key=lambda p: p[0])))

    @property
    def creature_map(self) -> dict:
        return dict(self.creatures)

    def validate(self) -> "FiniteTreeCandidate":
        S = self.nodes
        if () not in S:
            raise InvalidInput("tree must contain the root")
        for eta in S:
            if len(eta) > self.lev or (eta and eta[:-1] not in S):
                raise InvalidInput(f"node {eta} breaks prefix closure or exceeds lev")
        cm = self.creature_map
        inner = {eta for eta in S if len(eta) < self.lev}
        if set(cm) != inner:
            raise InvalidInput("creatures must sit exactly on the non-maximal nodes")
        for eta in inner:
            succ = {nu for nu in S if len(nu) == len(eta) + 1 and nu[:-1] == eta}
            if not succ:
                raise InvalidInput(f"node {eta} has no successor")
            if cm[eta].eta != eta or cm[eta].pos_set != frozenset(succ):
                raise InvalidInput(f"pos of the creature at {eta} differs from its successors in S")
        return self

    def level(self, n: int) -> list[tuple[int, ...]]:
        return sorted(eta for eta in self.nodes if len(eta) == n)

    @classmethod
    def um(cls, hspec: HSpec, nodes: Iterable, lev: int) -> "FiniteTreeCandidate":
        """Candidate whose creatures are read off the branching of S."""
        S = frozenset(tuple(x) for x in nodes)
        cr = []
        for eta in S:
            if len(eta) < lev:
                A = {nu[-1] for nu in S if len(nu) == len(eta) + 1 and nu[:-1] == eta}
                cr.append((eta, um_creature(hspec, eta, A)))
        return cls(S, lev, tuple(cr)).validate()

    def to_json(self) -> dict:
        return {"lev": self.lev, "nodes": [list(x) for x in sorted(self.nodes)]}


def ftc_leq(c0: FiniteTreeCandidate, c1: FiniteTreeCandidate, sigma) -> bool:
    """c0 ≤ c1: S1 agrees with S0 below lev(S0) and creatures there move by Σ."""
    if c0.lev > c1.lev:
        return False
    m0, m1 = c0.creature_map, c1.creature_map
    for eta in c1.nodes:
        if len(eta) < c0.lev:
            if eta not in c0.nodes or not sigma(m1[eta], m0[eta]):
                return False
    return True


def um_sigma(s: TreeCreature, t: TreeCreature) -> bool:
    """s ∈ Σ(t) for branching creatures: same root, fewer successors."""
    return s.eta == t.eta and s.pos_set <= t.pos_set
