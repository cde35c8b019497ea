"""Concrete creating pairs and their constructive witnesses.

Supported kinds:

BAS628     families Δ of partial functions on the creature's interval; v is
           admitted when no f ∈ Δ is contained in v; nor = log8 hn(Δ).
BAS628BIS  as BAS628 with HN in place of hn and a different empty-family norm.
LOC628     one-level creatures over block alphabets H(k) = ∏ H*(i), i ∈ [n_k, n_{k+1}).
EDRF       one level, a forbidden set E; nor = N_k - |E| or 1.
LOCTREE    tree creatures (m, eta, E) forbidding E after eta; nor = log4(H/|E|).
OMITEX     one level, forbidden E ⊆ H ∖ {0}; nor = log4(H/|E|).
DUAL       complements of creatures below a fixed sequence t* of a local base.

All of them except LOCTREE are forgetful and full: whether v is admitted
depends only on the segment v[m_dn:m_up].
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import combinations, product
from typing import Iterable, Sequence

from . import hall
from .core import EMPTY, Family, HSpec, PartialFn, restrict
from .creatures import Creature, TreeCreature, nor_cmp
from .errors import InvalidInput, NoLink, PropertyFailure, SideConditionError

KINDS = ("BAS628", "BAS628BIS", "LOC628", "EDRF", "LOCTREE", "OMITEX", "DUAL")
LOCAL = ("LOC628", "EDRF", "OMITEX", "DUAL", "LOCTREE")
UNDEFINED = None  # dual_creature's "not defined" value


@dataclass(frozen=True)
class ExampleSystem:
    kind: str
    hspec: HSpec
    N: tuple[int, ...] | None = None
    hstar: HSpec | None = None
    nbar: tuple[int, ...] | None = None
    base: "ExampleSystem | None" = None
    t_star: tuple[Creature, ...] | None = None

    # -- constructors --------------------------------------------------------

    @classmethod
    def bas628(cls, hspec: HSpec) -> "ExampleSystem":
        return cls("BAS628", hspec)

    @classmethod
    def bas628bis(cls, hspec: HSpec) -> "ExampleSystem":
        return cls("BAS628BIS", hspec)

    @classmethod
    def edrf(cls, hspec: HSpec, N: Sequence[int] | None = None) -> "ExampleSystem":
        if any(s < 4 for s in hspec.sizes):
            raise SideConditionError("EDRF needs |H(k)| >= 4 at every level")
        N = tuple(hspec.sizes) if N is None else tuple(N)
        if len(N) != hspec.length or any(n < 1 for n in N):
            raise SideConditionError("EDRF needs one positive N_k per level")
        return cls("EDRF", hspec, N=N)

    @classmethod
    def loc628(cls, hstar: HSpec, nbar: Sequence[int]) -> "ExampleSystem":
        nbar = tuple(nbar)
        if len(nbar) < 2 or any(a >= b for a, b in zip(nbar, nbar[1:])) or nbar[-1] > hstar.length or nbar[0] < 0:
            raise SideConditionError("LOC628 needs a strictly increasing n̄ inside the H* window")
        blocks = HSpec(tuple(math.prod(hstar.sizes[a:b]) for a, b in zip(nbar, nbar[1:])))
        return cls("LOC628", blocks, hstar=hstar, nbar=nbar)

    @classmethod
    def loctree(cls, hspec: HSpec) -> "ExampleSystem":
        return cls("LOCTREE", hspec)

    @classmethod
    def omitex(cls, hspec: HSpec) -> "ExampleSystem":
        return cls("OMITEX", hspec)

    @classmethod
    def dual(cls, base: "ExampleSystem", t_star: Iterable[Creature]) -> "ExampleSystem":
        if base.kind not in ("EDRF", "OMITEX", "LOC628"):
            raise SideConditionError("the dual construction needs a local forgetful base")
        ts = tuple(sorted(t_star, key=lambda t: t.m_dn))
        for t in ts:
            if t.system != base:
                raise SideConditionError("t* creatures must come from the base system")
        return cls("DUAL", base.hspec, base=base, t_star=ts)

    @property
    def really_finitary(self) -> bool:
        if self.kind == "EDRF":
            return self.N == self.hspec.sizes
        if self.kind == "DUAL":
            return self.base.really_finitary
        return True

    # -- creatures -----------------------------------------------------------

    def mk_creature(self, m_dn: int, m_up: int, payload) -> Creature:
        k = self.kind
        if k in ("BAS628", "BAS628BIS"):
            return self._mk_bas(m_dn, m_up, payload)
        if m_up != m_dn + 1 and k != "LOCTREE":
            raise SideConditionError(f"{k} creatures live on a single level")
        if k == "LOC628":
            return self._mk_loc(m_dn, payload)
        if k == "EDRF":
            return self._mk_edrf(m_dn, payload)
        if k == "OMITEX":
            return self._mk_omitex(m_dn, payload)
        if k == "DUAL":
            c = self.dual_of(payload)
            if c is UNDEFINED:
                raise SideConditionError("complement of val is empty")
            return c
        if k == "LOCTREE":
            eta, E = payload
            return self.mk_tree(eta, E)
        raise InvalidInput(f"unknown system kind {k}")

    def _as_family(self, payload, hspec: HSpec) -> Family | None:
        if payload is None or payload is EMPTY:
            return None
        if isinstance(payload, Family):
            if payload.hspec != hspec:
                raise InvalidInput("family lives over a different HSpec")
            return payload
        members = list(payload)
        return Family.of(hspec, members) if members else None

    def _mk_bas(self, m_dn: int, m_up: int, payload) -> Creature:
        self.hspec.check_interval(m_dn, m_up)
        delta = self._as_family(payload, self.hspec)
        if delta is not None:
            if not delta.within(m_dn, m_up):
                raise SideConditionError(f"Δ must live inside [{m_dn}, {m_up})")
            if hall.hn_plus(delta) <= 1:
                raise SideConditionError("Δ must have hn_plus > 1")
        if self.kind == "BAS628":
            pre = Fraction(8 ** (m_dn + 1)) if delta is None else Fraction(hall.hn(delta))
        else:
            pre = Fraction((m_up - m_dn) * 8 ** (2 * m_dn + 1)) if delta is None else Fraction(hall.HN(delta)[0])
        return Creature(m_dn, m_up, self.hspec, pre, 8, self.kind, delta, self)

    def _mk_loc(self, k: int, payload) -> Creature:
        self.hspec.check_index(k)
        lo, hi = self.nbar[k], self.nbar[k + 1]
        delta = self._as_family(payload, self.hstar)
        if delta is not None:
            if not delta.within(lo, hi):
                raise SideConditionError(f"Δ must live inside the block [{lo}, {hi})")
            if hall.hn_plus(delta) <= 1:
                raise SideConditionError("Δ must have hn_plus > 1")
        pre = Fraction(hi - lo + 1) if delta is None else Fraction(hall.HN(delta)[0])
        return Creature(k, k + 1, self.hspec, pre, 8, "LOC628", delta, self)

    def _mk_edrf(self, k: int, payload) -> Creature:
        self.hspec.check_index(k)
        E = frozenset(payload)
        N = self.N[k]
        if not all(isinstance(a, int) and 0 <= a < self.hspec.sizes[k] for a in E):
            raise InvalidInput(f"E must be a subset of H({k})")
        if not 0 < len(E) < N:
            raise SideConditionError(f"EDRF needs 0 < |E| < N_{k} = {N}")
        pre = Fraction(1) if 4 * len(E) >= N else Fraction(N - len(E))
        return Creature(k, k + 1, self.hspec, pre, None, "EDRF", E, self)

    def _mk_omitex(self, k: int, payload) -> Creature:
        self.hspec.check_index(k)
        E = frozenset(payload)
        H = self.hspec.sizes[k]
        if not E or not all(isinstance(a, int) and 1 <= a < H for a in E):
            raise SideConditionError("OMITEX needs ∅ ≠ E ⊆ H(m) ∖ {0}")
        return Creature(k, k + 1, self.hspec, Fraction(H, len(E)), 4, "OMITEX", E, self)

    def mk_tree(self, eta: Sequence[int], E: Iterable[int]) -> TreeCreature:
        if self.kind != "LOCTREE":
            raise InvalidInput("tree creatures belong to LOCTREE")
        eta = self.hspec.check_sequence(eta)
        m = len(eta)
        self.hspec.check_index(m)
        H = self.hspec.sizes[m]
        E = frozenset(E)
        if not E or len(E) >= H or not all(isinstance(a, int) and 0 <= a < H for a in E):
            raise SideConditionError("LOCTREE needs ∅ ≠ E ⊊ H(m)")
        posset = frozenset(eta + (a,) for a in range(H) if a not in E)
        return TreeCreature(eta, posset, self.hspec, Fraction(H, len(E)), 4, "LOCTREE", (eta, E), self)

    def dual_of(self, t: Creature):
        """t^c for a base creature t, or UNDEFINED when val[t] is everything."""
        if self.kind != "DUAL":
            raise InvalidInput("dual_of needs a DUAL system")
        if t.system != self.base:
            raise SideConditionError("creature is not from the base system")
        star = self.star_at(t.m_dn)
        if not self.base.sigma_member(t, [star]):
            raise SideConditionError("t must lie in Σ(t*) at its level")
        if len(allowed_segments(t)) == self.hspec.sizes[t.m_dn]:
            return UNDEFINED
        if t.nor_base is None:
            pre = max(Fraction(0), star.pre_norm - t.pre_norm)
        else:
            pre = max(Fraction(1), star.pre_norm / t.pre_norm)
        return Creature(t.m_dn, t.m_up, self.hspec, pre, t.nor_base, "DUAL", t, self)

    def star_at(self, level: int) -> Creature:
        for s in self.t_star:
            if s.m_dn == level:
                return s
        raise SideConditionError(f"no t* creature at level {level}")

    # -- val -----------------------------------------------------------------

    def segment_ok(self, t: Creature, seg: tuple[int, ...]) -> bool:
        k = t.kind
        if k in ("BAS628", "BAS628BIS"):
            if t.payload is None:
                return True
            base = t.m_dn
            return not any(all(seg[i - base] == v for i, v in f.entries) for f in t.payload)
        if k in ("EDRF", "OMITEX"):
            return seg[0] not in t.payload
        if k == "LOC628":
            if t.payload is None:
                return True
            block = self.decode(t.m_dn, seg[0])
            lo = self.nbar[t.m_dn]
            return not any(all(block[i - lo] == v for i, v in f.entries) for f in t.payload)
        if k == "DUAL":
            return not self.base.segment_ok(t.payload, seg)
        raise InvalidInput(f"no segment predicate for {k}")

    def accepts(self, t: Creature, u, v) -> bool:
        return self.segment_ok(t, tuple(v[t.m_dn : t.m_up]))

    def in_dom(self, t: Creature, u) -> bool:
        # full and forgetful: every u of the right length has an extension
        return True

    def extensions(self, t: Creature, u) -> list[tuple[int, ...]]:
        return [tuple(u) + s for s in allowed_segments(t)]

    def decode(self, k: int, code: int) -> tuple[int, ...]:
        """Block code of H(k) -> tuple of H* values (first level most significant)."""
        lo, hi = self.nbar[k], self.nbar[k + 1]
        out = []
        for s in reversed(self.hstar.sizes[lo:hi]):
            code, r = divmod(code, s)
            out.append(r)
        return tuple(reversed(out))

    def encode(self, k: int, block: Sequence[int]) -> int:
        lo, hi = self.nbar[k], self.nbar[k + 1]
        code = 0
        for s, x in zip(self.hstar.sizes[lo:hi], block):
            code = code * s + x
        return code

    # -- Σ and Σ⊥ ------------------------------------------------------------

    def _check_parts(self, s, parts) -> None:
        if not parts:
            raise InvalidInput("Σ needs at least one part")
        for p in list(parts) + [s]:
            if p.system != self:
                raise InvalidInput("creature from a different system")
        if self.kind == "LOCTREE":
            return
        for a, b in zip(parts, parts[1:]):
            if a.m_up != b.m_dn:
                raise InvalidInput("parts do not chain")
        if (s.m_dn, s.m_up) != (parts[0].m_dn, parts[-1].m_up):
            raise InvalidInput("candidate interval differs from the joined interval of the parts")

    def sigma_member(self, s, parts: Sequence) -> bool:
        """s ∈ Σ(parts)."""
        parts = list(parts)
        self._check_parts(s, parts)
        k = self.kind
        if k in ("BAS628", "BAS628BIS"):
            have = set(s.payload.members) if s.payload is not None else set()
            return all(p.payload is None or set(p.payload.members) <= have for p in parts)
        if len(parts) > 1:
            return False
        t = parts[0]
        if k == "LOC628":
            if t.payload is None:
                return True
            return s.payload is not None and set(t.payload.members) <= set(s.payload.members)
        if k in ("EDRF", "OMITEX"):
            return t.payload <= s.payload
        if k == "LOCTREE":
            if s.eta != t.eta:
                raise InvalidInput("tree creatures with different roots")
            return t.payload[1] <= s.payload[1]
        if k == "DUAL":
            return self.base.sigma_member(t.payload, [s.payload])
        raise InvalidInput(f"unknown kind {k}")

    def sigma_bot_member(self, splitting: Sequence[Creature], t: Creature) -> bool:
        """splitting ∈ Σ⊥(t)."""
        splitting = list(splitting)
        if not splitting:
            raise InvalidInput("empty splitting")
        for a, b in zip(splitting, splitting[1:]):
            if a.m_up != b.m_dn:
                raise InvalidInput("splitting intervals do not chain")
        if (splitting[0].m_dn, splitting[-1].m_up) != (t.m_dn, t.m_up):
            raise InvalidInput("splitting does not partition the creature's interval")
        if any(p.system != self for p in splitting):
            raise InvalidInput("creature from a different system")
        if self.kind not in ("BAS628", "BAS628BIS"):
            return splitting == [t]
        if t.payload is None:
            return True
        for f in t.payload:
            if not any(
                p.payload is not None and restrict(f, p.m_dn, p.m_up) in p.payload for p in splitting
            ):
                return False
        return True

    # -- proposals used by the order search -----------------------------------

    def join_candidates(self, block: Sequence[Creature]) -> list[Creature]:
        """The smallest members of Σ(block), when the system has them."""
        if self.kind not in ("BAS628", "BAS628BIS") or len(block) < 2:
            return []
        members = [f for t in block if t.payload is not None for f in t.payload]
        try:
            return [self.mk_creature(block[0].m_dn, block[-1].m_up, members or None)]
        except SideConditionError:
            return []

    def canonical_split(self, t: Creature, cuts: Sequence[int]) -> list[Creature] | None:
        """Split t at the cut points keeping every non-empty restriction."""
        if self.kind not in ("BAS628", "BAS628BIS"):
            return None
        bounds = [t.m_dn, *cuts, t.m_up]
        parts = []
        for lo, hi in zip(bounds, bounds[1:]):
            members = [] if t.payload is None else [r for f in t.payload if (r := restrict(f, lo, hi)) is not EMPTY]
            try:
                parts.append(self.mk_creature(lo, hi, members or None))
            except SideConditionError:
                return None
        return parts

    def split_candidates(self, t: Creature, cuts: Sequence[int], targets: dict | None = None):
        if self.kind not in ("BAS628", "BAS628BIS"):
            return
        targets = targets or {}
        options = [list(cuts)] + ([[c] for c in cuts] if len(cuts) > 1 else [])
        for cs in options:
            canon = self.canonical_split(t, cs)
            bounds = [t.m_dn, *cs, t.m_up]
            ivs = list(zip(bounds, bounds[1:]))
            if canon is not None:
                yield canon
            if any(iv in targets for iv in ivs):
                mixed = [targets.get(iv, canon[j] if canon else None) for j, iv in enumerate(ivs)]
                if all(p is not None for p in mixed) and mixed != canon:
                    yield mixed


# -- shared helpers ------------------------------------------------------------


@lru_cache(maxsize=1 << 16)
def allowed_segments(t: Creature) -> tuple[tuple[int, ...], ...]:
    """Admitted segments v[m_dn:m_up] of a forgetful creature, lexicographically."""
    sysm = t.system
    return tuple(seg for seg in t.hspec.segments(t.m_dn, t.m_up) if sysm.segment_ok(t, seg))


def creature_from_json(system: ExampleSystem, obj) -> Creature | TreeCreature:
    if not isinstance(obj, dict):
        raise InvalidInput("creature JSON must be an object")
    kind = obj.get("system", system.kind)
    if kind != system.kind:
        raise InvalidInput(f"creature of kind {kind} given to a {system.kind} system")
    p = obj.get("payload", {})
    k = system.kind
    if k == "LOCTREE":
        return system.mk_tree(p.get("eta", obj.get("eta", [])), p["E"])
    m_dn, m_up = obj.get("m_dn"), obj.get("m_up")
    if not isinstance(m_dn, int) or not isinstance(m_up, int):
        raise InvalidInput("creature needs integer m_dn and m_up")
    if k in ("BAS628", "BAS628BIS", "LOC628"):
        hs = system.hstar if k == "LOC628" else system.hspec
        members = [PartialFn.from_json(f) for f in p.get("delta", [])]
        return system.mk_creature(m_dn, m_up, Family(tuple(members), hs) if members else None)
    if k in ("EDRF", "OMITEX"):
        return system.mk_creature(m_dn, m_up, p.get("E", []))
    if k == "DUAL":
        return system.mk_creature(m_dn, m_up, creature_from_json(system.base, p["base"]))
    raise InvalidInput(f"unknown kind {k}")


def _payload_json(system: ExampleSystem, t) -> dict:
    k = system.kind
    if k in ("BAS628", "BAS628BIS", "LOC628"):
        return {"delta": [] if t.payload is None else [f.to_json() for f in t.payload]}
    if k in ("EDRF", "OMITEX"):
        return {"E": sorted(t.payload)}
    if k == "LOCTREE":
        return {"eta": list(t.payload[0]), "E": sorted(t.payload[1])}
    if k == "DUAL":
        return {"base": t.payload.to_json()}
    raise InvalidInput(k)


ExampleSystem.payload_json = _payload_json


def system_from_json(obj) -> ExampleSystem:
    if not isinstance(obj, dict) or obj.get("kind") not in KINDS:
        raise InvalidInput(f"system JSON needs a kind among {KINDS}")
    k = obj["kind"]
    if k == "LOC628":
        return ExampleSystem.loc628(HSpec(tuple(obj["hstar"])), obj["nbar"])
    if k == "DUAL":
        base = system_from_json(obj["base"])
        return ExampleSystem.dual(base, [creature_from_json(base, c) for c in obj.get("t_star", [])])
    hs = HSpec(tuple(obj["sizes"]))
    if k == "EDRF":
        return ExampleSystem.edrf(hs, obj.get("N"))
    return {"BAS628": ExampleSystem.bas628, "BAS628BIS": ExampleSystem.bas628bis,
            "LOCTREE": ExampleSystem.loctree, "OMITEX": ExampleSystem.omitex}[k](hs)


def system_to_json(s: ExampleSystem) -> dict:
    if s.kind == "LOC628":
        return {"kind": s.kind, "hstar": list(s.hstar.sizes), "nbar": list(s.nbar)}
    if s.kind == "DUAL":
        return {"kind": s.kind, "base": system_to_json(s.base), "t_star": [t.to_json() for t in s.t_star]}
    out = {"kind": s.kind, "sizes": list(s.hspec.sizes)}
    if s.kind == "EDRF":
        out["N"] = list(s.N)
    return out


# -- EDRF's regressive function and linking ------------------------------------


def edrf_h(N: int, n: int) -> int:
    """h(k, n) for a level with effective size N."""
    if n >= N:
        return n - 1
    if 8 * n > 7 * N:
        return 2 * n - N
    return 1


def _nor_at_least(t, k) -> bool:
    # k is a plain number; compare exactly when t's norm is linear
    if t.nor_base is None:
        return t.pre_norm >= k
    return t.nor >= k - 1e-9


def link(system: ExampleSystem, t0, t1, k: int | None = None):
    """A common Σ-refinement s of t0 and t1, checked against the kind's guarantee."""
    if t0.system != system or t1.system != system:
        raise InvalidInput("creatures from a different system")
    if system.kind == "LOCTREE":
        if t0.eta != t1.eta:
            raise InvalidInput("tree creatures with different roots")
    elif t0.interval != t1.interval:
        raise InvalidInput("link needs creatures on the same interval")
    for t in (t0, t1):
        if k is None and not t.nor > 1 + 1e-12:
            raise SideConditionError("plain linking needs both norms > 1")
        if k is not None and not _nor_at_least(t, k):
            raise SideConditionError(f"h-linking at {k} needs both norms >= {k}")
    if t0 == t1:
        return t0
    kind = system.kind
    if kind in ("EDRF", "OMITEX", "LOCTREE"):
        E0 = t0.payload if kind != "LOCTREE" else t0.payload[1]
        E1 = t1.payload if kind != "LOCTREE" else t1.payload[1]
        E = E0 | E1
        try:
            s = system.mk_tree(t0.eta, E) if kind == "LOCTREE" else system.mk_creature(t0.m_dn, t0.m_up, E)
        except SideConditionError as exc:
            raise NoLink(f"no common refinement: {exc}") from None
    elif kind in ("BAS628", "BAS628BIS", "LOC628"):
        members = [f for t in (t0, t1) if t.payload is not None for f in t.payload]
        try:
            s = system.mk_creature(t0.m_dn, t0.m_up, members or None)
        except SideConditionError as exc:
            raise NoLink(f"no common refinement: {exc}") from None
    elif kind == "DUAL":
        # s^c ∈ Σ^c(t^c) iff t ∈ Σ(s): intersect the base payloads
        b0, b1 = t0.payload, t1.payload
        base = system.base
        if base.kind == "LOC628":
            common = None
            if b0.payload is not None and b1.payload is not None:
                common = sorted(set(b0.payload.members) & set(b1.payload.members)) or None
        else:
            common = b0.payload & b1.payload
        try:
            sb = base.mk_creature(b0.m_dn, b0.m_up, common)
            s = system.mk_creature(b0.m_dn, b0.m_up, sb)
        except SideConditionError as exc:
            raise NoLink(f"no common refinement: {exc}") from None
    else:
        raise InvalidInput(f"link not available for {kind}")
    if not (system.sigma_member(s, [t0]) and system.sigma_member(s, [t1])):
        raise PropertyFailure("linked creature is not a common Σ-refinement")
    _check_link_guarantee(system, t0, t1, s, k)
    return s


def _check_link_guarantee(system, t0, t1, s, k) -> None:
    kind = system.kind
    if kind == "EDRF":
        N = system.N[s.m_dn]
        level_k = k if k is not None else int(min(t0.pre_norm, t1.pre_norm))
        if s.pre_norm < edrf_h(N, level_k):
            raise PropertyFailure(f"nor[s] = {s.pre_norm} below h = {edrf_h(N, level_k)}")
    elif kind in ("BAS628", "BAS628BIS", "LOC628"):
        if t0.payload is not None and t1.payload is not None:
            bound = min(t0.pre_norm, t1.pre_norm) // 2
            if s.pre_norm < bound:
                raise PropertyFailure(f"norm argument {s.pre_norm} below the union bound {bound}")


def regressive_check(h, ms: Iterable[int], ks: Iterable[int]) -> dict:
    """For every m and every k > 1: 1 <= h(m, k) < k, and h(m, .) is monotone."""
    ks = sorted(ks)
    for m in ms:
        prev = None
        for k in ks:
            if k <= 1:
                continue
            v = h(m, k)
            if not 1 <= v < k:
                return {"ok": False, "witness": {"m": m, "k": k, "h": v, "clause": "1 <= h < k"}}
            if prev is not None and v < prev:
                return {"ok": False, "witness": {"m": m, "k": k, "h": v, "clause": "monotone"}}
            prev = v
    return {"ok": True, "witness": None}


def fast_check(table: Sequence[Sequence[int]]) -> dict:
    """table[k][l] = f(k, l): non-decreasing in l and 2 f(k, l) < f(k+1, l)."""
    for k, row in enumerate(table):
        for l in range(len(row) - 1):
            if row[l] > row[l + 1]:
                return {"ok": False, "witness": {"k": k, "l": l, "clause": "f(k,l) <= f(k,l+1)"}}
        if k + 1 < len(table):
            for l in range(min(len(row), len(table[k + 1]))):
                if not 2 * row[l] < table[k + 1][l]:
                    return {"ok": False, "witness": {"k": k, "l": l, "clause": "2f(k,l) < f(k+1,l)"}}
    return {"ok": True, "witness": None}


def h_closed_window(F: Sequence[Sequence[int]], h, start: int) -> dict:
    """Window audit: every row f has a row f* with f*(n) <= h(n, f(n)) for n >= start.

    A necessary-condition check only; the real property is about the tail.
    """
    for a, f in enumerate(F):
        if not any(all(g[n] <= h(n, f[n]) for n in range(start, min(len(f), len(g)))) for g in F):
            return {"ok": False, "witness": {"row": a}}
    return {"ok": True, "witness": None}


def directed_window(F: Sequence[Sequence[int]], start: int) -> dict:
    """Window audit for ≥*-directedness: any two rows have a row below both from ``start`` on."""
    for a, f in enumerate(F):
        for b, g in enumerate(F):
            if not any(all(x[n] <= min(f[n], g[n]) for n in range(start, len(x))) for x in F):
                return {"ok": False, "witness": {"rows": [a, b]}}
    return {"ok": True, "witness": None}


def edrf_hlinked_audit(N: int) -> dict:
    """Link every pair of one-level EDRF creatures with nor >= 2 and check h."""
    system = ExampleSystem.edrf(HSpec((N,)))
    creatures = []
    for size in range(1, N):
        if 4 * size >= N:
            break
        for E in combinations(range(N), size):
            creatures.append(system.mk_creature(0, 1, E))
    pairs = checks = 0
    for i, t0 in enumerate(creatures):
        for t1 in creatures[i:]:
            top = int(min(t0.pre_norm, t1.pre_norm))
            if top < 2:
                continue
            s = link(system, t0, t1, 2)
            pairs += 1
            for k in range(2, top + 1):
                checks += 1
                if s.pre_norm < edrf_h(N, k):
                    return {"ok": False, "N": N, "witness": {"E0": sorted(t0.payload), "E1": sorted(t1.payload), "k": k}}
    reg = regressive_check(lambda m, k: edrf_h(N, k), [0], range(2, 4 * N))
    return {"ok": reg["ok"], "N": N, "pairs": pairs, "checks": checks, "regressive": reg}


# -- escape (bas628bis) ---------------------------------------------------------


def _require_bis(*ts) -> None:
    for t in ts:
        if t.kind != "BAS628BIS":
            raise SideConditionError("this construction is specific to BAS628BIS")


def escape_value(s: Creature, t: Creature, u: Sequence[int]) -> tuple[int, ...]:
    """v with <u, v> ∈ val[t] ∖ val[s], given nor[s] < nor[t] on the same interval.

    Take the disjoint refinement G of Δ_t attaining HN(Δ_t).  If every member
    of Δ_s extended some g ∈ G then HN(Δ_s) >= HN(Δ_t), so some f ∈ Δ_s
    extends no g; complete f so that each g is missed somewhere.
    """
    _require_bis(s, t)
    if s.system != t.system:
        raise InvalidInput("creatures from different systems")
    if s.interval != t.interval:
        raise SideConditionError("escape needs creatures on the same interval")
    if nor_cmp(s, t) >= 0:
        raise SideConditionError("escape needs nor[s] < nor[t]")
    u = t.hspec.check_sequence(u)
    if len(u) != t.m_dn or not t.in_dom(u):
        raise SideConditionError("u is not in dom(val[t])")
    lo, hi = t.interval
    sizes = t.hspec.sizes
    v = _escape_constructive(s, t, lo, hi, sizes)
    if v is not None:
        v = u + v
        if t.accepts(u, v) and not s.accepts(u, v):
            return v
    for seg in t.hspec.segments(lo, hi):
        v = u + seg
        if t.accepts(u, v) and not s.accepts(u, v):
            return v
    raise PropertyFailure("no escape value exists", {"s": s.to_json(), "t": t.to_json(), "u": list(u)})


def _escape_constructive(s, t, lo, hi, sizes):
    if s.payload is None:
        return None
    G = [] if t.payload is None else list(hall.HN(t.payload)[1])
    for f in s.payload:
        if any(g.issubfn(f) for g in G):
            continue
        seg = {i: v for i, v in f.entries}
        for g in G:
            fd = f.as_dict()
            if any(i in fd and fd[i] != x for i, x in g.entries):
                continue
            i, x = next((i, x) for i, x in g.entries if i not in fd)
            seg[i] = (x + 1) % sizes[i]
        return tuple(seg.get(i, 0) for i in range(lo, hi))
    return None


# -- cut (bas628bis) -------------------------------------------------------------


@dataclass(frozen=True)
class CutResult:
    s0: Creature
    s1: Creature
    route: str
    alpha: bool
    beta: bool
    gamma: bool

    @property
    def ok(self) -> bool:
        return self.alpha and self.beta and self.gamma

    def to_json(self) -> dict:
        return {
            "s0": self.s0.to_json(),
            "s1": self.s1.to_json(),
            "route": self.route,
            "clauses": {"alpha": self.alpha, "beta": self.beta, "gamma": self.gamma},
        }


def _beta(t: Creature, s: Creature) -> bool:
    # nor[s] >= min(nor[t] - 1, m_dn) with nor = log8(pre): compare the arguments
    return s.pre_norm >= min(t.pre_norm / 8, Fraction(8) ** t.m_dn)


def cut_clauses(t: Creature, m: int, s0: Creature, s1: Creature) -> tuple[bool, bool, bool]:
    alpha = (s0.m_dn, s0.m_up, s1.m_dn, s1.m_up) == (t.m_dn, m, m, t.m_up)
    beta = _beta(t, s0) and _beta(t, s1)
    gamma = alpha and t.system.sigma_bot_member([s0, s1], t)
    return alpha, beta, gamma


def cut(t: Creature, m: int) -> CutResult:
    """Split t at level m into two creatures of comparable norm.

    First the direct construction: refine Δ_t to the disjoint family G
    attaining HN, keep the restriction of each g ∈ G to the side holding at
    least half its domain (families D⁰, D¹), and put f↾side into the side's
    family whenever f extends a member of D^side.  When a side then fails the
    hn_plus > 1 requirement, each f is sent to just one admissible side
    instead.  If that fails too, f may go to any side it has a restriction
    on.  Assignments are searched in order and the first one passing all
    three clauses is returned.
    """
    _require_bis(t)
    system = t.system
    if not t.nor > 1 + 1e-12:
        raise SideConditionError("cut needs nor[t] > 1")
    if not t.m_dn < m < t.m_up:
        raise SideConditionError("cut level must lie strictly inside the interval")
    lo, hi = t.interval
    if t.payload is None:
        s0, s1 = system.mk_creature(lo, m, None), system.mk_creature(m, hi, None)
        return CutResult(s0, s1, "empty", *cut_clauses(t, m, s0, s1))
    G = hall.HN(t.payload)[1]
    sides = ((lo, m), (m, hi))
    D = []
    for a, b in sides:
        side = []
        for g in G:
            r = restrict(g, a, b)
            if r is not EMPTY and 2 * len(r) >= len(g):
                side.append(r)
        D.append(side)
    options = [[j for j, (a, b) in enumerate(sides) if any(h.issubfn(f) for h in D[j])] for f in t.payload]
    anywhere = [[j for j, (a, b) in enumerate(sides) if restrict(f, a, b) is not EMPTY] for f in t.payload]

    def attempt(assign, route):
        parts = []
        for j, (a, b) in enumerate(sides):
            members = [restrict(f, a, b) for f, js in zip(t.payload, assign) if j in js]
            try:
                parts.append(system.mk_creature(a, b, members or None))
            except SideConditionError:
                return None
        res = CutResult(parts[0], parts[1], route, *cut_clauses(t, m, *parts))
        return res if res.ok else None

    if all(options):
        res = attempt(options, "direct")
        if res is not None:
            return res
        for choice in product(*options):
            res = attempt([(j,) for j in choice], "one-side")
            if res is not None:
                return res
    # the majority-side recipe can leave a side without hn_plus > 1 (or with
    # nothing to extend); fall back to every side where f has a restriction
    for choice in product(*anywhere):
        res = attempt([(j,) for j in choice], "search")
        if res is not None:
            return res
    raise PropertyFailure("no valid cut exists for this creature", {"t": t.to_json(), "m": m})


# -- dual, tmin, Cohen -------------------------------------------------------------


def dual_creature(t: Creature, t_star: Creature):
    """The complement creature t^c relative to t*, or UNDEFINED."""
    system = ExampleSystem.dual(t.system, [t_star])
    return system.dual_of(t)


def additivity_audit(t_star: Creature, max_subsets: int = 4096) -> dict:
    """Check (2, nor[t*])-additivity of t* by exhaustive search in Σ(t*) (EDRF/OMITEX)."""
    system = t_star.system
    if system.kind not in ("EDRF", "OMITEX"):
        raise InvalidInput("additivity audit implemented for EDRF and OMITEX bases")
    level = t_star.m_dn
    H = system.hspec.sizes[level]
    universe = [a for a in range(H) if a not in t_star.payload and (system.kind != "OMITEX" or a != 0)]
    if 2 ** len(universe) > max_subsets:
        raise InvalidInput("Σ(t*) too large for the exhaustive additivity audit")
    below = []
    for r in range(len(universe) + 1):
        for extra in combinations(universe, r):
            try:
                below.append(system.mk_creature(level, level + 1, t_star.payload | set(extra)))
            except SideConditionError:
                pass
    for a in below:
        for b in below:
            if nor_cmp(a, t_star) > 0 or nor_cmp(b, t_star) > 0:
                continue
            ok = any(
                system.sigma_member(a, [s]) and system.sigma_member(b, [s])
                and s.nor <= max(a.nor, b.nor) + 1 + 1e-9
                for s in below
            )
            if not ok:
                return {"ok": False, "witness": [sorted(a.payload), sorted(b.payload)]}
    return {"ok": True, "checked": len(below)}


def omitex_tmin(system: ExampleSystem, level: int) -> Creature:
    """The creature forcing value 0: E = H(level) ∖ {0}."""
    if system.kind != "OMITEX":
        raise InvalidInput("t_min is defined for OMITEX")
    H = system.hspec.sizes[level]
    t = system.mk_creature(level, level + 1, range(1, H))
    if allowed_segments(t) != ((0,),):
        raise PropertyFailure("t_min does not force a unique value")
    return t


def cohen_set(system: ExampleSystem, level: int) -> frozenset[int]:
    """The set A_n used for the Cohen-producing property."""
    if system.kind in ("EDRF", "LOCTREE"):
        return frozenset(range(system.hspec.sizes[level] // 2))
    if system.kind == "LOC628":
        codes = range(system.hspec.sizes[level])
        return frozenset(c for c in codes if system.decode(level, c)[0] == 0)
    raise InvalidInput(f"no Cohen sets for {system.kind}")


def _creatures_above_one(system: ExampleSystem, level: int, max_members: int):
    k = system.kind
    if k == "EDRF":
        H, N = system.hspec.sizes[level], system.N[level]
        for r in range(1, N):
            if 4 * r >= N:
                break
            for E in combinations(range(H), r):
                yield system.mk_creature(level, level + 1, E)
    elif k == "LOCTREE":
        H = system.hspec.sizes[level]
        eta = (0,) * level
        for r in range(1, H):
            if 4 * r >= H:
                break
            for E in combinations(range(H), r):
                yield system.mk_tree(eta, E)
    elif k == "LOC628":
        lo, hi = system.nbar[level], system.nbar[level + 1]
        yield system.mk_creature(level, level + 1, None)
        # nor > 1 means HN > 8, so every member has at least 8 indices
        fns = []
        for r in range(8, hi - lo + 1):
            for dom in combinations(range(lo, hi), r):
                for vals in product(*(range(system.hstar.sizes[i]) for i in dom)):
                    fns.append(PartialFn(tuple(zip(dom, vals))))
        for size in range(1, max_members + 1):
            for fam in combinations(fns, size):
                d = Family(fam, system.hstar)
                if hall.hn_plus(d) <= 1:
                    continue
                t = system.mk_creature(level, level + 1, d)
                if t.nor > 1 + 1e-12:
                    yield t
    else:
        raise InvalidInput(f"Cohen audit not available for {k}")


def cohen_audit(system: ExampleSystem, level: int, max_members: int = 2) -> dict:
    """Every creature at the level with nor > 1 admits values inside and outside A_n.

    Forgetful kinds ignore u, so one u stands for all; LOCTREE is checked at
    the all-zero root.
    """
    A = cohen_set(system, level)
    checked = 0
    for t in _creatures_above_one(system, level, max_members):
        if not t.nor > 1 + 1e-12:
            continue
        checked += 1
        if isinstance(t, TreeCreature):
            vals = t.values
        else:
            vals = {seg[0] for seg in allowed_segments(t)}
        if not (vals & A and vals - A):
            return {"ok": False, "checked": checked, "witness": t.to_json()}
    return {"ok": True, "checked": checked, "A": sorted(A)}
