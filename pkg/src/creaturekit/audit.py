"""Finite audits of auxiliary tables: norming systems, sourness systems and
membership in the small-tree families used by universality parameters.

The objects being audited are infinite in nature.  Only the stored prefix is
checked, so a passing report is labelled ``prefix-valid`` and never ``valid``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations, product
from typing import Mapping, Sequence

from .core import HSpec
from .creatures import FiniteTreeCandidate
from .errors import InvalidInput

PREFIX_VALID = "prefix-valid"
INVALID = "invalid"


def _rho_key(rho: Sequence[int]) -> str:
    return "".join(str(b) for b in rho)


def _rho_parse(key: str) -> tuple[int, ...]:
    if not isinstance(key, str) or any(c not in "01" for c in key):
        raise InvalidInput(f"binary node key {key!r} must be a string of 0s and 1s")
    return tuple(int(c) for c in key)


def binary_nodes(k: int) -> list[tuple[int, ...]]:
    """All of 2^k in lexicographic order."""
    return list(product((0, 1), repeat=k))


@dataclass
class AuditReport:
    kind: str
    clauses: dict = field(default_factory=dict)  # name -> {"ok": bool, "witness": ...}
    notes: list = field(default_factory=list)

    def record(self, clause: str, witness=None) -> None:
        """Register a clause; the first witness given marks it failed."""
        entry = self.clauses.setdefault(clause, {"ok": True, "witness": None})
        if witness is not None and entry["ok"]:
            entry["ok"] = False
            entry["witness"] = witness

    @property
    def ok(self) -> bool:
        return all(c["ok"] for c in self.clauses.values())

    @property
    def first_failure(self):
        for name, c in self.clauses.items():
            if not c["ok"]:
                return {"clause": name, "witness": c["witness"]}
        return None

    def to_json(self) -> dict:
        return {
            "kind": self.kind,
            "status": PREFIX_VALID if self.ok else INVALID,
            "clauses": self.clauses,
            "first_failure": self.first_failure,
            "notes": self.notes,
        }


# -- 1-norming systems -----------------------------------------------------------


@dataclass(frozen=True)
class NormingSystem1:
    """Prefix ⟨K_ℓ : ℓ < L⟩ with value tables g_ρ : K_{lh ρ} → H for ρ ∈ 2^{<L}."""

    hspec: HSpec
    K: tuple[frozenset, ...]
    g: Mapping  # rho tuple -> {m: value}

    @classmethod
    def from_json(cls, obj) -> "NormingSystem1":
        try:
            hspec = HSpec(tuple(obj["sizes"]))
            K = tuple(frozenset(_ints(x, "K entry")) for x in obj["K"])
            g = {}
            for key, table in obj["g"].items():
                if not isinstance(table, dict):
                    raise InvalidInput(f"g[{key!r}] must map indices to values")
                g[_rho_parse(key)] = {int(m): v for m, v in table.items()}
        except (KeyError, TypeError, AttributeError, ValueError):
            raise InvalidInput('norming1 JSON needs "sizes", "K" (list of index lists) and "g"') from None
        return cls(hspec, K, g)

    def to_json(self) -> dict:
        return {
            "sizes": list(self.hspec.sizes),
            "K": [sorted(k) for k in self.K],
            "g": {_rho_key(r): {str(m): v for m, v in sorted(t.items())} for r, t in sorted(self.g.items())},
        }


def _ints(xs, what: str) -> list[int]:
    if not isinstance(xs, list) or not all(isinstance(x, int) and not isinstance(x, bool) for x in xs):
        raise InvalidInput(f"{what} must be a list of integers")
    return xs


def audit_norming1(ns: NormingSystem1) -> AuditReport:
    rep = AuditReport("norming1")
    for name in ("alpha", "beta", "gamma", "delta"):
        rep.record(name)
    L = len(ns.K)
    # (α) pairwise disjoint index sets with min(K_ℓ) >= ℓ
    for a, b in combinations(range(L), 2):
        common = ns.K[a] & ns.K[b]
        if common:
            rep.record("alpha", {"K": [a, b], "shared": sorted(common)})
    for ell, K in enumerate(ns.K):
        if K and min(K) < ell:
            rep.record("alpha", {"K": ell, "min": min(K), "needs_at_least": ell})
    # (β) one table for every ρ ∈ 2^{<L}, nothing else
    expected = {rho for ell in range(L) for rho in binary_nodes(ell)}
    for rho in sorted(expected - set(ns.g)):
        rep.record("beta", {"rho": _rho_key(rho), "problem": "missing"})
    for rho in sorted(set(ns.g) - expected):
        rep.record("beta", {"rho": _rho_key(rho), "problem": "length beyond the stored K prefix"})
    # (γ) g_ρ ∈ ∏_{m ∈ K_{lh ρ}} H(m)
    for rho in sorted(expected & set(ns.g)):
        table = ns.g[rho]
        if set(table) != ns.K[len(rho)]:
            rep.record("gamma", {"rho": _rho_key(rho), "domain": sorted(table), "expected": sorted(ns.K[len(rho)])})
            continue
        for m, v in sorted(table.items()):
            if m >= ns.hspec.length or not isinstance(v, int) or not 0 <= v < ns.hspec.sizes[m]:
                rep.record("gamma", {"rho": _rho_key(rho), "index": m, "value": v})
    # (δ) no repetitions in ⟨g_ρ(m) : ρ ∈ 2^ℓ⟩
    for ell in range(L):
        for m in sorted(ns.K[ell]):
            seen: dict = {}
            for rho in binary_nodes(ell):
                v = ns.g.get(rho, {}).get(m)
                if v is None:
                    continue
                if v in seen:
                    rep.record("delta", {"index": m, "rhos": [_rho_key(seen[v]), _rho_key(rho)], "value": v})
                    break
                seen[v] = rho
    return rep


# -- 2-norming systems -----------------------------------------------------------


@dataclass(frozen=True)
class NormingSystem2:
    """Finite prefixes of U_{ρ,k}; ``U[rho]`` lists the sets for k = 0, 1, ..."""

    U: Mapping  # rho tuple -> tuple of frozensets

    @classmethod
    def from_json(cls, obj) -> "NormingSystem2":
        if not isinstance(obj, dict) or not isinstance(obj.get("U"), dict):
            raise InvalidInput('norming2 JSON must look like {"U": {"<rho>": [[...], ...]}}')
        U = {}
        for key, sets in obj["U"].items():
            if not isinstance(sets, list):
                raise InvalidInput(f"U[{key!r}] must be a list of index lists")
            U[_rho_parse(key)] = tuple(frozenset(_ints(s, "U entry")) for s in sets)
        return cls(U)

    def to_json(self) -> dict:
        return {"U": {_rho_key(r): [sorted(s) for s in sets] for r, sets in sorted(self.U.items())}}


def audit_norming2(ns: NormingSystem2) -> AuditReport:
    rep = AuditReport("norming2")
    rep.record("alpha")
    rep.record("beta")
    cells = [(rho, k, s) for rho, sets in sorted(ns.U.items()) for k, s in enumerate(sets)]
    for (r0, k0, s0), (r1, k1, s1) in combinations(cells, 2):
        if s0 & s1:
            rep.record("alpha", {"cells": [[_rho_key(r0), k0], [_rho_key(r1), k1]], "shared": sorted(s0 & s1)})
    for rho, k, s in cells:
        if s and min(s) < len(rho):
            rep.record("beta", {"cell": [_rho_key(rho), k], "min": min(s), "needs_at_least": len(rho)})
    return rep


# -- sourness systems ------------------------------------------------------------


@dataclass(frozen=True)
class SournessSystem:
    """Level schedule ``ell`` and set-valued tables g_ρ on [0, ℓ_{lh ρ}) for ρ ∈ 2^{≤K}."""

    hspec: HSpec
    ell: tuple[int, ...]
    g: Mapping  # rho tuple -> tuple of frozensets

    @property
    def depth(self) -> int:
        return len(self.ell) - 1

    @classmethod
    def from_json(cls, obj) -> "SournessSystem":
        try:
            hspec = HSpec(tuple(obj["sizes"]))
            ell = tuple(_ints(obj["ell"], "ell"))
            g = {}
            for key, seq in obj["g"].items():
                if not isinstance(seq, list):
                    raise InvalidInput(f"g[{key!r}] must be a list of value lists")
                g[_rho_parse(key)] = tuple(frozenset(_ints(x, "g entry")) for x in seq)
        except (KeyError, TypeError, AttributeError):
            raise InvalidInput('sourness JSON needs "sizes", "ell" and "g"') from None
        if not ell:
            raise InvalidInput("ell must be non-empty")
        return cls(hspec, ell, g)

    def to_json(self) -> dict:
        return {
            "sizes": list(self.hspec.sizes),
            "ell": list(self.ell),
            "g": {_rho_key(r): [sorted(x) for x in seq] for r, seq in sorted(self.g.items(), key=lambda p: (len(p[0]), p[0]))},
        }


def audit_sourness(ss: SournessSystem) -> AuditReport:
    rep = AuditReport("sourness")
    for name in ("alpha", "beta", "gamma"):
        rep.record(name)
    rep.notes.append("the clause about pure candidates of large norm is not checked")
    ell, H = ss.ell, ss.hspec
    # (α) increasing
    for k in range(len(ell) - 1):
        if ell[k] >= ell[k + 1]:
            rep.record("alpha", {"k": k, "ell": [ell[k], ell[k + 1]]})
    if ell[-1] > H.length:
        rep.record("alpha", {"ell_last": ell[-1], "window": H.length})
    # (β) g_ρ ∈ ∏_{i<ℓ_k} P(H(i)) for ρ ∈ 2^k, coherent along ⊲
    K = ss.depth
    expected = {rho for k in range(K + 1) for rho in binary_nodes(k)}
    for rho in sorted(expected - set(ss.g), key=lambda r: (len(r), r)):
        rep.record("beta", {"rho": _rho_key(rho), "problem": "missing"})
    for rho in sorted(set(ss.g) - expected, key=lambda r: (len(r), r)):
        rep.record("beta", {"rho": _rho_key(rho), "problem": "length beyond the stored schedule"})
    for rho in sorted(expected & set(ss.g), key=lambda r: (len(r), r)):
        seq = ss.g[rho]
        if len(seq) != ell[len(rho)]:
            rep.record("beta", {"rho": _rho_key(rho), "length": len(seq), "expected": ell[len(rho)]})
            continue
        for i, A in enumerate(seq):
            if i >= H.length or any(not 0 <= a < H.sizes[i] for a in A):
                rep.record("beta", {"rho": _rho_key(rho), "index": i, "values": sorted(A)})
                break
        if rho:
            parent = ss.g.get(rho[:-1])
            if parent is not None and seq[: len(parent)] != parent:
                n = next((i for i, (a, b) in enumerate(zip(parent, seq)) if a != b), len(parent))
                rep.record("beta", {"rho": _rho_key(rho), "parent": _rho_key(rho[:-1]), "index": n})
    # (γ) per-level: non-empty, pairwise disjoint, not exhausting H(n)
    for k in range(K):
        rhos = binary_nodes(k + 1)
        for n in range(ell[k], ell[k + 1]):
            vals = [(rho, ss.g[rho][n]) for rho in rhos if rho in ss.g and n < len(ss.g[rho])]
            bad = _gamma_violation(n, vals, H)
            if bad is not None:
                rep.record("gamma", bad)
    return rep


def _gamma_violation(n: int, vals, H: HSpec):
    for rho, A in vals:
        if not A:
            return {"level": n, "rho": _rho_key(rho), "problem": "empty"}
    for (r0, A0), (r1, A1) in combinations(vals, 2):
        if A0 & A1:
            return {"level": n, "rhos": [_rho_key(r0), _rho_key(r1)], "shared": sorted(A0 & A1)}
    union = frozenset().union(*(A for _, A in vals)) if vals else frozenset()
    if n < H.length and len(union) >= H.sizes[n]:
        return {"level": n, "problem": "values exhaust H(n)", "size": H.sizes[n]}
    return None


def ell_schedule(k_max: int) -> list[int]:
    """ℓ_0 = 0, ℓ_{k+1} = ℓ_k + 2^(2^k)."""
    out = [0]
    for k in range(k_max):
        out.append(out[-1] + 2 ** (2**k))
    return out


def gen_edrf_sourness(k_max: int, hspec: HSpec) -> SournessSystem:
    """Singleton-valued system: on block k, g_ρ(n) = {ρ read in binary}.

    Distinct ρ ∈ 2^{k+1} get distinct values, and one more value must stay
    free, so each level of block k needs more than 2^{k+1} letters.
    """
    if k_max < 0:
        raise InvalidInput("k_max must be non-negative")
    ell = ell_schedule(k_max)
    if hspec.length < ell[-1]:
        raise InvalidInput(f"window of length {hspec.length} is shorter than ell_{k_max} = {ell[-1]}")
    for k in range(k_max):
        need = 2 ** (k + 1) + 1
        for n in range(ell[k], ell[k + 1]):
            if hspec.sizes[n] < need:
                raise InvalidInput(f"level {n} has {hspec.sizes[n]} letters; block {k} needs at least {need}")
    g: dict = {(): ()}
    for k in range(k_max):
        width = ell[k + 1] - ell[k]
        for rho in binary_nodes(k + 1):
            code = int(_rho_key(rho), 2)
            g[rho] = g[rho[:-1]] + (frozenset([code]),) * width
    return SournessSystem(hspec, tuple(ell), g)


def heuristic_sourness_window(ss: SournessSystem, k0: int, E: Mapping[int, Sequence[int]]) -> dict:
    """Non-authoritative look at the pure-candidate clause on one finite window.

    ``E[n]`` is the forbidden set of a forgetful single-level creature at
    level n (its pos is H(n) minus E[n]).  For every complete block k >= k0
    this reports how many ρ ∈ 2^{k+1} miss pos on some level of the block,
    and the levels where pos is covered by the g-values.
    """
    ell, H = ss.ell, ss.hspec
    blocks = []
    for k in range(k0, ss.depth):
        rhos = binary_nodes(k + 1)
        short = 0
        covered = []
        for n in range(ell[k], ell[k + 1]):
            if n not in E:
                raise InvalidInput(f"no creature given for level {n}")
        for rho in rhos:
            hits = sum(1 for n in range(ell[k], ell[k + 1]) if ss.g[rho][n] - set(E[n]))
            if hits < ell[k + 1] - ell[k]:
                short += 1
        for n in range(ell[k], ell[k + 1]):
            used = frozenset().union(*(ss.g[rho][n] for rho in rhos))
            if not set(range(H.sizes[n])) - set(E[n]) - used:
                covered.append(n)
        blocks.append({"k": k, "rhos_missing_pos": short, "levels_pos_covered": covered})
    return {"authoritative": False, "k0": k0, "blocks": blocks}


# -- universality-parameter membership --------------------------------------------


def _check_shape(fc: FiniteTreeCandidate, n_dn: int, n_up: int, r: Mapping[int, int]) -> None:
    if not 0 <= n_dn <= n_up <= fc.lev:
        raise InvalidInput(f"need 0 <= n_dn <= n_up <= lev (got {n_dn}, {n_up}, {fc.lev})")
    for i, v in r.items():
        if not n_dn <= i <= n_up:
            raise InvalidInput(f"dom(r) entry {i} outside [{n_dn}, {n_up}]")
        if not isinstance(v, int) or v < 0:
            raise InvalidInput(f"r[{i}] = {v!r} must be a non-negative integer")


def cmz_ratio(fc: FiniteTreeCandidate, hspec: HSpec, n_up: int) -> Fraction:
    return Fraction(len(fc.level(n_up)), hspec.product(0, n_up))


def cmz_bound(r: Mapping[int, int]) -> Fraction:
    return sum((Fraction(1, (i + 1) ** 2) for i in r), Fraction(0))


def g_check(kind: str, fc: FiniteTreeCandidate, hspec: HSpec, n_dn: int, n_up: int, r: Mapping[int, int]) -> bool:
    """Membership of (fc, n_dn, n_up, r) in the small-tree family of ``kind``.

    UM: below every node of length n_dn some node ν of length < n_up has a
    creature with nor < H(lh ν).  CMZ: the density of S at level n_up is at
    most Σ_{i ∈ dom r} 1/(i+1)²; the values r_i are not read.
    """
    r = {int(i): v for i, v in r.items()}
    _check_shape(fc, n_dn, n_up, r)
    kind = kind.upper()
    if kind == "CMZ":
        return cmz_ratio(fc, hspec, n_up) <= cmz_bound(r)
    if kind == "UM":
        cm = fc.creature_map
        thin = [nu for nu in cm if len(nu) < n_up and cm[nu].nor < hspec.sizes[len(nu)]]
        return all(any(nu[:n_dn] == eta and len(nu) >= n_dn for nu in thin) for eta in fc.level(n_dn))
    raise InvalidInput(f"unknown kind {kind!r}; expected UM or CMZ")


def gcheck_from_json(obj) -> tuple[str, FiniteTreeCandidate, HSpec, int, int, dict]:
    try:
        hspec = HSpec(tuple(obj["sizes"]))
        lev = obj["lev"]
        fc = FiniteTreeCandidate.um(hspec, obj["nodes"], lev)
        r = {int(i): v for i, v in (obj.get("r") or {}).items()}
        return obj.get("kind", "CMZ"), fc, hspec, obj["n_dn"], obj["n_up"], r
    except (KeyError, TypeError, AttributeError, ValueError):
        raise InvalidInput('gcheck JSON needs "sizes", "lev", "nodes", "n_dn", "n_up" and optionally "r"') from None
