"""Alphabets, finite partial functions and families of them.

Everything here is immutable and hashable.  Partial functions are stored as
sorted ``(index, value)`` tuples, so structural equality, hashing and the
canonical (lexicographic) ordering all come from plain tuple comparison.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from math import prod
from typing import Iterable, Iterator, Sequence

from .errors import InvalidInput


@dataclass(frozen=True)
class HSpec:
    """Finite window ``[0, length)`` of the alphabet sequence H."""

    sizes: tuple[int, ...]

    def __post_init__(self):
        sizes = tuple(self.sizes)
        object.__setattr__(self, "sizes", sizes)
        if not sizes:
            raise InvalidInput("HSpec needs at least one level")
        for i, s in enumerate(sizes):
            if not isinstance(s, int) or isinstance(s, bool) or s < 2:
                raise InvalidInput(f"alphabet size at level {i} must be an integer >= 2, got {s!r}")

    @property
    def length(self) -> int:
        return len(self.sizes)

    def size(self, n: int) -> int:
        self.check_index(n)
        return self.sizes[n]

    def check_index(self, n: int) -> None:
        if not (0 <= n < self.length):
            raise InvalidInput(f"level index {n} outside window [0, {self.length})")

    def check_interval(self, lo: int, hi: int) -> None:
        if not (0 <= lo <= hi <= self.length):
            raise InvalidInput(f"interval [{lo}, {hi}) outside window [0, {self.length})")

    def product(self, lo: int, hi: int) -> int:
        """Number of sequences over ``H(lo) x ... x H(hi-1)``."""
        self.check_interval(lo, hi)
        return prod(self.sizes[lo:hi])

    def segments(self, lo: int, hi: int) -> Iterator[tuple[int, ...]]:
        """All value tuples for levels ``lo..hi-1`` in lexicographic order."""
        from itertools import product as cartesian

        self.check_interval(lo, hi)
        return cartesian(*(range(s) for s in self.sizes[lo:hi]))

    def check_sequence(self, seq: Sequence[int], start: int = 0) -> tuple[int, ...]:
        seq = tuple(seq)
        self.check_interval(start, start + len(seq))
        for i, x in enumerate(seq, start):
            if not (isinstance(x, int) and 0 <= x < self.sizes[i]):
                raise InvalidInput(f"value {x!r} out of range at level {i}")
        return seq

    def to_json(self) -> dict:
        return {"sizes": list(self.sizes)}

    @classmethod
    def from_json(cls, obj) -> "HSpec":
        if not isinstance(obj, dict) or "sizes" not in obj or not isinstance(obj["sizes"], list):
            raise InvalidInput('HSpec JSON must look like {"sizes": [...]}')
        return cls(tuple(obj["sizes"]))


@dataclass(frozen=True, order=True)
class PartialFn:
    entries: tuple[tuple[int, int], ...]

    def __post_init__(self):
        entries = tuple(sorted((int(i), int(v)) for i, v in self.entries))
        if not entries:
            raise InvalidInput("a partial function must have non-empty domain")
        for (a, _), (b, _) in zip(entries, entries[1:]):
            if a == b:
                raise InvalidInput(f"duplicate index {a} in partial function")
        if entries[0][0] < 0:
            raise InvalidInput("negative level index")
        object.__setattr__(self, "entries", entries)

    @classmethod
    def of(cls, mapping: dict[int, int] | Iterable[tuple[int, int]]) -> "PartialFn":
        items = mapping.items() if isinstance(mapping, dict) else mapping
        return cls(tuple(items))

    @property
    def dom(self) -> frozenset[int]:
        return frozenset(i for i, _ in self.entries)

    def as_dict(self) -> dict[int, int]:
        return dict(self.entries)

    def __len__(self) -> int:
        return len(self.entries)

    def issubfn(self, other: "PartialFn") -> bool:
        """``self ⊆ other`` as sets of pairs."""
        if len(self.entries) > len(other.entries):
            return False
        od = other.as_dict()
        return all(od.get(i, -1) == v for i, v in self.entries)

    def validate(self, hspec: HSpec) -> None:
        for i, v in self.entries:
            hspec.check_index(i)
            if not (0 <= v < hspec.sizes[i]):
                raise InvalidInput(f"value {v} out of range at level {i}")

    def to_json(self) -> dict:
        return {"f": [[i, v] for i, v in self.entries]}

    @classmethod
    def from_json(cls, obj) -> "PartialFn":
        if not isinstance(obj, dict) or not isinstance(obj.get("f"), list):
            raise InvalidInput('PartialFn JSON must look like {"f": [[i, v], ...]}')
        try:
            return cls(tuple((i, v) for i, v in obj["f"]))
        except (TypeError, ValueError) as exc:
            raise InvalidInput(f"bad partial function entries: {exc}") from None

    def __repr__(self) -> str:
        body = ", ".join(f"{i}↦{v}" for i, v in self.entries)
        return "{" + body + "}"


class _Empty:
    """Result of restricting a partial function to an interval it misses."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "EMPTY"

    def __bool__(self):
        return False


EMPTY = _Empty()


def restrict(f: PartialFn, lo: int, hi: int) -> PartialFn | _Empty:
    """Restriction of ``f`` to ``[lo, hi)``; EMPTY when the domains do not meet."""
    if lo > hi:
        raise InvalidInput(f"bad interval [{lo}, {hi})")
    kept = tuple((i, v) for i, v in f.entries if lo <= i < hi)
    if not kept:
        return EMPTY
    if len(kept) == len(f.entries):
        return f
    return PartialFn(kept)


def restrict_to(f: PartialFn, indices: Iterable[int]) -> PartialFn | _Empty:
    keep = set(indices)
    kept = tuple((i, v) for i, v in f.entries if i in keep)
    return PartialFn(kept) if kept else EMPTY


@dataclass(frozen=True)
class Family:
    """Non-empty finite set of partial functions over a fixed HSpec.

    Members are kept sorted in canonical order so iteration is deterministic.
    """

    members: tuple[PartialFn, ...]
    hspec: HSpec

    def __post_init__(self):
        members = tuple(sorted(set(self.members)))
        if not members:
            raise InvalidInput("a family must be non-empty")
        for f in members:
            f.validate(self.hspec)
        object.__setattr__(self, "members", members)

    @classmethod
    def of(cls, hspec: HSpec, members: Iterable) -> "Family":
        fns = [m if isinstance(m, PartialFn) else PartialFn.of(m) for m in members]
        return cls(tuple(fns), hspec)

    def __iter__(self):
        return iter(self.members)

    def __len__(self) -> int:
        return len(self.members)

    def __contains__(self, f) -> bool:
        return f in self.members

    def union(self, other: "Family") -> "Family":
        _same_hspec(self, other)
        return Family(self.members + other.members, self.hspec)

    @property
    def total_dom(self) -> int:
        return sum(len(f) for f in self.members)

    @property
    def support(self) -> frozenset[int]:
        return frozenset().union(*(f.dom for f in self.members))

    def within(self, lo: int, hi: int) -> bool:
        """Membership in K_{lo,hi}: every domain lies inside ``[lo, hi)``."""
        return all(lo <= i < hi for f in self.members for i, _ in f.entries)

    def to_json(self) -> dict:
        return {"delta": [f.to_json() for f in self.members]}

    @classmethod
    def from_json(cls, obj, hspec: HSpec) -> "Family":
        if not isinstance(obj, dict) or not isinstance(obj.get("delta"), list):
            raise InvalidInput('Family JSON must look like {"delta": [...]}')
        return cls(tuple(PartialFn.from_json(f) for f in obj["delta"]), hspec)


def _same_hspec(d0: Family, d1: Family) -> None:
    if d0.hspec != d1.hspec:
        raise InvalidInput("families live over different HSpecs")


def refines(d0: Family, d1: Family) -> bool:
    """``d0 ⪯ d1``: every member of d0 extends some member of d1."""
    _same_hspec(d0, d1)
    return all(any(g.issubfn(f) for g in d1.members) for f in d0.members)


def family_or_none(hspec: HSpec, members: Iterable[PartialFn]) -> Family | None:
    """Family of the given members, or None for the empty collection."""
    members = [m for m in members if m is not EMPTY]
    return Family(tuple(members), hspec) if members else None


def dumps(obj, pretty: bool = False) -> str:
    if pretty:
        return json.dumps(obj, indent=2, sort_keys=False)
    return json.dumps(obj, separators=(",", ":"))
