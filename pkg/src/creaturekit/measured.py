"""Finite measured trees with additive weight functionals.

A tree is a prefix-closed set of sequences of uniform leaf depth D.  Every
internal node averages its children with weights s_k (one per alphabet value
at that level, all in (0, 1), summing to 1); children missing from the tree
contribute 0.  Depth-D nodes are the leaves and count as 1 on any front that
reaches them, which is the finite truncation of the infinite picture.

Arithmetic is exact (``Fraction``) unless the tree was built with float
weights, in which case comparisons use ``TOL``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Iterable, Mapping, Sequence

from .core import HSpec
from .errors import InvalidInput, UnsupportedFunctional

TOL = 1e-9


def _num(x, exact: bool):
    if isinstance(x, (list, tuple)) and len(x) == 2:
        if not all(isinstance(a, int) for a in x) or x[1] == 0:
            raise InvalidInput(f"bad rational weight {x!r}")
        return Fraction(x[0], x[1]) if exact else x[0] / x[1]
    if isinstance(x, Fraction):
        return x if exact else float(x)
    if isinstance(x, (int, float)) and not isinstance(x, bool):
        return Fraction(str(x)) if exact else float(x)
    raise InvalidInput(f"bad weight {x!r}")


@dataclass(frozen=True)
class MeasuredTree:
    hspec: HSpec
    depth: int
    weights: tuple[tuple, ...]  # weights[level][k]
    nodes: frozenset = field(default_factory=frozenset)
    exact: bool = True

    def __post_init__(self):
        object.__setattr__(self, "nodes", frozenset(tuple(x) for x in self.nodes))
        w = tuple(tuple(_num(x, self.exact) for x in row) for row in self.weights)
        object.__setattr__(self, "weights", w)
        if self.depth < 0 or self.depth > self.hspec.length:
            raise InvalidInput("depth must fit inside the HSpec window")
        if len(w) < self.depth:
            raise InvalidInput("need one weight row per internal level")
        for lvl in range(self.depth):
            row = w[lvl]
            if len(row) != self.hspec.sizes[lvl]:
                raise InvalidInput(f"weight row {lvl} must cover the full alphabet")
            if any(not 0 < x < 1 for x in row):
                raise InvalidInput(f"weights at level {lvl} must lie in (0, 1)")
            total = sum(row)
            if (total != 1) if self.exact else abs(total - 1) > 1e-12:
                raise InvalidInput(f"weights at level {lvl} sum to {total}, not 1")
        if self.nodes:
            self._check_shape()

    def _check_shape(self) -> None:
        S = self.nodes
        if () not in S:
            raise InvalidInput("tree must contain the root")
        for eta in S:
            if len(eta) > self.depth:
                raise InvalidInput(f"node {eta} deeper than the leaf depth")
            self.hspec.check_sequence(eta)
            if eta and eta[:-1] not in S:
                raise InvalidInput(f"node {eta} has no parent")
        for eta in S:
            if len(eta) < self.depth and not self.children(eta):
                raise InvalidInput(f"internal node {eta} has no child (leaves must sit at depth {self.depth})")

    @classmethod
    def from_leaves(cls, hspec: HSpec, depth: int, weights, leaves: Iterable[Sequence[int]], exact: bool = True):
        S = set()
        for leaf in leaves:
            leaf = tuple(leaf)
            if len(leaf) != depth:
                raise InvalidInput("every leaf must have length depth")
            for n in range(depth + 1):
                S.add(leaf[:n])
        return cls(hspec, depth, weights, frozenset(S), exact)

    @classmethod
    def full(cls, hspec: HSpec, depth: int, weights, exact: bool = True):
        return cls.from_leaves(hspec, depth, weights, hspec.segments(0, depth), exact)

    @property
    def is_empty(self) -> bool:
        return not self.nodes

    def children(self, eta) -> list[tuple[int, ...]]:
        eta = tuple(eta)
        if len(eta) >= self.depth:
            return []
        return [eta + (k,) for k in range(self.hspec.sizes[len(eta)]) if eta + (k,) in self.nodes]

    def weight(self, child: Sequence[int]):
        return self.weights[len(child) - 1][child[-1]]

    @property
    def leaves(self) -> frozenset:
        return frozenset(x for x in self.nodes if len(x) == self.depth)

    def same_space(self, other: "MeasuredTree") -> bool:
        return (self.hspec, self.depth, self.weights) == (other.hspec, other.depth, other.weights)

    def with_leaves(self, leaves) -> "MeasuredTree":
        return MeasuredTree.from_leaves(self.hspec, self.depth, self.weights, leaves, self.exact)

    # -- JSON --------------------------------------------------------------

    def to_json(self) -> dict:
        def sub(eta):
            return {"children": {str(c[-1]): sub(c) for c in self.children(eta)}}

        def enc(x):
            return [x.numerator, x.denominator] if isinstance(x, Fraction) else x

        return {
            "sizes": list(self.hspec.sizes),
            "depth": self.depth,
            "weights": [[enc(x) for x in row] for row in self.weights[: self.depth]],
            "tree": sub(()) if self.nodes else None,
        }

    @classmethod
    def from_json(cls, obj) -> "MeasuredTree":
        if not isinstance(obj, dict):
            raise InvalidInput("tree JSON must be an object")
        if obj.get("functional", "additive") != "additive" or "ultrafilter" in obj:
            raise UnsupportedFunctional("only additive weight functionals are supported")
        try:
            hspec = HSpec(tuple(obj["sizes"]))
            depth = obj["depth"]
            weights = obj["weights"]
        except (KeyError, TypeError):
            raise InvalidInput("tree JSON needs sizes, depth and weights") from None
        exact = not obj.get("float", False)
        nodes = set()

        def walk(eta, sub):
            if not isinstance(sub, dict):
                raise InvalidInput("subtree must be an object")
            nodes.add(eta)
            for key, child in (sub.get("children") or {}).items():
                try:
                    k = int(key)
                except ValueError:
                    raise InvalidInput(f"child key {key!r} is not an integer") from None
                walk(eta + (k,), child)

        if obj.get("tree") is not None:
            walk((), obj["tree"])
        return cls(hspec, depth, weights, frozenset(nodes), exact)


def _leq(a, b) -> bool:
    if isinstance(a, float) or isinstance(b, float):
        return a <= b + TOL
    return a <= b


# -- fronts and mu ---------------------------------------------------------------


def check_front(tree: MeasuredTree, front: Iterable[Sequence[int]]) -> frozenset:
    A = frozenset(tuple(x) for x in front)
    if not A <= tree.nodes:
        raise InvalidInput("front contains nodes outside the tree")
    for leaf in tree.leaves:
        hits = sum(1 for n in range(len(leaf) + 1) if leaf[:n] in A)
        if hits != 1:
            raise InvalidInput(f"branch to {list(leaf)} meets the front {hits} times")
    for a in A:
        if not any(leaf[: len(a)] == a for leaf in tree.leaves):
            raise InvalidInput(f"front node {list(a)} lies on no branch")
    return A


def mu_front(tree: MeasuredTree, front: Iterable[Sequence[int]], validate: bool = True):
    """Value at the root when front nodes get 1 and the rest average their children."""
    A = check_front(tree, front) if validate else frozenset(front)
    zero = Fraction(0) if tree.exact else 0.0

    def val(eta):
        if eta in A:
            return 1 if tree.exact else 1.0
        return sum((tree.weight(c) * val(c) for c in tree.children(eta)), zero)

    return val(()) if tree.nodes else zero


def mu_table(tree: MeasuredTree) -> dict:
    """The DP g(leaf) = 1, g(eta) = Σ s_k g(eta⌢k), for every node."""
    out: dict = {}
    zero = Fraction(0) if tree.exact else 0.0
    for eta in sorted(tree.nodes, key=len, reverse=True):
        if len(eta) == tree.depth:
            out[eta] = Fraction(1) if tree.exact else 1.0
        else:
            out[eta] = sum((tree.weight(c) * out[c] for c in tree.children(eta)), zero)
    return out


def mu_F(tree: MeasuredTree):
    """Minimum of mu_front over all fronts.

    With additive weights summing to 1, replacing a front node by its
    children never raises the value (Σ s_k g(child) <= Σ s_k = 1), so the
    leaf front is optimal and the minimum is the DP value at the root.
    """
    if tree.is_empty:
        return Fraction(0) if tree.exact else 0.0
    return mu_table(tree)[()]


def is_semi_measure(tree: MeasuredTree, mu: Mapping) -> bool:
    """mu(eta) <= Σ s_k mu(eta⌢k) at every internal node."""
    mu = {tuple(k): v for k, v in mu.items()}
    missing = [eta for eta in tree.nodes if eta not in mu]
    if missing:
        raise InvalidInput(f"mu is missing node {list(min(missing))}")
    for eta in tree.nodes:
        if not (0 <= mu[eta] <= 1):
            raise InvalidInput(f"mu({list(eta)}) = {mu[eta]} outside [0, 1]")
    zero = Fraction(0) if tree.exact else 0.0
    for eta in tree.nodes:
        kids = tree.children(eta)
        if kids and not _leq(mu[eta], sum((tree.weight(c) * mu[c] for c in kids), zero)):
            return False
    return True


def dominated_by_dp(tree: MeasuredTree, mu: Mapping) -> bool:
    dp = mu_table(tree)
    return all(_leq(mu[eta], dp[eta]) for eta in tree.nodes)


# -- set operations --------------------------------------------------------------


def _same(t0: MeasuredTree, t1: MeasuredTree) -> None:
    if not t0.same_space(t1):
        raise InvalidInput("trees differ in alphabet, depth or weights")


def tree_intersect(t0: MeasuredTree, t1: MeasuredTree) -> MeasuredTree:
    """Common branches; nodes without a surviving leaf are pruned."""
    _same(t0, t1)
    return t0.with_leaves(t0.leaves & t1.leaves)


def tree_union(t0: MeasuredTree, t1: MeasuredTree) -> MeasuredTree:
    _same(t0, t1)
    return t0.with_leaves(t0.leaves | t1.leaves)


def union_all(trees: Sequence[MeasuredTree]) -> MeasuredTree:
    out = trees[0]
    for t in trees[1:]:
        out = tree_union(out, t)
    return out


# -- laws --------------------------------------------------------------------------


def check_subadditive(trees: Sequence[MeasuredTree]) -> dict:
    """mu(union) <= Σ mu, with equality when the leaf sets are pairwise disjoint."""
    total = sum(mu_F(t) for t in trees)
    u = mu_F(union_all(trees))
    disjoint = all(not (a.leaves & b.leaves) for a, b in combinations(trees, 2))
    ok = _leq(u, total)
    if disjoint:
        ok = ok and (u == total if trees[0].exact else abs(u - total) <= TOL)
    return {"ok": ok, "union": u, "sum": total, "disjoint": disjoint, "equality": u == total}


def check_bonferroni(trees: Sequence[MeasuredTree]) -> dict:
    """mu(union) >= Σ mu - Σ_{pairs} mu(intersection)."""
    total = sum(mu_F(t) for t in trees)
    pairs = sum(mu_F(tree_intersect(a, b)) for a, b in combinations(trees, 2))
    u = mu_F(union_all(trees))
    return {"ok": _leq(total - pairs, u), "union": u, "sum": total, "pairs": pairs}


def check_compatibility(trees: Sequence[MeasuredTree]) -> dict:
    """If Σ mu > 1 then two of the trees meet in positive measure."""
    total = sum(mu_F(t) for t in trees)
    if not total > 1:
        return {"ok": True, "premise": False, "sum": total, "pair": None}
    for (i, a), (j, b) in combinations(enumerate(trees), 2):
        if mu_F(tree_intersect(a, b)) > 0:
            return {"ok": True, "premise": True, "sum": total, "pair": [i, j]}
    return {"ok": False, "premise": True, "sum": total, "pair": None}
