"""Random preferential attachment trees and their fringe shapes.

The tree starts as a single root.  At each step a new node attaches to an
existing node ``v`` chosen with probability proportional to
``w(d) = chi * d + rho``, where ``d`` is the number of children of ``v``.
In ordered trees the new node becomes the last child of ``v``.

Text form::

    PATREE := "(" PATREE* ")"

so ``"()"`` is a single node and ``"(()())"`` is a root with two leaves.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable

import numpy as np

from .exact import as_rational
from .mst import IsoMode, TreeParseError, _perfect_matching

__all__ = [
    "PaWeights",
    "PaNode",
    "PaTree",
    "parse_pa",
    "canonical_pa",
    "canonical_form_pa",
    "leq_pa",
    "attach",
    "random_pa",
    "pa_fringe_census",
    "pa_degree_census",
    "prob_pa_equals",
    "pa_size_distribution",
    "enumerate_pa_shapes",
    "pa_downset",
    "pa_shape_order",
]


@dataclass(frozen=True)
class PaWeights:
    """Attachment weights ``w(d) = chi * d + rho``.

    Use :meth:`make`, which rescales so that ``chi`` is -1, 0 or 1.  With
    ``chi = -1`` the weight vanishes at ``d = rho``, which must then be an
    integer of at least 2 (the maximal number of children).
    """

    chi: Fraction
    rho: Fraction

    @classmethod
    def make(cls, chi, rho) -> "PaWeights":
        chi, rho = as_rational(chi), as_rational(rho)
        if rho <= 0:
            raise ValueError("rho must be positive")
        if chi:
            scale = abs(chi)
            chi, rho = chi / scale, rho / scale
        if chi < 0:
            if rho.denominator != 1 or rho < 2:
                raise ValueError("with chi < 0, rho / |chi| must be an integer of at least 2")
        return cls(chi, rho)

    def w(self, d: int) -> Fraction:
        return self.chi * d + self.rho

    @property
    def kappa(self) -> Fraction:
        return self.rho / (self.chi + self.rho)

    @property
    def max_children(self) -> int | None:
        return int(self.rho) if self.chi < 0 else None

    def total(self, nodes: int) -> Fraction:
        """Total weight of any tree with ``nodes`` nodes."""
        return nodes * (self.chi + self.rho) - self.chi


@dataclass(frozen=True)
class PaNode:
    children: tuple["PaNode", ...] = ()

    def size(self) -> int:
        return 1 + sum(c.size() for c in self.children)

    def encode(self) -> str:
        return "(" + "".join(c.encode() for c in self.children) + ")"


@dataclass(frozen=True)
class PaTree:
    """A rooted plane tree shape."""

    root: PaNode

    @property
    def size(self) -> int:
        return self.root.size()

    def __str__(self) -> str:
        return self.root.encode()

    def nodes(self) -> Iterable[PaNode]:
        stack = [self.root]
        while stack:
            v = stack.pop()
            yield v
            stack.extend(reversed(v.children))


def parse_pa(text: str) -> PaTree:
    """Parse the parenthesised form, e.g. ``"(()())"``."""
    s = "".join(text.split())
    pos = 0

    def node() -> PaNode:
        nonlocal pos
        if pos >= len(s) or s[pos] != "(":
            raise TreeParseError("expected '('", s, pos)
        pos += 1
        kids = []
        while pos < len(s) and s[pos] == "(":
            kids.append(node())
        if pos >= len(s) or s[pos] != ")":
            raise TreeParseError("expected '(' or ')'", s, pos)
        pos += 1
        return PaNode(tuple(kids))

    root = node()
    if pos != len(s):
        raise TreeParseError("trailing characters", s, pos)
    return PaTree(root)


def _canon(v: PaNode, unordered: bool) -> str:
    kids = [_canon(c, unordered) for c in v.children]
    if unordered:
        kids.sort(reverse=True)
    return "(" + "".join(kids) + ")"


def canonical_pa(t: PaTree | PaNode, mode=IsoMode.ORDERED) -> str:
    node = t.root if isinstance(t, PaTree) else t
    return _canon(node, IsoMode.coerce(mode) is IsoMode.UNORDERED)


def canonical_form_pa(t: PaTree, mode=IsoMode.ORDERED) -> PaTree:
    if IsoMode.coerce(mode) is IsoMode.ORDERED:
        return t
    return parse_pa(canonical_pa(t, mode))


def _leq(a: PaNode, b: PaNode, unordered: bool) -> bool:
    if len(a.children) > len(b.children):
        return False
    if not unordered:
        return all(_leq(x, y, False) for x, y in zip(a.children, b.children))
    return _perfect_matching(a.children, b.children, lambda x, y: _leq(x, y, True))


def leq_pa(t: PaTree, u: PaTree, mode=IsoMode.ORDERED) -> bool:
    """True when ``u`` can grow from ``t`` by attachments.

    Ordered trees only gain children at the end, so ``t``'s children must
    match a prefix of ``u``'s.
    """
    return _leq(t.root, u.root, IsoMode.coerce(mode) is IsoMode.UNORDERED)


def attach(t: PaTree, index: int) -> PaTree:
    """Append a new last child to the node with preorder index ``index``."""
    counter = index

    def go(v: PaNode) -> PaNode | None:
        nonlocal counter
        if counter == 0:
            counter = -1
            return PaNode(v.children + (PaNode(),))
        counter -= 1
        for i, c in enumerate(v.children):
            new = go(c)
            if new is not None:
                return PaNode(v.children[:i] + (new,) + v.children[i + 1 :])
        return None

    out = go(t.root)
    if out is None:
        raise IndexError(f"node {index} out of range")
    return PaTree(out)


def random_pa(w: PaWeights, n: int, rng: np.random.Generator) -> PaTree:
    """Grow a tree with ``n`` nodes."""
    from ._kernels import grow_pa

    parent = grow_pa(n, float(w.chi), float(w.rho), rng.random(n))
    return _tree_from_parents(parent)


def _tree_from_parents(parent) -> PaTree:
    n = len(parent)
    kids: list[list[int]] = [[] for _ in range(n)]
    for t in range(1, n):
        kids[parent[t]].append(t)
    built: list[PaNode | None] = [None] * n
    for v in range(n - 1, -1, -1):
        built[v] = PaNode(tuple(built[c] for c in kids[v]))
    return PaTree(built[0])


def _postorder(root: PaNode, fn):
    out: dict[int, object] = {}
    stack = [(root, False)]
    while stack:
        v, expanded = stack.pop()
        if expanded or not v.children:
            out[id(v)] = fn(v, [out[id(c)] for c in v.children])
        else:
            stack.append((v, True))
            stack.extend((c, False) for c in v.children)
    return out[id(root)]


def pa_fringe_census(t: PaTree, targets: Iterable[PaTree | str], mode=IsoMode.ORDERED) -> Counter:
    """Number of nodes whose fringe subtree is isomorphic to each target."""
    unordered = IsoMode.coerce(mode) is IsoMode.UNORDERED
    keys = [x if isinstance(x, str) else canonical_pa(x, mode) for x in targets]
    wanted = set(keys)
    maxlen = max((len(k) for k in wanted), default=0)
    found: Counter = Counter()

    def fn(v, kids):
        if any(k is None for k in kids):
            return None
        if unordered:
            kids = sorted(kids, reverse=True)
        s = "(" + "".join(kids) + ")"
        if len(s) > maxlen:
            return None
        if s in wanted:
            found[s] += 1
        return s

    _postorder(t.root, fn)
    return Counter({k: found[k] for k in keys})


def pa_degree_census(t: PaTree, kmax: int) -> list[int]:
    """Entry ``k`` counts nodes with ``k`` children; the last entry lumps ``> kmax``."""
    out = [0] * (kmax + 2)
    for v in t.nodes():
        out[min(len(v.children), kmax + 1)] += 1
    return out


def _nodes_preorder(v: PaNode) -> list[PaNode]:
    out = []
    stack = [v]
    while stack:
        x = stack.pop()
        out.append(x)
        stack.extend(reversed(x.children))
    return out


@lru_cache(maxsize=None)
def pa_size_distribution(w: PaWeights, k: int, mode=IsoMode.ORDERED) -> dict[str, Fraction]:
    """Exact law of the shape of a random tree with ``k`` nodes.

    Forward recursion over attachment steps, merging histories that reach
    the same canonical shape.
    """
    mode = IsoMode.coerce(mode)
    if k < 1:
        raise ValueError("k must be at least 1")
    if k == 1:
        return {"()": Fraction(1)}
    prev = pa_size_distribution(w, k - 1, mode)
    total = w.total(k - 1)
    out: dict[str, Fraction] = {}
    for enc, p in prev.items():
        t = parse_pa(enc)
        for i, v in enumerate(_nodes_preorder(t.root)):
            wt = w.w(len(v.children))
            if wt <= 0:
                continue
            key = canonical_pa(attach(t, i), mode)
            out[key] = out.get(key, Fraction(0)) + p * wt / total
    return out


def prob_pa_equals(shape: PaTree, w: PaWeights, mode=IsoMode.ORDERED) -> Fraction:
    """Probability that a random tree with ``shape.size`` nodes has this shape."""
    mode = IsoMode.coerce(mode)
    return pa_size_distribution(w, shape.size, mode).get(canonical_pa(shape, mode), Fraction(0))


@lru_cache(maxsize=None)
def _shapes(k: int, unordered: bool) -> tuple[str, ...]:
    if k == 1:
        return ("()",)
    out = set()
    for enc in _shapes(k - 1, unordered):
        t = parse_pa(enc)
        for i in range(k - 1):
            out.add(_canon(attach(t, i).root, unordered))
    return tuple(sorted(out))


def enumerate_pa_shapes(k: int, mode=IsoMode.ORDERED) -> list[PaTree]:
    """All shapes with exactly ``k`` nodes, one canonical representative each."""
    unordered = IsoMode.coerce(mode) is IsoMode.UNORDERED
    return [parse_pa(s) for s in _shapes(k, unordered)]


def _removals(v: PaNode, unordered: bool) -> Iterable[PaNode]:
    """Trees one node smaller that grow into ``v`` in one attachment."""
    kids = v.children
    for i, c in enumerate(kids):
        if not c.children and (unordered or i == len(kids) - 1):
            yield PaNode(kids[:i] + kids[i + 1 :])
        for smaller in _removals(c, unordered):
            yield PaNode(kids[:i] + (smaller,) + kids[i + 1 :])


def pa_downset(targets: Iterable[PaTree], mode=IsoMode.ORDERED, w: PaWeights | None = None) -> list[PaTree]:
    """Smallest down-closed set containing the targets, in :func:`pa_shape_order`.

    With a degree cap (``chi < 0``) targets containing a node with more than
    ``rho`` children are impossible and rejected.
    """
    mode = IsoMode.coerce(mode)
    unordered = mode is IsoMode.UNORDERED
    cap = w.max_children if w is not None else None
    found: dict[str, PaNode] = {}
    frontier = [t.root for t in targets] + [PaNode()]
    for v in frontier:
        if cap is not None and any(len(x.children) > cap for x in _nodes_preorder(v)):
            raise ValueError(f"target has a node with more than {cap} children")
    while frontier:
        v = frontier.pop()
        key = _canon(v, unordered)
        if key in found:
            continue
        found[key] = v
        frontier.extend(_removals(v, unordered))
    return pa_shape_order([parse_pa(k) for k in found], mode)


def _non_leaves(v: PaNode) -> int:
    return (1 if v.children else 0) + sum(_non_leaves(c) for c in v.children)


def pa_shape_order(trees: Iterable[PaTree], mode=IsoMode.ORDERED) -> list[PaTree]:
    """Sort by size, then more non-leaf nodes first, then canonical string."""
    trees = sorted(trees, key=lambda t: canonical_pa(t, mode))
    trees.sort(key=lambda t: (t.size, -_non_leaves(t.root)))
    return trees
