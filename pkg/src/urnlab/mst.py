"""Random m-ary search trees and their fringe shapes.

A node holds up to ``m - 1`` keys.  A node with fewer keys has no children;
once it holds ``m - 1`` keys it is *full* and has exactly ``m`` children,
each possibly an external node (a node with zero keys).  Keys enter through
*gaps*: a node with ``i < m - 1`` keys owns ``i + 1`` gaps, and a random tree
with ``n`` keys has ``n + 1`` gaps, each equally likely to receive the next
key.

Trees are immutable.  Their text form follows the grammar::

    TREE := KEYS | KEYS "(" TREE ("," TREE)* ")"

so ``2(2(0,0,0),0,0)`` is a 3-ary tree with four keys.
"""

from __future__ import annotations

import enum
import itertools
import math
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "IsoMode",
    "MstNode",
    "MstTree",
    "TreeParseError",
    "parse_mst",
    "insert_key",
    "random_mst",
    "canonical",
    "canonical_form",
    "leq",
    "fringe_census",
    "protected_count",
    "degree_census",
    "prob_mst_equals",
    "enumerate_mst_shapes",
    "mst_downset",
    "mst_shape_order",
]


class IsoMode(enum.Enum):
    """Whether children are compared positionally or as a multiset."""

    ORDERED = "ordered"
    UNORDERED = "unordered"

    @classmethod
    def coerce(cls, mode) -> "IsoMode":
        if isinstance(mode, cls):
            return mode
        return cls(str(mode).lower())


class TreeParseError(ValueError):
    """Malformed tree text; ``pos`` is the 0-based offset of the problem."""

    def __init__(self, message: str, text: str, pos: int):
        super().__init__(f"{message} at position {pos}: {text[:pos]}<HERE>{text[pos:]}")
        self.text = text
        self.pos = pos


@dataclass(frozen=True)
class MstNode:
    keys: int
    children: tuple["MstNode", ...] = ()

    @property
    def is_external(self) -> bool:
        return self.keys == 0

    @property
    def is_full(self) -> bool:
        return bool(self.children)

    def total_keys(self) -> int:
        return self.keys + sum(c.total_keys() for c in self.children)

    def encode(self) -> str:
        if not self.children:
            return str(self.keys)
        return f"{self.keys}(" + ",".join(c.encode() for c in self.children) + ")"


@dataclass(frozen=True)
class MstTree:
    """An m-ary search tree shape.

    Parameters
    ----------
    m : int
        Branching factor, at least 2.
    root : MstNode
    """

    m: int
    root: MstNode

    def __post_init__(self):
        if self.m < 2:
            raise ValueError("m must be at least 2")
        stack = [self.root]
        while stack:
            v = stack.pop()
            if v.keys < 0 or v.keys > self.m - 1:
                raise ValueError(f"node with {v.keys} keys in an m={self.m} tree")
            if v.keys == self.m - 1:
                if len(v.children) != self.m:
                    raise ValueError(f"full node needs {self.m} children, got {len(v.children)}")
            elif v.children:
                raise ValueError("only full nodes may have children")
            stack.extend(v.children)

    @classmethod
    def empty(cls, m: int) -> "MstTree":
        return cls(m, MstNode(0))

    @property
    def keys(self) -> int:
        return self.root.total_keys()

    @property
    def gaps(self) -> int:
        return self.keys + 1

    def __str__(self) -> str:
        return self.root.encode()

    def subtrees(self) -> Iterable[MstNode]:
        """All nodes in preorder, externals included."""
        stack = [self.root]
        while stack:
            v = stack.pop()
            yield v
            stack.extend(reversed(v.children))


def parse_mst(text: str, m: int | None = None) -> MstTree:
    """Parse the text form of a tree.

    Parameters
    ----------
    text : str
    m : int, optional
        Branching factor.  When omitted it is read off the first full node
        (number of children), which must then exist.

    Raises
    ------
    TreeParseError
        With the offending position (in the text with whitespace removed).
    """
    s = "".join(text.split())
    pos = 0

    def node() -> tuple[MstNode, int]:
        nonlocal pos
        start = pos
        while pos < len(s) and s[pos].isdigit():
            pos += 1
        if pos == start:
            raise TreeParseError("expected a key count", s, pos)
        keys = int(s[start:pos])
        if pos < len(s) and s[pos] == "(":
            open_at = pos
            pos += 1
            kids = [node()[0]]
            while pos < len(s) and s[pos] == ",":
                pos += 1
                kids.append(node()[0])
            if pos >= len(s) or s[pos] != ")":
                raise TreeParseError("expected ',' or ')'", s, pos)
            pos += 1
            return MstNode(keys, tuple(kids)), open_at
        return MstNode(keys), start

    root, _ = node()
    if pos != len(s):
        raise TreeParseError("trailing characters", s, pos)
    if m is None:
        full = next((v for v in _walk(root) if v.children), None)
        if full is None:
            raise TreeParseError("cannot infer m from a tree without full nodes", s, 0)
        m = len(full.children)
    # validate with positions: re-walk the text alongside the tree
    _validate_text(s, m)
    return MstTree(m, root)


def _walk(v: MstNode):
    yield v
    for c in v.children:
        yield from _walk(c)


def _validate_text(s: str, m: int) -> None:
    pos = 0

    def node():
        nonlocal pos
        start = pos
        while pos < len(s) and s[pos].isdigit():
            pos += 1
        keys = int(s[start:pos])
        if keys > m - 1:
            raise TreeParseError(f"node holds {keys} keys but m - 1 = {m - 1}", s, start)
        nkids = 0
        if pos < len(s) and s[pos] == "(":
            pos += 1
            node()
            nkids = 1
            while s[pos] == ",":
                pos += 1
                node()
                nkids += 1
            pos += 1
        if keys == m - 1 and nkids != m:
            raise TreeParseError(f"full node must have exactly {m} children, found {nkids}", s, start)
        if keys < m - 1 and nkids:
            raise TreeParseError(f"node with {keys} < m - 1 keys cannot have children", s, start)

    node()


def insert_key(t: MstTree, gap: int) -> MstTree:
    """Insert a key into gap ``gap`` (0-based, left to right over non-full nodes)."""
    if not 0 <= gap < t.gaps:
        raise IndexError(f"gap {gap} out of range for a tree with {t.gaps} gaps")
    m = t.m
    remaining = gap

    def go(v: MstNode) -> MstNode | None:
        nonlocal remaining
        if not v.children:
            if remaining <= v.keys:
                k = v.keys + 1
                if k == m - 1:
                    return MstNode(k, tuple(MstNode(0) for _ in range(m)))
                return MstNode(k)
            remaining -= v.keys + 1
            return None
        for i, c in enumerate(v.children):
            new = go(c)
            if new is not None:
                return MstNode(v.keys, v.children[:i] + (new,) + v.children[i + 1 :])
        return None

    return MstTree(m, go(t.root))


def random_mst(m: int, n: int, rng: np.random.Generator) -> MstTree:
    """Insert ``n`` keys into an empty tree, choosing gaps uniformly."""
    from ._kernels import grow_mst

    u = rng.random(n)
    keys, first_child = grow_mst(m, n, u)
    return _tree_from_arrays(m, keys, first_child)


def _tree_from_arrays(m: int, keys, first_child) -> MstTree:
    n_nodes = len(keys)
    built: list[MstNode | None] = [None] * n_nodes
    # children always have larger indices than their parent
    for v in range(n_nodes - 1, -1, -1):
        fc = first_child[v]
        if fc < 0:
            built[v] = MstNode(int(keys[v]))
        else:
            built[v] = MstNode(int(keys[v]), tuple(built[fc + j] for j in range(m)))
    return MstTree(m, built[0])


def _canon_node(v: MstNode, mode: IsoMode) -> str:
    if not v.children:
        return str(v.keys)
    kids = [_canon_node(c, mode) for c in v.children]
    if mode is IsoMode.UNORDERED:
        kids.sort(reverse=True)
    return f"{v.keys}(" + ",".join(kids) + ")"


def canonical(t: MstTree | MstNode, mode=IsoMode.ORDERED) -> str:
    """Canonical string; equal exactly for isomorphic shapes under ``mode``.

    In unordered mode children are sorted in descending byte order.
    """
    mode = IsoMode.coerce(mode)
    node = t.root if isinstance(t, MstTree) else t
    return _canon_node(node, mode)


def _canonical_node(v: MstNode) -> MstNode:
    if not v.children:
        return v
    kids = sorted((_canonical_node(c) for c in v.children), key=lambda c: c.encode(), reverse=True)
    return MstNode(v.keys, tuple(kids))


def canonical_form(t: MstTree, mode=IsoMode.ORDERED) -> MstTree:
    """The representative whose text form equals ``canonical(t, mode)``."""
    if IsoMode.coerce(mode) is IsoMode.ORDERED:
        return t
    return MstTree(t.m, _canonical_node(t.root))


def _leq_node(a: MstNode, b: MstNode, mode: IsoMode) -> bool:
    if a.keys > b.keys:
        return False
    if not a.children:
        return True
    if not b.children:
        return False
    if mode is IsoMode.ORDERED:
        return all(_leq_node(x, y, mode) for x, y in zip(a.children, b.children))
    return _perfect_matching(a.children, b.children, lambda x, y: _leq_node(x, y, mode))


def _perfect_matching(left: Sequence, right: Sequence, ok) -> bool:
    """Does every element of ``left`` match a distinct element of ``right``?"""
    adj = [[j for j, y in enumerate(right) if ok(x, y)] for x in left]
    owner: dict[int, int] = {}

    def augment(i: int, seen: set) -> bool:
        for j in adj[i]:
            if j in seen:
                continue
            seen.add(j)
            if j not in owner or augment(owner[j], seen):
                owner[j] = i
                return True
        return False

    return all(augment(i, set()) for i in range(len(left)))


def leq(t: MstTree, u: MstTree, mode=IsoMode.ORDERED) -> bool:
    """True when some insertion sequence grows ``t`` into ``u``."""
    if t.m != u.m:
        raise ValueError("trees with different m")
    return _leq_node(t.root, u.root, IsoMode.coerce(mode))


def fringe_census(t: MstTree, targets: Iterable[MstTree | str], mode=IsoMode.ORDERED) -> Counter:
    """Number of nodes whose subtree is isomorphic to each target.

    Returns a Counter keyed by the targets' canonical strings; external
    nodes count as subtrees too.
    """
    mode = IsoMode.coerce(mode)
    keys = [x if isinstance(x, str) else canonical(x, mode) for x in targets]
    wanted = set(keys)
    found: Counter = Counter()
    maxlen = max((len(k) for k in wanted), default=0)

    def leaf_fn(v):
        s = str(v.keys)
        if s in wanted:
            found[s] += 1
        return s

    def inner_fn(v, kids):
        # None marks a subtree already too large to match anything
        if any(k is None for k in kids):
            return None
        if mode is IsoMode.UNORDERED:
            kids = sorted(kids, reverse=True)
        s = f"{v.keys}(" + ",".join(kids) + ")"
        if len(s) > maxlen:
            return None
        if s in wanted:
            found[s] += 1
        return s

    _postorder_values(t.root, leaf_fn, inner_fn)
    return Counter({k: found[k] for k in keys})


def _postorder_values(root: MstNode, leaf_fn, inner_fn):
    """Evaluate ``inner_fn(node, child_values)`` bottom-up without recursion."""
    out: dict[int, object] = {}
    stack = [(root, False)]
    while stack:
        v, expanded = stack.pop()
        if not v.children:
            out[id(v)] = leaf_fn(v)
        elif expanded:
            out[id(v)] = inner_fn(v, [out[id(c)] for c in v.children])
        else:
            stack.append((v, True))
            stack.extend((c, False) for c in v.children)
    return out


def protected_count(t: MstTree) -> int:
    """Nodes that are neither leaves nor parents of a leaf.

    A leaf is a node holding keys whose children are all external.  External
    nodes are never counted and are not leaves.
    """
    total = 0

    def leaf_fn(v):
        # (is_internal, is_leaf)
        return (v.keys > 0, v.keys > 0)

    def inner_fn(v, vals):
        nonlocal total
        internal_kids = [lf for internal, lf in vals if internal]
        is_leaf = not internal_kids
        if not is_leaf and not any(internal_kids):
            total += 1
        return (True, is_leaf)

    _postorder_values(t.root, leaf_fn, inner_fn)
    return total


def degree_census(t: MstTree) -> list[int]:
    """Histogram over key-holding nodes of the number of key-holding children.

    Entry ``k`` (``0 <= k <= m``) counts nodes with ``k`` non-external children.
    """
    out = [0] * (t.m + 1)
    for v in t.subtrees():
        if v.keys:
            out[sum(1 for c in v.children if c.keys)] += 1
    return out


@lru_cache(maxsize=None)
def _prob_node(node: MstNode, m: int, unordered: bool) -> Fraction:
    k = node.total_keys()
    if not node.children:
        return Fraction(1)
    p = Fraction(1, math.comb(k, m - 1))
    for c in node.children:
        p *= _prob_node(c, m, unordered)
    if unordered:
        classes = Counter(_canon_node(c, IsoMode.UNORDERED) for c in node.children)
        arrangements = math.factorial(m)
        for cnt in classes.values():
            arrangements //= math.factorial(cnt)
        p *= arrangements
    return p


def prob_mst_equals(shape: MstTree, mode=IsoMode.ORDERED) -> Fraction:
    """Probability that a random tree with ``shape.keys`` keys has this shape.

    Uses ``P(T) = prod over full nodes v of 1 / C(k_v, m - 1)``, with ``k_v``
    the keys in the subtree at ``v``; in unordered mode each full node also
    contributes its number of distinct child arrangements.
    """
    mode = IsoMode.coerce(mode)
    unordered = mode is IsoMode.UNORDERED
    return _prob_node(shape.root, shape.m, unordered)


@lru_cache(maxsize=None)
def _ordered_shapes(m: int, k: int) -> tuple[MstNode, ...]:
    if k < m - 1:
        return (MstNode(k),)
    out = []
    rest = k - (m - 1)
    for comp in _compositions(rest, m):
        for kids in itertools.product(*(_ordered_shapes(m, c) for c in comp)):
            out.append(MstNode(m - 1, tuple(kids)))
    return tuple(out)


def _compositions(total: int, parts: int):
    if parts == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def enumerate_mst_shapes(m: int, k: int, mode=IsoMode.ORDERED) -> list[MstTree]:
    """All shapes with exactly ``k`` keys, one representative per class."""
    mode = IsoMode.coerce(mode)
    seen = {}
    for node in _ordered_shapes(m, k):
        key = _canon_node(node, mode)
        if key not in seen:
            seen[key] = canonical_form(MstTree(m, node), mode)
    return [seen[key] for key in sorted(seen)]


def _shrinks(node: MstNode, m: int) -> Iterable[MstNode]:
    """Shapes one key smaller that grow into ``node`` in one step."""
    if not node.children:
        if node.keys >= 1:
            yield MstNode(node.keys - 1)
        return
    if all(c.keys == 0 for c in node.children):
        yield MstNode(m - 2)
    for i, c in enumerate(node.children):
        for smaller in _shrinks(c, m):
            yield MstNode(node.keys, node.children[:i] + (smaller,) + node.children[i + 1 :])


def mst_downset(targets: Iterable[MstTree], mode=IsoMode.ORDERED) -> list[MstTree]:
    """Smallest down-closed set containing the targets and every single node.

    Returns one representative per class, in :func:`mst_shape_order`.
    """
    mode = IsoMode.coerce(mode)
    targets = list(targets)
    if not targets:
        raise ValueError("need at least one target")
    m = targets[0].m
    found: dict[str, MstNode] = {}
    frontier = [t.root for t in targets] + [MstNode(i) for i in range(m - 1)]
    while frontier:
        v = frontier.pop()
        key = _canon_node(v, mode)
        if key in found:
            continue
        found[key] = v
        frontier.extend(_shrinks(v, m))
    trees = [canonical_form(MstTree(m, v), mode) for v in found.values()]
    return mst_shape_order(trees, mode)


def _count_internal(node: MstNode) -> int:
    return (1 if node.keys else 0) + sum(_count_internal(c) for c in node.children)


def mst_shape_order(trees: Iterable[MstTree], mode=IsoMode.ORDERED) -> list[MstTree]:
    """Sort by key count, then more key-holding nodes first, then canonical string descending."""
    mode = IsoMode.coerce(mode)
    trees = list(trees)
    trees.sort(key=lambda t: canonical(t, mode), reverse=True)
    trees.sort(key=lambda t: (t.keys, -_count_internal(t.root)))
    return trees
