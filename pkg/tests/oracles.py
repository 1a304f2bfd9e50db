"""Independent reference computations used by the tests.

Nothing here calls the package's tree growth or probability code: search
trees are built from actual key values, and attachment histories are
enumerated over explicit parent arrays.
"""

from __future__ import annotations

import itertools
import math
from collections import Counter
from fractions import Fraction


def search_tree_shape(m: int, keys) -> str:
    """Shape string of the m-ary search tree built by inserting ``keys`` in order.

    Ordered text form: a node with ``i < m - 1`` keys is ``i``; a full node is
    ``m-1(c1,...,cm)``; empty positions are ``0``.
    """
    root = None

    def insert(node, key):
        if node is None:
            return {"keys": [key], "kids": [None] * m if m == 2 else None}
        if node["kids"] is None:
            node["keys"].append(key)
            node["keys"].sort()
            if len(node["keys"]) == m - 1:
                node["kids"] = [None] * m
            return node
        pos = sum(1 for k in node["keys"] if k < key)
        node["kids"][pos] = insert(node["kids"][pos], key)
        return node

    def encode(node):
        if node is None:
            return "0"
        if node["kids"] is None:
            return str(len(node["keys"]))
        return f"{m - 1}(" + ",".join(encode(c) for c in node["kids"]) + ")"

    for k in keys:
        root = insert(root, k)
    return encode(root)


def unordered_key(s: str) -> str:
    """Sort children recursively (descending) in the text form."""

    def parse(i):
        j = i
        while j < len(s) and s[j].isdigit():
            j += 1
        lab = s[i:j]
        if j < len(s) and s[j] == "(":
            kids = []
            j += 1
            while True:
                child, j = parse(j)
                kids.append(child)
                if s[j] == ",":
                    j += 1
                    continue
                j += 1
                break
            kids.sort(reverse=True)
            return lab + "(" + ",".join(kids) + ")", j
        return lab, j

    out, _ = parse(0)
    return out


def permutation_shape_law(m: int, k: int, unordered: bool = False) -> dict[str, Fraction]:
    """Exact shape law of the search tree on a uniform permutation of ``k`` keys."""
    counts: Counter = Counter()
    for perm in itertools.permutations(range(k)):
        s = search_tree_shape(m, perm)
        counts[unordered_key(s) if unordered else s] += 1
    total = math.factorial(k)
    return {s: Fraction(c, total) for s, c in counts.items()}


def pa_history_law(chi: Fraction, rho: Fraction, k: int, unordered: bool = False) -> dict[str, Fraction]:
    """Shape law of a ``k``-node attachment tree by enumerating every history.

    Children are stored in attachment order; the shape string is ``(...)``
    with children in that order (sorted descending when unordered).
    """
    out: dict[str, Fraction] = {}

    def encode(parent, v):
        kids = [encode(parent, c) for c in range(len(parent)) if parent[c] == v]
        if unordered:
            kids.sort(reverse=True)
        return "(" + "".join(kids) + ")"

    def grow(parent, p):
        n = len(parent)
        if n == k:
            s = encode(parent, 0)
            out[s] = out.get(s, Fraction(0)) + p
            return
        deg = [sum(1 for c in parent if c == v) for v in range(n)]
        weights = [chi * d + rho for d in deg]
        total = sum(weights)
        for v in range(n):
            if weights[v] > 0:
                grow(parent + [v], p * weights[v] / total)

    grow([-1], Fraction(1))
    return out


def protected_bruteforce(m: int, keys) -> int:
    """Protected nodes of the search tree on ``keys``: not a leaf and no leaf child."""
    root = None

    def insert(node, key):
        if node is None:
            return {"keys": [key], "kids": [None] * m if m == 2 else None}
        if node["kids"] is None:
            node["keys"].append(key)
            if len(node["keys"]) == m - 1:
                node["kids"] = [None] * m
            return node
        pos = sum(1 for k in node["keys"] if k < key)
        node["kids"][pos] = insert(node["kids"][pos], key)
        return node

    for k in keys:
        root = insert(root, k)

    def children(node):
        return [c for c in (node["kids"] or []) if c is not None]

    def is_leaf(node):
        return not children(node)

    total = 0
    stack = [root] if root else []
    while stack:
        v = stack.pop()
        kids = children(v)
        if kids and not any(is_leaf(c) for c in kids):
            total += 1
        stack.extend(kids)
    return total


def attachment_sigma_closed_form(kappa: Fraction) -> dict[tuple[int, int], Fraction]:
    """Closed-form covariances of the five-type attachment urn, as functions of kappa.

    Indices are 1-based; types are the single node, the 2-path, the
    3-path, the cherry and the star.
    """
    k = Fraction(kappa)
    common = (k + 2) ** 2 * (k + 3) ** 2 * (2 * k + 1) * (2 * k + 3) * (2 * k + 5)
    common2 = (k + 2) * (k + 3) ** 2 * (2 * k + 1) * (2 * k + 3) * (2 * k + 5)
    s = {}
    s[1, 1] = k * (-14 * k**5 - 73 * k**4 + 131 * k**3 + 1438 * k**2 + 3018 * k + 2070) / ((k + 1) * common)
    s[1, 2] = 3 * k * (2 * k**6 + 37 * k**5 + 124 * k**4 - 55 * k**3 - 900 * k**2 - 1488 * k - 720) / (4 * (k + 1) ** 2 * common)
    p13 = 10 * k**5 - 47 * k**4 - 664 * k**3 - 2083 * k**2 - 2592 * k - 1080
    s[1, 3] = k**2 * p13 / (4 * (k + 1) ** 2 * common)
    s[1, 4] = k * p13 / (4 * (k + 1) ** 2 * common)
    s[2, 2] = 3 * k * (17 * k**6 + 145 * k**5 + 507 * k**4 + 929 * k**3 + 976 * k**2 + 612 * k + 180) / (2 * (k + 1) ** 2 * common)
    p23 = 80 * k**4 + 579 * k**3 + 1558 * k**2 + 1803 * k + 720
    s[2, 3] = -(k**3) * p23 / (4 * (k + 1) ** 2 * common)
    s[2, 4] = -(k**2) * p23 / (4 * (k + 1) ** 2 * common)
    s[3, 3] = k**2 * (49 * k**4 + 276 * k**3 + 539 * k**2 + 396 * k + 90) / (2 * (k + 1) ** 2 * common2)
    s[3, 4] = -(k**3) * (16 * k**3 + 87 * k**2 + 152 * k + 75) / (2 * (k + 1) ** 2 * common2)
    s[4, 4] = k * (16 * k**5 + 120 * k**4 + 341 * k**3 + 462 * k**2 + 321 * k + 90) / (2 * (k + 1) ** 2 * common2)
    if k != 1:
        s[1, 5] = -k * (20 * k**6 + 104 * k**5 - 69 * k**4 - 1088 * k**3 - 1307 * k**2 + 1224 * k + 2160) / (
            2 * (k - 1) * (k + 1) * common
        )
        s[2, 5] = k * (28 * k**7 + 264 * k**6 + 829 * k**5 + 816 * k**4 - 515 * k**3 - 702 * k**2 + 1152 * k + 1080) / (
            4 * (k - 1) * (k + 1) ** 2 * common
        )
        p35 = 4 * k**6 + 64 * k**5 + 251 * k**4 + 194 * k**3 - 729 * k**2 - 1488 * k - 720
        s[3, 5] = -(k**2) * p35 / (4 * (k - 1) * (k + 1) ** 2 * common)
        s[4, 5] = -k * p35 / (4 * (k - 1) * (k + 1) ** 2 * common)
        s[5, 5] = k * (-4 * k**7 - 4 * k**6 + 147 * k**5 + 574 * k**4 + 610 * k**3 - 51 * k**2 + 132 * k + 630) / (
            (k - 1) ** 2 * (k + 1) * common
        )
    for (i, j), v in list(s.items()):
        s[j, i] = v
    return s


def degree_sigma_kappa(kappa: Fraction) -> list[list[Fraction]]:
    """Closed-form covariance of the three-type out-degree urn (degrees 0, 1 and star)."""
    k = Fraction(kappa)
    d = (k + 1) ** 2 * (k + 2) * (2 * k + 1)
    s11 = k / ((k + 1) ** 2 * (2 * k + 1))
    s12 = -k * (2 * k**2 + 3 * k + 2) / (2 * d)
    s13 = k * (2 - k) / (2 * d)
    s22 = k * (2 * k**3 + 25 * k**2 + 32 * k + 12) / (12 * d)
    s23 = -k * (2 - k) * (10 * k**2 + 13 * k + 6) / (12 * d)
    s33 = k * (2 - k) * (10 * k**2 + 7 * k + 6) / (12 * d)
    return [[s11, s12, s13], [s12, s22, s23], [s13, s23, s33]]
