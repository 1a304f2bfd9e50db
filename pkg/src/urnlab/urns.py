"""Generalized Polya urns built from tree growth.

An urn has finitely many ball types.  A ball of type ``i`` has activity
``a_i``; balls are drawn with probability proportional to activity, and a
drawn ball of type ``i`` is replaced according to a random change vector
``delta`` taking finitely many values.  The change vector includes the
removal of the drawn ball, so ``delta[i]`` is usually negative.

Each builder records what it needs downstream in :attr:`UrnSpec.meta`: the
model, the shapes behind each type and the data for the predicted
characteristic polynomial.
"""

from __future__ import annotations

import json
import math
from collections import Counter, defaultdict
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from itertools import product
from typing import Iterable, Sequence

from .exact import RatMatrix, RatPoly, as_rational, rat_from_json, rat_to_json, rank
from .mst import (
    IsoMode,
    MstNode,
    MstTree,
    canonical,
    canonical_form,
    insert_key,
    mst_downset,
    parse_mst,
)
from .pa import (
    PaNode,
    PaTree,
    PaWeights,
    _nodes_preorder,
    attach,
    canonical_pa,
    pa_downset,
    parse_pa,
)
from .roots import shifted_rising_poly

__all__ = [
    "Outcome",
    "TypeDesc",
    "UrnSpec",
    "ValidationReport",
    "build_mst_fringe_urn",
    "build_pa_fringe_urn",
    "build_protected_urn",
    "build_mst_degree_urn",
    "build_pa_degree_urn",
    "validate_urn",
    "predicted_charpoly",
    "protected_types",
]


@dataclass(frozen=True)
class Outcome:
    """One possible replacement: probability and change vector."""

    prob: Fraction
    delta: tuple[Fraction, ...]


@dataclass(frozen=True)
class TypeDesc:
    """Ball type: ``kind`` is one of shape, star, xvec, degree; ``label`` names it."""

    kind: str
    label: str


@dataclass
class UrnSpec:
    """A generalized Polya urn.

    Attributes
    ----------
    types : list of TypeDesc
    activities : list of Fraction
    outcomes : list of list of Outcome
        Replacement law of each type; probabilities sum to 1.
    meta : dict
        Builder-specific data (JSON-serializable).
    """

    types: list[TypeDesc]
    activities: list[Fraction]
    outcomes: list[list[Outcome]]
    meta: dict = field(default_factory=dict)

    @property
    def q(self) -> int:
        return len(self.types)

    def labels(self) -> list[str]:
        return [t.label for t in self.types]

    def index(self, label: str) -> int:
        return self.labels().index(label)

    def intensity(self) -> RatMatrix:
        """``A[i][j] = a_j * E delta_j[i]``."""
        q = self.q
        cols = []
        for a, outs in zip(self.activities, self.outcomes):
            mean = [Fraction(0)] * q
            for o in outs:
                for i, d in enumerate(o.delta):
                    if d:
                        mean[i] += o.prob * d
            cols.append([a * x for x in mean])
        return RatMatrix([[cols[j][i] for j in range(q)] for i in range(q)])

    def to_json(self) -> dict:
        return {
            "types": [asdict(t) for t in self.types],
            "activities": [rat_to_json(a) for a in self.activities],
            "outcomes": [
                [{"prob": rat_to_json(o.prob), "delta": [rat_to_json(d) for d in o.delta]} for o in outs]
                for outs in self.outcomes
            ],
            "meta": self.meta,
        }

    @classmethod
    def from_json(cls, obj: dict | str) -> "UrnSpec":
        if isinstance(obj, str):
            obj = json.loads(obj)
        return cls(
            types=[TypeDesc(**t) for t in obj["types"]],
            activities=[rat_from_json(a) for a in obj["activities"]],
            outcomes=[
                [Outcome(rat_from_json(o["prob"]), tuple(rat_from_json(d) for d in o["delta"])) for o in outs]
                for outs in obj["outcomes"]
            ],
            meta=obj.get("meta", {}),
        )


def _group(counts: Iterable[tuple[Fraction, tuple[Fraction, ...]]]) -> list[Outcome]:
    acc: dict[tuple, Fraction] = defaultdict(Fraction)
    order = []
    for p, d in counts:
        if d not in acc:
            order.append(d)
        acc[d] += p
    return [Outcome(acc[d], d) for d in order]


# ---------------------------------------------------------------------------
# m-ary search tree fringe urns


def _decompose_mst(root: MstNode, living: set[str], mode: IsoMode) -> Counter:
    """Split a tree into maximal living fringe subtrees (dead nodes dropped)."""
    out: Counter = Counter()
    stack = [root]
    while stack:
        v = stack.pop()
        key = canonical(v, mode)
        if key in living:
            out[key] += 1
        else:
            stack.extend(v.children)
    return out


def build_mst_fringe_urn(m: int, targets: Sequence[MstTree | str], mode=IsoMode.ORDERED) -> UrnSpec:
    """Urn whose types are the down-set generated by ``targets``.

    A ball is a maximal fringe subtree whose shape lies in the down-set; its
    activity is its number of gaps.  Single nodes with fewer than ``m - 1``
    keys are always included, so the gaps of the tree are exactly the gaps of
    the balls.
    """
    mode = IsoMode.coerce(mode)
    trees = [parse_mst(t, m) if isinstance(t, str) else t for t in targets]
    if any(t.m != m for t in trees):
        raise ValueError("target with a different m")
    shapes = mst_downset(trees, mode)
    labels = [canonical(t, mode) for t in shapes]
    index = {lab: i for i, lab in enumerate(labels)}
    living = set(labels)
    q = len(shapes)
    activities, outcomes = [], []
    for i, t in enumerate(shapes):
        gaps = t.gaps
        draws = []
        for g in range(gaps):
            grown = insert_key(t, g)
            delta = [Fraction(0)] * q
            delta[i] -= 1
            for key, c in _decompose_mst(grown.root, living, mode).items():
                delta[index[key]] += c
            draws.append((Fraction(1, gaps), tuple(delta)))
        activities.append(Fraction(gaps))
        outcomes.append(_group(draws))
    target_labels = [canonical(t, mode) for t in trees]
    meta = {
        "model": "mst-fringe",
        "m": m,
        "mode": mode.value,
        "targets": target_labels,
        "single_nodes": [canonical(MstNode(i), mode) for i in range(m - 1)],
    }
    return UrnSpec([TypeDesc("shape", lab) for lab in labels], activities, outcomes, meta)


# ---------------------------------------------------------------------------
# preferential attachment fringe urns

STAR = "*"


def _decompose_pa(root: PaNode, living: set[str], mode: IsoMode, w: PaWeights) -> tuple[Counter, Fraction]:
    """Living fringe subtrees and the total weight of dead nodes."""
    out: Counter = Counter()
    dead = Fraction(0)
    stack = [root]
    while stack:
        v = stack.pop()
        key = canonical_pa(v, mode)
        if key in living:
            out[key] += 1
        else:
            dead += w.w(len(v.children))
            stack.extend(v.children)
    return out, dead


def build_pa_fringe_urn(w: PaWeights, targets: Sequence[PaTree | str], mode=IsoMode.ORDERED) -> UrnSpec:
    """Urn for fringe subtrees of a preferential attachment tree.

    Types are the down-set generated by the targets plus a star type.  Dead
    nodes are represented by star balls of total activity equal to their
    weight; a star ball has activity 1 and, when drawn, adds ``chi`` star
    balls and one single-node ball.
    """
    mode = IsoMode.coerce(mode)
    trees = [parse_pa(t) if isinstance(t, str) else t for t in targets]
    shapes = pa_downset(trees, mode, w)
    labels = [canonical_pa(t, mode) for t in shapes]
    index = {lab: i for i, lab in enumerate(labels)}
    living = set(labels)
    q = len(shapes) + 1
    star = q - 1
    activities, outcomes = [], []
    for i, t in enumerate(shapes):
        total = w.total(t.size)
        draws = []
        for j, v in enumerate(_nodes_preorder(t.root)):
            wt = w.w(len(v.children))
            if wt <= 0:
                continue
            grown = attach(t, j)
            delta = [Fraction(0)] * q
            delta[i] -= 1
            found, dead = _decompose_pa(grown.root, living, mode, w)
            for key, c in found.items():
                delta[index[key]] += c
            delta[star] += dead
            draws.append((wt / total, tuple(delta)))
        activities.append(total)
        outcomes.append(_group(draws))
    delta = [Fraction(0)] * q
    delta[index["()"]] = Fraction(1)
    delta[star] = w.chi
    activities.append(Fraction(1))
    outcomes.append([Outcome(Fraction(1), tuple(delta))])
    meta = {
        "model": "pa-fringe",
        "mode": mode.value,
        "chi": str(w.chi),
        "rho": str(w.rho),
        "targets": [canonical_pa(t, mode) for t in trees],
        "star": star,
    }
    types = [TypeDesc("shape", lab) for lab in labels] + [TypeDesc("star", STAR)]
    return UrnSpec(types, activities, outcomes, meta)


# ---------------------------------------------------------------------------
# protected nodes in m-ary search trees


def protected_types(m: int) -> list[tuple[int, ...]]:
    """Vectors ``x`` with ``sum(x) <= m`` except ``(m, 0, ..., 0)``.

    ``x[i-1]`` is the number of children holding ``i`` keys that are leaves,
    the remaining children being external.  Ordered by ``sum(x)`` descending,
    then by ``x`` read as a base ``m + 1`` number (first entry most
    significant) descending; the all-zero dead type comes last.
    """
    out = []
    for x in product(range(m + 1), repeat=m):
        if sum(x) <= m and x != (m,) + (0,) * (m - 1):
            out.append(x)

    def value(x):
        v = 0
        for c in x:
            v = v * (m + 1) + c
        return v

    out.sort(key=lambda x: (-sum(x), -value(x)))
    return out


def _xlabel(x: tuple[int, ...]) -> str:
    return "(" + ",".join(str(c) for c in x) + ")"


def build_protected_urn(m: int) -> UrnSpec:
    """Urn counting protected nodes in an m-ary search tree.

    The tree is cut along edges joining two non-leaf nodes.  Each piece is a
    non-leaf root with leaf and external children, described by ``x``, or a
    lone leaf that is the root of the tree.  The all-zero type is the dead
    full node all of whose children are non-leaves; its activity is 0.
    """
    if m < 2:
        raise ValueError("m must be at least 2")
    types = protected_types(m)
    index = {x: i for i, x in enumerate(types)}
    q = len(types)
    activities, outcomes = [], []
    for x in types:
        act = sum((i + 1) * c for i, c in enumerate(x))
        if act == 0:
            activities.append(Fraction(0))
            outcomes.append([Outcome(Fraction(1), (Fraction(0),) * q)])
            continue
        draws = []
        for i in range(m):
            c = x[i]
            if not c:
                continue
            keys = i + 1
            weight = Fraction(keys * c, act)
            delta = [Fraction(0)] * q
            delta[index[x]] -= 1
            y = list(x)
            if keys < m:
                # a leaf with i + 1 keys gains one (externals are the i = 0 case)
                y[i] -= 1
                y[i + 1] += 1
                delta[index[tuple(y)]] += 1
            else:
                # a leaf holding m keys means a full leaf with m - 1 keys gained a
                # child: the child type (m-1,1,0,...) splits off as a new piece
                y[m - 1] -= 1
                delta[index[tuple(y)]] += 1
                z = [0] * m
                z[0] = m - 1
                z[1] = 1
                delta[index[tuple(z)]] += 1
            draws.append((weight, tuple(delta)))
        activities.append(Fraction(act))
        outcomes.append(_group(draws))
    meta = {"model": "protected", "m": m, "types": [list(x) for x in types]}
    return UrnSpec([TypeDesc("xvec", _xlabel(x)) for x in types], activities, outcomes, meta)


# ---------------------------------------------------------------------------
# out-degree urns


def build_mst_degree_urn(m: int) -> UrnSpec:
    """Urn for out-degrees in an m-ary search tree.

    Edges to key-holding children are erased, so each ball is a node with its
    external children.  Types ``1 .. m-1`` are single nodes with ``i - 1`` keys;
    types ``m .. 2m-2`` are full nodes with ``2m - i`` external children.  For
    ``n >= 1`` type 1 stands for a full node with one external child, which
    behaves identically.  Full nodes without external children are dead.
    """
    if m < 2:
        raise ValueError("m must be at least 2")
    q = 2 * m - 2
    labels = []
    for i in range(1, q + 1):
        if i < m:
            labels.append(f"node:{i - 1}")
        else:
            labels.append(f"full:ext={2 * m - i}")
    activities, outcomes = [], []

    def delta(drawn, *added):
        d = [Fraction(0)] * q
        d[drawn - 1] -= 1
        for j in added:
            d[j - 1] += 1
        return tuple(d)

    for i in range(1, q + 1):
        if i < m:
            act = i
            outs = [Outcome(Fraction(1), delta(i, i + 1))]
        else:
            act = 2 * m - i
            nxt = i + 1 if i < q else 1
            outs = [Outcome(Fraction(1), delta(i, nxt, 2))]
        activities.append(Fraction(act))
        outcomes.append(outs)
    meta = {"model": "mst-degree", "m": m}
    return UrnSpec([TypeDesc("degree", lab) for lab in labels], activities, outcomes, meta)


def build_pa_degree_urn(w: PaWeights, kmax: int) -> UrnSpec:
    """Urn for out-degrees ``0 .. kmax`` in a preferential attachment tree.

    A ball of type ``i`` is a node with ``i`` children; nodes with more than
    ``kmax`` children become star balls of total activity equal to their
    weight, as in :func:`build_pa_fringe_urn`.  Under a degree cap with
    ``kmax >= cap - 1`` such nodes have weight zero and the star is omitted.
    """
    if kmax < 0:
        raise ValueError("kmax must be non-negative")
    cap = w.max_children
    if cap is not None and kmax >= cap:
        # nodes at the cap have zero activity; their count is n minus the rest
        raise ValueError(f"kmax must be below the degree cap {cap}")
    with_star = cap is None or kmax + 1 < cap
    q = kmax + 2 if with_star else kmax + 1
    star = q - 1 if with_star else None
    activities, outcomes = [], []
    for i in range(kmax + 1):
        d = [Fraction(0)] * q
        d[i] -= 1
        d[0] += 1
        if i < kmax:
            d[i + 1] += 1
        elif with_star:
            d[star] += w.w(kmax + 1)
        act = w.w(i)
        activities.append(act)
        outcomes.append([Outcome(Fraction(1), tuple(d))])
    labels = [f"deg:{i}" for i in range(kmax + 1)]
    types = [TypeDesc("degree", lab) for lab in labels]
    if with_star:
        d = [Fraction(0)] * q
        d[0] = Fraction(1)
        d[star] = w.chi
        activities.append(Fraction(1))
        outcomes.append([Outcome(Fraction(1), tuple(d))])
        types.append(TypeDesc("star", STAR))
    meta = {"model": "pa-degree", "chi": str(w.chi), "rho": str(w.rho), "kmax": kmax, "star": star}
    return UrnSpec(types, activities, outcomes, meta)


# ---------------------------------------------------------------------------
# spectrum prediction and validation


def live_indices(u: UrnSpec) -> list[int]:
    return [i for i, a in enumerate(u.activities) if a > 0]


def _weights_from_meta(meta: dict) -> PaWeights:
    return PaWeights.make(Fraction(meta["chi"]), Fraction(meta["rho"]))


def predicted_charpoly(u: UrnSpec) -> RatPoly:
    """Characteristic polynomial of the live block predicted in closed form.

    * m-ary fringe urns: ``phi_m(x) * prod (x + a_i)`` over types with a full node;
    * preferential attachment fringe urns: ``(x - chi - rho) * prod (x + a_i)``
      over the shape types;
    * protected urns: ``phi_m(x) * (x + m) * prod (x + a_x)`` over live types
      with at least two non-erased children;
    * m-ary degree urns: ``phi_m(x) * prod_{i=2}^{m} (x + i)``;
    * preferential attachment degree urns: ``(x - chi - rho) * prod (x + w_j)``
      over the degree types, leaving out degree ``cap - 1`` when the star is
      omitted.

    Here ``phi_m(x) = prod_{i=1}^{m-1} (x + i) - m!``.
    """
    model = u.meta.get("model")
    x = RatPoly.x()
    act = u.activities
    if model == "mst-fringe":
        m = u.meta["m"]
        singles = set(u.meta["single_nodes"])
        p = shifted_rising_poly(m)
        for t, a in zip(u.types, act):
            if t.label not in singles:
                p = p * (x + RatPoly([a]))
        return p
    if model in ("pa-fringe", "pa-degree"):
        w = _weights_from_meta(u.meta)
        p = x - RatPoly([w.chi + w.rho])
        # without a star (capped degree urn) the last live degree has no factor
        skip = None
        if model == "pa-degree" and u.meta.get("star") is None:
            skip = w.max_children - 1
        for i, (t, a) in enumerate(zip(u.types, act)):
            if t.kind != "star" and a > 0 and i != skip:
                p = p * (x + RatPoly([a]))
        return p
    if model == "protected":
        m = u.meta["m"]
        p = shifted_rising_poly(m) * (x + RatPoly([m]))
        for t, a in zip(u.types, act):
            xs = tuple(int(c) for c in t.label.strip("()").split(","))
            if sum(xs) >= 2 and a > 0:
                p = p * (x + RatPoly([a]))
        return p
    if model == "mst-degree":
        m = u.meta["m"]
        p = shifted_rising_poly(m)
        for i in range(2, m + 1):
            p = p * (x + RatPoly([i]))
        return p
    raise ValueError(f"no spectrum prediction for model {model!r}")


@dataclass
class ValidationReport:
    """Outcome of :func:`validate_urn`; ``checks`` maps a name to (passed, detail)."""

    checks: dict[str, tuple[bool, str]]
    dead_types: list[str]
    dominating: list[str]

    @property
    def ok(self) -> bool:
        return all(p for p, _ in self.checks.values())

    def summary(self) -> str:
        lines = [f"{'PASS' if p else 'FAIL'} {name}: {detail}" for name, (p, detail) in self.checks.items()]
        if self.dead_types:
            lines.append("dead types (non-dominating, excluded): " + ", ".join(self.dead_types))
        return "\n".join(lines)


def _rat_gcd(values: Iterable[Fraction]) -> Fraction:
    g = Fraction(0)
    for v in values:
        v = abs(v)
        if not v:
            continue
        if not g:
            g = v
            continue
        lcd = math.lcm(g.denominator, v.denominator)
        g = Fraction(math.gcd(int(g * lcd), int(v * lcd)), lcd)
    return g


def validate_urn(u: UrnSpec) -> ValidationReport:
    """Check the standing assumptions of the urn limit theory; never raises."""
    checks: dict[str, tuple[bool, str]] = {}
    q = u.q
    try:
        bad = [i for i, outs in enumerate(u.outcomes) if sum(o.prob for o in outs) != 1 or any(o.prob < 0 for o in outs)]
        checks["probabilities"] = (not bad, "each replacement law sums to 1" if not bad else f"bad types {bad}")
        neg_act = [i for i, a in enumerate(u.activities) if a < 0]
        checks["activities"] = (not neg_act, "all activities non-negative" if not neg_act else f"negative at {neg_act}")
        # the unit of type i divides every change of coordinate i, whatever is drawn
        units = [_rat_gcd(o.delta[i] for outs in u.outcomes for o in outs) or Fraction(1) for i in range(q)]
        a1 = []
        for i, outs in enumerate(u.outcomes):
            for o in outs:
                if any(d < 0 for j, d in enumerate(o.delta) if j != i) or o.delta[i] < -units[i]:
                    a1.append(i)
                    break
        checks["A1"] = (not a1, "off-diagonal changes non-negative, removals within the divisibility unit" if not a1 else f"violated by types {a1}")
        checks["A2"] = (True, "finitely many bounded outcomes")
        live = live_indices(u)
        dead = [u.types[i].label for i in range(q) if i not in live]
        if not live:
            checks["A3"] = (False, "no type has positive activity")
            return ValidationReport(checks, dead, [])
        cs = {sum(u.activities[j] * o.delta[j] for j in range(q)) for i in live for o in u.outcomes[i]}
        if len(cs) == 1:
            c = cs.pop()
            checks["balance"] = (True, f"a . delta = {c} for every outcome")
        else:
            c = None
            checks["balance"] = (False, f"a . delta takes values {sorted(cs)}")
        # reachability among live types
        edges = {i: {j for o in u.outcomes[i] for j in live if o.delta[j] > 0} for i in live}
        dominating = []
        for i in live:
            seen = {i}
            stack = [i]
            while stack:
                v = stack.pop()
                for j in edges[v]:
                    if j not in seen:
                        seen.add(j)
                        stack.append(j)
            if seen >= set(live):
                dominating.append(u.types[i].label)
        checks["dominating"] = (
            len(dominating) == len(live),
            "every live type is dominating" if len(dominating) == len(live) else f"dominating: {dominating}",
        )
        a = u.intensity().submatrix(live, live)
        from .exact import char_poly
        from .roots import poly_roots

        if c is None or c <= 0:
            checks["A3"] = (False, "no positive principal eigenvalue")
            return ValidationReport(checks, dead, dominating)
        p = char_poly(a)
        simple = p(c) == 0 and p.derivative()(c) != 0
        checks["A3"] = (simple, f"lambda1 = {c} is a simple eigenvalue" if simple else f"{c} is not a simple eigenvalue")
        others = []
        q_rest, rem = divmod(p, RatPoly([-c, 1]))
        if not rem and q_rest.degree >= 1:
            others = poly_roots(q_rest)
        top = max((r.real + r.radius for r in others), default=-math.inf)
        checks["A4"] = (top < c, f"other eigenvalues have real part <= {top:.6g} < {c}")
        from .exact import nullspace

        ker = nullspace(a - RatMatrix.identity(len(live)) * c)
        pos = len(ker) == 1 and (all(x > 0 for x in ker[0]) or all(x < 0 for x in ker[0]))
        checks["A5"] = (pos, "right eigenvector of lambda1 is strictly positive" if pos else "principal eigenvector not positive")
        uok = all(u.activities[i] > 0 for i in live)
        checks["A6"] = (uok, "activities form the positive left eigenvector")
        checks["A7"] = (c > 0, "total activity grows by lambda1 at every draw")
        return ValidationReport(checks, dead, dominating)
    except Exception as exc:  # report, never raise
        checks["internal"] = (False, f"{type(exc).__name__}: {exc}")
        return ValidationReport(checks, [], [])
