"""Monte Carlo checks of the limit laws.

Replicate ``r`` of a plan with seed ``s`` draws all its randomness from
``Generator(Philox(SeedSequence(s, spawn_key=(r,))))``, so a report depends
only on the plan and never on how replicates are spread over workers.

Sizes follow the urn clock: ``n`` is the number of keys for m-ary search
trees and the number of nodes for preferential attachment trees.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from . import _kernels
from .exact import RatMatrix, rat_to_json
from .mst import IsoMode, MstNode, MstTree, canonical, insert_key, parse_mst
from .pa import PaNode, PaWeights, canonical_pa, pa_size_distribution, parse_pa
from .urns import UrnSpec, _decompose_mst, _decompose_pa

__all__ = [
    "MstModel",
    "PaModel",
    "Fringe",
    "Protected",
    "Degrees",
    "SimPlan",
    "StatReport",
    "SimReport",
    "ExtinctUrn",
    "replicate_rng",
    "run_sim",
    "run_urn_sim",
    "normality_diagnostics",
    "default_workers",
    "exact_tree_distribution",
    "exact_urn_distribution",
    "initial_composition",
]


class ExtinctUrn(RuntimeError):
    """The urn ran out of active balls."""


@dataclass(frozen=True)
class MstModel:
    m: int

    def describe(self) -> dict:
        return {"model": "mst", "m": self.m}


@dataclass(frozen=True)
class PaModel:
    weights: PaWeights

    @classmethod
    def make(cls, chi, rho) -> "PaModel":
        return cls(PaWeights.make(chi, rho))

    def describe(self) -> dict:
        return {"model": "pa", "chi": str(self.weights.chi), "rho": str(self.weights.rho)}


@dataclass(frozen=True)
class Fringe:
    """Fringe subtree counts per target, or their sum when ``total``."""

    targets: tuple[str, ...]
    mode: IsoMode = IsoMode.ORDERED
    total: bool = False

    @property
    def name(self) -> str:
        return "fringe_total" if self.total else "fringe"


@dataclass(frozen=True)
class Protected:
    name: str = "protected"


@dataclass(frozen=True)
class Degrees:
    """Out-degree histogram; for PA trees degrees above ``kmax`` are omitted."""

    kmax: int | None = None
    name: str = "degrees"


@dataclass(frozen=True)
class SimPlan:
    model: MstModel | PaModel
    n: int
    reps: int
    statistics: tuple
    seed: int = 0
    workers: int | None = None

    def __post_init__(self):
        if self.reps < 2:
            raise ValueError("need at least two replicates")
        if self.n < 1:
            raise ValueError("n must be positive")
        names = [s.name for s in self.statistics]
        if len(set(names)) != len(names):
            raise ValueError("statistic names must be distinct")

    def describe(self) -> dict:
        stats = []
        for s in self.statistics:
            d = {"name": s.name}
            if isinstance(s, Fringe):
                d.update(targets=list(s.targets), mode=IsoMode.coerce(s.mode).value)
            if isinstance(s, Degrees):
                d.update(kmax=s.kmax)
            stats.append(d)
        return {**self.model.describe(), "n": self.n, "reps": self.reps, "seed": self.seed, "statistics": stats}


def default_workers() -> int:
    env = os.environ.get("URNLAB_WORKERS")
    if env:
        return max(1, int(env))
    return 1


def replicate_rng(seed: int, r: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(r,))))


# ---------------------------------------------------------------------------
# shape tables for the compiled census


def _mst_closure(m: int, targets: Sequence[str], mode: IsoMode) -> list[MstNode]:
    """Targets and all their fringe subtrees, children before parents."""
    seen: dict[str, MstNode] = {}
    order: list[MstNode] = []

    def visit(v: MstNode):
        key = canonical(v, mode)
        if key in seen:
            return
        for c in v.children:
            visit(c)
        seen[key] = v
        order.append(v)

    for t in targets:
        visit(parse_mst(t, m).root)
    return order


def _pa_closure(targets: Sequence[str], mode: IsoMode) -> list[PaNode]:
    seen: dict[str, PaNode] = {}
    order: list[PaNode] = []

    def visit(v: PaNode):
        key = canonical_pa(v, mode)
        if key in seen:
            return
        for c in v.children:
            visit(c)
        seen[key] = v
        order.append(v)

    for t in targets:
        visit(parse_pa(t).root)
    return order


def _encode(child_ids: list[int], base: int, unordered: bool) -> int:
    if unordered:
        child_ids = sorted(child_ids)
    code = 0
    for c in child_ids:
        code = code * base + c + 1
    return code


@dataclass
class _Table:
    keys: list[str]
    codes: np.ndarray
    ids: np.ndarray
    leaf_ids: np.ndarray | None = None
    leaf_id: int = -1
    max_children: int = 0


def _mst_table(m: int, targets: Sequence[str], mode: IsoMode) -> _Table:
    unordered = mode is IsoMode.UNORDERED
    nodes = _mst_closure(m, targets, mode)
    keys = [canonical(v, mode) for v in nodes]
    index = {k: i for i, k in enumerate(keys)}
    base = len(nodes) + 1
    if base ** m >= 2**62:
        raise ValueError("too many tracked shapes for the compiled census")
    leaf_ids = np.full(m, _kernels.OVER, dtype=np.int64)
    pairs = []
    for i, v in enumerate(nodes):
        if not v.children:
            leaf_ids[v.keys] = i
        else:
            kids = [index[canonical(c, mode)] for c in v.children]
            pairs.append((_encode(kids, base, unordered), i))
    pairs.sort()
    codes = np.array([p[0] for p in pairs], dtype=np.int64)
    ids = np.array([p[1] for p in pairs], dtype=np.int64)
    return _Table(keys, codes, ids, leaf_ids=leaf_ids)


def _pa_table(targets: Sequence[str], mode: IsoMode) -> _Table:
    unordered = mode is IsoMode.UNORDERED
    nodes = _pa_closure(targets, mode)
    keys = [canonical_pa(v, mode) for v in nodes]
    index = {k: i for i, k in enumerate(keys)}
    base = len(nodes) + 1
    max_children = max((len(v.children) for v in nodes), default=0)
    if base ** max(max_children, 1) >= 2**62:
        raise ValueError("too many tracked shapes for the compiled census")
    pairs = []
    leaf_id = _kernels.OVER
    for i, v in enumerate(nodes):
        if not v.children:
            leaf_id = i
        else:
            kids = [index[canonical_pa(c, mode)] for c in v.children]
            pairs.append((_encode(kids, base, unordered), i))
    pairs.sort()
    codes = np.array([p[0] for p in pairs], dtype=np.int64)
    ids = np.array([p[1] for p in pairs], dtype=np.int64)
    return _Table(keys, codes, ids, leaf_id=leaf_id, max_children=max_children)


# ---------------------------------------------------------------------------
# one replicate


def _stat_labels(plan: SimPlan, stat) -> list[str]:
    if isinstance(stat, Fringe):
        return ["total"] if stat.total else list(stat.targets)
    if isinstance(stat, Protected):
        return ["protected"]
    if isinstance(plan.model, MstModel):
        return [f"D{k}" for k in range(plan.model.m + 1)]
    return [f"D{k}" for k in range(stat.kmax + 1)]


def _canon_targets(plan: SimPlan, stat: Fringe) -> list[str]:
    mode = IsoMode.coerce(stat.mode)
    if isinstance(plan.model, MstModel):
        return [canonical(parse_mst(t, plan.model.m), mode) for t in stat.targets]
    return [canonical_pa(parse_pa(t), mode) for t in stat.targets]


def _prepare(plan: SimPlan):
    tables = {}
    for stat in plan.statistics:
        if isinstance(stat, Fringe):
            mode = IsoMode.coerce(stat.mode)
            targets = _canon_targets(plan, stat)
            if isinstance(plan.model, MstModel):
                tables[stat.name] = (_mst_table(plan.model.m, targets, mode), targets, mode)
            else:
                tables[stat.name] = (_pa_table(targets, mode), targets, mode)
        elif isinstance(stat, Protected) and not isinstance(plan.model, MstModel):
            raise ValueError("protected nodes are defined for m-ary search trees only")
        elif isinstance(stat, Degrees) and isinstance(plan.model, PaModel) and stat.kmax is None:
            raise ValueError("PA degree statistics need kmax")
    return tables


def _replicate(plan: SimPlan, tables, r: int) -> tuple[dict[str, np.ndarray], bool]:
    """Integer statistics of replicate ``r`` and whether the gap identity held."""
    rng = replicate_rng(plan.seed, r)
    out: dict[str, np.ndarray] = {}
    gaps_ok = True
    if isinstance(plan.model, MstModel):
        m = plan.model.m
        keys, first_child = _kernels.grow_mst(m, plan.n, rng.random(plan.n))
        empty = _Table([], np.zeros(0, np.int64), np.zeros(0, np.int64), leaf_ids=np.full(m, -1, np.int64))
        base_run = _kernels.census_mst(m, keys, first_child, empty.leaf_ids, empty.codes, empty.ids, 0, False)
        _, protected, degrees, singles = base_run
        gaps_ok = int(sum((i + 1) * int(s) for i, s in enumerate(singles))) == plan.n + 1
        for stat in plan.statistics:
            if isinstance(stat, Fringe):
                table, targets, mode = tables[stat.name]
                counts = _kernels.census_mst(
                    m, keys, first_child, table.leaf_ids, table.codes, table.ids, len(table.keys), mode is IsoMode.UNORDERED
                )[0]
                vec = np.array([counts[table.keys.index(t)] for t in targets], dtype=np.int64)
                out[stat.name] = np.array([vec.sum()]) if stat.total else vec
            elif isinstance(stat, Protected):
                out[stat.name] = np.array([protected], dtype=np.int64)
            else:
                out[stat.name] = degrees.astype(np.int64)
        return out, gaps_ok
    w = plan.model.weights
    parent = _kernels.grow_pa(plan.n, float(w.chi), float(w.rho), rng.random(plan.n))
    for stat in plan.statistics:
        if isinstance(stat, Fringe):
            table, targets, mode = tables[stat.name]
            counts, _ = _kernels.census_pa(
                parent, table.max_children, table.codes, table.ids, len(table.keys), table.leaf_id, mode is IsoMode.UNORDERED, 0
            )
            vec = np.array([counts[table.keys.index(t)] for t in targets], dtype=np.int64)
            out[stat.name] = np.array([vec.sum()]) if stat.total else vec
        else:
            _, degrees = _kernels.census_pa(parent, 0, np.zeros(0, np.int64), np.zeros(0, np.int64), 0, -1, False, stat.kmax)
            out[stat.name] = degrees[: stat.kmax + 1].astype(np.int64)
    return out, gaps_ok


def _run_chunk(args):
    plan, rs = args
    tables = _prepare(plan)
    return [_replicate(plan, tables, r) for r in rs]


# ---------------------------------------------------------------------------
# statistics


def normality_diagnostics(samples: np.ndarray) -> dict:
    """Skewness, excess kurtosis and flags per column.

    A column is flagged when ``|g1| > 5 sqrt(6 / reps)`` or
    ``|g2| > 5 sqrt(24 / reps)``.  Constant columns get NaN and no flag.
    """
    x = np.asarray(samples, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    reps = x.shape[0]
    centred = x - x.mean(axis=0)
    m2 = (centred**2).mean(axis=0)
    m3 = (centred**3).mean(axis=0)
    m4 = (centred**4).mean(axis=0)
    const = m2 <= 1e-12 * np.maximum(1.0, np.abs(x.mean(axis=0))) ** 2
    with np.errstate(divide="ignore", invalid="ignore"):
        g1 = np.where(const, np.nan, m3 / m2**1.5)
        g2 = np.where(const, np.nan, m4 / m2**2 - 3.0)
    lim1 = 5 * math.sqrt(6 / reps)
    lim2 = 5 * math.sqrt(24 / reps)
    flags = []
    for j in range(x.shape[1]):
        f = []
        if not const[j] and abs(g1[j]) > lim1:
            f.append("skewness")
        if not const[j] and abs(g2[j]) > lim2:
            f.append("kurtosis")
        flags.append(f)
    return {"g1": g1.tolist(), "g2": g2.tolist(), "flags": flags, "limits": [lim1, lim2]}


@dataclass
class StatReport:
    """Moments per unit size of one statistic."""

    name: str
    labels: list[str]
    mean: np.ndarray
    cov: np.ndarray
    se: np.ndarray
    g1: list[float]
    g2: list[float]
    flags: list[list[str]]
    comparison: dict | None = None

    @classmethod
    def from_samples(cls, name: str, labels: list[str], samples: np.ndarray, n: int) -> "StatReport":
        x = samples.astype(float)
        reps = x.shape[0]
        mean = x.mean(axis=0) / n
        cov = np.atleast_2d(np.cov(x, rowvar=False, ddof=1)) / n
        se = np.sqrt(np.maximum(np.diag(cov), 0.0) * n / reps) / n
        diag = normality_diagnostics(x)
        return cls(name, labels, mean, cov, se, diag["g1"], diag["g2"], diag["flags"])

    def compare(self, mean_ref: Sequence, cov_ref=None, n: int | None = None, reps: int | None = None) -> dict:
        """z-scores of the means and ratios of the covariances against exact values."""
        mu = np.array([float(x) for x in mean_ref])
        with np.errstate(divide="ignore", invalid="ignore"):
            z = np.where(self.se > 0, (self.mean - mu) / self.se, np.where(self.mean == mu, 0.0, np.inf))
        out = {"mean_ref": [float(x) for x in mu], "z": z.tolist()}
        if cov_ref is not None:
            ref = np.array([[float(x) for x in row] for row in cov_ref])
            with np.errstate(divide="ignore", invalid="ignore"):
                ratio = np.where(ref != 0, self.cov / ref, np.nan)
            out["cov_ref"] = ref.tolist()
            out["var_rel_err"] = [
                float(abs(self.cov[i, i] - ref[i, i]) / ref[i, i]) if ref[i, i] else float(abs(self.cov[i, i]))
                for i in range(len(mu))
            ]
            out["cov_ratio"] = ratio.tolist()
        self.comparison = out
        return out

    def to_json(self) -> dict:
        def clean(v):
            return None if isinstance(v, float) and math.isnan(v) else v

        return {
            "name": self.name,
            "labels": self.labels,
            "mean": self.mean.tolist(),
            "cov": self.cov.tolist(),
            "se": self.se.tolist(),
            "g1": [clean(v) for v in self.g1],
            "g2": [clean(v) for v in self.g2],
            "flags": self.flags,
            "comparison": self.comparison,
        }


@dataclass
class SimReport:
    plan: dict
    stats: dict[str, StatReport]
    gap_identity: bool | None = None
    samples: dict[str, np.ndarray] = field(default_factory=dict, repr=False)

    def __getitem__(self, name: str) -> StatReport:
        return self.stats[name]

    def to_json(self) -> dict:
        return {
            "plan": self.plan,
            "gap_identity": self.gap_identity,
            "statistics": {k: v.to_json() for k, v in self.stats.items()},
        }


def run_sim(plan: SimPlan) -> SimReport:
    """Simulate ``plan.reps`` independent trees and summarise the statistics."""
    _prepare(plan)
    workers = plan.workers or default_workers()
    rs = list(range(plan.reps))
    if workers <= 1:
        results = _run_chunk((plan, rs))
    else:
        size = math.ceil(plan.reps / workers)
        chunks = [(plan, rs[i : i + size]) for i in range(0, plan.reps, size)]
        results = []
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for part in pool.map(_run_chunk, chunks):
                results.extend(part)
    stats, samples = {}, {}
    for stat in plan.statistics:
        x = np.stack([res[stat.name] for res, _ in results])
        samples[stat.name] = x
        stats[stat.name] = StatReport.from_samples(stat.name, _stat_labels(plan, stat), x, plan.n)
    gap = all(ok for _, ok in results) if isinstance(plan.model, MstModel) else None
    return SimReport(plan.describe(), stats, gap, samples)


# ---------------------------------------------------------------------------
# direct urn dynamics


def run_urn_sim(u: UrnSpec, initial: Sequence, steps: int, reps: int, seed: int = 0) -> SimReport:
    """Simulate the urn itself for ``steps`` draws from ``initial``.

    Ball counts are floats so fractional star masses are allowed; a type is
    drawn with probability proportional to count times activity.
    """
    q = u.q
    act = np.array([float(a) for a in u.activities])
    probs = [np.array([float(o.prob) for o in outs]) for outs in u.outcomes]
    cum = [np.cumsum(p) for p in probs]
    deltas = [np.array([[float(d) for d in o.delta] for o in outs]) for outs in u.outcomes]
    finals = np.empty((reps, q))
    for r in range(reps):
        rng = replicate_rng(seed, r)
        x = np.array([float(v) for v in initial])
        for _ in range(steps):
            wts = np.maximum(x, 0.0) * act
            total = wts.sum()
            if total <= 0:
                raise ExtinctUrn("total activity reached zero")
            i = min(int(np.searchsorted(np.cumsum(wts), rng.random() * total, side="right")), q - 1)
            k = min(int(np.searchsorted(cum[i], rng.random() * cum[i][-1], side="right")), len(cum[i]) - 1)
            x = x + deltas[i][k]
        finals[r] = x
    plan = {"model": "urn", "urn": u.meta, "steps": steps, "reps": reps, "seed": seed}
    rep = StatReport.from_samples("composition", u.labels(), finals, max(steps, 1))
    return SimReport(plan, {"composition": rep}, None, {"composition": finals})


def exact_urn_distribution(u: UrnSpec, initial: Sequence, steps: int) -> dict[tuple[Fraction, ...], Fraction]:
    """Exact law of the composition after ``steps`` draws, by enumeration."""
    start = tuple(Fraction(x) for x in initial)
    dist = {start: Fraction(1)}
    for _ in range(steps):
        nxt: dict[tuple[Fraction, ...], Fraction] = {}
        for x, p in dist.items():
            wts = [x[i] * u.activities[i] for i in range(u.q)]
            total = sum(wts)
            if total <= 0:
                raise ExtinctUrn("total activity reached zero")
            for i, wt in enumerate(wts):
                if wt <= 0:
                    continue
                for o in u.outcomes[i]:
                    y = tuple(a + b for a, b in zip(x, o.delta))
                    nxt[y] = nxt.get(y, Fraction(0)) + p * wt / total * o.prob
        dist = nxt
    return dist


def exact_tree_distribution(u: UrnSpec, size: int) -> dict[tuple[Fraction, ...], Fraction]:
    """Exact law of the decomposed composition of a random tree.

    The tree law comes from enumerating every growth history (all gap
    choices for m-ary search trees, all attachment choices for preferential
    attachment), independently of the urn's transition table.  ``size`` is
    the number of keys or nodes.
    """
    meta = u.meta
    mode = IsoMode.coerce(meta.get("mode", "ordered"))
    labels = u.labels()
    index = {lab: i for i, lab in enumerate(labels)}
    living = set(labels)
    out: dict[tuple[Fraction, ...], Fraction] = {}
    if meta["model"] == "mst-fringe":
        m = meta["m"]
        dist = {str(MstTree.empty(m)): (MstTree.empty(m), Fraction(1))}
        for _ in range(size):
            nxt: dict[str, tuple[MstTree, Fraction]] = {}
            for t, p in dist.values():
                g = t.gaps
                for gap in range(g):
                    s = insert_key(t, gap)
                    key = str(s)
                    old = nxt.get(key, (s, Fraction(0)))[1]
                    nxt[key] = (s, old + p / g)
            dist = nxt
        for t, p in dist.values():
            vec = [Fraction(0)] * u.q
            for key, c in _decompose_mst(t.root, living, mode).items():
                vec[index[key]] += c
            y = tuple(vec)
            out[y] = out.get(y, Fraction(0)) + p
        return out
    if meta["model"] == "pa-fringe":
        w = PaWeights.make(Fraction(meta["chi"]), Fraction(meta["rho"]))
        star = meta["star"]
        for enc, p in pa_size_distribution(w, size, IsoMode.ORDERED).items():
            found, dead = _decompose_pa(parse_pa(enc).root, living, mode, w)
            vec = [Fraction(0)] * u.q
            for key, c in found.items():
                vec[index[key]] += c
            vec[star] += dead
            y = tuple(vec)
            out[y] = out.get(y, Fraction(0)) + p
        return out
    raise ValueError(f"no tree model behind urn {meta.get('model')!r}")


def initial_composition(u: UrnSpec) -> tuple[Fraction, ...]:
    """Composition of the smallest tree: one external node or one single node."""
    vec = [Fraction(0)] * u.q
    model = u.meta.get("model")
    if model == "mst-fringe":
        vec[u.index("0")] = Fraction(1)
    elif model == "pa-fringe":
        vec[u.index("()")] = Fraction(1)
    else:
        raise ValueError(f"no tree model behind urn {model!r}")
    return tuple(vec)
