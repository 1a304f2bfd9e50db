import json
import math
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import reference as ref
from urnlab import (
    IsoMode,
    PaWeights,
    UrnSpec,
    build_mst_degree_urn,
    build_mst_fringe_urn,
    build_pa_degree_urn,
    build_pa_fringe_urn,
    build_protected_urn,
    validate_urn,
)
from urnlab.mst import enumerate_mst_shapes
from urnlab.pa import enumerate_pa_shapes
from urnlab.urns import live_indices

U = IsoMode.UNORDERED
O = IsoMode.ORDERED


def second_moment(u, i):
    q = u.q
    return [[sum(o.prob * o.delta[r] * o.delta[s] for o in u.outcomes[i]) for s in range(q)] for r in range(q)]


def outer_mix(parts):
    q = len(parts[0][1])
    return [[sum(Fraction(w) * b[r] * b[s] for w, b in parts) for s in range(q)] for r in range(q)]


def small_pa(chi, rho, mode=U):
    targets = [s for k in (1, 2, 3) for s in enumerate_pa_shapes(k, mode)]
    return build_pa_fringe_urn(PaWeights.make(chi, rho), targets, mode)


def test_ternary_urn():
    u = build_mst_fringe_urn(3, enumerate_mst_shapes(3, 4, U), U)
    assert u.labels() == ["0", "1", "2(0,0,0)", "2(1,0,0)", "2(1,1,0)", "2(2(0,0,0),0,0)"]
    assert u.intensity().tolist() == ref.TERNARY_A
    assert u.activities == [1, 2, 3, 4, 5, 5]
    assert second_moment(u, 4) == outer_mix(ref.TERNARY_B5)


def test_quaternary_urn():
    u = build_mst_fringe_urn(4, ref.QUATERNARY_TARGETS, O)
    assert u.q == 9
    assert u.intensity().tolist() == ref.QUATERNARY_A
    assert u.activities == [1, 2, 3, 4, 5, 5, 6, 6, 7]
    # drawing type 5: type 7 w.p. 1/5, type 8 w.p. 2/5, or two each of types 1 and 2
    outs = {tuple(int(d) for d in o.delta): o.prob for o in u.outcomes[4]}
    assert outs == {
        (0, 0, 0, 0, -1, 0, 1, 0, 0): Fraction(1, 5),
        (0, 0, 0, 0, -1, 0, 0, 1, 0): Fraction(2, 5),
        (2, 2, 0, 0, -1, 0, 0, 0, 0): Fraction(2, 5),
    }
    assert second_moment(u, 6) == outer_mix(ref.QUATERNARY_B7)


@pytest.mark.parametrize("rho", [1, Fraction(1, 2), 2, Fraction(5, 2), 7])
def test_attachment_urn_with_unit_chi(rho):
    u = small_pa(1, rho)
    assert u.labels() == ["()", "(())", "((()))", "(()())", "*"]
    assert u.intensity().tolist() == ref.pa_intensity_chi_one(rho)
    r = Fraction(rho)
    probs = sorted(o.prob for o in u.outcomes[2])
    assert probs == sorted([(1 + r) / (2 + 3 * r)] * 2 + [r / (2 + 3 * r)])


@pytest.mark.parametrize("chi,rho", [(1, 1), (1, 3), (0, 1), (-1, 2), (-1, 4)])
def test_small_attachment_urns(chi, rho):
    w = PaWeights.make(chi, rho)
    single = build_pa_fringe_urn(w, ["()"], U)
    assert single.intensity().tolist() == [[0, 1], [w.rho * (w.chi + w.rho), w.chi]]
    deg = build_pa_degree_urn(w, 1)
    c, p = w.chi, w.rho
    full = [[0, p + c, 1], [p, -p - c, 0], [0, (p + c) * (p + 2 * c), c]]
    if w.max_children == 2:
        # nodes with two children weigh nothing, so there is no star
        assert deg.labels() == ["deg:0", "deg:1"]
        full = [row[:2] for row in full[:2]]
    assert deg.intensity().tolist() == full


def test_degree_urn_respects_cap():
    w = PaWeights.make(-1, 3)
    assert build_pa_degree_urn(w, 1).labels()[-1] == "*"
    assert build_pa_degree_urn(w, 2).labels() == ["deg:0", "deg:1", "deg:2"]
    with pytest.raises(ValueError):
        build_pa_degree_urn(w, 3)


@pytest.mark.parametrize("m,count", [(2, 5), (3, 19), (4, 69)])
def test_protected_type_count(m, count):
    u = build_protected_urn(m)
    assert u.q == count == math.comb(2 * m, m) - 1
    assert len(live_indices(u)) == count - 1


def _random_mst_urn(rng, m, mode):
    pool = [s for k in range(1, 7) for s in enumerate_mst_shapes(m, k, mode)]
    return build_mst_fringe_urn(m, rng.sample(pool, rng.randint(1, 3)), mode)


def _random_pa_urn(rng, w, mode):
    pool = [s for k in range(1, 6) for s in enumerate_pa_shapes(k, mode)]
    if w.max_children is not None:
        pool = [t for t in pool if all(len(v.children) <= w.max_children for v in t.nodes())]
    return build_pa_fringe_urn(w, rng.sample(pool, rng.randint(1, 3)), mode)


@settings(max_examples=30, deadline=None)
@given(st.integers(2, 5), st.sampled_from([O, U]), st.integers(0, 10**9))
def test_mst_activity_is_conserved(m, mode, seed):
    u = _random_mst_urn(random.Random(seed), m, mode)
    for i in live_indices(u):
        for o in u.outcomes[i]:
            assert sum(a * d for a, d in zip(u.activities, o.delta)) == 1
    assert validate_urn(u).ok


@settings(max_examples=30, deadline=None)
@given(st.sampled_from([(1, 1), (0, 1), (-1, 2), (-1, 3), (1, Fraction(3, 2))]), st.sampled_from([O, U]), st.integers(0, 10**9))
def test_pa_activity_increases_by_total_weight(weights, mode, seed):
    w = PaWeights.make(*weights)
    u = _random_pa_urn(random.Random(seed), w, mode)
    for i in live_indices(u):
        for o in u.outcomes[i]:
            assert sum(a * d for a, d in zip(u.activities, o.delta)) == w.chi + w.rho
    assert validate_urn(u).ok


@pytest.mark.parametrize(
    "u",
    [
        build_protected_urn(3),
        build_mst_degree_urn(4),
        build_pa_degree_urn(PaWeights.make(1, 1), 3),
        build_pa_degree_urn(PaWeights.make(-1, 3), 2),
    ],
    ids=["protected-3", "mst-degree-4", "pa-degree", "pa-degree-capped"],
)
def test_other_builders_validate(u):
    rep = validate_urn(u)
    assert rep.ok, rep.summary()


def test_json_round_trip():
    for u in (build_protected_urn(2), small_pa(1, 1), build_mst_fringe_urn(3, ["2(1,0,0)"], U)):
        text = json.dumps(u.to_json())
        back = UrnSpec.from_json(text)
        assert back.labels() == u.labels()
        assert back.activities == u.activities
        assert back.intensity() == u.intensity()
        assert back.meta == u.meta


def test_validation_flags_broken_urn():
    u = build_protected_urn(2)
    bad = UrnSpec(u.types, u.activities, [outs[:1] for outs in u.outcomes], u.meta)
    rep = validate_urn(bad)
    assert not rep.ok
    assert not rep.checks["probabilities"][0]
