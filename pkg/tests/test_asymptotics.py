import json
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import reference as ref
from urnlab import IsoMode, PaWeights, analyze_urn, build_mst_fringe_urn, build_pa_fringe_urn, parse_mst
from urnlab.asymptotics import (
    NotNormalRegime,
    affine_project,
    cross_check_sigma_diag,
    degree_means,
    fringe_projection,
    functional_moments,
    hmu_mst,
    hmu_pa,
    mst_degree_functional,
    project,
    protected_functional,
    protected_mean,
    verify_spectrum,
)
from urnlab.exact import det, ldl_psd
from urnlab.mst import enumerate_mst_shapes
from urnlab.pa import enumerate_pa_shapes
from urnlab.urns import build_mst_degree_urn, build_pa_degree_urn

U = IsoMode.UNORDERED
O = IsoMode.ORDERED


def fr(xs):
    return [Fraction(x) for x in xs]


def test_ternary_mean_and_covariance(ternary):
    assert ternary.A.tolist() == ref.TERNARY_A
    assert list(ternary.v1) == fr(ref.TERNARY_V1)
    assert ternary.lambda1 == 1
    assert ternary.Sigma.tolist() == ref.rat_matrix(ref.TERNARY_SIGMA)
    assert ldl_psd(ternary.Sigma)[0]


def test_ternary_functionals(ternary):
    for k, (row, var) in ref.TERNARY_SIZE_ROWS.items():
        assert functional_moments(ternary, row)[1] == Fraction(var), k
    row, var = ref.TERNARY_LEAVES
    assert functional_moments(ternary, row)[1] == Fraction(var)


def test_quaternary(quaternary, quaternary_small):
    assert list(quaternary.v1) == fr(ref.QUATERNARY_V1)
    r = fringe_projection(quaternary)
    mu, gamma = project(quaternary, r)
    assert list(mu) == fr(ref.QUATERNARY_HMU)
    assert gamma.tolist() == ref.rat_matrix(ref.QUATERNARY_GAMMA)
    assert quaternary_small.Sigma.tolist() == ref.rat_matrix(ref.QUATERNARY_SMALL_SIGMA)
    big = functional_moments(quaternary, ref.QUATERNARY_LEAVES_ROW)
    small = functional_moments(quaternary_small, ref.QUATERNARY_SMALL_LEAVES_ROW)
    assert big == small == (Fraction(18, 65), Fraction(ref.QUATERNARY_LEAF_VARIANCE))


@pytest.mark.parametrize("name", ["ternary", "quaternary", "quaternary_small"])
def test_sigma_routes_agree(name, request):
    an = request.getfixturevalue(name)
    for method in ("kronecker", "blocks"):
        other = analyze_urn(an.urn, sigma_method=method)
        assert other.Sigma == an.Sigma


def test_attachment_fringe_sizes(pa_small):
    for key, an in pa_small.items():
        expected = ref.PA_SIZE_VARIANCES[key]
        for k, row in ref.PA_SIZE_ROWS.items():
            assert functional_moments(an, row)[1] == Fraction(expected[k - 1]), (key, k)


@pytest.mark.parametrize("rho", [1, Fraction(1, 2), 3])
def test_attachment_principal_vector(rho):
    w = PaWeights.make(1, rho)
    targets = [s for k in (1, 2, 3) for s in enumerate_pa_shapes(k, U)]
    an = analyze_urn(build_pa_fringe_urn(w, targets, U), with_sigma=False)
    assert list(an.v1) == ref.pa_v1_chi_one(rho)
    assert an.lambda1 == 1 + Fraction(rho)


def test_hmu_examples():
    assert hmu_mst([parse_mst("1(0,0)", 2)], 2) == (Fraction(1, 3),)
    w = PaWeights.make(0, 1)
    assert sum(hmu_pa(enumerate_pa_shapes(3, U), w, U)) == Fraction(1, 12)


@settings(max_examples=15, deadline=None)
@given(st.integers(2, 4), st.sampled_from([O, U]), st.integers(0, 10**9))
def test_projection_matches_closed_form_mean(m, mode, seed):
    rng = random.Random(seed)
    pool = [s for k in range(1, 6) for s in enumerate_mst_shapes(m, k, mode)]
    targets = rng.sample(pool, rng.randint(1, 3))
    an = analyze_urn(build_mst_fringe_urn(m, targets, mode), with_sigma=False)
    mu, _ = project(an, fringe_projection(an))
    assert mu == hmu_mst(targets, m, mode)


@settings(max_examples=15, deadline=None)
@given(st.sampled_from([(1, 1), (0, 1), (-1, 2), (1, 2)]), st.sampled_from([O, U]), st.integers(0, 10**9))
def test_projection_matches_closed_form_mean_pa(weights, mode, seed):
    w = PaWeights.make(*weights)
    rng = random.Random(seed)
    pool = [s for k in range(1, 5) for s in enumerate_pa_shapes(k, mode)]
    if w.max_children is not None:
        pool = [t for t in pool if all(len(v.children) <= w.max_children for v in t.nodes())]
    targets = rng.sample(pool, rng.randint(1, 3))
    an = analyze_urn(build_pa_fringe_urn(w, targets, mode), with_sigma=False)
    mu, _ = project(an, fringe_projection(an))
    assert mu == hmu_pa(targets, w, mode)


@pytest.mark.parametrize("m", [3, 4, 5])
def test_single_node_counts_have_a_null_direction(m):
    # gap-weighted single-node counts add up to n + 1 exactly
    singles = [str(i) for i in range(m - 1)]
    an = analyze_urn(build_mst_fringe_urn(m, singles, O))
    _, sig = project(an, fringe_projection(an, singles))
    v = [Fraction(i + 1) for i in range(m - 1)]
    assert all(x == 0 for x in sig.apply(v))


def test_targets_with_full_nodes_are_non_degenerate(ternary, quaternary):
    for an in (ternary, quaternary):
        _, sig = project(an, fringe_projection(an))
        assert det(sig) != 0


def test_floating_cross_check(quaternary, ternary):
    assert cross_check_sigma_diag(quaternary) < 1e-8
    single = analyze_urn(build_pa_fringe_urn(PaWeights.make(1, 1), ["()"], U))
    assert cross_check_sigma_diag(single) < 1e-12
    # the ternary intensity matrix has a Jordan block, so the check is skipped
    assert cross_check_sigma_diag(ternary) is None


def test_not_normal_regime():
    u = build_mst_fringe_urn(27, ["0"], O)
    with pytest.raises(NotNormalRegime) as info:
        analyze_urn(u)
    assert info.value.gamma > 0.5
    assert analyze_urn(u, with_sigma=False).Sigma is None


def test_protected(protected):
    for m, an in protected.items():
        f, const = protected_functional(an)
        mean, var = functional_moments(an, f, const)
        assert mean == protected_mean(m)
        assert var > 0
        assert ldl_psd(an.Sigma)[0]
    assert protected_mean(2) == Fraction(11, 30)
    assert protected_mean(3) == Fraction(57, 700)
    assert functional_moments(protected[2], *protected_functional(protected[2])) == (Fraction(11, 30), Fraction(29, 225))


@pytest.mark.parametrize("m", [2, 3, 4, 5])
def test_mst_degree_means(m):
    an = analyze_urn(build_mst_degree_urn(m))
    rows, consts = mst_degree_functional(an)
    mean, cov = affine_project(an, rows, consts)
    assert mean == degree_means("mst", m=m)
    assert sum(mean) == sum(degree_means("mst", m=m))
    assert ldl_psd(cov)[0]


@pytest.mark.parametrize("chi,rho,kmax", [(1, 1, 1), (0, 1, 3), (-1, 2, 1), (-1, 4, 2), (1, 3, 2)])
def test_pa_degree_means(chi, rho, kmax):
    w = PaWeights.make(chi, rho)
    an = analyze_urn(build_pa_degree_urn(w, kmax))
    assert tuple(an.mu[: kmax + 1]) == degree_means("pa", w=w, kmax=kmax)


def test_degree_covariance_closed_form():
    # nodes with no child and one child, plus the star mass, in a random recursive tree
    an = analyze_urn(build_pa_degree_urn(PaWeights.make(0, 1), 1))
    assert an.Sigma.tolist() == [
        [Fraction(1, 12), Fraction(-7, 72), Fraction(1, 72)],
        [Fraction(-7, 72), Fraction(71, 432), Fraction(-29, 432)],
        [Fraction(1, 72), Fraction(-29, 432), Fraction(23, 432)],
    ]


def test_json_output_is_exact(ternary):
    obj = json.loads(json.dumps(ternary.to_json()))
    assert obj["spectrum_identity"] is True
    s = obj["Sigma"][4][4]
    assert Fraction(int(s["num"]), int(s["den"])) == Fraction(22613, 1299375)


def test_spectrum_prediction_is_checked():
    verify_spectrum(build_mst_fringe_urn(3, ["2(1,1,0)"], U))
