"""Shared analyses; the exact computations are built once per session."""

from __future__ import annotations

import pytest

from urnlab import IsoMode, PaWeights, analyze_urn, build_mst_fringe_urn, build_pa_fringe_urn, build_protected_urn
from urnlab.mst import enumerate_mst_shapes
from urnlab.pa import enumerate_pa_shapes

from reference import PA_POINTS, QUATERNARY_TARGETS

TERNARY_TARGETS = enumerate_mst_shapes(3, 4, IsoMode.UNORDERED)


def pa_small_targets(mode=IsoMode.UNORDERED):
    return [s for k in (1, 2, 3) for s in enumerate_pa_shapes(k, mode)]


@pytest.fixture(scope="session")
def ternary():
    """m = 3, every fringe subtree with four keys, unordered."""
    return analyze_urn(build_mst_fringe_urn(3, TERNARY_TARGETS, IsoMode.UNORDERED))


@pytest.fixture(scope="session")
def quaternary():
    """m = 4 with two ordered targets of five and six keys (nine types)."""
    return analyze_urn(build_mst_fringe_urn(4, QUATERNARY_TARGETS, IsoMode.ORDERED))


@pytest.fixture(scope="session")
def quaternary_small():
    """m = 4 single-node urn (four types)."""
    return analyze_urn(build_mst_fringe_urn(4, ["3(0,0,0,0)"], IsoMode.ORDERED))


@pytest.fixture(scope="session")
def pa_small():
    """Attachment urns for all shapes with at most three nodes, keyed by kappa."""
    out = {}
    for key, (chi, rho) in PA_POINTS.items():
        w = PaWeights.make(chi, rho)
        out[key] = analyze_urn(build_pa_fringe_urn(w, pa_small_targets(), IsoMode.UNORDERED))
    return out


@pytest.fixture(scope="session")
def protected():
    return {m: analyze_urn(build_protected_urn(m)) for m in (2, 3, 4)}
