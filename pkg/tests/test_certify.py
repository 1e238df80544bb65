import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from mixedkan import kernels as K
from mixedkan.certify import (
    ConeSpec,
    TAU3,
    certify_params,
    cone_certify,
    cone_ratios,
    growth_sandwich_check,
    kernel_ranges,
    perturbation_c1,
    search_aperture,
    ts_exponent_integral,
    _kappa_bound,
)
from mixedkan.errors import SearchExhaustedError
from mixedkan.presets import desk_preset, paper_preset
from mixedkan.system import TS, UU

from test_kernels import TS_INTEGRAL_DESK

DESK = desk_preset()


@pytest.fixture(scope="module")
def desk_structural():
    return certify_params(DESK)


def test_desk_structural_checks_pass(desk_structural):
    rep = desk_structural
    assert rep.passed, rep.failures()
    strict = [c for c in rep.checks if c.name not in {"welldefined2", "anchors-fixed", "anchor-boxes"}]
    assert all(c.margin > 0 for c in strict), [(c.name, c.margin) for c in strict if c.margin <= 0]


def test_paper_structural_checks_pass():
    rep = certify_params(paper_preset())
    assert rep.passed, rep.failures()


def test_symmetry_integral_matches_oracle(desk_structural):
    value = desk_structural["symmetry-integral"].value
    assert value == pytest.approx(TS_INTEGRAL_DESK, abs=1e-12)
    # the same value through the section-1 charts
    assert ts_exponent_integral(DESK, section=1) == pytest.approx(TS_INTEGRAL_DESK, abs=1e-12)


def test_large_beta_fails_named_checks():
    rep = certify_params(DESK.evolve(beta=0.4))
    assert not rep.passed
    assert {"beta-window", "beta-size"} <= set(rep.failures())


def test_coarse_grid_pads_are_larger(desk_structural):
    coarse = certify_params(DESK, resolution=2001)
    for c in desk_structural.checks:
        if c.pad > 0:
            assert coarse[c.name].pad >= c.pad


def test_kernel_ranges_converge():
    fine = kernel_ranges(DESK.delta, 40001)
    coarse = kernel_ranges(DESK.delta, 2001)
    assert fine.psi_slope == pytest.approx(K.psi_max_slope(DESK.delta), rel=1e-6)
    assert coarse.psi_slope <= fine.psi_slope * (1 + 1e-12)


def test_perturbation_c1_closed_form():
    closed, true = perturbation_c1(DESK)
    exact = math.sqrt(2.0) * K.psi_max_slope(DESK.delta) / DESK.ell**2
    assert closed == pytest.approx(exact, rel=1e-6)
    assert true <= closed


def test_report_hash_tracks_params(desk_structural):
    again = certify_params(DESK)
    assert again.hash == desk_structural.hash
    assert certify_params(DESK.evolve(beta=0.007)).hash != desk_structural.hash
    js = desk_structural.to_json()
    assert js["engineering_grade"] is True and js["passed"] is True


# -- cones ---------------------------------------------------------------------

def test_identity_cone_is_not_contracted():
    dirs = np.array([[1.0], [-1.0]])
    r = cone_ratios(np.eye(2)[None], ConeSpec((0,), (1,), 0.5), dirs)
    assert np.allclose(r, 1.0)


@given(st.floats(0.5, 10), st.floats(-3, 3), st.floats(0.01, 2), st.floats(0.05, 4))
def test_kappa_bound_dominates_sample(e, f, g, alpha):
    M = np.array([[[e, 0.0], [f, g]]])
    cone = ConeSpec((0,), (1,), alpha)
    kap = cone_ratios(M, cone, np.array([[1.0], [-1.0]])).max()
    assert kap <= _kappa_bound(M, cone)[0] * (1 + 1e-12)
    # lower-triangular 2x2: exact worst ratio (|f| + alpha g) / (alpha e)
    assert kap == pytest.approx((abs(f) + alpha * g) / (alpha * e), rel=1e-12)


def test_desk_cone_contracts_and_tiny_aperture_fails():
    good = cone_certify(ConeSpec(*TAU3, DESK.tau3), "backward", "f", 4000, DESK)
    assert good.passed and good.invariant_subspace
    bad = cone_certify(ConeSpec(*TAU3, 1e-6), "backward", "f", 4000, DESK)
    assert not bad.passed


def test_leaking_cone_is_flagged():
    # uu + ts is not Df-invariant: the P-action feeds both into E^u
    res = cone_certify(ConeSpec((UU,), (TS,), 1.0), "forward", "f", 2000, DESK)
    assert not res.invariant_subspace and not res.passed


def test_search_aperture_exhausts():
    with pytest.raises(SearchExhaustedError):
        search_aperture([(TAU3[0], TAU3[1], "backward", "f")], DESK, samples=2000, grid=[1e-6])


@pytest.mark.parametrize("kind", ["uu", "u", "ts", "s"])
def test_growth_sandwich_small(kind):
    assert growth_sandwich_check(kind, 10, 200, DESK).passed
