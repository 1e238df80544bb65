import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from conftest import fd_jacobian, jacobian_rel_error
from mixedkan import kernels as K
from mixedkan.errors import ConfigurationError, UncertifiedParamsError
from mixedkan.experiments.sampling import stratified_points
from mixedkan.certify import perturbation_c1
from mixedkan.geometry import FRAME
from mixedkan.presets import desk_preset
from mixedkan.system import (
    Df,
    Dftilde,
    Dg,
    GPoint,
    MPoint,
    SystemParams,
    f_eval,
    f_step_with_partials,
    fixed_point_targets,
    ftilde_eval,
    g_eval,
    g_step_with_growth,
    gtilde_eval,
    require_certified,
    semiconjugacy_residual,
)

P = desk_preset()

unit = st.floats(0.0, 1.0, exclude_max=True, allow_nan=False)
torus = st.tuples(unit, unit)


def point(x, y, z):
    return MPoint(np.array([x], dtype=float), np.array([y], dtype=float), np.array([z], dtype=float))


def test_fixed_points_are_fixed():
    for label, p, _ in fixed_point_targets(P):
        q = f_eval(p, P)
        np.testing.assert_allclose(q.x, p.x, atol=1e-12, err_msg=label)
        np.testing.assert_allclose(q.z, p.z, atol=1e-12, err_msg=label)
        assert q.y[0] == p.y[0]


def test_fixed_point_jacobians():
    for label, p, diag in fixed_point_targets(P):
        J = Df(p, P)[0]
        np.testing.assert_allclose(np.diag(J), diag, rtol=1e-9, err_msg=label)
        assert np.max(np.abs(J - np.diag(np.diag(J)))) <= 1e-12


@given(torus, torus)
def test_sections_invariant(x, z):
    for y in (0.0, 1.0):
        assert f_eval(point(x, y, z), P).y[0] == y
        if not np.any(np.abs(x - P.r.point) < 0.02):
            assert ftilde_eval(point(x, y, z), P).y[0] == y


@given(torus)
def test_ftilde_preserves_section_one(x):
    assert ftilde_eval(point(x, 1.0, (0.3, 0.3)), P).y[0] == 1.0


def test_ftilde_kicks_section_zero_at_chart_origin():
    p = point(P.r.point, 0.0, (0.5, 0.5))
    h = ftilde_eval(p, P)
    # r lies outside every anchor box, so Q leaves the kicked fibre alone
    assert h.y[0] == pytest.approx(P.ell**-3, rel=1e-15)


@given(torus, st.floats(0, 2, exclude_max=True), torus)
def test_semiconjugacy(x, y, z):
    p = point(x, y, z)
    assert semiconjugacy_residual(p, P)[0] <= 1e-12
    assert semiconjugacy_residual(p, P, perturbed=True)[0] <= 1e-12


def test_step_helpers_agree_with_maps():
    pts = stratified_points(P, 2000, seed=5)
    x, y, _ = g_step_with_growth(P, pts.x, pts.y)
    q = g_eval(pts.project(), P)
    np.testing.assert_array_equal(x, q.x)
    np.testing.assert_array_equal(y, q.y)
    x, y, _ = g_step_with_growth(P, pts.x, pts.y, perturbed=True)
    q = gtilde_eval(pts.project(), P)
    np.testing.assert_array_equal(y, q.y)
    x, y, z, parts = f_step_with_partials(P, pts.x, pts.y, pts.z)
    q = f_eval(pts, P)
    np.testing.assert_allclose(y, q.y, atol=1e-15)
    np.testing.assert_allclose(z, q.z, atol=1e-15)
    np.testing.assert_array_equal(parts["Qc"], Df(pts, P)[:, 2, 2])


def test_g_growth_is_log_of_Dg_block():
    pts = stratified_points(P, 2000, seed=6, factor=True)
    _, _, growth = g_step_with_growth(P, pts.x, pts.y)
    np.testing.assert_allclose(growth, np.log(Dg(pts, P)[:, 1, 1]), atol=1e-15)


def test_jacobian_structure():
    pts = stratified_points(P, 3000, seed=7)
    J = Df(pts, P)
    # block lower triangular: E^uu and E^ss, E^s rows are pure scalings
    assert np.all(J[:, 0, 1:] == 0)
    assert np.all(J[:, 3, [0, 1, 2, 4]] == 0)
    assert np.all(J[:, 4, :4] == 0)
    # det Df = dP/dd * dQ/dc: the base factors cancel
    det = np.linalg.det(J)
    np.testing.assert_allclose(det, J[:, 1, 1] / P.sigma0 * J[:, 2, 2], rtol=1e-9)
    assert np.all(J[:, 2, 2] > 0) and np.all(J[:, 1, 1] > 0)


def test_Df_matches_finite_differences():
    pts = stratified_points(P, 400, seed=8)
    err = jacobian_rel_error(Df(pts, P), fd_jacobian(lambda q: f_eval(q, P), pts))
    assert err.max() <= 1e-6


def test_Dftilde_matches_finite_differences():
    pts = stratified_points(P, 400, seed=9)
    err = jacobian_rel_error(Dftilde(pts, P), fd_jacobian(lambda q: ftilde_eval(q, P), pts))
    assert err.max() <= 1e-6


def test_perturbation_c1_size():
    # r sits off the anchor boxes, so Df~ - Df reduces to the TS row of DH - I
    rng = np.random.default_rng(0)
    n = 4000
    w = 1.1 * P.delta / P.ell
    a, b, c = rng.uniform(-w, w, (3, n))
    x = P.r.point + a[:, None] * FRAME.v_u + b[:, None] * FRAME.v_s
    p = MPoint(x, c, rng.uniform(0, 1, (n, 2)))
    norm = np.linalg.norm(Dftilde(p, P) - Df(p, P), ord=2, axis=(-2, -1))
    closed, true = perturbation_c1(P)
    assert norm.max() <= true * (1 + 1e-9)
    assert norm.max() >= 0.9 * true
    assert true <= closed <= np.sqrt(2) * K.psi_max_slope(P.delta) / P.ell**2 * (1 + 1e-12)


def test_params_round_trip():
    d = P.to_dict()
    Q = SystemParams.from_dict(d)
    assert Q.fingerprint() == P.fingerprint()
    np.testing.assert_allclose(Q.r.point, P.r.point, atol=1e-15)


def test_evolve_drops_certificate():
    cert = P.with_certificate("abc")
    assert cert.evolve(beta=0.001).cert_hash is None
    with pytest.raises(UncertifiedParamsError):
        require_certified(P)
    require_certified(cert)


def test_perturbed_map_needs_surgery():
    bare = P.evolve(r=None).with_certificate("abc")
    with pytest.raises(ConfigurationError):
        ftilde_eval(point((0.1, 0.1), 0.5, (0.1, 0.1)), bare)
    with pytest.raises(ConfigurationError):
        require_certified(bare, surgery=True)


@given(arrays(float, 2, elements=unit), st.floats(0, 2, exclude_max=True))
def test_point_wrapping(x, y):
    g = GPoint(x + 3.0, y - 4.0)
    assert np.all((g.x >= 0) & (g.x < 1))
    assert 0.0 <= float(g.y) < 2.0
