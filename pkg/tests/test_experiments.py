import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from mixedkan.errors import ConfigurationError, UncertifiedParamsError
from mixedkan.experiments import (
    OrbitSpec,
    basin_map,
    birkhoff_average,
    channel_crossing,
    collapse_experiment,
    heteroclinic_check,
    lyap_cu_f,
    lyap_spectrum_full,
    lyap_TS_f,
    lyap_TS_g,
    manifold_check,
    unstable_density,
    ustate_sampler,
)
from mixedkan.experiments.basins import channel_starts
from mixedkan.experiments.lyapunov import random_starts
from mixedkan.experiments.orbits import classify_orbits, first_passage, g_orbit
from mixedkan.experiments.parallel import run_chunks
from mixedkan.experiments.rng import sample_range, uniforms
from mixedkan.experiments.sampling import stratified_points
from mixedkan.presets import desk_preset
from mixedkan.system import GPoint, MPoint, g_step_with_growth


def fixed(params, name, y):
    q = params.anchor(name)
    return MPoint(q[None], np.array([float(y)]), q[None])


# -- reproducible streams ------------------------------------------------------

@given(st.integers(0, 2**32), st.integers(0, 5000), st.integers(1, 300))
def test_rng_rows_depend_only_on_index(seed, start, count):
    whole = sample_range(seed, 0, start + count, 3, stream=4)
    part = sample_range(seed, start, count, 3, stream=4)
    np.testing.assert_array_equal(whole[start:], part)


def test_rng_streams_differ():
    assert not np.array_equal(uniforms(1, [0, 1], 2, 0), uniforms(1, [0, 1], 2, 1))


def test_run_chunks_order_independent_of_workers():
    fn = lambda start, count: np.arange(start, start + count)
    a = run_chunks(fn, 10, 3, workers=1)
    assert [list(x) for x in a] == [[0, 1, 2], [3, 4, 5], [6, 7, 8], [9]]


def test_basin_map_same_under_two_workers(desk, monkeypatch):
    spec = OrbitSpec(seed=3, samples=2500)
    one = basin_map("f", spec, [20, 60], desk)
    monkeypatch.setenv("MIXEDKAN_WORKERS", "2")
    two = basin_map("f", spec, [20, 60], desk)
    assert one.to_json() == two.to_json()


def test_stratified_points_deterministic():
    p = desk_preset()
    a = stratified_points(p, 500, seed=2)
    b = stratified_points(p, 500, seed=2)
    np.testing.assert_array_equal(a.x, b.x)
    assert np.all((a.x >= 0) & (a.x < 1)) and np.all((a.y >= 0) & (a.y < 2))


@pytest.mark.parametrize("kw", [dict(n=0), dict(samples=0), dict(burn_in=-1)])
def test_orbit_spec_validation(kw):
    with pytest.raises(ConfigurationError):
        OrbitSpec(**kw)


# -- compiled orbit loops vs the numpy step ---------------------------------------

def _numpy_classify(params, x, y, horizons, perturbed, threshold):
    acc = np.zeros(len(y))
    out, t = [], 0
    for h in horizons:
        while t < h:
            acc += np.cos(np.pi * y)
            x, y, _ = g_step_with_growth(params, x, y, perturbed)
            t += 1
        out.append(((acc / h >= threshold).sum(), (acc / h <= -threshold).sum()))
    return np.array(out)


@pytest.mark.parametrize("perturbed", [False, True])
def test_compiled_orbit_matches_numpy_step(perturbed):
    p = desk_preset()
    q = stratified_points(p, 3000, seed=11, factor=True)
    x, y = q.x, q.y
    for steps in (1, 2, 3):
        x, y, _ = g_step_with_growth(p, x, y, perturbed)
        X, Y = g_orbit(p, q.x, q.y, steps, perturbed)
        np.testing.assert_array_equal(X, x)
        np.testing.assert_allclose(Y, y, rtol=0, atol=1e-12)


def test_compiled_classifier_matches_numpy():
    p = desk_preset()
    x, y = random_starts(OrbitSpec(seed=4, samples=2000), 0, 2000, factor=True)
    fast = classify_orbits(p, x, y, [5, 20], True, 0.5)
    slow = _numpy_classify(p, x, y, [5, 20], True, 0.5)
    assert np.abs(fast - slow).max() <= 2


def test_first_passage_matches_numpy():
    p = desk_preset()
    x, y = random_starts(OrbitSpec(seed=5, samples=1000), 0, 1000, factor=True)
    t = first_passage(p, x, y, 30, False, 0.5)
    crossed = np.full(len(y), -1)
    xx, yy = x, y
    for s in range(1, 31):
        xx, yy, _ = g_step_with_growth(p, xx, yy)
        hit = (np.cos(np.pi * yy) <= -0.5) & (crossed < 0)
        crossed[hit] = s
    assert np.mean(t == crossed) >= 0.995


# -- guards ----------------------------------------------------------------------

def test_uncertified_params_refused():
    p = desk_preset()
    spec = OrbitSpec(n=10, samples=10)
    for call in (lambda: lyap_TS_g(0, spec, p), lambda: basin_map("f", spec, [5], p),
                 lambda: lyap_cu_f(0, spec, p), lambda: heteroclinic_check(p)):
        with pytest.raises(UncertifiedParamsError):
            call()


def test_zero_length_segment_rejected(desk):
    with pytest.raises(ConfigurationError):
        ustate_sampler("g", 0, ((0.3, 0.3), 0.0), 10, 8, desk)


def test_collapse_needs_surgery(desk):
    bare = desk.evolve(r=None).with_certificate(desk.cert_hash)
    with pytest.raises(ConfigurationError):
        collapse_experiment(bare, OrbitSpec(n=10, samples=10), [5])


@pytest.mark.parametrize("horizons", [[], [10, 5], [0, 3], [4, 4]])
def test_bad_horizons(desk, horizons):
    with pytest.raises(ConfigurationError):
        basin_map("f", OrbitSpec(samples=10), horizons, desk)


# -- Birkhoff averages and exponents at known points ---------------------------------

def test_birkhoff_constant_and_section(desk):
    spec = OrbitSpec(n=40, samples=50)
    x, y, z = random_starts(spec, 0, 50, section=0)
    p0 = MPoint(x, y, z)
    ones = birkhoff_average("f", lambda p: np.ones_like(p.y), p0, spec, desk)
    np.testing.assert_array_equal(ones, 1.0)
    ys = birkhoff_average("f", lambda p: p.y, p0, spec, desk)
    np.testing.assert_array_equal(ys, 0.0)
    ys = birkhoff_average("g", lambda p: p.y, GPoint(x, np.ones(50)), spec, desk)
    np.testing.assert_array_equal(ys, 1.0)


def test_fixed_point_exponents(desk):
    # p1 = (0, 0) is exact in floats; q1 = (2/5, 4/5) is not, and its float
    # orbit leaves the plateau of the bump after ~7 steps (error x sigma1 per
    # step), so q1 orbits are kept short
    long, short = OrbitSpec(n=50, samples=2), OrbitSpec(n=5, samples=2)
    cu = lyap_cu_f(0, long, desk, start=fixed(desk, "p1", 0))
    assert cu.lambda_hat == pytest.approx(math.log(0.75), abs=1e-12)
    cu = lyap_cu_f(0, short, desk, start=fixed(desk, "q1", 0))
    assert cu.lambda_hat == pytest.approx(math.log(desk.sigma0), abs=1e-12)
    ts = lyap_TS_f(0, long, desk, start=fixed(desk, "p1", 0))
    assert ts.method_a.lambda_hat == pytest.approx(math.log(0.5), abs=1e-12)
    assert ts.method_b.lambda_hat == pytest.approx(math.log(0.5), abs=1e-9)
    ts = lyap_TS_f(1, short, desk, start=fixed(desk, "q1", 1))
    assert ts.method_a.lambda_hat == pytest.approx(math.log(1.5), abs=1e-12)
    assert ts.method_b.lambda_hat == pytest.approx(math.log(1.5), abs=1e-9)


def test_spectrum_at_fixed_point(desk):
    exps = lyap_spectrum_full(fixed(desk, "p1", 0), 60, desk)[0]
    s0, s1 = math.log(desk.sigma0), math.log(desk.sigma1)
    np.testing.assert_allclose(exps, [s1, math.log(0.75), math.log(0.5), -s0, -s1], atol=1e-10)
    exps = lyap_spectrum_full(fixed(desk, "q1", 1), 5, desk)[0]
    np.testing.assert_allclose(exps, [s1, s0, math.log(1.5), -s0, -s1], atol=1e-10)


def test_lyap_TS_g_small_run_is_deterministic(desk):
    spec = OrbitSpec(seed=2, n=200, samples=300)
    a = lyap_TS_g(0, spec, desk)
    b = lyap_TS_g(0, spec, desk)
    assert a.to_json() == b.to_json()
    assert a.oracle < 0 and math.isfinite(a.stderr)


# -- basins, channel, manifolds, u-states, density -----------------------------------

def test_channel_starts_in_support(desk):
    x, y, hw = channel_starts(desk, OrbitSpec(samples=200), 200)
    assert np.all(y == 0.0)
    assert hw == pytest.approx(desk.delta / desk.ell)


def test_channel_f_never_crosses(desk):
    fr, _, times = channel_crossing(desk, OrbitSpec(seed=1, samples=500), [100, 400], False)
    assert fr == [0.0, 0.0] and times == []


def test_basin_fractions_sum_to_one(desk):
    rep = basin_map("g", OrbitSpec(seed=1, samples=600), [10, 100], desk)
    for a, b, c in zip(rep.fraction_section0, rep.fraction_section1, rep.fraction_undecided):
        assert a + b + c == pytest.approx(1.0)


def test_heteroclinic_ratios(desk):
    out = heteroclinic_check(desk, steps=6)
    inv = out["sigma1_inverse"]
    for r in out["forward_ratio"][1:] + out["backward_ratio"][1:]:
        assert r == pytest.approx(inv, rel=1e-6)


def test_manifold_check_small(desk):
    rep = manifold_check(desk, n=80, samples=4)
    assert rep.passed and rep.observed_rate <= rep.contraction_bound


def test_ustate_histogram_normalised(desk):
    rep = ustate_sampler("g", 0, ((0.31, 0.47), 0.2), 50, 8, desk, points=40)
    assert np.sum(rep.histogram) == pytest.approx(1.0)
    assert rep.fibre_mass_near_section == 1.0


def test_unstable_density_monotone(desk):
    rep = unstable_density("p1", [0.1, 0.2], [2, 4], desk, grid=6, points=500)
    cov = np.array(rep.coverage)
    assert np.all(np.diff(cov, axis=0) >= 0) and np.all(np.diff(cov, axis=1) >= 0)
