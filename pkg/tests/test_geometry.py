from fractions import Fraction
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from mixedkan import geometry as G
from mixedkan.errors import ConfigurationError


def brute_fixed(n, qmax):
    """Rational points of T^2 with denominator <= qmax fixed by A^n."""
    out = set()
    for q in range(1, qmax + 1):
        for i in range(q):
            for j in range(q):
                p = (Fraction(i, q), Fraction(j, q))
                if G.is_fixed(p, n):
                    out.add(p)
    return sorted(out)


def test_cat_power_examples():
    assert G.cat_power(1)[0] == ((2, 1), (1, 1))
    assert G.cat_power(2)[0] == ((5, 3), (3, 2))
    m, lam = G.cat_power(6)
    assert m == ((233, 144), (144, 89))
    assert lam == pytest.approx(G.LAMBDA**6)


@pytest.mark.parametrize("n", [0, -1, 1.5])
def test_cat_power_rejects_nonpositive(n):
    with pytest.raises(ValueError):
        G.cat_power(n)


def test_cat_power_overflow_guard():
    with pytest.raises(ValueError):
        G.cat_power(80)


@pytest.mark.parametrize("n, count", [(1, 1), (2, 5), (3, 16)])
def test_fixed_points_match_brute_force(n, count):
    pts = G.fixed_points(n)
    assert len(pts) == count == G.fixed_point_count(n)
    # every fixed point of A^n has denominator dividing the count
    assert pts == brute_fixed(n, count)


@given(st.integers(1, 12))
def test_fixed_points_are_fixed_and_distinct(n):
    pts = G.fixed_points(n)
    assert len(set(pts)) == len(pts) == G.fixed_point_count(n)
    assert all(G.is_fixed(p, n) for p in pts[:50])


def test_eigenframe():
    A = np.array([[2.0, 1.0], [1.0, 1.0]])
    f = G.FRAME
    np.testing.assert_allclose(A @ f.v_u, G.LAMBDA * f.v_u, rtol=1e-14)
    np.testing.assert_allclose(A @ f.v_s, f.v_s / G.LAMBDA, rtol=1e-14, atol=1e-16)
    assert abs(f.v_u @ f.v_s) < 1e-16


coord = st.floats(-3, 3, allow_nan=False)


@given(coord, coord, coord, coord)
def test_torus_distance_symmetric_and_bounded(a, b, c, d):
    x, y = np.array([a, b]), np.array([c, d])
    dist = float(G.torus_distance(x, y))
    assert dist == pytest.approx(float(G.torus_distance(y, x)))
    assert 0.0 <= dist <= math.sqrt(0.5) + 1e-12
    assert float(G.torus_distance(x, x + np.array([2.0, -1.0]))) < 1e-12


@given(st.floats(-5, 5), st.floats(-5, 5))
def test_circle_distance(a, b):
    d = float(G.circle_distance(a, b))
    assert 0.0 <= d <= 1.0
    assert float(G.circle_distance(a, a + 2.0)) < 1e-12


@given(st.floats(-0.1, 0.1), st.floats(-0.1, 0.1))
def test_leaf_round_trip(a, b):
    anchor = np.array([0.2, 0.4])
    x = G.leaf_point(anchor, (a, b))
    back = G.leaf_coords(x, anchor, 0.035)
    assert back is not None
    assert back[0] == pytest.approx(a, abs=1e-13)
    assert back[1] == pytest.approx(b, abs=1e-13)


def test_leaf_coords_outside_box():
    assert G.leaf_coords(np.array([0.5, 0.5]), np.array([0.0, 0.0]), 0.01) is None


def test_desk_anchor_selection():
    anchors = G.select_anchors(G.fixed_points(2), 0.035)
    assert anchors.ordered() == (
        (Fraction(0), Fraction(0)),
        (Fraction(1, 5), Fraction(2, 5)),
        (Fraction(2, 5), Fraction(4, 5)),
        (Fraction(3, 5), Fraction(1, 5)),
    )
    pts = anchors.floats()
    for i in range(4):
        for j in range(i + 1, 4):
            assert G.torus_distance(pts[i], pts[j]) > 0.35
            assert G.boxes_disjoint(pts[i], pts[j], 5 * 0.035)


def test_anchor_selection_fails_for_large_delta():
    with pytest.raises(ConfigurationError, match="anchor-separation"):
        G.select_anchors(G.fixed_points(2), 0.2)


def test_anchor_dict_round_trip():
    anchors = G.select_anchors(G.fixed_points(2), 0.035)
    assert G.AnchorSet.from_dict(anchors.as_dict()) == anchors


def test_box_distance_zero_inside():
    a = np.array([0.3, 0.3])
    assert G.box_distance(a, a, 0.1) == 0.0
    far = G.leaf_point(a, (0.3, 0.0))
    assert G.box_distance(far, a, 0.1) == pytest.approx(0.2, abs=1e-12)


def test_heteroclinic_point_on_both_leaves():
    anchors = G.select_anchors(G.fixed_points(2), 0.035)
    _, s1 = G.cat_power(6)
    h = G.heteroclinic_point(anchors, 0.035, 0.15, s1)
    q1 = anchors.floats()[2]
    q2 = anchors.floats()[3]
    np.testing.assert_allclose(G.min_translate(h.point - G.leaf_point(q1, (h.t, 0.0))), 0, atol=1e-12)
    np.testing.assert_allclose(G.min_translate(h.point - G.leaf_point(q2, (0.0, h.s))), 0, atol=1e-12)
    # the A^{n1}-image along the stable leaf matches the exact linear image
    A6 = np.array(G.cat_power(6)[0], dtype=float)
    np.testing.assert_allclose(
        G.min_translate(G.wrap(A6 @ h.point) - h.forward(1, s1, q2)), 0, atol=1e-9
    )
    assert G.orbit_isolation(h, 0.15, s1, q1, q2, 50) > 0.15
    assert min(G.box_distance(h.point, b, 5 * 0.035) for b in anchors.floats()) > 0.15
