"""Torus arithmetic for the cat map A = [[2,1],[1,1]]: exact powers and fixed
points, the shared eigenframe, anchor selection, leaf charts and the
heteroclinic surgery point."""

from dataclasses import dataclass
from fractions import Fraction
import math

import numpy as np

from .errors import ConfigurationError, SearchExhaustedError

CAT = ((2, 1), (1, 1))
LAMBDA = (3.0 + math.sqrt(5.0)) / 2.0
# entries beyond this make float products x -> A^n x lose exactness
MAX_ENTRY = 2**52

_TRANSLATES = np.array([(i, j) for i in (-1, 0, 1) for j in (-1, 0, 1)], dtype=float)


@dataclass(frozen=True)
class EigenFrame:
    v_u: np.ndarray
    v_s: np.ndarray
    lam: float

    def sigma(self, n):
        return self.lam**n


def eigenframe():
    # A v = lam v  <=>  v ~ (1, lam - 2); A symmetric so v_s is the rotation
    norm = math.hypot(1.0, LAMBDA - 2.0)
    v_u = np.array([1.0 / norm, (LAMBDA - 2.0) / norm])
    v_s = np.array([-v_u[1], v_u[0]])
    return EigenFrame(v_u=v_u, v_s=v_s, lam=LAMBDA)


FRAME = eigenframe()


def _matmul(m, n):
    return (
        (m[0][0] * n[0][0] + m[0][1] * n[1][0], m[0][0] * n[0][1] + m[0][1] * n[1][1]),
        (m[1][0] * n[0][0] + m[1][1] * n[1][0], m[1][0] * n[0][1] + m[1][1] * n[1][1]),
    )


def cat_power(n):
    """Exact integer matrix A^n and its leading eigenvalue lam^n."""
    if int(n) != n or n < 1:
        raise ValueError(f"cat_power needs a positive integer, got {n!r}")
    out = ((1, 0), (0, 1))
    for _ in range(int(n)):
        out = _matmul(out, CAT)
    if max(abs(v) for row in out for v in row) >= MAX_ENTRY:
        raise ValueError(f"A^{n} has entries beyond exact float range; use a smaller power")
    return out, LAMBDA**n


def fixed_point_count(n):
    m, _ = cat_power(n)
    return abs((m[0][0] - 1) * (m[1][1] - 1) - m[0][1] * m[1][0])


def fixed_points(n):
    """All fixed points of A^n on T^2 as pairs of Fractions in [0,1), sorted.

    Solutions of (A^n - I) x = m are adj(A^n - I) m / D with D the
    determinant; the solution group is generated by the two adjugate
    columns.
    """
    m, _ = cat_power(n)
    a, b, c, d = m[0][0] - 1, m[0][1], m[1][0], m[1][1] - 1
    det = a * d - b * c
    D = abs(det)
    sgn = 1 if det > 0 else -1
    g1 = ((sgn * d) % D, (-sgn * c) % D)
    g2 = ((-sgn * b) % D, (sgn * a) % D)

    seen = set()
    base = []
    cur = (0, 0)
    while cur not in seen:
        seen.add(cur)
        base.append(cur)
        cur = ((cur[0] + g1[0]) % D, (cur[1] + g1[1]) % D)
    points = set(base)
    shift = g2
    while shift not in points:
        coset = {((p[0] + shift[0]) % D, (p[1] + shift[1]) % D) for p in base}
        points |= coset
        shift = ((shift[0] + g2[0]) % D, (shift[1] + g2[1]) % D)
    assert len(points) == D, (len(points), D)
    return sorted((Fraction(u, D), Fraction(v, D)) for u, v in points)


def is_fixed(point, n):
    m, _ = cat_power(n)
    u, v = Fraction(point[0]), Fraction(point[1])
    w0 = m[0][0] * u + m[0][1] * v - u
    w1 = m[1][0] * u + m[1][1] * v - v
    return w0.denominator == 1 and w1.denominator == 1


# -- torus metric and charts ----------------------------------------------------

def wrap(x):
    """Reduce coordinates to [0, 1)."""
    out = np.mod(np.asarray(x, dtype=float), 1.0)
    return np.where(out >= 1.0, 0.0, out)


def min_translate(dx):
    """Minimal representative of a displacement, componentwise in [-1/2, 1/2)."""
    dx = np.asarray(dx, dtype=float)
    return dx - np.floor(dx + 0.5)


def torus_distance(x, y):
    """Quotient distance on T^2 (last axis holds the two coordinates)."""
    d = min_translate(np.asarray(x, dtype=float) - np.asarray(y, dtype=float))
    return np.hypot(d[..., 0], d[..., 1])


def circle_distance(y0, y1):
    """Distance on S = R/2Z."""
    d = np.mod(np.asarray(y0, dtype=float) - np.asarray(y1, dtype=float) + 1.0, 2.0) - 1.0
    return np.abs(d)


def frame_coords(disp, frame=FRAME):
    """Components (a, b) of a planar displacement in the (v_u, v_s) basis."""
    disp = np.asarray(disp, dtype=float)
    return disp @ frame.v_u, disp @ frame.v_s


def chart_coords(x, anchor, half_width, frame=FRAME):
    """Leaf coordinates of x around anchor, plus the mask of points inside the
    box |a|, |b| <= half_width. Vectorised over leading axes of x."""
    a, b = frame_coords(min_translate(np.asarray(x, dtype=float) - np.asarray(anchor, dtype=float)), frame)
    inside = (np.abs(a) <= half_width) & (np.abs(b) <= half_width)
    return a, b, inside


def leaf_coords(x, anchor, delta, frame=FRAME):
    """(a, b) of x relative to anchor if inside the 5*delta box, else None."""
    a, b, inside = chart_coords(x, anchor, 5.0 * delta, frame)
    if not bool(inside):
        return None
    return float(a), float(b)


def leaf_point(anchor, coords, frame=FRAME):
    a, b = coords
    return wrap(np.asarray(anchor, dtype=float) + a * frame.v_u + b * frame.v_s)


def box_distance(x, anchor, half_width, frame=FRAME):
    """Euclidean distance from x to the leaf box of half-width around anchor,
    minimised over neighbouring integer translates."""
    disp = np.asarray(x, dtype=float) - np.asarray(anchor, dtype=float)
    best = np.inf
    for t in _TRANSLATES:
        a, b = frame_coords(min_translate(disp) + t, frame)
        out = math.hypot(max(abs(a) - half_width, 0.0), max(abs(b) - half_width, 0.0))
        best = min(best, out)
    return best


def boxes_disjoint(p, q, half_width, frame=FRAME):
    """Two leaf boxes of the given half-width are disjoint on the torus iff
    every translate of the centre displacement separates them along a leaf."""
    disp = min_translate(np.asarray(q, dtype=float) - np.asarray(p, dtype=float))
    for t in _TRANSLATES:
        a, b = frame_coords(disp + t, frame)
        if abs(a) <= 2 * half_width and abs(b) <= 2 * half_width:
            return False
    return True


# -- anchors --------------------------------------------------------------------

@dataclass(frozen=True)
class AnchorSet:
    p1: tuple
    p2: tuple
    q1: tuple
    q2: tuple

    def as_dict(self):
        return {name: [str(c) for c in getattr(self, name)] for name in ("p1", "p2", "q1", "q2")}

    @classmethod
    def from_dict(cls, data):
        return cls(**{name: tuple(Fraction(c) for c in data[name]) for name in ("p1", "p2", "q1", "q2")})

    def ordered(self):
        return (self.p1, self.p2, self.q1, self.q2)

    def floats(self):
        return np.array([[float(c) for c in p] for p in self.ordered()])


def _compatible(p, q, delta):
    pf = np.array([float(c) for c in p])
    qf = np.array([float(c) for c in q])
    return torus_distance(pf, qf) > 10.0 * delta and boxes_disjoint(pf, qf, 5.0 * delta)


def select_anchors(candidates, delta):
    """Lexicographically smallest 4-tuple of candidates with pairwise torus
    distance > 10*delta and pairwise disjoint 5*delta leaf boxes."""
    cands = sorted((Fraction(p[0]), Fraction(p[1])) for p in candidates)
    if 10.0 * delta >= math.sqrt(0.5):
        raise ConfigurationError(
            f"anchor-separation: 10*delta = {10 * delta:g} exceeds the torus diameter"
        )
    chosen = []

    def extend(start):
        if len(chosen) == 4:
            return True
        for i in range(start, len(cands)):
            c = cands[i]
            if all(_compatible(c, q, delta) for q in chosen):
                chosen.append(c)
                if extend(i + 1):
                    return True
                chosen.pop()
        return False

    if not extend(0):
        raise ConfigurationError(
            f"anchor-separation: no four fixed points pairwise farther than 10*delta = {10 * delta:g}"
        )
    return AnchorSet(*chosen)


# -- heteroclinic point --------------------------------------------------------

@dataclass(frozen=True)
class HeteroclinicPoint:
    """r = q1 + t v_u = q2 + s v_s + m on the torus."""

    point: np.ndarray
    t: float
    s: float
    translate: tuple

    def forward(self, i, sigma1, q2, frame=FRAME):
        """(A^{n1})^i r for i >= 0, computed along the stable leaf of q2."""
        return wrap(np.asarray(q2, dtype=float) + self.s * sigma1 ** (-i) * frame.v_s)

    def backward(self, i, sigma1, q1, frame=FRAME):
        """(A^{n1})^{-i} r for i >= 0, computed along the unstable leaf of q1."""
        return wrap(np.asarray(q1, dtype=float) + self.t * sigma1 ** (-i) * frame.v_u)


def heteroclinic_candidates(q1, q2, window, frame=FRAME):
    q1 = np.asarray(q1, dtype=float)
    q2 = np.asarray(q2, dtype=float)
    out = []
    for m0 in range(-window, window + 1):
        for m1 in range(-window, window + 1):
            disp = q2 + np.array([m0, m1], dtype=float) - q1
            t = float(disp @ frame.v_u)
            s = float(-(disp @ frame.v_s))
            if abs(t) < 1e-12 and abs(s) < 1e-12:
                continue
            out.append(HeteroclinicPoint(point=wrap(q1 + t * frame.v_u), t=t, s=s, translate=(m0, m1)))
    out.sort(key=lambda h: (abs(h.t), h.translate))
    return out


def orbit_isolation(h, eps, sigma1, q1, q2, horizon):
    """min over 0 < |i| <= horizon of dist((A^{n1})^i r, r)."""
    best = np.inf
    for i in range(1, horizon + 1):
        best = min(best, float(torus_distance(h.forward(i, sigma1, q2), h.point)))
        best = min(best, float(torus_distance(h.backward(i, sigma1, q1), h.point)))
    return best


def heteroclinic_point(anchors, delta, eps, sigma1, window=8, horizon=50):
    """First (smallest |t|) point of F^uu(q1) & F^ss(q2) whose eps-ball misses
    every anchor 5*delta box and whose A^{n1}-orbit avoids that ball."""
    q1 = np.array([float(c) for c in anchors.q1])
    q2 = np.array([float(c) for c in anchors.q2])
    boxes = anchors.floats()
    for h in heteroclinic_candidates(q1, q2, window):
        clearance = min(box_distance(h.point, b, 5.0 * delta) for b in boxes)
        if clearance <= eps:
            continue
        if orbit_isolation(h, eps, sigma1, q1, q2, horizon) <= eps:
            continue
        return h
    raise SearchExhaustedError(
        f"no heteroclinic point within translate window {window} clears eps = {eps:g}"
    )
