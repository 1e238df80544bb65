"""Compiled orbit loops for the factor maps g and g~.

The numpy step functions in `system` evaluate one step for a whole cloud;
the long-horizon experiments (basins, the channel ensemble) instead run each
orbit to its horizon in a compiled scalar loop. The arithmetic mirrors
`system.g_step_with_growth` operation for operation; only the libm calls may
differ from numpy's vectorised ones in the last ulp.
"""

import math

import numba
import numpy as np

from ..geometry import FRAME

_CUT = 1e-12
_TWO_PI = 2.0 * math.pi


@numba.njit(cache=True)
def _smooth(t):
    if t > _CUT:
        return math.exp(-1.0 / t)
    return 0.0


@numba.njit(cache=True)
def _psi(r, delta):
    half = 0.5 * delta
    r = abs(r)
    # plateau and outside: the smooth form gives exactly 1 and 0 there
    if r >= delta:
        return 0.0
    if r <= half:
        return 1.0
    n = _smooth((delta - r) / half)
    m = _smooth((r - half) / half)
    return n / (n + m)


@numba.njit(cache=True)
def _sinpi(c):
    n = np.rint(c)
    sign = 1.0 - 2.0 * (n - 2.0 * math.floor(n / 2.0))
    return sign * math.sin(math.pi * (c - n))


@numba.njit(cache=True)
def _pi2(c):
    out = (c + 1.0) - 2.0 * math.floor((c + 1.0) / 2.0) - 1.0
    if out >= 1.0:
        out -= 2.0
    return out


@numba.njit(cache=True)
def _wrap1(v):
    out = v - math.floor(v)
    if out >= 1.0:
        out = 0.0
    return out


@numba.njit(cache=True)
def _wrap2(v):
    out = v - 2.0 * math.floor(v / 2.0)
    if out >= 2.0:
        out = 0.0
    return out


@numba.njit(cache=True)
def _mint(d):
    return d - math.floor(d + 0.5)


@numba.njit(cache=True)
def _g_step(x0, x1, y, geo, anchors, r_geo, perturbed):
    """One step of g (or g~); geo = (A00, A01, A10, A11, box, delta, vu0, vu1, vs0, vs1),
    r_geo = (r0, r1, half-width, ell)."""
    vu0, vu1, vs0, vs1 = geo[6], geo[7], geo[8], geo[9]
    delta = geo[5]
    if perturbed:
        d0 = _mint(x0 - r_geo[0])
        d1 = _mint(x1 - r_geo[1])
        a = d0 * vu0 + d1 * vu1
        b = d0 * vs0 + d1 * vs1
        w = r_geo[2]
        if abs(a) <= w and abs(b) <= w:
            ell = r_geo[3]
            c = _pi2(y)
            inc = _psi(ell * c, delta) * _psi(ell * math.hypot(a, b), delta) / ell**3
            y = _wrap2(y + inc)
    # psi vanishes off the delta-disk, which sits well inside the disjoint
    # 5*delta boxes: testing the disk (rarely true, so well predicted) gives
    # the same result as locating the box first
    reach = delta * delta * (1.0 + 1e-9)
    for i in range(4):
        d0 = _mint(x0 - anchors[i, 0])
        d1 = _mint(x1 - anchors[i, 1])
        a = d0 * vu0 + d1 * vu1
        b = d0 * vs0 + d1 * vs1
        if a * a + b * b < reach:
            c = _pi2(y - (i % 2))
            s = _psi(math.hypot(a, b), delta)
            y = _wrap2(y + s * (-_sinpi(c) / _TWO_PI))
    n0 = _wrap1(x0 * geo[0] + x1 * geo[1])
    n1 = _wrap1(x0 * geo[2] + x1 * geo[3])
    return n0, n1, y


@numba.njit(cache=True)
def _classify_loop(x, y, geo, anchors, r_geo, perturbed, horizons, threshold):
    nh = horizons.shape[0]
    counts = np.zeros((nh, 2), dtype=np.int64)
    for j in range(y.shape[0]):
        x0, x1, yy = x[j, 0], x[j, 1], y[j]
        acc = 0.0
        t = 0
        for k in range(nh):
            h = horizons[k]
            while t < h:
                acc += math.cos(math.pi * yy)
                x0, x1, yy = _g_step(x0, x1, yy, geo, anchors, r_geo, perturbed)
                t += 1
            avg = acc / h
            if avg >= threshold:
                counts[k, 0] += 1
            elif avg <= -threshold:
                counts[k, 1] += 1
    return counts


@numba.njit(cache=True)
def _passage_loop(x, y, geo, anchors, r_geo, perturbed, horizon, threshold):
    out = np.full(y.shape[0], -1, dtype=np.int64)
    for j in range(y.shape[0]):
        x0, x1, yy = x[j, 0], x[j, 1], y[j]
        for t in range(1, horizon + 1):
            x0, x1, yy = _g_step(x0, x1, yy, geo, anchors, r_geo, perturbed)
            if math.cos(math.pi * yy) <= -threshold:
                out[j] = t
                break
    return out


@numba.njit(cache=True)
def _orbit_loop(x, y, geo, anchors, r_geo, perturbed, steps):
    x = x.copy()
    y = y.copy()
    for j in range(y.shape[0]):
        x0, x1, yy = x[j, 0], x[j, 1], y[j]
        for _ in range(steps):
            x0, x1, yy = _g_step(x0, x1, yy, geo, anchors, r_geo, perturbed)
        x[j, 0], x[j, 1], y[j] = x0, x1, yy
    return x, y


def _geometry(params, perturbed):
    A = params.A1
    geo = np.array([A[0, 0], A[0, 1], A[1, 0], A[1, 1], params.box, params.delta,
                    FRAME.v_u[0], FRAME.v_u[1], FRAME.v_s[0], FRAME.v_s[1]])
    if perturbed:
        r_geo = np.array([params.r.point[0], params.r.point[1], params.eps / 10.0, params.ell])
    else:
        r_geo = np.zeros(4)
    return geo, np.ascontiguousarray(params.anchor_xy, dtype=float), r_geo


def _arrays(x, y):
    return np.ascontiguousarray(x, dtype=float).reshape(-1, 2), np.ascontiguousarray(y, dtype=float).ravel()


def g_orbit(params, x, y, steps, perturbed=False):
    """Endpoints of `steps` iterates of g (g~ when perturbed)."""
    x, y = _arrays(x, y)
    geo, anchors, r_geo = _geometry(params, perturbed)
    return _orbit_loop(x, y, geo, anchors, r_geo, perturbed, int(steps))


def classify_orbits(params, x, y, horizons, perturbed, threshold):
    """Per-horizon counts (section 0, section 1) of the time average of
    cos(pi y) over steps 0..h-1 being >= threshold / <= -threshold."""
    x, y = _arrays(x, y)
    geo, anchors, r_geo = _geometry(params, perturbed)
    h = np.asarray(horizons, dtype=np.int64)
    return _classify_loop(x, y, geo, anchors, r_geo, perturbed, h, float(threshold))


def first_passage(params, x, y, horizon, perturbed, threshold):
    """First step t in 1..horizon with cos(pi y_t) <= -threshold, or -1."""
    x, y = _arrays(x, y)
    geo, anchors, r_geo = _geometry(params, perturbed)
    return _passage_loop(x, y, geo, anchors, r_geo, perturbed, int(horizon), float(threshold))
