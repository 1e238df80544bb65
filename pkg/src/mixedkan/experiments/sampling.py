"""Stratified point clouds on M = T^2 x S x T^2 (or T^2 x S) that oversample
the chart boxes, the bump transition annuli and the P / R supports."""

import numpy as np

from ..geometry import FRAME, wrap
from ..system import GPoint, MPoint
from .rng import sample_range

# fractions of the cloud: uniform, anchor boxes, bump annuli, P support, R box
_WEIGHTS = np.array([0.4, 0.15, 0.2, 0.15, 0.1])


def _leaf(anchor, a, b):
    return wrap(anchor + a[:, None] * FRAME.v_u + b[:, None] * FRAME.v_s)


def _polar(u, v, r0, r1):
    rad = r0 + (r1 - r0) * u
    th = 2.0 * np.pi * v
    return rad * np.cos(th), rad * np.sin(th)


def stratified_points(params, n, seed=0, factor=False, stream=7):
    """n points; deterministic in (params, n, seed)."""
    U = sample_range(seed, 0, n, 10, stream)
    w = _WEIGHTS.copy()
    if not params.has_surgery:
        w[-1] = 0.0
    w = w / w.sum()
    cls = np.searchsorted(np.cumsum(w), U[:, 0] * 0.999999999, side="right")
    anchors = params.anchor_xy
    which = np.minimum((U[:, 1] * 4).astype(int), 3)
    delta, box = params.delta, params.box
    shift = np.where(which % 2 == 1, 1.0, 0.0)  # p2, q2 anchor section 1

    x = U[:, 2:4].copy()
    y = 2.0 * U[:, 4]
    z = U[:, 5:7].copy()

    m = cls == 1  # whole 5-delta boxes
    a = (2 * U[:, 2] - 1) * box
    b = (2 * U[:, 3] - 1) * box
    x[m] = _leaf(anchors[which[m]], a[m], b[m])

    m = cls == 2  # the annulus where psi varies, section-adjacent fibre
    a, b = _polar(U[:, 2], U[:, 3], 0.45 * delta, 1.05 * delta)
    x[m] = _leaf(anchors[which[m]], a[m], b[m])
    near = U[:, 7] < 0.5
    y = np.where(m & near, shift + (2 * U[:, 4] - 1) * 0.2, y)

    m = cls == 3  # P support: p1/p2 boxes, |c|, |d|, |e| ~ delta/k
    pw = which % 2
    sc = 1.1 * delta / params.k
    a, b = _polar(U[:, 2], U[:, 3], 0.0, 1.1 * delta)
    x[m] = _leaf(anchors[pw[m]], a[m], b[m])
    y = np.where(m, pw + (2 * U[:, 4] - 1) * sc, y)
    d = (2 * U[:, 5] - 1) * sc
    e = (2 * U[:, 6] - 1) * sc
    z[m] = _leaf(anchors[pw[m]], d[m], e[m])

    if params.has_surgery:
        m = cls == 4  # R box of r, |c| ~ delta/ell
        rs = 1.2 * delta / params.ell
        a = (2 * U[:, 2] - 1) * np.where(U[:, 8] < 0.7, rs, params.eps / 10.0)
        b = (2 * U[:, 3] - 1) * np.where(U[:, 8] < 0.7, rs, params.eps / 10.0)
        x[m] = _leaf(params.r.point[None, :], a[m], b[m])
        y = np.where(m & (U[:, 9] < 0.8), (2 * U[:, 4] - 1) * rs, y)

    if factor:
        return GPoint(x, y)
    return MPoint(x, y, z)
