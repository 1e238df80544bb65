"""Stable-set membership and heteroclinic convergence in extended precision.

Points on stable leaves of the base automorphism cannot be followed in double
precision: the rounding error of x has an unstable component that grows by
sigma1 per step. Torus coordinates are therefore iterated with mpmath at
n*log10(sigma1) + 30 digits; the circle coordinate, which only needs the
(small) leaf-chart coordinates of x, stays in float.
"""

import math

import mpmath
import numpy as np

from .. import kernels as K
from ..errors import ConfigurationError
from ..geometry import cat_power
from ..system import require_certified
from .reports import ManifoldReport
from .rng import sample_range


def _mp_frame():
    lam = (3 + mpmath.sqrt(5)) / 2
    norm = mpmath.sqrt(1 + (lam - 2) ** 2)
    vu = (1 / norm, (lam - 2) / norm)
    vs = (-vu[1], vu[0])
    return vu, vs


def _mp_apply(m, v):
    return ((m[0][0] * v[0] + m[0][1] * v[1]) % 1, (m[1][0] * v[0] + m[1][1] * v[1]) % 1)


def _mp_disp(v, q):
    d = []
    for a, b in zip(v, q):
        t = a - b
        d.append(t - mpmath.floor(t + mpmath.mpf(1) / 2))
    return d


def _mp_inverse(m):
    # det = 1 for every power of the cat map
    return ((m[1][1], -m[0][1]), (-m[1][0], m[0][0]))


def precision_digits(steps, sigma, stable=False):
    """Digits keeping rounding noise, amplified by sigma per step, below the
    signal: a stable-leaf displacement itself shrinks by sigma per step, so
    stable-set orbits need twice the budget."""
    return int((2 if stable else 1) * steps * math.log10(sigma)) + 30


def heteroclinic_check(params, steps=10):
    """Distances of A^{n1 i} r to q2 and of A^{-n1 i} r to q1 for i = 0..steps,
    with r reconstructed exactly from its integer translate, plus the per-step
    ratios."""
    require_certified(params, surgery=True)
    A1, s1 = cat_power(params.n1)
    with mpmath.workdps(precision_digits(steps, s1)):
        vu, vs = _mp_frame()
        q1 = tuple(mpmath.mpf(c.numerator) / c.denominator for c in params.anchors.q1)
        q2 = tuple(mpmath.mpf(c.numerator) / c.denominator for c in params.anchors.q2)
        m = params.r.translate
        disp = (q2[0] + m[0] - q1[0], q2[1] + m[1] - q1[1])
        t = disp[0] * vu[0] + disp[1] * vu[1]
        r = ((q1[0] + t * vu[0]) % 1, (q1[1] + t * vu[1]) % 1)
        inv = _mp_inverse(A1)
        fwd, bwd = [], []
        a, b = r, r
        for _ in range(steps + 1):
            da = _mp_disp(a, q2)
            db = _mp_disp(b, q1)
            fwd.append(mpmath.sqrt(da[0] ** 2 + da[1] ** 2))
            bwd.append(mpmath.sqrt(db[0] ** 2 + db[1] ** 2))
            a = _mp_apply(A1, a)
            b = _mp_apply(inv, b)
        fr = [float(fwd[i + 1] / fwd[i]) for i in range(steps)]
        br = [float(bwd[i + 1] / bwd[i]) for i in range(steps)]
        return {
            "r": [float(r[0]), float(r[1])],
            "forward_distance": [float(mpmath.log10(d)) for d in fwd],
            "backward_distance": [float(mpmath.log10(d)) for d in bwd],
            "forward_ratio": fr,
            "backward_ratio": br,
            "sigma1_inverse": 1.0 / s1,
        }


def manifold_check(params, n=200, samples=32, target="q1", seed=0, burn_in=50, window=0.25):
    """Follow points of F^ss_{delta/2}(q) x (section-1 excluded fibre) x F^s_{5 delta}(q)
    under f and check convergence to (q, y_q, q).

    Returns the worst observed per-step contraction over the last n - burn_in
    steps against max(1/sigma0, sup phi' on |c| <= window).
    """
    require_certified(params)
    if target not in ("q1", "q2"):
        raise ConfigurationError("target must be q1 or q2")
    idx = ("p1", "p2", "q1", "q2").index(target)
    y_anchor = 0.0 if target == "q1" else 1.0
    A1, s1 = cat_power(params.n1)
    A0, s0 = cat_power(params.n0)
    delta = params.delta
    u = sample_range(seed, 0, samples, 3, stream=41)
    bound = max(1.0 / s0, float(K.phi_deriv(window)))
    flagged = []
    rates = []
    monotone = True
    finals = []
    frac = params.anchors.ordered()[idx]
    with mpmath.workdps(precision_digits(n, s1, stable=True)):
        vu, vs = _mp_frame()
        q = tuple(mpmath.mpf(c.numerator) / c.denominator for c in frac)
        for i in range(samples):
            b = mpmath.mpf(float((2 * u[i, 0] - 1) * 0.5 * delta))
            c = float((2 * u[i, 1] - 1) * 0.98)  # lift relative to the anchored section
            e = mpmath.mpf(float((2 * u[i, 2] - 1) * 5 * delta))
            x = ((q[0] + b * vs[0]) % 1, (q[1] + b * vs[1]) % 1)
            z = ((q[0] + e * vs[0]) % 1, (q[1] + e * vs[1]) % 1)
            dists = []
            for _ in range(n + 1):
                dx = _mp_disp(x, q)
                dz = _mp_disp(z, q)
                a_ = float(dx[0] * vu[0] + dx[1] * vu[1])
                b_ = float(dx[0] * vs[0] + dx[1] * vs[1])
                d2 = dx[0] ** 2 + dx[1] ** 2 + dz[0] ** 2 + dz[1] ** 2 + mpmath.mpf(c) ** 2
                dists.append(float(mpmath.log(mpmath.sqrt(d2))))
                # fibre: leaf chart of the anchor, lift already centred on its section
                c = float(c + K.Q_increment(a_, b_, c, delta))
                x = _mp_apply(A1, x)
                z = _mp_apply(A0, z)
            dists = np.array(dists)
            tail = np.diff(dists[burn_in:])
            rate = float(np.exp(tail.max())) if len(tail) else 0.0
            rates.append(rate)
            finals.append(float(dists[-1]))
            if np.any(tail > 1e-12):
                monotone = False
            if rate > bound or not dists[-1] < dists[0]:
                flagged.append({"sample": i, "b": float(b), "c": float(u[i, 1] * 2 - 1) * 0.98,
                                "e": float(e), "rate": rate})
    return ManifoldReport(
        target=f"({target},{int(y_anchor)},{target})", n=n, samples=samples, contraction_bound=bound,
        observed_rate=float(max(rates)), final_distance_max=float(math.exp(max(finals))),
        monotone=monotone, flagged=flagged, cert_hash=params.cert_hash,
    )
