"""Scalar building blocks of the skew product: the plateau bump psi, the
circle map phi, and the fibre factors Q, P, R with their first partials.

Every function accepts scalars or numpy arrays (broadcasting) and returns
float64 arrays. Derivatives are closed-form; finite differences live in the
test-suite only.
"""

import numpy as np

_S_CUTOFF = 1e-12


def _smooth(t):
    """exp(-1/t) for t > 0, zero otherwise; returns (S, S')."""
    t = np.asarray(t, dtype=float)
    pos = t > _S_CUTOFF
    safe = np.where(pos, t, 1.0)
    s = np.where(pos, np.exp(-1.0 / safe), 0.0)
    ds = np.where(pos, s / (safe * safe), 0.0)
    return s, ds


def sinpi(c):
    """sin(pi*c), exactly zero at integers."""
    c = np.asarray(c, dtype=float)
    n = np.rint(c)
    sign = 1.0 - 2.0 * np.mod(n, 2.0)
    return sign * np.sin(np.pi * (c - n))


def cospi(c):
    """cos(pi*c), exactly +-1 at integers."""
    c = np.asarray(c, dtype=float)
    n = np.rint(c)
    sign = 1.0 - 2.0 * np.mod(n, 2.0)
    return sign * np.cos(np.pi * (c - n))


def psi(x, delta):
    """Even C-infinity bump: 1 on |x| <= delta/2, 0 on |x| >= delta."""
    return psi_and_deriv(x, delta)[0]


def psi_deriv(x, delta):
    return psi_and_deriv(x, delta)[1]


def psi_and_deriv(x, delta):
    x = np.asarray(x, dtype=float)
    r = np.abs(x)
    half = 0.5 * delta
    n, dn = _smooth((delta - r) / half)
    m, dm = _smooth((r - half) / half)
    den = n + m  # > 0 everywhere: the two supports overlap
    val = n / den
    # d/dr with dt_n/dr = -1/half, dt_m/dr = +1/half
    dval = -(dn * m + n * dm) / (den * den) / half
    return val, np.sign(x) * dval


def psi_max_slope(delta):
    """sup |psi'|, attained at |x| = 3*delta/4 by symmetry of the smooth step."""
    return 4.0 / delta


def phi(c):
    """Lift of the circle map: phi(c) = c - sin(pi c)/(2 pi)."""
    c = np.asarray(c, dtype=float)
    return c - sinpi(c) / (2.0 * np.pi)


def phi_minus_id(c):
    return -sinpi(c) / (2.0 * np.pi)


def phi_deriv(c):
    return 1.0 - 0.5 * cospi(c)


def pi2(c):
    """Representative of c modulo 2 in [-1, 1)."""
    c = np.asarray(c, dtype=float)
    out = np.mod(c + 1.0, 2.0) - 1.0
    return np.where(out >= 1.0, out - 2.0, out)


def _radial(a, b):
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    rho = np.hypot(a, b)
    safe = np.where(rho > 0.0, rho, 1.0)
    ua = np.where(rho > 0.0, a / safe, 0.0)
    ub = np.where(rho > 0.0, b / safe, 0.0)
    return rho, ua, ub


# -- Q -----------------------------------------------------------------------

def Q_increment(a, b, c, delta):
    """Q(a,b,c) - c, computed without cancellation."""
    rho = np.hypot(a, b)
    return psi(rho, delta) * phi_minus_id(c)


def Q_eval(a, b, c, delta):
    return np.asarray(c, dtype=float) + Q_increment(a, b, c, delta)


def Q_partials(a, b, c, delta):
    """(dQ/da, dQ/db, dQ/dc)."""
    rho, ua, ub = _radial(a, b)
    s, ds = psi_and_deriv(rho, delta)
    g = phi_minus_id(c)
    return ds * ua * g, ds * ub * g, 1.0 + (phi_deriv(c) - 1.0) * s


# -- P -----------------------------------------------------------------------

def P_increment(a, b, c, d, e, k, sigma0, delta):
    """P(a,b,c,d,e) - d."""
    r4 = np.sqrt(np.square(a) + np.square(b) + np.square(c) + np.square(e))
    d = np.asarray(d, dtype=float)
    return psi(k * d, delta) * psi(k * r4, delta) * (0.75 / sigma0 - 1.0) * d


def P_eval(a, b, c, d, e, k, sigma0, delta):
    return np.asarray(d, dtype=float) + P_increment(a, b, c, d, e, k, sigma0, delta)


def P_partials(a, b, c, d, e, k, sigma0, delta):
    """(dP/da, dP/db, dP/dc, dP/dd, dP/de)."""
    a, b, c, d, e = (np.asarray(v, dtype=float) for v in (a, b, c, d, e))
    r4 = np.sqrt(a * a + b * b + c * c + e * e)
    safe = np.where(r4 > 0.0, r4, 1.0)
    inv = np.where(r4 > 0.0, 1.0 / safe, 0.0)
    sd, dsd = psi_and_deriv(k * d, delta)
    sr, dsr = psi_and_deriv(k * r4, delta)
    gain = 0.75 / sigma0 - 1.0
    radial = sd * dsr * k * gain * d * inv
    dd = 1.0 + gain * sr * (sd + dsd * k * d)
    return radial * a, radial * b, radial * c, dd, radial * e


# -- R (perturbation) ----------------------------------------------------------

def R_increment(a, b, c, ell, delta):
    rho = np.hypot(a, b)
    return psi(ell * np.asarray(c, dtype=float), delta) * psi(ell * rho, delta) / ell**3


def R_eval(a, b, c, ell, delta):
    return np.asarray(c, dtype=float) + R_increment(a, b, c, ell, delta)


def R_partials(a, b, c, ell, delta):
    """(dR/da, dR/db, dR/dc)."""
    rho, ua, ub = _radial(a, b)
    sc, dsc = psi_and_deriv(ell * np.asarray(c, dtype=float), delta)
    sr, dsr = psi_and_deriv(ell * rho, delta)
    radial = sc * dsr / ell**2
    return radial * ua, radial * ub, 1.0 + dsc * sr / ell**2
