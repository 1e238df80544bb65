"""Birkhoff averages and Lyapunov exponents along the invariant bundles."""

import math

import numpy as np
from scipy import integrate

from .. import kernels as K
from ..errors import ConfigurationError
from ..system import (
    FACTOR_MAPS,
    JACOBIANS,
    MAPS,
    f_step_with_partials,
    g_step_with_growth,
    require_certified,
)
from .parallel import run_chunks
from .reports import LyapReport, SpectrumReport, TSCrossCheck
from .rng import sample_range

BATCH = 1000
CHUNK = 1000
# streams: independent coordinates of the random starts
_SX, _SY, _SZ = 1, 2, 3


def ts_oracle(delta):
    """Space average of log dQ/dc on a section: 2 * int_{delta-disk} log(1 - psi^2/4),
    by one-dimensional radial quadrature."""
    f = lambda r: 2.0 * np.pi * r * math.log1p(-float(K.psi(r, delta)) ** 2 / 4.0)
    val, _ = integrate.quad(f, 0.0, delta, points=[0.5 * delta], epsabs=1e-15, epsrel=1e-12, limit=200)
    return 2.0 * val


def cu_lower_bound(params):
    b = params.beta
    return 2 * b * b * math.log(0.75) + (1 - 2 * b * b) * math.log(params.sigma0)


def random_starts(spec, start, count, section=None, factor=False):
    """Lebesgue-random starts for samples [start, start+count); y is pinned to
    `section` when given."""
    x = sample_range(spec.seed, start, count, 2, _SX)
    if section is None:
        y = 2.0 * sample_range(spec.seed, start, count, 1, _SY)[:, 0]
    else:
        y = np.full(count, float(section))
    if factor:
        return x, y
    z = sample_range(spec.seed, start, count, 2, _SZ)
    return x, y, z


def _stats(per_sample, batch_sums, n):
    per_sample = np.asarray(per_sample)
    m = len(per_sample)
    est = float(per_sample.mean())
    err = float(per_sample.std(ddof=1) / math.sqrt(m)) if m > 1 else float("nan")
    return est, err


def _merge(results, n):
    per = np.concatenate([r[0] for r in results])
    batches = np.sum([r[1] for r in results], axis=0) / len(per)
    return per, batches


# -- Birkhoff averages ----------------------------------------------------------

def birkhoff_average(map_name, observable, x0, spec, params):
    """Time average of observable(point) over spec.n steps after spec.burn_in,
    one value per start in x0 (an MPoint or GPoint batch)."""
    require_certified(params, surgery=map_name in ("ftilde", "gtilde"))
    step = {**MAPS, **FACTOR_MAPS}.get(map_name)
    if step is None:
        raise ConfigurationError(f"unknown map {map_name!r}")
    p = x0
    for _ in range(spec.burn_in):
        p = step(p, params)
    acc = np.zeros(np.shape(p.y))
    for _ in range(spec.n):
        acc = acc + observable(p)
        p = step(p, params)
    out = acc / spec.n
    return float(out) if np.ndim(out) == 0 else out


# -- TS exponent of g --------------------------------------------------------------

def _ts_g_chunk(start, count, spec, params, section, perturbed):
    x, y = random_starts(spec, start, count, section, factor=True)
    for _ in range(spec.burn_in):
        x, y, _ = g_step_with_growth(params, x, y, perturbed)
    acc = np.zeros(count)
    nb = -(-spec.n // BATCH)
    batches = np.zeros(nb)
    for j in range(spec.n):
        x, y, g = g_step_with_growth(params, x, y, perturbed)
        acc += g
        batches[j // BATCH] += g.sum()
    sizes = np.minimum(BATCH, spec.n - BATCH * np.arange(nb))
    return acc / spec.n, batches / sizes


def _resolution_flags(params, spec, oracle, err):
    flags = []
    visits = 4.0 * math.pi * params.delta**2 * spec.n * spec.samples
    if visits < 1e3 or abs(oracle) < 3.0 * err:
        flags.append("below resolution")
    return flags


def lyap_TS_g(section, spec, params, perturbed=False):
    """TS exponent of g as the Birkhoff average of log dQ/dc from Lebesgue-random
    starts on the given section."""
    require_certified(params, surgery=perturbed)
    if section not in (0, 1):
        raise ConfigurationError("section must be 0 or 1")
    res = run_chunks(_ts_g_chunk, spec.samples, CHUNK, spec, params, section, perturbed)
    per, batches = _merge(res, spec.n)
    est, err = _stats(per, batches, spec.n)
    oracle = ts_oracle(params.delta)
    return LyapReport(
        bundle="ts", lambda_hat=est, stderr=err, n=spec.n, samples=spec.samples, section=section,
        method="g:birkhoff", oracle=oracle, cert_hash=params.cert_hash,
        batch_means=batches.tolist(), flags=_resolution_flags(params, spec, oracle, err),
    )


# -- f-orbit exponents -------------------------------------------------------------

def _f_chunk(start, count, spec, params, section, start_point, want_b):
    if start_point is None:
        x, y, z = random_starts(spec, start, count, section)
    else:
        x = np.repeat(start_point.x.reshape(1, 2), count, 0)
        y = np.repeat(np.atleast_1d(start_point.y), count)
        z = np.repeat(start_point.z.reshape(1, 2), count, 0)
    for _ in range(spec.burn_in):
        x, y, z, _ = f_step_with_partials(params, x, y, z)
    nb = -(-spec.n // BATCH)
    cu = np.zeros(count)
    ts = np.zeros(count)
    tsb = np.zeros(count)
    bcu = np.zeros(nb)
    bts = np.zeros(nb)
    btsb = np.zeros(nb)
    s0 = params.sigma0
    for b in range(nb):
        m = min(BATCH, spec.n - b * BATCH)
        blocks = np.empty((m, 3, count)) if want_b else None
        for j in range(m):
            x, y, z, fp = f_step_with_partials(params, x, y, z)
            lcu = np.log(s0 * fp["Pd"])
            lts = np.log(fp["Qc"])
            cu += lcu
            ts += lts
            bcu[b] += lcu.sum()
            bts[b] += lts.sum()
            if want_b:
                blocks[j, 0] = s0 * fp["Pd"]
                blocks[j, 1] = s0 * fp["Pc"]
                blocks[j, 2] = fp["Qc"]
        if want_b:
            # pull a TS vector back through the (u, TS) block: growth rate of
            # the backward-invariant cone is minus the TS exponent
            vu = np.zeros(count)
            vt = np.ones(count)
            acc = np.zeros(count)
            for j in range(m - 1, -1, -1):
                A, B, C = blocks[j]
                vt = vt / C
                vu = (vu - B * vt) / A
                nrm = np.hypot(vu, vt)
                acc += np.log(nrm)
                vu /= nrm
                vt /= nrm
            tsb -= acc
            btsb[b] -= acc.sum()
    sizes = np.minimum(BATCH, spec.n - BATCH * np.arange(nb))
    return (cu / spec.n, bcu / sizes), (ts / spec.n, bts / sizes), (tsb / spec.n, btsb / sizes)


def _f_run(spec, params, section, start_point, want_b):
    res = run_chunks(_f_chunk, spec.samples, CHUNK, spec, params, section, start_point, want_b)
    return [_merge([r[i] for r in res], spec.n) for i in range(3)]


def lyap_cu_f(section, spec, params, start=None):
    """E^u (centre-unstable) exponent: Birkhoff average of log(sigma0 dP/dd)."""
    require_certified(params)
    (per, batches), _, _ = _f_run(spec, params, section, start, False)
    est, err = _stats(per, batches, spec.n)
    bound = cu_lower_bound(params)
    flags = [] if est >= bound - 3 * (err if np.isfinite(err) else 0.0) else ["below lower bound"]
    return LyapReport(
        bundle="cu", lambda_hat=est, stderr=err, n=spec.n, samples=spec.samples, section=section,
        method="f:birkhoff", bound=bound, cert_hash=params.cert_hash, batch_means=batches.tolist(),
        flags=flags,
    )


def lyap_TS_f(section, spec, params, start=None, tolerance=5.0):
    """TS exponent of f two ways on shared orbits: (A) the projected Birkhoff
    average of log dQ/dc, (B) backward growth of the tau3 cone on the (u, TS)
    block."""
    require_certified(params)
    _, (pa, ba), (pb, bb) = _f_run(spec, params, section, start, True)
    ea, sa = _stats(pa, ba, spec.n)
    eb, sb = _stats(pb, bb, spec.n)
    oracle = ts_oracle(params.delta) if start is None else None
    common = dict(bundle="ts", n=spec.n, samples=spec.samples, section=section,
                  oracle=oracle, cert_hash=params.cert_hash)
    ra = LyapReport(lambda_hat=ea, stderr=sa, method="A:projected", batch_means=ba.tolist(), **common)
    rb = LyapReport(lambda_hat=eb, stderr=sb, method="B:cone", batch_means=bb.tolist(), **common)
    comb = math.hypot(sa, sb) if np.isfinite(sa) and np.isfinite(sb) else float("nan")
    if comb and np.isfinite(comb) and comb > 0:
        sig = abs(ea - eb) / comb
    else:
        sig = 0.0 if ea == eb else abs(ea - eb) / max(abs(ea), 1e-300)
    flags = ["method disagreement"] if sig > tolerance else []
    return TSCrossCheck(method_a=ra, method_b=rb, combined_stderr=comb, agreement_sigmas=sig, flags=flags)


# -- full spectrum -------------------------------------------------------------------

def lyap_spectrum_full(x0, n, params, map_name="f", batch=BATCH):
    """Five exponents per start by QR (Benettin) renormalisation every step,
    sorted descending. x0 is an MPoint (batch allowed)."""
    require_certified(params, surgery=map_name == "ftilde")
    step = MAPS[map_name]
    jac = JACOBIANS[map_name]
    p = x0
    m = len(np.atleast_1d(p.y))
    Q = np.broadcast_to(np.eye(5), (m, 5, 5)).copy()
    sums = np.zeros((m, 5))
    for _ in range(n):
        J = jac(p, params).reshape(m, 5, 5)
        Q, R = np.linalg.qr(J @ Q)
        d = np.diagonal(R, axis1=1, axis2=2)
        sums += np.log(np.abs(d))
        Q = Q * np.sign(d)[:, None, :]
        p = step(p, params)
    exps = -np.sort(-sums / n, axis=1)
    return exps


def spectrum_report(x0, n, params):
    exps = lyap_spectrum_full(x0, n, params)
    ls1 = math.log(params.sigma1)
    return SpectrumReport(
        exponents=exps.tolist(), n=n,
        start=[np.atleast_2d(x0.x).tolist(), np.atleast_1d(x0.y).tolist(), np.atleast_2d(x0.z).tolist()],
        expected_extremes=[ls1, -ls1], cert_hash=params.cert_hash,
    )
