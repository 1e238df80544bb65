"""Numerical certification of the inequalities the construction relies on.

Each scalar check evaluates its quantity on a grid and widens the grid
extreme by a Lipschitz pad L*h/2, where h is the grid step and L is twice
the largest discrete slope seen on the grid. This is engineering-grade: it
gives honest continuum conclusions for the smooth, well-resolved kernels
used here, not a computer-assisted proof.
"""

from dataclasses import dataclass, field
import hashlib
import json
import math

import numpy as np

from . import kernels as K
from .geometry import (
    box_distance,
    boxes_disjoint,
    is_fixed,
    orbit_isolation,
    torus_distance,
)
from .system import (
    FRAME_LABELS,
    JACOBIANS,
    MAPS,
    S,
    SS,
    TS,
    U,
    UU,
    ts_log_growth,
)
from .errors import CertificationError, ConfigurationError, SearchExhaustedError


@dataclass
class CheckResult:
    name: str
    passed: bool
    value: float
    bound: float
    margin: float
    resolution: int = 0
    pad: float = 0.0
    note: str = ""


@dataclass
class CertificateReport:
    params_fingerprint: str
    checks: list = field(default_factory=list)

    @property
    def passed(self):
        return bool(self.checks) and all(c.passed for c in self.checks)

    def failures(self):
        return [c.name for c in self.checks if not c.passed]

    def __getitem__(self, name):
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def add(self, check):
        self.checks.append(check)
        return check

    @property
    def hash(self):
        payload = {
            "params": self.params_fingerprint,
            "checks": [[c.name, c.passed, repr(float(c.value)), repr(float(c.bound))] for c in self.checks],
        }
        return hashlib.sha256(json.dumps(payload, sort_keys=True).encode()).hexdigest()

    def to_json(self):
        return {
            "params_fingerprint": self.params_fingerprint,
            "passed": self.passed,
            "hash": self.hash,
            "engineering_grade": True,
            "checks": {
                c.name: {
                    "pass": c.passed,
                    "value": c.value,
                    "bound": c.bound,
                    "margin": c.margin,
                    "resolution": c.resolution,
                    "pad": c.pad,
                    "note": c.note,
                }
                for c in self.checks
            },
        }


def _pad(values, step):
    """Lipschitz pad for a sampled 1-D function."""
    if len(values) < 2:
        return 0.0
    slope = np.max(np.abs(np.diff(values))) / step
    return float(2.0 * slope * step / 2.0)


def _check(name, value, bound, *, upper, resolution=0, pad=0.0, note="", strict=True):
    """upper=True certifies value + pad < bound; otherwise value - pad > bound."""
    if upper:
        margin = bound - (value + pad)
    else:
        margin = (value - pad) - bound
    passed = margin > 0 if strict else margin >= 0
    return CheckResult(name, bool(passed), float(value), float(bound), float(margin), int(resolution), float(pad), note)


# -- kernel ranges used by several checks ----------------------------------------

@dataclass
class KernelRanges:
    """Grid extremes of the one-dimensional kernel building blocks."""

    psi_slope: float  # sup |psi'|
    u_psi: float  # sup |u psi(u)|
    h_min: float  # inf psi(u) + u psi'(u)
    h_max: float  # sup of the same
    phi_gap: float  # sup |phi(c) - c|
    phid_min: float
    phid_max: float
    pads: dict
    resolution: int


def kernel_ranges(delta, resolution=20001):
    u = np.linspace(0.0, 1.25 * delta, resolution)
    du = u[1] - u[0]
    s, ds = K.psi_and_deriv(u, delta)
    h = s + u * ds
    c = np.linspace(0.0, 2.0, resolution)
    dc = c[1] - c[0]
    gap = np.abs(K.phi_minus_id(c))
    pd = K.phi_deriv(c)
    pads = {
        "psi_slope": _pad(np.abs(ds), du),
        "u_psi": _pad(u * s, du),
        "h": _pad(h, du),
        "phi_gap": _pad(gap, dc),
        "phid": _pad(pd, dc),
    }
    return KernelRanges(
        psi_slope=float(np.max(np.abs(ds))),
        u_psi=float(np.max(u * s)),
        h_min=float(h.min()),
        h_max=float(h.max()),
        phi_gap=float(gap.max()),
        phid_min=float(pd.min()),
        phid_max=float(pd.max()),
        pads=pads,
        resolution=resolution,
    )


def fibre_derivative_bounds(params, ranges=None):
    """Upper bounds of every entry appearing in the relation sigma1 >> max{...}."""
    kr = ranges or kernel_ranges(params.delta)
    s0 = params.sigma0
    gain = 1.0 - 0.75 / s0
    slope = kr.psi_slope + kr.pads["psi_slope"]
    return {
        "sigma0*|dP/da,b,c,e|": s0 * gain * (kr.u_psi + kr.pads["u_psi"]) * slope,
        "sigma0*dP/dd": s0 + (s0 - 0.75) * max(0.0, -(kr.h_min - kr.pads["h"])),
        "|dQ/da,b|": slope * (kr.phi_gap + kr.pads["phi_gap"]),
        "dQ/dc": max(1.0, kr.phid_max + kr.pads["phid"]),
    }


# -- the symmetry integral ----------------------------------------------------------

def _gauss_grid(half, panels, order):
    nodes, weights = np.polynomial.legendre.leggauss(order)
    edges = np.linspace(-half, half, panels + 1)
    mid = 0.5 * (edges[1:] + edges[:-1])
    rad = 0.5 * (edges[1:] - edges[:-1])
    pts = (mid[:, None] + rad[:, None] * nodes[None, :]).ravel()
    wts = (rad[:, None] * weights[None, :]).ravel()
    return pts, wts


def ts_exponent_integral(params, section=0, panels=48, order=10):
    """Sum over the four anchor charts of the integral of log dQ/dc over the
    square [-delta, delta]^2 at the given section, evaluated through the map's
    own chart machinery. Lebesgue measure on T^2 has unit mass, so this is the
    space average of log dQ/dc on the section."""
    from .geometry import FRAME

    pts, wts = _gauss_grid(params.delta, panels, order)
    A, B = np.meshgrid(pts, pts, indexing="ij")
    W = np.outer(wts, wts)
    total = 0.0
    for anchor in params.anchor_xy:
        x = anchor + A[..., None] * FRAME.v_u + B[..., None] * FRAME.v_s
        y = np.full(A.shape, float(section))
        total += float(np.sum(W * ts_log_growth(params, x, y)))
    return total


# -- certify_params ----------------------------------------------------------------

def certify_params(params, resolution=20001, pad=True):
    """Evaluate every scalar hypothesis of the construction on `params`."""
    rep = CertificateReport(params.fingerprint())
    rho = params.margin
    delta = params.delta
    s0, s1 = params.sigma0, params.sigma1
    kr = kernel_ranges(delta, resolution)
    pads = kr.pads if pad else {k: 0.0 for k in kr.pads}

    # bump profile: exact plateau/tail/evenness, non-increasing on the grid,
    # psi' strictly negative inside the transition (the flat ends underflow)
    x = np.linspace(0.0, 1.5 * delta, resolution)
    v, dv = K.psi_and_deriv(x, delta)
    even = np.array_equal(K.psi(-x, delta), v)
    exact = bool(np.all(v[x <= 0.5 * delta] == 1.0) and np.all(v[x >= delta] == 0.0) and even)
    monotone = bool(np.all(np.diff(v) <= 0.0))
    inner = (x > 0.52 * delta) & (x < 0.98 * delta)
    worst = float(dv[inner].max())
    rep.add(CheckResult("psi-profile", exact and monotone and worst < 0, -worst, 0.0, -worst, resolution, 0.0,
                        "plateau/tail/evenness exact, non-increasing on the grid; value = -max psi' on (0.52, 0.98) delta"))

    # circle map
    fp = K.phi(np.array([0.0, 1.0, 2.0])) - np.array([0.0, 1.0, 2.0])
    dfp = K.phi_deriv(np.array([0.0, 1.0]))
    c = np.linspace(0.0, 2.0, resolution)
    g = K.phi(c) - c
    zeros = set(np.round(c[g == 0.0], 12).tolist())
    ok = np.all(fp == 0.0) and dfp[0] == 0.5 and dfp[1] == 1.5 and zeros <= {0.0, 1.0, 2.0}
    periodic = float(np.max(np.abs(K.phi(c + 2.0) - K.phi(c) - 2.0)))
    rep.add(CheckResult("phi-fixed-points", bool(ok and periodic < 1e-12), 0.5, 0.0, 0.5, resolution, 0.0,
                        "phi(0,1,2) exact; phi'(0)=1/2, phi'(1)=3/2 exact; no other grid zero of phi - id; margin = |phi'-1| at fixed points"))

    # well-definedness of Q: 1 + min (phi'(x)-1) psi(y) > 0; psi takes every value in [0,1]
    inner = min(0.0, kr.phid_min - 1.0)
    rep.add(_check("well-defined", 1.0 + inner, 0.0, upper=False, resolution=resolution, pad=pads["phid"]))

    # sigma0 >= margin * max(max dQ/dc, 1/min dQ/dc)
    qmax = max(1.0, kr.phid_max + pads["phid"])
    qmin = min(1.0, kr.phid_min - pads["phid"])
    need = rho * max(qmax, 1.0 / qmin)
    rep.add(_check("xiaodeg", s0, need, upper=False, resolution=resolution,
                   note=f"margin factor {rho:g}"))

    # sigma0 dP/dd >= 3/4, attained on the plateau
    wd2 = s0 + (0.75 - s0) * max(0.0, kr.h_max)
    rep.add(_check("welldefined2", wd2, 0.75, upper=False, resolution=resolution, strict=False,
                   note="tight: equality on the plateau; off it psi + u psi' <= psi <= 1 since psi' <= 0"))

    floor = params.welldefined3_floor
    rep.add(_check("welldefined3", s0 * wd2, floor, upper=False, resolution=resolution,
                   note=f"floor {floor:g}"))

    # symmetry integral (four charts, section 0)
    integral = ts_exponent_integral(params, 0)
    rep.add(_check("symmetry-integral", integral, 0.0, upper=True,
                   note="sum over the four charts of the integral of log dQ/dc at section 0"))

    # beta conditions
    beta = params.beta
    cb = np.linspace(-beta, beta, resolution)
    dev = np.abs(K.phi_deriv(cb) - 0.5)
    bpad = _pad(dev, cb[1] - cb[0]) if pad else 0.0
    rep.add(_check("beta-window", float(dev.max()), params.phi_window, upper=True,
                   resolution=resolution, pad=bpad, note="sup |phi' - 1/2| on [-beta, beta]"))
    phimax = float(K.phi_deriv(cb).max())
    rep.add(_check("beta-domination", phimax, 0.75, upper=True, resolution=resolution, pad=bpad,
                   note="sup phi' on [-beta, beta] below the 3/4 floor of sigma0 dP/dd"))
    rep.add(_check("beta-size", beta, delta / (2.0 * rho), upper=True, strict=False))
    rep.add(_check("beta-exponent", 2 * beta**2 * math.log(0.75) + (1 - 2 * beta**2) * math.log(s0), 0.0, upper=False))
    rep.add(_check("k-support", 1.5 * delta / params.k, beta / rho, upper=True, strict=False))

    # sigma1 >> max of fibre partials
    bounds = fibre_derivative_bounds(params, kr)
    worst = max(bounds.values())
    rep.add(_check("big", s1, rho * worst, upper=False, resolution=resolution,
                   note="max fibre partial " + ", ".join(f"{k}={v:.4g}" for k, v in bounds.items())))

    # anchors
    anchors = params.anchors.ordered()
    fixed = all(is_fixed(p, params.n0) and is_fixed(p, params.n1) for p in anchors)
    rep.add(CheckResult("anchors-fixed", fixed, float(fixed), 1.0, 0.0 if fixed else -1.0,
                        note="exact rational check under A^n0 and A^n1"))
    pts = params.anchor_xy
    dmin = min(float(torus_distance(pts[i], pts[j])) for i in range(4) for j in range(i + 1, 4))
    rep.add(_check("anchor-separation", dmin, 10.0 * delta, upper=False))
    disjoint = all(boxes_disjoint(pts[i], pts[j], 5.0 * delta) for i in range(4) for j in range(i + 1, 4))
    rep.add(CheckResult("anchor-boxes", disjoint, float(disjoint), 1.0, 0.0 if disjoint else -1.0,
                        note="pairwise disjoint 5*delta leaf boxes"))

    if params.has_surgery:
        _certify_surgery(rep, params, kr, resolution)
    return rep


def perturbation_c1(params, resolution=2001):
    """Grid maxima of the stated closed form sqrt(2)|psi(l c) psi'(l rho)|/l^2
    and of the actual operator norm of Df~ - Df on the perturbation chart."""
    ell, delta = params.ell, params.delta
    c = np.linspace(0.0, 1.25 * delta / ell, resolution)
    r = np.linspace(0.0, 1.25 * delta / ell, resolution)
    sc, dsc = K.psi_and_deriv(ell * c, delta)
    sr, dsr = K.psi_and_deriv(ell * r, delta)
    closed = math.sqrt(2.0) * np.max(np.abs(sc)[:, None] * np.abs(dsr)[None, :]) / ell**2
    true = np.sqrt(np.square(sc[:, None] * dsr[None, :]) + np.square(dsc[:, None] * sr[None, :])) / ell**2
    return float(closed), float(true.max())


def _certify_surgery(rep, params, kr, resolution):
    rho = params.margin
    delta, ell, eps = params.delta, params.ell, params.eps
    slope = K.psi_max_slope(delta)
    lhs = max(1.5 * delta / ell, math.sqrt(2.0) * slope / ell**2, 1.0 / ell**3)
    rep.add(_check("definediffeo", lhs, eps / rho, upper=True, strict=False,
                   note="max(3 delta/(2 l), sqrt2 max psi' max psi / l^2, 1/l^3) against eps/margin"))
    rep.add(_check("perturbation-support", delta / ell, eps / 10.0, upper=True, strict=False,
                   note="support radius of R inside the eps/10 box of r"))
    rep.add(_check("perturbation-diffeo", 1.0 - slope / ell**2, 0.0, upper=False,
                   note="inf dR/dc"))
    closed, true = perturbation_c1(params)
    bound = math.sqrt(2.0) * slope / ell**2
    rep.add(CheckResult("perturbation-c1", bool(true <= closed + 1e-15 and closed <= eps and abs(closed - bound) <= 1e-10),
                        closed, eps, eps - closed, 2001, 0.0,
                        f"grid max of the closed form = {closed:.12g}, analytic sqrt2*4/delta/l^2 = {bound:.12g}, "
                        f"grid max of the operator norm = {true:.12g}"))
    rep.add(_check("section-one", ell, delta, upper=False, strict=False,
                   note="psi(l * 1) = 0 keeps y = 1 fixed by the perturbation"))

    h = params.r
    q1, q2 = params.anchor("q1"), params.anchor("q2")
    on_leaves = max(
        float(torus_distance(h.backward(0, params.sigma1, q1), h.point)),
        float(torus_distance(h.forward(0, params.sigma1, q2), h.point)),
    )
    clearance = min(box_distance(h.point, b, 5.0 * delta) for b in params.anchor_xy)
    iso = orbit_isolation(h, eps, params.sigma1, q1, q2, 50)
    rep.add(_check("heteroclinic-leaves", on_leaves, 1e-12, upper=True, strict=False,
                   note="r on F^uu(q1) and F^ss(q2)"))
    rep.add(_check("heteroclinic-clearance", clearance, eps, upper=False,
                   note="eps-ball of r misses every anchor box: f is a product there"))
    rep.add(_check("heteroclinic-isolation", iso, eps, upper=False, note="|i| <= 50"))


# -- cones ----------------------------------------------------------------------------

@dataclass(frozen=True)
class ConeSpec:
    E: tuple
    F: tuple
    alpha: float

    @property
    def idx(self):
        return tuple(self.E) + tuple(self.F)

    def label(self):
        e = "+".join(FRAME_LABELS[i] for i in self.E)
        f = "+".join(FRAME_LABELS[i] for i in self.F)
        return f"C[{e}|{f}]"


# cone layouts of the construction, indices in the 5-frame
TAU1_UU = (UU,), (U, TS, S)
TAU1_SS = (SS,), (U, TS, S)
TAU3 = (TS,), (U,)
TAU4 = (S,), (U,)


@dataclass
class ConeResult:
    cone: str
    direction: str
    map: str
    alpha: float
    kappa_hat: float
    kappa_bound: float
    min_margin: float
    samples: int
    invariant_subspace: bool

    @property
    def passed(self):
        return self.invariant_subspace and self.kappa_hat < 1.0


def _boundary_directions(dim, count=64):
    if dim == 1:
        return np.array([[1.0], [-1.0]])
    if dim == 2:
        t = np.linspace(0, 2 * np.pi, count, endpoint=False)
        return np.stack([np.cos(t), np.sin(t)], axis=1)
    # Fibonacci sphere plus the coordinate axes
    i = np.arange(count) + 0.5
    phi = np.arccos(1 - 2 * i / count)
    th = np.pi * (1 + 5**0.5) * i
    pts = np.stack([np.cos(th) * np.sin(phi), np.sin(th) * np.sin(phi), np.cos(phi)], axis=1)
    pts = np.concatenate([pts, np.eye(3), -np.eye(3)])
    return pts / np.linalg.norm(pts, axis=1, keepdims=True)


def _restrict(J, cone, frame_size):
    idx = list(cone.idx)
    rest = [i for i in range(frame_size) if i not in idx]
    leak = float(np.max(np.abs(J[..., rest, :][..., :, idx]))) if rest else 0.0
    return J[..., idx, :][..., :, idx], leak == 0.0


def cone_ratios(M, cone, dirs):
    """Ratio |(Mv)_F| / (alpha |(Mv)_E|) over boundary vectors v = e + alpha w."""
    nE = len(cone.E)
    n = M.shape[-1]
    V = np.zeros((len(dirs), n))
    V[:, 0] = 1.0
    V[:, nE:] = cone.alpha * dirs
    MV = np.einsum("...ij,kj->...ki", M, V)
    vE = np.linalg.norm(MV[..., :nE], axis=-1)
    vF = np.linalg.norm(MV[..., nE:], axis=-1)
    return vF / (cone.alpha * vE)


def _kappa_bound(M, cone):
    nE = len(cone.E)
    a = cone.alpha
    MEE = np.abs(M[..., 0, 0])
    MEF = np.linalg.norm(M[..., 0, nE:], axis=-1)
    MFE = np.linalg.norm(M[..., nE:, 0], axis=-1)
    MFF = np.linalg.norm(M[..., nE:, nE:], ord=2, axis=(-2, -1))
    den = a * (MEE - a * MEF)
    return np.where(den > 0, (MFE + a * MFF) / np.where(den > 0, den, 1.0), np.inf)


def cone_certify(cone, direction, map_name, samples, params, seed=0, points=None):
    """Worst sampled aperture contraction of a cone field under Df (forward)
    or Df^-1 (backward)."""
    from .experiments.sampling import stratified_points

    if map_name not in JACOBIANS:
        raise ConfigurationError(f"unknown map {map_name!r}")
    if points is None:
        points = stratified_points(params, samples, seed, factor=map_name in ("g", "gtilde"))
    J = JACOBIANS[map_name](points, params)
    size = J.shape[-1]
    label = cone.label()
    if map_name in ("g", "gtilde"):
        remap = {UU: 0, TS: 1, SS: 2}
        cone = ConeSpec(tuple(remap[i] for i in cone.E), tuple(remap[i] for i in cone.F), cone.alpha)
    M, invariant = _restrict(J, cone, size)
    if direction == "backward":
        M = np.linalg.inv(M)
    elif direction != "forward":
        raise ValueError("direction must be 'forward' or 'backward'")
    dirs = _boundary_directions(len(cone.F))
    ratios = cone_ratios(M, cone, dirs)
    kappa_hat = float(ratios.max())
    bound = float(_kappa_bound(M, cone).max())
    return ConeResult(
        cone=label,
        direction=direction,
        map=map_name,
        alpha=cone.alpha,
        kappa_hat=kappa_hat,
        kappa_bound=bound,
        min_margin=1.0 - kappa_hat,
        samples=len(np.atleast_1d(points.y)),
        invariant_subspace=invariant,
    )


def search_aperture(cones, params, samples=20000, seed=0, target=0.9, grid=None):
    """Smallest aperture on a geometric grid at which every listed cone
    (E, F, direction, map) has sampled kappa below target."""
    from .experiments.sampling import stratified_points

    pts = {False: stratified_points(params, samples, seed),
           True: stratified_points(params, samples, seed, factor=True)}
    grid = grid if grid is not None else 2.0 ** np.arange(-6, 16)
    for alpha in grid:
        results = [
            cone_certify(ConeSpec(E, F, float(alpha)), direction, m, samples, params,
                         points=pts[m in ("g", "gtilde")])
            for E, F, direction, m in cones
        ]
        if all(r.invariant_subspace and r.kappa_hat < target for r in results):
            return float(alpha), results
    raise SearchExhaustedError(f"no aperture on the grid contracts {[c[:3] for c in cones]}")


# -- growth sandwiches -------------------------------------------------------------

@dataclass
class SandwichResult:
    name: str
    steps: int
    orbits: int
    lower: float  # log of the lower envelope
    upper: float
    worst_low: float  # min over orbits of log growth - log lower
    worst_high: float  # min over orbits of log upper - log growth
    offender: object = None

    @property
    def passed(self):
        return self.worst_low >= -1e-9 and self.worst_high >= -1e-9


def _orbit_jacobians(params, points, steps, map_name="f"):
    step = MAPS[map_name]
    jac = JACOBIANS[map_name]
    Js = []
    p = points
    for _ in range(steps):
        Js.append(jac(p, params))
        p = step(p, params)
    return Js


def growth_sandwich_check(kind, steps, samples, params, seed=1):
    """Growth envelopes along sampled orbits.

    kind: "uu" (forward tau1 cone, chi = sigma1), "u" (E^u frame line, exact
    product of sigma0 dP/dd), "ts" (backward tau3 cone, envelope from the range
    of dQ/dc), "s" (backward tau4 cone, chi = sigma0).
    """
    from .experiments.sampling import stratified_points

    pts = stratified_points(params, samples, seed)
    Js = _orbit_jacobians(params, pts, steps)
    n = steps
    if kind == "uu":
        cone = ConeSpec(*TAU1_UU, params.tau1)
        idx = list(cone.idx)
        v = np.zeros((samples, len(idx)))
        v[:, 0] = 1.0
        v[:, 1] = params.tau1  # boundary vector
        logg = np.zeros(samples)
        for J in Js:
            w = np.einsum("nij,nj->ni", J[:, idx][:, :, idx], v)
            nrm = np.linalg.norm(w, axis=1)
            logg += np.log(nrm)
            v = w / nrm[:, None]
        logg -= 0.5 * np.log1p(params.tau1**2)  # |v0|
        half = 0.5 * math.log1p(params.tau1**2)
        lo = n * math.log(params.sigma1) - half
        hi = n * math.log(params.sigma1) + half
    elif kind == "u":
        logg = np.zeros(samples)
        exact = np.zeros(samples)
        v = np.zeros((samples, 5))
        v[:, U] = 1.0
        for J in Js:
            w = np.einsum("nij,nj->ni", J, v)
            nrm = np.linalg.norm(w, axis=1)
            logg += np.log(nrm)
            exact += np.log(J[:, U, U])
            v = w / nrm[:, None]
        # exact equality: report deviations against the product itself
        lo = hi = 0.0
        dev = logg - exact
        return SandwichResult("u", n, samples, lo, hi, float(-np.abs(dev).max()), float(-np.abs(dev).max()))
    elif kind in ("ts", "s"):
        if kind == "ts":
            cone = ConeSpec(*TAU3, params.tau3)
        else:
            cone = ConeSpec(*TAU4, params.tau4)
        idx = list(cone.idx)
        v = np.zeros((samples, 2))
        v[:, 0] = 1.0
        v[:, 1] = cone.alpha
        logg = np.zeros(samples)
        for J in reversed(Js):
            Minv = np.linalg.inv(J[:, idx][:, :, idx])
            w = np.einsum("nij,nj->ni", Minv, v)
            nrm = np.linalg.norm(w, axis=1)
            logg += np.log(nrm)
            v = w / nrm[:, None]
        half = 0.5 * math.log1p(cone.alpha**2)
        logg -= half
        if kind == "ts":
            kr = kernel_ranges(params.delta)
            qmax = max(1.0, kr.phid_max)
            qmin = min(1.0, kr.phid_min)
            lo = -n * math.log(qmax) - half
            hi = -n * math.log(qmin) + half
        else:
            lo = n * math.log(params.sigma0) - half
            hi = n * math.log(params.sigma0) + half
    else:
        raise ValueError(f"unknown sandwich kind {kind!r}")
    low = logg - lo
    high = hi - logg
    worst = int(np.argmin(np.minimum(low, high)))
    return SandwichResult(kind, n, samples, lo, hi, float(low.min()), float(high.min()),
                          offender=None if min(low.min(), high.min()) >= -1e-9 else worst)


def certify_cones(params, samples=100000, seed=0, include_perturbed=True):
    """The cone fields of the construction at the stored apertures."""
    from .experiments.sampling import stratified_points

    pts = stratified_points(params, samples, seed)
    specs = [
        (ConeSpec(*TAU1_UU, params.tau1), "forward"),
        (ConeSpec(*TAU1_SS, params.tau1), "backward"),
        (ConeSpec(*TAU3, params.tau3), "backward"),
        (ConeSpec(*TAU4, params.tau4), "backward"),
    ]
    maps = ["f"]
    if include_perturbed and params.has_surgery:
        maps.append("ftilde")
    out = []
    for m in maps:
        for cone, direction in specs:
            out.append(cone_certify(cone, direction, m, samples, params, points=pts))
    gpts = stratified_points(params, samples, seed, factor=True)
    for m in ["g"] + (["gtilde"] if include_perturbed and params.has_surgery else []):
        out.append(cone_certify(ConeSpec((UU,), (TS,), params.tau1), "forward", m, samples, params, points=gpts))
        out.append(cone_certify(ConeSpec((SS,), (TS,), params.tau1), "backward", m, samples, params, points=gpts))
    return out


def add_cone_checks(report, results):
    for r in results:
        report.add(CheckResult(
            f"cone:{r.map}:{r.direction}:{r.cone}",
            r.passed,
            r.kappa_hat,
            1.0,
            r.min_margin,
            r.samples,
            0.0,
            f"alpha={r.alpha:g}, triangle-inequality bound {r.kappa_bound:.4g}",
        ))
    return report


def require_pass(report):
    if not report.passed:
        raise CertificationError(report)
    return report


def certify(params, resolution=20001, cone_samples=100000, seed=0):
    """Scalar checks plus cone fields; returns (report, params carrying the hash)."""
    rep = certify_params(params, resolution)
    if None not in (params.tau1, params.tau3, params.tau4):
        add_cone_checks(rep, certify_cones(params, cone_samples, seed))
    else:
        rep.add(CheckResult("cone-apertures", False, 0.0, 1.0, -1.0, note="tau1/tau3/tau4 missing"))
    certified = params.with_certificate(rep.hash) if rep.passed else params.evolve()
    return rep, certified
