"""The maps: the fibre surgery ID, the skew product f on T^2 x S x T^2, its
factor g on T^2 x S, the perturbation f~ / g~, and their derivative cocycles
in the adapted frame (E^uu, E^u, TS, E^s, E^ss)."""

from dataclasses import dataclass, replace
import hashlib
import json

import numpy as np

from . import kernels as K
from .errors import ConfigurationError, UncertifiedParamsError
from .geometry import (
    FRAME,
    AnchorSet,
    HeteroclinicPoint,
    cat_power,
    circle_distance,
    min_translate,
    torus_distance,
    wrap,
)

# frame index names, in matrix order
UU, U, TS, S, SS = range(5)
FRAME_LABELS = ("uu", "u", "ts", "s", "ss")
# index 0..3 of the anchors: p1, p2, q1, q2
_SHIFT = np.array([0.0, 1.0, 0.0, 1.0])
_OUTSIDE = 1.0  # chart coordinate used for points in no box; psi vanishes there


@dataclass(frozen=True)
class SystemParams:
    delta: float
    beta: float
    k: float
    n0: int
    n1: int
    anchors: AnchorSet
    ell: float = None
    eps: float = None
    r: HeteroclinicPoint = None
    tau1: float = None
    tau3: float = None
    tau4: float = None
    margin: float = 10000.0
    phi_window: float = 1e-4
    welldefined3_floor: float = 7500.0
    preset: str = "custom"
    cert_hash: str = None

    def __post_init__(self):
        A0, s0 = cat_power(self.n0)
        A1, s1 = cat_power(self.n1)
        object.__setattr__(self, "_A0", np.array(A0, dtype=float))
        object.__setattr__(self, "_A1", np.array(A1, dtype=float))
        object.__setattr__(self, "_sigma0", s0)
        object.__setattr__(self, "_sigma1", s1)
        object.__setattr__(self, "_anchor_xy", self.anchors.floats())

    @property
    def sigma0(self):
        return self._sigma0

    @property
    def sigma1(self):
        return self._sigma1

    @property
    def A0(self):
        return self._A0

    @property
    def A1(self):
        return self._A1

    @property
    def anchor_xy(self):
        return self._anchor_xy

    @property
    def box(self):
        return 5.0 * self.delta

    @property
    def has_surgery(self):
        return self.r is not None and self.ell is not None and self.eps is not None

    def anchor(self, name):
        return self.anchor_xy[("p1", "p2", "q1", "q2").index(name)]

    # -- serialisation -------------------------------------------------------

    def to_dict(self, with_hash=True):
        out = {
            "preset": self.preset,
            "delta": self.delta,
            "beta": self.beta,
            "k": self.k,
            "n0": self.n0,
            "n1": self.n1,
            "anchors": self.anchors.as_dict(),
            "ell": self.ell,
            "eps": self.eps,
            "r": None
            if self.r is None
            else {"t": self.r.t, "s": self.r.s, "translate": list(self.r.translate)},
            "tau1": self.tau1,
            "tau3": self.tau3,
            "tau4": self.tau4,
            "margin": self.margin,
            "phi_window": self.phi_window,
            "welldefined3_floor": self.welldefined3_floor,
        }
        if with_hash:
            out["cert_hash"] = self.cert_hash
        return out

    @classmethod
    def from_dict(cls, data):
        data = dict(data)
        anchors = AnchorSet.from_dict(data.pop("anchors"))
        r = data.pop("r", None)
        if r is not None:
            q1 = np.array([float(c) for c in anchors.q1])
            r = HeteroclinicPoint(
                point=wrap(q1 + float(r["t"]) * FRAME.v_u),
                t=float(r["t"]),
                s=float(r["s"]),
                translate=tuple(r["translate"]),
            )
        return cls(anchors=anchors, r=r, **data)

    def fingerprint(self):
        """Content hash of the parameter record (certificate hash excluded)."""
        blob = json.dumps(self.to_dict(with_hash=False), sort_keys=True, default=str)
        return hashlib.sha256(blob.encode()).hexdigest()

    def with_certificate(self, cert_hash):
        return replace(self, cert_hash=cert_hash)

    def evolve(self, **changes):
        """Copy with changes; any change drops the certificate."""
        changes.setdefault("cert_hash", None)
        return replace(self, **changes)


def require_certified(params, surgery=False):
    if params.cert_hash is None:
        raise UncertifiedParamsError(
            "parameters carry no passing certificate; run certify first"
        )
    if surgery and not params.has_surgery:
        raise ConfigurationError("parameters lack the heteroclinic point r / ell / eps")


# -- points -------------------------------------------------------------------

@dataclass
class MPoint:
    """Point(s) of T^2 x S x T^2; x, z have a trailing axis of length 2."""

    x: np.ndarray
    y: np.ndarray
    z: np.ndarray

    def __post_init__(self):
        self.x = wrap(self.x)
        self.y = wrap_circle(self.y)
        self.z = wrap(self.z)

    def project(self):
        return GPoint(self.x, self.y)

    def copy(self):
        return MPoint(self.x.copy(), np.array(self.y, copy=True), self.z.copy())

    def __len__(self):
        return np.shape(self.y)[0] if np.ndim(self.y) else 1


@dataclass
class GPoint:
    x: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        self.x = wrap(self.x)
        self.y = wrap_circle(self.y)


def wrap_circle(y):
    out = np.mod(np.asarray(y, dtype=float), 2.0)
    return np.where(out >= 2.0, 0.0, out)


def distance(p, q):
    """Product distance on T^2 x S x T^2 (Euclidean combination)."""
    return np.sqrt(
        torus_distance(p.x, q.x) ** 2 + circle_distance(p.y, q.y) ** 2 + torus_distance(p.z, q.z) ** 2
    )


def g_distance(p, q):
    return np.hypot(torus_distance(p.x, q.x), circle_distance(p.y, q.y))


# -- charts -------------------------------------------------------------------

def _x_chart(params, x):
    """Which anchor box holds x (index 0..3 or -1) and the chart coords."""
    x = np.asarray(x, dtype=float)
    disp = min_translate(x[None, ...] - params.anchor_xy.reshape((4,) + (1,) * (x.ndim - 1) + (2,)))
    a = disp @ FRAME.v_u
    b = disp @ FRAME.v_s
    w = params.box
    inside = (np.abs(a) <= w) & (np.abs(b) <= w)
    hit = inside.any(axis=0)
    which = np.where(hit, inside.argmax(axis=0), -1)
    sel = np.clip(which, 0, 3)[None, ...]
    a_sel = np.where(hit, np.take_along_axis(a, sel, 0)[0], _OUTSIDE)
    b_sel = np.where(hit, np.take_along_axis(b, sel, 0)[0], _OUTSIDE)
    return which, a_sel, b_sel


def _fibre_lift(which, y):
    """Circle coordinate in [-1,1) centred on the section the chart anchors."""
    shift = np.where(which >= 0, _SHIFT[np.clip(which, 0, 3)], 0.0)
    return K.pi2(y - shift)


def _z_chart(params, which, z):
    """(d, e, active) for the P-action: only at p1/p2, z in the same anchor's box."""
    z = np.asarray(z, dtype=float)
    sel = np.clip(which, 0, 3)
    disp = min_translate(z - params.anchor_xy[sel])
    d = disp @ FRAME.v_u
    e = disp @ FRAME.v_s
    w = params.box
    active = ((which == 0) | (which == 1)) & (np.abs(d) <= w) & (np.abs(e) <= w)
    return np.where(active, d, _OUTSIDE), np.where(active, e, _OUTSIDE), active


def _r_chart(params, x):
    disp = min_translate(np.asarray(x, dtype=float) - params.r.point)
    a = disp @ FRAME.v_u
    b = disp @ FRAME.v_s
    w = params.eps / 10.0
    inside = (np.abs(a) <= w) & (np.abs(b) <= w)
    return np.where(inside, a, _OUTSIDE), np.where(inside, b, _OUTSIDE), inside


# -- maps ---------------------------------------------------------------------

def _fibre_step(params, x, y, z=None):
    which, a, b = _x_chart(params, x)
    c = _fibre_lift(which, y)
    y_new = wrap_circle(y + K.Q_increment(a, b, c, params.delta))
    if z is None:
        return y_new, None
    d, e, active = _z_chart(params, which, z)
    inc = K.P_increment(a, b, c, d, e, params.k, params.sigma0, params.delta)
    z_new = z + np.where(active, inc, 0.0)[..., None] * FRAME.v_u
    return y_new, z_new


def ID_eval(p, params):
    y, z = _fibre_step(params, p.x, p.y, p.z)
    return MPoint(p.x, y, z)


def _linear(M, x):
    """wrap(M x) with explicit products (no BLAS), so compiled loops match it bit for bit."""
    x = np.asarray(x, dtype=float)
    x0, x1 = x[..., 0], x[..., 1]
    return wrap(np.stack([x0 * M[0, 0] + x1 * M[0, 1], x0 * M[1, 0] + x1 * M[1, 1]], axis=-1))


def _product(params, x, y, z=None):
    x_new = _linear(params.A1, x)
    if z is None:
        return x_new, y
    return x_new, y, _linear(params.A0, z)


def f_eval(p, params):
    y, z = _fibre_step(params, p.x, p.y, p.z)
    return MPoint(*_product(params, p.x, y, z))


def g_eval(q, params):
    y, _ = _fibre_step(params, q.x, q.y)
    return GPoint(*_product(params, q.x, y))


def H_eval(params, x, y):
    """Circle shift R anchored at r; identity off the eps/10 box of r."""
    if not params.has_surgery:
        raise ConfigurationError("perturbed map needs r, ell and eps in the parameters")
    a, b, inside = _r_chart(params, x)
    c = K.pi2(y)
    inc = np.where(inside, K.R_increment(a, b, c, params.ell, params.delta), 0.0)
    return wrap_circle(y + inc)


def ftilde_eval(p, params):
    y = H_eval(params, p.x, p.y)
    return f_eval(MPoint(p.x, y, p.z), params)


def gtilde_eval(q, params):
    y = H_eval(params, q.x, q.y)
    return g_eval(GPoint(q.x, y), params)


def semiconjugacy_residual(p, params, perturbed=False):
    """dist(pi(f(p)), g(pi(p))) pointwise."""
    if perturbed:
        lhs = ftilde_eval(p, params).project()
        rhs = gtilde_eval(p.project(), params)
    else:
        lhs = f_eval(p, params).project()
        rhs = g_eval(p.project(), params)
    return g_distance(lhs, rhs)


MAPS = {"f": f_eval, "ftilde": ftilde_eval}
FACTOR_MAPS = {"g": g_eval, "gtilde": gtilde_eval}


# -- derivative cocycles --------------------------------------------------------

def fibre_partials(params, x, y, z):
    """Q and P partials at the points (P partials are identity-like off support)."""
    which, a, b = _x_chart(params, x)
    c = _fibre_lift(which, y)
    Qa, Qb, Qc = K.Q_partials(a, b, c, params.delta)
    d, e, active = _z_chart(params, which, z)
    Pa, Pb, Pc, Pd, Pe = K.P_partials(a, b, c, d, e, params.k, params.sigma0, params.delta)
    zero = np.zeros_like(Qc)
    Pa, Pb, Pc, Pe = (np.where(active, v, zero) for v in (Pa, Pb, Pc, Pe))
    Pd = np.where(active, Pd, 1.0)
    return {"Qa": Qa, "Qb": Qb, "Qc": Qc, "Pa": Pa, "Pb": Pb, "Pc": Pc, "Pd": Pd, "Pe": Pe}


def _assemble(params, fp):
    s0, s1 = params.sigma0, params.sigma1
    shape = np.shape(fp["Qc"])
    J = np.zeros(shape + (5, 5))
    J[..., UU, UU] = s1
    J[..., U, UU] = s0 * fp["Pa"]
    J[..., U, U] = s0 * fp["Pd"]
    J[..., U, TS] = s0 * fp["Pc"]
    J[..., U, S] = s0 * fp["Pe"]
    J[..., U, SS] = s0 * fp["Pb"]
    J[..., TS, UU] = fp["Qa"]
    J[..., TS, TS] = fp["Qc"]
    J[..., TS, SS] = fp["Qb"]
    J[..., S, S] = 1.0 / s0
    J[..., SS, SS] = 1.0 / s1
    return J


def Df(p, params):
    """Jacobian of f in the adapted frame, shape (..., 5, 5)."""
    return _assemble(params, fibre_partials(params, p.x, p.y, p.z))


def _DH(params, x, y):
    """Jacobian of the surgery H in the adapted frame."""
    a, b, inside = _r_chart(params, x)
    c = K.pi2(y)
    Ra, Rb, Rc = K.R_partials(a, b, c, params.ell, params.delta)
    shape = np.shape(np.asarray(y))
    J = np.broadcast_to(np.eye(5), shape + (5, 5)).copy()
    J[..., TS, UU] = np.where(inside, Ra, 0.0)
    J[..., TS, SS] = np.where(inside, Rb, 0.0)
    J[..., TS, TS] = np.where(inside, Rc, 1.0)
    return J


def Dftilde(p, params):
    y = H_eval(params, p.x, p.y)
    return Df(MPoint(p.x, y, p.z), params) @ _DH(params, p.x, p.y)


_G_IDX = [UU, TS, SS]


def Dg(q, params):
    """Jacobian of g in the frame (E^uu, TS, E^ss), shape (..., 3, 3)."""
    which, a, b = _x_chart(params, q.x)
    c = _fibre_lift(which, q.y)
    Qa, Qb, Qc = K.Q_partials(a, b, c, params.delta)
    J = np.zeros(np.shape(Qc) + (3, 3))
    J[..., 0, 0] = params.sigma1
    J[..., 1, 0] = Qa
    J[..., 1, 1] = Qc
    J[..., 1, 2] = Qb
    J[..., 2, 2] = 1.0 / params.sigma1
    return J


def Dgtilde(q, params):
    y = H_eval(params, q.x, q.y)
    DH = _DH(params, q.x, q.y)[..., _G_IDX, :][..., :, _G_IDX]
    return Dg(GPoint(q.x, y), params) @ DH


JACOBIANS = {"f": Df, "ftilde": Dftilde, "g": Dg, "gtilde": Dgtilde}


def cu_log_growth(params, x, y, z):
    """log(sigma0 * dP/dd): the exact one-step growth of the E^u frame line."""
    return np.log(params.sigma0 * fibre_partials(params, x, y, z)["Pd"])


def ts_log_growth(params, x, y):
    """log dQ/dc along the circle fibre (the TS block of Dg)."""
    which, a, b = _x_chart(params, x)
    c = _fibre_lift(which, y)
    return np.log(K.Q_partials(a, b, c, params.delta)[2])


def fixed_point_targets(params):
    """The six fixed points and their diagonal Jacobians."""
    s0, s1 = params.sigma0, params.sigma1
    P = {n: params.anchor(n) for n in ("p1", "p2", "q1", "q2")}
    rows = [
        ("p1", 0.0, (s1, 0.75, 0.5, 1 / s0, 1 / s1)),
        ("p2", 1.0, (s1, 0.75, 0.5, 1 / s0, 1 / s1)),
        ("q1", 0.0, (s1, s0, 0.5, 1 / s0, 1 / s1)),
        ("q2", 1.0, (s1, s0, 0.5, 1 / s0, 1 / s1)),
        ("q1", 1.0, (s1, s0, 1.5, 1 / s0, 1 / s1)),
        ("q2", 0.0, (s1, s0, 1.5, 1 / s0, 1 / s1)),
    ]
    return [
        (f"({name},{int(y)},{name})", MPoint(P[name][None], np.array([y]), P[name][None]), np.array(diag))
        for name, y, diag in rows
    ]


def g_step_with_growth(params, x, y, perturbed=False):
    """One factor step on raw arrays, also returning log dQ/dc at the
    (possibly surgery-shifted) point: the TS block of Dg, or of Dg~ when
    perturbed (H only rescales TS by dR/dc, which is returned added in)."""
    extra = 0.0
    if perturbed:
        a_r, b_r, inside = _r_chart(params, x)
        c_r = K.pi2(y)
        inc = np.where(inside, K.R_increment(a_r, b_r, c_r, params.ell, params.delta), 0.0)
        extra = np.log(np.where(inside, K.R_partials(a_r, b_r, c_r, params.ell, params.delta)[2], 1.0))
        y = wrap_circle(y + inc)
    which, a, b = _x_chart(params, x)
    c = _fibre_lift(which, y)
    rho = np.hypot(a, b)
    s = K.psi(rho, params.delta)
    y_new = wrap_circle(y + s * K.phi_minus_id(c))
    growth = np.log1p((K.phi_deriv(c) - 1.0) * s) + extra
    return _linear(params.A1, x), y_new, growth


def f_step_with_partials(params, x, y, z):
    """One step of f on raw arrays plus the fibre partials at the start point
    (single chart evaluation; used by the orbit-heavy experiments)."""
    which, a, b = _x_chart(params, x)
    c = _fibre_lift(which, y)
    delta = params.delta
    Qa, Qb, Qc = K.Q_partials(a, b, c, delta)
    y_new = wrap_circle(y + K.Q_increment(a, b, c, delta))
    d, e, active = _z_chart(params, which, z)
    z_new = z
    Pd = np.ones_like(Qc)
    Pc = np.zeros_like(Qc)
    if np.any(active):
        k, s0 = params.k, params.sigma0
        inc = K.P_increment(a, b, c, d, e, k, s0, delta)
        z_new = z + np.where(active, inc, 0.0)[..., None] * FRAME.v_u
        _, _, pc, pd, _ = K.P_partials(a, b, c, d, e, k, s0, delta)
        Pd = np.where(active, pd, 1.0)
        Pc = np.where(active, pc, 0.0)
    x_new, y_new, z_new = _product(params, x, y_new, z_new)
    return x_new, y_new, z_new, {"Qc": Qc, "Pd": Pd, "Pc": Pc}
