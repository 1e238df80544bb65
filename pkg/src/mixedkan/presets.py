"""Parameter presets.

"paper": the published constants (delta = 1e-4, factor-10000 slack). Bump
regions are far below Monte-Carlo resolution; used for formula-level checks.

"desk": the same construction at delta = 0.035 with the slack factor relaxed
to a margin of 2, n0/n1/k/ell chosen minimal subject to certification. The
frozen values below are reproduced by `derive_desk()`.
"""

import math


from . import kernels as K
from .errors import ConfigurationError, SearchExhaustedError
from .geometry import cat_power, fixed_points, heteroclinic_point, select_anchors
from .system import SystemParams

PRESETS = ("paper", "desk")


def _anchors(n0, delta):
    return select_anchors(fixed_points(n0), delta)


def minimal_n1(n0, delta, k, sigma0, margin, anchors, beta=None):
    """Smallest multiple of n0 whose sigma1 passes the 'big' check."""
    from .certify import fibre_derivative_bounds

    probe = SystemParams(delta=delta, beta=beta or delta / (2 * margin), k=k, n0=n0, n1=n0,
                         anchors=anchors, margin=margin)
    need = margin * max(fibre_derivative_bounds(probe).values())
    n1 = n0
    while cat_power(n1)[1] < need:
        n1 += n0
    return n1


def minimal_ell(delta, eps, margin):
    """Smallest integer ell passing the three bounds of the surgery size check."""
    slope = K.psi_max_slope(delta)
    lower = max(1.5 * delta * margin / eps,
                math.sqrt(margin * math.sqrt(2.0) * slope / eps),
                (margin / eps) ** (1.0 / 3.0),
                delta)
    return float(math.ceil(lower))


def minimal_k(delta, beta, margin):
    return float(math.ceil(1.5 * delta * margin / beta))


def _build(delta, beta, n0, margin, eps, phi_window, floor, preset, k=None, n1=None, ell=None,
           taus=(None, None, None)):
    anchors = _anchors(n0, delta)
    k = k or minimal_k(delta, beta, margin)
    sigma0 = cat_power(n0)[1]
    n1 = n1 or minimal_n1(n0, delta, k, sigma0, margin, anchors, beta)
    ell = ell or minimal_ell(delta, eps, margin)
    r = heteroclinic_point(anchors, delta, eps, cat_power(n1)[1])
    return SystemParams(
        delta=delta, beta=beta, k=k, n0=n0, n1=n1, anchors=anchors, ell=ell, eps=eps, r=r,
        tau1=taus[0], tau3=taus[1], tau4=taus[2], margin=margin, phi_window=phi_window,
        welldefined3_floor=floor, preset=preset,
    )


# frozen desk values (see derive_desk)
DESK = dict(delta=0.035, beta=0.008, n0=2, margin=2.0, eps=0.15, phi_window=1e-3, floor=2.0,
            k=14.0, n1=6, ell=47.0, taus=(32.0, 8.0, 8.0))
PAPER = dict(delta=1e-4, beta=5e-9, n0=11, margin=10000.0, eps=0.01, phi_window=1e-4, floor=7500.0,
             k=None, n1=22, ell=238000.0, taus=(8192.0, 0.015625, 0.015625))


def desk_preset():
    return _build(preset="desk", **DESK)


def paper_preset():
    return _build(preset="paper", **PAPER)


def get_preset(name):
    if name == "desk":
        return desk_preset()
    if name == "paper":
        return paper_preset()
    raise ConfigurationError(f"unknown preset {name!r}; choose from {PRESETS}")


def minimal_n0(delta, margin):
    """Smallest n0 with four admissible anchors and sigma0 above the xiaodeg bound."""
    from .certify import kernel_ranges

    kr = kernel_ranges(delta)
    need = margin * max(max(1.0, kr.phid_max), 1.0 / min(1.0, kr.phid_min))
    for n0 in range(1, 20):
        if cat_power(n0)[1] <= need:
            continue
        try:
            _anchors(n0, delta)
        except ConfigurationError:
            continue
        return n0
    raise SearchExhaustedError("no admissible n0 below 20")


def derive_desk(delta=0.035, margin=2.0, eps=0.15, samples=100000, seed=0):
    """Recompute the desk preset from its free choices (delta, margin, eps)."""
    beta = 0.008
    n0 = minimal_n0(delta, margin)
    params = _build(delta, beta, n0, margin, eps, 1e-3, 2.0, "desk")
    return params.evolve(**search_taus(params, samples, seed))


def search_taus(params, samples=100000, seed=0):
    from .certify import TAU1_SS, TAU1_UU, TAU3, TAU4, search_aperture
    from .system import SS, TS, UU

    maps = ["f", "ftilde"] if params.has_surgery else ["f"]
    gmaps = ["g", "gtilde"] if params.has_surgery else ["g"]
    tau1_cones = [(*TAU1_UU, "forward", m) for m in maps] + [(*TAU1_SS, "backward", m) for m in maps]
    tau1_cones += [((UU,), (TS,), "forward", m) for m in gmaps] + [((SS,), (TS,), "backward", m) for m in gmaps]
    t1, _ = search_aperture(tau1_cones, params, samples, seed)
    t3, _ = search_aperture([(*TAU3, "backward", m) for m in maps], params, samples, seed)
    t4, _ = search_aperture([(*TAU4, "backward", m) for m in maps], params, samples, seed)
    return {"tau1": t1, "tau3": t3, "tau4": t4}
