"""Cesaro push-forwards of strong-unstable segments and density of unstable
sets of the fixed points."""


import numpy as np
from scipy import spatial, stats

from ..errors import ConfigurationError
from ..geometry import FRAME, wrap
from ..system import MPoint, f_eval, g_step_with_growth, require_certified
from .reports import CoverageReport, UStateReport
from .rng import sample_range


def ustate_sampler(map_name, section, segment, n, bins, params, points=100, seed=0, alpha=0.05):
    """Histogram of the first-torus marginal of (1/n) sum_j F^j_*(Leb on segment).

    segment = (center, length): a straight v_u-segment of the first torus at
    constant y = section (and z = center for f). Points on the segment are
    drawn uniformly from the counter-based stream.
    """
    if map_name not in ("g", "gtilde", "f", "ftilde"):
        raise ConfigurationError(f"unknown map {map_name!r}")
    perturbed = map_name.endswith("tilde")
    require_certified(params, surgery=perturbed)
    center, length = segment
    if not length > 0:
        raise ConfigurationError("segment length must be positive")
    if n < 1 or bins < 2 or points < 1:
        raise ConfigurationError("need n >= 1, bins >= 2 and points >= 1")
    center = np.asarray(center, dtype=float)
    t = (sample_range(seed, 0, points, 1, stream=21)[:, 0] - 0.5) * length
    x = wrap(center + t[:, None] * FRAME.v_u)
    y = np.full(points, float(section))
    hist = np.zeros((bins, bins))
    near = 0
    for _ in range(n):
        idx = np.minimum((x * bins).astype(int), bins - 1)
        np.add.at(hist, (idx[:, 0], idx[:, 1]), 1.0)
        d = np.minimum(np.abs(y - section), 2.0 - np.abs(y - section))
        near += int(np.sum(d < 0.1))
        x, y, _ = g_step_with_growth(params, x, y, perturbed)
    total = hist.sum()
    expected = total / bins**2
    chi2 = float(np.sum((hist - expected) ** 2) / expected)
    dof = bins * bins - 1
    crit = float(stats.chi2.ppf(1 - alpha, dof))
    pval = float(stats.chi2.sf(chi2, dof))
    return UStateReport(
        map=map_name, section=section, n=n, bins=bins, segment_center=center.tolist(),
        segment_length=float(length), points=points, histogram=(hist / total).tolist(), chi2=chi2,
        chi2_critical=crit, p_value=pval, fibre_mass_near_section=near / (n * points),
        cert_hash=params.cert_hash,
    )


def _grid(m):
    g = (np.arange(m) + 0.5) / m
    X0, X1, Z0, Z1 = np.meshgrid(g, g, g, g, indexing="ij")
    return np.stack([X0.ravel(), X1.ravel(), Z0.ravel(), Z1.ravel()], axis=1)


def unstable_density(anchor, radii, steps, params, grid=12, points=4000, seed=0, patch=None):
    """Coverage of the section T^2 x {y0} x T^2 by the forward images of a local
    unstable patch of (anchor, y0, anchor).

    The patch is {anchor + s v_u} x {y0} x {anchor + u v_u}, |s|, |u| <= patch,
    tangent to E^uu + E^u; the images after 0..n steps are accumulated and,
    for each n in steps and r in radii, the fraction of a grid^4 lattice of
    the section within r of the accumulated set is reported.
    """
    require_certified(params)
    names = ("p1", "p2", "q1", "q2")
    if anchor not in names:
        raise ConfigurationError(f"anchor must be one of {names}")
    steps = sorted(int(s) for s in steps)
    y0 = 1.0 if anchor in ("p2", "q2") else 0.0
    q = params.anchor(anchor)
    patch = params.delta / 2 if patch is None else patch
    u = (sample_range(seed, 0, points, 2, stream=31) * 2 - 1) * patch
    p = MPoint(q + u[:, :1] * FRAME.v_u, np.full(points, y0), q + u[:, 1:] * FRAME.v_u)
    lattice = _grid(grid)
    best = np.full(len(lattice), np.inf)
    targets = {
        "p1": np.concatenate([params.anchor("p1"), params.anchor("p1")]),
        "q2": np.concatenate([params.anchor("q2"), params.anchor("q2")]),
    }
    target_best = {k: np.inf for k in targets}
    coverage = []
    t = 0  # p holds iterate t, not yet accumulated
    for n in steps:
        while t <= n:
            cloud = np.concatenate([p.x, p.z], axis=1) % 1.0
            tree = spatial.cKDTree(cloud, boxsize=1.0)
            d, _ = tree.query(lattice)
            best = np.minimum(best, d)
            for k, v in targets.items():
                target_best[k] = min(target_best[k], float(tree.query(v % 1.0)[0]))
            p = f_eval(p, params)
            t += 1
        coverage.append([float(np.mean(best <= r)) for r in radii])
    return CoverageReport(anchor=anchor, steps=steps, radii=list(map(float, radii)), coverage=coverage,
                          grid=grid, targets=target_best, cert_hash=params.cert_hash)
