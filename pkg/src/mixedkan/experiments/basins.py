"""Basin classification by the time average of cos(pi y), and the paired
f / f~ collapse experiment.

The classifier only reads the circle coordinate, and pi(f(p)) = g(pi(p))
holds exactly, so f-orbits are classified through their factor orbits
(f through g, f~ through g~); z never feeds back into (x, y). Orbits run in
the compiled loops of `orbits`.
"""

import numpy as np

from ..errors import ConfigurationError
from ..geometry import FRAME, wrap
from ..system import require_certified
from .parallel import run_chunks
from .reports import BasinReport, CollapseReport
from .rng import sample_range
from .lyapunov import random_starts
from .orbits import classify_orbits, first_passage

CHUNK = 2000
_FACTOR = {"f": False, "g": False, "ftilde": True, "gtilde": True}


def _classify(avg, threshold):
    return (avg >= threshold), (avg <= -threshold)


def _basin_chunk(start, count, spec, params, horizons, perturbed, threshold):
    x, y = random_starts(spec, start, count, None, factor=True)
    return classify_orbits(params, x, y, horizons, perturbed, threshold)


def _check_horizons(horizons):
    horizons = [int(h) for h in horizons]
    if not horizons or any(h < 1 for h in horizons) or horizons != sorted(set(horizons)):
        raise ConfigurationError("horizons must be a strictly increasing list of positive integers")
    return horizons


def basin_map(map_name, spec, horizons, params, threshold=0.5):
    """Fractions of Lebesgue-random starts whose average of cos(pi y) up to each
    horizon is >= threshold (section 0), <= -threshold (section 1), or neither."""
    if map_name not in _FACTOR:
        raise ConfigurationError(f"unknown map {map_name!r}")
    perturbed = _FACTOR[map_name]
    require_certified(params, surgery=perturbed)
    horizons = _check_horizons(horizons)
    res = run_chunks(_basin_chunk, spec.samples, CHUNK, spec, params, horizons, perturbed, threshold)
    counts = np.sum(res, axis=0)
    n = spec.samples
    f0 = (counts[:, 0] / n).tolist()
    f1 = (counts[:, 1] / n).tolist()
    und = ((n - counts[:, 0] - counts[:, 1]) / n).tolist()
    return BasinReport(map=map_name, horizons=horizons, fraction_section0=f0, fraction_section1=f1,
                       fraction_undecided=und, threshold=threshold, samples=n, seed=spec.seed,
                       cert_hash=params.cert_hash)


def channel_starts(params, spec, count):
    """Starts with x uniform in the support box of the perturbation around r
    (half-width delta/ell, inside the eps/10 box) and y = 0 exactly."""
    hw = params.delta / params.ell
    u = sample_range(spec.seed, 0, count, 2, stream=11)
    a = (2 * u[:, 0] - 1) * hw
    b = (2 * u[:, 1] - 1) * hw
    x = wrap(params.r.point + a[:, None] * FRAME.v_u + b[:, None] * FRAME.v_s)
    return x, np.zeros(count), hw


def _channel_chunk(start, count, x_all, y_all, params, horizon, perturbed, threshold):
    sl = slice(start, start + count)
    return first_passage(params, x_all[sl], y_all[sl], horizon, perturbed, threshold)


def channel_crossing(params, spec, horizons, perturbed, threshold=0.5, count=None):
    """Fraction of the channel ensemble whose circle coordinate has entered the
    section-1 class {cos(pi y) <= -threshold} by each horizon (first passage).
    Returns (fractions, support half-width, sorted passage times)."""
    horizons = _check_horizons(horizons)
    count = count or spec.samples
    x, y, hw = channel_starts(params, spec, count)
    res = run_chunks(_channel_chunk, count, CHUNK, x, y, params, horizons[-1], perturbed, threshold)
    times = np.concatenate(res)
    times = np.sort(times[times > 0])
    fractions = [float(np.count_nonzero(times <= h) / count) for h in horizons]
    return fractions, hw, times.tolist()


def collapse_experiment(params, spec, horizons, threshold=0.5, channel_samples=None):
    """Paired-seed basin maps of f and f~ plus the channel ensemble under both."""
    if not params.has_surgery:
        raise ConfigurationError("collapse experiment needs r, ell and eps in the parameters")
    require_certified(params, surgery=True)
    horizons = _check_horizons(horizons)
    bf = basin_map("f", spec, horizons, params, threshold)
    bt = basin_map("ftilde", spec, horizons, params, threshold)
    cf, hw, _ = channel_crossing(params, spec, horizons, False, threshold, channel_samples)
    ct, _, times = channel_crossing(params, spec, horizons, True, threshold, channel_samples)
    return CollapseReport(basin_f=bf, basin_ftilde=bt, horizons=horizons, channel_f=cf, channel_ftilde=ct,
                          channel_samples=channel_samples or spec.samples, channel_halfwidth=hw,
                          channel_passage_ftilde=times,
                          cert_hash=params.cert_hash)
