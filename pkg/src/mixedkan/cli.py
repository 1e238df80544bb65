"""Command-line entry point.

    mixedkan certify --preset desk --out runs/cert
    mixedkan lyapunov --bundle ts --section 0 --samples 1000 --steps 100000 --out runs/ts
    mixedkan basins --horizons 1000,3000,10000 --out runs/basins

Exit status: 0 ok, 1 a check failed (certificate or experiment verdict),
2 usage or configuration error. Worker processes: MIXEDKAN_WORKERS.
"""

import argparse
import logging
import os
import sys

import numpy as np

from .certify import certify
from .config import RunConfig, build_params, load_config
from .errors import ConfigurationError, MixedKanError
from .experiments.basins import basin_map, collapse_experiment
from .experiments.lyapunov import lyap_cu_f, lyap_spectrum_full, lyap_TS_f, lyap_TS_g, random_starts
from .experiments.manifolds import heteroclinic_check, manifold_check
from .experiments.reports import OrbitSpec
from .experiments.ustate import unstable_density, ustate_sampler
from .output import RunManifest, RunWriter, precision_loss
from .system import FRAME_LABELS, MPoint, Df, fixed_point_targets

log = logging.getLogger("mixedkan")

SUBCOMMANDS = ("certify", "fixed-points", "lyapunov", "basins", "ustate", "collapse",
               "heteroclinic", "orbit", "spectrum", "manifold", "density")


class UsageError(Exception):
    pass


def _horizons(text):
    try:
        return [int(float(h)) for h in text.split(",") if h.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad horizon list {text!r}")


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="YAML run configuration")
    common.add_argument("--out", default="mixedkan-out", help="output directory")
    common.add_argument("--seed", type=int)
    common.add_argument("--preset", choices=("paper", "desk"))
    common.add_argument("--samples", type=int)
    common.add_argument("--steps", type=int)
    common.add_argument("--horizons", type=_horizons, help="comma-separated horizon schedule")
    common.add_argument("--cone-samples", type=int, default=100000)
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="mixedkan", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("certify", parents=[common], help="certify the parameter record")
    sub.add_parser("fixed-points", parents=[common], help="Jacobians at the six fixed points")
    p = sub.add_parser("lyapunov", parents=[common], help="Lyapunov exponents along TS or E^u")
    p.add_argument("--bundle", choices=("ts", "cu", "ts-f"), default="ts")
    p.add_argument("--section", type=int, choices=(0, 1), default=0)
    p = sub.add_parser("basins", parents=[common], help="basin fractions by horizon")
    p.add_argument("--map", choices=("f", "ftilde"), default="f")
    p = sub.add_parser("ustate", parents=[common], help="Cesaro push-forward of an unstable segment")
    p.add_argument("--map", choices=("g", "gtilde"), default="g")
    p.add_argument("--section", type=int, choices=(0, 1), default=0)
    p.add_argument("--bins", type=int)
    sub.add_parser("collapse", parents=[common], help="paired f / f~ collapse experiment")
    sub.add_parser("heteroclinic", parents=[common], help="convergence of the heteroclinic point")
    p = sub.add_parser("orbit", parents=[common], help="dump an orbit of f or f~")
    p.add_argument("--map", choices=("f", "ftilde"), default="f")
    p.add_argument("--start", type=float, nargs=5, metavar=("X1", "X2", "Y", "Z1", "Z2"))
    sub.add_parser("spectrum", parents=[common], help="full five-exponent spectrum")
    p = sub.add_parser("manifold", parents=[common], help="stable-set convergence check")
    p.add_argument("--target", choices=("q1", "q2"), default="q1")
    p = sub.add_parser("density", parents=[common], help="density of an unstable set in its section")
    p.add_argument("--anchor", choices=("p1", "p2", "q1", "q2"), default="q1")
    return parser


def _config(args):
    cfg = load_config(args.config) if args.config else RunConfig()
    if args.preset:
        cfg.preset = args.preset
    exp = dict(cfg.experiment)
    for key in ("seed", "samples", "steps", "horizons"):
        val = getattr(args, key)
        if val is not None:
            exp[key] = val
    cfg.experiment = exp
    return cfg


def _spec(exp, samples, steps, burn_in=0):
    return OrbitSpec(seed=exp.get("seed", 0), burn_in=exp.get("burn_in", burn_in),
                     n=exp.get("steps", steps), samples=exp.get("samples", samples))


# -- subcommands ---------------------------------------------------------------------

def _certify(args, params, cfg, out):
    rep, certified = certify(params, cone_samples=args.cone_samples, seed=cfg.experiment.get("seed", 0))
    man = RunManifest("certify", params.to_dict(), rep.hash, cfg.experiment.get("seed", 0),
                      precision_loss_digits_per_step=precision_loss(params))
    w = RunWriter(out, man)
    w.json("certificate.json", rep.to_json())
    w.csv("certificate.csv", [("check", ""), ("pass", ""), ("value", ""), ("bound", ""), ("margin", ""),
                              ("resolution", "points"), ("pad", "")],
          [(c.name, int(c.passed), c.value, c.bound, c.margin, c.resolution, c.pad) for c in rep.checks])
    w.close()
    return rep, certified


def cmd_fixed_points(params, exp, w):
    rows, out = [], {}
    worst = 0.0
    for label, p, diag in fixed_point_targets(params):
        J = Df(p, params)[0]
        off = float(np.max(np.abs(J - np.diag(np.diag(J)))))
        rel = float(np.max(np.abs(np.diag(J) - diag) / np.abs(diag)))
        worst = max(worst, rel)
        out[label] = {"jacobian": J, "target_diagonal": diag, "max_offdiag": off, "max_rel_diag_error": rel}
        rows.append((label, *np.diag(J), off, rel))
    w.json("fixed_points.json", {"points": out, "frame": FRAME_LABELS, "max_deviation": worst})
    w.csv("fixed_points.csv", [("point", "")] + [(f"D_{l}", "") for l in FRAME_LABELS]
          + [("max_offdiag", ""), ("max_rel_diag_error", "")], rows)
    return worst <= 1e-9


def cmd_lyapunov(params, exp, w, args):
    spec = _spec(exp, 1000, 100000)
    sec = args.section
    if args.bundle == "ts":
        rep = lyap_TS_g(sec, spec, params)
        reports = {"g": rep}
        ok = rep.lambda_hat < 0
    elif args.bundle == "cu":
        rep = lyap_cu_f(sec, spec, params)
        reports = {"f": rep}
        ok = rep.lambda_hat > 0 and not rep.flags
    else:
        cc = lyap_TS_f(sec, spec, params)
        reports = {"A": cc.method_a, "B": cc.method_b}
        rep = cc
        ok = not cc.flags
    payload = rep.to_json()
    if args.bundle == "ts":
        payload["oracle_comparison"] = {"oracle": rep.oracle, "z_score": rep.z_score()}
    w.json("lyapunov.json", payload)
    rows = []
    for label, r in reports.items():
        rows += [(label, i, m) for i, m in enumerate(r.batch_means)]
    w.csv("lyapunov_batches.csv", [("series", ""), ("batch", "index"), ("mean_log_growth", "per step")], rows)
    first = next(iter(reports.values()))
    w.plot("lyapunov_batches", np.arange(len(first.batch_means)),
           {k: r.batch_means for k, r in reports.items()}, "batch (1000 steps)", "mean log growth",
           f"{args.bundle} exponent, section {sec}")
    return ok


def _basin_rows(rep):
    return [(h, a, b, c) for h, a, b, c in zip(rep.horizons, rep.fraction_section0, rep.fraction_section1,
                                               rep.fraction_undecided)]


def cmd_basins(params, exp, w, args):
    horizons = exp.get("horizons", [1000, 3000, 10000, 30000])
    spec = _spec(exp, 10000, max(horizons))
    rep = basin_map(args.map, spec, horizons, params, exp.get("threshold", 0.5))
    w.json("basins.json", rep.to_json())
    w.csv("basins.csv", [("horizon", "steps"), ("section0", "fraction"), ("section1", "fraction"),
                         ("undecided", "fraction")], _basin_rows(rep))
    w.plot("basins", rep.horizons, {"section0": rep.fraction_section0, "section1": rep.fraction_section1,
                                     "undecided": rep.fraction_undecided}, "horizon", "fraction",
           f"basin fractions ({args.map})")
    f0, f1, _ = rep.final()
    return f0 > 0.1 and f1 > 0.1


def cmd_ustate(params, exp, w, args):
    n = exp.get("steps", 10000)
    bins = args.bins or exp.get("bins", 32)
    center = params.anchor("q1") + np.array([0.1234, 0.0567])
    rep = ustate_sampler(args.map, args.section, (center, exp.get("segment_length", 0.01)), n, bins,
                         params, points=exp.get("points", 100), seed=exp.get("seed", 0))
    w.json("ustate.json", rep.to_json())
    w.image("ustate_marginal", np.array(rep.histogram) * bins * bins, "first-torus marginal density")
    return rep.uniform


def cmd_collapse(params, exp, w, args):
    horizons = exp.get("horizons", [1000, 3000, 10000, 30000])
    spec = _spec(exp, 10000, max(horizons))
    rep = collapse_experiment(params, spec, horizons, exp.get("threshold", 0.5), exp.get("channel_samples"))
    w.json("collapse.json", rep.to_json())
    rows = [(h, a, b, c, d) for h, a, b, c, d in zip(rep.horizons, rep.basin_f.fraction_section1,
                                                    rep.basin_ftilde.fraction_section1, rep.channel_f,
                                                    rep.channel_ftilde)]
    w.csv("collapse.csv", [("horizon", "steps"), ("section1_f", "fraction"), ("section1_ftilde", "fraction"),
                           ("channel_f", "fraction"), ("channel_ftilde", "fraction")], rows)
    w.plot("collapse", rep.horizons, {"section1_f": rep.basin_f.fraction_section1,
                                       "section1_ftilde": rep.basin_ftilde.fraction_section1,
                                       "channel_ftilde": rep.channel_ftilde}, "horizon", "fraction",
           "collapse: f vs f~")
    dom = rep.dominance()
    return all(c == 0 for c in rep.channel_f) and max(rep.channel_ftilde) > 0 and all(d > 0 for d in dom[1:])


def cmd_heteroclinic(params, exp, w, args):
    steps = exp.get("steps", 10)
    rep = heteroclinic_check(params, steps)
    w.json("heteroclinic.json", rep)
    idx = list(range(steps + 1))
    w.csv("heteroclinic.csv", [("i", "steps"), ("log10_dist_forward_q2", ""), ("log10_dist_backward_q1", "")],
          list(zip(idx, rep["forward_distance"], rep["backward_distance"])))
    w.plot("heteroclinic", idx, {"forward_to_q2": rep["forward_distance"],
                                 "backward_to_q1": rep["backward_distance"]},
           "iterate of A^n1", "log10 distance", "heteroclinic convergence")
    s = rep["sigma1_inverse"]
    return all(abs(r / s - 1) <= 0.1 for r in rep["forward_ratio"][3:] + rep["backward_ratio"][3:])


def cmd_orbit(params, exp, w, args):
    from .system import MAPS

    steps = exp.get("steps", 1000)
    if args.start:
        s = args.start
        p = MPoint(np.array([[s[0], s[1]]]), np.array([s[2]]), np.array([[s[3], s[4]]]))
    else:
        x, y, z = random_starts(_spec(exp, 1, 1), 0, 1)
        p = MPoint(x, y, z)
    step = MAPS[args.map]
    rows = []
    for t in range(steps + 1):
        rows.append((t, *p.x[0], p.y[0], *p.z[0]))
        p = step(p, params)
    w.csv("orbit.csv", [("t", "steps"), ("x1", ""), ("x2", ""), ("y", "mod 2"), ("z1", ""), ("z2", "")], rows)
    arr = np.array([r[3] for r in rows])
    w.plot("orbit_y", np.arange(steps + 1), {"y": arr}, "step", "y", f"circle coordinate along {args.map}")
    return True


def cmd_spectrum(params, exp, w, args):
    n = exp.get("steps", 20000)
    samples = exp.get("samples", 4)
    x, _, z = random_starts(_spec(exp, samples, n), 0, samples)
    p = MPoint(x, np.zeros(samples), z)
    exps = lyap_spectrum_full(p, n, params)
    mean = exps.mean(axis=0)
    w.json("spectrum.json", {"exponents": exps, "mean": mean, "n": n,
                             "log_sigma1": float(np.log(params.sigma1))})
    w.csv("spectrum.csv", [("orbit", "index")] + [(f"lambda{i + 1}", "per step") for i in range(5)],
          [(i, *e) for i, e in enumerate(exps)])
    return abs(mean[0] / np.log(params.sigma1) - 1) <= 1e-3


def cmd_manifold(params, exp, w, args):
    rep = manifold_check(params, exp.get("steps", 200), exp.get("samples", 16), args.target, exp.get("seed", 0))
    w.json("manifold.json", rep.to_json())
    return rep.passed


def cmd_density(params, exp, w, args):
    steps = exp.get("horizons", [0, 1, 2, 4, 8, 16])
    radii = exp.get("radii", [0.05, 0.1, 0.2])
    rep = unstable_density(args.anchor, radii, steps, params, grid=exp.get("grid", 12),
                           points=exp.get("points", 4000), seed=exp.get("seed", 0))
    w.json("density.json", rep.to_json())
    rows = [(s, *c) for s, c in zip(rep.steps, rep.coverage)]
    w.csv("density.csv", [("n", "steps")] + [(f"coverage_r{r:g}", "fraction") for r in rep.radii], rows)
    w.plot("density", rep.steps, {f"r={r:g}": [c[j] for c in rep.coverage] for j, r in enumerate(rep.radii)},
           "n", "coverage fraction", f"unstable set of ({args.anchor}) in its section")
    return True


HANDLERS = {
    "fixed-points": lambda p, e, w, a: cmd_fixed_points(p, e, w),
    "lyapunov": cmd_lyapunov,
    "basins": cmd_basins,
    "ustate": cmd_ustate,
    "collapse": cmd_collapse,
    "heteroclinic": cmd_heteroclinic,
    "orbit": cmd_orbit,
    "spectrum": cmd_spectrum,
    "manifold": cmd_manifold,
    "density": cmd_density,
}


def run(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code else 0
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = _config(args)
        params = build_params(cfg)
        if args.command in ("collapse", "heteroclinic") and not params.has_surgery:
            raise ConfigurationError("parameters lack the heteroclinic point r / ell / eps")
        rep, certified = _certify(args, params, cfg, os.path.join(args.out, "certificate")
                                  if args.command != "certify" else args.out)
        if not rep.passed:
            print("certification failed: " + ", ".join(rep.failures()), file=sys.stderr)
            return 1
        if args.command == "certify":
            print(f"certificate {rep.hash} ({len(rep.checks)} checks passed)")
            return 0
        man = RunManifest(args.command, certified.to_dict(), rep.hash, cfg.experiment.get("seed", 0),
                          precision_loss_digits_per_step=precision_loss(certified))
        w = RunWriter(args.out, man)
        ok = HANDLERS[args.command](certified, cfg.experiment, w, args)
        path = w.close()
        print(f"{args.command}: {'ok' if ok else 'check failed'}; manifest {path}")
        return 0 if ok else 1
    except ConfigurationError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except MixedKanError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
