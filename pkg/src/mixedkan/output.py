"""Report files: JSON summaries, CSV series, two-column plot data with a
gnuplot stub, rendered PNG figures, and the run manifest tying them together."""

from dataclasses import asdict, dataclass, field
from importlib import metadata
import csv
import json
import math
import os
import time

import numpy as np

MANIFEST = "manifest.json"


def tool_version():
    try:
        return metadata.version("artifact")
    except metadata.PackageNotFoundError:
        return "0+unknown"


def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, float) and not math.isfinite(obj):
        return str(obj)
    return obj


@dataclass
class RunManifest:
    subcommand: str
    params: dict
    cert_hash: str
    seed: int
    tool_version: str = field(default_factory=tool_version)
    started: float = field(default_factory=time.time)
    wall_clock: float = 0.0
    precision_loss_digits_per_step: dict = field(default_factory=dict)
    outputs: list = field(default_factory=list)

    def finish(self):
        self.wall_clock = time.time() - self.started
        return self


def precision_loss(params):
    """Decimal digits of a float orbit lost per step in each torus coordinate."""
    return {"x": math.log10(params.sigma1), "z": math.log10(params.sigma0)}


class RunWriter:
    """Writes every file of one run into `out` and records it in the manifest."""

    def __init__(self, out, manifest):
        self.out = out
        self.manifest = manifest
        os.makedirs(out, exist_ok=True)

    def _path(self, name):
        self.manifest.outputs.append(name)
        return os.path.join(self.out, name)

    def json(self, name, payload):
        payload = dict(_plain(payload))
        payload.setdefault("cert_hash", self.manifest.cert_hash)
        with open(self._path(name), "w", encoding="utf-8") as fh:
            json.dump(payload, fh, indent=2, sort_keys=True)
            fh.write("\n")

    def csv(self, name, columns, rows):
        """columns: list of (name, unit). A cert_hash column is appended."""
        header = [f"{c} [{u}]" if u else c for c, u in columns] + ["cert_hash"]
        with open(self._path(name), "w", encoding="utf-8", newline="") as fh:
            w = csv.writer(fh, lineterminator="\r\n")
            w.writerow(header)
            for row in rows:
                w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row]
                           + [self.manifest.cert_hash])

    def plot(self, stem, x, ys, xlabel, ylabel, title, logy=False):
        """Two-column data file per series, a gnuplot stub, and a PNG."""
        files = []
        for label, y in ys.items():
            name = f"{stem}_{label}.dat"
            with open(self._path(name), "w", encoding="utf-8") as fh:
                fh.write(f"# {title}\n# cert_hash: {self.manifest.cert_hash}\n# {xlabel}\t{ylabel}\n")
                for a, b in zip(x, y):
                    fh.write(f"{float(a)!r}\t{float(b)!r}\n")
            files.append((label, name))
        lines = [
            "set terminal pngcairo size 800,500",
            f"set output '{stem}_gnuplot.png'",
            f"set title '{title}'",
            f"set xlabel '{xlabel}'",
            f"set ylabel '{ylabel}'",
        ]
        if logy:
            lines.append("set logscale y")
        lines.append("plot " + ", \\\n     ".join(f"'{n}' using 1:2 with linespoints title '{l}'" for l, n in files))
        with open(self._path(f"{stem}.gp"), "w", encoding="utf-8") as fh:
            fh.write("\n".join(lines) + "\n")
        self._render(stem, x, ys, xlabel, ylabel, title, logy)

    def _render(self, stem, x, ys, xlabel, ylabel, title, logy):
        import matplotlib

        matplotlib.use("Agg")
        from matplotlib import pyplot as plt

        fig, ax = plt.subplots(figsize=(8, 5))
        for label, y in ys.items():
            ax.plot(x, y, marker="o", label=label)
        if logy:
            ax.set_yscale("log")
        ax.set(xlabel=xlabel, ylabel=ylabel, title=title)
        ax.legend()
        fig.text(0.99, 0.01, f"cert {self.manifest.cert_hash[:12]}", ha="right", fontsize=7, alpha=0.6)
        fig.tight_layout()
        fig.savefig(self._path(f"{stem}.png"), dpi=100,
                    metadata={"Description": f"cert_hash={self.manifest.cert_hash}"})
        plt.close(fig)

    def image(self, stem, array, title):
        """Heat map of a 2-D array (data written alongside as a matrix file)."""
        import matplotlib

        matplotlib.use("Agg")
        from matplotlib import pyplot as plt

        arr = np.asarray(array)
        with open(self._path(f"{stem}.dat"), "w", encoding="utf-8") as fh:
            fh.write(f"# {title}\n# cert_hash: {self.manifest.cert_hash}\n")
            np.savetxt(fh, arr)
        n0, n1 = arr.shape
        lines = [
            "set terminal pngcairo size 600,500",
            f"set output '{stem}_gnuplot.png'",
            f"set title '{title}'",
            "set xlabel 'x1'",
            "set ylabel 'x2'",
            # rows are x1 bins: swap to put x1 on the horizontal axis
            f"plot '{stem}.dat' matrix using ($2/{n0}.):($1/{n1}.):3 with image notitle",
        ]
        with open(self._path(f"{stem}.gp"), "w", encoding="utf-8") as fh:
            fh.write("\n".join(lines) + "\n")
        fig, ax = plt.subplots(figsize=(6, 5))
        im = ax.imshow(arr.T, origin="lower", extent=(0, 1, 0, 1))
        fig.colorbar(im, ax=ax)
        ax.set(title=title, xlabel="x1", ylabel="x2")
        fig.savefig(self._path(f"{stem}.png"), dpi=100,
                    metadata={"Description": f"cert_hash={self.manifest.cert_hash}"})
        plt.close(fig)

    def close(self):
        self.manifest.finish()
        path = os.path.join(self.out, MANIFEST)
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(_plain(asdict(self.manifest)), fh, indent=2, sort_keys=True)
            fh.write("\n")
        return path
