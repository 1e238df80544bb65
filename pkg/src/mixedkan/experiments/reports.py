"""Report records returned by the experiments."""

from dataclasses import asdict, dataclass, field

import numpy as np

from ..errors import ConfigurationError


@dataclass(frozen=True)
class OrbitSpec:
    seed: int = 0
    burn_in: int = 0
    n: int = 10000
    samples: int = 1000

    def __post_init__(self):
        if self.n < 1:
            raise ConfigurationError("OrbitSpec.n must be >= 1")
        if self.samples < 1:
            raise ConfigurationError("OrbitSpec.samples must be >= 1")
        if self.burn_in < 0:
            raise ConfigurationError("OrbitSpec.burn_in must be >= 0")


def _plain(obj):
    if isinstance(obj, dict):
        return {k: _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, np.generic):
        return obj.item()
    return obj


class _Report:
    def to_json(self):
        return _plain(asdict(self))


@dataclass
class LyapReport(_Report):
    bundle: str
    lambda_hat: float
    stderr: float
    n: int
    samples: int
    section: int = None
    method: str = ""
    oracle: float = None
    bound: float = None
    cert_hash: str = None
    batch_means: list = field(default_factory=list)
    flags: list = field(default_factory=list)

    def z_score(self, value=None):
        ref = self.oracle if value is None else value
        if ref is None or self.stderr == 0:
            return None
        return (self.lambda_hat - ref) / self.stderr


@dataclass
class TSCrossCheck(_Report):
    method_a: LyapReport
    method_b: LyapReport
    combined_stderr: float
    agreement_sigmas: float
    flags: list = field(default_factory=list)


@dataclass
class BasinReport(_Report):
    map: str
    horizons: list
    fraction_section0: list
    fraction_section1: list
    fraction_undecided: list
    threshold: float
    samples: int
    seed: int
    cert_hash: str = None

    def final(self):
        return self.fraction_section0[-1], self.fraction_section1[-1], self.fraction_undecided[-1]


@dataclass
class CollapseReport(_Report):
    basin_f: BasinReport
    basin_ftilde: BasinReport
    horizons: list
    channel_f: list
    channel_ftilde: list
    channel_samples: int
    channel_halfwidth: float
    channel_passage_ftilde: list = field(default_factory=list)
    cert_hash: str = None

    def dominance(self):
        """Per-horizon section-1 fraction difference f~ minus f."""
        return [b - a for a, b in zip(self.basin_f.fraction_section1, self.basin_ftilde.fraction_section1)]


@dataclass
class UStateReport(_Report):
    map: str
    section: int
    n: int
    bins: int
    segment_center: list
    segment_length: float
    points: int
    histogram: list
    chi2: float
    chi2_critical: float
    p_value: float
    fibre_mass_near_section: float
    cert_hash: str = None

    @property
    def uniform(self):
        return self.chi2 <= self.chi2_critical


@dataclass
class ManifoldReport(_Report):
    target: str
    n: int
    samples: int
    contraction_bound: float
    observed_rate: float
    final_distance_max: float
    monotone: bool
    flagged: list = field(default_factory=list)
    cert_hash: str = None

    @property
    def passed(self):
        return not self.flagged and self.monotone


@dataclass
class CoverageReport(_Report):
    anchor: str
    steps: list
    radii: list
    coverage: list  # coverage[i][j] at steps[i], radii[j]
    grid: int
    targets: dict = field(default_factory=dict)
    cert_hash: str = None


@dataclass
class SpectrumReport(_Report):
    exponents: list
    n: int
    start: list
    expected_extremes: list
    cert_hash: str = None
