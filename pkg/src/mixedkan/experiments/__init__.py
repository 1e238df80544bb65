"""Orbit and Monte-Carlo experiments; every entry point requires certified
parameters."""

from .basins import basin_map, channel_crossing, collapse_experiment
from .lyapunov import (
    birkhoff_average,
    cu_lower_bound,
    lyap_cu_f,
    lyap_spectrum_full,
    lyap_TS_f,
    lyap_TS_g,
    ts_oracle,
)
from .manifolds import heteroclinic_check, manifold_check
from .reports import (
    BasinReport,
    CollapseReport,
    CoverageReport,
    LyapReport,
    ManifoldReport,
    OrbitSpec,
    UStateReport,
)
from .ustate import unstable_density, ustate_sampler
