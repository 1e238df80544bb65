"""Run configuration files (YAML) and the parameter record they describe."""

from dataclasses import dataclass, field

import yaml

from .errors import ConfigurationError
from .geometry import cat_power, fixed_points, heteroclinic_point, select_anchors
from .presets import PRESETS, get_preset

SCHEMA_VERSION = 1

# parameters a config may override; the rest (anchors, r) are derived
PARAM_KEYS = {
    "delta": float, "beta": float, "k": float, "n0": int, "n1": int, "ell": float, "eps": float,
    "tau1": float, "tau3": float, "tau4": float, "margin": float, "phi_window": float,
    "welldefined3_floor": float,
}
EXPERIMENT_KEYS = {
    "seed": int, "samples": int, "steps": int, "burn_in": int, "horizons": list, "section": int,
    "bundle": str, "threshold": float, "bins": int, "points": int, "segment_length": float,
    "channel_samples": int, "anchor": str, "radii": list, "grid": int,
}
TOP_KEYS = {"schema_version", "preset", "params", "experiment"}
# overriding any of these moves the anchors or r
_GEOMETRY = {"delta", "n0", "n1", "eps"}


@dataclass
class RunConfig:
    preset: str = "desk"
    params: dict = field(default_factory=dict)
    experiment: dict = field(default_factory=dict)
    schema_version: int = SCHEMA_VERSION

    def to_dict(self):
        out = {"schema_version": self.schema_version, "preset": self.preset}
        if self.params:
            out["params"] = dict(self.params)
        if self.experiment:
            out["experiment"] = dict(self.experiment)
        return out

    def dump(self):
        return yaml.safe_dump(self.to_dict(), sort_keys=True)


def _typed(section, key, value, kind):
    if kind is float and isinstance(value, int) and not isinstance(value, bool):
        return float(value)
    if kind is float and isinstance(value, str):
        try:
            return float(value)
        except ValueError:
            pass
    if not isinstance(value, kind) or isinstance(value, bool):
        raise ConfigurationError(f"{section}.{key}: expected {kind.__name__}, got {value!r}")
    return value


def _section(data, name, allowed):
    raw = data.get(name) or {}
    if not isinstance(raw, dict):
        raise ConfigurationError(f"{name}: expected a mapping")
    unknown = sorted(set(raw) - set(allowed))
    if unknown:
        raise ConfigurationError(f"{name}: unknown key(s) {', '.join(unknown)}")
    return {k: _typed(name, k, v, allowed[k]) for k, v in raw.items()}


def parse_config(text, source="<config>"):
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        where = f" line {mark.line + 1}, column {mark.column + 1}" if mark else ""
        raise ConfigurationError(f"{source}:{where} {getattr(exc, 'problem', exc)}") from exc
    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ConfigurationError(f"{source}: top level must be a mapping")
    unknown = sorted(set(data) - TOP_KEYS)
    if unknown:
        raise ConfigurationError(f"{source}: unknown key(s) {', '.join(unknown)}")
    version = data.get("schema_version", SCHEMA_VERSION)
    if version != SCHEMA_VERSION:
        raise ConfigurationError(f"{source}: schema_version {version!r} unsupported (expected {SCHEMA_VERSION})")
    preset = data.get("preset", "desk")
    if preset not in PRESETS:
        raise ConfigurationError(f"{source}: preset must be one of {PRESETS}, got {preset!r}")
    return RunConfig(
        preset=preset,
        params=_section(data, "params", PARAM_KEYS),
        experiment=_section(data, "experiment", EXPERIMENT_KEYS),
        schema_version=version,
    )


def load_config(path):
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read(), source=str(path))


def build_params(config):
    """Preset record with the overrides applied; anchors and r are re-derived
    when a geometric quantity changes."""
    base = get_preset(config.preset)
    over = dict(config.params)
    if not over:
        return base
    if _GEOMETRY & set(over):
        delta = over.get("delta", base.delta)
        n0 = over.get("n0", base.n0)
        n1 = over.get("n1", base.n1)
        eps = over.get("eps", base.eps)
        try:
            cat_power(n0)
            cat_power(n1)
        except ValueError as exc:
            raise ConfigurationError(str(exc)) from exc
        anchors = select_anchors(fixed_points(n0), delta)
        r = heteroclinic_point(anchors, delta, eps, cat_power(n1)[1]) if eps else None
        over.update(anchors=anchors, r=r)
    return base.evolve(**over)
