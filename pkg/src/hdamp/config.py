"""Scenario configuration: flat ``key=value`` files with dotted keys.

Example::

    scenario = sigma-scaling
    dim.D = 4,5,6
    ctx.N = 2.0
    s_grid.start = e^2
    s_grid.stop = e^10
    s_grid.points = 9
    model.kind = gray_disk
    model.L = auto
    seed = 7

Numbers may be written as plain floats or as ``e^K`` for exp(K).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, fields, replace
from pathlib import Path

import numpy as np

from .amplitude import ModelKind
from .bounds import BoundContext
from .specfun import DimensionSpec

SCENARIOS = ("orthogonality", "lemma1", "zero-spacing", "bound-sweep",
             "sigma-scaling", "zero-census", "harnack", "jensen")


class ConfigError(ValueError):
    def __init__(self, key, message):
        super().__init__(f"{key}: {message}")
        self.key = key


# scenario-specific knobs and their defaults
PARAM_DEFAULTS = {
    "orthogonality": {"l_max": "12", "tolerance": "1e-10"},
    "lemma1": {"trials": "10000", "l_max": "200", "x_span": "10"},
    "zero-spacing": {"l_values": "10,50,200", "growth_tolerance": "0.05"},
    "bound-sweep": {"t_fracs": "0.04,0.16,0.36", "slack": "0.1", "lambda_spread": "0.05"},
    "sigma-scaling": {"tolerance": "0.3"},
    "zero-census": {"measure_r0": "true", "r0_search_max": "50"},
    "harnack": {"R0_frac": "0.5", "r_values": "0.1,0.3,0.5", "samples": "1000",
                "u_fracs": "0.1,0.25,0.5,0.75"},
    "jensen": {"radius_fracs": "0.05,0.2,0.5,0.9"},
}

DIM_DEFAULTS = {
    "orthogonality": "4,5,6,7",
    "lemma1": "4,5,6,7",
    "zero-spacing": "4,5,7",
}

GRID_DEFAULTS = {
    "bound-sweep": ("e^6", "e^10", "9"),
    "zero-census": ("e^4", "e^10", "7"),
    "harnack": ("e^4", "e^10", "4"),
    "jensen": ("e^4", "e^10", "4"),
}


def parse_number(text, key="value"):
    t = str(text).strip()
    try:
        if t.startswith("e^"):
            return math.exp(float(t[2:]))
        return float(t)
    except ValueError:
        raise ConfigError(key, f"not a number: {text!r}") from None


def _parse_int(text, key):
    v = parse_number(text, key)
    if v != int(v):
        raise ConfigError(key, f"expected an integer, got {text!r}")
    return int(v)


def parse_list(text, key, conv=parse_number):
    return [conv(part, key) for part in str(text).split(",") if part.strip()]


def _parse_bool(text, key):
    t = str(text).strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ConfigError(key, f"expected a boolean, got {text!r}")


@dataclass(frozen=True)
class SGrid:
    start: float
    stop: float
    points: int
    spacing: str = "log"

    def values(self):
        if self.points == 1:
            return [self.start]
        if self.spacing == "log":
            return [float(v) for v in np.exp(np.linspace(math.log(self.start), math.log(self.stop), self.points))]
        return [float(v) for v in np.linspace(self.start, self.stop, self.points)]


@dataclass(frozen=True)
class ModelConfig:
    kind: ModelKind = ModelKind.gray_disk
    L: str = "auto"
    g: float = 0.5
    L_eff: str = "auto"
    L_max: str = "auto"
    waves_file: str = ""


@dataclass(frozen=True)
class ScenarioConfig:
    scenario: str
    dims: tuple
    ctx: BoundContext
    s_grid: SGrid
    model: ModelConfig
    output_dir: str
    seed: int
    params: dict = field(default_factory=dict)

    def param(self, name):
        return self.params[name]

    def echo(self):
        """Every resolved setting as flat dotted keys, defaults included."""
        out = {"scenario": self.scenario, "dim.D": ",".join(str(d.D) for d in self.dims)}
        for f in fields(BoundContext):
            out[f"ctx.{f.name}"] = getattr(self.ctx, f.name)
        out.update({"s_grid.start": self.s_grid.start, "s_grid.stop": self.s_grid.stop,
                    "s_grid.points": self.s_grid.points, "s_grid.spacing": self.s_grid.spacing})
        for f in fields(ModelConfig):
            val = getattr(self.model, f.name)
            out[f"model.{f.name}"] = val.value if isinstance(val, ModelKind) else val
        out["output_dir"] = self.output_dir
        out["seed"] = self.seed
        for k in sorted(self.params):
            out[f"params.{k}"] = self.params[k]
        return out


def read_config_file(path):
    """Parse a key=value file into a dict of raw strings."""
    raw = {}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}", f"expected key=value, got {line!r}")
        key, value = line.split("=", 1)
        raw[key.strip()] = value.strip()
    return raw


def resolve(raw: dict) -> ScenarioConfig:
    """Turn raw dotted key/value strings into a validated ScenarioConfig."""
    raw = dict(raw)
    scenario = raw.pop("scenario", None)
    if scenario not in SCENARIOS:
        raise ConfigError("scenario", f"must be one of {', '.join(SCENARIOS)}, got {scenario!r}")

    dim_text = raw.pop("dim.D", DIM_DEFAULTS.get(scenario, "4,5,6"))
    try:
        dims = tuple(DimensionSpec(d) for d in parse_list(dim_text, "dim.D", _parse_int))
    except ValueError as exc:
        raise ConfigError("dim.D", str(exc)) from None
    if not dims:
        raise ConfigError("dim.D", "no dimensions given")

    ctx_kwargs = {}
    ctx_fields = {f.name: f for f in fields(BoundContext)}
    for key in [k for k in raw if k.startswith("ctx.")]:
        name = key[4:]
        if name not in ctx_fields:
            raise ConfigError(key, "unknown context key")
        value = raw.pop(key)
        ctx_kwargs[name] = _parse_bool(value, key) if name == "strict_lemma2" else parse_number(value, key)
    try:
        ctx = BoundContext(**ctx_kwargs)
    except ValueError as exc:
        raise ConfigError("ctx", str(exc)) from None

    g_start, g_stop, g_points = GRID_DEFAULTS.get(scenario, ("e^2", "e^10", "9"))
    spacing = raw.pop("s_grid.spacing", "log")
    if spacing not in ("log", "linear"):
        raise ConfigError("s_grid.spacing", f"must be log or linear, got {spacing!r}")
    grid = SGrid(parse_number(raw.pop("s_grid.start", g_start), "s_grid.start"),
                 parse_number(raw.pop("s_grid.stop", g_stop), "s_grid.stop"),
                 _parse_int(raw.pop("s_grid.points", g_points), "s_grid.points"),
                 spacing)
    if not grid.start > ctx.s_hat:
        raise ConfigError("s_grid.start", f"must exceed ctx.s_hat={ctx.s_hat}")
    if grid.points < 1:
        raise ConfigError("s_grid.points", "must be >= 1")
    if grid.points > 1 and not grid.stop > grid.start:
        raise ConfigError("s_grid.stop", "must exceed s_grid.start")

    try:
        kind = ModelKind(raw.pop("model.kind", "gray_disk"))
    except ValueError:
        raise ConfigError("model.kind", f"must be one of {[k.value for k in ModelKind]}") from None
    model = ModelConfig(
        kind=kind,
        L=raw.pop("model.L", "auto"),
        g=parse_number(raw.pop("model.g", "0.5"), "model.g"),
        L_eff=raw.pop("model.L_eff", "auto"),
        L_max=raw.pop("model.L_max", "auto"),
        waves_file=raw.pop("model.waves_file", ""),
    )
    for key in ("L", "L_eff", "L_max"):
        val = getattr(model, key)
        if val != "auto":
            parse_number(val, f"model.{key}")
    if not 0 < model.g <= 1:
        raise ConfigError("model.g", "must lie in (0, 1] for unitarity")
    if kind is ModelKind.custom_list and not model.waves_file:
        raise ConfigError("model.waves_file", "custom_list needs a waves file")

    output_dir = raw.pop("output_dir", "out")
    seed = _parse_int(raw.pop("seed", "0"), "seed")

    params = dict(PARAM_DEFAULTS[scenario])
    for key in [k for k in raw if k.startswith("params.")]:
        name = key[7:]
        if name not in params:
            raise ConfigError(key, f"unknown parameter for scenario {scenario}")
        params[name] = raw.pop(key)
    if raw:
        key = sorted(raw)[0]
        raise ConfigError(key, "unknown configuration key")
    return ScenarioConfig(scenario, dims, ctx, grid, model, output_dir, seed, params)


def with_output_dir(config: ScenarioConfig, output_dir) -> ScenarioConfig:
    return replace(config, output_dir=str(output_dir))
