"""Run configuration: JSON schema, flag overrides and resolution into domain objects.

A config file is a JSON object; every key is optional and unknown keys are
rejected::

    {
      "seed": 42,
      "higgs_mass": 35.0,
      "physics":    {"vev": 246.0, "mass_w": 80.4, "mass_z": 91.2, "mass_top": 120.0,
                     "coeff_d": null, "coeff_e": null, "coeff_t0_sq": null, "coeff_lambda": null,
                     "wall_velocity_table": [[20, 0.30], [35, 0.375], [50, 0.45]]},
      "window":     {"temp_start_frac": 0.99, "temp_end_frac": 0.9882, "sim_duration": 10.0, "tail": 3.0},
      "simulation": {"domain_size": 300.0, "bubble_count": 30, "wall_speed_sim": 15.0, ...},
      "audio":      {"sample_rate": 44100, "master_peak": 0.9, "dust_density": 1000.0, "quantize_pitch": true},
      "frames":     {"width": 300, "height": 300, "fps": 30.0, "enabled": true},
      "output_dir": "ewbubbles-out"
    }

``null`` coefficients are derived from the masses.
"""

from __future__ import annotations

import copy
import json
import os
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Optional

from pydantic import TypeAdapter, ValidationError

from .audio import RenderSpec
from .errors import ConfigParseError, ConfigValidationError, EWBubblesError, ParameterError
from .frames import FrameSpec
from .nucleation import SimConfig
from .physics import (
    DEFAULT_WALL_VELOCITY_TABLE,
    PotentialParams,
    TransitionWindow,
    critical_temperature,
    wall_velocity,
)
from .stochastic import DEFAULT_RADIUS_EXPONENT_SCALE, DEFAULT_TIME_EXPONENT_SCALE

CONFIG_ENV = "EWBUBBLES_CONFIG"

_STRICT = {"extra": "forbid"}


@dataclass
class PhysicsSection:
    __pydantic_config__ = _STRICT
    vev: float = 246.0
    mass_w: float = 80.4
    mass_z: float = 91.2
    mass_top: float = 120.0
    coeff_d: Optional[float] = None
    coeff_e: Optional[float] = None
    coeff_t0_sq: Optional[float] = None
    coeff_lambda: Optional[float] = None
    wall_velocity_table: tuple[tuple[float, float], ...] = DEFAULT_WALL_VELOCITY_TABLE


@dataclass
class WindowSection:
    __pydantic_config__ = _STRICT
    temp_start_frac: float = 0.99
    temp_end_frac: float = 0.9882
    sim_duration: float = 10.0
    tail: float = 3.0


@dataclass
class SimulationSection:
    __pydantic_config__ = _STRICT
    domain_size: float = 300.0
    bubble_count: int = 30
    wall_speed_sim: float = 15.0
    coverage_rate: float = 100.0
    coverage_cells: int = 300
    max_placement_attempts: int = 1000
    position_tries: int = 100
    length_scale: float = 4.0
    time_exponent_scale: float = DEFAULT_TIME_EXPONENT_SCALE
    radius_exponent_scale: float = DEFAULT_RADIUS_EXPONENT_SCALE


@dataclass
class AudioSection:
    __pydantic_config__ = _STRICT
    sample_rate: int = 44100
    master_peak: float = 0.9
    dust_density: float = 1000.0
    quantize_pitch: bool = True


@dataclass
class FramesSection:
    __pydantic_config__ = _STRICT
    width: int = 300
    height: int = 300
    fps: float = 30.0
    enabled: bool = True


@dataclass
class RunConfig:
    __pydantic_config__ = _STRICT
    seed: int = 0
    higgs_mass: float = 35.0
    physics: PhysicsSection = field(default_factory=PhysicsSection)
    window: WindowSection = field(default_factory=WindowSection)
    simulation: SimulationSection = field(default_factory=SimulationSection)
    audio: AudioSection = field(default_factory=AudioSection)
    frames: FramesSection = field(default_factory=FramesSection)
    output_dir: str = "ewbubbles-out"

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class Resolved:
    """Validated domain objects for one run."""

    config: RunConfig
    params: PotentialParams
    window: TransitionWindow
    sim: SimConfig
    render: RenderSpec
    frames: FrameSpec

    @property
    def seed(self) -> int:
        return self.config.seed

    @property
    def output_dir(self) -> Path:
        return Path(self.config.output_dir)


_ADAPTER = TypeAdapter(RunConfig)


def _set_path(data: dict, dotted: str, value: Any) -> None:
    keys = dotted.split(".")
    node = data
    for key in keys[:-1]:
        node = node.setdefault(key, {})
        if not isinstance(node, dict):
            raise ConfigValidationError("is not a section", ".".join(keys[:-1]))
    node[keys[-1]] = value


def parse_override(text: str) -> tuple[str, Any]:
    """Split ``section.key=value``; the value is read as JSON, falling back to a string."""
    if "=" not in text:
        raise ConfigParseError(f"override {text!r} is not of the form key=value")
    key, raw = text.split("=", 1)
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    return key.strip(), value


def load_config(path=None, overrides: dict[str, Any] | None = None, *, use_env: bool = True) -> RunConfig:
    """Read ``path`` (or ``$EWBUBBLES_CONFIG``), apply dotted-key ``overrides``, validate.

    With neither a path nor the env var every default applies.
    """
    if path is None and use_env:
        path = os.environ.get(CONFIG_ENV) or None
    data: dict = {}
    if path is not None:
        try:
            data = json.loads(Path(path).read_text())
        except OSError as exc:
            raise ConfigParseError(f"cannot read config {path}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigParseError(f"{path}: invalid JSON ({exc})") from exc
        if not isinstance(data, dict):
            raise ConfigParseError(f"{path}: top level must be a JSON object")
    data = copy.deepcopy(data)
    for key, value in (overrides or {}).items():
        _set_path(data, key, value)
    try:
        cfg = _ADAPTER.validate_python(data)
    except ValidationError as exc:
        err = exc.errors()[0]
        raise ConfigValidationError(err["msg"], ".".join(str(p) for p in err["loc"])) from exc
    resolve(cfg)
    return cfg


def resolve(cfg: RunConfig) -> Resolved:
    """Build and validate the domain objects a run needs."""
    if not 0 <= cfg.seed < 2**64:
        raise ConfigValidationError("must be an unsigned 64-bit integer", "seed")
    section = "physics"
    try:
        ph = cfg.physics
        params = PotentialParams.standard_model(
            higgs_mass=cfg.higgs_mass,
            vev=ph.vev,
            mass_w=ph.mass_w,
            mass_z=ph.mass_z,
            mass_top=ph.mass_top,
            coeff_d=ph.coeff_d,
            coeff_e=ph.coeff_e,
            coeff_t0_sq=ph.coeff_t0_sq,
            coeff_lambda=ph.coeff_lambda,
        )
        t_c = critical_temperature(params)
        try:
            wall_velocity(cfg.higgs_mass, ph.wall_velocity_table)
        except ValueError as exc:
            raise ConfigValidationError(str(exc), "physics.wall_velocity_table") from exc
        section = "window"
        w = cfg.window
        window = TransitionWindow(t_c, w.temp_start_frac, w.temp_end_frac, w.sim_duration, w.tail)
        total = window.total_duration
        section = "simulation"
        sim = SimConfig(total_duration=total, **asdict(cfg.simulation))
        section = "audio"
        a = cfg.audio
        render = RenderSpec(
            sample_rate=a.sample_rate, total_duration=total, master_peak=a.master_peak, dust_density=a.dust_density
        )
        section = "frames"
        f = cfg.frames
        frames = FrameSpec(f.width, f.height, f.fps, total, cfg.simulation.domain_size)
    except ConfigValidationError:
        raise
    except ParameterError as exc:
        field_name = "higgs_mass" if exc.field == "higgs_mass" else f"{section}.{exc.field}"
        raise ConfigValidationError(exc.message, field_name) from exc
    except EWBubblesError as exc:
        raise ConfigValidationError(str(exc), section) from exc
    return Resolved(cfg, params, window, sim, render, frames)
