"""Scenario configuration: defaults, validation and the flat YAML file format.

Field names carry their units so knots and m/s, or degrees and radians,
cannot be mixed up.
"""

from dataclasses import asdict, dataclass, fields, replace
import math
from pathlib import Path

import yaml

from .cost import CostWeights
from .planner import GameConfig
from .sensors import CameraSpec, RadarSpec

MODES = ("first", "continuous")


class ConfigError(ValueError):
    """Bad configuration file or parameter; ``field`` names the offender."""

    def __init__(self, field, message):
        super().__init__(f"{field}: {message}")
        self.field = field


@dataclass(frozen=True)
class ScenarioConfig:
    n_cameras: int = 2
    n_targets: int = 3
    horizon: int = 1
    iterations: int = 20
    dt_s: float = 1.0
    hfov_deg: float = 3.0
    camera_range_m: float = 16_000.0
    p_camera: float = 13.0
    p_radar: float = 13.0
    radar_x_m: float = 95_000.0
    radar_y_m: float = -95_000.0
    sigma_ais_m: float = 1_000.0
    alpha1: float = 1.0
    alpha2: float = 1.0
    alpha3: float = 1.0
    eps_m2: float = 7e5
    d_min_m: float = 80.0
    d_max_m: float = 16_000.0
    d_safe_m: float = 100.0
    s_min_mps: float = 0.0
    s_max_mps: float = 9.0
    phi_max_deg: float = 180.0
    n_speed_levels: int = 2
    n_heading_levels: int = 12
    sigma_v: float = 3.0
    forgetting: float = 0.5
    target_speed_max_mps: float = 9.0
    target_r_min_m: float = 15_000.0
    target_r_max_m: float = 30_000.0
    init_pos_sigma_m: float = 5_000.0
    init_vel_sigma_mps: float = 5.0
    seed: int = 0
    max_steps: int = 15_000
    mode: str = "first"
    workers: int = 1

    def __post_init__(self):
        validate(self)

    @property
    def camera(self):
        return CameraSpec(math.radians(self.hfov_deg), self.camera_range_m, self.p_camera)

    @property
    def radar(self):
        return RadarSpec((self.radar_x_m, self.radar_y_m), self.p_radar)

    @property
    def weights(self):
        return CostWeights(self.alpha1, self.alpha2, self.alpha3, self.eps_m2, self.d_min_m,
                           self.d_max_m, self.d_safe_m)

    @property
    def game(self):
        return GameConfig(
            iterations=self.iterations,
            horizon=self.horizon,
            forgetting=self.forgetting,
            n_speeds=self.n_speed_levels,
            n_headings=self.n_heading_levels,
            s_min=self.s_min_mps,
            s_max=self.s_max_mps,
            phi_max=math.radians(self.phi_max_deg),
            workers=self.workers,
        )

    def with_(self, **changes):
        return replace(self, **changes)


# inclusive (low, high); None leaves a side open
RANGES = {
    "n_cameras": (1, None),
    "n_targets": (1, None),
    "horizon": (1, 5),
    "iterations": (10, 20),
    "n_speed_levels": (2, 10),
    "n_heading_levels": (4, 20),
    "alpha1": (0.0, 1.0),
    "alpha2": (0.0, 1.0),
    "alpha3": (0.0, 1.0),
    "forgetting": (0.0, 1.0),
    "phi_max_deg": (0.0, 180.0),
    "hfov_deg": (1e-9, 360.0 - 1e-9),
    "s_min_mps": (0.0, None),
    "sigma_v": (0.0, None),
    "p_camera": (0.0, None),
    "p_radar": (0.0, None),
    "target_speed_max_mps": (0.0, None),
    "max_steps": (1, None),
    "workers": (1, None),
}
POSITIVE = ("dt_s", "camera_range_m", "sigma_ais_m", "eps_m2", "d_min_m", "d_max_m", "d_safe_m",
            "s_max_mps", "target_r_min_m", "target_r_max_m", "init_pos_sigma_m",
            "init_vel_sigma_mps")


def validate(cfg):
    for f in fields(cfg):
        value = getattr(cfg, f.name)
        if f.type is int and (isinstance(value, bool) or not isinstance(value, int)):
            raise ConfigError(f.name, f"expected an integer, got {value!r}")
        if f.type is float:
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise ConfigError(f.name, f"expected a number, got {value!r}")
            if not math.isfinite(value):
                raise ConfigError(f.name, "must be finite")
    for name, (lo, hi) in RANGES.items():
        value = getattr(cfg, name)
        if (lo is not None and value < lo) or (hi is not None and value > hi):
            raise ConfigError(name, f"{value} outside [{lo}, {hi if hi is not None else 'inf'}]")
    for name in POSITIVE:
        if not getattr(cfg, name) > 0:
            raise ConfigError(name, "must be positive")
    if cfg.s_min_mps > cfg.s_max_mps:
        raise ConfigError("s_min_mps", "exceeds s_max_mps")
    if not cfg.d_min_m < cfg.d_safe_m < cfg.d_max_m:
        raise ConfigError("d_safe_m", "need d_min_m < d_safe_m < d_max_m")
    if cfg.target_r_min_m > cfg.target_r_max_m:
        raise ConfigError("target_r_min_m", "exceeds target_r_max_m")
    if cfg.mode not in MODES:
        raise ConfigError("mode", f"must be one of {MODES}, got {cfg.mode!r}")


FIELD_NAMES = {f.name for f in fields(ScenarioConfig)}
FLOAT_FIELDS = {f.name for f in fields(ScenarioConfig) if f.type is float}


def from_dict(data):
    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ConfigError("<root>", "expected a mapping of parameter names to values")
    unknown = sorted(set(data) - FIELD_NAMES)
    if unknown:
        raise ConfigError(unknown[0], "unknown field")
    clean = {}
    for k, v in data.items():
        # YAML reads 7e5 without a dot as a string; accept numeric strings for float fields
        if k in FLOAT_FIELDS and isinstance(v, str):
            try:
                v = float(v)
            except ValueError:
                raise ConfigError(k, f"expected a number, got {v!r}") from None
        if k in FLOAT_FIELDS and isinstance(v, int) and not isinstance(v, bool):
            v = float(v)
        clean[k] = v
    return ScenarioConfig(**clean)


def parse_config(path):
    """Read a config file; omitted fields take the experiment defaults."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError("<file>", str(exc)) from exc
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError("<file>", f"malformed config: {exc}") from exc
    return from_dict(data)


def to_dict(cfg):
    return asdict(cfg)


def emit(cfg):
    return yaml.safe_dump(to_dict(cfg), sort_keys=False)
