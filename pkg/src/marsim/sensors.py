"""Radar, AIS and camera position measurements."""

from dataclasses import dataclass
import enum
import math

import numpy as np

from .dynamics import CameraPose, TargetState, angle_diff


class SensorKind(enum.Enum):
    RADAR = "radar"
    AIS = "ais"
    CAMERA = "camera"


@dataclass(frozen=True)
class CameraSpec:
    hfov: float = math.radians(3.0)
    range: float = 16_000.0
    p_c: float = 13.0

    def __post_init__(self):
        if not 0 < self.hfov < 2 * math.pi:
            raise ValueError(f"hfov must lie in (0, 2pi), got {self.hfov}")
        if self.range <= 0:
            raise ValueError(f"range must be positive, got {self.range}")
        if self.p_c < 0:
            raise ValueError(f"p_c must be non-negative, got {self.p_c}")


@dataclass(frozen=True)
class RadarSpec:
    position: tuple = (95_000.0, -95_000.0)
    p_r: float = 13.0

    def __post_init__(self):
        if self.p_r < 0:
            raise ValueError(f"p_r must be non-negative, got {self.p_r}")


SIGMA_AIS = 1e3


@dataclass(frozen=True)
class Measurement:
    sensor: SensorKind
    sensor_id: int
    target_id: int
    z: np.ndarray
    noise_cov: np.ndarray
    time: int


def distance_sigma(d, p):
    """Noise standard deviation growing linearly with range, ``p`` in percent."""
    d = np.asarray(d, dtype=float)
    if np.any(d < 0):
        raise ValueError("distance must be non-negative")
    s = d * p / 100.0
    return float(s) if s.ndim == 0 else s


def in_fov(pose, point, spec):
    """Range and half-angle test of ``point`` against the camera boresight."""
    dx = point[0] - pose.x
    dy = point[1] - pose.y
    d = math.hypot(dx, dy)
    if d > spec.range:
        return False
    if d == 0.0:
        return True
    return bool(angle_diff(math.atan2(dy, dx), pose.heading) <= spec.hfov / 2)


def in_fov_many(cam_xy, cam_heading, points, spec):
    """Vectorized :func:`in_fov`; returns visibility mask and distances.

    ``cam_xy``/``cam_heading`` broadcast against ``points[..., :2]``.
    """
    cam_xy = np.asarray(cam_xy, dtype=float)
    points = np.asarray(points, dtype=float)
    dx = points[..., 0] - cam_xy[..., 0]
    dy = points[..., 1] - cam_xy[..., 1]
    d = np.hypot(dx, dy)
    bearing = np.arctan2(dy, dx)
    ok = (d <= spec.range) & ((angle_diff(bearing, cam_heading) <= spec.hfov / 2) | (d == 0.0))
    return ok, d


def measure(kind, sensor_geometry, truth, spec, rng, *, target_id=0, sensor_id=0, time=0,
            sigma_ais=SIGMA_AIS):
    """Draw one noisy position measurement, or ``None`` when a camera cannot see the target.

    ``sensor_geometry`` is a :class:`CameraPose` for cameras and ignored otherwise;
    ``spec`` is the matching :class:`CameraSpec`/:class:`RadarSpec` (unused for AIS).
    """
    x = truth.as_array() if isinstance(truth, TargetState) else np.asarray(truth, dtype=float)
    pos = np.array([x[0], x[2]])
    if kind is SensorKind.AIS:
        sigma = sigma_ais
    elif kind is SensorKind.RADAR:
        sigma = distance_sigma(math.dist(spec.position, pos), spec.p_r)
    elif kind is SensorKind.CAMERA:
        pose: CameraPose = sensor_geometry
        if not in_fov(pose, pos, spec):
            return None
        sigma = distance_sigma(math.hypot(pos[0] - pose.x, pos[1] - pose.y), spec.p_c)
    else:
        raise ValueError(f"unknown sensor kind {kind!r}")
    # A camera sitting on the target still reports with a tiny positive noise floor.
    sigma = max(sigma, 1e-3)
    z = pos + rng.normal(0.0, sigma, size=2)
    return Measurement(kind, sensor_id, target_id, z, sigma**2 * np.eye(2), time)
