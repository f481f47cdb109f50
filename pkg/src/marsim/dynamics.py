"""Target and camera motion on the sea surface.

Targets follow a nearly-constant-velocity model with white acceleration
noise; state vectors are laid out as ``(x, vx, y, vy)``. Cameras move
deterministically along their commanded heading.
"""

from dataclasses import dataclass
import math

import numpy as np

KNOT = 0.514  # m/s

S_MIN = 0.0
S_MAX = 9.0
PHI_MAX = math.pi


def wrap_angle(a):
    """Map an angle (or array of angles) onto (-pi, pi]."""
    w = np.mod(np.asarray(a, dtype=float) + math.pi, 2 * math.pi) - math.pi
    w = np.where(w == -math.pi, math.pi, w)
    if np.ndim(w) == 0:
        return float(w)
    return w


def angle_diff(a, b):
    """Shortest-arc absolute difference between two headings."""
    return np.abs(wrap_angle(np.asarray(a, dtype=float) - np.asarray(b, dtype=float)))


@dataclass(frozen=True)
class TargetState:
    x: float
    vx: float
    y: float
    vy: float

    def as_array(self):
        return np.array([self.x, self.vx, self.y, self.vy], dtype=float)

    @classmethod
    def from_array(cls, a):
        return cls(*(float(v) for v in a))

    @property
    def speed(self):
        return math.hypot(self.vx, self.vy)


@dataclass(frozen=True)
class CameraPose:
    x: float
    y: float
    heading: float = 0.0


@dataclass(frozen=True)
class Action:
    speed: float
    heading: float


def build_transition(dt):
    if not dt > 0:
        raise ValueError(f"dt must be positive, got {dt}")
    f = np.eye(4)
    f[0, 1] = dt
    f[2, 3] = dt
    return f


def build_process_noise(sigma_v, dt):
    """White-noise-acceleration covariance for one (position, velocity) pair per axis."""
    if sigma_v < 0:
        raise ValueError(f"sigma_v must be non-negative, got {sigma_v}")
    if not dt > 0:
        raise ValueError(f"dt must be positive, got {dt}")
    block = np.array([[dt**3 / 3, dt**2 / 2], [dt**2 / 2, dt]])
    q = np.zeros((4, 4))
    q[:2, :2] = block
    q[2:, 2:] = block
    return sigma_v**2 * q


def step_target(state, F, Q, rng, lane_velocity=None):
    """Propagate one target (or an ``(n, 4)`` stack) by one step with sampled noise.

    ``lane_velocity`` (``(..., 2)``, vx/vy) pins the velocity after the step so
    the noise only jitters the position around a constant-course track.
    """
    x = state.as_array() if isinstance(state, TargetState) else np.asarray(state, dtype=float)
    mean = x @ np.asarray(F).T
    if np.any(Q):
        noise = rng.multivariate_normal(np.zeros(4), Q, size=mean.shape[:-1] or None, method="cholesky")
    else:
        noise = np.zeros_like(mean)
    out = mean + noise
    if lane_velocity is not None:
        lane = np.asarray(lane_velocity, dtype=float)
        out[..., 1] = lane[..., 0]
        out[..., 3] = lane[..., 1]
    if isinstance(state, TargetState):
        return TargetState.from_array(out)
    return out


def validate_action(a, prev_heading, s_min=S_MIN, s_max=S_MAX, phi_max=PHI_MAX, tol=1e-9):
    if not (s_min - tol <= a.speed <= s_max + tol):
        return False
    return bool(angle_diff(a.heading, prev_heading) <= phi_max + tol)


def step_camera(pose, a, dt, s_min=S_MIN, s_max=S_MAX, phi_max=PHI_MAX):
    if not validate_action(a, pose.heading, s_min, s_max, phi_max):
        raise ValueError(f"action {a} violates speed/turn limits from heading {pose.heading}")
    return CameraPose(
        pose.x + a.speed * math.cos(a.heading) * dt,
        pose.y + a.speed * math.sin(a.heading) * dt,
        wrap_angle(a.heading),
    )


def camera_positions_after(xy, speeds, headings, dt):
    """Vectorized camera move: ``xy`` broadcasts against ``speeds``/``headings``."""
    xy = np.asarray(xy, dtype=float)
    speeds = np.asarray(speeds, dtype=float)
    headings = np.asarray(headings, dtype=float)
    dx = speeds * np.cos(headings) * dt
    dy = speeds * np.sin(headings) * dt
    return np.stack([xy[..., 0] + dx, xy[..., 1] + dy], axis=-1)
