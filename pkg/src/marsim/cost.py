"""Clamped penalty terms, per-camera utility and the team objective."""

from dataclasses import dataclass

import numpy as np

from . import linalg
from .dynamics import camera_positions_after
from .sensors import CameraSpec, in_fov_many
from .tracking import isotropic_gain


@dataclass(frozen=True)
class CostWeights:
    alpha1: float = 1.0
    alpha2: float = 1.0
    alpha3: float = 1.0
    eps: float = 7e5
    d_min: float = 80.0
    d_max: float = 16_000.0
    d_safe: float = 100.0

    def __post_init__(self):
        for name in ("alpha1", "alpha2", "alpha3"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1]")
        if not self.d_min < self.d_safe < self.d_max:
            raise ValueError("need d_min < d_safe < d_max")
        if self.eps <= 0:
            raise ValueError("eps must be positive")


def clamp_mse(trace, eps):
    trace = np.asarray(trace, dtype=float)
    out = np.where(trace <= eps, 0.0, trace - eps)
    return float(out) if out.ndim == 0 else out


def band_penalty(d, d_min, d_max):
    """Product of the two clamped band factors; each factor is 1 when its side is satisfied."""
    d = np.asarray(d, dtype=float)
    f1 = np.where(d >= d_min, 1.0, d_min - d)
    f2 = np.where(d <= d_max, 1.0, d - d_max)
    out = f1 * f2
    return float(out) if out.ndim == 0 else out


def safety_penalty(d, d_safe):
    d = np.asarray(d, dtype=float)
    out = np.where(d >= d_safe, 0.0, d_safe - d)
    return float(out) if out.ndim == 0 else out


@dataclass
class StepContext:
    """Everything a camera needs to score its actions for one planning step.

    ``base_info[v]`` is the radar+AIS information of target ``v`` after the
    nominal update at t+1, ``cam_info[c]`` the predicted (not updated)
    information of camera ``c``'s track of its assigned target and
    ``nominal_xy[v]`` the nominal mean position at t+1.
    """

    cam_xy: np.ndarray
    cam_heading: np.ndarray
    assignment: np.ndarray
    nominal_xy: np.ndarray
    base_info: np.ndarray
    cam_info: np.ndarray
    dt: float
    camera: CameraSpec
    weights: CostWeights


def _fused_trace(info):
    return linalg.trace(linalg.spd_inverse(info, check=False))


def post_positions(ctx, profile):
    """Post-action positions and headings for a joint profile (``None`` = hold)."""
    xy = np.array(ctx.cam_xy, dtype=float)
    heading = np.array(ctx.cam_heading, dtype=float)
    for c, a in enumerate(profile):
        if a is None:
            continue
        xy[c] = camera_positions_after(ctx.cam_xy[c], a.speed, a.heading, ctx.dt)
        heading[c] = a.heading
    return xy, heading


def camera_info_gain(ctx, xy, heading, v):
    """Information a camera at ``xy`` facing ``heading`` adds about target ``v`` (zero if unseen)."""
    ok, d = in_fov_many(xy, heading, ctx.nominal_xy[v], ctx.camera)
    if not ok:
        return np.zeros((4, 4))
    var = max(float(d) * ctx.camera.p_c / 100.0, 1e-3) ** 2
    return isotropic_gain(var)


def camera_utility(c, profile, ctx):
    """Utility of camera ``c`` under the joint action ``profile``.

    Only the camera-pair terms that involve ``c`` enter its utility.
    """
    v = int(ctx.assignment[c])
    if v < 0:
        raise ValueError(f"camera {c} has no assigned target")
    w = ctx.weights
    xy, heading = post_positions(ctx, profile)
    info = ctx.base_info[v] + ctx.cam_info[c] + camera_info_gain(ctx, xy[c], heading[c], v)
    mse = clamp_mse(float(_fused_trace(info)), w.eps)
    d_tv = np.linalg.norm(ctx.nominal_xy - xy[c], axis=-1)
    band = band_penalty(d_tv[v], w.d_min, w.d_max)
    safe_t = float(np.sum(safety_penalty(d_tv, w.d_safe)))
    others = np.delete(xy, c, axis=0)
    safe_c = float(np.sum(safety_penalty(np.linalg.norm(others - xy[c], axis=-1), w.d_safe)))
    return -(mse + w.alpha1 * band + w.alpha2 * safe_t + w.alpha3 * safe_c)


def own_utility_table(c, speeds, headings, ctx):
    """Vectorized utility of camera ``c`` over its action list, without the pair term.

    Returns ``(own, post_xy)``: ``own[k]`` is the utility of action ``k``
    minus the camera-pair safety term, ``post_xy[k]`` the position it leads to.
    """
    v = int(ctx.assignment[c])
    w = ctx.weights
    post = camera_positions_after(ctx.cam_xy[c], speeds, headings, ctx.dt)
    ok, d = in_fov_many(post, headings, ctx.nominal_xy[v], ctx.camera)
    base = ctx.base_info[v] + ctx.cam_info[c]
    tr = np.full(len(speeds), float(_fused_trace(base)))
    if np.any(ok):
        var = np.maximum(d[ok] * ctx.camera.p_c / 100.0, 1e-3) ** 2
        tr[ok] = _fused_trace(base + isotropic_gain(var))
    mse = clamp_mse(tr, w.eps)
    d_all = np.linalg.norm(post[:, None, :] - ctx.nominal_xy[None, :, :], axis=-1)
    band = band_penalty(d_all[:, v], w.d_min, w.d_max)
    safe_t = safety_penalty(d_all, w.d_safe).sum(axis=1)
    return -(mse + w.alpha1 * band + w.alpha2 * safe_t), post


def pair_penalty(cand_xy, others_xy, d_safe):
    """Camera-pair safety penalty for each candidate position against fixed other cameras."""
    if len(others_xy) == 0:
        return np.zeros(len(cand_xy))
    d = np.linalg.norm(cand_xy[:, None, :] - others_xy[None, :, :], axis=-1)
    return safety_penalty(d, d_safe).sum(axis=1)


def step_objective(profile, ctx):
    """Objective contribution of one planning step for a joint profile."""
    w = ctx.weights
    xy, heading = post_positions(ctx, profile)
    n_v = ctx.nominal_xy.shape[0]
    total = 0.0
    assigned = {int(v): c for c, v in enumerate(ctx.assignment) if v >= 0}
    for v in range(n_v):
        info = ctx.base_info[v]
        if v in assigned:
            c = assigned[v]
            info = info + ctx.cam_info[c] + camera_info_gain(ctx, xy[c], heading[c], v)
        total += clamp_mse(float(_fused_trace(info)), w.eps)
    d_cv = np.linalg.norm(xy[:, None, :] - ctx.nominal_xy[None, :, :], axis=-1)
    for v, c in assigned.items():
        total += w.alpha1 * band_penalty(d_cv[c, v], w.d_min, w.d_max)
    total += w.alpha2 * float(np.sum(safety_penalty(d_cv, w.d_safe)))
    d_cc = np.linalg.norm(xy[:, None, :] - xy[None, :, :], axis=-1)
    off = ~np.eye(len(xy), dtype=bool)
    total += w.alpha3 * float(np.sum(safety_penalty(d_cc[off], w.d_safe)))
    return total


def global_objective(profiles, contexts):
    """Sum of :func:`step_objective` over a horizon of (profile, context) pairs."""
    return float(sum(step_objective(p, ctx) for p, ctx in zip(profiles, contexts)))
