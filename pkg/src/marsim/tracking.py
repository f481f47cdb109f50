"""Per-sensor Kalman tracks, nominal belief propagation and information fusion.

Measurements arrive tagged with the target they belong to, so every
(sensor, target) pair runs its own filter. Fusion adds the information
matrices of the radar, AIS and assigned-camera tracks.
"""

from dataclasses import dataclass, replace

import numpy as np

from . import linalg
from .sensors import SensorKind

H = np.array([[1.0, 0.0, 0.0, 0.0], [0.0, 0.0, 1.0, 0.0]])

INIT_POS_SIGMA = 5000.0
INIT_VEL_SIGMA = 5.0


@dataclass(frozen=True)
class Track:
    mean: np.ndarray
    cov: np.ndarray
    sensor: SensorKind
    target_id: int
    sensor_id: int = 0


@dataclass(frozen=True)
class FusedEstimate:
    target_id: int
    fused_cov: np.ndarray
    trace: float
    mean: np.ndarray


def initial_cov(pos_sigma=INIT_POS_SIGMA, vel_sigma=INIT_VEL_SIGMA):
    return np.diag([pos_sigma**2, vel_sigma**2, pos_sigma**2, vel_sigma**2])


def initial_track(z, sensor, target_id, sensor_id=0, pos_sigma=INIT_POS_SIGMA,
                  vel_sigma=INIT_VEL_SIGMA):
    """Track seeded at a position fix with zero velocity and a weak prior."""
    mean = np.array([z[0], 0.0, z[1], 0.0])
    return Track(mean, initial_cov(pos_sigma, vel_sigma), sensor, target_id, sensor_id)


def information_gain(R):
    """``H^T R^-1 H`` for a 2x2 (or stacked) measurement covariance."""
    r_inv = linalg.spd_inverse(R, check=False)
    return linalg.multiply(linalg.multiply(linalg.transpose(H), r_inv), H)


def isotropic_gain(var):
    """Information gain for ``R = var * I``; works elementwise on arrays of variances."""
    var = np.asarray(var, dtype=float)
    s = np.zeros(var.shape + (4, 4))
    s[..., 0, 0] = 1.0 / var
    s[..., 2, 2] = 1.0 / var
    return s


def kf_predict(track, F, Q):
    mean = F @ track.mean
    cov = linalg.symmetrize(linalg.multiply(linalg.multiply(F, track.cov), linalg.transpose(F)) + Q)
    return replace(track, mean=mean, cov=cov)


def kf_update(track, m, h=H):
    """Information-form measurement update for a tagged measurement."""
    if m.target_id != track.target_id:
        raise ValueError(f"measurement for target {m.target_id} applied to track {track.target_id}")
    r_inv = linalg.spd_inverse(m.noise_cov)
    ht = linalg.transpose(h)
    info = linalg.spd_inverse(track.cov) + linalg.multiply(linalg.multiply(ht, r_inv), h)
    cov = linalg.spd_inverse(info)
    gain = linalg.multiply(linalg.multiply(cov, ht), r_inv)
    mean = track.mean + gain @ (m.z - h @ track.mean)
    return replace(track, mean=mean, cov=cov)


def propagate_nominal(track, F, Q, visibility_schedule):
    """Roll a track forward without real measurements.

    ``visibility_schedule`` holds, per future step, either ``None`` (the
    nominal mean is not covered by the sensor) or the 2x2 noise covariance
    the sensor would have at the nominal geometry.
    """
    if len(visibility_schedule) < 1:
        raise ValueError("horizon must be at least one step")
    out = []
    for R in visibility_schedule:
        track = kf_predict(track, F, Q)
        if R is not None:
            info = linalg.spd_inverse(track.cov) + information_gain(np.asarray(R, dtype=float))
            track = replace(track, cov=linalg.spd_inverse(info))
        out.append(track)
    return out


def fuse(tracks, assignment=(), target_id=None):
    """Combine the radar, AIS and assigned-camera tracks of one target.

    ``tracks`` maps ``SensorKind.RADAR`` and ``SensorKind.AIS`` to a track and
    ``(SensorKind.CAMERA, c)`` to camera ``c``'s track; ``assignment`` is the
    collection of cameras whose indicator is 1 for this target.
    """
    parts = [tracks[SensorKind.RADAR], tracks[SensorKind.AIS]]
    parts += [tracks[(SensorKind.CAMERA, c)] for c in assignment]
    infos = [linalg.spd_inverse(t.cov) for t in parts]
    info = sum(infos)
    cov = linalg.spd_inverse(info)
    mean = cov @ sum(i @ t.mean for i, t in zip(infos, parts))
    if target_id is None:
        target_id = parts[0].target_id
    return FusedEstimate(target_id, cov, float(linalg.trace(cov)), mean)


def fuse_info(*infos):
    """Fused covariance from already-inverted (information) matrices; batched."""
    return linalg.spd_inverse(sum(infos), check=False)


def is_observed(fused, any_camera_sees_truth, eps):
    if not eps > 0:
        raise ValueError("eps must be positive")
    return bool(any_camera_sees_truth and fused.trace <= eps)


class TrackBank:
    """All tracks of a scenario held as stacked arrays.

    Radar and AIS tracks are ``(V, 4)``/``(V, 4, 4)``; camera tracks are
    ``(C, V, 4)``/``(C, V, 4, 4)``. Operations are vectorized over the
    stacks but follow exactly the single-track equations above.
    """

    def __init__(self, z0, n_cameras, pos_sigma=INIT_POS_SIGMA, vel_sigma=INIT_VEL_SIGMA):
        z0 = np.asarray(z0, dtype=float)
        n = z0.shape[0]
        mean = np.zeros((n, 4))
        mean[:, 0] = z0[:, 0]
        mean[:, 2] = z0[:, 1]
        cov = np.broadcast_to(initial_cov(pos_sigma, vel_sigma), (n, 4, 4))
        self.radar_mean = mean.copy()
        self.radar_cov = cov.copy()
        self.ais_mean = mean.copy()
        self.ais_cov = cov.copy()
        self.cam_mean = np.broadcast_to(mean, (n_cameras, n, 4)).copy()
        self.cam_cov = np.broadcast_to(cov, (n_cameras, n, 4, 4)).copy()
        self._info = None

    @property
    def n_targets(self):
        return self.radar_mean.shape[0]

    @property
    def n_cameras(self):
        return self.cam_mean.shape[0]

    def predict(self, F, Q):
        ft = F.T
        for name in ("radar", "ais", "cam"):
            m = getattr(self, f"{name}_mean")
            c = getattr(self, f"{name}_cov")
            setattr(self, f"{name}_mean", m @ ft)
            setattr(self, f"{name}_cov", linalg.symmetrize(F @ c @ ft + Q))
        self._info = None

    @staticmethod
    def _update(mean, cov, z, var):
        # Same algebra as kf_update with R = var * I.
        info = linalg.spd_inverse(cov, check=False) + isotropic_gain(var)
        new_cov = linalg.spd_inverse(info, check=False)
        resid = z - mean[..., [0, 2]]
        gain_resid = new_cov[..., :, [0, 2]] @ (resid / var[..., None])[..., None]
        return mean + gain_resid[..., 0], new_cov

    def update(self, kind, z, var, camera=None, mask=None):
        """Apply measurements ``z`` (``(V, 2)``) with variances ``var`` (``(V,)``).

        ``mask`` selects the targets that actually have a measurement.
        """
        z = np.asarray(z, dtype=float)
        var = np.asarray(var, dtype=float)
        idx = np.arange(z.shape[0]) if mask is None else np.flatnonzero(mask)
        if idx.size == 0:
            return
        if kind is SensorKind.RADAR:
            m, c = self.radar_mean, self.radar_cov
        elif kind is SensorKind.AIS:
            m, c = self.ais_mean, self.ais_cov
        else:
            m, c = self.cam_mean[camera], self.cam_cov[camera]
        new_m, new_c = self._update(m[idx], c[idx], z[idx], var[idx])
        m[idx] = new_m
        c[idx] = new_c
        self._info = None

    def info(self):
        """Information matrices: radar ``(V,4,4)``, AIS ``(V,4,4)``, cameras ``(C,V,4,4)``.

        Cached until the next predict or update; callers must not modify them.
        """
        if self._info is None:
            self._info = (linalg.spd_inverse(self.radar_cov, check=False),
                          linalg.spd_inverse(self.ais_cov, check=False),
                          linalg.spd_inverse(self.cam_cov, check=False))
        return self._info

    def fused(self, assignment):
        """Fused covariances, traces and means per target given ``assignment[c] = v or -1``."""
        i_r, i_a, i_c = self.info()
        info = i_r + i_a
        weighted = (i_r @ self.radar_mean[..., None] + i_a @ self.ais_mean[..., None])[..., 0]
        for c, v in enumerate(assignment):
            if v >= 0:
                info[v] = info[v] + i_c[c, v]
                weighted[v] = weighted[v] + i_c[c, v] @ self.cam_mean[c, v]
        cov = linalg.spd_inverse(info, check=False)
        mean = (cov @ weighted[..., None])[..., 0]
        return cov, linalg.trace(cov), mean

    def track(self, kind, target, camera=None):
        if kind is SensorKind.RADAR:
            return Track(self.radar_mean[target].copy(), self.radar_cov[target].copy(), kind, target)
        if kind is SensorKind.AIS:
            return Track(self.ais_mean[target].copy(), self.ais_cov[target].copy(), kind, target)
        return Track(self.cam_mean[camera, target].copy(), self.cam_cov[camera, target].copy(),
                     kind, target, camera)
