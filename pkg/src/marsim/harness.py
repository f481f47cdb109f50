"""Scenario generation and the closed-loop episode simulation."""

from dataclasses import dataclass, field
import math
import time

import numpy as np

from . import allocation, linalg
from .baseline import assign_baseline, plan_baseline
from .config import ScenarioConfig
from .dynamics import build_process_noise, build_transition, step_target, validate_action
from .planner import NominalBelief, plan_horizon
from .sensors import SensorKind, in_fov_many
from .tracking import TrackBank

PLANNERS = ("rml", "baseline")

# SeedSequence spawn keys for the independent random streams of an episode
_SCENARIO, _PROCESS, _MEASURE, _CAMERA = 0, 1, 2, 3


def stream(seed, *key):
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=key))


@dataclass
class World:
    targets: np.ndarray  # (V, 4) true states
    cam_xy: np.ndarray  # (C, 2)
    cam_heading: np.ndarray  # (C,)
    radar_xy: np.ndarray  # (2,)


def _visible(cam_xy, cam_heading, target_xy, camera):
    """``(C, V)`` FOV mask and distances of true target positions."""
    return in_fov_many(cam_xy[:, None, :], cam_heading[:, None], target_xy[None, :, :], camera)


def generate_scenario(config: ScenarioConfig, rng=None):
    """Cameras at the origin facing east; targets uniform over the annulus, outside every FOV."""
    rng = stream(config.seed, _SCENARIO) if rng is None else rng
    n_c, n_v = config.n_cameras, config.n_targets
    cam_xy = np.zeros((n_c, 2))
    cam_heading = np.zeros(n_c)
    targets = np.zeros((n_v, 4))
    r1, r2 = config.target_r_min_m, config.target_r_max_m
    for v in range(n_v):
        for _ in range(10_000):
            r = math.sqrt(rng.uniform(r1**2, r2**2))
            bearing = rng.uniform(-math.pi, math.pi)
            course = rng.uniform(-math.pi, math.pi)
            speed = rng.uniform(0.0, config.target_speed_max_mps)
            x, y = r * math.cos(bearing), r * math.sin(bearing)
            seen, _ = _visible(cam_xy, cam_heading, np.array([[x, y]]), config.camera)
            if not seen.any():
                break
        else:
            raise RuntimeError("could not place a target outside the camera FOVs")
        targets[v] = (x, speed * math.cos(course), y, speed * math.sin(course))
    return World(targets, cam_xy, cam_heading, np.array([config.radar_x_m, config.radar_y_m]))


@dataclass
class SimTrace:
    config: ScenarioConfig
    planner: str
    truth: np.ndarray
    est: np.ndarray
    fused_trace: np.ndarray
    observed: np.ndarray
    cam_xy: np.ndarray
    cam_heading: np.ndarray
    cam_speed: np.ndarray
    assignment: np.ndarray
    plan_time: np.ndarray
    first_obs_step: np.ndarray
    obs_events: np.ndarray
    action_ok: np.ndarray
    assignment_ok: np.ndarray
    camera_seen: np.ndarray
    extra: dict = field(default_factory=dict)

    @property
    def n_steps(self):
        return self.truth.shape[0]

    @property
    def solved(self):
        return bool(np.all(self.first_obs_step >= 0))

    @property
    def duration(self):
        """Seconds until the last target is first observed; ``None`` if the budget ran out."""
        if not self.solved:
            return None
        return float(self.config.dt_s * self.first_obs_step.max())


def _measure_all(truth, cam_xy, cam_heading, config, radar_xy, rng):
    """Radar, AIS and camera measurements of all targets at one instant.

    A fixed number of normals is drawn every call so the stream stays aligned
    whatever the cameras see.
    """
    pos = truth[:, [0, 2]]
    n_v = pos.shape[0]
    d_r = np.linalg.norm(pos - radar_xy, axis=-1)
    var_r = np.maximum(d_r * config.p_radar / 100.0, 1e-3) ** 2
    z_r = pos + rng.normal(size=(n_v, 2)) * np.sqrt(var_r)[:, None]
    var_a = np.full(n_v, config.sigma_ais_m**2)
    z_a = pos + rng.normal(size=(n_v, 2)) * config.sigma_ais_m
    seen, d_c = _visible(cam_xy, cam_heading, pos, config.camera)
    var_c = np.maximum(d_c * config.p_camera / 100.0, 1e-3) ** 2
    z_c = pos[None] + rng.normal(size=seen.shape + (2,)) * np.sqrt(var_c)[..., None]
    return (z_r, var_r), (z_a, var_a), (z_c, var_c, seen)


def _nominal_belief(bank, assignment, fused_mean, F, Q, config, radar_xy):
    cam_cov = np.stack([bank.cam_cov[c, max(v, 0)] for c, v in enumerate(assignment)])
    return NominalBelief(fused_mean, bank.radar_cov, bank.ais_cov, cam_cov, F, Q, radar_xy,
                         config.p_radar, config.sigma_ais_m)


def run_episode(config: ScenarioConfig, planner="rml", max_steps=None, mode=None):
    """Closed-loop simulation until every target is observed or the step budget is spent.

    Each loop iteration is one planning epoch: update tracks with the
    measurements taken at the end of the previous step, check observations,
    re-allocate, plan over the horizon and execute the first step.
    """
    if planner not in PLANNERS:
        raise ValueError(f"planner must be one of {PLANNERS}")
    max_steps = config.max_steps if max_steps is None else max_steps
    mode = config.mode if mode is None else mode
    world = generate_scenario(config)
    process_rng = stream(config.seed, _PROCESS)
    meas_rng = stream(config.seed, _MEASURE)
    cam_rngs = [stream(config.seed, _CAMERA, c) for c in range(config.n_cameras)]

    dt = config.dt_s
    F = build_transition(dt)
    Q = build_process_noise(config.sigma_v, dt)
    camera, weights, game = config.camera, config.weights, config.game
    n_c, n_v = config.n_cameras, config.n_targets

    truth = world.targets.copy()
    lane = truth[:, [1, 3]].copy()
    cam_xy = world.cam_xy.copy()
    cam_heading = world.cam_heading.copy()
    radar_xy = world.radar_xy

    (z_r, _), ais, cams = _measure_all(truth, cam_xy, cam_heading, config, radar_xy, meas_rng)
    bank = TrackBank(z_r, n_c, config.init_pos_sigma_m, config.init_vel_sigma_mps)
    # the t=0 radar fix seeds every track, so only AIS and camera data remain pending
    pending = (None, ais, cams)

    clocks = np.ones(n_v, dtype=int)
    assignment = np.full(n_c, allocation.UNASSIGNED, dtype=int)
    first_obs = np.full(n_v, -1, dtype=int)
    obs_events = np.zeros(n_v, dtype=int)
    was_observed = np.zeros(n_v, dtype=bool)

    rec = {k: [] for k in ("truth", "est", "trace", "observed", "cam_xy", "cam_heading",
                           "cam_speed", "assignment", "action_ok", "assignment_ok", "seen")}
    plan_times = []

    t = 0
    while True:
        # Step 0: fold in the measurements taken at the end of the previous step
        radar, ais, cams = pending
        if radar is not None:
            bank.update(SensorKind.RADAR, *radar)
        bank.update(SensorKind.AIS, *ais)
        z_c, var_c, seen = cams
        for c in range(n_c):
            bank.update(SensorKind.CAMERA, z_c[c], var_c[c], camera=c, mask=seen[c])

        _, trace, fused_mean = bank.fused(assignment)
        camera_sees = seen.any(axis=0)
        observed = camera_sees & (trace <= weights.eps)
        first_obs[(first_obs < 0) & observed] = t
        obs_events += observed & ~was_observed
        was_observed = observed
        clocks = allocation.tick_clocks(clocks, observed)

        rec["truth"].append(truth.copy())
        rec["est"].append(fused_mean[:, [0, 2]].copy())
        rec["trace"].append(trace.copy())
        rec["observed"].append(observed.copy())
        rec["seen"].append(camera_sees.copy())
        rec["cam_xy"].append(cam_xy.copy())
        rec["cam_heading"].append(cam_heading.copy())

        done = mode == "first" and np.all(first_obs >= 0)
        if done or t >= max_steps:
            rec["cam_speed"].append(np.zeros(n_c))
            rec["assignment"].append(assignment.copy())
            rec["action_ok"].append(np.ones(n_c, dtype=bool))
            rec["assignment_ok"].append(True)
            break

        tic = time.perf_counter()
        # Step 1: allocation, fresh at every epoch start
        if planner == "rml":
            M = allocation.build_matrix(cam_xy, fused_mean[:, [0, 2]], clocks)
            assignment = allocation.greedy_allocate(M)
        else:
            assignment = assign_baseline(_system_trace(bank), fused_mean[:, [0, 2]], cam_xy)
        _, _, nominal_mean = bank.fused(assignment)
        belief = _nominal_belief(bank, assignment, nominal_mean, F, Q, config, radar_xy)

        # Step 2: plan over the horizon, execute only the first step
        if planner == "rml":
            profiles = plan_horizon(belief, cam_xy, cam_heading, assignment, game, camera, weights,
                                    dt, cam_rngs)
        else:
            profiles = plan_baseline(belief, cam_xy, cam_heading, assignment, game, camera, weights, dt)
        plan_times.append(time.perf_counter() - tic)
        profile = profiles[0]

        ok = np.array([validate_action(a, cam_heading[c], game.s_min, game.s_max, game.phi_max)
                       for c, a in enumerate(profile)])
        rec["action_ok"].append(ok)
        rec["assignment_ok"].append(allocation.is_valid_assignment(assignment, n_v))
        rec["assignment"].append(assignment.copy())
        speeds = np.array([a.speed for a in profile])
        headings = np.array([a.heading for a in profile])
        rec["cam_speed"].append(speeds)

        cam_xy = cam_xy + dt * np.stack([speeds * np.cos(headings), speeds * np.sin(headings)], -1)
        cam_heading = headings
        truth = step_target(truth, F, Q, process_rng, lane_velocity=lane)
        bank.predict(F, Q)
        pending = _measure_all(truth, cam_xy, cam_heading, config, radar_xy, meas_rng)
        t += 1

    return SimTrace(
        config=config,
        planner=planner,
        truth=np.array(rec["truth"]),
        est=np.array(rec["est"]),
        fused_trace=np.array(rec["trace"]),
        observed=np.array(rec["observed"]),
        cam_xy=np.array(rec["cam_xy"]),
        cam_heading=np.array(rec["cam_heading"]),
        cam_speed=np.array(rec["cam_speed"]),
        assignment=np.array(rec["assignment"]),
        plan_time=np.array(plan_times),
        first_obs_step=first_obs,
        obs_events=obs_events,
        action_ok=np.array(rec["action_ok"]),
        assignment_ok=np.array(rec["assignment_ok"]),
        camera_seen=np.array(rec["seen"]),
        extra={"mode": mode, "max_steps": max_steps},
    )


def _system_trace(bank):
    """Fused trace per target using every camera's track (the baseline's MSE ranking)."""
    i_r, i_a, i_c = bank.info()
    info = i_r + i_a + i_c.sum(axis=0)
    return linalg.trace(linalg.spd_inverse(info, check=False))


def collect_metrics(trace: SimTrace):
    t = trace.plan_time
    return {
        "planner": trace.planner,
        "seed": trace.config.seed,
        "solved": trace.solved,
        "duration_s": trace.duration,
        "first_obs_step": trace.first_obs_step.tolist(),
        "obs_events": trace.obs_events.tolist(),
        "n_steps": trace.n_steps,
        "plan_time_total_s": float(t.sum()) if t.size else 0.0,
        "plan_time_mean_s": float(t.mean()) if t.size else 0.0,
        "plan_time_max_s": float(t.max()) if t.size else 0.0,
        "mse_final": trace.fused_trace[-1].tolist(),
    }
