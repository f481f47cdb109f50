"""Distributed path planning by regret matching with a forgetting factor.

Every planning step is a fresh repeated game between the assigned cameras.
In each iteration all cameras draw an action from their current
distribution, broadcast it, and then score every alternative against the
same frozen profile of the others' actions.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
import math

import numpy as np

from . import linalg
from .cost import StepContext, own_utility_table, pair_penalty, safety_penalty
from .dynamics import PHI_MAX, S_MAX, S_MIN, Action, wrap_angle
from .sensors import in_fov_many
from .tracking import isotropic_gain

MU_FLOOR = 1e-9


@dataclass(frozen=True)
class GameConfig:
    iterations: int = 20
    horizon: int = 1
    forgetting: float = 0.5
    n_speeds: int = 2
    n_headings: int = 12
    s_min: float = S_MIN
    s_max: float = S_MAX
    phi_max: float = PHI_MAX
    workers: int = 1
    decay_unplayed: bool = False

    def __post_init__(self):
        if self.iterations < 1 or self.horizon < 1:
            raise ValueError("iterations and horizon must be at least 1")
        if not 0.0 <= self.forgetting <= 1.0:
            raise ValueError("forgetting factor must lie in [0, 1]")


@dataclass(frozen=True)
class ActionSet:
    speeds: np.ndarray
    headings: np.ndarray

    def __len__(self):
        return len(self.speeds)

    def action(self, k):
        return Action(float(self.speeds[k]), float(self.headings[k]))

    @property
    def actions(self):
        return [self.action(k) for k in range(len(self))]


def _heading_levels(prev_heading, n_headings, phi_max):
    if n_headings == 1:
        return np.array([wrap_angle(prev_heading)])
    if phi_max >= math.pi - 1e-12:
        # Full circle: even spacing that does not repeat the +-pi endpoint.
        return wrap_angle(prev_heading + np.arange(n_headings) * (2 * math.pi / n_headings))
    levels = wrap_angle(prev_heading + np.linspace(-phi_max, phi_max, n_headings))
    _, keep = np.unique(np.round(levels, 12), return_index=True)
    return levels[np.sort(keep)]


def build_action_set(n_speeds, n_headings, prev_heading, s_min=S_MIN, s_max=S_MAX, phi_max=PHI_MAX):
    """Cross product of evenly spaced speed levels and admissible headings.

    Speeds vary slowest, so action 0 is the slowest speed along the first heading.
    """
    if n_speeds < 2 or n_headings < 1:
        raise ValueError("need at least 2 speed levels and 1 heading")
    speeds = np.linspace(s_min, s_max, n_speeds)
    headings = _heading_levels(prev_heading, n_headings, phi_max)
    return ActionSet(np.repeat(speeds, len(headings)), np.tile(headings, n_speeds))


def init_distribution(n_actions):
    if n_actions < 1:
        raise ValueError("need at least one action")
    return np.full(n_actions, 1.0 / n_actions)


def instantaneous_regret(u_alt, u_played):
    """Gain from having played the alternative instead, other players fixed."""
    return u_alt - u_played


def update_regret(prev, inst, lam):
    if not 0.0 <= lam <= 1.0:
        raise ValueError("forgetting factor must lie in [0, 1]")
    return lam * np.asarray(prev, dtype=float) + (1.0 - lam) * np.asarray(inst, dtype=float)


def update_distribution(regret_row, j, mu=None):
    """Next-iteration distribution from the played row of the regret table.

    Alternatives get probability proportional to their positive regret; the
    played action ``j`` keeps the remaining mass. The default normaliser
    ``mu = (|A| - 1) * max positive regret`` keeps that remainder non-negative.
    """
    row = np.asarray(regret_row, dtype=float)
    pos = np.maximum(row, 0.0)
    pos[j] = 0.0
    if mu is None:
        mu = max((len(row) - 1) * pos.max(initial=0.0), MU_FLOOR)
    pi = pos / mu
    pi[j] = 0.0
    pi[j] = max(1.0 - pi.sum(), 0.0)
    return pi


class RegretState:
    """Regret table of one player; row ``j`` holds regrets for having played ``j``."""

    def __init__(self, n_actions, lam, decay_unplayed=False):
        self.table = np.zeros((n_actions, n_actions))
        self.lam = lam
        self.decay_unplayed = decay_unplayed
        self.pi = init_distribution(n_actions)

    def observe(self, j, utilities, lam=None):
        lam = self.lam if lam is None else lam
        inst = instantaneous_regret(np.asarray(utilities, dtype=float), utilities[j])
        inst[j] = 0.0
        if self.decay_unplayed:
            self.table *= lam
            self.table[j] += (1.0 - lam) * inst
        else:
            self.table[j] = update_regret(self.table[j], inst, lam)
        self.pi = update_distribution(self.table[j], j)
        return self.pi

    def max_positive_regret(self, j):
        row = np.maximum(self.table[j], 0.0)
        row[j] = 0.0
        return float(row.max(initial=0.0))


def _sample(rng, pi=None, cdf=None):
    # Inverse-CDF draw with one uniform per call keeps streams aligned across runs.
    if cdf is None:
        cdf = np.cumsum(pi)
    u = rng.random() * cdf[-1]
    return int(min(np.searchsorted(cdf, u, side="right"), len(cdf) - 1))


@dataclass
class GameRecord:
    played: list
    max_regret: list
    final: list


def _learn_stacked(tables, j, utilities, lam, decay_unplayed):
    """Regret and distribution update for all players at once (equal action counts).

    Row for row this is :meth:`RegretState.observe`; returns the new
    distributions and each player's max positive regret on its played row.
    """
    n, m = utilities.shape
    rows = np.arange(n)
    inst = utilities - utilities[rows, j][:, None]
    inst[rows, j] = 0.0
    if decay_unplayed:
        tables *= lam
        tables[rows, j] += (1.0 - lam) * inst
    else:
        tables[rows, j] = lam * tables[rows, j] + (1.0 - lam) * inst
    pos = np.maximum(tables[rows, j], 0.0)
    pos[rows, j] = 0.0
    top = pos.max(axis=1)
    mu = np.maximum((m - 1) * top, MU_FLOOR)
    pi = pos / mu[:, None]
    pi[rows, j] = 0.0
    pi[rows, j] = np.maximum(1.0 - pi.sum(axis=1), 0.0)
    return pi, top


def play_game(utility_fns, n_actions, iterations, lam, rngs, workers=1, decay_unplayed=False,
              time_average=False):
    """Synchronous regret-matching self-play.

    ``utility_fns[i](profile)`` returns player ``i``'s utility for each of its
    actions with the other entries of ``profile`` held fixed. Every player
    samples, the profile is frozen, and only then are utilities evaluated,
    optionally in a thread pool. Returns the final sampled profile, a
    per-iteration record and the players' regret states.
    """
    n = len(utility_fns)
    if len(set(n_actions)) > 1:
        raise ValueError("all players need the same number of actions")
    m = n_actions[0]
    states = [RegretState(m, lam, decay_unplayed) for _ in range(n)]
    tables = np.zeros((n, m, m))
    pi = np.full((n, m), 1.0 / m)
    played, max_regret = [], []
    pool = ThreadPoolExecutor(workers) if workers > 1 and n > 1 else None
    try:
        for tau in range(1, iterations + 1):
            cdf = np.cumsum(pi, axis=1)
            frozen = tuple(_sample(rngs[i], cdf=cdf[i]) for i in range(n))
            step_lam = 1.0 - 1.0 / tau if time_average else lam
            evaluate = lambda i: utility_fns[i](frozen)  # noqa: E731
            utils = list(pool.map(evaluate, range(n))) if pool else [evaluate(i) for i in range(n)]
            pi, top = _learn_stacked(tables, np.array(frozen), np.array(utils, dtype=float), step_lam,
                                     decay_unplayed)
            played.append(frozen)
            max_regret.append(top.tolist())
        cdf = np.cumsum(pi, axis=1)
        final = [_sample(rngs[i], cdf=cdf[i]) for i in range(n)]
    finally:
        if pool:
            pool.shutdown()
    for i, st in enumerate(states):
        st.table = tables[i]
        st.pi = pi[i]
    return final, GameRecord(played, max_regret, final), states


def hold_action(heading):
    return Action(0.0, float(heading))


def plan_step(ctx: StepContext, config: GameConfig, rngs, record=False):
    """One planning step: a fresh game among the assigned cameras.

    Unassigned cameras hold position. ``rngs[c]`` is camera ``c``'s stream.
    """
    n_c = len(ctx.cam_xy)
    players = [c for c in range(n_c) if ctx.assignment[c] >= 0]
    profile = [hold_action(ctx.cam_heading[c]) for c in range(n_c)]
    if not players:
        return (profile, None) if record else profile

    sets = [build_action_set(config.n_speeds, config.n_headings, ctx.cam_heading[c],
                             config.s_min, config.s_max, config.phi_max) for c in players]

    def table(k):
        c = players[k]
        return own_utility_table(c, sets[k].speeds, sets[k].headings, ctx)

    if config.workers > 1:
        with ThreadPoolExecutor(config.workers) as pool:
            tables = list(pool.map(table, range(len(players))))
    else:
        tables = [table(k) for k in range(len(players))]
    own = [t[0] for t in tables]
    cand = [t[1] for t in tables]
    w = ctx.weights
    # Camera-pair safety terms only depend on the two chosen actions, so they
    # are tabulated once per step; pairs that cannot get within d_safe are skipped.
    reach = 2 * config.s_max * ctx.dt + w.d_safe
    xy = np.asarray(ctx.cam_xy, dtype=float)
    pair = {}
    for k, c in enumerate(players):
        for i in range(k + 1, len(players)):
            if np.linalg.norm(xy[c] - xy[players[i]]) < reach:
                d = np.linalg.norm(cand[k][:, None, :] - cand[i][None, :, :], axis=-1)
                pen = w.alpha3 * safety_penalty(d, w.d_safe)
                pair[k, i] = pen
                pair[i, k] = pen.T
    idle = np.array([xy[c] for c in range(n_c) if ctx.assignment[c] < 0]).reshape(-1, 2)
    fixed = [own[k] - w.alpha3 * pair_penalty(cand[k], idle, w.d_safe) for k in range(len(players))]
    partners = [[i for i in range(len(players)) if (k, i) in pair] for k in range(len(players))]

    def make_fn(k):
        def fn(frozen):
            u = fixed[k]
            for i in partners[k]:
                u = u - pair[k, i][:, frozen[i]]
            return u
        return fn

    fns = [make_fn(k) for k in range(len(players))]
    final, rec, _ = play_game(fns, [len(s) for s in sets], config.iterations, config.forgetting,
                              [rngs[c] for c in players], config.workers, config.decay_unplayed)
    for k, c in enumerate(players):
        profile[c] = sets[k].action(final[k])
    return (profile, rec) if record else profile


class NominalBelief:
    """Nominal (measurement-free) belief used to look ahead over the horizon.

    Radar and AIS are assumed to cover every nominal mean; each assigned
    camera's track is updated only if the nominal mean falls in its FOV.
    """

    def __init__(self, mean, radar_cov, ais_cov, cam_cov, F, Q, radar_xy, p_r, sigma_ais):
        self.mean = np.asarray(mean, dtype=float)
        self.radar_cov = np.asarray(radar_cov, dtype=float)
        self.ais_cov = np.asarray(ais_cov, dtype=float)
        self.cam_cov = np.asarray(cam_cov, dtype=float)
        self.F = F
        self.Q = Q
        self.radar_xy = np.asarray(radar_xy, dtype=float)
        self.p_r = p_r
        self.sigma_ais = sigma_ais
        self._cached = None

    def _predict(self, cov):
        return linalg.symmetrize(self.F @ cov @ self.F.T + self.Q)

    def _next(self):
        if self._cached is None:
            self._cached = self._compute_next()
        return self._cached

    def _compute_next(self):
        mean = self.mean @ self.F.T
        xy = mean[:, [0, 2]]
        d_r = np.linalg.norm(xy - self.radar_xy, axis=-1)
        var_r = np.maximum(d_r * self.p_r / 100.0, 1e-3) ** 2
        r_info = linalg.spd_inverse(self._predict(self.radar_cov), check=False) + isotropic_gain(var_r)
        a_info = (linalg.spd_inverse(self._predict(self.ais_cov), check=False)
                  + isotropic_gain(np.full(len(xy), self.sigma_ais**2)))
        cam_pred = self._predict(self.cam_cov)
        return mean, xy, r_info, a_info, cam_pred

    def context(self, cam_xy, cam_heading, assignment, dt, camera, weights):
        _, xy, r_info, a_info, cam_pred = self._next()
        return StepContext(
            cam_xy=np.asarray(cam_xy, dtype=float),
            cam_heading=np.asarray(cam_heading, dtype=float),
            assignment=np.asarray(assignment),
            nominal_xy=xy,
            base_info=r_info + a_info,
            cam_info=linalg.spd_inverse(cam_pred, check=False),
            dt=dt,
            camera=camera,
            weights=weights,
        )

    def advance(self, post_xy, post_heading, assignment, camera):
        mean, xy, r_info, a_info, cam_pred = self._next()
        cam_cov = cam_pred.copy()
        for c, v in enumerate(assignment):
            if v < 0:
                continue
            ok, d = in_fov_many(post_xy[c], post_heading[c], xy[v], camera)
            if ok:
                var = max(float(d) * camera.p_c / 100.0, 1e-3) ** 2
                info = linalg.spd_inverse(cam_pred[c], check=False) + isotropic_gain(var)
                cam_cov[c] = linalg.spd_inverse(info, check=False)
        return NominalBelief(mean, linalg.spd_inverse(r_info, check=False),
                             linalg.spd_inverse(a_info, check=False), cam_cov, self.F, self.Q,
                             self.radar_xy, self.p_r, self.sigma_ais)


def profile_arrays(profile, dt, cam_xy):
    speeds = np.array([a.speed for a in profile])
    headings = np.array([a.heading for a in profile])
    xy = np.asarray(cam_xy, dtype=float)
    post = np.stack([xy[:, 0] + speeds * np.cos(headings) * dt,
                     xy[:, 1] + speeds * np.sin(headings) * dt], axis=-1)
    return post, headings


def plan_horizon(belief, cam_xy, cam_heading, assignment, config, camera, weights, dt, rngs,
                 step_fn=None):
    """Plan ``config.horizon`` steps ahead; only the first profile is meant to be executed."""
    step_fn = step_fn or (lambda ctx: plan_step(ctx, config, rngs))
    profiles = []
    xy = np.asarray(cam_xy, dtype=float)
    heading = np.asarray(cam_heading, dtype=float)
    for k in range(config.horizon):
        ctx = belief.context(xy, heading, assignment, dt, camera, weights)
        profile = step_fn(ctx)
        profiles.append(profile)
        if k + 1 < config.horizon:
            xy, heading = profile_arrays(profile, dt, xy)
            belief = belief.advance(xy, heading, assignment, camera)
    return profiles
