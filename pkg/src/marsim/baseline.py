"""Comparison method: largest-MSE-to-nearest-camera assignment and
centralized sequential greedy planning under the same utility."""

import numpy as np

from .allocation import UNASSIGNED
from .cost import own_utility_table, pair_penalty
from .planner import build_action_set, hold_action, plan_horizon


def assign_baseline(traces, target_xy, camera_xy):
    """Take targets in decreasing fused trace; each goes to the nearest free camera.

    Ties: lowest target index first, then lowest camera index.
    """
    traces = np.asarray(traces, dtype=float)
    target_xy = np.atleast_2d(np.asarray(target_xy, dtype=float))
    camera_xy = np.atleast_2d(np.asarray(camera_xy, dtype=float))
    n_c = camera_xy.shape[0]
    assignment = np.full(n_c, UNASSIGNED, dtype=int)
    free = np.ones(n_c, dtype=bool)
    # stable sort on the negated trace keeps the lower index first among equals
    for v in np.argsort(-traces, kind="stable"):
        if not free.any():
            break
        d = np.linalg.norm(camera_xy - target_xy[v], axis=-1)
        d[~free] = np.inf
        c = int(np.argmin(d))
        assignment[c] = int(v)
        free[c] = False
    return assignment


def plan_baseline_step(ctx, config):
    """Cameras choose in index order; each best-responds to the cameras already planned.

    Cameras not yet planned are taken at their current positions.
    """
    n_c = len(ctx.cam_xy)
    profile = [hold_action(ctx.cam_heading[c]) for c in range(n_c)]
    placed = np.array(ctx.cam_xy, dtype=float)
    for c in range(n_c):
        if ctx.assignment[c] < 0:
            continue
        aset = build_action_set(config.n_speeds, config.n_headings, ctx.cam_heading[c],
                                config.s_min, config.s_max, config.phi_max)
        own, cand = own_utility_table(c, aset.speeds, aset.headings, ctx)
        others = np.delete(placed, c, axis=0)
        u = own - ctx.weights.alpha3 * pair_penalty(cand, others, ctx.weights.d_safe)
        k = int(np.argmax(u))
        profile[c] = aset.action(k)
        placed[c] = cand[k]
    return profile


def plan_baseline(belief, cam_xy, cam_heading, assignment, config, camera, weights, dt):
    """Sequential greedy profiles over the horizon; no random streams are consumed."""
    return plan_horizon(belief, cam_xy, cam_heading, assignment, config, camera, weights, dt,
                        rngs=None, step_fn=lambda ctx: plan_baseline_step(ctx, config))
