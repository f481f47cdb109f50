"""Greedy camera-to-target allocation by staleness over distance."""

import numpy as np

D_FLOOR = 1.0
UNASSIGNED = -1


def compute_beta(clock, d):
    return clock / max(d, D_FLOOR)


def build_matrix(camera_xy, target_xy, clocks):
    """``M[c, v] = clock[v] / distance(camera c, nominal position of v)``."""
    camera_xy = np.atleast_2d(np.asarray(camera_xy, dtype=float))
    target_xy = np.atleast_2d(np.asarray(target_xy, dtype=float))
    clocks = np.asarray(clocks, dtype=float)
    if camera_xy.shape[0] < 1 or target_xy.shape[0] < 1:
        raise ValueError("need at least one camera and one target")
    d = np.linalg.norm(camera_xy[:, None, :] - target_xy[None, :, :], axis=-1)
    return clocks[None, :] / np.maximum(d, D_FLOOR)


def greedy_by_key(M):
    """Repeatedly take the largest remaining entry, retiring its row and column.

    Ties go to the lowest camera index, then the lowest target index.
    Returns ``assignment[c] = v`` with ``-1`` for cameras left without a target.
    """
    M = np.array(M, dtype=float)
    n_c, n_v = M.shape
    assignment = np.full(n_c, UNASSIGNED, dtype=int)
    for _ in range(min(n_c, n_v)):
        # argmax on the flattened row-major array already gives the tie order we want
        flat = int(np.argmax(M))
        c, v = divmod(flat, n_v)
        assignment[c] = v
        M[c, :] = -np.inf
        M[:, v] = -np.inf
    return assignment


def greedy_allocate(M):
    return greedy_by_key(M)


def assignment_matrix(assignment, n_targets):
    """0/1 indicator matrix ``x[c, v]`` for an assignment vector."""
    x = np.zeros((len(assignment), n_targets), dtype=int)
    for c, v in enumerate(assignment):
        if v >= 0:
            x[c, v] = 1
    return x


def is_valid_assignment(assignment, n_targets):
    x = assignment_matrix(assignment, n_targets)
    if np.any(x.sum(axis=0) > 1):
        return False
    if n_targets >= len(assignment):
        return bool(np.all(x.sum(axis=1) == 1))
    return int(x.sum()) == n_targets


def tick_clocks(clocks, observed):
    clocks = np.asarray(clocks, dtype=int)
    observed = np.asarray(observed, dtype=bool)
    return np.where(observed, 0, clocks + 1)
