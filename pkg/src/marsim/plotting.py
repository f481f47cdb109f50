"""Optional report figures rendered from a finished trace (matplotlib, Agg backend)."""

from pathlib import Path

import numpy as np


def _pyplot():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    return plt


def plot_mse(trace, path):
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(7, 4))
    steps = np.arange(trace.n_steps) * trace.config.dt_s
    for v in range(trace.fused_trace.shape[1]):
        ax.semilogy(steps, trace.fused_trace[:, v], lw=1, label=f"target {v}")
    ax.axhline(trace.config.eps_m2, color="k", ls="--", lw=1, label="threshold")
    ax.set_xlabel("time (s)")
    ax.set_ylabel("trace of fused covariance (m$^2$)")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def plot_paths(trace, path):
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(6, 6))
    for v in range(trace.truth.shape[1]):
        ax.plot(trace.truth[:, v, 0] / 1e3, trace.truth[:, v, 2] / 1e3, lw=1)
        seen = trace.observed[:, v]
        ax.plot(trace.truth[seen, v, 0] / 1e3, trace.truth[seen, v, 2] / 1e3, "r.", ms=3)
    for c in range(trace.cam_xy.shape[1]):
        ax.plot(trace.cam_xy[:, c, 0] / 1e3, trace.cam_xy[:, c, 1] / 1e3, "k-", lw=0.8)
    ax.plot([0], [0], "k^")
    ax.set_xlabel("x (km)")
    ax.set_ylabel("y (km)")
    ax.set_aspect("equal")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def render_report(trace, out_dir, stem):
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = [out / f"{stem}_mse.png", out / f"{stem}_paths.png"]
    plot_mse(trace, paths[0])
    plot_paths(trace, paths[1])
    return paths
