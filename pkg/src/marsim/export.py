"""Plot-ready CSV traces and the JSON run summary."""

import csv
import json
import math
from pathlib import Path

from .config import to_dict
from .harness import collect_metrics

TARGET_COLUMNS = ["step", "target_id", "true_x", "true_y", "est_x", "est_y", "fused_trace", "observed"]
CAMERA_COLUMNS = ["step", "camera_id", "x", "y", "heading", "speed", "assigned_target"]


def _num(x):
    # repr gives the shortest round-tripping text, so reruns write identical bytes
    return repr(float(x))


def target_rows(trace):
    for t in range(trace.n_steps):
        for v in range(trace.truth.shape[1]):
            yield [t, v, _num(trace.truth[t, v, 0]), _num(trace.truth[t, v, 2]),
                   _num(trace.est[t, v, 0]), _num(trace.est[t, v, 1]),
                   _num(trace.fused_trace[t, v]), int(trace.observed[t, v])]


def camera_rows(trace):
    for t in range(trace.n_steps):
        for c in range(trace.cam_xy.shape[1]):
            yield [t, c, _num(trace.cam_xy[t, c, 0]), _num(trace.cam_xy[t, c, 1]),
                   _num(trace.cam_heading[t, c]), _num(trace.cam_speed[t, c]),
                   int(trace.assignment[t, c])]


def _write_csv(path, header, rows):
    with open(path, "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def run_summary(trace):
    """Metrics of one run plus the config echo; wall times are the only non-deterministic fields."""
    m = collect_metrics(trace)
    m.pop("mse_final", None)
    m["config"] = to_dict(trace.config)
    return m


def export_trace(trace, out_dir, stem=None):
    """Write ``<stem>.csv`` (targets), ``<stem>_cameras.csv`` and ``<stem>.json``.

    Returns the written paths.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    stem = stem or f"{trace.planner}_seed{trace.config.seed}"
    paths = {
        "targets": out / f"{stem}.csv",
        "cameras": out / f"{stem}_cameras.csv",
        "summary": out / f"{stem}.json",
    }
    _write_csv(paths["targets"], TARGET_COLUMNS, target_rows(trace))
    _write_csv(paths["cameras"], CAMERA_COLUMNS, camera_rows(trace))
    write_json(paths["summary"], run_summary(trace))
    return paths


def _clean(obj):
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    return obj


def write_json(path, data):
    Path(path).write_text(json.dumps(_clean(data), indent=2) + "\n")
