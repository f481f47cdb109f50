"""Command-line batch runner: config file in, CSV traces and a JSON summary out."""

import argparse
import logging
from pathlib import Path
import statistics
import sys

from .config import ScenarioConfig, emit, parse_config, to_dict
from .export import export_trace, run_summary, write_json
from .harness import PLANNERS, run_episode

log = logging.getLogger("marsim")

EXIT_OK, EXIT_RUN_FAILED, EXIT_CONFIG = 0, 1, 2


def parse_seeds(text):
    """``"0,3,7"``, ``"0-4"`` or a mix of both."""
    seeds = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        if "-" in part[1:]:
            lo, hi = part.split("-", 1)
            seeds.extend(range(int(lo), int(hi) + 1))
        else:
            seeds.append(int(part))
    if not seeds:
        raise ValueError("empty seed list")
    return seeds


def build_parser():
    p = argparse.ArgumentParser(prog="marsim", description=__doc__)
    p.add_argument("config", nargs="?", help="YAML scenario file (omitted fields take defaults)")
    p.add_argument("--planner", choices=(*PLANNERS, "both"), default="both")
    p.add_argument("--seeds", default=None, help="e.g. 0-4 or 1,5,9 (default: the config seed)")
    p.add_argument("--mode", choices=("first", "continuous"), default=None)
    p.add_argument("--out", default="runs", help="output directory")
    p.add_argument("--max-steps", type=int, default=None)
    p.add_argument("--figures", action="store_true", help="also render PNG report figures")
    p.add_argument("--print-config", action="store_true", help="print the resolved config and exit")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def _fmt_duration(d):
    return "-" if d is None else f"{d:,.0f}"


def summary_table(results, config):
    """Table of median duration and mean execution time per planner; '-' when no run solved."""
    lines = [f"|C|={config.n_cameras} |V|={config.n_targets} H={config.horizon}",
             f"{'planner':<10}{'seed':>6}{'duration (s)':>15}{'exec time (s)':>15}"]
    for r in results:
        if "error" in r:
            lines.append(f"{r['planner']:<10}{r['seed']:>6}{'error':>15}{'':>15}")
            continue
        lines.append(f"{r['planner']:<10}{r['seed']:>6}{_fmt_duration(r['duration_s']):>15}"
                     f"{r['plan_time_total_s']:>15.2f}")
    for planner in PLANNERS:
        runs = [r for r in results if r["planner"] == planner and "error" not in r]
        if not runs:
            continue
        med = median_duration([r["duration_s"] for r in runs])
        t = statistics.fmean(r["plan_time_total_s"] for r in runs)
        lines.append(f"{planner:<10}{'median':>6}{_fmt_duration(med):>15}{t:>15.2f}")
    return "\n".join(lines)


def median_duration(durations):
    """Median with unsolved runs counted as longer than any solved one; ``None`` if that lands on one."""
    key = sorted(durations, key=lambda d: (d is None, d or 0.0))
    n = len(key)
    if n == 0:
        return None
    mid = key[(n - 1) // 2], key[n // 2]
    if any(m is None for m in mid):
        return None
    return 0.5 * (mid[0] + mid[1])


def run_batch(config, planners, seeds, out_dir, figures=False):
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "config.yaml").write_text(emit(config))
    results, failed = [], False
    for seed in seeds:
        for planner in planners:
            cfg = config.with_(seed=seed)
            stem = f"{planner}_seed{seed}"
            log.info("running %s", stem)
            try:
                trace = run_episode(cfg, planner)
                export_trace(trace, out, stem)
                if figures:
                    from .plotting import render_report

                    render_report(trace, out / "figures", stem)
                summary = run_summary(trace)
                summary.pop("config")
                results.append(summary)
            except Exception as exc:  # keep the batch going, report at the end
                log.exception("run %s failed", stem)
                results.append({"planner": planner, "seed": seed, "error": repr(exc)})
                failed = True
    write_json(out / "summary.json", {"config": to_dict(config), "runs": results})
    print(summary_table(results, config))
    return EXIT_RUN_FAILED if failed else EXIT_OK


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        config = parse_config(args.config) if args.config else ScenarioConfig()
        if args.mode:
            config = config.with_(mode=args.mode)
        if args.max_steps is not None:
            config = config.with_(max_steps=args.max_steps)
        seeds = parse_seeds(args.seeds) if args.seeds else [config.seed]
    except ValueError as exc:  # ConfigError included
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if args.print_config:
        print(emit(config), end="")
        return EXIT_OK
    planners = list(PLANNERS) if args.planner == "both" else [args.planner]
    return run_batch(config, planners, seeds, args.out, figures=args.figures)


if __name__ == "__main__":
    sys.exit(main())
