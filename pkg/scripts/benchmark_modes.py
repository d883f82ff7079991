#!/usr/bin/env python3
"""Benchmark sequential vs parallel per-measure processing.

Builds a 48-measure synthetic workload, adds a simulated per-measure
detector latency (standing in for model inference), and times the run
at several worker counts. Output is a small table of wall times and
speedup ratios against the sequential baseline.

    python3 scripts/benchmark_modes.py --delay-ms 50 --workers 2 4 8
"""

import argparse
import pathlib
import sys
import tempfile
import time

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parents[1] / "src"))

from omr_assembly import synthetic  # noqa: E402
from omr_assembly.pipeline import PipelineConfig, run  # noqa: E402


def build_workload(root, n_measures):
    whole = synthetic.note("bd4", 0, 0.5)
    rest = [synthetic.symbol("rest", "re0", 0.5, position=1)]
    per_staff = n_measures // 2
    return synthetic.build_score(
        root, [list(whole) for _ in range(per_staff)],
        [list(rest) for _ in range(per_staff)])


def timed_run(image_path, det_dir, mode, workers, delay_ms):
    config = PipelineConfig(
        image_path=image_path, detections_dir=det_dir, output_path=None,
        mode=mode, workers=workers, simulated_detection_delay_ms=delay_ms)
    t0 = time.perf_counter()
    text, _ = run(config)
    return text, time.perf_counter() - t0


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--measures", type=int, default=48)
    parser.add_argument("--delay-ms", type=float, default=50.0)
    parser.add_argument("--workers", type=int, nargs="+", default=[2, 4, 8])
    args = parser.parse_args()

    with tempfile.TemporaryDirectory() as tmp:
        image_path, det_dir = build_workload(tmp, args.measures)
        baseline_text, baseline_s = timed_run(
            image_path, det_dir, "sequential", 1, args.delay_ms)
        print(f"{args.measures} measures, "
              f"{args.delay_ms:.0f} ms simulated detection each")
        print(f"{'mode':<14}{'wall (s)':>10}{'vs sequential':>15}")
        print(f"{'sequential':<14}{baseline_s:>10.2f}{'1.00':>15}")
        for workers in args.workers:
            text, seconds = timed_run(
                image_path, det_dir, "parallel", workers, args.delay_ms)
            match = "" if text == baseline_text else "  OUTPUT DIFFERS"
            print(f"{f'parallel({workers})':<14}{seconds:>10.2f}"
                  f"{seconds / baseline_s:>15.2f}{match}")


if __name__ == "__main__":
    main()
