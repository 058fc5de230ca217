#!/usr/bin/env python3
"""Run the resolution ladder and report how runtime scales with pixel count."""

import argparse

from rorecover.benchmark import (
    DEFAULT_LADDER,
    fit_scaling,
    fit_summary_line,
    run_benchmark,
    write_benchmark_csv,
)
from rorecover.pipeline import PipelineConfig


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--trials", type=int, default=5)
    parser.add_argument("--omega", type=float, default=0.8)
    parser.add_argument("--out", default="benchmark_report.csv")
    args = parser.parse_args()

    cfg = PipelineConfig(omega=args.omega)
    run = run_benchmark(DEFAULT_LADDER, trials=args.trials, cfg=cfg)
    for record in run.records:
        per_px = record.median_seconds / record.pixels * 1e6
        print(
            f"{record.label:>6}: {record.pixels:>9} px  "
            f"median {record.median_seconds:.4f}s  min {record.min_seconds:.4f}s  "
            f"({per_px:.3f} us/px)"
        )
    fit = fit_scaling(run.records) if len(run.records) >= 3 else None
    write_benchmark_csv(args.out, run, fit)
    print(fit_summary_line(run, fit))
    print(f"report written to {args.out}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
