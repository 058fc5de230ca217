"""Runtime-scaling harness for the recovery pipeline.

Times end-to-end recovery across a ladder of standard resolutions and fits
median wall-clock time against pixel count. A near-linear fit (high r^2) is
the reproducible form of the O(N) complexity claim; absolute seconds are
hardware-bound and deliberately not asserted anywhere.
"""

from __future__ import annotations

import os
import statistics
import time
from dataclasses import dataclass

import numpy as np

from .image import ImageRGB
from .pipeline import PipelineConfig, recover

__all__ = [
    "DEFAULT_LADDER",
    "BenchRecord",
    "BenchFailure",
    "BenchmarkRun",
    "ScalingFit",
    "thread_cap",
    "generate_test_image",
    "run_benchmark",
    "fit_scaling",
    "write_benchmark_csv",
]

# Common interpretations of the named video formats.
DEFAULT_LADDER: tuple[tuple[str, int, int], ...] = (
    ("360p", 640, 360),
    ("480p", 854, 480),
    ("720p", 1280, 720),
    ("1080p", 1920, 1080),
    ("2k", 2560, 1440),
    ("4k", 3840, 2160),
)


def thread_cap() -> int:
    """Worker cap from RO_RECOVER_THREADS (0 or unset = one per CPU)."""
    raw = os.environ.get("RO_RECOVER_THREADS", "0").strip()
    try:
        n = int(raw)
    except ValueError:
        n = 0
    if n < 0:
        n = 0
    return n if n > 0 else (os.cpu_count() or 1)


@dataclass(frozen=True)
class BenchRecord:
    label: str
    width: int
    height: int
    trials: int
    median_seconds: float
    min_seconds: float

    def __post_init__(self) -> None:
        if self.trials < 3:
            raise ValueError(f"need at least 3 trials, got {self.trials}")
        if self.min_seconds > self.median_seconds:
            raise ValueError("min_seconds cannot exceed median_seconds")

    @property
    def pixels(self) -> int:
        return self.width * self.height


@dataclass(frozen=True)
class BenchFailure:
    label: str
    width: int
    height: int
    message: str


@dataclass(frozen=True)
class BenchmarkRun:
    records: tuple[BenchRecord, ...]
    failures: tuple[BenchFailure, ...]
    trials: int
    thread_count: int
    config: PipelineConfig


@dataclass(frozen=True)
class ScalingFit:
    slope: float  # seconds per pixel
    intercept: float  # seconds
    r_squared: float


def generate_test_image(width: int, height: int, seed: int) -> ImageRGB:
    """Deterministic pseudo-random benchmark image.

    Samples are uniform in [0, 1) from numpy's PCG64 stream seeded with
    `seed`, so the same (width, height, seed) triple reproduces the exact
    image on any platform.
    """
    if width < 1 or height < 1:
        raise ValueError("dimensions must be >= 1")
    rng = np.random.Generator(np.random.PCG64(seed))
    return ImageRGB(rng.random((height, width, 3)))


def run_benchmark(
    resolutions=DEFAULT_LADDER,
    trials: int = 5,
    cfg: PipelineConfig = PipelineConfig(),
    seed: int = 0,
) -> BenchmarkRun:
    """Time `recover` per resolution: one untimed warm-up, then `trials` runs.

    Image generation happens outside the timed region and no disk I/O is
    involved. Resolutions run sequentially to avoid cross-contamination; an
    allocation failure skips that resolution instead of aborting the run.
    """
    if trials < 3:
        raise ValueError(f"need at least 3 trials, got {trials}")
    records: list[BenchRecord] = []
    failures: list[BenchFailure] = []
    for label, width, height in resolutions:
        try:
            img = generate_test_image(width, height, seed)
            recover(img, cfg)  # warm-up
            times = []
            for _ in range(trials):
                start = time.perf_counter()
                recover(img, cfg)
                times.append(time.perf_counter() - start)
        except MemoryError as exc:
            failures.append(BenchFailure(label, width, height, f"allocation failure: {exc}"))
            continue
        records.append(
            BenchRecord(
                label=label,
                width=width,
                height=height,
                trials=trials,
                median_seconds=statistics.median(times),
                min_seconds=min(times),
            )
        )
    return BenchmarkRun(
        records=tuple(records),
        failures=tuple(failures),
        trials=trials,
        thread_count=thread_cap(),
        config=cfg,
    )


def fit_scaling(records) -> ScalingFit:
    """Ordinary least squares of median runtime against pixel count."""
    records = list(records)
    pixel_counts = [r.pixels for r in records]
    if len(set(pixel_counts)) < 3:
        raise ValueError("need at least 3 records with distinct pixel counts")
    x = np.array(pixel_counts, dtype=np.float64)
    y = np.array([r.median_seconds for r in records], dtype=np.float64)
    x_mean, y_mean = x.mean(), y.mean()
    sxx = float(np.sum((x - x_mean) ** 2))
    sxy = float(np.sum((x - x_mean) * (y - y_mean)))
    slope = sxy / sxx
    intercept = y_mean - slope * x_mean
    ss_res = float(np.sum((y - slope * x - intercept) ** 2))
    ss_tot = float(np.sum((y - y_mean) ** 2))
    r_squared = 1.0 if ss_tot == 0.0 else 1.0 - ss_res / ss_tot
    return ScalingFit(slope=slope, intercept=intercept, r_squared=min(max(r_squared, 0.0), 1.0))


# ---------------------------------------------------------------------------
# CSV report
# ---------------------------------------------------------------------------

CSV_HEADER = "label,width,height,pixels,trials,median_s,min_s"


def _config_text(cfg: PipelineConfig) -> str:
    return (
        f"omega={cfg.omega} t0={cfg.t_floor} smooth_factor={cfg.smooth_factor} "
        f"smooth_sigma={cfg.smooth_sigma} ambient_fraction={cfg.ambient_fraction}"
    )


def fit_summary_line(run: BenchmarkRun, fit: ScalingFit | None) -> str:
    if fit is None:
        fit_text = "fit=n/a (need >=3 distinct sizes)"
    else:
        fit_text = (
            f"slope_s_per_px={fit.slope:.6e} intercept_s={fit.intercept:.6f} "
            f"r_squared={fit.r_squared:.6f}"
        )
    return f"# {fit_text} threads={run.thread_count} {_config_text(run.config)}"


def write_benchmark_csv(path, run: BenchmarkRun, fit: ScalingFit | None) -> None:
    lines = [CSV_HEADER]
    for r in run.records:
        lines.append(
            f"{r.label},{r.width},{r.height},{r.pixels},{r.trials},"
            f"{r.median_seconds:.9f},{r.min_seconds:.9f}"
        )
    for f in run.failures:
        # Empty timing cells mark a resolution that could not be allocated.
        lines.append(f"{f.label},{f.width},{f.height},{f.width * f.height},{run.trials},,")
    lines.append(fit_summary_line(run, fit))
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")
