"""Command-line front end: batch scene recovery, prior validation, benchmarking.

Exit codes: 0 full success, 1 partial or data failure, 2 usage error.
The RO_RECOVER_THREADS environment variable caps file-level parallelism
(0 or unset picks one worker per CPU); per-image results never depend on
the worker count.
"""

from __future__ import annotations

import argparse
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from .benchmark import (
    DEFAULT_LADDER,
    fit_scaling,
    fit_summary_line,
    run_benchmark,
    thread_cap,
    write_benchmark_csv,
)
from .image import ImageRGB, load_image, save_image
from .pipeline import PipelineConfig, RecoveryResult, recover
from .validation import summary_line, validate_dataset, write_validation_csv

EXIT_OK = 0
EXIT_PARTIAL = 1
EXIT_USAGE = 2

SUPPORTED_SUFFIXES = {".ppm", ".png", ".jpg", ".jpeg"}

_DEFAULTS = {
    "omega": 0.8,
    "t0": 0.001,
    "smooth_factor": 8,
    "smooth_sigma": 2.0,
    "ambient_fraction": 0.001,
    "threshold": 0.90,
    "trials": 5,
}
_CONFIG_TYPES = {
    "omega": float,
    "t0": float,
    "smooth_factor": int,
    "smooth_sigma": float,
    "ambient_fraction": float,
    "threshold": float,
    "trials": int,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ro-recover",
        description="Scene recovery for hazy, sandstorm and underwater images "
        "using a rank-one transmission prior.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--omega", type=float, help="relaxation factor in (0,1]")
    common.add_argument("--t0", type=float, help="denominator floor in (0,1)")
    common.add_argument("--smooth-factor", type=int, help="downsample divisor >= 1")
    common.add_argument("--smooth-sigma", type=float, help="Gaussian sigma at small scale")
    common.add_argument("--ambient-fraction", type=float, help="top-norm pixel fraction in (0,1]")
    common.add_argument("--config", metavar="FILE", help="key=value config file")

    p_recover = sub.add_parser("recover", parents=[common], help="recover images or directories")
    p_recover.add_argument("inputs", nargs="+", help="image files or directories")
    p_recover.add_argument("-o", "--output", required=True, help="output file or directory")
    p_recover.add_argument(
        "--emit-transmission",
        action="store_true",
        help="write the smoothed transmission as a per-channel grayscale PPM triple",
    )
    p_recover.add_argument("--report", metavar="PATH", help="also write per-image log lines here")

    p_validate = sub.add_parser(
        "validate", parents=[common], help="rank-one prior validation on hazy/clean pairs"
    )
    p_validate.add_argument("input", help="directory of <id>_hazy.<ext> / <id>_GT.<ext> pairs")
    p_validate.add_argument("--threshold", type=float, help="energy-ratio pass threshold")
    p_validate.add_argument(
        "--report", metavar="PATH", default="validation_report.csv", help="CSV report path"
    )

    p_bench = sub.add_parser("bench", parents=[common], help="runtime scaling benchmark")
    p_bench.add_argument("--trials", type=int, help="timed runs per resolution (>= 3)")
    p_bench.add_argument(
        "--resolutions",
        help="comma-separated ladder entries: 360p,480p,720p,1080p,2k,4k or WxH",
    )
    p_bench.add_argument(
        "--report", metavar="PATH", default="benchmark_report.csv", help="CSV report path"
    )
    return parser


def _read_config_file(path: str) -> dict:
    settings = {}
    for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{lineno}: expected key=value, got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in _CONFIG_TYPES:
            raise ValueError(f"{path}:{lineno}: unknown key {key!r}")
        try:
            settings[key] = _CONFIG_TYPES[key](value)
        except ValueError as exc:
            raise ValueError(f"{path}:{lineno}: bad value for {key}: {exc}") from exc
    return settings


def _effective_settings(args) -> tuple[PipelineConfig, float, int]:
    """Defaults < config file < command-line flags, validated up front."""
    settings = dict(_DEFAULTS)
    if getattr(args, "config", None):
        settings.update(_read_config_file(args.config))
    for key in _DEFAULTS:
        flag = getattr(args, key, None)
        if flag is not None:
            settings[key] = flag
    cfg = PipelineConfig(
        omega=settings["omega"],
        t_floor=settings["t0"],
        smooth_factor=settings["smooth_factor"],
        smooth_sigma=settings["smooth_sigma"],
        ambient_fraction=settings["ambient_fraction"],
    )
    threshold = float(settings["threshold"])
    if not (0.0 < threshold <= 1.0):
        raise ValueError(f"threshold must be in (0, 1], got {threshold}")
    trials = int(settings["trials"])
    if trials < 3:
        raise ValueError(f"trials must be >= 3, got {trials}")
    return cfg, threshold, trials


# ---------------------------------------------------------------------------
# recover
# ---------------------------------------------------------------------------


def _collect_inputs(raw_inputs) -> tuple[list[tuple[Path, Path | None]], list[str]]:
    """Expand files and directories into (source, directory-relative) pairs."""
    files: list[tuple[Path, Path | None]] = []
    missing: list[str] = []
    for raw in raw_inputs:
        path = Path(raw)
        if path.is_dir():
            found = sorted(
                p
                for p in path.rglob("*")
                if p.is_file() and p.suffix.lower() in SUPPORTED_SUFFIXES
            )
            files.extend((p, p.relative_to(path)) for p in found)
        elif path.is_file():
            files.append((path, None))
        else:
            missing.append(raw)
    return files, missing


def _output_path(out_root: Path, src: Path, rel: Path | None, as_directory: bool) -> Path:
    suffix = src.suffix.lower()
    mapped = ".png" if suffix in (".jpg", ".jpeg") else suffix  # no lossy re-encodes
    if not as_directory:
        return out_root
    target = out_root / (rel if rel is not None else Path(src.name))
    return target.with_suffix(mapped)


def _transmission_triple(result: RecoveryResult, dst: Path) -> list[Path]:
    paths = []
    for idx, channel in enumerate("RGB"):
        plane = result.transmission.data[..., idx]
        gray = ImageRGB(np.repeat(plane[..., None], 3, axis=2))
        out = dst.with_name(f"{dst.stem}.t{channel}.ppm")
        save_image(gray, out)
        paths.append(out)
    return paths


def _log_line(src: Path, dst: Path, result: RecoveryResult, cfg: PipelineConfig) -> str:
    s = result.unified_spectrum
    a = result.ambient
    return (
        f"# {src} -> {dst} "
        f"S_nu=({s.r:.6f},{s.g:.6f},{s.b:.6f}) A=({a.r:.6f},{a.g:.6f},{a.b:.6f}) "
        f"omega={cfg.omega} t0={cfg.t_floor} smooth_factor={cfg.smooth_factor} "
        f"smooth_sigma={cfg.smooth_sigma} ambient_fraction={cfg.ambient_fraction}"
    )


def cmd_recover(args, cfg: PipelineConfig) -> int:
    files, missing = _collect_inputs(args.inputs)
    out_root = Path(args.output)
    as_directory = (
        len(files) > 1
        or any(rel is not None for _, rel in files)
        or out_root.is_dir()
        or len(args.inputs) > 1
        or Path(args.inputs[0]).is_dir()
        or args.output.endswith(("/", os.sep))
    )
    failures = len(missing)
    for raw in missing:
        print(f"error: {raw}: no such file or directory", file=sys.stderr)
    if not files:
        print("error: no input images found", file=sys.stderr)
        return EXIT_PARTIAL

    jobs = []
    taken: dict[Path, Path] = {}
    for src, rel in files:
        dst = _output_path(out_root, src, rel, as_directory)
        if dst in taken:
            failures += 1
            print(f"error: {src}: output {dst} collides with {taken[dst]}", file=sys.stderr)
            continue
        taken[dst] = src
        jobs.append((src, dst))

    def job(entry):
        src, dst = entry
        img = load_image(src)
        result = recover(img, cfg)
        dst.parent.mkdir(parents=True, exist_ok=True)
        save_image(result.recovered, dst)
        if args.emit_transmission:
            _transmission_triple(result, dst)
        return result

    log_lines = []
    with ThreadPoolExecutor(max_workers=min(thread_cap(), max(len(jobs), 1))) as pool:
        futures = [pool.submit(job, entry) for entry in jobs]
        for (src, dst), future in zip(jobs, futures):
            try:
                result = future.result()
            except Exception as exc:
                failures += 1
                print(f"error: {src}: {exc}", file=sys.stderr)
                continue
            line = _log_line(src, dst, result, cfg)
            log_lines.append(line)
            print(line)
    if args.report:
        try:
            Path(args.report).write_text("\n".join(log_lines) + "\n", encoding="utf-8")
        except OSError as exc:
            print(f"error: cannot write report: {exc}", file=sys.stderr)
            failures += 1
    return EXIT_PARTIAL if failures else EXIT_OK


# ---------------------------------------------------------------------------
# validate
# ---------------------------------------------------------------------------


def _discover_pairs(directory: Path) -> tuple[list[tuple[Path, Path]], list[Path]]:
    hazy: dict[str, Path] = {}
    clean: dict[str, Path] = {}
    oddballs: list[Path] = []
    for path in sorted(directory.iterdir()):
        if not path.is_file() or path.suffix.lower() not in SUPPORTED_SUFFIXES:
            continue
        stem = path.stem
        if stem.endswith("_hazy"):
            hazy[stem[: -len("_hazy")]] = path
        elif stem.endswith("_GT"):
            clean[stem[: -len("_GT")]] = path
        else:
            oddballs.append(path)
    paired_ids = sorted(set(hazy) & set(clean))
    pairs = [(hazy[i], clean[i]) for i in paired_ids]
    unpaired = oddballs
    unpaired += [hazy[i] for i in sorted(set(hazy) - set(clean))]
    unpaired += [clean[i] for i in sorted(set(clean) - set(hazy))]
    return pairs, sorted(unpaired)


def cmd_validate(args, cfg: PipelineConfig, threshold: float) -> int:
    directory = Path(args.input)
    if not directory.is_dir():
        print(f"error: {directory}: not a directory", file=sys.stderr)
        return EXIT_USAGE
    pairs, unpaired = _discover_pairs(directory)
    for path in unpaired:
        print(f"warning: {path}: no matching pair, skipped", file=sys.stderr)
    if not pairs:
        print(f"error: {directory}: no hazy/GT pairs found", file=sys.stderr)
        return EXIT_PARTIAL
    outcome = validate_dataset(pairs, cfg, threshold, workers=thread_cap())
    try:
        write_validation_csv(args.report, outcome)
    except OSError as exc:
        print(f"error: cannot write report: {exc}", file=sys.stderr)
        return EXIT_PARTIAL
    print(summary_line("case1", outcome.case1))
    print(summary_line("case2", outcome.case2))
    return EXIT_OK if outcome.case1.pass_fraction >= threshold else EXIT_PARTIAL


# ---------------------------------------------------------------------------
# bench
# ---------------------------------------------------------------------------


def _parse_resolutions(text: str | None):
    if text is None:
        return DEFAULT_LADDER
    known = {label: (label, w, h) for label, w, h in DEFAULT_LADDER}
    ladder = []
    for token in text.split(","):
        token = token.strip()
        if not token:
            continue
        if token in known:
            ladder.append(known[token])
        elif "x" in token:
            w_text, _, h_text = token.partition("x")
            try:
                width, height = int(w_text), int(h_text)
            except ValueError:
                raise ValueError(f"bad resolution {token!r} (expected WxH or a ladder label)")
            if width < 1 or height < 1:
                raise ValueError(f"bad resolution {token!r}: dimensions must be >= 1")
            ladder.append((token, width, height))
        else:
            raise ValueError(f"unknown resolution label {token!r}")
    if not ladder:
        raise ValueError("empty resolution list")
    return tuple(ladder)


def cmd_bench(args, cfg: PipelineConfig, trials: int) -> int:
    resolutions = _parse_resolutions(args.resolutions)
    run = run_benchmark(resolutions, trials, cfg)
    fit = None
    if len({r.pixels for r in run.records}) >= 3:
        fit = fit_scaling(run.records)
    try:
        write_benchmark_csv(args.report, run, fit)
    except OSError as exc:
        print(f"error: cannot write report: {exc}", file=sys.stderr)
        return EXIT_PARTIAL
    for failure in run.failures:
        print(f"warning: {failure.label}: {failure.message}", file=sys.stderr)
    print(fit_summary_line(run, fit))
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg, threshold, trials = _effective_settings(args)
        if args.command == "bench":
            _parse_resolutions(args.resolutions)
    except (ValueError, OSError) as exc:
        parser.error(str(exc))  # exits with status 2
    if args.command == "recover":
        return cmd_recover(args, cfg)
    if args.command == "validate":
        return cmd_validate(args, cfg, threshold)
    return cmd_bench(args, cfg, trials)


if __name__ == "__main__":
    sys.exit(main())
