"""Scene recovery toolkit built on the rank-one transmission prior."""

from .benchmark import (
    BenchFailure,
    BenchmarkRun,
    BenchRecord,
    DEFAULT_LADDER,
    ScalingFit,
    fit_scaling,
    generate_test_image,
    run_benchmark,
)
from .image import (
    ImageFormatError,
    ImageRGB,
    Spectrum,
    TransmissionField,
    gaussian_blur,
    load_image,
    psnr,
    resize_bilinear,
    save_image,
)
from .pipeline import (
    DegenerateImageError,
    PipelineConfig,
    RecoveryResult,
    compute_unified_radiance,
    estimate_ambient_light,
    normalize_spectrum,
    project_transmission,
    recover,
    recover_scene,
    smooth_transmission,
)
from .validation import (
    DatasetSummary,
    EnergyReport,
    ValidationOutcome,
    rank_one_energy,
    transmission_from_pair,
    validate_dataset,
)

__version__ = "0.1.0"

__all__ = [
    "BenchFailure",
    "BenchmarkRun",
    "BenchRecord",
    "DEFAULT_LADDER",
    "DatasetSummary",
    "DegenerateImageError",
    "EnergyReport",
    "ImageFormatError",
    "ImageRGB",
    "PipelineConfig",
    "RecoveryResult",
    "ScalingFit",
    "Spectrum",
    "TransmissionField",
    "ValidationOutcome",
    "compute_unified_radiance",
    "estimate_ambient_light",
    "fit_scaling",
    "gaussian_blur",
    "generate_test_image",
    "load_image",
    "normalize_spectrum",
    "project_transmission",
    "psnr",
    "rank_one_energy",
    "recover",
    "recover_scene",
    "resize_bilinear",
    "run_benchmark",
    "save_image",
    "smooth_transmission",
    "transmission_from_pair",
    "validate_dataset",
]
