"""Five-step scene recovery driven by the rank-one transmission prior.

Given a degraded observation I, the pipeline estimates a single unified
spectrum from the channel means, projects every pixel onto it to get the
scattered-light transmission field, smooths that field, picks the ambient
light from the strongest-transmission pixels, and inverts the scattering
image-formation model I = (1 - t~) J + t~ A. Every step is a fixed number
of passes over the pixels, so the whole recovery runs in O(N).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .image import ImageRGB, Spectrum, TransmissionField, gaussian_blur_array, resize_bilinear_array

__all__ = [
    "PipelineConfig",
    "RecoveryResult",
    "DegenerateImageError",
    "compute_unified_radiance",
    "normalize_spectrum",
    "project_transmission",
    "smooth_transmission",
    "estimate_ambient_light",
    "apply_recovery",
    "recover_scene",
    "recover",
]


class DegenerateImageError(ValueError):
    """Raised when an input has no usable radiance (e.g. an all-black image)."""


@dataclass(frozen=True)
class PipelineConfig:
    """Every tunable of the recovery pipeline.

    omega: relaxation factor on the transmission term, in (0, 1].
    t_floor: lower bound of the recovery denominator, keeps division stable.
    smooth_factor: integer downsample divisor used to smooth the field.
    smooth_sigma: Gaussian sigma applied at the downsampled scale.
    ambient_fraction: fraction of pixels used for the ambient-light mean.
    """

    omega: float = 0.8
    t_floor: float = 0.001
    smooth_factor: int = 8
    smooth_sigma: float = 2.0
    ambient_fraction: float = 0.001

    def __post_init__(self) -> None:
        if not (0.0 < self.omega <= 1.0):
            raise ValueError(f"omega must be in (0, 1], got {self.omega}")
        if not (0.0 < self.t_floor < 1.0):
            raise ValueError(f"t_floor must be in (0, 1), got {self.t_floor}")
        if self.smooth_factor < 1 or int(self.smooth_factor) != self.smooth_factor:
            raise ValueError(f"smooth_factor must be an integer >= 1, got {self.smooth_factor}")
        if self.smooth_sigma <= 0.0:
            raise ValueError(f"smooth_sigma must be > 0, got {self.smooth_sigma}")
        if not (0.0 < self.ambient_fraction <= 1.0):
            raise ValueError(f"ambient_fraction must be in (0, 1], got {self.ambient_fraction}")
        object.__setattr__(self, "smooth_factor", int(self.smooth_factor))


@dataclass(frozen=True)
class RecoveryResult:
    recovered: ImageRGB
    transmission: TransmissionField
    ambient: Spectrum
    unified_spectrum: Spectrum


def compute_unified_radiance(img: ImageRGB) -> Spectrum:
    """Per-channel arithmetic mean of the observation.

    This is the closed-form minimizer of the per-channel squared distance
    to a constant, and reflects the homogeneous ambient light.
    """
    means = img.data.mean(axis=(0, 1))
    return Spectrum.from_array(means)


def normalize_spectrum(s_u: Spectrum) -> Spectrum:
    """Divide by the L1 norm so the channels sum to one (the unified spectrum)."""
    total = s_u.l1
    if total <= 0.0:
        raise DegenerateImageError(
            "unified radiance is zero (all-black image); the unified spectrum is undefined"
        )
    return Spectrum(s_u.r / total, s_u.g / total, s_u.b / total)


def projection_coefficients(img: ImageRGB, s_nu: Spectrum) -> np.ndarray:
    """Per-pixel inner product <I(x), S_nu> as an (H, W) array."""
    # Fixed-order single-pass reduction over the channel axis; no BLAS, so
    # the result is bit-reproducible regardless of thread settings.
    return np.einsum("hwc,c->hw", img.data, s_nu.as_array())


def project_transmission(img: ImageRGB, s_nu: Spectrum, clamp: bool = True) -> TransmissionField:
    """Rank-one transmission estimate t~(x) = <I(x), S_nu> * S_nu.

    Every pixel vector is the shared spectrum scaled by its own coefficient,
    so the stacked field is exactly rank one by construction. With
    clamp=True (the pipeline default) components are clipped to [0, 1].
    """
    if not s_nu.is_normalized:
        raise ValueError(f"unified spectrum must have unit L1 norm, got sum {s_nu.l1}")
    coeff = projection_coefficients(img, s_nu)
    field = coeff[..., None] * s_nu.as_array()
    if clamp:
        np.clip(field, 0.0, 1.0, out=field)
    return TransmissionField._trusted(field)


def smooth_transmission(t: TransmissionField, cfg: PipelineConfig) -> TransmissionField:
    """Suppress pixel-level detail: bilinear downsample, blur, upsample back.

    The raw projection inherits per-pixel scene texture that does not belong
    in a transmission map; a round trip through a smooth_factor-times smaller
    grid with a Gaussian pass removes it at O(N) cost.
    """
    h, w = t.height, t.width
    small_w = max(1, w // cfg.smooth_factor)
    small_h = max(1, h // cfg.smooth_factor)
    small = resize_bilinear_array(t.data, small_w, small_h)
    small = gaussian_blur_array(small, cfg.smooth_sigma)
    restored = resize_bilinear_array(small, w, h)
    np.clip(restored, 0.0, 1.0, out=restored)
    return TransmissionField._trusted(restored)


def _top_k_indices(keys: np.ndarray, k: int) -> np.ndarray:
    """Indices of the k largest keys; ties resolved by ascending index.

    O(n) partition plus an O(k log k) sort of the selected indices, which
    also fixes the summation order for deterministic means.
    """
    n = keys.size
    if k >= n:
        return np.arange(n, dtype=np.intp)
    threshold = np.partition(keys, n - k)[n - k]
    above = np.flatnonzero(keys > threshold)
    need = k - above.size
    at_threshold = np.flatnonzero(keys == threshold)[:need]
    return np.sort(np.concatenate([above, at_threshold]))


def estimate_ambient_light(img: ImageRGB, t: TransmissionField, cfg: PipelineConfig) -> Spectrum:
    """Mean observed color of the strongest-transmission pixels.

    Pixels are ranked by the Euclidean norm of their transmission vector
    (squared norms give the same order and skip the sqrt pass) and the top
    ceil(ambient_fraction * N) of them (at least one) are averaged in the
    observation. Pixels dominated by scattered light carry the ambient color.
    """
    if t.data.shape[:2] != img.data.shape[:2]:
        raise ValueError(
            f"dimension mismatch: image {img.data.shape[:2]} vs field {t.data.shape[:2]}"
        )
    keys = np.einsum("hwc,hwc->hw", t.data, t.data).reshape(-1)
    k = max(1, math.ceil(cfg.ambient_fraction * keys.size))
    selected = _top_k_indices(keys, k)
    ambient = img.data.reshape(-1, 3)[selected].mean(axis=0)
    return Spectrum.from_array(ambient)


def apply_recovery(
    image_data: np.ndarray,
    transmission_data: np.ndarray,
    ambient: Spectrum,
    omega: float,
    t_floor: float,
) -> np.ndarray:
    """Unclamped inversion J = (I - omega * t~ * A) / max(1 - omega * t~, t_floor).

    Both t~ and A are per-channel 3-vectors, so the product and the
    denominator are elementwise. Array-level core of recover_scene; use it
    directly when the raw (pre-clamp) radiance is needed.
    """
    scaled = transmission_data * omega
    numerator = scaled * ambient.as_array()
    np.subtract(image_data, numerator, out=numerator)
    np.subtract(1.0, scaled, out=scaled)
    np.maximum(scaled, t_floor, out=scaled)
    np.divide(numerator, scaled, out=numerator)
    return numerator


def recover_scene(
    img: ImageRGB, t: TransmissionField, a: Spectrum, cfg: PipelineConfig
) -> ImageRGB:
    """Invert the image-formation model and clamp the radiance to [0, 1].

    Pixels with zero transmission pass through unchanged: the subtracted
    term vanishes and the denominator is max(1, t_floor) = 1.
    """
    if t.data.shape != img.data.shape:
        raise ValueError(
            f"dimension mismatch: image {img.data.shape} vs field {t.data.shape}"
        )
    radiance = apply_recovery(img.data, t.data, a, cfg.omega, cfg.t_floor)
    np.clip(radiance, 0.0, 1.0, out=radiance)
    return ImageRGB._trusted(radiance)


def recover(img: ImageRGB, cfg: PipelineConfig = PipelineConfig()) -> RecoveryResult:
    """Full scene recovery: spectrum, projection, smoothing, ambient, inversion.

    Deterministic for a fixed input and config. Raises DegenerateImageError
    for all-black inputs, where no spectrum direction exists.
    """
    s_u = compute_unified_radiance(img)
    s_nu = normalize_spectrum(s_u)
    raw = project_transmission(img, s_nu)
    smoothed = smooth_transmission(raw, cfg)
    ambient = estimate_ambient_light(img, smoothed, cfg)
    recovered = recover_scene(img, smoothed, ambient, cfg)
    return RecoveryResult(
        recovered=recovered,
        transmission=smoothed,
        ambient=ambient,
        unified_spectrum=s_nu,
    )
