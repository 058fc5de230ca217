"""Shared synthetic-scene builders for the test suite."""

import numpy as np
import pytest

from rorecover.image import ImageRGB, gaussian_blur_array


def random_image(width: int, height: int, seed: int) -> ImageRGB:
    rng = np.random.Generator(np.random.PCG64(seed))
    return ImageRGB(rng.random((height, width, 3)))


def radiance_scene(seed: int, size: int = 96, ambient_value: float = 0.9) -> ImageRGB:
    """Haze-free scene: smooth dark-ish structure plus a sky band.

    The sky band sits at the ambient color, mirroring the horizon region
    that real outdoor hazy scenes expose to the ambient-light estimator.
    """
    rng = np.random.Generator(np.random.PCG64(seed))
    base = rng.random((size, size, 3))
    smooth = gaussian_blur_array(base, 4.0)
    smooth = (smooth - smooth.min()) / (smooth.max() - smooth.min() + 1e-12)
    radiance = smooth * 0.55 + rng.random((size, size, 3)) * 0.04
    radiance[: size // 5, :] = ambient_value
    return ImageRGB(np.clip(radiance, 0.0, 1.0))


def add_haze(clean: ImageRGB, haze: float, ambient: np.ndarray) -> ImageRGB:
    """Homogeneous scattering: I = (1 - h) * J + h * A."""
    hazy = (1.0 - haze) * clean.data + haze * np.asarray(ambient, dtype=np.float64)
    return ImageRGB(np.clip(hazy, 0.0, 1.0))


@pytest.fixture
def haze_scene():
    clean = radiance_scene(seed=7)
    ambient = np.array([0.9, 0.9, 0.9])
    hazy = add_haze(clean, 0.5, ambient)
    return clean, hazy, ambient
