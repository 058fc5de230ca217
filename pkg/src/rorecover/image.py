"""Image containers, PPM/PNG/JPEG I/O and resampling primitives.

All pixel data lives in numpy float64 arrays of shape (height, width, 3),
channel order R,G,B, values in [0, 1]. Stored values are used as-is: no
sRGB linearization is applied on load and none is removed on save.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image as PILImage

__all__ = [
    "ImageRGB",
    "Spectrum",
    "TransmissionField",
    "ImageFormatError",
    "load_image",
    "save_image",
    "quantize",
    "resize_bilinear",
    "resize_bilinear_array",
    "gaussian_blur",
    "gaussian_blur_array",
    "gaussian_kernel",
    "psnr",
]


class ImageFormatError(ValueError):
    """Raised for unreadable, unsupported or malformed image files."""


def _as_readonly_f64(data: np.ndarray) -> np.ndarray:
    arr = np.ascontiguousarray(data, dtype=np.float64)
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class ImageRGB:
    """An immutable H x W x 3 raster with components in [0, 1]."""

    data: np.ndarray

    def __post_init__(self) -> None:
        arr = np.asarray(self.data)
        if arr.ndim != 3 or arr.shape[2] != 3:
            raise ValueError(f"expected (H, W, 3) array, got shape {arr.shape}")
        if arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ValueError("image dimensions must be >= 1")
        if not np.isfinite(arr).all():
            raise ValueError("image components must be finite")
        if arr.min() < 0.0 or arr.max() > 1.0:
            raise ValueError("image components must lie in [0, 1]")
        object.__setattr__(self, "data", _as_readonly_f64(arr))

    @classmethod
    def _trusted(cls, data: np.ndarray) -> "ImageRGB":
        # Validation-free path for internally produced arrays that are
        # already float64, C-contiguous and clipped to [0, 1].
        obj = object.__new__(cls)
        data.flags.writeable = False
        object.__setattr__(obj, "data", data)
        return obj

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def pixel_count(self) -> int:
        return self.data.shape[0] * self.data.shape[1]

    @classmethod
    def full(cls, width: int, height: int, rgb=(0.0, 0.0, 0.0)) -> "ImageRGB":
        """Constant image of the given size."""
        return cls(np.broadcast_to(np.asarray(rgb, dtype=np.float64), (height, width, 3)).copy())


@dataclass(frozen=True)
class Spectrum:
    """A nonnegative 3-vector over the R,G,B channels."""

    r: float
    g: float
    b: float

    def __post_init__(self) -> None:
        for name, v in (("r", self.r), ("g", self.g), ("b", self.b)):
            if not math.isfinite(v) or v < 0.0:
                raise ValueError(f"spectrum channel {name}={v!r} must be finite and >= 0")

    def as_array(self) -> np.ndarray:
        return np.array([self.r, self.g, self.b], dtype=np.float64)

    @classmethod
    def from_array(cls, arr: np.ndarray) -> "Spectrum":
        r, g, b = (float(v) for v in np.asarray(arr, dtype=np.float64).reshape(3))
        return cls(r, g, b)

    @property
    def l1(self) -> float:
        return self.r + self.g + self.b

    @property
    def is_normalized(self) -> bool:
        return abs(self.l1 - 1.0) <= 1e-6


@dataclass(frozen=True)
class TransmissionField:
    """Per-pixel scattered-light transmission vectors.

    `data` has shape (H, W, 3) with finite nonnegative components; values may
    exceed 1 only in raw (unclamped) fields. `valid` optionally masks pixels
    excluded from stacked-matrix analysis (None means every pixel is valid).
    """

    data: np.ndarray
    valid: np.ndarray | None = None

    def __post_init__(self) -> None:
        arr = np.asarray(self.data)
        if arr.ndim != 3 or arr.shape[2] != 3:
            raise ValueError(f"expected (H, W, 3) array, got shape {arr.shape}")
        if not np.isfinite(arr).all() or arr.min() < 0.0:
            raise ValueError("transmission components must be finite and >= 0")
        object.__setattr__(self, "data", _as_readonly_f64(arr))
        if self.valid is not None:
            mask = np.asarray(self.valid, dtype=bool)
            if mask.shape != arr.shape[:2]:
                raise ValueError("validity mask shape must match field dimensions")
            mask = mask.copy()
            mask.flags.writeable = False
            object.__setattr__(self, "valid", mask)

    @classmethod
    def _trusted(cls, data: np.ndarray) -> "TransmissionField":
        # Validation-free path for internally produced arrays that are
        # already float64, C-contiguous, finite and nonnegative.
        obj = object.__new__(cls)
        data.flags.writeable = False
        object.__setattr__(obj, "data", data)
        object.__setattr__(obj, "valid", None)
        return obj

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def height(self) -> int:
        return self.data.shape[0]

    def stacked(self) -> np.ndarray:
        """Valid pixels stacked row-major into an (n, 3) matrix."""
        flat = self.data.reshape(-1, 3)
        if self.valid is None:
            return flat
        return flat[self.valid.reshape(-1)]

    @property
    def valid_pixel_count(self) -> int:
        if self.valid is None:
            return self.data.shape[0] * self.data.shape[1]
        return int(self.valid.sum())


# ---------------------------------------------------------------------------
# File I/O
#
# PPM (P6, maxval 255) is the byte-deterministic golden format; PNG is
# lossless on the quantized samples; JPEG is accepted for reading only.
# ---------------------------------------------------------------------------

_PNG_MAGIC = b"\x89PNG\r\n\x1a\n"
_JPEG_MAGIC = b"\xff\xd8\xff"


def load_image(path) -> ImageRGB:
    """Load a PPM (P6), PNG or JPEG file as an ImageRGB.

    8-bit samples are mapped to [0, 1] by v / 255. Grayscale and RGBA
    inputs are rejected rather than coerced.
    """
    path = Path(path)
    try:
        with path.open("rb") as fh:
            head = fh.read(8)
    except OSError as exc:
        raise ImageFormatError(f"cannot read {path}: {exc}") from exc
    if head[:2] == b"P6":
        return _load_ppm(path)
    if head[:8] == _PNG_MAGIC or head[:3] == _JPEG_MAGIC:
        return _load_via_pillow(path)
    raise ImageFormatError(f"{path}: unsupported format (expected PPM P6, PNG or JPEG)")


def _load_ppm(path: Path) -> ImageRGB:
    raw = path.read_bytes()
    fields: list[int] = []
    pos = 2  # past the "P6" magic
    while len(fields) < 3:
        while pos < len(raw) and raw[pos : pos + 1].isspace():
            pos += 1
        if pos < len(raw) and raw[pos : pos + 1] == b"#":
            while pos < len(raw) and raw[pos] != 0x0A:
                pos += 1
            continue
        start = pos
        while pos < len(raw) and not raw[pos : pos + 1].isspace():
            pos += 1
        token = raw[start:pos]
        if not token.isdigit():
            raise ImageFormatError(f"{path}: malformed PPM header")
        fields.append(int(token))
    pos += 1  # single whitespace byte after maxval
    width, height, maxval = fields
    if width < 1 or height < 1:
        raise ImageFormatError(f"{path}: zero-dimension image")
    if maxval != 255:
        raise ImageFormatError(f"{path}: unsupported PPM maxval {maxval} (only 255)")
    expected = width * height * 3
    pixels = raw[pos : pos + expected]
    if len(pixels) != expected:
        raise ImageFormatError(f"{path}: truncated PPM pixel data")
    arr = np.frombuffer(pixels, dtype=np.uint8).reshape(height, width, 3)
    return ImageRGB(arr.astype(np.float64) / 255.0)


def _load_via_pillow(path: Path) -> ImageRGB:
    try:
        with PILImage.open(path) as img:
            if img.mode != "RGB":
                raise ImageFormatError(
                    f"{path}: mode {img.mode!r} not supported (3-channel RGB only)"
                )
            if img.width < 1 or img.height < 1:
                raise ImageFormatError(f"{path}: zero-dimension image")
            arr = np.asarray(img, dtype=np.uint8)
    except ImageFormatError:
        raise
    except Exception as exc:
        raise ImageFormatError(f"cannot decode {path}: {exc}") from exc
    return ImageRGB(arr.astype(np.float64) / 255.0)


def quantize(img: ImageRGB) -> np.ndarray:
    """Map components to 8-bit samples: round(v * 255), half away from zero."""
    return np.clip(np.floor(img.data * 255.0 + 0.5), 0, 255).astype(np.uint8)


def save_image(img: ImageRGB, path) -> None:
    """Write an ImageRGB as PPM (.ppm) or PNG (.png).

    PPM output is byte-deterministic for a given image. JPEG output is not
    supported (lossy round trips would break golden-file comparisons).
    """
    path = Path(path)
    suffix = path.suffix.lower()
    samples = quantize(img)
    if suffix == ".ppm":
        header = f"P6\n{img.width} {img.height}\n255\n".encode("ascii")
        try:
            path.write_bytes(header + samples.tobytes())
        except OSError as exc:
            raise ImageFormatError(f"cannot write {path}: {exc}") from exc
    elif suffix == ".png":
        try:
            PILImage.fromarray(samples, mode="RGB").save(path, format="PNG")
        except OSError as exc:
            raise ImageFormatError(f"cannot write {path}: {exc}") from exc
    else:
        raise ImageFormatError(f"{path}: unsupported output format (use .ppm or .png)")


# ---------------------------------------------------------------------------
# Resampling and filtering
# ---------------------------------------------------------------------------


def _axis_weights(n_src: int, n_dst: int):
    # Pixel-center alignment: dst sample k reads src coordinate
    # (k + 0.5) * n_src / n_dst - 0.5, clamped to the valid range.
    coords = (np.arange(n_dst, dtype=np.float64) + 0.5) * (n_src / n_dst) - 0.5
    coords = np.clip(coords, 0.0, float(n_src - 1))
    lo = np.floor(coords).astype(np.intp)
    hi = np.minimum(lo + 1, n_src - 1)
    frac = coords - lo
    return lo, hi, frac


def _interp_axis(data: np.ndarray, lo, hi, frac, axis: int) -> np.ndarray:
    if axis == 0:
        out, part = data[lo], data[hi]
        shaped = frac[:, None, None]
    else:
        out, part = data[:, lo], data[:, hi]
        shaped = frac[None, :, None]
    out *= 1.0 - shaped
    part *= shaped
    out += part
    return out


def resize_bilinear_array(data: np.ndarray, new_width: int, new_height: int) -> np.ndarray:
    """Bilinear resample of an (H, W, C) array with edge clamping."""
    if new_width < 1 or new_height < 1:
        raise ValueError("target dimensions must be >= 1")
    h, w = data.shape[:2]
    ylo, yhi, fy = _axis_weights(h, new_height)
    xlo, xhi, fx = _axis_weights(w, new_width)
    # Axis order only reshuffles float rounding; run the row pass on the
    # larger grid (contiguous row gathers beat strided column gathers).
    if new_height >= h:
        cols = _interp_axis(data, xlo, xhi, fx, axis=1)
        return _interp_axis(cols, ylo, yhi, fy, axis=0)
    rows = _interp_axis(data, ylo, yhi, fy, axis=0)
    return _interp_axis(rows, xlo, xhi, fx, axis=1)


def resize_bilinear(img: ImageRGB, new_width: int, new_height: int) -> ImageRGB:
    """Resize with center-aligned bilinear interpolation.

    Outputs are convex combinations of input pixels, so values stay inside
    [min(img), max(img)] up to rounding (and are re-clipped to [0, 1]).
    """
    out = resize_bilinear_array(img.data, new_width, new_height)
    np.clip(out, 0.0, 1.0, out=out)
    return ImageRGB._trusted(out)


def gaussian_kernel(sigma: float) -> np.ndarray:
    """Normalized 1-D Gaussian taps with radius ceil(3 * sigma)."""
    if sigma <= 0:
        raise ValueError(f"sigma must be > 0, got {sigma}")
    radius = math.ceil(3.0 * sigma)
    offsets = np.arange(-radius, radius + 1, dtype=np.float64)
    kernel = np.exp(-(offsets**2) / (2.0 * sigma * sigma))
    return kernel / kernel.sum()


def _blur_axis(data: np.ndarray, kernel: np.ndarray, axis: int) -> np.ndarray:
    radius = len(kernel) // 2
    pad = [(0, 0)] * data.ndim
    pad[axis] = (radius, radius)
    padded = np.pad(data, pad, mode="edge")
    out = np.zeros_like(data)
    index: list[slice] = [slice(None)] * data.ndim
    for k, weight in enumerate(kernel):
        index[axis] = slice(k, k + data.shape[axis])
        out += weight * padded[tuple(index)]
    return out


def gaussian_blur_array(data: np.ndarray, sigma: float) -> np.ndarray:
    """Separable Gaussian blur of an (H, W, C) array, clamp-to-edge borders."""
    kernel = gaussian_kernel(sigma)
    return _blur_axis(_blur_axis(data, kernel, 0), kernel, 1)


def gaussian_blur(img: ImageRGB, sigma: float) -> ImageRGB:
    """Gaussian blur; preserves constant images and the [0, 1] range."""
    # The kernel is normalized, but float round-off can push values a hair
    # outside [0, 1]; clip so the container invariant holds.
    out = gaussian_blur_array(img.data, sigma)
    np.clip(out, 0.0, 1.0, out=out)
    return ImageRGB._trusted(out)


def psnr(a: ImageRGB, b: ImageRGB) -> float:
    """Peak signal-to-noise ratio in dB over all components (peak = 1.0).

    Returns +inf for identical images.
    """
    if a.data.shape != b.data.shape:
        raise ValueError(f"dimension mismatch: {a.data.shape} vs {b.data.shape}")
    mse = float(np.mean((a.data - b.data) ** 2))
    if mse == 0.0:
        return math.inf
    return 10.0 * math.log10(1.0 / mse)
