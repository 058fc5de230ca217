"""Image container, I/O and resampling tests."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from PIL import Image as PILImage

from rorecover.image import (
    ImageFormatError,
    ImageRGB,
    Spectrum,
    TransmissionField,
    gaussian_blur,
    gaussian_kernel,
    load_image,
    psnr,
    quantize,
    resize_bilinear,
    save_image,
)

from conftest import random_image


def write_ppm(path, width, height, pixel_bytes, maxval=255):
    path.write_bytes(f"P6\n{width} {height}\n{maxval}\n".encode() + bytes(pixel_bytes))


# ---------------------------------------------------------------------------
# Containers
# ---------------------------------------------------------------------------


class TestContainers:
    def test_image_rejects_bad_shape(self):
        with pytest.raises(ValueError):
            ImageRGB(np.zeros((4, 4)))
        with pytest.raises(ValueError):
            ImageRGB(np.zeros((4, 4, 4)))
        with pytest.raises(ValueError):
            ImageRGB(np.zeros((0, 4, 3)))

    def test_image_rejects_bad_values(self):
        bad = np.zeros((2, 2, 3))
        bad[0, 0, 0] = np.nan
        with pytest.raises(ValueError):
            ImageRGB(bad)
        with pytest.raises(ValueError):
            ImageRGB(np.full((2, 2, 3), 1.5))
        with pytest.raises(ValueError):
            ImageRGB(np.full((2, 2, 3), -0.1))

    def test_image_is_immutable(self):
        img = ImageRGB(np.zeros((2, 2, 3)))
        with pytest.raises(ValueError):
            img.data[0, 0, 0] = 1.0

    def test_spectrum_rejects_negative_and_nonfinite(self):
        with pytest.raises(ValueError):
            Spectrum(-0.1, 0.5, 0.5)
        with pytest.raises(ValueError):
            Spectrum(math.nan, 0.5, 0.5)

    def test_spectrum_normalized_flag(self):
        assert Spectrum(0.2, 0.4, 0.4).is_normalized
        assert not Spectrum(0.2, 0.4, 0.5).is_normalized

    def test_field_valid_mask(self):
        data = np.full((2, 3, 3), 0.5)
        mask = np.array([[True, False, True], [False, False, True]])
        field = TransmissionField(data, valid=mask)
        assert field.valid_pixel_count == 3
        assert field.stacked().shape == (3, 3)
        with pytest.raises(ValueError):
            TransmissionField(data, valid=np.ones((3, 2), dtype=bool))

    def test_field_allows_unclamped_but_not_negative(self):
        TransmissionField(np.full((1, 1, 3), 1.5))  # raw fields may exceed 1
        with pytest.raises(ValueError):
            TransmissionField(np.full((1, 1, 3), -0.5))


# ---------------------------------------------------------------------------
# I/O
# ---------------------------------------------------------------------------


class TestPpmIO:
    def test_load_single_pixel(self, tmp_path):
        p = tmp_path / "one.ppm"
        write_ppm(p, 1, 1, [255, 0, 128])
        img = load_image(p)
        assert img.width == 1 and img.height == 1
        assert np.allclose(img.data[0, 0], [1.0, 0.0, 128 / 255])

    def test_load_all_zero(self, tmp_path):
        p = tmp_path / "zero.ppm"
        write_ppm(p, 4, 4, [0] * 48)
        img = load_image(p)
        assert np.all(img.data == 0.0)

    def test_load_with_comment(self, tmp_path):
        p = tmp_path / "c.ppm"
        p.write_bytes(b"P6\n# a comment\n2 1\n255\n" + bytes([10, 20, 30, 40, 50, 60]))
        img = load_image(p)
        assert img.width == 2 and img.height == 1

    def test_save_quantization(self, tmp_path):
        img = ImageRGB(np.array([[[1.0, 0.0, 0.5]]]))
        p = tmp_path / "q.ppm"
        save_image(img, p)
        raw = p.read_bytes()
        assert raw == b"P6\n1 1\n255\n" + bytes([255, 0, 128])

    def test_save_black(self, tmp_path):
        save_image(ImageRGB(np.zeros((1, 1, 3))), tmp_path / "b.ppm")
        assert (tmp_path / "b.ppm").read_bytes().endswith(bytes([0, 0, 0]))

    def test_save_load_save_idempotent(self, tmp_path):
        img = random_image(9, 5, seed=3)
        first = tmp_path / "a.ppm"
        second = tmp_path / "b.ppm"
        save_image(img, first)
        save_image(load_image(first), second)
        assert first.read_bytes() == second.read_bytes()

    def test_load_rejects_bad_files(self, tmp_path):
        with pytest.raises(ImageFormatError):
            load_image(tmp_path / "missing.ppm")

        gif = tmp_path / "x.gif"
        gif.write_bytes(b"GIF89a notreally")
        with pytest.raises(ImageFormatError, match="unsupported"):
            load_image(gif)

        ascii_ppm = tmp_path / "p3.ppm"
        ascii_ppm.write_bytes(b"P3\n1 1\n255\n255 0 0\n")
        with pytest.raises(ImageFormatError):
            load_image(ascii_ppm)

        zero_dim = tmp_path / "z.ppm"
        zero_dim.write_bytes(b"P6\n0 0\n255\n")
        with pytest.raises(ImageFormatError, match="zero-dimension"):
            load_image(zero_dim)

        wide = tmp_path / "wide.ppm"
        wide.write_bytes(b"P6\n1 1\n65535\n\x00\x00\x00\x00\x00\x00")
        with pytest.raises(ImageFormatError, match="maxval"):
            load_image(wide)

        short = tmp_path / "short.ppm"
        short.write_bytes(b"P6\n2 2\n255\n\x00\x00\x00")
        with pytest.raises(ImageFormatError, match="truncated"):
            load_image(short)

    def test_save_rejects_unwritable_and_lossy(self, tmp_path):
        img = ImageRGB(np.zeros((1, 1, 3)))
        with pytest.raises(ImageFormatError):
            save_image(img, tmp_path / "nodir" / "x.ppm")
        with pytest.raises(ImageFormatError, match="unsupported output"):
            save_image(img, tmp_path / "x.jpg")


class TestPillowFormats:
    def test_png_round_trip_bit_identical(self, tmp_path):
        img = random_image(2, 2, seed=11)
        p = tmp_path / "rt.png"
        save_image(img, p)
        again = load_image(p)
        assert np.array_equal(quantize(img), quantize(again))

    def test_jpeg_loads(self, tmp_path):
        arr = (np.linspace(0, 255, 8 * 8 * 3).reshape(8, 8, 3)).astype(np.uint8)
        p = tmp_path / "x.jpg"
        PILImage.fromarray(arr, "RGB").save(p, format="JPEG")
        img = load_image(p)
        assert img.width == 8 and img.height == 8

    def test_grayscale_and_rgba_rejected(self, tmp_path):
        gray = tmp_path / "gray.png"
        PILImage.fromarray(np.zeros((4, 4), dtype=np.uint8), "L").save(gray)
        with pytest.raises(ImageFormatError, match="RGB"):
            load_image(gray)

        rgba = tmp_path / "rgba.png"
        PILImage.fromarray(np.zeros((4, 4, 4), dtype=np.uint8), "RGBA").save(rgba)
        with pytest.raises(ImageFormatError, match="RGB"):
            load_image(rgba)


# ---------------------------------------------------------------------------
# Resampling
# ---------------------------------------------------------------------------


def naive_bilinear(data: np.ndarray, new_width: int, new_height: int) -> np.ndarray:
    """Scalar-loop oracle with the same pixel-center alignment convention."""
    h, w = data.shape[:2]
    out = np.zeros((new_height, new_width, data.shape[2]))
    for j in range(new_height):
        sy = min(max((j + 0.5) * h / new_height - 0.5, 0.0), h - 1.0)
        y0 = int(math.floor(sy))
        y1 = min(y0 + 1, h - 1)
        fy = sy - y0
        for i in range(new_width):
            sx = min(max((i + 0.5) * w / new_width - 0.5, 0.0), w - 1.0)
            x0 = int(math.floor(sx))
            x1 = min(x0 + 1, w - 1)
            fx = sx - x0
            top = data[y0, x0] * (1 - fx) + data[y0, x1] * fx
            bot = data[y1, x0] * (1 - fx) + data[y1, x1] * fx
            out[j, i] = top * (1 - fy) + bot * fy
    return out


class TestResize:
    @given(
        w=st.integers(1, 6),
        h=st.integers(1, 6),
        nw=st.integers(1, 9),
        nh=st.integers(1, 9),
        value=st.floats(0.0, 1.0),
    )
    def test_constant_stays_constant(self, w, h, nw, nh, value):
        out = resize_bilinear(ImageRGB.full(w, h, (value,) * 3), nw, nh)
        assert out.width == nw and out.height == nh
        assert np.allclose(out.data, value, atol=1e-6)

    def test_two_to_three_midpoint(self):
        a, b = 0.2, 0.8
        img = ImageRGB(np.array([[[a] * 3, [b] * 3]]))
        out = resize_bilinear(img, 3, 1)
        assert out.data[0, 1, 0] == pytest.approx((a + b) / 2, abs=1e-9)
        assert out.data[0, 0, 0] == pytest.approx(a, abs=1e-9)
        assert out.data[0, 2, 0] == pytest.approx(b, abs=1e-9)

    def test_identity_resize(self):
        img = random_image(7, 5, seed=1)
        out = resize_bilinear(img, 7, 5)
        assert np.allclose(out.data, img.data, atol=1e-6)

    @pytest.mark.parametrize("nw,nh", [(3, 2), (11, 9), (4, 7)])
    def test_matches_scalar_oracle(self, nw, nh):
        img = random_image(6, 5, seed=nw * 10 + nh)
        out = resize_bilinear(img, nw, nh)
        assert np.allclose(out.data, naive_bilinear(img.data, nw, nh), atol=1e-12)

    @given(seed=st.integers(0, 50), nw=st.integers(1, 8), nh=st.integers(1, 8))
    @settings(max_examples=30)
    def test_range_preserved(self, seed, nw, nh):
        img = random_image(5, 4, seed=seed)
        out = resize_bilinear(img, nw, nh)
        assert out.data.min() >= img.data.min() - 1e-12
        assert out.data.max() <= img.data.max() + 1e-12

    def test_rejects_zero_target(self):
        with pytest.raises(ValueError):
            resize_bilinear(ImageRGB.full(2, 2), 0, 2)


def naive_gaussian_blur(data: np.ndarray, sigma: float) -> np.ndarray:
    """Direct (non-separable) convolution oracle with clamp-to-edge."""
    kernel = gaussian_kernel(sigma)
    radius = len(kernel) // 2
    h, w = data.shape[:2]
    out = np.zeros_like(data)
    for y in range(h):
        for x in range(w):
            acc = np.zeros(data.shape[2])
            for dy in range(-radius, radius + 1):
                for dx in range(-radius, radius + 1):
                    yy = min(max(y + dy, 0), h - 1)
                    xx = min(max(x + dx, 0), w - 1)
                    acc += kernel[dy + radius] * kernel[dx + radius] * data[yy, xx]
            out[y, x] = acc
    return out


class TestGaussianBlur:
    @given(value=st.floats(0.0, 1.0), sigma=st.floats(0.2, 3.0))
    @settings(max_examples=25)
    def test_constant_preserved(self, value, sigma):
        img = ImageRGB.full(5, 4, (value,) * 3)
        out = gaussian_blur(img, sigma)
        assert np.allclose(out.data, value, atol=1e-6)

    def test_single_bright_pixel_center_weight(self):
        sigma = 1.0
        kernel = gaussian_kernel(sigma)
        size = 2 * (len(kernel) // 2) + 5  # keep the bright pixel off the borders
        data = np.zeros((size, size, 3))
        center = size // 2
        data[center, center] = 1.0
        out = gaussian_blur(ImageRGB(data), sigma)
        expected = kernel[len(kernel) // 2] ** 2
        assert out.data[center, center, 0] == pytest.approx(expected, rel=1e-9)

    def test_matches_direct_convolution_oracle(self):
        img = random_image(7, 6, seed=19)
        out = gaussian_blur(img, 0.8)
        assert np.allclose(out.data, naive_gaussian_blur(img.data, 0.8), atol=1e-12)

    def test_mean_conserved_on_reflective_image(self):
        # cos ramps have zero slope at the borders, so clamp-to-edge padding
        # behaves like a smooth extension and the mean is conserved.
        size = 64
        y = np.cos(np.pi * np.arange(size) / (size - 1))
        x = np.cos(np.pi * np.arange(size) / (size - 1))
        plane = 0.5 + 0.3 * np.outer(y, x)
        img = ImageRGB(np.repeat(plane[:, :, None], 3, axis=2))
        out = gaussian_blur(img, 1.5)
        assert abs(out.data.mean() - img.data.mean()) < 1e-4

    def test_sigma_must_be_positive(self):
        with pytest.raises(ValueError):
            gaussian_blur(ImageRGB.full(2, 2), 0.0)


# ---------------------------------------------------------------------------
# PSNR
# ---------------------------------------------------------------------------


class TestPsnr:
    def test_identical_is_infinite(self):
        img = random_image(4, 4, seed=2)
        assert psnr(img, img) == math.inf

    def test_zero_vs_one_is_zero_db(self):
        a = ImageRGB(np.zeros((3, 3, 3)))
        b = ImageRGB(np.ones((3, 3, 3)))
        assert psnr(a, b) == pytest.approx(0.0, abs=1e-12)

    def test_known_mse_gives_20db(self):
        a = ImageRGB.full(8, 8, (0.45, 0.45, 0.45))
        b = ImageRGB.full(8, 8, (0.55, 0.55, 0.55))
        assert psnr(a, b) == pytest.approx(20.0, abs=1e-9)

    @given(s1=st.integers(0, 30), s2=st.integers(0, 30))
    @settings(max_examples=20)
    def test_symmetric(self, s1, s2):
        a = random_image(5, 5, seed=s1)
        b = random_image(5, 5, seed=s2)
        assert psnr(a, b) == psnr(b, a)

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            psnr(ImageRGB.full(2, 2), ImageRGB.full(3, 2))
