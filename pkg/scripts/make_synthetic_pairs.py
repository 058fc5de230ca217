#!/usr/bin/env python3
"""Generate a directory of synthetic hazy/clean pairs for `ro-recover validate`.

Each scene is a smooth dark-ish radiance field with a sky band at the ambient
color; haze is applied with the homogeneous scattering model at a random
per-image level. File names follow the <id>_hazy.ppm / <id>_GT.ppm pairing
convention.
"""

import argparse
from pathlib import Path

import numpy as np

from rorecover.image import ImageRGB, gaussian_blur_array, save_image


def build_radiance(rng, size: int, ambient: np.ndarray) -> ImageRGB:
    base = rng.random((size, size, 3))
    smooth = gaussian_blur_array(base, 4.0)
    smooth = (smooth - smooth.min()) / (smooth.max() - smooth.min() + 1e-12)
    radiance = smooth * 0.55 + rng.random((size, size, 3)) * 0.04
    radiance[: size // 5, :] = ambient
    return ImageRGB(np.clip(radiance, 0.0, 1.0))


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("output", help="directory to create pairs in")
    parser.add_argument("--count", type=int, default=10)
    parser.add_argument("--size", type=int, default=128)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    out = Path(args.output)
    out.mkdir(parents=True, exist_ok=True)
    rng = np.random.Generator(np.random.PCG64(args.seed))
    ambient = np.array([0.92, 0.90, 0.86])  # slightly warm haze color
    for i in range(args.count):
        clean = build_radiance(rng, args.size, ambient)
        haze = rng.uniform(0.3, 0.7)
        hazy = ImageRGB(np.clip((1.0 - haze) * clean.data + haze * ambient, 0.0, 1.0))
        save_image(hazy, out / f"scene{i:03d}_hazy.ppm")
        save_image(clean, out / f"scene{i:03d}_GT.ppm")
        print(f"scene{i:03d}: haze level {haze:.3f}")
    print(f"wrote {args.count} pairs to {out}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
