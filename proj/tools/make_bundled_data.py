#!/usr/bin/env python3
"""Builds the bundled IDX fixture files in data/bundled.

The fixtures are 28x28 grayscale digit images in the MNIST container format,
derived from the scikit-learn 8x8 digits set (upsampled, plus 1-pixel-shift
variants to reach a usable desk-scale sample count). They stand in for the
official files when those are not available; point NQE_DATA_DIR at a
directory with real MNIST files to override.
"""

import gzip
import os
import struct
from pathlib import Path

import numpy as np
from sklearn.datasets import load_digits

OUT = Path(__file__).resolve().parent.parent / "data" / "bundled"
TRAIN_PER_CLASS = int(os.environ.get("TRAIN_PER_CLASS", "160"))  # originals reserved for the train split
VARIANTS = 5
MAX_SHIFT = int(__import__("os").environ.get("MAX_SHIFT", "5"))
MAX_SHIFT_TEST = int(__import__("os").environ.get("MAX_SHIFT_TEST", "1"))
TEST_SIGMA = float(os.environ.get("TEST_SIGMA", "45"))
TEST_GAIN_LO = float(os.environ.get("TEST_GAIN_LO", "0.5"))


RNG = np.random.default_rng(987654321)
GAIN_LO = float(os.environ.get("GAIN_LO", "0.3"))
NOISE_SIGMA = float(os.environ.get("NOISE_SIGMA", "60"))


def upsample(img8):
    # 8x8 -> 28x28: nearest-neighbour onto a 24x24 grid (3x), centered with
    # 2-pixel borders, lightly smoothed, rescaled from 0..16 to 0..255 and
    # perturbed with pixel noise so the classes overlap roughly like real
    # handwritten digits do instead of like clean glyphs.
    big = np.kron(img8, np.ones((3, 3)))
    out = np.zeros((28, 28))
    out[2:26, 2:26] = big
    smooth = (
        out
        + np.roll(out, 1, 0) + np.roll(out, -1, 0)
        + np.roll(out, 1, 1) + np.roll(out, -1, 1)
    ) / 5.0
    return smooth * 255.0 / 16.0


BG_AMP = float(os.environ.get("BG_AMP", "55"))


def corrupt(img, sigma, gain_lo):
    # One corruption per source image, shared by all of its shifted copies:
    # random gain, a random low-frequency background gradient, and pixel
    # noise. The background mimics uneven illumination/scan artifacts.
    gain = RNG.uniform(gain_lo, 1.0)
    rr, cc = np.meshgrid(np.linspace(-1, 1, 28), np.linspace(-1, 1, 28), indexing="ij")
    a, b, c0 = RNG.uniform(-1, 1, 3)
    bg = BG_AMP * (a * rr + b * cc + c0)
    return np.clip(img * gain + bg + RNG.normal(0.0, sigma, size=img.shape), 0, 255)


def shifted(img, dr, dc):
    return np.roll(np.roll(img, dr, axis=0), dc, axis=1)


def write_idx(path, array):
    array = np.ascontiguousarray(array, dtype=np.uint8)
    header = struct.pack(">HBB", 0, 0x08, array.ndim)
    header += b"".join(struct.pack(">I", d) for d in array.shape)
    with open(path, "wb") as raw:
        with gzip.GzipFile(fileobj=raw, mode="wb", mtime=0) as f:
            f.write(header + array.tobytes())


def main():
    digits = load_digits()
    by_class = {c: [] for c in range(10)}
    for img, lbl in zip(digits.images, digits.target):
        by_class[int(lbl)].append(upsample(img))

    train = {c: [] for c in range(10)}
    test = {c: [] for c in range(10)}
    for c, imgs in by_class.items():
        head = [corrupt(i, NOISE_SIGMA, GAIN_LO) for i in imgs[:TRAIN_PER_CLASS]]
        tail = [corrupt(i, TEST_SIGMA, TEST_GAIN_LO) for i in imgs[TRAIN_PER_CLASS:]]
        for v in range(VARIANTS):
            cases = ((train[c], head, MAX_SHIFT), (test[c], tail, MAX_SHIFT_TEST))
            for dst, src, ms in cases:
                for img in src:
                    dr, dc = RNG.integers(-ms, ms + 1, size=2)
                    base = shifted(img, int(dr), int(dc)) if v else img
                    dst.append(base.astype(np.uint8))

    rng = np.random.default_rng(12345)
    for name, split in (("train", train), ("t10k", test)):
        images, labels = [], []
        n = max(len(v) for v in split.values())
        # Round-robin over classes so any head-of-file subset is balanced.
        for i in range(n):
            order = rng.permutation(10)
            for c in order:
                if i < len(split[c]):
                    images.append(split[c][i])
                    labels.append(c)
        images = np.stack(images)
        labels = np.array(labels, dtype=np.uint8)
        OUT.mkdir(parents=True, exist_ok=True)
        write_idx(OUT / f"{name}-images-idx3-ubyte.gz", images)
        write_idx(OUT / f"{name}-labels-idx1-ubyte.gz", labels)
        print(name, images.shape, labels.shape)


if __name__ == "__main__":
    main()
