"""Synthetic test-image generator.

Four families, cycled in order: smooth oriented gradients with a soft bump,
checkerboards, sums of Gaussian blobs, and letter-like glyphs whose strokes
provide the strong step edges where feedback refinement is most visible.
Images are grayscale, values quantized to the 8-bit grid so an image
round-trips bit-exactly through PNG.
"""

from __future__ import annotations

import os

import numpy as np

from .errors import ValidationError
from .images import image, quantize, save_image

KINDS = ("gradient", "checker", "blobs", "glyph")

# Axis-aligned strokes (y, x, h, w) in unit coordinates.
GLYPH_STROKES = {
    "R": [(0.15, 0.15, 0.75, 0.18), (0.15, 0.15, 0.18, 0.50), (0.42, 0.15, 0.16, 0.50),
          (0.15, 0.49, 0.20, 0.18), (0.50, 0.45, 0.45, 0.20)],
    "E": [(0.15, 0.20, 0.70, 0.16), (0.15, 0.20, 0.14, 0.55), (0.43, 0.20, 0.14, 0.45),
          (0.71, 0.20, 0.14, 0.55)],
    "H": [(0.15, 0.20, 0.70, 0.16), (0.15, 0.64, 0.70, 0.16), (0.42, 0.20, 0.16, 0.60)],
}
GLYPH_ORDER = ("R", "E", "H")


def _unit_grid(h: int, w: int):
    yy, xx = np.mgrid[0:h, 0:w]
    return yy / max(h - 1, 1), xx / max(w - 1, 1)


def _rescale(img: np.ndarray, lo: float = 0.05, hi: float = 0.95) -> np.ndarray:
    mn, mx = img.min(), img.max()
    return lo + (hi - lo) * (img - mn) / max(mx - mn, 1e-12)


def make_gradient(h: int, w: int, rng: np.random.Generator) -> np.ndarray:
    yy, xx = _unit_grid(h, w)
    a, b = rng.uniform(-1.0, 1.0, 2)
    img = 0.5 + 0.4 * (a * (xx - 0.5) + b * (yy - 0.5)) / max(abs(a) + abs(b), 1e-6)
    cx, cy = rng.uniform(0.2, 0.8, 2)
    img = img + 0.25 * np.exp(-((xx - cx) ** 2 + (yy - cy) ** 2) / 0.08)
    return _rescale(img)


def make_checker(h: int, w: int, rng: np.random.Generator) -> np.ndarray:
    cell = int(rng.integers(5, 9))
    yy, xx = np.mgrid[0:h, 0:w]
    board = ((yy // cell + xx // cell) % 2).astype(np.float64)
    lo = rng.uniform(0.10, 0.25)
    hi = rng.uniform(0.75, 0.90)
    return lo + (hi - lo) * board


def make_blobs(h: int, w: int, rng: np.random.Generator) -> np.ndarray:
    yy, xx = _unit_grid(h, w)
    img = np.zeros((h, w))
    for _ in range(int(rng.integers(4, 9))):
        cx, cy = rng.uniform(0.0, 1.0, 2)
        sig = rng.uniform(0.03, 0.15)
        img += rng.uniform(-1.0, 1.0) * np.exp(
            -((xx - cx) ** 2 + (yy - cy) ** 2) / (2.0 * sig**2))
    return _rescale(img)


def make_glyph(h: int, w: int, rng: np.random.Generator, letter: str) -> np.ndarray:
    img = np.full((h, w), rng.uniform(0.08, 0.15))
    fg = rng.uniform(0.82, 0.95)
    for (y, x, hh, ww) in GLYPH_STROKES[letter]:
        y0, x0 = int(y * h), int(x * w)
        y1 = min(h, y0 + max(2, int(hh * h)))
        x1 = min(w, x0 + max(2, int(ww * w)))
        img[y0:y1, x0:x1] = fg
    return img


def make_image(index: int, h: int, w: int, seed: int) -> tuple[str, np.ndarray]:
    """Deterministic (name, image) for slot `index` of a seeded corpus."""
    kind = KINDS[index % len(KINDS)]
    rng = np.random.default_rng([seed, index])
    if kind == "gradient":
        img = make_gradient(h, w, rng)
    elif kind == "checker":
        img = make_checker(h, w, rng)
    elif kind == "blobs":
        img = make_blobs(h, w, rng)
    else:
        letter = GLYPH_ORDER[(index // len(KINDS)) % len(GLYPH_ORDER)]
        img = make_glyph(h, w, rng, letter)
    return f"{index:02d}_{kind}", image(quantize(img[:, :, None]), copy=False)


def gen_corpus(out_dir, count: int = 12, size: tuple[int, int] = (48, 48),
               seed: int = 0) -> list[str]:
    """Write `count` PNGs into out_dir; returns the file paths in order."""
    if count < 1:
        raise ValidationError(f"count must be >= 1, got {count}")
    h, w = size
    if h < 8 or w < 8:
        raise ValidationError(f"corpus images must be at least 8x8, got {h}x{w}")
    os.makedirs(out_dir, exist_ok=True)
    paths = []
    for i in range(count):
        name, img = make_image(i, h, w, seed)
        path = os.path.join(out_dir, f"{name}.png")
        save_image(img, path)
        paths.append(path)
    return paths
