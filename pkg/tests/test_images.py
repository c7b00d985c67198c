"""Image container, arithmetic helpers, quantization, and file round trips."""

import numpy as np
import pytest

from cmisr import (FormatError, ImageIOError, ShapeError, ValidationError,
                   center_crop_multiple, clamp01, image, load_image, quantize,
                   save_image, to_uint8)
from cmisr.images import axpy, norm2, rms, validate_image


# ---- container ----

def test_image_promotes_2d_to_single_channel():
    img = image(np.zeros((4, 5)))
    assert img.shape == (4, 5, 1)
    assert img.dtype == np.float64


def test_image_is_read_only_and_copies_by_default():
    src = np.ones((3, 3))
    img = image(src)
    src[0, 0] = 7.0
    assert img[0, 0, 0] == 1.0
    with pytest.raises(ValueError):
        img[0, 0, 0] = 2.0


def test_image_rejects_bad_shapes_and_values():
    with pytest.raises(ShapeError):
        image(np.zeros((3, 3, 2)))
    with pytest.raises(ShapeError):
        image(np.zeros(5))
    with pytest.raises(ValidationError):
        image(np.array([[np.nan]]))
    with pytest.raises(ValidationError):
        image(np.array([[np.inf]]))
    with pytest.raises(ValidationError):
        validate_image(np.zeros((2, 2, 1), dtype=np.float32))


def test_image_accepts_one_and_three_channels():
    assert image(np.zeros((2, 2, 1))).shape == (2, 2, 1)
    assert image(np.zeros((2, 2, 3))).shape == (2, 2, 3)


# ---- arithmetic helpers ----

def test_axpy_matches_formula():
    rng = np.random.default_rng(0)
    x = rng.random((4, 4, 3))
    y = rng.random((4, 4, 3))
    np.testing.assert_allclose(axpy(0.37, x, y), 0.37 * x + y, rtol=0, atol=0)
    with pytest.raises(ShapeError):
        axpy(1.0, x, y[:2])


def test_norm2_and_rms_match_numpy():
    rng = np.random.default_rng(1)
    x = rng.standard_normal((5, 7, 1))
    assert norm2(x) == pytest.approx(np.linalg.norm(x.ravel()), rel=1e-15)
    assert rms(x) == pytest.approx(np.sqrt(np.mean(x**2)), rel=1e-15)
    assert rms(np.zeros((2, 2, 1))) == 0.0


# ---- quantization ----

def test_clamp01_bounds():
    x = np.array([[[-0.5, 0.25, 1.5]]]).reshape(1, 3, 1)
    np.testing.assert_array_equal(clamp01(x).ravel(), [0.0, 0.25, 1.0])


def test_quantize_lands_on_the_8bit_grid():
    rng = np.random.default_rng(2)
    x = rng.random((6, 6, 1)) * 1.4 - 0.2
    q = quantize(x)
    np.testing.assert_allclose(q * 255.0, np.rint(q * 255.0), atol=1e-12)
    assert q.min() >= 0.0 and q.max() <= 1.0
    # already-on-grid values stay put
    np.testing.assert_array_equal(quantize(q), q)


def test_to_uint8_round_trip():
    grid = np.arange(256, dtype=np.float64).reshape(16, 16, 1) / 255.0
    assert to_uint8(grid).ravel().tolist() == list(range(256))


# ---- file I/O ----

@pytest.mark.parametrize("channels,ext", [(1, ".png"), (3, ".png"),
                                          (1, ".pgm"), (3, ".ppm")])
def test_save_load_round_trip(tmp_path, channels, ext):
    rng = np.random.default_rng(3)
    img = image(quantize(rng.random((9, 7, channels))))
    path = tmp_path / f"img{ext}"
    save_image(img, path)
    back = load_image(path)
    np.testing.assert_allclose(back, img, atol=1e-12)


def test_save_rejects_channel_mismatch(tmp_path):
    gray = image(np.zeros((4, 4, 1)))
    rgb = image(np.zeros((4, 4, 3)))
    with pytest.raises(FormatError):
        save_image(rgb, tmp_path / "x.pgm")
    with pytest.raises(FormatError):
        save_image(gray, tmp_path / "x.ppm")
    with pytest.raises(FormatError):
        save_image(gray, tmp_path / "x.bmp")


def test_load_missing_file_raises_io_error(tmp_path):
    with pytest.raises(ImageIOError):
        load_image(tmp_path / "absent.png")


def test_load_garbage_raises_format_error(tmp_path):
    path = tmp_path / "junk.png"
    path.write_bytes(b"this is not a png at all")
    with pytest.raises(FormatError):
        load_image(path)


def test_load_replicate_expands_gray_to_rgb(tmp_path):
    img = image(quantize(np.random.default_rng(4).random((8, 8, 1))))
    path = tmp_path / "g.png"
    save_image(img, path)
    rep = load_image(path, replicate=True)
    assert rep.shape == (8, 8, 3)
    np.testing.assert_array_equal(rep[:, :, 0], rep[:, :, 2])


# ---- cropping ----

def test_center_crop_multiple_alignment():
    img = image(np.arange(7 * 9, dtype=np.float64).reshape(7, 9, 1))
    out = center_crop_multiple(img, 3)
    assert out.shape == (6, 9, 1)
    # one row trimmed from the top ((7-6)//2 = 0) keeps the center fixed
    np.testing.assert_array_equal(out, img[0:6, :, :])
    out4 = center_crop_multiple(img, 4)
    assert out4.shape == (4, 8, 1)
    np.testing.assert_array_equal(out4, img[1:5, 0:8, :])


def test_center_crop_multiple_noop_when_divisible():
    img = image(np.zeros((8, 12, 1)))
    assert center_crop_multiple(img, 4) is img


def test_center_crop_multiple_too_small():
    img = image(np.zeros((2, 5, 1)))
    with pytest.raises(ShapeError):
        center_crop_multiple(img, 3)
