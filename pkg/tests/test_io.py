import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays
from PIL import Image

from discurv.io import ImageFormatError, load_image, load_mask, load_raw, save_image, save_raw, to_uint8

u8 = st.integers(0, 255)


@pytest.mark.parametrize("ext", [".pgm", ".png"])
def test_gray_roundtrip_exact(tmp_path, ext):
    img = np.random.default_rng(0).integers(0, 256, (13, 17)).astype(float)
    p = tmp_path / f"a{ext}"
    save_image(img, p)
    back = load_image(p)
    assert back.dtype == np.float64 and back.shape == (13, 17)
    assert np.array_equal(back, img)


@pytest.mark.parametrize("ext", [".ppm", ".png"])
def test_color_roundtrip_exact(tmp_path, ext):
    img = np.random.default_rng(1).integers(0, 256, (9, 11, 3)).astype(float)
    p = tmp_path / f"a{ext}"
    save_image(img, p)
    assert np.array_equal(load_image(p), img)


@settings(max_examples=25, deadline=None)
@given(arrays(np.uint8, st.tuples(st.integers(1, 12), st.integers(1, 12)), elements=u8))
def test_load_save_load_identity(tmp_path_factory, arr):
    p = tmp_path_factory.mktemp("rt") / "x.pgm"
    save_image(arr.astype(float), p)
    once = load_image(p)
    save_image(once, p)
    assert np.array_equal(load_image(p), once)


def test_rgb_png_written_by_pillow_loads_three_channels(tmp_path):
    p = tmp_path / "rgb.png"
    Image.fromarray(np.zeros((4, 5, 3), np.uint8)).save(p)
    assert load_image(p).shape == (4, 5, 3)
    Image.fromarray(np.zeros((4, 5, 4), np.uint8)).save(p)  # RGBA drops alpha
    assert load_image(p).shape == (4, 5, 3)


def test_quantisation_rules():
    q = to_uint8(np.array([255.7, 127.5, 126.5, -3.0, 0.49]))
    assert q.tolist() == [255, 128, 126, 0, 0]
    with pytest.raises(ValueError):
        to_uint8(np.array([np.nan]))


def test_pgm_header_with_comment(tmp_path):
    p = tmp_path / "c.pgm"
    p.write_bytes(b"P5\n# made by hand\n2 1\n255\n\x07\xff")
    assert load_image(p).tolist() == [[7.0, 255.0]]


def test_truncated_pgm_names_offset(tmp_path):
    p = tmp_path / "t.pgm"
    p.write_bytes(b"P5\n4 4\n255\n" + bytes(10))
    with pytest.raises(ImageFormatError, match="byte 11"):
        load_image(p)


def test_bad_pnm_inputs(tmp_path):
    p = tmp_path / "b.pgm"
    p.write_bytes(b"P2\n1 1\n255\n0")
    with pytest.raises(ImageFormatError, match="magic"):
        load_image(p)
    p.write_bytes(b"P5\n1 x\n255\n0")
    with pytest.raises(ImageFormatError, match="byte 5"):
        load_image(p)
    p.write_bytes(b"P5\n1 1\n65535\n\x00\x00")
    with pytest.raises(ImageFormatError, match="8-bit"):
        load_image(p)


def test_sixteen_bit_png_rejected(tmp_path):
    p = tmp_path / "d.png"
    Image.fromarray(np.zeros((3, 3), np.uint16)).save(p)
    with pytest.raises(ImageFormatError):
        load_image(p)


def test_corrupt_png(tmp_path):
    p = tmp_path / "e.png"
    p.write_bytes(b"\x89PNG\r\n\x1a\n garbage")
    with pytest.raises(ImageFormatError):
        load_image(p)


def test_missing_and_unsupported(tmp_path):
    with pytest.raises(FileNotFoundError):
        load_image(tmp_path / "nope.png")
    with pytest.raises(ImageFormatError):
        load_image(tmp_path / "x.jpg")
    with pytest.raises(ValueError):
        save_image(np.zeros((2, 2, 4)), tmp_path / "x.png")


def test_unwritable_path(tmp_path):
    with pytest.raises(OSError):
        save_image(np.zeros((2, 2)), tmp_path / "no" / "dir" / "x.png")


def test_masks(tmp_path):
    p = tmp_path / "m.png"
    save_image(np.full((6, 6), 255.0), p)
    assert load_mask(p).all()
    save_image(np.zeros((6, 6)), p)
    with pytest.raises(ValueError):
        load_mask(p)
    checker = 255.0 * (np.indices((8, 8)).sum(axis=0) % 2)
    save_image(checker, p)
    m = load_mask(p)
    assert np.count_nonzero(~m) / m.size == 0.5
    save_image(np.array([[127.0, 128.0]]), p)
    assert load_mask(p).tolist() == [[False, True]]


def test_raw_grid_roundtrip(tmp_path):
    g = np.random.default_rng(0).normal(size=(5, 4))
    for name in ("k.npy", "k.csv"):
        save_raw(g, tmp_path / name)
        assert np.array_equal(load_raw(tmp_path / name), g)
