import numpy as np
import pytest

from parkplate.imgfile import (ImageFormatError, decode_bmp, decode_pnm, encode_bmp, encode_pnm,
                               read_image, read_raster, write_image)


@pytest.mark.parametrize("shape", [(1, 1, 3), (7, 5, 3), (4, 13, 3)])
def test_rgb_round_trips(rng, shape, tmp_path):
    img = rng.integers(0, 256, shape, dtype=np.uint8)
    assert np.array_equal(decode_pnm(encode_pnm(img)), img)
    assert np.array_equal(decode_bmp(encode_bmp(img)), img)
    for name in ("a.ppm", "a.bmp"):
        write_image(tmp_path / name, img)
        assert np.array_equal(read_image(tmp_path / name), img)


def test_gray_and_bitmap_round_trips(rng):
    gray = rng.integers(0, 256, (6, 9), dtype=np.uint8)
    assert np.array_equal(decode_pnm(encode_pnm(gray)), gray)
    bits = rng.random((30, 15)) < 0.5
    back = decode_pnm(encode_pnm(bits))
    assert back.dtype == bool and np.array_equal(back, bits)


def test_writers_are_canonical(rng):
    img = rng.integers(0, 256, (3, 5, 3), dtype=np.uint8)
    assert encode_pnm(decode_pnm(encode_pnm(img))) == encode_pnm(img)
    assert encode_bmp(decode_bmp(encode_bmp(img))) == encode_bmp(img)
    assert encode_pnm(img).startswith(b"P6\n5 3\n255\n")


def test_pnm_header_comments_are_skipped():
    data = b"P5\n# made by hand\n2 1\n255\n\x00\xff"
    assert decode_pnm(data).tolist() == [[0, 255]]


def test_bmp_row_padding_and_orientation():
    img = np.zeros((2, 1, 3), dtype=np.uint8)
    img[0, 0] = (255, 0, 0)  # top pixel red
    data = encode_bmp(img)
    assert len(data) == 54 + 2 * 4
    # bottom-up rows, BGR order: the last row in the file is the top row
    assert data[-4:-1] == bytes([0, 0, 255])


def test_read_raster_expands_gray_and_bits(tmp_path):
    write_image(tmp_path / "g.pgm", np.array([[7]], dtype=np.uint8))
    assert read_raster(tmp_path / "g.pgm").tolist() == [[[7, 7, 7]]]
    write_image(tmp_path / "b.pbm", np.array([[True, False]]))
    assert read_raster(tmp_path / "b.pbm").tolist() == [[[0, 0, 0], [255, 255, 255]]]


@pytest.mark.parametrize("data", [b"", b"P3\n1 1\n255\n0 0 0", b"P6\n2 2\n255\n\x00",
                                  b"P5\n1 1\n65535\n\x00\x00", b"BM" + b"\x00" * 60, b"P4\n8"])
def test_malformed_files_raise(data, tmp_path):
    path = tmp_path / "bad.img"
    path.write_bytes(data)
    with pytest.raises(ImageFormatError):
        read_image(path)
