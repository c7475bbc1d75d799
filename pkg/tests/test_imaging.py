import colorsys
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import flood_fill_partition, morph_3x3, otsu_brute
from parkplate.imaging import (Rect, complement, connected_components, dilate, erode, luma,
                               opening, otsu_threshold, rgb_to_hsv, rgb_to_hsv_image, rotate,
                               rotated_size, threshold_binarize)

bytes_ = st.integers(0, 255)


@pytest.mark.parametrize("rgb, hsv", [
    ((0, 0, 255), (2 / 3, 1.0, 1.0)),
    ((255, 0, 0), (0.0, 1.0, 1.0)),
    ((0, 255, 0), (1 / 3, 1.0, 1.0)),
    ((255, 255, 0), (1 / 6, 1.0, 1.0)),
    ((255, 0, 255), (5 / 6, 1.0, 1.0)),
    ((128, 128, 128), (0.0, 0.0, 128 / 255)),
    ((0, 0, 0), (0.0, 0.0, 0.0)),
    ((255, 255, 255), (0.0, 0.0, 1.0)),
])
def test_hsv_reference_table(rgb, hsv):
    assert rgb_to_hsv(*rgb) == pytest.approx(hsv, abs=1e-12)


@given(bytes_, bytes_, bytes_)
def test_hsv_matches_colorsys(r, g, b):
    expected = colorsys.rgb_to_hsv(r / 255, g / 255, b / 255)
    got = rgb_to_hsv(r, g, b)
    assert got.s == pytest.approx(expected[1], abs=1e-9)
    assert got.v == pytest.approx(expected[2], abs=1e-9)
    # hue is circular; compare on the circle
    dh = abs(got.h - expected[0]) % 1.0
    assert min(dh, 1 - dh) < 1e-9
    assert 0.0 <= got.h < 1.0


def test_hsv_image_matches_scalar(rng):
    img = rng.integers(0, 256, (17, 23, 3), dtype=np.uint8)
    h, s, v = rgb_to_hsv_image(img)
    for y in range(img.shape[0]):
        for x in range(img.shape[1]):
            assert (h[y, x], s[y, x], v[y, x]) == pytest.approx(rgb_to_hsv(*map(int, img[y, x])), abs=1e-12)


def test_luma_weights():
    img = np.array([[[255, 0, 0], [0, 255, 0], [0, 0, 255], [10, 20, 30]]], dtype=np.uint8)
    assert luma(img).tolist() == [[76, 150, 29, 18]]


def test_otsu_matches_brute_force(rng):
    for _ in range(40):
        n = int(rng.integers(2, 60))
        values = rng.integers(0, 256, n)
        if rng.random() < 0.5:  # bimodal data with structure
            values = np.concatenate([rng.integers(10, 60, n), rng.integers(150, 220, n)])
        assert otsu_threshold(values.astype(np.uint8)) == otsu_brute(values.tolist())


def test_otsu_uniform_image_returns_its_level():
    assert otsu_threshold(np.full((4, 4), 77, dtype=np.uint8)) == 77


def test_binarize_two_level_image():
    gray = np.array([[10, 10, 200, 200]], dtype=np.uint8)
    assert threshold_binarize(gray).tolist() == [[False, False, True, True]]


def test_morphology_matches_neighborhood_oracle(rng):
    for _ in range(30):
        img = rng.random((int(rng.integers(1, 12)), int(rng.integers(1, 12)))) < 0.6
        rows = img.tolist()
        assert erode(img).tolist() == morph_3x3(rows, all)
        assert dilate(img).tolist() == morph_3x3(rows, any)
        assert opening(img).tolist() == morph_3x3(morph_3x3(rows, all), any)


def test_opening_removes_isolated_pixels():
    img = np.zeros((9, 9), dtype=bool)
    img[4, 4] = True
    img[0, 8] = True
    assert not opening(img).any()


@given(st.integers(1, 10), st.integers(1, 10), st.integers(0, 2 ** 32 - 1))
@settings(max_examples=60, deadline=None)
def test_opening_is_idempotent(h, w, seed):
    img = np.random.default_rng(seed).random((h, w)) < 0.7
    once = opening(img)
    assert np.array_equal(opening(once), once)


def test_complement_is_involution(rng):
    img = rng.random((5, 7)) < 0.5
    assert np.array_equal(complement(complement(img)), img)


def test_components_match_flood_fill_on_random_images():
    rng = np.random.default_rng(5)
    for _ in range(50):
        img = rng.random((32, 32)) < rng.uniform(0.2, 0.6)
        lab = connected_components(img)
        ours = {frozenset(zip(*np.nonzero(lab.labels == i))) for i in range(1, lab.count + 1)}
        ours = {frozenset((int(y), int(x)) for y, x in part) for part in ours}
        assert ours == flood_fill_partition(img.tolist())


def test_component_boxes_areas_and_raster_order():
    img = np.zeros((6, 8), dtype=bool)
    img[4:6, 0:2] = True  # starts later in raster order
    img[0, 5:8] = True
    img[1, 4] = True  # diagonal neighbor joins the top run
    lab = connected_components(img)
    assert lab.count == 2
    assert lab.boxes == [Rect(4, 0, 4, 2), Rect(0, 4, 2, 2)]
    assert lab.areas == [4, 4]
    assert np.array_equal(lab.mask(2), (lab.labels == 2))


def test_empty_image_has_no_components():
    lab = connected_components(np.zeros((3, 3), dtype=bool))
    assert lab.count == 0 and lab.boxes == [] and not lab.labels.any()


def test_rect_iou():
    a = Rect(0, 0, 10, 10)
    assert a.iou(a) == 1.0
    assert a.iou(Rect(5, 0, 10, 10)) == pytest.approx(50 / 150)
    assert a.iou(Rect(20, 20, 3, 3)) == 0.0


def test_rotate_quarter_turn_equals_rot90(rng):
    img = rng.integers(0, 256, (7, 12, 3), dtype=np.uint8)
    assert np.array_equal(rotate(img, math.pi / 2), np.rot90(img, k=-1))
    assert np.array_equal(rotate(img, -math.pi / 2), np.rot90(img, k=1))


def test_rotate_zero_is_copy(rng):
    img = rng.random((5, 6)) < 0.5
    out = rotate(img, 0.0)
    assert np.array_equal(out, img) and out is not img


def test_rotate_round_trip_mostly_preserves_content():
    img = np.zeros((40, 60), dtype=bool)
    img[10:30, 15:45] = True
    there = rotate(img, 0.1)
    back = rotate(there, -0.1)
    h, w = back.shape
    y0, x0 = (h - 40) // 2, (w - 60) // 2
    crop = back[y0:y0 + 40, x0:x0 + 60]
    assert (crop == img).mean() >= 0.95


def test_rotate_sign_is_clockwise_on_screen():
    img = np.zeros((21, 21), dtype=bool)
    img[10, 15:21] = True  # a ray pointing right from the center
    out = rotate(img, math.radians(30))
    ys, xs = np.nonzero(out)
    cy, cx = out.shape[0] / 2, out.shape[1] / 2
    # clockwise with y pointing down moves the right-pointing ray downward
    assert (ys + 0.5 - cy).mean() > 0 and (xs + 0.5 - cx).mean() > 0


def test_rotate_rejects_steep_angles():
    with pytest.raises(ValueError):
        rotate(np.zeros((3, 3)), 2.0)


@given(st.integers(1, 50), st.integers(1, 50), st.floats(-math.pi / 2, math.pi / 2))
def test_rotated_size_holds_the_rotated_rectangle(w, h, theta):
    nw, nh = rotated_size(w, h, theta)
    c, s = abs(math.cos(theta)), abs(math.sin(theta))
    assert nw >= w * c + h * s - 1e-6 and nh >= w * s + h * c - 1e-6


def test_functions_do_not_mutate_inputs(rng):
    img = rng.integers(0, 256, (8, 8, 3), dtype=np.uint8)
    before = img.copy()
    rgb_to_hsv_image(img)
    luma(img)
    rotate(img, 0.3)
    assert np.array_equal(img, before)
