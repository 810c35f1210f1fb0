"""Tests for projection binarization, barcodes, distances, and codecs."""

import numpy as np
import pytest

from radonbarcode.barcode import (
    STRIPE_HEIGHT,
    RadonBarcode,
    barcode_from_text,
    barcode_to_text,
    binarize_projection,
    generate_barcode,
    hamming_distance,
    render_barcode,
)
from radonbarcode.image_io import GrayImage, load_image, make_phantom
from radonbarcode.radon import AngleSet, bin_count, equidistant_angles


# ---------------------------------------------------------------- binarize


def test_binarize_hand_examples():
    assert binarize_projection(np.array([0.0, 2.0, 4.0, 6.0, 0.0])).tolist() == [0, 0, 1, 1, 0]
    assert binarize_projection(np.array([5.0, 5.0, 5.0])).tolist() == [1, 1, 1]
    assert binarize_projection(np.zeros(6)).tolist() == [0] * 6


def test_binarize_even_nonzero_count_uses_lower_median():
    # nonzeros {1,2,3,4}: lower median is 2, threshold is inclusive
    assert binarize_projection(np.array([0.0, 1.0, 2.0, 3.0, 4.0])).tolist() == [0, 0, 1, 1, 1]


def test_binarize_single_nonzero():
    assert binarize_projection(np.array([0.0, 0.0, 7.0])).tolist() == [0, 0, 1]


def test_binarize_scale_invariant():
    rng = np.random.default_rng(20)
    for _ in range(25):
        p = rng.random(31)
        p[rng.random(31) < 0.4] = 0.0
        base = binarize_projection(p)
        for alpha in (0.5, 3.0, 1e-6, 1e6):
            assert np.array_equal(binarize_projection(alpha * p), base)


def test_binarize_zero_bins_never_set():
    rng = np.random.default_rng(21)
    for _ in range(25):
        p = rng.random(20)
        zeros = rng.random(20) < 0.5
        p[zeros] = 0.0
        bits = binarize_projection(p)
        assert not np.any(bits[zeros])
        if np.any(p > 0):
            # at least half of the nonzero bins sit at or above the lower median
            k = int(np.count_nonzero(p))
            assert bits.sum() >= (k + 1) // 2


def test_binarize_output_dtype():
    bits = binarize_projection(np.array([1.0, 2.0]))
    assert bits.dtype == np.uint8


# ---------------------------------------------------------------- barcode


def test_generate_barcode_shape_and_determinism():
    img = make_phantom("disk", 32)
    angles = equidistant_angles(8)
    b1 = generate_barcode(img, angles)
    b2 = generate_barcode(img, angles)
    assert b1.fragments.shape == (8, 47)
    assert b1.fragment_length == 47
    assert b1.total_bits == 376
    assert b1 == b2
    assert np.array_equal(b1.bits(), b1.fragments.ravel())


def test_disk_barcode_fragments_agree_at_0_and_90():
    img = make_phantom("disk", 32)
    b = generate_barcode(img, AngleSet([0, 90]))
    assert np.array_equal(b.fragments[0], b.fragments[1])


def test_zero_image_gives_all_zero_barcode():
    b = generate_barcode(GrayImage(np.zeros((16, 16))), equidistant_angles(4))
    assert b.total_bits == 4 * bin_count(16)
    assert not np.any(b.fragments)


def test_radonbarcode_validation():
    angles = AngleSet([0, 90])
    with pytest.raises(ValueError):
        RadonBarcode(angles, np.zeros((3, 5), np.uint8))  # row mismatch
    with pytest.raises(ValueError):
        RadonBarcode(angles, np.full((2, 5), 2, np.uint8))  # non-binary
    with pytest.raises(ValueError):
        RadonBarcode(angles, np.zeros(10, np.uint8))  # not 2-D


# ---------------------------------------------------------------- hamming


def test_hamming_hand_values():
    angles = AngleSet([0, 90])
    x = RadonBarcode(angles, np.array([[1, 0, 1], [0, 0, 1]], np.uint8))
    y = RadonBarcode(angles, np.array([[0, 0, 1], [0, 0, 1]], np.uint8))
    assert hamming_distance(x, x) == 0
    assert hamming_distance(x, y) == 1
    flipped = RadonBarcode(angles, 1 - x.fragments)
    assert hamming_distance(x, flipped) == x.total_bits


def test_hamming_is_a_metric():
    rng = np.random.default_rng(22)
    angles = AngleSet([0, 45, 90])
    make = lambda: RadonBarcode(angles, rng.integers(0, 2, (3, 9)).astype(np.uint8))
    for _ in range(50):
        a, b, c = make(), make(), make()
        assert hamming_distance(a, b) == hamming_distance(b, a)
        assert hamming_distance(a, b) >= 0
        assert (hamming_distance(a, b) == 0) == (a == b)
        assert hamming_distance(a, c) <= hamming_distance(a, b) + hamming_distance(b, c)


def test_hamming_rejects_mismatched_barcodes():
    a = RadonBarcode(AngleSet([0]), np.zeros((1, 4), np.uint8))
    b = RadonBarcode(AngleSet([1]), np.zeros((1, 4), np.uint8))
    c = RadonBarcode(AngleSet([0]), np.zeros((1, 5), np.uint8))
    with pytest.raises(ValueError):
        hamming_distance(a, b)
    with pytest.raises(ValueError):
        hamming_distance(a, c)


# ---------------------------------------------------------------- text codec


def test_text_roundtrip_random_barcodes():
    rng = np.random.default_rng(23)
    for _ in range(40):
        n = int(rng.integers(1, 9))
        length = int(rng.integers(1, 60))
        angles = AngleSet(rng.choice(np.arange(0, 180, 0.25), n, replace=False))
        b = RadonBarcode(angles, rng.integers(0, 2, (len(angles), length)).astype(np.uint8))
        assert barcode_from_text(barcode_to_text(b)) == b


def test_text_format_shape():
    b = generate_barcode(make_phantom("disk", 32), equidistant_angles(8))
    text = barcode_to_text(b)
    head, sep, bits = text.partition("|")
    assert sep == "|"
    assert len(head.split(";")) == 8
    assert len(bits) == 376
    assert set(bits) <= {"0", "1"}


def test_text_codec_rejects_malformed_lines():
    with pytest.raises(ValueError):
        barcode_from_text("0.0;90.0")  # no separator
    with pytest.raises(ValueError):
        barcode_from_text("0.0;90.0|10101")  # 5 bits not divisible by 2 angles
    with pytest.raises(ValueError):
        barcode_from_text("0.0;90.0|1021")  # invalid bit character
    with pytest.raises(ValueError):
        barcode_from_text("0.0;190.0|1010")  # angle out of range


# ---------------------------------------------------------------- rendering


def test_render_barcode_stripe_and_sidecar(tmp_path):
    img = make_phantom("square", 32)
    b = generate_barcode(img, equidistant_angles(4))
    path = tmp_path / "code.pgm"
    render_barcode(b, path)

    raw = path.read_bytes()
    header = b"P5\n%d %d\n255\n" % (b.total_bits, STRIPE_HEIGHT)
    assert raw.startswith(header)
    body = np.frombuffer(raw[len(header):], np.uint8).reshape(STRIPE_HEIGHT, b.total_bits)
    # bit 1 renders black, bit 0 white, identical in every stripe row
    assert set(np.unique(body)) <= {0, 255}
    assert np.array_equal(body[0] == 0, b.bits().astype(bool))
    assert np.all(body == body[0])

    sidecar = tmp_path / "code.txt"
    assert sidecar.exists()
    assert barcode_from_text(sidecar.read_text().strip()) == b


def test_render_all_zero_barcode_is_white(tmp_path):
    b = generate_barcode(GrayImage(np.zeros((8, 8))), AngleSet([0]))
    path = tmp_path / "blank.pgm"
    render_barcode(b, path)
    img = load_image(path)
    assert np.all(img.pixels == 1.0)
