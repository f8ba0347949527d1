import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from aip.annotate import (
    DepthEncoding,
    decode_depth,
    decode_normal,
    decode_normal_image,
    encode_depth,
    encode_normal,
    label_of,
    orthographic_depth,
    perspective_depth,
)


def test_perspective_straight_ahead():
    assert perspective_depth([0, 0, 0], [0, 0, 5.0]) == 5.0


def test_perspective_corner_ray():
    # camera at origin facing +z, plane z=2, corner ray along (1,1,1)
    d = np.array([1.0, 1.0, 1.0])
    hit = d / d[2] * 2.0  # point on plane z=2 along the ray
    assert perspective_depth([0, 0, 0], hit) == pytest.approx(2.0 * math.sqrt(3.0), abs=1e-12)
    assert orthographic_depth([0, 0, 0], [0, 0, 1.0], hit) == pytest.approx(2.0, abs=1e-12)


def test_ortho_equals_persp_on_axis():
    hit = [0, 0, 3.7]
    p = perspective_depth([0, 0, 0], hit)
    o = orthographic_depth([0, 0, 0], [0, 0, 1.0], hit)
    assert abs(p - o) < 1e-6


def test_ortho_never_exceeds_persp():
    rng = np.random.default_rng(0)
    fwd = np.array([0.0, 0.0, 1.0])
    for _ in range(200):
        hit = rng.uniform(-5, 5, 3)
        hit[2] = abs(hit[2]) + 0.1
        assert orthographic_depth([0, 0, 0], fwd, hit) <= perspective_depth([0, 0, 0], hit) + 1e-12


@pytest.mark.parametrize(
    "meters,expected",
    [(0.0, 0), (10.0, 65535), (12.0, 65535), (5.0, 32768)],  # 32767.5 rounds away from zero
)
def test_encode_depth_values(meters, expected):
    assert int(encode_depth(meters)) == expected


def test_depth_roundtrip_error_bound():
    enc = DepthEncoding()
    rng = np.random.default_rng(1)
    d = rng.uniform(0.0, enc.max_range, 100_000)
    err = np.abs(decode_depth(encode_depth(d, enc), enc) - d)
    assert err.max() <= enc.max_range / 65535 * 0.5 + 1e-12


@pytest.mark.parametrize(
    "n,expected",
    [
        ((0, 0, 1), (128, 128, 255)),
        ((-1, 0, 0), (0, 128, 128)),
        ((0, 0, 0), (128, 128, 128)),
        ((1, 0, 0), (255, 128, 128)),
        ((0, -1, 0), (128, 0, 128)),
    ],
)
def test_encode_normal_axis_colors(n, expected):
    assert tuple(encode_normal(np.array(n, dtype=np.float64))) == expected


def test_decode_normal_axes():
    # 128 decodes to 1/255, so axis colors recover the axis to within the
    # 8-bit quantization step (well inside the 1-degree roundtrip bound)
    np.testing.assert_allclose(decode_normal(np.array([128, 128, 255], np.uint8)), (0, 0, 1), atol=5e-3)
    np.testing.assert_allclose(decode_normal(np.array([0, 128, 128], np.uint8)), (-1, 0, 0), atol=5e-3)
    for axis in np.vstack([np.eye(3), -np.eye(3)]):
        rt = decode_normal(encode_normal(axis))
        assert np.degrees(np.arccos(np.clip(rt @ axis, -1, 1))) <= 1.0


def test_decode_sentinel_raises():
    with pytest.raises(ValueError):
        decode_normal(np.array([128, 128, 128], np.uint8))


def test_normal_roundtrip_1000_random():
    rng = np.random.default_rng(2)
    v = rng.normal(size=(1000, 3))
    v /= np.linalg.norm(v, axis=1, keepdims=True)
    enc = encode_normal(v)
    dec, valid = decode_normal_image(enc.reshape(1, -1, 3))
    dec = dec.reshape(-1, 3)
    dots = np.clip(np.sum(dec * v, axis=1), -1, 1)
    worst = np.degrees(np.arccos(dots)).max()
    assert worst <= 1.0


@settings(max_examples=200, deadline=None)
@given(st.floats(0.0, 20.0, allow_nan=False))
def test_depth_encode_monotone_and_bounded(d):
    v = int(encode_depth(d))
    assert 0 <= v <= 65535
    assert int(encode_depth(d + 0.01)) >= v


def test_label_of():
    class FakeHit:
        class_id = 7

    assert label_of(FakeHit()) == 7
    assert label_of(None) == 0
