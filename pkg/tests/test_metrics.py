import math

import numpy as np
import pytest

from aip.errors import EvalError
from aip.metrics import (
    confusion_matrix,
    depth_metrics,
    goal_tag,
    normal_metrics,
    report_row,
    seg_metrics,
    seg_metrics_from_confusion,
)
from oracles import naive_depth_metrics, naive_normal_metrics, naive_seg_metrics


# ---------------------------------------------------------------------------
# depth


def test_depth_perfect_prediction():
    gt = np.full((4, 4), 2.5)
    m = depth_metrics(gt, gt)
    assert (m.delta1, m.delta2, m.delta3) == (1.0, 1.0, 1.0)
    assert m.rel == m.rms == m.log10 == 0.0


def test_depth_worked_example():
    # pred=[1,2], gt=[1,1]: ratio 2 fails every threshold
    m = depth_metrics(np.array([1.0, 2.0]), np.array([1.0, 1.0]))
    assert (m.delta1, m.delta2, m.delta3) == (0.5, 0.5, 0.5)
    assert m.rel == 0.5
    assert m.rms == pytest.approx(math.sqrt(0.5), abs=1e-15)
    assert m.log10 == pytest.approx(math.log10(2.0) / 2.0, abs=1e-15)


def test_depth_delta_monotone_random():
    rng = np.random.default_rng(0)
    for _ in range(25):
        pred = rng.uniform(0.1, 10, 64)
        gt = rng.uniform(0.1, 10, 64)
        m = depth_metrics(pred, gt)
        assert m.delta1 <= m.delta2 <= m.delta3


def test_depth_rel_asymmetry():
    a = depth_metrics(np.array([2.0]), np.array([1.0]))
    b = depth_metrics(np.array([1.0]), np.array([2.0]))
    assert a.delta1 == b.delta1  # ratio is symmetric
    assert a.rel == 1.0 and b.rel == 0.5  # rel is not (gt denominator)


def test_depth_errors():
    with pytest.raises(EvalError, match="empty"):
        depth_metrics(np.ones((2, 2)), np.ones((2, 2)), mask=np.zeros((2, 2), bool))
    with pytest.raises(EvalError, match="positive"):
        depth_metrics(np.zeros(3), np.ones(3))
    with pytest.raises(EvalError, match="shape"):
        depth_metrics(np.ones(3), np.ones(4))


def test_depth_matches_naive_oracle():
    rng = np.random.default_rng(42)
    for _ in range(100):
        pred = rng.uniform(0.05, 12.0, (16, 16))
        gt = rng.uniform(0.05, 12.0, (16, 16))
        m = depth_metrics(pred, gt)
        o = naive_depth_metrics(pred, gt)
        for key in ("delta1", "delta2", "delta3", "rel", "rms", "log10"):
            assert getattr(m, key) == pytest.approx(o[key], rel=1e-9)


# ---------------------------------------------------------------------------
# normals


def test_normal_perfect_prediction():
    rng = np.random.default_rng(1)
    v = rng.normal(size=(8, 8, 3))
    v /= np.linalg.norm(v, axis=-1, keepdims=True)
    m = normal_metrics(v, v)
    assert (m.pct_11_5, m.pct_22_5, m.pct_30) == (1.0, 1.0, 1.0)
    assert m.mean_deg == 0.0 and m.median_deg == 0.0


def test_normal_worked_example_two_pixels():
    gt = np.array([[[0.0, 0.0, 1.0]], [[0.0, 0.0, 1.0]]])
    a = math.radians(20.0)
    pred = np.array([[[0.0, 0.0, 1.0]], [[0.0, math.sin(a), math.cos(a)]]])
    m = normal_metrics(pred, gt)
    assert m.pct_11_5 == 0.5
    assert m.pct_22_5 == 1.0
    assert m.mean_deg == pytest.approx(10.0, abs=1e-9)
    assert m.median_deg == pytest.approx(0.0, abs=1e-12)  # lower-middle rule


def test_normal_45_degrees_fails_pct30():
    gt = np.array([[[0.0, 0.0, 1.0]]])
    pred = np.array([[[0.0, math.sqrt(0.5), math.sqrt(0.5)]]])
    m = normal_metrics(pred, gt)
    assert m.mean_deg == pytest.approx(45.0, abs=1e-9)
    assert m.pct_30 == 0.0


def test_normal_matches_naive_oracle():
    rng = np.random.default_rng(2)
    for _ in range(100):
        pred = rng.normal(size=(16, 16, 3))
        gt = rng.normal(size=(16, 16, 3))
        m = normal_metrics(pred, gt)
        o = naive_normal_metrics(pred.reshape(-1, 3), gt.reshape(-1, 3))
        for key in ("pct_11_5", "pct_22_5", "pct_30", "mean_deg", "median_deg"):
            assert getattr(m, key) == pytest.approx(o[key], rel=1e-9, abs=1e-12)


def test_normal_empty_mask_errors():
    v = np.ones((2, 2, 3))
    with pytest.raises(EvalError, match="empty"):
        normal_metrics(v, v, mask=np.zeros((2, 2), bool))


# ---------------------------------------------------------------------------
# segmentation


def test_seg_perfect_prediction():
    labels = np.array([[0, 1], [2, 1]])
    m = seg_metrics(labels, labels, 3)
    assert m.mean_iou == 1.0


def test_seg_worked_example():
    gt = np.array([0, 0, 1, 1])
    pred = np.array([0, 1, 1, 1])
    m = seg_metrics(pred, gt, 2)
    assert m.iou[0] == pytest.approx(0.5)
    assert m.iou[1] == pytest.approx(2.0 / 3.0)
    assert m.mean_iou == pytest.approx(7.0 / 12.0)  # ~0.5833


def test_seg_absent_class_flagged_and_zero_iou():
    gt = np.array([0, 1, 1, 0])
    pred = np.array([0, 0, 0, 0])  # predicts only "other"
    m = seg_metrics(pred, gt, 3)
    assert m.iou[1] == 0.0  # present in gt, never predicted
    assert m.iou[2] is None  # absent everywhere -> flagged
    assert m.count == 4


def test_seg_confusion_counts_sum():
    rng = np.random.default_rng(3)
    gt = rng.integers(0, 5, 300)
    pred = rng.integers(0, 5, 300)
    m = seg_metrics(pred, gt, 5)
    assert m.confusion.sum() == 300


def test_seg_permutation_invariant():
    rng = np.random.default_rng(4)
    gt = rng.integers(0, 4, 200)
    pred = rng.integers(0, 4, 200)
    perm = rng.permutation(200)
    np.testing.assert_array_equal(
        confusion_matrix(pred, gt, 4), confusion_matrix(pred[perm], gt[perm], 4)
    )


def test_seg_label_out_of_range():
    with pytest.raises(EvalError, match="out of range"):
        seg_metrics(np.array([0, 5]), np.array([0, 1]), 3)


def test_seg_matches_naive_oracle():
    rng = np.random.default_rng(5)
    for _ in range(100):
        gt = rng.integers(0, 6, (16, 16))
        pred = rng.integers(0, 6, (16, 16))
        m = seg_metrics(pred, gt, 6)
        o = naive_seg_metrics(pred, gt, 6)
        assert m.mean_iou == pytest.approx(o["mean_iou"], rel=1e-9)
        for c in range(6):
            if m.iou[c] is None:
                assert c not in o["iou"]
            else:
                assert m.iou[c] == pytest.approx(o["iou"][c], rel=1e-9)


def test_seg_accumulation_over_frames():
    gt1, pred1 = np.array([0, 1]), np.array([0, 0])
    gt2, pred2 = np.array([1, 1]), np.array([1, 1])
    total = confusion_matrix(pred1, gt1, 2) + confusion_matrix(pred2, gt2, 2)
    m = seg_metrics_from_confusion(total)
    stacked = seg_metrics(np.concatenate([pred1, pred2]), np.concatenate([gt1, gt2]), 2)
    assert m.mean_iou == stacked.mean_iou


# ---------------------------------------------------------------------------
# report rows / goal tags


@pytest.mark.parametrize(
    "train,test,expected",
    [
        ("brown_room/day/high", "brown_room/day/high", "SC"),
        ("brown_room/day/high", "brown_room/night/high", "L"),
        ("brown_room/day/low", "brown_room/day/high", "F"),
        ("brown_room/night/high", "blue_room/night/high", "M"),
        ("brown_room/day/high", "blue_room/night/high", "M+L"),
        ("brown_room/day/high", "brown_room/day/low", "-"),  # fidelity falls: untagged
    ],
)
def test_goal_tags(train, test, expected):
    assert goal_tag(train, test) == expected


def test_report_row_format():
    m = depth_metrics(np.array([1.0, 2.0]), np.array([1.0, 1.0]))
    row = report_row(m, "brown_room/day/high", "brown_room/day/high")
    assert row.startswith("brown_room/day/high | brown_room/day/high | SC | ")
    assert "0.5000" in row
