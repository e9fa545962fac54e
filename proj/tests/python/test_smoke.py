"""Smoke tests for the Python bindings: thin checks that the main operations
round-trip through numpy correctly. The heavy verification lives in the C++
unit and acceptance suites."""

import json
import math

import numpy as np
import pytest

import edgeseg as es


def test_constants():
    assert es.NUM_CLASSES == 19
    assert es.IGNORE_LABEL == 255
    assert len(es.CLASS_NAMES) == 19
    assert es.CLASS_NAMES[15] == "bus"


def test_sobel_two_column_step():
    label = np.zeros((4, 4), np.uint8)
    label[:, 2:] = 1
    mag = es.sobel_magnitude(label)
    assert mag.shape == (4, 4)
    np.testing.assert_array_equal(mag[1], [0.0, 4.0, 4.0, 0.0])

    edges, valid = es.edge_target(label)
    np.testing.assert_array_equal(edges[2], [0, 1, 1, 0])
    assert valid.all()


def test_edge_target_masks_ignore_windows():
    label = np.full((5, 5), 7, np.uint8)
    label[2, 2] = es.IGNORE_LABEL
    edges, valid = es.edge_target(label)
    assert edges.sum() == 0
    assert valid.sum() == 25 - 9


def test_label_map_roundtrip(tmp_path):
    rng = np.random.default_rng(5)
    label = rng.integers(0, 19, size=(13, 9)).astype(np.uint8)
    path = str(tmp_path / "label.png")
    es.save_label_map(label, path)
    np.testing.assert_array_equal(es.load_label_map(path), label)


def test_label_map_rejects_bad_class(tmp_path):
    bad = np.full((2, 2), 19, np.uint8)
    with pytest.raises(es.Error):
        es.save_label_map(bad, str(tmp_path / "bad.png"))


def test_rgb_roundtrip(tmp_path):
    rng = np.random.default_rng(6)
    image = rng.integers(0, 256, size=(7, 11, 3)).astype(np.uint8)
    path = str(tmp_path / "img.png")
    es.save_rgb_image(image, path)
    np.testing.assert_array_equal(es.load_rgb_image(path), image)


def test_conv_forward_matches_numpy():
    rng = np.random.default_rng(7)
    x = rng.normal(size=(3, 6, 6)).astype(np.float32)
    w = rng.normal(scale=0.3, size=(2, 3, 3, 3)).astype(np.float32)
    b = rng.normal(size=(2,)).astype(np.float32)

    out = es.conv3x3_forward(x, w, b)

    padded = np.pad(x, ((0, 0), (1, 1), (1, 1)))
    expected = np.zeros((2, 6, 6))
    for o in range(2):
        expected[o] += b[o]
        for c in range(3):
            for ky in range(3):
                for kx in range(3):
                    expected[o] += w[o, c, ky, kx] * padded[c, ky : ky + 6, kx : kx + 6]
    np.testing.assert_allclose(out, expected, rtol=1e-5, atol=1e-6)


def test_softmax_xent2d_ln2_anchor():
    logits = np.zeros((2, 4, 4), np.float32)
    edges = np.zeros((4, 4), np.uint8)
    valid = np.ones((4, 4), np.uint8)
    loss, grad, n = es.softmax_xent2d(logits, edges, valid)
    assert n == 16
    assert math.isclose(loss, math.log(2.0), rel_tol=1e-9)
    assert grad.shape == (2, 4, 4)


def test_edge_loss_and_finite_difference():
    rng = np.random.default_rng(8)
    label = np.zeros((6, 6), np.uint8)
    label[:, 3:] = 2
    seg = rng.normal(size=(4, 6, 6)).astype(np.float32)
    w = rng.normal(scale=0.2, size=(2, 4, 3, 3)).astype(np.float32)
    b = np.zeros(2, np.float32)

    result = es.edge_loss(seg, label, w, b)
    assert result["valid_pixel_count"] == 36
    assert result["grad_weights"].shape == (2, 4, 3, 3)

    # One-coordinate finite difference against the analytic weight gradient.
    eps = 1e-3
    w_hi = w.copy()
    w_hi[0, 0, 1, 1] += eps
    w_lo = w.copy()
    w_lo[0, 0, 1, 1] -= eps
    hi = es.edge_loss(seg, label, w_hi, b)["loss"]
    lo = es.edge_loss(seg, label, w_lo, b)["loss"]
    numeric = (hi - lo) / (2 * eps)
    assert math.isclose(numeric, float(result["grad_weights"][0, 0, 1, 1]), rel_tol=2e-3)


def test_gradcheck_suite():
    errors = dict(es.gradcheck_suite(seed=5))
    assert max(errors.values()) < 1e-3
    assert any(name.startswith("edge_loss/c19") for name in errors)
    assert "combined_loss/all_params" in errors


def test_confusion_matrix_and_report():
    truth = np.zeros((8, 8), np.uint8)
    truth[:, 4:] = 13
    pred = truth.copy()
    pred[0, 0] = 13  # one road pixel predicted as car

    cm = es.ConfusionMatrix()
    cm.accumulate(pred, truth)
    ious = cm.iou_per_class()
    assert ious[0] == pytest.approx(31 / 32)
    assert ious[1] is None
    report = cm.report()
    assert set(report) >= {"per_class_iou", "miou_cls", "per_category_iou", "miou_cat"}
    assert json.dumps(report)  # fully JSON-serializable


def test_augmentation_pipeline():
    images = es.synth_dataset(3, 48, 19, seed=11)
    donors = []
    for image, label in images:
        for cls in (3, 4, 15, 16):
            donors += es.extract_instances(label, image, cls, min_pixels=64)
    assert donors, "synthetic corpus should donate rare instances"

    patch = es.transform_patch(donors[0], 1.0, True)
    assert patch.width == donors[0].width
    np.testing.assert_array_equal(patch.mask, donors[0].mask[:, ::-1])

    image, label = images[0]
    out_a = es.augment_sample(image, label, donors, {"pastes_per_image": 2}, seed=42)
    out_b = es.augment_sample(image, label, donors, {"pastes_per_image": 2}, seed=42)
    np.testing.assert_array_equal(out_a["label"], out_b["label"])
    np.testing.assert_array_equal(out_a["image"], out_b["image"])
    assert len(out_a["log"]) == 2

    rare_before = np.isin(label, (3, 4, 15, 16)).sum()
    rare_after = np.isin(out_a["label"], (3, 4, 15, 16)).sum()
    assert rare_after >= rare_before


def test_boundary_f1():
    truth = np.zeros((12, 12), np.uint8)
    truth[:, 6:] = 3
    pred = np.zeros((12, 12), np.uint8)
    pred[:, 7:] = 3
    assert es.boundary_f1(truth, truth, 0) == 1.0
    assert es.boundary_f1(pred, truth, 1) == 1.0
    assert es.boundary_f1(pred, truth, 0) < 1.0


def test_train_short_run_decreases_loss():
    dataset = es.synth_dataset(4, 16, 4, seed=3)
    result = es.train(
        {"epochs": 6, "crop": 16, "train_images": 4, "holdout_images": 2, "seed": 3},
        dataset,
    )
    assert len(result["epochs"]) == 6
    assert result["final_loss"] < result["initial_loss"]
