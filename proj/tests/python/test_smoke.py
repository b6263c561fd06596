"""Smoke tests for the python bindings."""

import math

import numpy as np
import pytest

import atlantis


def test_version_string():
    assert isinstance(atlantis.__version__, str)


def test_compute_metrics_hand_case():
    pred = np.array([[2.0, 2.0]])
    gt = np.array([[1.0, 4.0]])
    m = atlantis.compute_metrics(pred, gt)
    assert m["rmse"] == pytest.approx(math.sqrt(2.5), rel=1e-12)
    assert m["a_rel"] == pytest.approx(0.75, rel=1e-12)
    assert m["si_log"] == pytest.approx(100.0 * math.log(2.0), rel=1e-12)
    assert m["delta1"] == 0.0
    assert m["n_valid"] == 2


def test_compute_metrics_with_mask():
    pred = np.array([[2.0, 9.0]])
    gt = np.array([[1.0, 3.0]])
    mask = np.array([[True, False]])
    m = atlantis.compute_metrics(pred, gt, mask=mask)
    assert m["n_valid"] == 1
    assert m["rmse"] == pytest.approx(1.0)


def test_normalize_and_conversion_endpoints():
    norm = atlantis.normalize_inverse_depth(np.array([[1.0, 2.0, 3.0]]))
    assert norm.tolist() == [[0.0, 0.5, 1.0]]

    metric = atlantis.inverse_to_metric(np.array([[0.0, 1.0]]))
    assert metric[0, 0] == 20.0
    assert metric[0, 1] == pytest.approx(0.3)


def test_depth_uncertainty_is_zero_for_equivariant_mock():
    rng = np.random.default_rng(7)
    image = rng.random((6, 8, 3))
    du = atlantis.depth_uncertainty(image)
    assert np.all(du == 0.0)
    assert np.all(atlantis.validity_mask(du, 0.15))


def test_biased_uncertainty_exceeds_threshold_at_edges():
    image = np.full((3, 2, 3), 0.5)
    du = atlantis.depth_uncertainty(image, ramp_amplitude=0.8)
    assert du[:, 0] == pytest.approx(0.16)
    mask = atlantis.validity_mask(du, 0.15)
    assert not mask.any()


def test_physics_round_trip():
    rng = np.random.default_rng(11)
    scene = np.clip(rng.random((16, 16, 3)) * 0.5 + 0.2, 0.0, 1.0)
    scene -= scene.mean(axis=(0, 1), keepdims=True) - 0.45  # gray-world neutral
    depth = rng.random((16, 16)) * 5.0 + 0.5
    beta = (0.4, 0.4, 0.4)
    b_inf = (0.2, 0.2, 0.2)
    wet = atlantis.synthesize_underwater(scene, depth, beta, beta, b_inf)
    dry = atlantis.recover_scene(wet, depth, b_inf, beta, (0, 0, 0), beta, mode="known")
    assert np.abs(dry - scene).mean() <= 0.02


def test_estimate_backscatter_recovers_parameters():
    rng = np.random.default_rng(13)
    depth = rng.random((24, 24)) * 8.0 + 0.5
    black = np.zeros((24, 24, 3))
    wet = atlantis.synthesize_underwater(black, depth, (0.6,) * 3, (0.5,) * 3, (0.2,) * 3)
    fit = atlantis.estimate_backscatter(wet, depth, n_bins=10, percentile=0.25)
    assert fit["b_inf"][0] == pytest.approx(0.2, abs=1e-4)
    assert fit["beta_b"][0] == pytest.approx(0.5, abs=1e-3)


def test_water_presets():
    presets = atlantis.water_type_presets()
    assert len(presets) == 10
    names = {p["name"] for p in presets}
    assert "oceanic-I" in names


def test_seed_schedule_is_deterministic():
    a = atlantis.seed_schedule(1, "depth", "prompt", 0)
    assert a == atlantis.seed_schedule(1, "depth", "prompt", 0)
    assert a != atlantis.seed_schedule(1, "depth", "prompt", 1)


def test_demo_pipeline(tmp_path):
    assert atlantis.run_demo_pipeline(str(tmp_path / "work"), seed=5) == 0
    assert (tmp_path / "work" / "dataset.jsonl").exists()


def test_cli_entry(tmp_path):
    code = atlantis.run_cli(["demo", "--work", str(tmp_path / "w"), "--seed", "2"])
    assert code == 0
    assert atlantis.run_cli(["no-such-command"]) == 2
