# Copyright Contributors to the panogabor project
# SPDX-License-Identifier: Apache-2.0

import math

import numpy as np
import pytest

import pgf


def test_bank_parameters_for_unit_coefficient():
    rows = pgf.bank_parameters(1.0)
    assert len(rows) == 8
    f = math.pi / 2 * 2.0
    for i, row in enumerate(rows):
        assert row["frequency"] == pytest.approx(f, rel=1e-12)
        assert row["sigma"] == pytest.approx(math.pi / (f + 0.1), rel=1e-12)
        assert row["psi"] == 0.0
        assert row["theta"] == pytest.approx(math.pi * (i + 1) / 8, rel=1e-12)


def test_bank_kernels_shape_and_center():
    k = pgf.bank_kernels(0.0)
    assert k.shape == (8, 3, 3)
    sigma = math.pi / (math.pi / 2 + 0.1)
    center = 1.0 / (2 * math.pi * sigma * sigma)
    assert k[0, 1, 1] == pytest.approx(center, rel=1e-12)


def test_constant_map_has_zero_gradient():
    depth = np.full((16, 32), 2.5, dtype=np.float32)
    for axis in ("x", "y"):
        g = pgf.spherical_gradient(depth, axis)
        assert g.shape == (16, 32)
        assert np.all(g == 0.0)


def test_half_meter_error_berhu_value():
    pred = np.full((1, 1), 1.0, dtype=np.float32)
    gt = np.full((1, 1), 1.5, dtype=np.float32)
    assert pgf.berhu_loss(pred, gt) == 0.725


def test_metrics_on_identical_maps():
    rng = np.random.default_rng(7)
    gt = rng.uniform(0.5, 5.0, size=(8, 16)).astype(np.float32)
    report = pgf.depth_metrics(gt, gt)
    assert report["abs_rel"] == 0.0
    assert report["rmse"] == 0.0
    assert report["delta1"] == 100.0
    assert report["valid_pixels"] == 8 * 16


def test_pfm_round_trip(tmp_path):
    rng = np.random.default_rng(8)
    depth = rng.uniform(-2.0, 4.0, size=(6, 10)).astype(np.float32)
    path = str(tmp_path / "d.pfm")
    pgf.write_pfm(path, depth)
    assert np.array_equal(pgf.read_pfm(path), depth)


def test_tensor_file_round_trip(tmp_path):
    rng = np.random.default_rng(9)
    t = rng.standard_normal((2, 3, 4)).astype(np.float32)
    path = str(tmp_path / "t.pgtn")
    pgf.write_tensor(path, t)
    assert np.array_equal(pgf.read_tensor(path), t)


def test_filtering_is_shift_equivariant():
    rng = np.random.default_rng(10)
    img = rng.uniform(size=(16, 32)).astype(np.float32)
    base = pgf.latitude_adaptive_conv(img)
    for shift in (3, 11):
        shifted = pgf.latitude_adaptive_conv(np.roll(img, shift, axis=1))
        assert np.array_equal(shifted, np.roll(base, shift, axis=1))


def test_fit_reduces_loss():
    gt, init = pgf.make_synthetic_pair(16, 32)
    depth, trace = pgf.fit_depth(init, gt, steps=50, lr=0.1)
    assert depth.shape == (16, 32)
    assert trace[-1] < trace[0]


def test_gradient_check_passes():
    report = pgf.gradient_check()
    assert report["pass"]
    assert report["checked"] > 0
    assert report["max_abs_err"] < 1e-4


def test_fusion_weights_file_round_trip(tmp_path):
    path = str(tmp_path / "w.pgfw")
    pgf.init_weights_file(path, in_channels=2, height=8, out_channels=3, seed=5)
    rng = np.random.default_rng(11)
    a = rng.uniform(size=(2, 8, 16)).astype(np.float32)
    b = rng.uniform(size=(2, 8, 16)).astype(np.float32)
    fused = pgf.fuse(a, b, path)
    assert fused.shape == (3, 8, 16)
    assert np.all(np.isfinite(fused))


def test_projection_round_trip_keeps_equator_band():
    h, w = 64, 128
    lat = (np.pi / 2 - (np.arange(h) + 0.5) * np.pi / h)[:, None]
    lon = (-np.pi + (np.arange(w) + 0.5) * 2 * np.pi / w)[None, :]
    img = (np.sin(2 * lon) * np.cos(lat) + 0.4 * np.sin(lat)).astype(np.float32)
    faces = pgf.erp_to_cubemap(img, face_size=32)
    assert faces.shape == (6, 1, 32, 32)
    back = pgf.cubemap_to_erp(faces, h, w)
    band = slice(h // 4, 3 * h // 4)
    err = np.abs(back[0, band, :] - img[band, :]).max()
    assert err < 0.05
