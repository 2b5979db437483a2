import os

import numpy as np
import pytest

import hsisr

CRF = os.environ.get("HSISR_CRF_ASSET")


def random_cube(bands, rows, cols, seed=0):
    return np.random.default_rng(seed).random((bands, rows, cols), dtype=np.float32)


def test_cube_round_trip(tmp_path):
    cube = random_cube(31, 8, 9)
    hsisr.save_cube(cube, tmp_path / "c.hdr")
    back = hsisr.load_cube(tmp_path / "c.hdr")
    assert back.shape == (31, 8, 9)
    assert np.array_equal(back, cube)


def test_degrade_and_resize_shapes():
    hr = random_cube(5, 32, 32)
    lr = hsisr.degrade(hr, 4)
    assert lr.shape == (5, 8, 8)
    assert hsisr.bicubic_resize(lr, 32, 32).shape == (5, 32, 32)
    with pytest.raises(ValueError):
        hsisr.degrade(random_cube(5, 30, 30), 4)


def test_zero_tail_network_is_bicubic():
    net = hsisr.SrNet(bands=31, tau=4, feature_width=8)
    lr = random_cube(31, 8, 8, seed=1)
    out = net.forward_hsi(lr)
    assert out.shape == (31, 32, 32)
    assert np.max(np.abs(out - hsisr.bicubic_resize(lr, 32, 32))) < 1e-6
    assert net.forward_rgb(random_cube(3, 8, 8)).shape == (3, 32, 32)


def test_checkpoint_round_trip(tmp_path):
    net = hsisr.SrNet(bands=31, feature_width=8, zero_tail=False, seed=3)
    net.save(tmp_path / "ck")
    again = hsisr.SrNet.from_checkpoint(tmp_path / "ck")
    lr = random_cube(31, 4, 4)
    assert np.array_equal(net.forward_hsi(lr), again.forward_hsi(lr))
    assert again.parameter_count == net.parameter_count


def test_metrics():
    ref = random_cube(5, 16, 16, seed=2)
    assert hsisr.rmse(ref, ref) == 0.0
    assert hsisr.mpsnr(ref, ref) == 120.0
    assert hsisr.sam(ref, 2 * ref) < 1e-2
    report = hsisr.evaluate_metrics(ref, np.clip(ref + 0.01, 0, 1), 4)
    assert set(report) == {"rmse", "cc", "mpsnr", "mssim", "ergas", "sam"}
    assert 0.0 < report["rmse"] <= 0.01 + 1e-6


def test_augment_and_grouping():
    assert hsisr.group_starts(31, 8, 2) == [0, 6, 12, 18, 23]
    rgb = random_cube(3, 4, 4)
    assert np.array_equal(hsisr.spectral_interpolate(rgb, 3), rgb)
    lr, hr = random_cube(31, 4, 4), random_cube(31, 16, 16)
    lr1, hr1 = hsisr.spectral_mixup(lr, hr, alpha=1.0)
    assert np.array_equal(lr1, lr) and np.array_equal(hr1, hr)


@pytest.mark.skipif(CRF is None, reason="no CRF table configured")
def test_projection_of_flat_cube():
    rgb = hsisr.project_to_rgb(np.full((31, 2, 2), 0.3, np.float32), CRF)
    assert rgb.shape == (3, 2, 2)
    assert np.allclose(rgb, 0.3, atol=1e-6)


def test_cli_in_process(tmp_path):
    assert hsisr.run_cli(["synth", "--out", str(tmp_path / "d"), "--labeled", "1", "--unlabeled", "0",
                          "--test", "1", "--rgb", "0", "--edge", "16"]) == 0
    assert (tmp_path / "d" / "manifest.json").exists()
    assert hsisr.run_cli(["viz", "--ref", "missing.hdr", "--est", "missing.hdr"]) != 0
