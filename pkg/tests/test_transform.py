import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from funqueplus.csf import SubbandWeights, li_subband_weights
from funqueplus.errors import ConfigError, InputTooSmallError
from funqueplus.transform import (TransformConfig, crop_to_multiple, haar_dwt, haar_pyramid, sast_downscale,
                                  sast_factor, unified_transform)

from oracles import naive_haar_pyramid


@pytest.mark.parametrize("dh,factor", [(3.0, 2), (1.618, 1), (4.9, 3), (1.0, 1)])
def test_sast_factor(dh, factor):
    assert sast_factor(dh) == factor


def test_sast_downscale():
    assert sast_downscale(np.array([[0.0, 2.0], [4.0, 6.0]]), 2).tolist() == [[3.0]]
    np.testing.assert_array_equal(sast_downscale(np.full((6, 6), 5.0), 2), np.full((3, 3), 5.0))


def test_sast_block_mean_oracle(rng):
    x = rng.uniform(0, 255, (8, 8))
    out = sast_downscale(x, 2)
    for i in range(4):
        for j in range(4):
            s = 0.0
            for di in range(2):
                for dj in range(2):
                    s += x[2 * i + di, 2 * j + dj]
            assert out[i, j] == pytest.approx(s / 4, abs=1e-12)


def test_haar_hand_cases():
    b = haar_dwt(np.ones((2, 2)))
    assert (b.A.item(), b.H.item(), b.V.item(), b.D.item()) == (2.0, 0.0, 0.0, 0.0)
    b = haar_dwt(np.array([[2.0, 0.0], [0.0, 0.0]]))
    assert (b.A.item(), b.H.item(), b.V.item(), b.D.item()) == (1.0, 1.0, 1.0, 1.0)


@settings(max_examples=40, deadline=None)
@given(arrays(np.float64, (8, 10), elements=st.floats(-1e3, 1e3)))
def test_haar_energy_per_block(x):
    b = haar_dwt(x)
    blocks = (x.reshape(4, 2, 5, 2) ** 2).sum(axis=(1, 3))
    np.testing.assert_allclose(b.A ** 2 + b.H ** 2 + b.V ** 2 + b.D ** 2, blocks, rtol=1e-9, atol=1e-6)


def test_pyramid_shapes(rng):
    pyr = haar_pyramid(rng.normal(size=(32, 48)), 3)
    assert [pyr[k].A.shape for k in (1, 2, 3)] == [(16, 24), (8, 12), (4, 6)]
    assert pyr.band(2, "D").shape == (8, 12)
    with pytest.raises(IndexError):
        pyr[0]


def test_crop_and_too_small():
    assert crop_to_multiple(np.zeros((37, 42)), 2).shape == (36, 40)
    with pytest.raises(InputTooSmallError):
        crop_to_multiple(np.zeros((3, 40)), 2)


def test_constant_plane_has_no_detail():
    for csf in ("LiSW", "NadenauSW", "LarsonSW", "WatsonSW", None):
        pyr = unified_transform(np.full((64, 64), 90.0), TransformConfig(3, csf))
        for lam in (1, 2, 3):
            for band in "HVD":
                assert not pyr.band(lam, band).any()


def test_unit_weights_equal_plain_haar(rng, monkeypatch):
    import funqueplus.transform as tr
    x = rng.uniform(0, 255, (32, 32))
    ones = SubbandWeights({(lam, b): 1.0 for lam in (1, 2) for b in "AHVD"})
    monkeypatch.setattr(tr, "resolve_csf", lambda cfg, ch, c=None: ones)
    pyr = unified_transform(x, TransformConfig(2, "LiSW"))
    ref = haar_pyramid(x, 2)
    for lam in (1, 2):
        for b in "AHVD":
            np.testing.assert_array_equal(pyr.band(lam, b), ref.band(lam, b))


def test_li_weighted_matches_naive_oracle(rng):
    x = rng.uniform(0, 255, (32, 32))
    pyr = unified_transform(x, TransformConfig(2, "LiSW"))
    w = li_subband_weights(2)
    naive = naive_haar_pyramid(x, 2)
    for lam in (1, 2):
        for b in "AHVD":
            np.testing.assert_allclose(pyr.band(lam, b), naive[lam][b] * w.get(lam, b), atol=1e-12)


def test_spatial_csf_keeps_dc(rng):
    x = np.full((32, 32), 50.0)
    for csf in ("NadenauSpat",):
        pyr = unified_transform(x, TransformConfig(1, csf))
        np.testing.assert_allclose(pyr[1].A, 100.0, rtol=1e-12)


def test_sast_applied_before_transform(rng):
    x = rng.uniform(0, 255, (64, 64))
    pyr = unified_transform(x, TransformConfig(2, None, use_sast=True))
    assert pyr[1].A.shape == (16, 16)
    np.testing.assert_allclose(pyr[1].A, haar_dwt(sast_downscale(x, 2)).A)


def test_config_validation_and_round_trip():
    with pytest.raises(ConfigError):
        TransformConfig(levels=5)
    with pytest.raises(ConfigError):
        TransformConfig(csf="Nope")
    cfg = TransformConfig(3, "WatsonSW", True, 2.5)
    assert TransformConfig.from_dict(cfg.to_dict()) == cfg
    assert TransformConfig.from_dict({"levels": 2, "csf": None, "sast": True}).use_sast
