import math

import numpy as np
import pytest
from scipy.ndimage import gaussian_filter

from funqueplus.features.auxiliary import (aux_features, blur_edge, delta_feature, gradient_energies, mad,
                                           mad_features, tl_blur, tl_sai, top_mean)
from funqueplus.transform import haar_pyramid


def _texture(rng, shape=(64, 64)):
    return 128 + 60 * gaussian_filter(rng.normal(size=shape), 1.0) / 0.28


def test_tl_sai_direct_formula(rng):
    p = haar_pyramid(_texture(rng), 2)
    b = p[2]
    want = np.std(np.sqrt(b.H ** 2 + b.V ** 2)) ** 0.25
    assert tl_sai(p, 2) == pytest.approx(want, abs=1e-9)
    assert tl_sai(haar_pyramid(np.full((16, 16), 9.0), 1), 1) == 0.0
    assert tl_sai(haar_pyramid(rng.normal(size=(16, 16)), 1), 1) >= 0.0


def test_gradient_energy_filters(rng):
    p = haar_pyramid(_texture(rng, (16, 16)), 1)
    h = p[1].H
    _, e2 = gradient_energies(p, 1)
    # backward difference (h[j-1] - h[j]) / sqrt(2); reflection zeroes the first column
    hh = (h[:, :-1] - h[:, 1:]) / math.sqrt(2)
    v = p[1].V
    vv = (v[:-1, :] - v[1:, :]) / math.sqrt(2)
    np.testing.assert_allclose(e2[1:, 1:], hh[1:, :] ** 2 + vv[:, 1:] ** 2, rtol=1e-12)
    np.testing.assert_allclose(e2[0, 1:], hh[0] ** 2, rtol=1e-12)


def test_tl_blur(rng):
    assert tl_blur(haar_pyramid(np.zeros((16, 16)), 1), 1) == 0.0
    x = _texture(rng)
    p = haar_pyramid(x, 1)
    assert tl_blur(haar_pyramid(3.0 * x, 1), 1) == pytest.approx(tl_blur(p, 1), rel=1e-12)
    e1, e2 = gradient_energies(p, 1)
    n = math.ceil(0.01 * e1.size)
    want = np.sort(e2.ravel())[-n:].mean() / np.sort(e1.ravel())[-n:].mean()
    assert tl_blur(p, 1) == pytest.approx(want, rel=1e-12)
    assert top_mean(np.array([1.0, 5.0, 3.0])) == 5.0


def test_delta_features(rng):
    x = _texture(rng)
    px = haar_pyramid(x, 2)
    py = haar_pyramid(gaussian_filter(x, 1.5), 2)
    for f in ("TL-SAI", "TL-Blur"):
        assert delta_feature(f, px, px, 1) == 0.0
        assert delta_feature(f, px, py, 1) == -delta_feature(f, py, px, 1)
    assert delta_feature("TL-SAI", px, py, 1) > 0


def test_mad_variants(rng):
    a0, a1 = rng.normal(size=(8, 8)), rng.normal(size=(8, 8))
    assert mad("Ref", a0, a0, None, None) == 0.0
    assert mad("Cross", None, a1, None, a1) == 0.0
    assert mad("Cross", None, a1, None, a1 - 2.5) == pytest.approx(2.5)
    assert mad("Dis", None, None, a0, a1) == pytest.approx(np.abs(a1 - a0).mean())
    with pytest.raises(ValueError):
        mad("Both", a0, a0, a0, a0)
    p = haar_pyramid(rng.normal(size=(16, 16)), 1)
    first = mad_features(p, p, None, None, 1)
    assert math.isnan(first["MAD-Ref@1"]) and first["MAD@1"] == 0.0


def test_blur_edge(rng):
    x = _texture(rng)
    px = haar_pyramid(x, 1)
    assert blur_edge(px, px, 1) == (0.0, 0.0)
    blur, edge = blur_edge(px, haar_pyramid(0.5 * x, 1), 1)
    assert blur > 0 and edge == 0.0
    py = haar_pyramid(x + rng.normal(0, 10, x.shape), 1)
    assert blur_edge(px, py, 1)[0] == blur_edge(py, px, 1)[1]


def test_aux_features_keys(rng):
    p = haar_pyramid(_texture(rng), 2)
    out = aux_features(p, p, p, p)
    assert set(out) == {f"{n}@{lam}" for lam in (1, 2) for n in
                        ("dTL-SAI", "dTL-Blur", "MAD", "MAD-Ref", "MAD-Dis", "Blur", "Edge")}
    assert all(v == 0.0 for v in out.values())
