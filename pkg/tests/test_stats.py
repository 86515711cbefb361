import numpy as np
import pytest

from funqueplus.stats import integral_image, local_mean_var, local_stats, window_sum

from oracles import sliding_stats


def test_integral_image_small():
    ii = integral_image(np.array([[1.0, 2.0], [3.0, 4.0]]))
    assert ii.shape == (3, 3)
    assert ii[-1, -1] == 10.0
    assert not integral_image(np.zeros((5, 4))).any()


def test_integral_image_oracle(rng):
    x = rng.normal(size=(16, 16))
    ii = integral_image(x)
    for i in range(17):
        for j in range(17):
            s = 0.0
            for a in range(i):
                for b in range(j):
                    s += x[a, b]
            assert abs(ii[i, j] - s) <= 1e-9


def test_window_sum_cases(rng):
    x = rng.normal(size=(7, 7))
    assert window_sum(integral_image(x), 7).item() == pytest.approx(x.sum())
    np.testing.assert_allclose(window_sum(integral_image(np.full((10, 12), 3.0)), 4), 48.0)
    y = rng.normal(size=(12, 12))
    got = window_sum(integral_image(y), 3)
    for i in range(10):
        for j in range(10):
            assert got[i, j] == pytest.approx(y[i:i + 3, j:j + 3].sum(), abs=1e-12)
    np.testing.assert_array_equal(window_sum(integral_image(y), 3, stride=2), got[::2, ::2])
    with pytest.raises(ValueError):
        window_sum(integral_image(y), 13)


def test_local_stats_identity_and_constant(rng):
    x = rng.uniform(0, 255, (20, 20))
    st = local_stats(x, x, 9)
    np.testing.assert_array_equal(st.var_x, st.var_y)
    np.testing.assert_array_equal(st.cov_xy, st.var_x)
    c = local_stats(np.full((12, 12), 200.0), x[:12, :12], 3)
    assert not c.var_x.any()
    np.testing.assert_allclose(c.mu_x, 200.0)


@pytest.mark.parametrize("k", [3, 9])
def test_local_stats_vs_two_pass(rng, k):
    x = rng.uniform(0, 255, (20, 20))
    y = x + rng.normal(0, 10, x.shape)
    st = local_stats(x, y, k)
    for got, want in zip((st.mu_x, st.mu_y, st.var_x, st.var_y, st.cov_xy), sliding_stats(x, y, k)):
        np.testing.assert_allclose(got, want, atol=1e-6)
    mu, var = local_mean_var(x, k)
    np.testing.assert_allclose(var, st.var_x, atol=1e-9)
    np.testing.assert_allclose(mu, st.mu_x, atol=1e-9)


def test_large_offset_is_stable(rng):
    # global-mean shift keeps small variances accurate at large DC offsets
    x = 1e6 + rng.normal(0, 1e-2, (32, 32))
    st = local_stats(x, x, 9)
    want = sliding_stats(x - 1e6, x - 1e6, 9)[2]
    np.testing.assert_allclose(st.var_x, want, rtol=1e-6)
