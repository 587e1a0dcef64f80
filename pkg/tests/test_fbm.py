import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from frachaos import fbm
from frachaos import lambda_space as ls
from frachaos.errors import InvalidArgument
from frachaos.fraccalc import FracOrder
from frachaos.grid import SampledFunction, make_grid

H = 0.3
ORDER = FracOrder.from_hurst(H)


@pytest.fixture(scope="module")
def grid():
    return make_grid(1.0, 64)


@pytest.fixture(scope="module")
def batch(grid):
    return fbm.simulate(H, grid, 10_000, seed=3)


def zscore(x, target):
    return abs(np.mean(x) - target) / (np.std(x, ddof=1) / math.sqrt(len(x)))


@given(st.floats(0.01, 0.49), st.floats(0.0, 5.0), st.floats(0.0, 5.0))
def test_covariance_symmetry_and_diagonal(h, t, s):
    assert fbm.covariance(h, t, s) == pytest.approx(fbm.covariance(h, s, t))
    assert fbm.covariance(h, t, t) == pytest.approx(t ** (2 * h))
    assert fbm.covariance(h, t, 0.0) == pytest.approx(0.0, abs=1e-15)


def test_covariance_rejects_h_half():
    with pytest.raises(InvalidArgument):
        fbm.covariance(0.5, 1.0, 1.0)


def test_paths_start_at_zero_and_var_one(batch):
    assert np.all(batch.values[:, 0] == 0.0)
    b1 = batch.values[:, -1]
    se = np.std(b1**2, ddof=1) / math.sqrt(len(b1))
    assert abs(np.mean(b1**2) - 1.0) <= 3 * se


def test_covariance_probe_h02():
    g = make_grid(1.0, 10)
    b = fbm.simulate(0.2, g, 10_000, seed=11)
    prod = b.values[:, 3] * b.values[:, 7]
    assert zscore(prod, fbm.covariance(0.2, 0.3, 0.7)) <= 3


def test_reproducible_bytes(grid):
    a = fbm.simulate(H, grid, 50, seed=9)
    b = fbm.simulate(H, grid, 50, seed=9)
    assert a.values.tobytes() == b.values.tobytes()
    c = fbm.simulate(H, grid, 50, seed=10)
    assert not np.array_equal(a.values, c.values)


def test_thread_cap_does_not_change_paths(grid, monkeypatch):
    monkeypatch.setattr(fbm, "_CHUNK", 16)
    monkeypatch.setenv("FRACHAOS_THREADS", "1")
    a = fbm.simulate(H, grid, 100, seed=4)
    monkeypatch.setenv("FRACHAOS_THREADS", "4")
    b = fbm.simulate(H, grid, 100, seed=4)
    assert a.values.tobytes() == b.values.tobytes()


def test_bad_thread_cap(monkeypatch):
    monkeypatch.setenv("FRACHAOS_THREADS", "many")
    with pytest.raises(InvalidArgument):
        fbm.worker_count()


def test_covariance_error_shrinks_with_paths(grid):
    r = fbm.covariance(H, grid.nodes[1:, None], grid.nodes[None, 1:])
    errs = []
    for n in (400, 6400):
        b = fbm.simulate(H, grid, n, seed=21).values[:, 1:]
        errs.append(np.max(np.abs(b.T @ b / n - r)))
    assert errs[1] < errs[0] / 2


def test_wiener_integral_of_indicator_is_path_value(grid, batch):
    e = ls.indicator_element(0.5, ORDER, grid)
    np.testing.assert_allclose(fbm.wiener_integral(batch, e), batch.values[:, 32], atol=1e-12)
    z = ls.zero_element(ORDER, grid)
    assert np.all(fbm.wiener_integral(batch, z) == 0)


def test_wiener_integral_isometry(grid, batch):
    for k in range(3):
        phi = SampledFunction(grid, np.cos((k + 1) * grid.nodes) + 0.3 * k)
        e = ls.from_phi(phi, ORDER)
        x = fbm.wiener_integral(batch, e)
        assert np.var(x) == pytest.approx(ls.inner(e, e), rel=0.05)


def test_hermite_low_orders():
    x = np.linspace(-3, 3, 13)
    np.testing.assert_allclose(fbm.hermite(0, x), 1.0)
    np.testing.assert_allclose(fbm.hermite(1, x), x)
    np.testing.assert_allclose(fbm.hermite(2, x), (x**2 - 1) / 2)
    with pytest.raises(InvalidArgument):
        fbm.hermite(fbm.HERMITE_CAP + 1, x)


@given(st.floats(-1.0, 1.0), st.floats(-3.0, 3.0))
def test_hermite_generating_function(a, x):
    total = sum(a**m * float(fbm.hermite(m, x)) for m in range(41))
    assert total == pytest.approx(math.exp(a * x - a * a / 2), abs=1e-10, rel=1e-10)


def test_power_integral_low_orders(grid, batch):
    e = ls.from_phi(SampledFunction(grid, 1 + grid.nodes), ORDER)
    b = fbm.wiener_integral(batch, e)
    nsq = ls.inner(e, e)
    np.testing.assert_allclose(fbm.multiple_integral_power(batch, e, 1), b)
    np.testing.assert_allclose(fbm.multiple_integral_power(batch, e, 2), b**2 - nsq, atol=1e-12)
    # n! ||h||^n H_n(B / ||h||)
    n = 5
    direct = math.factorial(n) * nsq ** (n / 2) * fbm.hermite(n, b / math.sqrt(nsq))
    np.testing.assert_allclose(fbm.multiple_integral_power(batch, e, n), direct, rtol=1e-10, atol=1e-10)


def test_third_order_moments(grid, batch):
    e = ls.indicator_element(1.0, ORDER, grid) * 0.8
    target = 6 * ls.inner(e, e) ** 3
    i3 = fbm.multiple_integral_power(batch, e, 3)
    assert zscore(i3, 0.0) <= 3
    assert zscore(i3**2, target) <= 3
    # I_3**2 is heavy tailed: at 10^4 paths one standard error is about 10%,
    # so the 10% tolerance is checked where it is a 3-sigma statement
    big = fbm.simulate(H, grid, 100_000, seed=5)
    assert np.mean(fbm.multiple_integral_power(big, e, 3) ** 2) == pytest.approx(target, rel=0.10)


def test_orthogonality_across_orders(grid, batch):
    g = ls.indicator_element(0.5, ORDER, grid)
    h = ls.indicator_element(1.0, ORDER, grid)
    for m, n in ((1, 2), (1, 3), (2, 3), (2, 4)):
        prod = fbm.multiple_integral_power(batch, g, m) * fbm.multiple_integral_power(batch, h, n)
        assert zscore(prod, 0.0) <= 3.5
    for m in (1, 2, 3):
        prod = fbm.multiple_integral_power(batch, g, m) * fbm.multiple_integral_power(batch, h, m)
        expect = math.factorial(m) * ls.inner(g, h) ** m
        assert np.mean(prod) == pytest.approx(expect, rel=0.10)


def test_sym_integral_collapses_to_power(grid, batch):
    e = ls.indicator_element(0.75, ORDER, grid)
    np.testing.assert_allclose(
        fbm.multiple_integral_sym(batch, [e, e, e]), fbm.multiple_integral_power(batch, e, 3), atol=1e-12
    )


def test_sym_integral_two_factors(grid, batch):
    g = ls.indicator_element(0.25, ORDER, grid)
    h = ls.from_phi(SampledFunction(grid, np.exp(-grid.nodes)), ORDER)
    got = fbm.multiple_integral_sym(batch, [g, h])
    direct = fbm.wiener_integral(batch, g) * fbm.wiener_integral(batch, h) - ls.inner(g, h)
    np.testing.assert_allclose(got, direct, atol=1e-10)


def test_sym_integral_zero_factor(grid, batch):
    g = ls.indicator_element(0.25, ORDER, grid)
    assert np.all(fbm.multiple_integral_sym(batch, [g, ls.zero_element(ORDER, grid)]) == 0)


def test_polarization_cap(grid, batch):
    g = ls.indicator_element(0.25, ORDER, grid)
    with pytest.raises(InvalidArgument):
        fbm.multiple_integral_sym(batch, [g] * (fbm.POLARIZATION_CAP + 1))


def test_export_csv(tmp_path, grid):
    b = fbm.simulate(H, grid, 3, seed=0)
    n = fbm.export_csv(b, tmp_path / "p.csv")
    lines = (tmp_path / "p.csv").read_text().splitlines()
    assert n == grid.size
    assert lines[0] == "t,path_0,path_1,path_2"
    assert float(lines[-1].split(",")[2]) == b.values[1, -1]
