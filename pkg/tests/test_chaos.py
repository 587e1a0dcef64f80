import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from frachaos import chaos, fbm
from frachaos import lambda_space as ls
from frachaos.errors import InvalidArgument
from frachaos.fraccalc import FracOrder
from frachaos.grid import SampledFunction, make_grid

H = 0.3
ORDER = FracOrder.from_hurst(H)


@pytest.fixture(scope="module")
def grid():
    return make_grid(1.0, 64)


def wick(grid, sigma=0.5, a=0.0, n_max=12, eta0=1.0):
    return chaos.ChaosSolution(
        SampledFunction.constant(grid, a), ls.constant_element(sigma, ORDER, grid), chaos.EtaSpec.deterministic(eta0), n_max
    )


def first_chaos(grid, n_max=8, a=0.4, b_zero=False):
    x = grid.nodes
    e1 = ls.from_phi(SampledFunction(grid, np.cos(2 * x)), ORDER)
    b = ls.zero_element(ORDER, grid) if b_zero else ls.from_phi(SampledFunction(grid, 1.0 + 0.5 * x), ORDER)
    eta = chaos.EtaSpec({0: ((0.5, ()),), 1: ((1.0, (e1,)),), 2: ((0.3, (e1, e1)),)})
    return chaos.ChaosSolution(SampledFunction(grid, a - 0.5 * x), b, eta, n_max), e1


# permanents ---------------------------------------------------------------


def test_permanent_small_cases():
    assert chaos.permanent(np.eye(5, dtype=int)) == 1
    assert chaos.permanent(np.array([[1, 2], [3, 4]])) == 10
    assert chaos.permanent(np.zeros((0, 0))) == 1


@given(st.integers(0, 2**32 - 1), st.integers(1, 7))
def test_permanent_integer_exact(seed, n):
    m = np.random.default_rng(seed).integers(-9, 10, size=(n, n))
    assert chaos.permanent(m) == chaos.permanent_bruteforce(m)


@given(st.integers(0, 2**32 - 1), st.integers(1, 6))
def test_permanent_float(seed, n):
    m = np.random.default_rng(seed).normal(size=(n, n))
    assert chaos.permanent(m) == pytest.approx(chaos.permanent_bruteforce(m), rel=1e-9, abs=1e-9)


def test_permanent_rank_one_gram():
    g = np.full((6, 6), 0.7)
    assert chaos.permanent(g) == pytest.approx(math.factorial(6) * 0.7**6)


def test_permanent_cap():
    with pytest.raises(InvalidArgument):
        chaos.permanent(np.ones((13, 13)))


# kernels and moments -------------------------------------------------------


def test_level_zero_kernel(grid):
    sol = wick(grid, a=0.8, eta0=1.5)
    for t in (0.0, 0.5, 1.0):
        assert chaos.kernel_norm_sq(sol, 0, t) == pytest.approx((1.5 * math.exp(0.8 * t)) ** 2, rel=1e-12)


def test_time_zero_kernels_are_eta(grid):
    sol, _ = first_chaos(grid)
    norms = sol.eta.level_norms(sol.constants)
    for n in range(4):
        assert chaos.kernel_norm_sq(sol, n, 0.0) == pytest.approx(norms[n] ** 2 if n < len(norms) else 0.0, abs=1e-14)


def test_wick_levels_closed_form():
    g = make_grid(1.0, 4096)
    sigma, t = 0.5, 0.75
    sol = wick(g, sigma)
    for n in range(7):
        got = math.factorial(n) * chaos.kernel_norm_sq(sol, n, t)
        exact = sigma ** (2 * n) * t ** (2 * H * n) / math.factorial(n)
        assert got == pytest.approx(exact, rel=0.02)


@pytest.mark.parametrize("t", [0.25, 0.5, 1.0])
def test_geometric_series_identity(grid, t):
    sol = wick(grid, 0.9, a=0.6, n_max=8, eta0=1.3)
    bt = ls.restrict(sol.diffusion_b, t)
    bsq = ls.inner(bt, bt)
    base = (1.3 * sol.growth(t)) ** 2
    for n in range(9):
        got = math.factorial(n) * chaos.kernel_norm_sq(sol, n, t)
        assert got == pytest.approx(bsq**n / math.factorial(n) * base, rel=1e-10)


def test_single_tensor_term_norm(grid):
    h = ls.from_phi(SampledFunction(grid, 1 + grid.nodes**2), ORDER)
    c = 0.7
    for n in (1, 2, 4):
        eta = chaos.EtaSpec({0: ((0.0, ()),), n: ((c, (h,) * n),)})
        sol = chaos.ChaosSolution(SampledFunction.constant(grid, 0.0), ls.zero_element(ORDER, grid), eta, n)
        assert chaos.kernel_norm_sq(sol, n, 1.0) == pytest.approx(c * c * ls.inner(h, h) ** n, rel=1e-12)


def test_norm_bound(grid):
    sol, _ = first_chaos(grid)
    eta_norms = sol.eta.level_norms(sol.constants)
    eta_norms = np.concatenate([eta_norms, np.zeros(9)])
    for t in (0.25, 0.75, 1.0):
        bt = ls.restrict(sol.diffusion_b, t)
        bn = math.sqrt(ls.inner(bt, bt))
        for n in range(9):
            bound = sol.growth(t) * sum(bn ** (n - j) / math.factorial(n - j) * eta_norms[j] for j in range(n + 1))
            assert math.sqrt(chaos.kernel_norm_sq(sol, n, t)) <= bound * (1 + 1e-10)


def test_mean_cases(grid):
    assert chaos.mean(wick(grid), 0.75) == 1.0
    assert chaos.mean(wick(grid, a=1.0), 1.0) == pytest.approx(math.e, rel=1e-12)


@pytest.mark.parametrize("t", [0.25, 0.5, 1.0])
def test_wick_second_moment(grid, t):
    m = chaos.second_moment(wick(grid), t)
    assert m.value == pytest.approx(math.exp(0.25 * t ** (2 * H)), rel=1e-6)
    assert m.tail_flag


def test_second_moment_without_noise(grid):
    sol, _ = first_chaos(grid, b_zero=True)
    e_eta2 = sol.eta.second_moment(sol.constants)
    for t in (0.0, 0.5, 1.0):
        assert chaos.second_moment(sol, t).value == pytest.approx(e_eta2 * sol.growth(t) ** 2, rel=1e-12)


def test_evaluate_without_noise(grid):
    sol, e1 = first_chaos(grid, b_zero=True)
    paths = fbm.simulate(H, grid, 200, seed=2)
    b = fbm.wiener_integral(paths, e1)
    eta = 0.5 + b + 0.3 * (b**2 - ls.inner(e1, e1))
    for t in (0.0, 0.5, 1.0):
        np.testing.assert_allclose(chaos.evaluate_solution(sol, paths, t)[0], eta * sol.growth(t), rtol=1e-10, atol=1e-12)


def test_wick_pathwise(grid):
    sol = wick(grid)
    paths = fbm.simulate(H, grid, 500, seed=8)
    x, levels = chaos.evaluate_solution(sol, paths, 1.0)
    exact = np.exp(0.5 * paths.values[:, -1] - 0.125)
    assert np.max(np.abs(x / exact - 1)) < 1e-6
    assert levels.shape == (13, 500)


def test_moment_identities_by_monte_carlo(grid):
    paths = fbm.simulate(H, grid, 100_000, seed=31)
    for sol in (wick(grid, n_max=8), first_chaos(grid)[0]):
        x, _ = chaos.evaluate_solution(sol, paths, 1.0)
        assert np.mean(x**2) == pytest.approx(chaos.second_moment(sol, 1.0).value, rel=0.05)
        z = abs(np.mean(x) - chaos.mean(sol, 1.0)) / (np.std(x, ddof=1) / math.sqrt(len(x)))
        assert z <= 3


def test_kernel_dump(tmp_path, grid):
    sol = wick(grid, n_max=3)
    rows = chaos.dump_kernels(sol.slice(1.0), tmp_path / "k.csv")
    lines = (tmp_path / "k.csv").read_text().splitlines()
    assert lines[0] == "n,term_index,coefficient,j,eta_level"
    assert rows == 4
    assert lines[3] == "2,0,0.5,2,0"


# recursion -----------------------------------------------------------------


def test_recursion_first_level_deterministic():
    g = make_grid(1.0, 256)
    sol = wick(g, 0.8)
    assert chaos.kernel_recursion_check(sol, 1, 0.5).max_residual < 1e-10


def test_recursion_without_noise():
    g = make_grid(1.0, 1024)
    sol, _ = first_chaos(g, n_max=3, b_zero=True)
    for n in (1, 2):
        assert chaos.kernel_recursion_check(sol, n, 0.75).max_residual < 1e-4


def test_recursion_first_chaos_eta():
    g = make_grid(1.0, 1024)
    sol, _ = first_chaos(g, n_max=3)
    assert chaos.kernel_recursion_check(sol, 2, 0.75).max_residual <= 5e-2


# constants and conditions --------------------------------------------------


def test_bound_constants(grid):
    order = FracOrder(0.25)
    b = ls.constant_element(0.5, order, grid)
    c = chaos.bound_constants(order, 3.0, 1.0, SampledFunction.constant(grid, 0.0), b)
    assert c.A == 0
    assert order.alpha / math.gamma(1 - order.alpha) * c.B_p == pytest.approx(c.B_T_p, rel=1e-12)
    assert all(0 < v < math.inf for v in (c.B_T_p, c.B_H_p_t, c.B_p))
    c2 = chaos.bound_constants(order, 3.0, 1.0, SampledFunction.constant(grid, 1.0), b)
    assert 0 < c2.A < math.inf


@pytest.fixture(scope="module")
def taxonomy():
    return chaos_taxonomy()


def chaos_taxonomy():
    from frachaos.acceptance import condition_taxonomy

    return condition_taxonomy(make_grid(1.0, 256))


def test_condition_taxonomy(taxonomy):
    assert taxonomy["finite"] == "pass"
    assert taxonomy["exponential"] == "pass"
    assert taxonomy["critical_existence"] == "fail"
    assert taxonomy["critical_continuity"] == "pass"


def test_continuity_exponent_example():
    v = chaos.continuity_exponent(FracOrder(0.25), 3.0, 2.0)
    assert v == pytest.approx((1 + math.exp(4)) / 12)
    assert v > 1


def test_finite_chaos_passes_continuity(grid):
    e = ls.from_phi(SampledFunction(grid, 1 + grid.nodes), ORDER)
    eta = chaos.EtaSpec.tensor_powers([1.0, 0.5], e)
    rep = chaos.check_continuity_condition(eta, 2.0, ORDER, 3.0)
    assert rep.verdict == "pass" and rep.exponent_check


def test_small_theta_fails_exponent(grid):
    rep = chaos.check_continuity_condition(chaos.EtaSpec.deterministic(1.0), -3.0, ORDER, 3.0)
    assert rep.verdict == "fail" and not rep.exponent_check


def test_series_verdicts():
    k = np.arange(60, dtype=float)
    assert chaos.series_verdict(-k)[0] == "pass"
    assert chaos.series_verdict(-2 * np.log1p(k))[0] == "pass"
    assert chaos.series_verdict(np.zeros(60))[0] == "fail"
    assert chaos.series_verdict(-0.2 * np.log1p(k))[0] == "fail"
    # harmonic decay sits on the Raabe boundary k (1 - r) = 1
    assert chaos.series_verdict(-np.log1p(k))[0] == "inconclusive"
    assert chaos.series_verdict(np.full(60, -np.inf))[0] == "pass"


def test_report_text_starts_with_verdict(taxonomy, grid):
    rep = chaos.check_existence_condition(chaos.EtaSpec.deterministic(1.0), ORDER, 2.5, ls.constant_element(1.0, ORDER, grid))
    lines = rep.lines("existence")
    assert lines[0] == "verdict: pass"


def test_sup_reports_argmax(grid):
    sup = chaos.sup_b(ls.constant_element(2.0, ORDER, grid), 2.5)
    assert sup.value == pytest.approx(np.max(sup.values))
    assert sup.t_argmax < grid.horizon
    assert len(sup.t_grid) <= chaos.SUP_POINTS


# Hölder regularity -----------------------------------------------------------


def test_holder_constant_solution(grid):
    sol = chaos.ChaosSolution(
        SampledFunction.constant(grid, 0.0), ls.zero_element(ORDER, grid), chaos.EtaSpec.deterministic(2.0), 4
    )
    paths = fbm.simulate(H, grid, 100, seed=0)
    est = chaos.holder_exponent_estimate(sol, 2.0, paths)
    assert est.delta == math.inf
    assert np.all(est.moments == 0)


def test_holder_wick_case():
    g = make_grid(1.0, 256)
    sol = wick(g, n_max=8)
    p = 3.0
    paths = fbm.simulate(H, g, 10_000, seed=6)
    est = chaos.holder_exponent_estimate(sol, 2.0, paths)
    assert est.delta >= chaos.holder_bound(ORDER, p) - 0.05
    s, t = 0.25, 0.375
    x_s = chaos.evaluate_solution(sol, paths, s)[0]
    x_t = chaos.evaluate_solution(sol, paths, t)[0]
    assert np.mean((x_t - x_s) ** 2) == pytest.approx(chaos.increment_second_moment(sol, s, t), rel=0.05)


@pytest.mark.parametrize("n", [1, 2, 3])
def test_tensor_power_increment_exponent(n):
    g = make_grid(1.0, 1024)
    b = ls.from_phi(SampledFunction(g, 1.0 + 0.5 * np.sin(3 * g.nodes)), ORDER)
    assert chaos.increment_exponent(b, n).delta >= 0.95 * chaos.holder_bound(ORDER, 3.0)


def test_eta_validation(grid):
    e = ls.constant_element(1.0, ORDER, grid)
    with pytest.raises(InvalidArgument):
        chaos.EtaSpec({1: ((1.0, (e, e)),)})
    with pytest.raises(InvalidArgument):
        chaos.ChaosSolution(SampledFunction.constant(grid, 0.0), e, chaos.EtaSpec.from_norms([1.0, 0.5]), 4)
