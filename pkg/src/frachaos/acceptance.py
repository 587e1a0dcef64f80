"""Acceptance battery: ten end-to-end checks against closed-form oracles.

Each check returns a :class:`CriterionResult`; ``run_all`` runs the battery
and is what ``frachaos validate`` reports.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np

from . import chaos, fbm
from . import lambda_space as ls
from .fraccalc import FracOrder, frac_derivative, frac_integral, three_point_inequality
from .grid import Grid, SampledFunction, trapezoid


@dataclass(frozen=True)
class CriterionResult:
    number: int
    name: str
    value: float
    threshold: float
    passed: bool
    seconds: float
    budget: float
    detail: str = ""

    def line(self) -> str:
        mark = "PASS" if self.passed else "FAIL"
        return (
            f"[{mark}] {self.number:2d} {self.name}: value={self.value:.3e} "
            f"threshold={self.threshold:.3e} time={self.seconds:.1f}s/{self.budget:.0f}s {self.detail}"
        ).rstrip()


def _timed(number, name, budget):
    def wrap(fn):
        def run(seed: int = 0) -> CriterionResult:
            start = time.perf_counter()
            value, threshold, passed, detail = fn(seed)
            return CriterionResult(
                number, name, float(value), float(threshold), bool(passed), time.perf_counter() - start, budget, detail
            )

        run.__name__ = fn.__name__
        run.__doc__ = fn.__doc__
        return run

    return wrap


def random_smooth(grid: Grid, rng, degree: int = 6) -> SampledFunction:
    """Random Chebyshev series with decaying coefficients."""
    coef = rng.normal(size=degree + 1) / (1.0 + np.arange(degree + 1)) ** 1.5
    x = 2 * grid.nodes / grid.horizon - 1
    return SampledFunction(grid, np.polynomial.chebyshev.chebval(x, coef))


def _rel_l2(a, b, h):
    return math.sqrt(trapezoid((a - b) ** 2, h) / trapezoid(b**2, h))


@_timed(1, "operator inversion", 30)
def inversion(seed=0):
    """``D(I(phi))`` recovers random smooth ``phi`` at N = 2048."""
    grid = Grid(1.0, 2048)
    rng = np.random.default_rng(seed)
    worst = 0.0
    for alpha in (0.1, 0.25, 0.4):
        order = FracOrder(alpha)
        for _ in range(20):
            phi = random_smooth(grid, rng)
            back = frac_derivative(frac_integral(phi, order), order).function
            worst = max(worst, _rel_l2(back.values, phi.values, grid.spacing))
    return worst, 1e-2, worst <= 1e-2, "max relative L2 error"


@_timed(2, "isometry anchor", 120)
def isometry(seed=0):
    """Grid-route pairings of indicators reproduce ``R_H`` at N = 4096."""
    grid = Grid(1.0, 4096)
    rng = np.random.default_rng(seed)
    worst, worst_exact = 0.0, 0.0
    for hurst in (0.1, 0.25, 0.4):
        order = FracOrder.from_hurst(hurst)
        cache = {}
        for _ in range(20):
            kt, ks = rng.integers(1, grid.n_cells + 1, size=2)
            t, s = grid.nodes[kt], grid.nodes[ks]
            for k, x in ((kt, t), (ks, s)):
                if k not in cache:
                    cache[k] = ls.indicator_element(float(x), order, grid)
            r = float(fbm.covariance(hurst, t, s))
            v = ls.inner(cache[kt], cache[ks], method="grid")
            worst = max(worst, abs(v - r) / r)
            worst_exact = max(worst_exact, abs(ls.inner(cache[kt], cache[ks], method="exact") - r) / r)
    return worst, 1e-2, worst <= 1e-2, f"(closed-form route {worst_exact:.1e})"


@_timed(3, "exact sampling", 60)
def sampling(seed=0):
    """Empirical covariance of 10^4 paths within 3 standard errors at 16 node pairs."""
    hurst = 0.2
    grid = Grid(1.0, 64)
    batch = fbm.simulate(hurst, grid, 10_000, seed)
    rng = np.random.default_rng(seed + 1)
    worst = 0.0
    for _ in range(16):
        i, j = rng.integers(1, grid.n_cells + 1, size=2)
        prod = batch.values[:, i] * batch.values[:, j]
        se = prod.std(ddof=1) / math.sqrt(len(prod))
        z = abs(prod.mean() - fbm.covariance(hurst, grid.nodes[i], grid.nodes[j])) / se
        worst = max(worst, z)
    return worst, 3.0, worst <= 3.0, "max |z| over probe pairs"


def wick_solution(grid: Grid, hurst=0.3, sigma=0.5, n_max=12):
    order = FracOrder.from_hurst(hurst)
    b = ls.constant_element(sigma, order, grid)
    a = SampledFunction.constant(grid, 0.0)
    return chaos.ChaosSolution(a, b, chaos.EtaSpec.deterministic(1.0), n_max)


@_timed(4, "Wick exponential", 60)
def wick_pathwise(seed=0):
    """Chaos solution equals ``exp(sigma B_t - sigma^2 t^2H / 2)`` pathwise."""
    hurst, sigma = 0.3, 0.5
    grid = Grid(1.0, 64)
    sol = wick_solution(grid, hurst, sigma)
    batch = fbm.simulate(hurst, grid, 1000, seed)
    worst = 0.0
    for t in (0.25, 0.5, 1.0):
        x, _ = chaos.evaluate_solution(sol, batch, t)
        exact = np.exp(sigma * batch.values[:, grid.node_index(t)] - 0.5 * sigma**2 * t ** (2 * hurst))
        worst = max(worst, float(np.max(np.abs(x - exact) / exact)))
    return worst, 1e-6, worst <= 1e-6, "max pathwise relative error"


@_timed(5, "moment identities", 180)
def moments(seed=0):
    """Series second moment vs ``exp(sigma^2 t^2H)``; MC second moment and mean."""
    hurst, sigma = 0.3, 0.5
    grid = Grid(1.0, 64)
    sol = wick_solution(grid, hurst, sigma)
    series_err = 0.0
    for t in (0.25, 0.5, 1.0):
        m = chaos.second_moment(sol, t).value
        series_err = max(series_err, abs(m - math.exp(sigma**2 * t ** (2 * hurst))) / math.exp(sigma**2 * t ** (2 * hurst)))
    batch = fbm.simulate(hurst, grid, 100_000, seed)
    x, _ = chaos.evaluate_solution(sol, batch, 1.0)
    mc_err = abs(np.mean(x**2) - chaos.second_moment(sol, 1.0).value) / chaos.second_moment(sol, 1.0).value
    z = abs(np.mean(x) - chaos.mean(sol, 1.0)) / (np.std(x, ddof=1) / math.sqrt(len(x)))
    ok = series_err <= 1e-6 and mc_err <= 0.05 and z <= 3.0
    detail = f"series {series_err:.1e} <= 1e-6, MC {mc_err:.3f} <= 0.05, mean |z| {z:.2f} <= 3"
    return series_err, 1e-6, ok, detail


@_timed(6, "kernel recursion", 120)
def recursion(seed=0):
    """Pointwise kernel recursion residual for n <= 4 at N = 1024."""
    grid = Grid(1.0, 1024)
    order = FracOrder.from_hurst(0.3)
    x = grid.nodes
    b = ls.from_phi(SampledFunction(grid, 1.0 + 0.5 * x), order)
    a = SampledFunction(grid, 0.7 - x)
    e1 = ls.from_phi(SampledFunction(grid, np.cos(2 * x)), order)
    etas = (chaos.EtaSpec.deterministic(1.0), chaos.EtaSpec({0: ((0.5, ()),), 1: ((1.0, (e1,)),)}))
    worst = 0.0
    for eta in etas:
        sol = chaos.ChaosSolution(a, b, eta, 4)
        for n in range(1, 5):
            worst = max(worst, chaos.kernel_recursion_check(sol, n, 0.75, seed=seed).max_residual)
    return worst, 5e-2, worst <= 5e-2, "max relative residual"


def condition_taxonomy(grid: Grid, sigma: float = 5.0, hurst: float = 0.25, p: float = 3.0, p_tilde: float = 2.5):
    """Verdicts for the four reference initial conditions; returns a dict."""
    order = FracOrder.from_hurst(hurst)
    b = ls.constant_element(sigma, order, grid)
    sup = chaos.sup_b(b, p_tilde)
    e = ls.from_phi(SampledFunction(grid, 1.0 + grid.nodes), order)
    finite = chaos.EtaSpec.tensor_powers([1.0, 0.5, 0.2], e)
    critical = chaos.NormSequence.critical(sup.value)
    theta = 0.5 * math.log(sup.value) - 0.75
    return {
        "finite": chaos.check_existence_condition(finite, order, p_tilde, b, sup=sup).verdict,
        "exponential": chaos.check_existence_condition(chaos.NormSequence.exponential(2.0), order, p_tilde, b, sup=sup).verdict,
        "critical_existence": chaos.check_existence_condition(critical, order, p_tilde, b, sup=sup).verdict,
        "critical_continuity": chaos.check_continuity_condition(critical, theta, order, p, sup=sup).verdict,
        "sup": sup.value,
    }


@_timed(7, "condition taxonomy", 10)
def conditions(seed=0):
    """Finite and exponential eta pass; the critical sequence passes only the continuity test."""
    v = condition_taxonomy(Grid(1.0, 1024))
    want = {"finite": "pass", "exponential": "pass", "critical_existence": "fail", "critical_continuity": "pass"}
    hits = sum(v[k] == w for k, w in want.items())
    detail = " ".join(f"{k}={v[k]}" for k in want)
    return hits, 4, hits == 4, detail


@_timed(8, "three-point inequality", 30)
def three_point(seed=0):
    """``lhs <= rhs (1 + 1e-6)`` on 10^4 random triples per alpha."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for alpha in (0.05, 0.25, 0.45):
        order = FracOrder(alpha)
        for _ in range(10_000):
            s, t, r = np.sort(_triple(rng))
            sides = three_point_inequality(s, t, r, order)
            worst = max(worst, sides.lhs / sides.rhs)
    return worst, 1 + 1e-6, worst <= 1 + 1e-6, "max lhs/rhs"


def _triple(rng):
    """Uniform triples mixed with clustered ones (gaps spread over decades)."""
    if rng.random() < 0.5:
        while True:
            x = rng.random(3)
            if len(set(x)) == 3 and x.min() > 0:
                return x
    s = rng.uniform(1e-3, 0.9)
    g1, g2 = 10.0 ** rng.uniform(-4, -0.5, size=2)
    return np.array([s, s + g1, s + g1 + g2])


@_timed(9, "Hölder modulus", 120)
def holder(seed=0):
    """Fitted exponent of tensor-power increments over two decades of lags."""
    hurst, p = 0.3, 3.0
    order = FracOrder.from_hurst(hurst)
    grid = Grid(1.0, 1024)
    b = ls.from_phi(SampledFunction(grid, 1.0 + 0.5 * np.sin(3 * grid.nodes)), order)
    bound = chaos.holder_bound(order, p)
    fits = [chaos.increment_exponent(b, n).delta for n in (1, 2, 3)]
    worst = min(fits)
    return worst, 0.95 * bound, worst >= 0.95 * bound, "fits " + " ".join(f"{f:.3f}" for f in fits)


@_timed(10, "permanent", 5)
def permanents(seed=0):
    """Ryser equals brute-force enumeration exactly on 50 random integer matrices."""
    rng = np.random.default_rng(seed)
    mismatches = 0
    for case in range(50):
        n = 1 + case % 7
        m = rng.integers(-9, 10, size=(n, n))
        if chaos.permanent(m) != chaos.permanent_bruteforce(m):
            mismatches += 1
    return mismatches, 0, mismatches == 0, "mismatching cases"


CRITERIA = (inversion, isometry, sampling, wick_pathwise, moments, recursion, conditions, three_point, holder, permanents)


def run_all(seed: int = 0, report=None) -> list[CriterionResult]:
    results = []
    for check in CRITERIA:
        res = check(seed)
        results.append(res)
        if report is not None:
            report(res)
    return results
