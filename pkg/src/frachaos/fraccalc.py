"""Right-sided Riemann-Liouville integral and Marchaud derivative on a grid.

For ``0 < alpha < 1/2``::

    I(f)(x) = 1/Gamma(alpha) * int_x^T f(u) (u - x)**(alpha - 1) du
    D(f)(s) = 1/Gamma(1 - alpha) * ( f(s) / (T - s)**alpha
                                     + alpha * int_s^T (f(s) - f(u)) / (u - s)**(1 + alpha) du )

Both operators are applied to the piecewise-linear interpolant of the samples
with closed-form cell moments, so they are exact for piecewise-linear input.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy import integrate, special

from .errors import InvalidArgument
from .grid import SampledFunction, l_p_norm, singular_weight_integrals, trapezoid

# unit-cell moments switch to Gauss-Legendre past this distance (cancellation)
_SERIES_SWITCH = 16
_GL_X, _GL_W = np.polynomial.legendre.leggauss(12)


@dataclass(frozen=True)
class FracOrder:
    """Fractional order ``alpha = 1/2 - H`` restricted to ``(0, 1/2)``."""

    alpha: float

    def __post_init__(self):
        if not (0.0 < self.alpha < 0.5):
            raise InvalidArgument(f"alpha must lie in (0, 1/2), got {self.alpha}")
        object.__setattr__(self, "alpha", float(self.alpha))

    @classmethod
    def from_hurst(cls, hurst: float) -> "FracOrder":
        if not (0.0 < hurst < 0.5):
            raise InvalidArgument(f"hurst must lie in (0, 1/2), got {hurst}")
        return cls(0.5 - hurst)

    @property
    def hurst(self) -> float:
        return 0.5 - self.alpha


def unit_moments(n: int, power: float, start: int = 0):
    """Moments of ``v**power`` on the unit cells ``[j, j + 1]``, ``j = start..n-1``.

    Returns ``(m0, m1)`` with ``m0[j] = int v**power`` and
    ``m1[j] = int (v - j) v**power``.  Far cells use Gauss-Legendre to avoid the
    cancellation in the closed forms.
    """
    j = np.arange(start, n, dtype=float)
    m0 = np.empty_like(j)
    m1 = np.empty_like(j)
    near = j < _SERIES_SWITCH
    jn = j[near]
    p = power
    if np.any(near):
        if p == -1.0:
            a0 = np.log1p(1.0 / jn)
        else:
            a0 = ((jn + 1) ** (p + 1) - jn ** (p + 1)) / (p + 1)
        if p == -2.0:
            a1 = np.log1p(1.0 / jn) - jn * a0
        else:
            a1 = ((jn + 1) ** (p + 2) - jn ** (p + 2)) / (p + 2) - jn * a0
        m0[near] = a0
        m1[near] = a1
    far = ~near
    if np.any(far):
        w = 0.5 * (_GL_X + 1.0)
        vals = (j[far][:, None] + w[None, :]) ** p
        m0[far] = vals @ (0.5 * _GL_W)
        m1[far] = (vals * w[None, :]) @ (0.5 * _GL_W)
    return m0, m1


def frac_integral(f: SampledFunction, order: FracOrder) -> SampledFunction:
    """Right-sided fractional integral at every node; zero at ``T``."""
    a = order.alpha
    return SampledFunction(f.grid, singular_weight_integrals(f, a) / special.gamma(a))


def _tail_terms(vals: np.ndarray, h: float, alpha: float):
    """Per-cell Marchaud contributions ``term[j][i]`` for cells ``j >= 1``.

    ``term[j][i]`` is the integral of ``(f_i - f(u)) (u - s_i)**(-1 - alpha)``
    over the cell ``[s_i + j h, s_i + (j + 1) h]``; zero when the cell leaves
    ``[0, T]``.
    """
    n = len(vals) - 1
    p0, q = unit_moments(n, -1.0 - alpha, start=1)
    scale = h ** (-alpha)
    return p0 * scale, q * scale


def frac_derivative_values(vals: np.ndarray, h: float, alpha: float) -> np.ndarray:
    """Marchaud derivative at nodes ``0..N-1``.

    The terminal behaviour ``f(T) + c (T - u)**alpha + d (T - u)`` is fitted on
    the last two cells and differentiated in closed form; the remainder is
    treated as piecewise linear.  Without the split, interpolating the
    ``(T - u)**alpha`` cusp costs an O(N**-1/2) boundary layer in L^2.
    """
    n = len(vals) - 1
    dist = (n - np.arange(n + 1)) * h
    rhs = vals[n - 2 : n][::-1] - vals[n]
    basis = np.array([[h**alpha, h], [(2 * h) ** alpha, 2 * h]])
    c = np.linalg.solve(basis, rhs)[0]
    end = vals[n]
    rem = vals - end - c * dist**alpha
    out = _marchaud_pl(rem, h, alpha)
    g1a = special.gamma(1.0 - alpha)
    out += end / (g1a * dist[:-1] ** alpha) + c * special.gamma(1.0 + alpha)
    return out


def _marchaud_pl(vals: np.ndarray, h: float, alpha: float) -> np.ndarray:
    n = len(vals) - 1
    p0, q = _tail_terms(vals, h, alpha)
    df = np.diff(vals)
    hs = h ** (-alpha)
    # f(s)/(T-s)**alpha combines with the tail sum of p0 into f_i * h**-alpha
    acc = vals[:-1] * hs - alpha * df * hs / (1.0 - alpha)
    # sum_j p0_j f_{i+j} and sum_j q_j df_{i+j}, j >= 1
    padded_f = np.concatenate([vals[:-1], np.zeros(n)])
    padded_df = np.concatenate([df, np.zeros(n)])
    acc -= alpha * np.correlate(padded_f[1:], p0, mode="valid")[:n]
    acc -= alpha * np.correlate(padded_df[1:], q, mode="valid")[:n]
    return acc / special.gamma(1.0 - alpha)


class Derivative(NamedTuple):
    function: SampledFunction
    converges: bool
    boundary_extrapolated: bool


def frac_derivative(f: SampledFunction, order: FracOrder, p: float = 2.0) -> Derivative:
    """Right-sided Marchaud derivative of ``f``.

    The node ``s = T`` is singular; it receives the value of its neighbour and
    ``boundary_extrapolated`` is set.  ``converges`` is the verdict of
    :func:`marchaud_tail_convergence` in ``L^p``.
    """
    grid = f.grid
    vals = frac_derivative_values(f.values, grid.spacing, order.alpha)
    vals = np.concatenate([vals, vals[-1:]])
    report = marchaud_tail_convergence(f, order, p)
    return Derivative(SampledFunction(grid, vals), report.converges, True)


@dataclass(frozen=True)
class MarchaudReport:
    converges: bool
    epsilon_sequence: np.ndarray
    lp_increments: np.ndarray
    ratios: np.ndarray


CONTRACTION_RATIO = 0.9
RATIO_WINDOW = 4


def marchaud_tail_convergence(
    f: SampledFunction,
    order: FracOrder,
    p: float = 2.0,
    weight_power: float = 0.0,
    ratio_threshold: float = CONTRACTION_RATIO,
    reference_scale: float | None = None,
) -> MarchaudReport:
    """Check whether the truncated Marchaud integrals settle in ``L^p``.

    The integral over ``[s + eps, T]`` is evaluated for ``eps = T 2**-k``,
    ``k = 3, 4, ...`` down to one cell; consecutive truncations are compared in
    ``L^p`` (optionally weighted by ``s**weight_power``) and convergence is
    declared when the last few distances contract by a factor below
    ``ratio_threshold``.  Increments below ``1e-10`` times
    ``reference_scale`` (default: the sup of ``f``) count as converged.
    """
    if not p > 1:
        raise InvalidArgument(f"p must exceed 1, got {p}")
    grid = f.grid
    n, h, T = grid.n_cells, grid.spacing, grid.horizon
    vals = f.values
    alpha = order.alpha
    p0, q = _tail_terms(vals, h, alpha)
    df = np.diff(vals)

    cells = []
    k = 3
    while True:
        m = int(round(T * 2.0**-k / h))
        if m < 1:
            break
        if not cells or m < cells[-1]:
            cells.append(m)
        k += 1
    eps = np.array(cells, dtype=float) * h

    increments = []
    for hi, lo in zip(cells[:-1], cells[1:]):
        band = np.zeros(n + 1)
        for j in range(lo, hi):
            idx = np.arange(0, n - j)
            band[idx] += (vals[idx] - vals[idx + j]) * p0[j - 1] - df[idx + j] * q[j - 1]
        if weight_power:
            band *= grid.nodes**weight_power
        increments.append(trapezoid(np.abs(band) ** p, h) ** (1.0 / p))
    increments = np.array(increments)

    scale = np.max(np.abs(vals)) if reference_scale is None else reference_scale
    scale = max(scale, 1e-300)
    if increments.size == 0 or np.all(increments <= 1e-10 * scale):
        ratios = np.zeros(max(increments.size - 1, 0))
        return MarchaudReport(True, eps, increments, ratios)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratios = increments[1:] / increments[:-1]
    window = ratios[-RATIO_WINDOW:]
    converges = bool(window.size > 0 and np.all(window < ratio_threshold))
    return MarchaudReport(converges, eps, increments, ratios)


class InequalitySides(NamedTuple):
    lhs: float
    rhs: float


def three_point_inequality(s: float, t: float, r: float, order: FracOrder) -> InequalitySides:
    """Both sides of the three-point bound used to control Marchaud tails.

    ``lhs = alpha * int_t^r (r-u)**(alpha-1) u**-alpha (u-s)**(-alpha-1) du``
    and ``rhs = t**-alpha (t-s)**-alpha (r-s)**-1 (r-t)**alpha``; the bound
    asserts ``lhs <= rhs`` whenever ``0 < s < t < r``.
    """
    if not (0.0 < s < t < r):
        raise InvalidArgument(f"need 0 < s < t < r, got s={s}, t={t}, r={r}")
    a = order.alpha
    integral, _ = integrate.quad(
        lambda u: u ** (-a) * (u - s) ** (-a - 1.0),
        t,
        r,
        weight="alg",
        wvar=(0.0, a - 1.0),
        epsabs=0.0,
        epsrel=1e-11,
        limit=200,
    )
    lhs = a * integral
    rhs = t ** (-a) * (t - s) ** (-a) / (r - s) * (r - t) ** a
    return InequalitySides(lhs, rhs)


def lp_ratio(f: SampledFunction, order: FracOrder, p: float) -> float:
    """``||I f||_{L^r} / ||f||_{L^p}`` with ``r = p / (1 - alpha p)``."""
    r = p / (1.0 - order.alpha * p)
    return l_p_norm(frac_integral(f, order), r) / l_p_norm(f, p)


def estimate_operator_norm(
    order: FracOrder,
    p: float,
    grid,
    n_samples: int = 200,
    seed: int = 0,
    safety: float = 2.0,
) -> float:
    """Randomized lower estimate of ``||I||_{L^p -> L^r}``, inflated by ``safety``.

    The exact operator norm is not available in closed form.  Candidates are
    random smooth functions, indicators of terminal intervals and power laws
    ``(T - u)**-g`` with ``g < 1/p`` (the near-extremal family); the largest
    observed ratio is multiplied by ``safety``.
    """
    if not (1.0 < p < 1.0 / order.alpha):
        raise InvalidArgument(f"p must lie in (1, 1/alpha), got {p}")
    rng = np.random.default_rng(seed)
    T = grid.horizon
    x = grid.nodes
    best = 0.0
    for _ in range(n_samples):
        kind = rng.integers(3)
        if kind == 0:
            coef = rng.normal(size=6)
            vals = np.polynomial.chebyshev.chebval(2 * x / T - 1, coef)
        elif kind == 1:
            c = rng.uniform(0, T)
            vals = (x >= c).astype(float)
        else:
            g = rng.uniform(0, 1.0 / p) * 0.95
            vals = (np.maximum(T - x, grid.spacing / 2)) ** (-g)
        f = SampledFunction(grid, vals)
        if np.max(np.abs(vals)) == 0:
            continue
        best = max(best, lp_ratio(f, order, p))
    return safety * best
