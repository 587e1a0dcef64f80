"""The weighted space of deterministic integrands for fBm with ``H < 1/2``.

An element ``f`` is represented by ``phi`` through

    f(u) = u**alpha * I(s**-alpha * phi(s))(u),      alpha = 1/2 - H,

and ``<f, g> = C_H * int phi_f phi_g``.  Representatives of typical elements
are singular: ``phi ~ s**-alpha`` at the origin and ``phi ~ (t - s)**-alpha``
at the right end of the support.  Sampling them on the grid and using the
trapezoid rule loses ``O(h**(1 - 2 alpha))`` of the energy, so elements store
a regular factor ``psi`` with

    phi(s) = psi(s) * s**-left_exp * (end - s)**-right_exp    on [0, end],

``psi`` piecewise linear, and every integral uses Gauss-Jacobi rules on the
two singular cells.  Scalar multiples of indicators additionally carry their
step data and pair through the closed-form representative (exact route).
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from functools import lru_cache

import numpy as np
from scipy import integrate, special

from .errors import InvalidArgument, InvalidData, NotInSpace
from .fraccalc import FracOrder, MarchaudReport, estimate_operator_norm, marchaud_tail_convergence
from .grid import Grid, SampledFunction, jacobi_rule, tail_correlate

QUAD_POINTS = 10


def hurst_constant(hurst: float) -> float:
    """``C_H`` normalised so that indicator pairings reproduce ``R_H``.

    ``C_H = 2H Gamma(H + 1/2)**2 / ((1 - 2H) B(1 - 2H, H + 1/2))``.
    """
    if not (0.0 < hurst < 0.5):
        raise InvalidArgument(f"hurst must lie in (0, 1/2), got {hurst}")
    g = special.gamma(hurst + 0.5)
    return 2 * hurst * g * g / ((1 - 2 * hurst) * special.beta(1 - 2 * hurst, hurst + 0.5))


@dataclass(frozen=True)
class SpaceConstants:
    c_h: float
    alpha: FracOrder
    hurst: float

    @classmethod
    def for_order(cls, order: FracOrder) -> "SpaceConstants":
        return cls(hurst_constant(order.hurst), order, order.hurst)


@dataclass(frozen=True, eq=False)
class LambdaElement:
    """Element of the space; see the module docstring for the storage layout.

    ``step = (scale, t)`` marks ``scale * 1_[0,t]``.  ``tail`` is the Marchaud
    report when the element was recovered from ``f``.
    """

    grid: Grid
    order: FracOrder
    psi: np.ndarray
    end: int
    left_exp: float
    right_exp: float
    f: SampledFunction
    p_hint: float = 2.0
    step: tuple | None = None
    tail: MarchaudReport | None = None

    def __post_init__(self):
        psi = np.array(self.psi, dtype=float)
        if psi.shape != (self.end + 1,):
            raise InvalidArgument("psi must have one value per node of the support")
        if not np.all(np.isfinite(psi)):
            raise InvalidData("representative contains NaN or infinite values")
        psi.setflags(write=False)
        object.__setattr__(self, "psi", psi)

    @property
    def phi(self) -> SampledFunction:
        """Nodal samples of the representative (singular nodes take the neighbour value)."""
        n = self.grid.n_cells
        out = np.zeros(n + 1)
        if self.end == 0:
            return SampledFunction(self.grid, out)
        s = self.grid.nodes[: self.end + 1]
        tau = s[-1]
        inner = slice(1, self.end)
        out[inner] = self.psi[inner] * s[inner] ** -self.left_exp * (tau - s[inner]) ** -self.right_exp
        out[0] = self.psi[0] * tau**-self.right_exp if self.left_exp == 0 else out[min(1, self.end - 1)]
        if self.right_exp == 0:
            out[self.end] = self.psi[-1] * tau**-self.left_exp
        else:
            out[self.end] = out[max(self.end - 1, 0)]
        return SampledFunction(self.grid, out)

    @property
    def is_zero(self) -> bool:
        return self.end == 0 or not np.any(self.psi)

    def scaled(self, c: float) -> "LambdaElement":
        step = None if self.step is None else (c * self.step[0], self.step[1])
        return replace(self, psi=c * self.psi, f=self.f * c, step=step, tail=None)

    def __mul__(self, c):
        return self.scaled(float(c))

    __rmul__ = __mul__

    def __add__(self, other: "LambdaElement") -> "LambdaElement":
        _check_pair(self, other)
        if self.is_zero:
            return other
        if other.is_zero:
            return self
        left = max(self.left_exp, other.left_exp)
        if self.end == other.end:
            right = max(self.right_exp, other.right_exp)
            end = self.end
        elif _lifts(self, other) or _lifts(other, self):
            big = self if self.end > other.end else other
            end, right = big.end, big.right_exp
        else:
            raise InvalidArgument("cannot add elements with singular support ends at different nodes")
        s = self.grid.nodes[: end + 1]
        psi = _rebase(self, s, left, right, end) + _rebase(other, s, left, right, end)
        step = None
        if self.step and other.step and self.step[1] == other.step[1]:
            step = (self.step[0] + other.step[0], self.step[1])
        return LambdaElement(self.grid, self.order, psi, end, left, right, self.f + other.f, step=step)


def _lifts(small, big):
    return small.end < big.end and small.right_exp == 0


def _rebase(e: LambdaElement, s, left, right, end):
    """``psi`` of ``e`` re-expressed against the weights ``left``/``right`` on ``[0, s[end]]``."""
    out = np.zeros(end + 1)
    m = e.end
    seg = s[: m + 1]
    factor = seg ** (left - e.left_exp)
    if m == end:
        factor = factor * (s[end] - seg) ** (right - e.right_exp)
    else:
        factor = factor * (s[end] - seg) ** right
    out[: m + 1] = e.psi * factor
    return out


def _check_pair(e1: LambdaElement, e2: LambdaElement):
    if e1.grid != e2.grid:
        raise InvalidArgument("elements live on different grids")
    if e1.order != e2.order:
        raise InvalidArgument("elements have different fractional orders")


# ---------------------------------------------------------------------------
# quadrature engine


def _pl(psi: np.ndarray, h: float, u: np.ndarray) -> np.ndarray:
    x = np.arange(len(psi)) * h
    return np.interp(u, x, psi)


def weighted_integral(h: float, m: int, regular, left: float, right: float, q: int = QUAD_POINTS) -> float:
    """``int_0^{m h} R(u) u**-left (m h - u)**-right du`` with singular end cells.

    ``regular`` maps an array of points to values of ``R``; the end cells use
    Gauss-Jacobi rules carrying the power weights, interior cells Gauss-Legendre.
    """
    if m <= 0:
        return 0.0
    tau = m * h
    if m == 1:
        y, w = jacobi_rule(-left, -right, q)
        return float(h ** (1 - left - right) * (w @ regular(y * h)))
    total = 0.0
    y, w = jacobi_rule(-left, 0.0, q)
    u = y * h
    total += h ** (1 - left) * (w @ (regular(u) * (tau - u) ** -right))
    if m > 2:
        y, w = jacobi_rule(0.0, 0.0, q)
        u = (np.arange(1, m - 1)[:, None] + y[None, :]) * h
        vals = regular(u) * u**-left * (tau - u) ** -right
        total += h * float(np.sum(vals @ w))
    y, w = jacobi_rule(0.0, -right, q)
    u = (m - 1 + y) * h
    total += h ** (1 - right) * (w @ (regular(u) * u**-left))
    return float(total)


def _pairing(e1: LambdaElement, e2: LambdaElement) -> float:
    """``int phi_1 phi_2`` on the grid route."""
    if e1.is_zero or e2.is_zero:
        return 0.0
    if e1.end > e2.end:
        e1, e2 = e2, e1
    h = e1.grid.spacing
    m = e1.end
    left = e1.left_exp + e2.left_exp
    right = e1.right_exp
    tau2 = e2.end * h
    if e2.end == m:
        right += e2.right_exp

        def reg(u):
            return _pl(e1.psi, h, u) * _pl(e2.psi, h, u)

    else:
        r2 = e2.right_exp

        def reg(u):
            return _pl(e1.psi, h, u) * _pl(e2.psi, h, u) * (tau2 - u) ** -r2

    return weighted_integral(h, m, reg, left, right)


def lp_norm(e: LambdaElement, p: float, method: str = "auto") -> float:
    """``||phi||_{L^p}`` (requires ``p * alpha < 1`` for singular elements)."""
    if not p >= 1:
        raise InvalidArgument(f"p must be >= 1, got {p}")
    if e.is_zero:
        return 0.0
    if _use_exact(method, e):
        scale, t = e.step
        return abs(scale) * _step_lp(e.order.alpha, t, p) ** (1.0 / p)
    if p * max(e.left_exp, e.right_exp) >= 1:
        raise InvalidArgument(f"phi is not in L^{p}: singular exponent times p reaches 1")
    h = e.grid.spacing
    val = weighted_integral(h, e.end, lambda u: np.abs(_pl(e.psi, h, u)) ** p, p * e.left_exp, p * e.right_exp)
    return val ** (1.0 / p)


def _use_exact(method, *elems):
    if method == "grid":
        return False
    exact = all(e.step is not None for e in elems)
    if method == "exact" and not exact:
        raise InvalidArgument("exact route needs scalar multiples of indicators")
    return exact


def inner(e1: LambdaElement, e2: LambdaElement, constants: SpaceConstants | None = None, method: str = "auto") -> float:
    """``C_H * int phi_1 phi_2``.

    ``method`` is ``"grid"`` (weighted quadrature of the stored representatives),
    ``"exact"`` (closed-form indicator representatives, only for step
    elements) or ``"auto"`` (exact when both are steps).
    """
    _check_pair(e1, e2)
    if constants is None:
        constants = SpaceConstants.for_order(e1.order)
    if _use_exact(method, e1, e2):
        (c1, t1), (c2, t2) = e1.step, e2.step
        if c1 == 0 or c2 == 0 or t1 == 0 or t2 == 0:
            return 0.0
        return constants.c_h * c1 * c2 * _step_pairing(e1.order.alpha, min(t1, t2), max(t1, t2))
    return constants.c_h * _pairing(e1, e2)


# ---------------------------------------------------------------------------
# closed-form indicator representative


def indicator_phi(alpha: float, t: float, s):
    """Representative of ``1_[0,t]`` at ``0 < s < t`` (zero beyond ``t``)."""
    s = np.asarray(s, dtype=float)
    out = np.zeros_like(s)
    inside = (s > 0) & (s < t)
    si = s[inside]
    out[inside] = _indicator_regular(alpha, t, si) * si**-alpha * (t - si) ** -alpha
    return out


def _indicator_regular(alpha, t, s):
    """``phi_t(s) s**alpha (t - s)**alpha``, bounded on ``[0, t]``."""
    a = alpha
    b = special.beta(2 * a, 1 - a)
    inc = special.betainc(2 * a, 1 - a, np.clip(s / t, 0.0, 1.0))
    return (s ** (2 * a) * t**-a + a * b * (1 - inc) * (t - s) ** a) / special.gamma(1 - a)


@lru_cache(maxsize=4096)
def _step_pairing(alpha: float, t1: float, t2: float) -> float:
    """``int phi_t1 phi_t2`` for ``t1 <= t2``."""
    a = alpha
    if t1 == t2:
        fn = lambda s: _indicator_regular(a, t1, s) ** 2  # noqa: E731
        wvar = (-2 * a, -2 * a)
    else:
        fn = lambda s: _indicator_regular(a, t1, s) * _indicator_regular(a, t2, s) * (t2 - s) ** -a  # noqa: E731
        wvar = (-2 * a, -a)
    val, _ = integrate.quad(fn, 0.0, t1, weight="alg", wvar=wvar, epsabs=0.0, epsrel=1e-12, limit=200)
    return float(val)


@lru_cache(maxsize=4096)
def _step_lp(alpha: float, t: float, p: float) -> float:
    a = alpha
    if p * a >= 1:
        raise InvalidArgument(f"indicator representative is not in L^{p}")
    val, _ = integrate.quad(
        lambda s: np.abs(_indicator_regular(a, t, s)) ** p,
        0.0,
        t,
        weight="alg",
        wvar=(-p * a, -p * a),
        epsabs=0.0,
        epsrel=1e-12,
        limit=200,
    )
    return float(val)


# ---------------------------------------------------------------------------
# forward and inverse maps


def forward_values(grid: Grid, psi: np.ndarray, end: int, left: float, right: float, alpha: float) -> np.ndarray:
    """``u**alpha I(s**-alpha phi)(u)`` at every node for a stored representative."""
    h = grid.spacing
    n = grid.n_cells
    m = end
    out = np.zeros(n + 1)
    if m == 0 or not np.any(psi):
        return out
    tau = m * h
    q = QUAD_POINTS
    a = alpha

    def reg(s):
        return _pl(psi, h, s) * s ** (-a - left)

    i = np.arange(1, m)
    vals = np.zeros(m - 1)
    # first cell [u_i, u_{i+1}], singular (s - u_i)**(alpha - 1)
    last_first = i == m - 1
    y, w = jacobi_rule(a - 1, 0.0, q)
    s = (i[~last_first, None] + y[None, :]) * h
    vals[~last_first] = h**a * ((reg(s) * (tau - s) ** -right) @ w)
    y, w = jacobi_rule(a - 1, -right, q)
    s = (m - 1 + y) * h
    vals[last_first] = h ** (a - right) * (w @ reg(s))
    # interior cells k = i+1 .. m-2
    if m > 3:
        y, w = jacobi_rule(0.0, 0.0, q)
        k = np.arange(0, m - 1)
        s = (k[:, None] + y[None, :]) * h
        A = reg(np.maximum(s, h)) * (tau - s) ** -right * w[None, :] * h
        A[0] = 0.0
        kern = ((np.arange(m - 1)[:, None] + y[None, :]) * h) ** (a - 1)
        kern[0] = 0.0
        corr = tail_correlate(A, kern).sum(axis=1)  # corr[i] = sum_{k>i, k<=m-2}
        vals[:-1] += corr[1:]
    # last cell [u_{m-1}, tau] for i < m - 1
    if m > 2:
        y, w = jacobi_rule(0.0, -right, q)
        s = (m - 1 + y) * h
        dist = s[None, :] - i[:-1, None] * h
        vals[:-1] += h ** (1 - right) * ((reg(s)[None, :] * dist ** (a - 1)) @ w)
    u = i * h
    out[1:m] = u**a * vals / special.gamma(a)
    if left >= a:
        # u -> 0 limit: int_1^inf (v - 1)**(alpha - 1) v**(-2 alpha) dv = B(alpha, alpha)
        out[0] = psi[0] * tau**-right * special.beta(a, a) / special.gamma(a)
    if right > 0:
        # left limit at the support end; the element is closed at its end
        out[m] = psi[-1] * tau**-left * special.gamma(1 - a)
    return out


def from_phi(phi: SampledFunction, order: FracOrder) -> LambdaElement:
    """Element with the given representative on ``[0, T]``."""
    grid = phi.grid
    n = grid.n_cells
    f = forward_values(grid, phi.values, n, 0.0, 0.0, order.alpha)
    return LambdaElement(grid, order, phi.values, n, 0.0, 0.0, SampledFunction(grid, f))


def _inverse_psi(f: SampledFunction, alpha: float) -> np.ndarray:
    """``s**(2 alpha) (T - s)**alpha D(u**-alpha f)(s)`` at every node.

    The terminal cusp ``c (T - u)**alpha`` of ``f`` is fitted on the last two
    cells and removed before linear interpolation; it re-enters through
    ``G(u) = u**-alpha PL(f - cusp)(u) + c (T - u)**alpha (u**-alpha - T**-alpha)``,
    evaluated exactly at quadrature points, plus the closed form
    ``D(c T**-alpha (T - u)**alpha) = c T**-alpha Gamma(1 + alpha)``.
    """
    grid = f.grid
    a = alpha
    n, h, T = grid.n_cells, grid.spacing, grid.horizon
    x = np.arange(n + 1) * h
    fv = f.values
    basis = np.array([[h**a, h], [(2 * h) ** a, 2 * h]])
    c = np.linalg.solve(basis, fv[n - 2 : n][::-1] - fv[n])[0]
    rem = fv - c * np.maximum(T - x, 0.0) ** a

    def big_g(u):
        u = np.asarray(u, dtype=float)
        return u**-a * _pl(rem, h, u) + c * np.maximum(T - u, 0.0) ** a * (u**-a - T**-a)

    q = QUAD_POINTS
    i = np.arange(1, n)
    si = i * h
    g_i = big_g(si)
    # adjacent cell: h**-alpha int_0^1 (G_i - G(s_i + y h)) / y * y**-alpha dy
    y, w = jacobi_rule(-a, 0.0, q)
    u = si[:, None] + y[None, :] * h
    near = ((g_i[:, None] - big_g(u)) / y[None, :]) @ w * h**-a
    # remaining cells k >= i + 1 of int G(u) (u - s_i)**(-1 - alpha)
    y, w = jacobi_rule(0.0, 0.0, q)
    u = (np.arange(n)[:, None] + y[None, :]) * h
    A = big_g(u) * w[None, :] * h
    kern = ((np.arange(n)[:, None] + y[None, :]) * h) ** (-1 - a)
    kern[0] = 0.0
    far = tail_correlate(A, kern).sum(axis=1)[1:n]
    d = (g_i * h**-a + a * near - a * far) / special.gamma(1 - a) + c * T**-a * special.gamma(1 + a)
    psi = np.empty(n + 1)
    psi[1:n] = si ** (2 * a) * (T - si) ** a * d
    psi[n] = T**a * fv[n] / special.gamma(1 - a)
    # psi ~ c0 + c1 s**(2 alpha) near the origin
    b = np.array([[1.0, h ** (2 * a)], [1.0, (2 * h) ** (2 * a)]])
    psi[0] = np.linalg.solve(b, psi[1:3])[0]
    return psi


def _membership(f: SampledFunction, order: FracOrder, p: float) -> MarchaudReport:
    a = order.alpha
    x = f.grid.nodes
    g = np.empty_like(x)
    g[1:] = x[1:] ** -a * f.values[1:]
    g[0] = g[1]
    # the terminal cusp c (T - u)**alpha has a convergent Marchaud integral;
    # remove it so that grid-scale interpolation artefacts are not diagnosed
    n, h, T = f.grid.n_cells, f.grid.spacing, f.grid.horizon
    basis = np.array([[h**a, h], [(2 * h) ** a, 2 * h]])
    c = np.linalg.solve(basis, g[n - 2 : n][::-1] - g[n])[0]
    scale = float(np.max(np.abs(g)))
    g = g - c * (T - x) ** a
    # the space admits jumps, whose tails contract only like 2**-(1/p - alpha)
    return marchaud_tail_convergence(SampledFunction(f.grid, g), order, p, weight_power=a, ratio_threshold=1.0, reference_scale=scale)


def to_phi(f: SampledFunction, order: FracOrder, p: float = 2.0) -> LambdaElement:
    """Recover the representative of ``f``; raises :class:`NotInSpace` when the
    Marchaud diagnostic does not settle."""
    report = _membership(f, order, p)
    if not report.converges:
        raise NotInSpace("Marchaud tail integrals do not contract; f is not in the space", report)
    a = order.alpha
    psi = _inverse_psi(f, a)
    if not np.all(np.isfinite(psi)):
        raise InvalidData("representative evaluated to NaN")
    return LambdaElement(f.grid, order, psi, f.grid.n_cells, a, a, f, p_hint=p, tail=report)


@lru_cache(maxsize=32)
def _unit_element(grid: Grid, order: FracOrder) -> LambdaElement:
    e = to_phi(SampledFunction.constant(grid, 1.0), order)
    return replace(e, step=(1.0, grid.horizon))


def restrict(elem: LambdaElement, t: float) -> LambdaElement:
    """Representative of ``elem.f * 1_[0,t]``; ``t`` must be a grid node."""
    grid = elem.grid
    if not (0.0 <= t <= grid.horizon):
        raise InvalidArgument(f"t must lie in [0, T], got {t}")
    m = grid.node_index(t)
    if m >= elem.end:
        return elem
    step = None if elem.step is None else (elem.step[0], min(t, elem.step[1]))
    fvals = np.array(elem.f.values)
    fvals[m + 1 :] = 0.0
    fnew = SampledFunction(grid, fvals)
    if m == 0:
        return LambdaElement(grid, elem.order, np.zeros(1), 0, 0.0, 0.0, fnew, elem.p_hint, step)
    a = elem.order.alpha
    h = grid.spacing
    tn = m * h
    tau = elem.end * h
    s = np.arange(m + 1) * h
    l, r = elem.left_exp, elem.right_exp
    # tail integral over cells m .. end-1 of u**-alpha f(u) (u - s_i)**(-1 - alpha)
    q = QUAD_POINTS
    y, w = jacobi_rule(0.0, 0.0, q)
    k = np.arange(0, elem.end)
    u = (k[:, None] + y[None, :]) * h
    A = np.where(k[:, None] >= m, np.maximum(u, h) ** -a * _pl(elem.f.values[: elem.end + 1], h, u), 0.0)
    A = A * w[None, :] * h
    kern = ((np.arange(elem.end)[:, None] + y[None, :]) * h) ** (-1 - a)
    kern[0] = 0.0
    tail = tail_correlate(A, kern).sum(axis=1)[:m]
    psi = np.empty(m + 1)
    psi[:m] = elem.psi[:m] * (tau - s[:m]) ** -r * (tn - s[:m]) ** a
    psi[:m] += a * s[:m] ** (a + l) * (tn - s[:m]) ** a * tail / special.gamma(1 - a)
    psi[m] = tn**l * fvals[m] / special.gamma(1 - a)
    return LambdaElement(grid, elem.order, psi, m, l, a, fnew, elem.p_hint, step)


def indicator_element(t: float, order: FracOrder, grid: Grid) -> LambdaElement:
    """``1_[0,t]``: the constant 1 is inverted first and then restricted."""
    if not (0.0 < t <= grid.horizon):
        raise InvalidArgument(f"t must lie in (0, T], got {t}")
    return restrict(_unit_element(grid, order), t)


def constant_element(c: float, order: FracOrder, grid: Grid) -> LambdaElement:
    return _unit_element(grid, order).scaled(float(c))


def zero_element(order: FracOrder, grid: Grid) -> LambdaElement:
    return LambdaElement(grid, order, np.zeros(1), 0, 0.0, 0.0, SampledFunction.constant(grid, 0.0), step=(0.0, 0.0))


# ---------------------------------------------------------------------------
# support operations


@lru_cache(maxsize=64)
def operator_norm(order: FracOrder, p: float, horizon: float = 1.0, n_cells: int = 1024) -> float:
    """Safety-inflated estimate of ``||I||_{L^p -> L^{p/(1 - alpha p)}}``."""
    return estimate_operator_norm(order, p, Grid(horizon, n_cells))


def restriction_constant(
    order: FracOrder, p_prime: float, p: float, t: float, horizon: float = 1.0, c_norm: float | None = None
) -> float:
    """Constant bounding ``||phi_{f 1_[0,t]}||_{p'}`` by ``||phi_f||_p``."""
    a = order.alpha
    if not (2.0 <= p_prime < p < 1.0 / a):
        raise InvalidArgument(f"need 2 <= p' < p < 1/alpha, got p'={p_prime}, p={p}, alpha={a}")
    if not (0.0 < t <= horizon):
        raise InvalidArgument(f"t must lie in (0, T], got {t}")
    if c_norm is None:
        c_norm = operator_norm(order, p, horizon)
    qq = p / (p - p_prime * (1 - a * p))
    e = 1 - p_prime * a * qq
    if e <= 0:
        raise InvalidArgument("exponent 1 - p' alpha q must be positive")
    first = t ** ((p - p_prime) / (p_prime * p))
    second = c_norm / special.gamma(1 - a) * (t**e / e) ** (1.0 / (p_prime * qq))
    return first + second


def holder_seminorm(g: SampledFunction, beta: float) -> float:
    """``max |g(u) - g(v)| / |u - v|**beta`` over all node pairs (O(N**2) memory in blocks)."""
    x, v = g.grid.nodes, g.values
    best = 0.0
    for start in range(0, len(x), 512):
        xs, vs = x[start : start + 512, None], v[start : start + 512, None]
        d = np.abs(xs - x[None, :])
        with np.errstate(divide="ignore", invalid="ignore"):
            r = np.where(d > 0, np.abs(vs - v[None, :]) / d**beta, 0.0)
        best = max(best, float(r.max()))
    return best


def holder_product(g: SampledFunction, beta: float, elem: LambdaElement) -> LambdaElement:
    """``g * f`` for a ``beta``-Hölder ``g`` with ``beta > alpha``."""
    if not beta > elem.order.alpha:
        raise InvalidArgument(f"Hölder exponent must exceed alpha={elem.order.alpha}, got {beta}")
    if not np.isfinite(holder_seminorm(g, beta)):
        raise InvalidData("Hölder quotient is not finite on the grid")
    if not np.any(g.values):
        return zero_element(elem.order, elem.grid)
    return to_phi(g * elem.f, elem.order, elem.p_hint)
