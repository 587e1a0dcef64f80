"""Uniform grids on [0, T], sampled functions and singular product integration.

Everything downstream works with piecewise-linear functions on a uniform
partition.  Weakly singular weights ``(u - x)**(e - 1)`` are never evaluated
at the singular point; each cell contributes closed-form moments of the weight
against the two linear shape functions, which makes the rules exact for
piecewise-linear integrands.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property, lru_cache

import numpy as np
from scipy import integrate, special
from scipy.signal import fftconvolve

from .errors import InvalidArgument, InvalidData

MIN_CELLS = 8


@dataclass(frozen=True)
class Grid:
    """Uniform partition ``0 = t_0 < ... < t_N = T``."""

    horizon: float
    n_cells: int

    def __post_init__(self):
        if not np.isfinite(self.horizon) or self.horizon <= 0:
            raise InvalidArgument(f"horizon must be positive, got {self.horizon}")
        if int(self.n_cells) != self.n_cells or self.n_cells < MIN_CELLS:
            raise InvalidArgument(f"n_cells must be an integer >= {MIN_CELLS}, got {self.n_cells}")
        object.__setattr__(self, "n_cells", int(self.n_cells))
        object.__setattr__(self, "horizon", float(self.horizon))

    @property
    def spacing(self) -> float:
        return self.horizon / self.n_cells

    @cached_property
    def nodes(self) -> np.ndarray:
        nodes = np.arange(self.n_cells + 1) * self.spacing
        nodes[-1] = self.horizon
        nodes.setflags(write=False)
        return nodes

    @property
    def size(self) -> int:
        return self.n_cells + 1

    def refine(self, factor: int) -> "Grid":
        """Grid with every cell split into ``factor`` pieces (shares all nodes)."""
        return Grid(self.horizon, self.n_cells * int(factor))

    def node_index(self, t: float, tol: float = 1e-9) -> int:
        """Index of the node equal to ``t``; raises if ``t`` is not a node."""
        k = int(round(t / self.spacing))
        if k < 0 or k > self.n_cells or abs(k * self.spacing - t) > tol * max(1.0, self.horizon):
            raise InvalidArgument(f"t={t} is not a node of the grid (spacing {self.spacing})")
        return k

    def __hash__(self):
        return hash((self.horizon, self.n_cells))


def make_grid(horizon: float, n_cells: int) -> Grid:
    return Grid(horizon, n_cells)


@dataclass(frozen=True, eq=False)
class SampledFunction:
    """Nodal values on a grid, interpolated piecewise-linearly."""

    grid: Grid
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        if values.shape != (self.grid.size,):
            raise InvalidArgument(
                f"expected {self.grid.size} values for the grid, got shape {values.shape}"
            )
        if not np.all(np.isfinite(values)):
            raise InvalidData("sampled function contains NaN or infinite values")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @classmethod
    def from_callable(cls, grid: Grid, fn) -> "SampledFunction":
        return cls(grid, np.asarray(fn(grid.nodes), dtype=float) * np.ones(grid.size))

    @classmethod
    def constant(cls, grid: Grid, c: float) -> "SampledFunction":
        return cls(grid, np.full(grid.size, float(c)))

    def __call__(self, x):
        return np.interp(x, self.grid.nodes, self.values)

    def _check(self, other):
        if isinstance(other, SampledFunction) and other.grid != self.grid:
            raise InvalidArgument("sampled functions live on different grids")

    def __add__(self, other):
        self._check(other)
        rhs = other.values if isinstance(other, SampledFunction) else other
        return SampledFunction(self.grid, self.values + rhs)

    __radd__ = __add__

    def __sub__(self, other):
        self._check(other)
        rhs = other.values if isinstance(other, SampledFunction) else other
        return SampledFunction(self.grid, self.values - rhs)

    def __mul__(self, other):
        self._check(other)
        rhs = other.values if isinstance(other, SampledFunction) else other
        return SampledFunction(self.grid, self.values * rhs)

    __rmul__ = __mul__

    def __neg__(self):
        return SampledFunction(self.grid, -self.values)

    def restrict_to(self, grid: Grid) -> "SampledFunction":
        """Sample this function on a coarser (nested) or finer grid."""
        return SampledFunction(grid, self(grid.nodes))


def _cell_weights(n: int, h: float, exponent: float):
    """Weights of a piecewise-linear integrand against ``v**(exponent - 1)``.

    For the cell ``[j h, (j + 1) h]`` (distance measured from the singular
    point) returns the weights multiplying the left and right nodal values.
    """
    j = np.arange(n, dtype=float)
    e = exponent
    m0 = ((j + 1) ** e - j**e) / e
    # integral of (v - j) v**(e-1) over [j, j+1], rewritten to avoid cancellation
    m1 = ((j + 1) ** (e + 1) - j ** (e + 1)) / (e + 1) - j * m0
    scale = h**e
    right = m1 * scale
    left = m0 * scale - right
    return left, right


def _toeplitz_tail(weights: np.ndarray, vals: np.ndarray) -> np.ndarray:
    """``r_i = sum_j weights[j] * vals[i + j]`` with zero padding past the end."""
    n = len(weights)
    padded = np.concatenate([vals, np.zeros(n)])
    return np.correlate(padded, weights, mode="valid")[: len(vals)]


def _check_exponent(exponent):
    if not (0.0 < exponent < 1.0):
        raise InvalidArgument(f"exponent must lie in (0, 1), got {exponent}")


def singular_weight_integral(f: SampledFunction, x: float, exponent: float) -> float:
    """Product-integration value of ``int_x^T f(u) (u - x)**(exponent - 1) du``."""
    _check_exponent(exponent)
    grid = f.grid
    T, h = grid.horizon, grid.spacing
    if not (0.0 <= x <= T):
        raise InvalidArgument(f"x must lie in [0, T], got {x}")
    if x == T:
        return 0.0
    nodes, vals = grid.nodes, f.values
    k0 = min(int(np.floor(x / h)), grid.n_cells - 1)
    # partial cell [x, t_{k0+1}] then whole cells
    pts = np.concatenate([[x], nodes[k0 + 1 :]])
    fv = np.concatenate([[f(x)], vals[k0 + 1 :]])
    d0, d1 = pts[:-1] - x, pts[1:] - x
    e = exponent
    m0 = (d1**e - d0**e) / e
    m1 = (d1 ** (e + 1) - d0 ** (e + 1)) / (e + 1) - d0 * m0
    width = d1 - d0
    slope = np.divide(fv[1:] - fv[:-1], width, out=np.zeros_like(width), where=width > 0)
    return float(np.sum(fv[:-1] * m0 + slope * m1))


def singular_weight_integrals(f: SampledFunction, exponent: float) -> np.ndarray:
    """``singular_weight_integral`` at every node at once (last entry is 0)."""
    _check_exponent(exponent)
    grid = f.grid
    n = grid.n_cells
    left, right = _cell_weights(n, grid.spacing, exponent)
    vals = f.values
    out = _toeplitz_tail(left, vals[:-1]) + _toeplitz_tail(right, vals[1:])
    return np.concatenate([out, [0.0]])


def trapezoid(values, h: float) -> float:
    return float(integrate.trapezoid(values, dx=h))


_LP_X, _LP_W = np.polynomial.legendre.leggauss(8)


def l_p_norm(f: SampledFunction, p: float) -> float:
    """``L^p([0, T])`` norm of the piecewise-linear interpolant (8-point Gauss per cell)."""
    if not p >= 1:
        raise InvalidArgument(f"p must be >= 1, got {p}")
    v = f.values
    y = 0.5 * (_LP_X + 1.0)
    u = v[:-1, None] + np.diff(v)[:, None] * y[None, :]
    total = np.sum(np.abs(u) ** p @ (0.5 * _LP_W)) * f.grid.spacing
    return float(total ** (1.0 / p))


@lru_cache(maxsize=None)
def jacobi_rule(left: float, right: float, n: int = 8):
    """Gauss rule for ``int_0^1 F(y) y**left (1 - y)**right dy``.

    Returns ``(points, weights)``; exponents must exceed -1.
    """
    if left <= -1 or right <= -1:
        raise InvalidArgument("Jacobi exponents must exceed -1")
    with np.errstate(invalid="ignore", divide="ignore"):
        # scipy evaluates a masked 0/0 when left + right = 0
        x, w = special.roots_jacobi(n, right, left)
    y = 0.5 * (1.0 + x)
    w = w / 2.0 ** (left + right + 1.0)
    y.setflags(write=False)
    w.setflags(write=False)
    return y, w


def tail_correlate(values: np.ndarray, kernel: np.ndarray) -> np.ndarray:
    """``r[i] = sum_j kernel[j] * values[i + j]`` along axis 0 (zero padded).

    Columns of 2-D inputs are treated independently.  Used for the Toeplitz
    sums that appear when a translation-invariant kernel is integrated against
    cell samples on a uniform grid.
    """
    values = np.asarray(values, dtype=float)
    kernel = np.asarray(kernel, dtype=float)
    n, L = values.shape[0], kernel.shape[0]
    if n == 0:
        return values.copy()
    if values.ndim == 1:
        full = fftconvolve(values, kernel[::-1])
    else:
        full = fftconvolve(values, kernel[::-1], axes=0)
    return full[L - 1 : L - 1 + n]
