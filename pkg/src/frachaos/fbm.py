"""Exact fBm sampling, Wiener integrals and multiple Wiener-Ito integrals.

Hermite polynomials use the normalisation ``H_m = He_m / m!`` so that
``sum a**m H_m(x) = exp(a x - a**2 / 2)``; then
``I_n(h^{(x)n}) = n! ||h||**n H_n(B(h) / ||h||)``.
"""

from __future__ import annotations

import itertools
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .csvio import write_csv
from .errors import DecompositionError, InvalidArgument
from .grid import Grid
from .lambda_space import LambdaElement, SpaceConstants, inner

HERMITE_CAP = 64
POLARIZATION_CAP = 12
_CHUNK = 4096


def covariance(hurst: float, t, s):
    """``R_H(t, s) = (t**2H + s**2H - |t - s|**2H) / 2``."""
    if not (0.0 < hurst < 0.5):
        raise InvalidArgument(f"hurst must lie in (0, 1/2), got {hurst}")
    t = np.asarray(t, dtype=float)
    s = np.asarray(s, dtype=float)
    e = 2 * hurst
    return 0.5 * (t**e + s**e - np.abs(t - s) ** e)


@lru_cache(maxsize=16)
def cholesky_factor(hurst: float, grid: Grid) -> np.ndarray:
    """Lower Cholesky factor of ``[R_H(t_i, t_j)]`` over the nodes ``t_1..t_N``."""
    x = grid.nodes[1:]
    cov = covariance(hurst, x[:, None], x[None, :])
    try:
        L = np.linalg.cholesky(cov)
    except np.linalg.LinAlgError as exc:
        raise DecompositionError(
            f"fBm covariance on {grid.n_cells} nodes is not numerically positive definite; "
            "use a smaller grid or add a 1e-12 diagonal jitter"
        ) from exc
    L.setflags(write=False)
    return L


def worker_count() -> int:
    cap = os.environ.get("FRACHAOS_THREADS")
    n = os.cpu_count() or 1
    if cap:
        try:
            n = min(n, max(1, int(cap)))
        except ValueError:
            raise InvalidArgument(f"FRACHAOS_THREADS must be an integer, got {cap!r}") from None
    return n


def path_normals(seed: int, index: int, size: int) -> np.ndarray:
    """Standard normals of path ``index``: Philox keyed by ``(seed, index)``."""
    bits = np.random.Philox(key=(int(seed) & (2**64 - 1)) | (int(index) << 64))
    return np.random.Generator(bits).standard_normal(size)


@dataclass(frozen=True)
class FbmPath:
    hurst: float
    grid: Grid
    values: np.ndarray


@dataclass(frozen=True, eq=False)
class PathBatch:
    """``n_paths`` trajectories stored as rows of ``values``."""

    hurst: float
    grid: Grid
    seed: int
    values: np.ndarray
    factorization: np.ndarray

    def __len__(self):
        return self.values.shape[0]

    def __getitem__(self, i) -> FbmPath:
        return FbmPath(self.hurst, self.grid, self.values[i])

    @property
    def paths(self) -> list[FbmPath]:
        return [self[i] for i in range(len(self))]


def simulate(hurst: float, grid: Grid, n_paths: int, seed: int = 0) -> PathBatch:
    """Exact Gaussian sampling ``B = L z`` with per-path counter-based streams."""
    if n_paths < 1:
        raise InvalidArgument(f"n_paths must be >= 1, got {n_paths}")
    L = cholesky_factor(float(hurst), grid)
    n = grid.n_cells
    out = np.zeros((n_paths, n + 1))

    def fill(lo):
        hi = min(lo + _CHUNK, n_paths)
        z = np.empty((hi - lo, n))
        for k in range(lo, hi):
            z[k - lo] = path_normals(seed, k, n)
        out[lo:hi, 1:] = z @ L.T

    starts = range(0, n_paths, _CHUNK)
    workers = min(worker_count(), len(starts))
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            list(pool.map(fill, starts))
    else:
        for lo in starts:
            fill(lo)
    out.setflags(write=False)
    return PathBatch(float(hurst), grid, int(seed), out, L)


def _values(paths):
    if isinstance(paths, (FbmPath, PathBatch)):
        return paths.grid, paths.values
    raise InvalidArgument("expected an FbmPath or PathBatch")


def wiener_integral(paths, elem: LambdaElement):
    """``sum_k f(t_{k+1}) (B_{t_{k+1}} - B_{t_k})``; one value per path.

    Cells take the integrand's right-endpoint value, so ``1_[0,t]`` telescopes
    to ``B_t`` exactly.
    """
    grid, vals = _values(paths)
    if grid != elem.grid:
        raise InvalidArgument("path and integrand live on different grids")
    return np.diff(vals, axis=-1) @ elem.f.values[1:]


def hermite(m: int, x):
    """``H_m(x) = He_m(x) / m!`` via ``(m+1) H_{m+1} = x H_m - H_{m-1}``."""
    if int(m) != m or m < 0 or m > HERMITE_CAP:
        raise InvalidArgument(f"Hermite degree must be an integer in [0, {HERMITE_CAP}], got {m}")
    x = np.asarray(x, dtype=float)
    prev, cur = np.ones_like(x), x.copy()
    if m == 0:
        return prev
    for k in range(1, m):
        prev, cur = cur, (x * cur - prev) / (k + 1)
    return cur


def power_integral(b, norm_sq: float, n: int):
    """``I_n(h^{(x)n})`` from ``b = B(h)`` and ``norm_sq = ||h||**2``.

    Uses the homogeneous form ``P_{m+1} = b P_m - m ||h||**2 P_{m-1}`` of the
    Hermite recurrence, which stays finite when the norm vanishes.
    """
    b = np.asarray(b, dtype=float)
    prev, cur = np.ones_like(b), b.copy()
    if n == 0:
        return prev
    for m in range(1, n):
        prev, cur = cur, b * cur - m * norm_sq * prev
    return cur


def multiple_integral_power(paths, elem: LambdaElement, n: int, constants: SpaceConstants | None = None):
    if int(n) != n or n < 0 or n > HERMITE_CAP:
        raise InvalidArgument(f"order must be an integer in [0, {HERMITE_CAP}], got {n}")
    if n == 0:
        grid, vals = _values(paths)
        return np.ones(vals.shape[:-1]) if vals.ndim > 1 else 1.0
    norm_sq = inner(elem, elem, constants)
    if not norm_sq > 0:
        raise InvalidArgument("multiple integral of a tensor power needs a non-zero element")
    return power_integral(wiener_integral(paths, elem), norm_sq, n)


def group_factors(factors):
    """Distinct elements (by identity) and their multiplicities, in first-seen order."""
    distinct, mult = [], []
    for e in factors:
        for i, d in enumerate(distinct):
            if d is e:
                mult[i] += 1
                break
        else:
            distinct.append(e)
            mult.append(1)
    return distinct, mult


def sym_integral(bvals: np.ndarray, gram: np.ndarray, mult) -> np.ndarray:
    """``I_n(sym(g_1^{(x)m_1} (x) ... ))`` by polarization.

    ``bvals[i]`` holds ``B(g_i)`` per path and ``gram`` the pairings.  Each
    group contributes ``sum_e C(m, e) (-1)**(m - e)`` over ``e`` copies.
    """
    mult = list(mult)
    n = sum(mult)
    if n > POLARIZATION_CAP:
        raise InvalidArgument(f"polarization is capped at {POLARIZATION_CAP} factors, got {n}")
    bvals = np.atleast_2d(np.asarray(bvals, dtype=float))
    gram = np.asarray(gram, dtype=float)
    if n == 0:
        return np.ones(bvals.shape[1])
    if len(mult) == 1:
        return power_integral(bvals[0], gram[0, 0], n)
    total = np.zeros(bvals.shape[1])
    for eps in itertools.product(*(range(m + 1) for m in mult)):
        if not any(eps):
            continue
        e = np.array(eps, dtype=float)
        coef = 1.0
        for m, k in zip(mult, eps):
            coef *= math.comb(m, k) * (-1.0) ** (m - k)
        total += coef * power_integral(e @ bvals, float(e @ gram @ e), n)
    return total / math.factorial(n)


def multiple_integral_sym(paths, factors, constants: SpaceConstants | None = None):
    """``I_n(sym(g_1 (x) ... (x) g_n))``; zero when any factor vanishes."""
    n = len(factors)
    if n > POLARIZATION_CAP:
        raise InvalidArgument(f"polarization is capped at {POLARIZATION_CAP} factors, got {n}")
    grid, vals = _values(paths)
    shape = vals.shape[:-1]
    if any(e.is_zero for e in factors):
        return np.zeros(shape) if shape else 0.0
    distinct, mult = group_factors(factors)
    gram = np.array([[inner(a, b, constants) for b in distinct] for a in distinct])
    bvals = np.array([np.atleast_1d(wiener_integral(paths, e)) for e in distinct])
    out = sym_integral(bvals, gram, mult)
    return out if shape else float(out[0])


def export_csv(batch: PathBatch, path, max_paths: int | None = None) -> int:
    """Write ``t,path_0,...,path_{k-1}`` with one row per node."""
    k = len(batch) if max_paths is None else min(max_paths, len(batch))
    header = ["t"] + [f"path_{i}" for i in range(k)]
    rows = (
        [t, *batch.values[:k, j]] for j, t in enumerate(batch.grid.nodes)
    )
    return write_csv(path, header, rows)
