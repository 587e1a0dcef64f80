"""Chaos expansion of the linear equation ``dX = a X dt + b X dB^H``.

With ``e(t) = exp(int_0^t a)`` the symmetrised kernels are

    f_n^t = e(t) * [ eta_n + sum_{j=1..n} sym((b 1_[0,t])^{(x)j} (x) eta_{n-j}) / j! ],

where the ``1/j!`` weight counts ordered index tuples.  Kernels are held
symbolically as coefficients times factor lists; norms of symmetric tensor
products reduce to permanents of Gram matrices,
``<sym(g_1..g_n), sym(h_1..h_n)> = perm[<g_i, h_j>] / n!``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import permutations

import numpy as np
from scipy import special

from .csvio import write_csv
from .errors import InvalidArgument
from .fbm import POLARIZATION_CAP, group_factors, sym_integral, wiener_integral
from .fraccalc import FracOrder
from .grid import SampledFunction
from .lambda_space import (
    LambdaElement,
    SpaceConstants,
    inner,
    lp_norm,
    operator_norm,
    restrict,
)

PERMANENT_CAP = 12


# ---------------------------------------------------------------------------
# permanents


def _gray_row_sums(a):
    """Row sums of ``a[:, S]`` for every subset ``S`` in Gray-code order, and ``|S|``."""
    n = a.shape[0]
    k = np.arange(1, 2**n)
    gray = k ^ (k >> 1)
    prev = (k - 1) ^ ((k - 1) >> 1)
    changed = gray ^ prev
    col = np.log2(changed).astype(int)
    sign = np.where(gray & changed, 1, -1)
    steps = a[:, col].T * sign[:, None]
    sums = np.cumsum(steps, axis=0)
    size = np.array([bin(g).count("1") for g in gray])
    return sums, size


def permanent(matrix) -> float | int:
    """Ryser's formula with Gray-code subset order, ``O(2**n n)``.

    Integer input is evaluated in exact integer arithmetic.
    """
    a = np.asarray(matrix)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise InvalidArgument("permanent needs a square matrix")
    n = a.shape[0]
    if n > PERMANENT_CAP:
        raise InvalidArgument(f"permanent is capped at {PERMANENT_CAP}x{PERMANENT_CAP}, got {n}")
    if n == 0:
        return 1
    exact = np.issubdtype(a.dtype, np.integer)
    a = a.astype(object) if exact else a.astype(float)
    sums, size = _gray_row_sums(a)
    prods = np.prod(sums, axis=1)
    signs = np.where((n - size) % 2 == 0, 1, -1)
    if exact:
        return int(sum(int(s) * p for s, p in zip(signs, prods)))
    return float(np.dot(signs, prods))


def permanent_bruteforce(matrix):
    """Sum over all permutations (reference for small matrices)."""
    a = np.asarray(matrix)
    n = a.shape[0]
    exact = np.issubdtype(a.dtype, np.integer)
    total = 0 if exact else 0.0
    for perm in permutations(range(n)):
        term = 1 if exact else 1.0
        for i, j in enumerate(perm):
            term *= int(a[i, j]) if exact else a[i, j]
        total += term
    return total


# ---------------------------------------------------------------------------
# data types


@dataclass(frozen=True, eq=False)
class EtaSpec:
    """Initial condition ``eta = sum_k I_k(eta_k)``.

    ``terms[k]`` is a tuple of ``(coefficient, factors)`` meaning
    ``coefficient * sym(factors)``; level 0 holds ``((eta_0, ()),)``.
    Alternatively only ``norm_sequence`` (``||eta_k||``) is given, which is
    enough for the condition checkers but not for building kernels.
    """

    terms: dict = field(default_factory=dict)
    norm_sequence: np.ndarray | None = None

    def __post_init__(self):
        terms = {}
        for k, entries in self.terms.items():
            k = int(k)
            if k < 0:
                raise InvalidArgument("chaos levels must be non-negative")
            entries = tuple((float(c), tuple(f)) for c, f in entries)
            for c, f in entries:
                if len(f) != k:
                    raise InvalidArgument(f"level {k} term has {len(f)} factors")
                if not np.isfinite(c):
                    raise InvalidArgument("eta coefficient is not finite")
            if k == 0 and len(entries) != 1:
                raise InvalidArgument("level 0 must be a single scalar")
            terms[k] = entries
        object.__setattr__(self, "terms", terms)
        if self.norm_sequence is not None:
            seq = np.asarray(self.norm_sequence, dtype=float)
            if np.any(seq < 0) or not np.all(np.isfinite(seq)):
                raise InvalidArgument("norm sequence must be finite and non-negative")
            object.__setattr__(self, "norm_sequence", seq)

    @classmethod
    def deterministic(cls, eta0: float) -> "EtaSpec":
        return cls({0: ((eta0, ()),)})

    @classmethod
    def tensor_powers(cls, coefficients, element: LambdaElement) -> "EtaSpec":
        """``sum_k c_k I_k(e^{(x)k})``."""
        terms = {k: ((c, (element,) * k),) for k, c in enumerate(coefficients) if k == 0 or c != 0}
        terms.setdefault(0, ((0.0, ()),))
        return cls(terms)

    @classmethod
    def from_norms(cls, norms) -> "EtaSpec":
        return cls({}, np.asarray(norms, dtype=float))

    @property
    def explicit(self) -> bool:
        return bool(self.terms)

    @property
    def max_level(self) -> int:
        if self.terms:
            return max(self.terms)
        return len(self.norm_sequence) - 1

    @property
    def eta0(self) -> float:
        if not self.terms:
            raise InvalidArgument("eta given only through its norm sequence")
        return self.terms[0][0][0]

    def level(self, k: int):
        return self.terms.get(k, ())

    def level_norms(self, constants: SpaceConstants | None = None) -> np.ndarray:
        """``||eta_k||`` for ``k = 0..max_level``."""
        if not self.terms:
            return self.norm_sequence.copy()
        out = np.zeros(self.max_level + 1)
        for k in range(self.max_level + 1):
            entries = self.level(k)
            if not entries:
                continue
            facs = [f for _, f in entries]
            coefs = [c for c, _ in entries]
            distinct, gram = _gram([e for f in facs for e in f], constants)
            idx = [[_index(distinct, e) for e in f] for f in facs]
            total = 0.0
            for c1, i1 in zip(coefs, idx):
                for c2, i2 in zip(coefs, idx):
                    total += c1 * c2 * _sym_pairing(gram, i1, i2)
            out[k] = math.sqrt(max(total, 0.0))
        return out

    def second_moment(self, constants=None) -> float:
        norms = self.level_norms(constants)
        return float(sum(math.factorial(k) * v * v for k, v in enumerate(norms)))


@dataclass(frozen=True)
class KernelTerm:
    """``coefficient * sym(b_t^{(x)b_power} (x) eta_term)``; ``coefficient`` includes ``e(t)``."""

    coefficient: float
    b_power: int
    eta_level: int
    eta_index: int = 0
    exp_a_factor: bool = True


@dataclass(frozen=True, eq=False)
class ChaosSlice:
    t: float
    node: int
    growth: float
    b_t: LambdaElement
    eta: EtaSpec
    terms: dict

    def factors(self, term: KernelTerm):
        _, eta_f = self.eta.level(term.eta_level)[term.eta_index]
        return [self.b_t] * term.b_power + list(eta_f)


def _index(distinct, e):
    for i, d in enumerate(distinct):
        if d is e:
            return i
    raise KeyError("element not registered")


def _gram(elements, constants=None):
    distinct, _ = group_factors(elements)
    m = len(distinct)
    gram = np.zeros((m, m))
    for i in range(m):
        for j in range(i, m):
            gram[i, j] = gram[j, i] = inner(distinct[i], distinct[j], constants)
    return distinct, gram


def _sym_pairing(gram, idx1, idx2) -> float:
    n = len(idx1)
    if n == 0:
        return 1.0
    return permanent(gram[np.ix_(idx1, idx2)]) / math.factorial(n)


class ChaosSolution:
    """Kernels of the solution for given ``a``, ``b`` and ``eta``, built lazily per time node."""

    def __init__(self, drift_a: SampledFunction, diffusion_b: LambdaElement, eta: EtaSpec, n_max: int = 12):
        if not eta.explicit:
            raise InvalidArgument("kernels need an explicit eta (levels with factors)")
        if drift_a.grid != diffusion_b.grid:
            raise InvalidArgument("a and b live on different grids")
        if int(n_max) != n_max or n_max < 0 or n_max > PERMANENT_CAP + eta.max_level:
            raise InvalidArgument(f"n_max must lie in [0, {PERMANENT_CAP + eta.max_level}], got {n_max}")
        for entries in eta.terms.values():
            for _, fac in entries:
                for e in fac:
                    if e.grid != diffusion_b.grid or e.order != diffusion_b.order:
                        raise InvalidArgument("eta factors must share grid and order with b")
        self.drift_a = drift_a
        self.diffusion_b = diffusion_b
        self.eta = eta
        self.n_max = int(n_max)
        self.order: FracOrder = diffusion_b.order
        self.grid = drift_a.grid
        self.constants = SpaceConstants.for_order(self.order)
        h = self.grid.spacing
        a = drift_a.values
        self._log_growth = np.concatenate([[0.0], np.cumsum(0.5 * h * (a[1:] + a[:-1]))])
        self._slices: dict[int, ChaosSlice] = {}

    def growth(self, t: float) -> float:
        """``e(t) = exp(int_0^t a)`` (trapezoid, exact for piecewise-linear ``a``)."""
        return float(np.exp(self._log_growth[self.grid.node_index(t)]))

    def slice(self, t: float) -> ChaosSlice:
        k = self.grid.node_index(t)
        if k not in self._slices:
            self._slices[k] = build_kernels(self.drift_a, self.diffusion_b, self.eta, float(self.grid.nodes[k]), self.n_max, self)
        return self._slices[k]


def build_kernels(a, b, eta: EtaSpec, t: float, n_max: int, solution: ChaosSolution | None = None) -> ChaosSlice:
    """Kernel terms of every level ``n <= n_max`` at time ``t`` (a grid node)."""
    if solution is None:
        solution = ChaosSolution(a, b, eta, n_max)
    node = solution.grid.node_index(t)
    g = float(np.exp(solution._log_growth[node]))
    b_t = restrict(b, t)
    terms = {}
    for n in range(n_max + 1):
        level = []
        for j in range(n + 1):
            k = n - j
            for idx, (c, _) in enumerate(eta.level(k)):
                if c == 0:
                    continue
                level.append(KernelTerm(g * c / math.factorial(j), j, k, idx))
        terms[n] = level
    return ChaosSlice(float(t), node, g, b_t, eta, terms)


def _slice_gram(slices, constants):
    elements = []
    for s in slices:
        elements.append(s.b_t)
        for entries in s.eta.terms.values():
            for _, fac in entries:
                elements.extend(fac)
    return _gram(elements, constants)


def kernel_inner(solution: ChaosSolution, n: int, t: float, s: float) -> float:
    """``<f_n^t, f_n^s>`` in the symmetric tensor power."""
    st, ss = solution.slice(t), solution.slice(s)
    if n > solution.n_max:
        raise InvalidArgument(f"level {n} exceeds n_max={solution.n_max}")
    if n > PERMANENT_CAP:
        raise InvalidArgument(f"level {n} exceeds the permanent cap {PERMANENT_CAP}")
    distinct, gram = _slice_gram([st, ss], solution.constants)
    total = 0.0
    for t1 in st.terms[n]:
        i1 = [_index(distinct, e) for e in st.factors(t1)]
        for t2 in ss.terms[n]:
            i2 = [_index(distinct, e) for e in ss.factors(t2)]
            total += t1.coefficient * t2.coefficient * _sym_pairing(gram, i1, i2)
    return float(total)


def kernel_norm_sq(solution: ChaosSolution, n: int, t: float) -> float:
    return max(kernel_inner(solution, n, t, t), 0.0)


def mean(solution: ChaosSolution, t: float) -> float:
    return solution.eta.eta0 * solution.growth(t)


@dataclass(frozen=True)
class MomentResult:
    value: float
    tail_flag: bool
    terms: np.ndarray


def _tail_ok(terms) -> bool:
    last = np.asarray(terms[-3:])
    if last.size < 3:
        return True
    if np.all(last == 0):
        return True
    return bool(last[1] < last[0] and last[2] < last[1])


def second_moment(solution: ChaosSolution, t: float) -> MomentResult:
    """``E X_t**2 = sum_n n! ||f_n^t||**2`` truncated at ``n_max``.

    ``tail_flag`` is true when the last three terms decrease.
    """
    terms = np.array([math.factorial(n) * kernel_norm_sq(solution, n, t) for n in range(solution.n_max + 1)])
    return MomentResult(float(terms.sum()), _tail_ok(terms), terms)


def evaluate_solution(solution: ChaosSolution, paths, t: float):
    """``X_t = sum_{n <= n_max} I_n(f_n^t)`` per path; returns ``(values, per_level)``."""
    sl = solution.slice(t)
    distinct, gram = _slice_gram([sl], solution.constants)
    bvals = np.array([np.atleast_1d(wiener_integral(paths, e)) for e in distinct])
    levels = np.zeros((solution.n_max + 1, bvals.shape[1]))
    for n in range(solution.n_max + 1):
        if n > POLARIZATION_CAP:
            raise InvalidArgument(f"level {n} exceeds the polarization cap {POLARIZATION_CAP}")
        for term in sl.terms[n]:
            fac = sl.factors(term)
            if any(e.is_zero for e in fac):
                continue
            uniq, mult = group_factors(fac)
            idx = [_index(distinct, e) for e in uniq]
            levels[n] += term.coefficient * sym_integral(bvals[idx], gram[np.ix_(idx, idx)], mult)
    return levels.sum(axis=0), levels


def divergence_terms(solution: ChaosSolution, t: float) -> np.ndarray:
    """``n! ||f_{n-1}^t||`` for ``n = 1..n_max``: truncated monitor of the divergence-domain series."""
    return np.array(
        [math.factorial(n) * math.sqrt(kernel_norm_sq(solution, n - 1, t)) for n in range(1, solution.n_max + 1)]
    )


def dump_kernels(sl: ChaosSlice, path) -> int:
    rows = []
    for n, terms in sl.terms.items():
        for i, term in enumerate(terms):
            rows.append([n, i, term.coefficient, term.b_power, term.eta_level])
    return write_csv(path, ["n", "term_index", "coefficient", "j", "eta_level"], rows)


# ---------------------------------------------------------------------------
# pointwise recursion check


@dataclass(frozen=True)
class RecursionReport:
    n: int
    t: float
    max_residual: float
    residuals: np.ndarray
    tuples: np.ndarray


def _factor_rows(solution, term: KernelTerm, pts, s):
    """Values of the factors of ``term`` at the points ``pts`` for kernel time ``s``."""
    b = solution.diffusion_b.f(pts) * (pts <= s + 1e-12)
    _, eta_f = solution.eta.level(term.eta_level)[term.eta_index]
    rows = [b] * term.b_power + [e.f(pts) for e in eta_f]
    return np.array(rows).reshape(len(rows), len(pts))


def _kernel_base(solution, n, s, pts):
    """``f_n^s(pts) / e(s)``: the bracket in the kernel formula, pointwise."""
    total = 0.0
    for j in range(n + 1):
        for idx, (c, _) in enumerate(solution.eta.level(n - j)):
            if c == 0:
                continue
            term = KernelTerm(c / math.factorial(j), j, n - j, idx)
            total += term.coefficient * permanent(_factor_rows(solution, term, pts, s)) / math.factorial(n)
    return total


def _eta_value(solution, n, pts):
    total = 0.0
    for c, fac in solution.eta.level(n):
        if fac:
            rows = np.array([e.f(pts) for e in fac])
            total += c * permanent(rows) / math.factorial(n)
        else:
            total += c
    return total


def kernel_recursion_check(solution: ChaosSolution, n: int, t: float, n_tuples: int = 200, seed: int = 0) -> RecursionReport:
    """Max relative residual of the pointwise kernel recursion over random node tuples.

    Both sides use the symbolic kernels; the drift integral is a trapezoid
    over the grid nodes in ``[0, t]``.
    """
    if n < 1:
        raise InvalidArgument("the recursion is checked for n >= 1")
    grid = solution.grid
    m = grid.node_index(t)
    x = grid.nodes
    rng = np.random.default_rng(seed)
    a_vals = solution.drift_a.values[: m + 1]
    growth = np.exp(solution._log_growth[: m + 1])
    tuples = np.empty((n_tuples, n))
    lhs = np.empty(n_tuples)
    rhs = np.empty(n_tuples)
    for r in range(n_tuples):
        hi = m if r % 2 == 0 or m == grid.n_cells else grid.n_cells
        pool = np.arange(1, hi + 1)
        pts = x[np.sort(rng.choice(pool, size=n, replace=len(pool) < n))]
        tuples[r] = pts
        lhs[r] = growth[m] * _kernel_base(solution, n, t, pts)
        # bracket is constant in s between consecutive tuple points
        breaks = np.unique(pts)
        seg_vals = np.array([_kernel_base(solution, n, s, pts) for s in np.concatenate([[0.0], breaks])])
        seg = np.searchsorted(breaks, x[: m + 1] + 1e-12, side="right")
        integrand = a_vals * growth * seg_vals[seg]
        drift = float(np.sum(0.5 * grid.spacing * (integrand[1:] + integrand[:-1])))
        jump = 0.0
        for jdx in range(n):
            tj = pts[jdx]
            if tj > t + 1e-12:
                continue
            rest = np.delete(pts, jdx)
            kj = grid.node_index(tj)
            jump += solution.diffusion_b.f(tj) * growth[kj] * _kernel_base(solution, n - 1, tj, rest)
        rhs[r] = _eta_value(solution, n, pts) + drift + jump / n
    scale = np.maximum(np.abs(lhs), 0.01 * np.max(np.abs(lhs)))
    with np.errstate(divide="ignore", invalid="ignore"):
        res = np.where(scale > 0, np.abs(lhs - rhs) / scale, np.abs(lhs - rhs))
    return RecursionReport(n, float(t), float(np.max(res)), res, tuples)


# ---------------------------------------------------------------------------
# constants and conditions


@dataclass(frozen=True)
class BoundConstants:
    B_T_p: float
    B_H_p_t: float
    A: float
    B_p: float
    operator_norm: float


def _terminal_factor(alpha, p):
    e = p - 2 * (1 - alpha * p)
    return (e / (p - 2)) ** (e / (2 * p))


def b_t_p(order: FracOrder, p: float, horizon: float, c_norm: float) -> float:
    a = order.alpha
    return horizon ** ((p - 2) / (2 * p)) / special.gamma(1 - a) * c_norm * _terminal_factor(a, p)


def _check_p(order, p):
    if not (2.0 < p < 1.0 / order.alpha):
        raise InvalidArgument(f"p must lie in (2, 1/alpha) = (2, {1 / order.alpha}), got {p}")


def bound_constants(
    order: FracOrder,
    p: float,
    horizon: float,
    a: SampledFunction,
    b_restricted: LambdaElement,
    c_norm: float | None = None,
    constants: SpaceConstants | None = None,
) -> BoundConstants:
    """The four constants entering the moment and continuity bounds."""
    _check_p(order, p)
    al = order.alpha
    if c_norm is None:
        c_norm = operator_norm(order, p, horizon)
    if constants is None:
        constants = SpaceConstants.for_order(order)
    btp = b_t_p(order, p, horizon, c_norm)
    bp = horizon ** ((p - 2) / (2 * p)) / al * _terminal_factor(al, p) * c_norm
    if abs(al / special.gamma(1 - al) * bp - btp) > 1e-12 * btp:
        raise ArithmeticError("B_p and B_T_p are inconsistent")
    bh = 1 + constants.c_h * (btp * lp_norm(b_restricted, p) + lp_norm(b_restricted, 2.0)) ** 2
    h = a.grid.spacing
    av = a.values
    int_abs = float(np.sum(0.5 * h * (np.abs(av[1:]) + np.abs(av[:-1]))))
    l2 = math.sqrt(float(np.sum(0.5 * h * (av[1:] ** 2 + av[:-1] ** 2))))
    big_a = math.exp(int_abs) * l2 * special.beta(al, 0.5 - al) * 2 * horizon / special.gamma(al)
    return BoundConstants(btp, bh, big_a, bp, c_norm)


@dataclass(frozen=True)
class SupReport:
    value: float
    t_argmax: float
    t_grid: np.ndarray
    values: np.ndarray


SUP_POINTS = 64


def sup_b(b: LambdaElement, p: float, c_norm: float | None = None, constants=None) -> SupReport:
    """``sup_t B_{H,p,t}`` over 64 nodes of ``[0, T (1 - 2**-10)]``."""
    order = b.order
    _check_p(order, p)
    grid = b.grid
    if c_norm is None:
        c_norm = operator_norm(order, p, grid.horizon)
    if constants is None:
        constants = SpaceConstants.for_order(order)
    btp = b_t_p(order, p, grid.horizon, c_norm)
    kmax = int(np.floor(grid.n_cells * (1 - 2.0**-10)))
    ks = np.unique(np.round(np.linspace(0, kmax, SUP_POINTS)).astype(int))
    ts = grid.nodes[ks]
    vals = []
    for t in ts:
        bt = restrict(b, float(t))
        vals.append(1 + constants.c_h * (btp * lp_norm(bt, p) + lp_norm(bt, 2.0)) ** 2)
    vals = np.array(vals)
    i = int(np.argmax(vals))
    return SupReport(float(vals[i]), float(ts[i]), ts, vals)


@dataclass(frozen=True)
class ConditionReport:
    verdict: str
    b_sup: float | None
    t_argmax: float | None
    log_terms: np.ndarray
    partial_sums: np.ndarray
    ratios: np.ndarray
    theta: float | None = None
    exponent_check: bool | None = None
    exponent_value: float | None = None

    @property
    def series_terms(self) -> np.ndarray:
        with np.errstate(over="ignore"):
            return np.exp(self.log_terms)

    def lines(self, name: str) -> list[str]:
        out = [f"verdict: {self.verdict}", f"condition: {name}"]
        if self.b_sup is not None:
            out.append(f"b_sup: {self.b_sup:.17g}")
            out.append(f"t_argmax: {self.t_argmax:.17g}")
        if self.theta is not None:
            out.append(f"theta: {self.theta:.17g}")
            out.append(f"exponent_value: {self.exponent_value:.17g}")
            out.append(f"exponent_check: {self.exponent_check}")
        finite = self.partial_sums[np.isfinite(self.partial_sums)]
        if finite.size:
            out.append(f"partial_sum: {finite[-1]:.17g}")
        out.append("last_ratios: " + " ".join(f"{r:.6g}" for r in self.ratios[-4:]))
        return out


SERIES_LEVELS = 60
_WINDOW = 5


def series_verdict(log_terms: np.ndarray) -> tuple[str, np.ndarray]:
    """Decay verdict from the last five terms of a positive series.

    ``pass``: terms vanish, or ratios stay below 0.9, or the Raabe statistic
    ``k (1 - r_k)`` stays above 1.5 (covers ``1/k**2`` type decay);
    ``fail``: ratios stay at or above 1, or Raabe stays below 0.5;
    ``inconclusive`` otherwise.
    """
    lt = np.asarray(log_terms, dtype=float)
    tail = lt[-_WINDOW:]
    if np.all(np.isneginf(tail)):
        return "pass", np.zeros(_WINDOW - 1)
    with np.errstate(invalid="ignore"):
        ratios = np.exp(np.diff(tail))
    if np.any(~np.isfinite(ratios)):
        return "inconclusive", ratios
    k = np.arange(len(lt) - _WINDOW + 1, len(lt))
    raabe = k * (1 - ratios)
    if np.all(ratios < 0.9) or np.all(raabe > 1.5):
        return "pass", ratios
    if np.all(ratios >= 1 - 1e-9) or np.all(raabe < 0.5):
        return "fail", ratios
    return "inconclusive", ratios


@dataclass(frozen=True)
class NormSequence:
    """``log ||eta_k||`` as a function of ``k`` (log scale avoids underflow)."""

    log_norm: object
    label: str = "custom"

    def __call__(self, k: int) -> float:
        return float(self.log_norm(k))

    @classmethod
    def exponential(cls, c: float) -> "NormSequence":
        """``||eta_k|| = c**k / k!``."""
        return cls(lambda k: k * math.log(c) - math.lgamma(k + 1), f"exponential({c})")

    @classmethod
    def critical(cls, s: float) -> "NormSequence":
        """``||eta_k|| = s**(-k/2) ((k+1)!)**(-1/2)``: first-condition terms are all 1."""
        return cls(lambda k: -0.5 * k * math.log(s) - 0.5 * math.lgamma(k + 2), f"critical({s})")

    @classmethod
    def from_values(cls, values) -> "NormSequence":
        vals = np.asarray(values, dtype=float)
        with np.errstate(divide="ignore"):
            logs = np.log(vals)
        return cls(lambda k: logs[k] if k < len(logs) else -math.inf, "values")


MAX_LEVELS = 4096


def _log_norms(eta, levels, constants=None):
    """``log ||eta_k||`` for ``k < levels`` (``None`` when the sequence cannot be extended)."""
    if isinstance(eta, EtaSpec):
        norms = eta.level_norms(constants)
        if eta.explicit:
            norms = np.concatenate([norms, np.zeros(max(levels - len(norms), 0))])
        with np.errstate(divide="ignore"):
            return np.log(norms), False
    if isinstance(eta, NormSequence):
        return np.array([eta(k) for k in range(levels)]), True
    if callable(eta):
        vals = np.array([eta(k) for k in range(levels)], dtype=float)
        if np.any(vals < 0):
            raise InvalidArgument("norms must be non-negative")
        with np.errstate(divide="ignore"):
            return np.log(vals), False
    vals = np.asarray(eta, dtype=float)
    if np.any(vals < 0):
        raise InvalidArgument("norms must be non-negative")
    with np.errstate(divide="ignore"):
        return np.log(vals), False


def _series(eta, make_terms):
    """Evaluate the series, doubling the level count while its terms still grow."""
    levels = SERIES_LEVELS
    while True:
        logs, extendable = _log_norms(eta, levels)
        lt = make_terms(np.arange(len(logs)), logs)
        verdict, ratios = series_verdict(lt)
        growing = verdict == "fail" and np.all(ratios > 1 + 1e-9)
        if not (extendable and growing and levels < MAX_LEVELS):
            return lt, verdict, ratios
        levels *= 2


def _partial(log_terms):
    with np.errstate(over="ignore"):
        return np.cumsum(np.exp(log_terms))


def check_existence_condition(eta, order: FracOrder, p_tilde: float, b: LambdaElement, c_norm=None, sup=None) -> ConditionReport:
    """Series ``sum (k+1)! ||eta_k||**2 S**k`` with ``S = sup_t B_{H,p~,t}``.

    ``eta`` is an :class:`EtaSpec`, a :class:`NormSequence`, a callable
    ``k -> ||eta_k||`` or an array of norms.
    """
    _check_p(order, p_tilde)
    if sup is None:
        sup = sup_b(b, p_tilde, c_norm)
    log_s = math.log(sup.value)

    def terms(k, logs):
        with np.errstate(invalid="ignore"):
            return special.gammaln(k + 2) + 2 * logs + k * log_s

    lt, verdict, ratios = _series(eta, terms)
    return ConditionReport(verdict, sup.value, sup.t_argmax, lt, _partial(lt), ratios)


def continuity_exponent(order: FracOrder, p: float, theta: float) -> float:
    """``(1 + e**(2 theta)) * min((p - 2)/2p, alpha, (1 - alpha p)/p)``; must exceed 1."""
    _check_p(order, p)
    a = order.alpha
    return (1 + math.exp(2 * theta)) * holder_bound(order, p)


def holder_bound(order: FracOrder, p: float) -> float:
    a = order.alpha
    return min((p - 2) / (2 * p), a, (1 - a * p) / p)


def check_continuity_condition(eta, theta: float, order: FracOrder, p: float, sup: SupReport | None = None) -> ConditionReport:
    """Series ``sum e**(k theta) k**(k/2) ||eta_k||`` plus the exponent requirement."""
    expo = continuity_exponent(order, p, theta)

    def terms(k, logs):
        return k * theta + special.xlogy(k / 2, k) + logs

    lt, verdict, ratios = _series(eta, terms)
    ok = expo > 1
    if verdict == "pass" and not ok:
        verdict = "fail"
    return ConditionReport(
        verdict,
        None if sup is None else sup.value,
        None if sup is None else sup.t_argmax,
        lt,
        _partial(lt),
        ratios,
        float(theta),
        bool(ok),
        float(expo),
    )


# ---------------------------------------------------------------------------
# Hölder regularity


@dataclass(frozen=True)
class HolderEstimate:
    delta: float
    slope: float
    lags: np.ndarray
    moments: np.ndarray


def _fit(lags, values, scale):
    lags = np.asarray(lags, dtype=float)
    values = np.asarray(values, dtype=float)
    if np.all(values <= 1e-28):
        return math.inf
    slope = np.polyfit(np.log(lags), np.log(values), 1)[0]
    return float(slope / scale)


def default_pairs(grid, base: float = 0.25, decades: float = 2.0, points: int = 8):
    """Node pairs ``(s, s + lag)`` with lags log-spaced over ``decades`` decades."""
    T = grid.horizon
    hi = 0.5 * T
    lags = np.unique(np.round(np.geomspace(hi * 10**-decades, hi, points) / grid.spacing).astype(int))
    lags = lags[lags >= 1]
    s0 = int(round(base * T / grid.spacing))
    return [(grid.nodes[s0], grid.nodes[s0 + k]) for k in lags if s0 + k <= grid.n_cells]


def holder_exponent_estimate(solution: ChaosSolution, q: float, paths, t_pairs=None) -> HolderEstimate:
    """Monte Carlo ``E|X_t - X_s|**q`` on a lag ladder; slope / q estimates ``delta``."""
    if t_pairs is None:
        t_pairs = default_pairs(solution.grid)
    lags = np.array([t - s for s, t in t_pairs])
    if len(np.unique(np.round(lags, 12))) < 4:
        raise InvalidArgument("need at least 4 distinct lags")
    cache = {}

    def value(t):
        k = solution.grid.node_index(t)
        if k not in cache:
            cache[k] = evaluate_solution(solution, paths, t)[0]
        return cache[k]

    moments = np.array([np.mean(np.abs(value(t) - value(s)) ** q) for s, t in t_pairs])
    delta = _fit(lags, moments, q)
    return HolderEstimate(delta, delta * q, lags, moments)


def increment_second_moment(solution: ChaosSolution, s: float, t: float) -> float:
    """``E|X_t - X_s|**2`` from kernel norms."""
    total = 0.0
    for n in range(solution.n_max + 1):
        d = kernel_inner(solution, n, t, t) + kernel_inner(solution, n, s, s) - 2 * kernel_inner(solution, n, t, s)
        total += math.factorial(n) * d
    return total


def tensor_power_increment_norm(g: LambdaElement, h: LambdaElement, n: int, constants=None) -> float:
    """``||g^{(x)n} - h^{(x)n}||`` from the three pairings of ``g`` and ``h``."""
    gg = inner(g, g, constants)
    hh = inner(h, h, constants)
    gh = inner(g, h, constants)
    return math.sqrt(max(gg**n + hh**n - 2 * gh**n, 0.0))


def increment_exponent(b: LambdaElement, n: int, pairs=None, constants=None) -> HolderEstimate:
    """Fitted exponent of ``||(b 1_[0,t])^n - (b 1_[0,s])^n||`` against ``t - s``."""
    if pairs is None:
        pairs = default_pairs(b.grid, base=0.3)
    lags = np.array([t - s for s, t in pairs])
    vals = np.array(
        [tensor_power_increment_norm(restrict(b, t), restrict(b, s), n, constants) for s, t in pairs]
    )
    slope = _fit(lags, vals, 1.0)
    return HolderEstimate(slope, slope, lags, vals)
