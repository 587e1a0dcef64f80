"""Flat ``key = value`` run configuration (``#`` starts a comment)."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, fields
from pathlib import Path

from .errors import ConfigError

A_KINDS = ("constant", "polynomial")
B_KINDS = ("constant", "phi-given")
ETA_KINDS = ("deterministic", "finite-chaos", "norm-sequence")


@dataclass(frozen=True)
class SolverConfig:
    """Validated run parameters.

    Polynomials are comma-separated coefficients in increasing powers of ``t``.
    ``eta_data`` is ``eta_0`` (deterministic), ``c_0, c_1, ...`` for
    ``sum c_k I_k(e^{(x)k})`` with ``e`` given by ``eta_phi`` (finite-chaos), or
    ``exponential C`` / ``critical`` / a comma list of norms (norm-sequence).
    """

    hurst: float
    horizon: float = 1.0
    n_cells: int = 256
    a_kind: str = "constant"
    a_coefficients: tuple = (0.0,)
    b_kind: str = "constant"
    b_data: tuple = (1.0,)
    eta_kind: str = "deterministic"
    eta_data: str = "1"
    eta_phi: tuple = (1.0,)
    n_max: int = 12
    n_paths: int = 1000
    seed: int = 0
    p: float | None = None
    p_tilde: float | None = None
    theta: float | None = None
    t_points: int = 9
    fracint_coefficients: tuple = (1.0, -1.0, 0.5)
    output_dir: str = "frachaos-out"

    @property
    def alpha(self) -> float:
        return 0.5 - self.hurst

    def snapshot(self) -> dict:
        return asdict(self)


_FIELDS = {f.name: f for f in fields(SolverConfig)}
_FLOATS = {"hurst", "horizon", "p", "p_tilde", "theta"}
_INTS = {"n_cells", "n_max", "n_paths", "seed", "t_points"}
_POLYS = {"a_coefficients", "b_data", "eta_phi", "fracint_coefficients"}


def _parse_value(key, raw, lineno):
    try:
        if key in _FLOATS:
            v = float(raw)
            if not math.isfinite(v):
                raise ValueError
            return v
        if key in _INTS:
            return int(raw)
        if key in _POLYS:
            vals = tuple(float(x) for x in raw.split(","))
            if not all(math.isfinite(v) for v in vals):
                raise ValueError
            return vals
    except ValueError:
        raise ConfigError(f"line {lineno}: cannot parse {key} = {raw!r}") from None
    return raw


def parse_config(text: str, overrides: dict | None = None) -> SolverConfig:
    values = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {line!r}")
        key, raw = (part.strip() for part in line.split("=", 1))
        if key not in _FIELDS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in values:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        values[key] = _parse_value(key, raw, lineno)
    values.update(overrides or {})
    if "hurst" not in values:
        raise ConfigError("missing required key 'hurst'")
    return validate(values)


def load_config(path, overrides: dict | None = None) -> SolverConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    return parse_config(text, overrides)


def validate(values: dict) -> SolverConfig:
    h = values["hurst"]
    if h >= 0.5:
        raise ConfigError("hurst must be < 0.5")
    if h <= 0:
        raise ConfigError("hurst must be > 0")
    alpha = 0.5 - h
    if values.get("horizon", 1.0) <= 0:
        raise ConfigError("horizon must be > 0")
    if values.get("n_cells", 256) < 8:
        raise ConfigError("n_cells must be >= 8")
    if not 0 <= values.get("n_max", 12) <= 12:
        raise ConfigError("n_max must lie in [0, 12]")
    if values.get("n_paths", 1000) < 1:
        raise ConfigError("n_paths must be >= 1")
    if not 0 <= values.get("seed", 0) < 2**64:
        raise ConfigError("seed must be a 64-bit unsigned integer")
    if values.get("t_points", 9) < 2:
        raise ConfigError("t_points must be >= 2")
    for key, kinds in (("a_kind", A_KINDS), ("b_kind", B_KINDS), ("eta_kind", ETA_KINDS)):
        if values.get(key, kinds[0]) not in kinds:
            raise ConfigError(f"{key} must be one of {', '.join(kinds)}, got {values[key]!r}")
    if values.get("a_kind") == "constant" and len(values.get("a_coefficients", (0.0,))) != 1:
        raise ConfigError("a_coefficients must hold a single value when a_kind = constant")
    if values.get("b_kind", "constant") == "constant" and len(values.get("b_data", (1.0,))) != 1:
        raise ConfigError("b_data must hold a single value when b_kind = constant")
    upper = 1.0 / alpha
    p = values.get("p")
    if p is None:
        p = values["p"] = 0.5 * (2.0 + upper)
    if not 2.0 < p < upper:
        raise ConfigError(f"p must lie in (2, 1/alpha) = (2, {upper:.6g}), got {p}")
    pt = values.get("p_tilde")
    if pt is None:
        pt = values["p_tilde"] = 0.5 * (2.0 + p)
    if pt >= p:
        raise ConfigError(f"p_tilde must be < p (p_tilde = {pt}, p = {p})")
    if pt <= 2:
        raise ConfigError(f"p_tilde must be > 2, got {pt}")
    if values.get("theta") is None:
        values["theta"] = default_theta(alpha, p)
    return SolverConfig(**values)


def default_theta(alpha: float, p: float) -> float:
    """Smallest ``theta`` meeting the continuity exponent requirement with a 10% margin."""
    m = min((p - 2) / (2 * p), alpha, (1 - alpha * p) / p)
    return 0.5 * math.log(1.1 / m - 1.0)
