"""Batch driver: ``frachaos <command> --config <file> [--seed N] [--out DIR]``.

Exit status: 0 when a command completes (and every verdict passes), 2 when a
condition check or acceptance criterion fails, 1 on any error.
"""

from __future__ import annotations

import argparse
import sys
import time
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

import numpy as np
from numpy.polynomial import polynomial as npoly

from . import __version__, acceptance, chaos, fbm, plotting
from . import lambda_space as ls
from .config import SolverConfig, load_config
from .csvio import atomic_write_text, write_csv
from .errors import ConfigError, FrachaosError
from .fraccalc import FracOrder, frac_derivative, frac_integral
from .grid import Grid, SampledFunction

COMMANDS = ("fracint", "simulate", "check", "moments", "solve", "validate")
MIN_MC_PATHS = 100
EXIT_OK, EXIT_ERROR, EXIT_CONDITION = 0, 1, 2


@dataclass
class RunManifest:
    command: str
    config: dict
    seed: int
    version: str = __version__
    started: str = ""
    seconds: float = 0.0
    rows: dict = field(default_factory=dict)
    files: list = field(default_factory=list)
    verdict: str = "complete"
    exit_code: int = EXIT_OK

    def text(self) -> str:
        lines = [
            f"command: {self.command}",
            f"version: {self.version}",
            f"seed: {self.seed}",
            f"started: {self.started}",
            f"wall_clock_seconds: {self.seconds:.3f}",
            f"verdict: {self.verdict}",
            f"exit_code: {self.exit_code}",
        ]
        lines += [f"rows.{name}: {n}" for name, n in sorted(self.rows.items())]
        lines += [f"file: {name}" for name in self.files]
        lines += [f"config.{k}: {v}" for k, v in sorted(self.config.items())]
        return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# model construction


def model_grid(cfg: SolverConfig) -> Grid:
    return Grid(cfg.horizon, cfg.n_cells)


def polynomial(grid: Grid, coefficients) -> SampledFunction:
    return SampledFunction(grid, npoly.polyval(grid.nodes, coefficients))


def build_a(cfg: SolverConfig, grid: Grid) -> SampledFunction:
    return polynomial(grid, cfg.a_coefficients)


def build_b(cfg: SolverConfig, grid: Grid) -> ls.LambdaElement:
    order = FracOrder.from_hurst(cfg.hurst)
    if cfg.b_kind == "constant":
        return ls.constant_element(cfg.b_data[0], order, grid)
    return ls.from_phi(polynomial(grid, cfg.b_data), order)


def _floats(text: str, key: str):
    try:
        return [float(x) for x in text.split(",")]
    except ValueError:
        raise ConfigError(f"cannot parse eta_data = {text!r} as numbers") from None


def build_eta(cfg: SolverConfig, grid: Grid, sup: chaos.SupReport | None = None):
    """``EtaSpec`` for explicit kinds, ``NormSequence`` for ``norm-sequence``."""
    order = FracOrder.from_hurst(cfg.hurst)
    data = cfg.eta_data.strip()
    if cfg.eta_kind == "deterministic":
        vals = _floats(data, "eta_data")
        if len(vals) != 1:
            raise ConfigError("eta_data must hold a single value when eta_kind = deterministic")
        return chaos.EtaSpec.deterministic(vals[0])
    if cfg.eta_kind == "finite-chaos":
        element = ls.from_phi(polynomial(grid, cfg.eta_phi), order)
        return chaos.EtaSpec.tensor_powers(_floats(data, "eta_data"), element)
    word, _, arg = data.partition(" ")
    if word == "exponential":
        return chaos.NormSequence.exponential(float(arg or 1.0))
    if word == "critical":
        if sup is None:
            raise ConfigError("eta_data = critical is only meaningful for the check command")
        return chaos.NormSequence.critical(sup.value)
    vals = _floats(data, "eta_data")
    if any(v < 0 for v in vals):
        raise ConfigError("eta_data norms must be non-negative")
    return chaos.NormSequence.from_values(vals)


def build_solution(cfg: SolverConfig) -> chaos.ChaosSolution:
    if cfg.eta_kind == "norm-sequence":
        raise ConfigError("eta_kind = norm-sequence gives no kernels; use deterministic or finite-chaos")
    grid = model_grid(cfg)
    return chaos.ChaosSolution(build_a(cfg, grid), build_b(cfg, grid), build_eta(cfg, grid), cfg.n_max)


def time_nodes(cfg: SolverConfig) -> np.ndarray:
    grid = model_grid(cfg)
    k = np.unique(np.round(np.linspace(0, grid.n_cells, cfg.t_points)).astype(int))
    return grid.nodes[k]


def _need_paths(cfg: SolverConfig):
    if cfg.n_paths < MIN_MC_PATHS:
        raise ConfigError(f"n_paths must be >= {MIN_MC_PATHS} for Monte Carlo commands, got {cfg.n_paths}")


# ---------------------------------------------------------------------------
# commands (each writes into ``out`` and fills the manifest)


def cmd_fracint(cfg: SolverConfig, out: Path, man: RunManifest):
    grid = model_grid(cfg)
    order = FracOrder.from_hurst(cfg.hurst)
    f = polynomial(grid, cfg.fracint_coefficients)
    big_f = frac_integral(f, order)
    back = frac_derivative(big_f, order).function
    t = grid.nodes
    man.rows["fracint.csv"] = write_csv(
        out / "fracint.csv", ["t", "f", "frac_integral", "recovered"], zip(t, f.values, big_f.values, back.values)
    )
    plotting.plot_fracint(t, f.values, big_f.values, back.values, order.alpha, out / "fracint.png")
    man.files += ["fracint.csv", "fracint.png"]


def cmd_simulate(cfg: SolverConfig, out: Path, man: RunManifest):
    _need_paths(cfg)
    grid = model_grid(cfg)
    batch = fbm.simulate(cfg.hurst, grid, cfg.n_paths, cfg.seed)
    man.rows["paths.csv"] = fbm.export_csv(batch, out / "paths.csv")
    plotting.plot_paths(grid.nodes, batch.values, cfg.hurst, out / "paths.png")
    man.files += ["paths.csv", "paths.png"]


def _worst(verdicts) -> str:
    if "fail" in verdicts:
        return "fail"
    if "inconclusive" in verdicts:
        return "inconclusive"
    return "pass"


def cmd_check(cfg: SolverConfig, out: Path, man: RunManifest):
    grid = model_grid(cfg)
    order = FracOrder.from_hurst(cfg.hurst)
    b = build_b(cfg, grid)
    sup = chaos.sup_b(b, cfg.p_tilde)
    eta = build_eta(cfg, grid, sup)
    exist = chaos.check_existence_condition(eta, order, cfg.p_tilde, b, sup=sup)
    cont = chaos.check_continuity_condition(eta, cfg.theta, order, cfg.p, sup=sup)
    consts = chaos.bound_constants(order, cfg.p, cfg.horizon, build_a(cfg, grid), b)
    verdict = _worst([exist.verdict, cont.verdict])
    lines = [f"verdict: {verdict}", ""]
    lines += exist.lines("existence") + [""]
    lines += cont.lines("continuity") + [""]
    lines += [f"constant.{k}: {v:.17g}" for k, v in vars(consts).items()]
    atomic_write_text(out / "check.txt", "\n".join(lines) + "\n")
    rows = []
    for name, rep in (("existence", exist), ("continuity", cont)):
        for k, lt in enumerate(rep.log_terms):
            if np.isfinite(lt):
                rows.append([name, k, lt])
    man.rows["check_terms.csv"] = write_csv(out / "check_terms.csv", ["series", "k", "log_term"], rows)
    plotting.plot_series({"existence": exist, "continuity": cont}, out / "check.png")
    man.files += ["check.txt", "check_terms.csv", "check.png"]
    man.verdict = verdict
    if verdict == "fail":
        man.exit_code = EXIT_CONDITION


def cmd_moments(cfg: SolverConfig, out: Path, man: RunManifest):
    sol = build_solution(cfg)
    rows = []
    for t in time_nodes(cfg):
        m = chaos.second_moment(sol, t)
        rows.append([t, chaos.mean(sol, t), m.value, int(m.tail_flag)])
    man.rows["moments.csv"] = write_csv(out / "moments.csv", ["t", "mean", "second_moment", "tail_flag"], rows)
    arr = np.array(rows, dtype=float)
    plotting.plot_moments(arr[:, 0], arr[:, 1], arr[:, 2], out / "moments.png")
    man.files += ["moments.csv", "moments.png"]


def cmd_solve(cfg: SolverConfig, out: Path, man: RunManifest):
    _need_paths(cfg)
    sol = build_solution(cfg)
    batch = fbm.simulate(cfg.hurst, sol.grid, cfg.n_paths, cfg.seed)
    ts = time_nodes(cfg)
    values = np.column_stack([chaos.evaluate_solution(sol, batch, t)[0] for t in ts])
    rows = ([t, i, values[i, j]] for j, t in enumerate(ts) for i in range(values.shape[0]))
    man.rows["solution.csv"] = write_csv(out / "solution.csv", ["t", "path_id", "X_t"], rows)
    man.rows["kernels.csv"] = chaos.dump_kernels(sol.slice(ts[-1]), out / "kernels.csv")
    plotting.plot_solution(ts, values, out / "solution.png")
    man.files += ["solution.csv", "kernels.csv", "solution.png"]


def cmd_validate(cfg: SolverConfig, out: Path, man: RunManifest):
    results = acceptance.run_all(cfg.seed, report=lambda r: print(r.line(), flush=True))
    rows = [[r.number, r.value, r.threshold, int(r.passed)] for r in results]
    man.rows["validation.csv"] = write_csv(out / "validation.csv", ["criterion", "value", "threshold", "passed"], rows)
    failed = [r for r in results if not r.passed]
    verdict = "fail" if failed else "pass"
    summary = [f"verdict: {verdict}", f"passed: {len(results) - len(failed)}/{len(results)}"]
    atomic_write_text(out / "validation.txt", "\n".join(summary + [r.line() for r in results]) + "\n")
    man.files += ["validation.csv", "validation.txt"]
    man.verdict = verdict
    if failed:
        man.exit_code = EXIT_CONDITION


_HANDLERS = {
    "fracint": cmd_fracint,
    "simulate": cmd_simulate,
    "check": cmd_check,
    "moments": cmd_moments,
    "solve": cmd_solve,
    "validate": cmd_validate,
}


def run_command(name: str, cfg: SolverConfig, out_dir=None) -> RunManifest:
    """Run one command, write its outputs and ``<name>.manifest.txt``."""
    if name not in _HANDLERS:
        raise ConfigError(f"unknown command {name!r}; expected one of {', '.join(COMMANDS)}")
    out = Path(out_dir if out_dir is not None else cfg.output_dir)
    man = RunManifest(name, cfg.snapshot(), cfg.seed)
    man.started = datetime.now(timezone.utc).isoformat(timespec="seconds")
    start = time.perf_counter()
    with np.errstate(all="ignore"):
        _HANDLERS[name](cfg, out, man)
    man.seconds = time.perf_counter() - start
    atomic_write_text(out / f"{name}.manifest.txt", man.text())
    return man


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="frachaos", description="Wiener chaos solver for linear fBm-driven Skorohod equations.")
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--config", required=True, help="flat key = value configuration file")
    parser.add_argument("--seed", type=int, help="override the configured seed")
    parser.add_argument("--out", help="output directory (overrides output_dir)")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    overrides = {} if args.seed is None else {"seed": args.seed}
    try:
        cfg = load_config(args.config, overrides)
        man = run_command(args.command, cfg, args.out)
    except FrachaosError as exc:
        print(f"frachaos: error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except Exception as exc:  # noqa: BLE001 - the exit-code contract covers every failure
        print(f"frachaos: error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_ERROR
    print(f"{args.command}: {man.verdict} ({man.seconds:.2f}s) -> {Path(args.out or cfg.output_dir)}")
    return man.exit_code


if __name__ == "__main__":
    sys.exit(main())
