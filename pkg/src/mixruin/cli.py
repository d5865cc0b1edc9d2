"""Command-line front end.

Usage::

    mixruin closed-form --config model.toml [--out psi.csv] [--u-grid 0:10:0.5]
    mixruin solve       --config model.toml
    mixruin simulate    --config model.toml
    mixruin compare     --config model.toml
    mixruin moments     --config model.toml [--t-grid 1:8:1]

Exit codes: 0 success, 1 config error, 2 unsupported size law, 3 solver
non-convergence, 4 request outside the supported scope.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
import tempfile
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .closedform import ruin_prob_mixed
from .errors import MixRuinError, NoConvergence, NotApplicable, UnsupportedJumpLaw
from .kernels import build_signed_kernel, conditional_model
from .model import (
    Degenerate,
    Discrete,
    Empirical,
    Exponential,
    Gamma,
    IndependentGamma,
    JumpLaw,
    ModelSpec,
    Pareto,
    mean_surplus,
    var_surplus,
)
from .montecarlo import default_horizon, estimate_ruin
from .renewal_solver import LundbergClosure, SolverGrid, ZeroClosure, find_adjustment, solve_renewal

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

EXIT_OK, EXIT_CONFIG, EXIT_UNSUPPORTED, EXIT_NO_CONVERGENCE, EXIT_OUT_OF_SCOPE = 0, 1, 2, 3, 4


class ConfigError(MixRuinError, ValueError):
    pass


class OutOfScope(MixRuinError):
    pass


@dataclass
class RunConfig:
    model: ModelSpec
    u_grid: Tuple[float, float, float] = (0.0, 10.0, 1.0)
    t_grid: Tuple[float, float, float] = (1.0, 10.0, 1.0)
    solver: Dict[str, object] = field(default_factory=dict)
    mc: Dict[str, object] = field(default_factory=dict)
    output_path: Optional[str] = None


# ---------------------------------------------------------------------------
# config parsing
# ---------------------------------------------------------------------------


def parse_grid(text: str) -> Tuple[float, float, float]:
    try:
        start, stop, step = (float(p) for p in str(text).split(":"))
    except ValueError:
        raise ConfigError(f"grid must look like start:stop:step, got {text!r}") from None
    if not step > 0 or start < 0 or stop < start:
        raise ConfigError(f"invalid grid {text!r}: need step > 0, start >= 0, stop >= start")
    return start, stop, step


def grid_points(grid: Tuple[float, float, float]) -> List[float]:
    start, stop, step = grid
    count = int(math.floor((stop - start) / step + 1e-9)) + 1
    return [float(f"{start + k * step:.12g}") for k in range(count)]


def _number(section, key, name, default=None, positive=False):
    if key not in section:
        if default is None:
            raise ConfigError(f"missing {name}.{key}")
        return default
    value = section[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{name}.{key} must be a number")
    if positive and not value > 0:
        raise ConfigError(f"{name}.{key} must be positive")
    return float(value)


def _parse_law(section, name, base_dir: Path) -> JumpLaw:
    if not isinstance(section, dict):
        raise ConfigError(f"missing [{name}] section")
    dist = section.get("dist")
    if dist == "exponential":
        return Exponential(_number(section, "rate", name, positive=True))
    if dist == "gamma":
        return Gamma(_number(section, "shape", name, positive=True), _number(section, "rate", name, positive=True))
    if dist == "pareto":
        return Pareto(_number(section, "scale", name, positive=True), _number(section, "tail_index", name, positive=True))
    if dist == "empirical":
        if "sample" in section:
            return Empirical(tuple(section["sample"]))
        if "path" in section:
            path = base_dir / section["path"]
            try:
                values = np.loadtxt(path, dtype=float, ndmin=1)
            except OSError as exc:
                raise ConfigError(f"cannot read sample file {path}: {exc}") from None
            return Empirical(tuple(values.tolist()))
        raise ConfigError(f"[{name}] empirical law needs 'sample' or 'path'")
    raise ConfigError(f"[{name}] dist must be exponential, gamma, pareto or empirical, got {dist!r}")


def _parse_mixing(section):
    if not isinstance(section, dict):
        raise ConfigError("missing [mixing] section")
    kind = section.get("type")
    if kind == "degenerate":
        return Degenerate(_number(section, "gamma", "mixing"), _number(section, "delta", "mixing"))
    if kind == "discrete":
        atoms = section.get("atoms")
        if not atoms or not all(isinstance(a, list) and len(a) == 3 for a in atoms):
            raise ConfigError("[mixing] discrete needs atoms = [[gamma, delta, prob], ...]")
        return Discrete(tuple(tuple(float(v) for v in a) for a in atoms))
    if kind == "gamma":
        return IndependentGamma(
            _number(section, "gamma_shape", "mixing"),
            _number(section, "gamma_rate", "mixing"),
            _number(section, "delta_shape", "mixing"),
            _number(section, "delta_rate", "mixing"),
        )
    raise ConfigError(f"[mixing] type must be degenerate, discrete or gamma, got {kind!r}")


def load_config(path: str) -> RunConfig:
    p = Path(path)
    try:
        with p.open("rb") as fh:
            raw = tomllib.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"cannot parse {path}: {exc}") from None
    try:
        model_sec = raw.get("model", {})
        model = ModelSpec(
            u=_number(model_sec, "u", "model", default=0.0),
            c=_number(model_sec, "c", "model"),
            premium_law=_parse_law(raw.get("premium_jumps"), "premium_jumps", p.parent),
            claim_law=_parse_law(raw.get("claims"), "claims", p.parent),
            mixing=_parse_mixing(raw.get("mixing")),
        )
    except ConfigError:
        raise
    except (ValueError, TypeError) as exc:
        raise ConfigError(str(exc)) from None
    cfg = RunConfig(model=model)
    grid = raw.get("grid", {})
    if "u" in grid:
        cfg.u_grid = parse_grid(grid["u"])
    if "t" in raw.get("moments", {}):
        cfg.t_grid = parse_grid(raw["moments"]["t"])
    cfg.solver = dict(raw.get("solver", {}))
    cfg.mc = dict(raw.get("mc", {}))
    cfg.output_path = raw.get("output", {}).get("path")
    return cfg


# ---------------------------------------------------------------------------
# formatting and output
# ---------------------------------------------------------------------------


def fmt(x) -> str:
    """Shortest round-trip repr, capped at 12 significant digits."""
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return str(int(x))
    return repr(float(f"{float(x):.12g}"))


def write_csv(path: str, header: Sequence[str], rows: Sequence[Sequence]) -> None:
    """Write atomically: temp file in the target directory, then rename."""
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    lines = [",".join(header)] + [",".join(fmt(v) for v in row) for row in rows]
    fd, tmp = tempfile.mkstemp(dir=target.parent, prefix=f".{target.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write("\n".join(lines) + "\n")
        os.replace(tmp, target)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


# ---------------------------------------------------------------------------
# computations behind the commands
# ---------------------------------------------------------------------------


def _is_exponential(model: ModelSpec) -> bool:
    return isinstance(model.premium_law, Exponential) and isinstance(model.claim_law, Exponential)


def solver_curve(cfg: RunConfig, us: Sequence[float]):
    """Atom-weighted solver values at ``us`` and the worst atom residual."""
    model = cfg.model
    if model.c <= 0:
        raise OutOfScope("the renewal solver needs c > 0; use the closed-form command for zero drift")
    if not isinstance(model.mixing, (Degenerate, Discrete)):
        raise OutOfScope("the renewal solver supports degenerate and discrete mixing only")
    h = float(cfg.solver.get("h", 0.01))
    tol = float(cfg.solver.get("tolerance", 1e-10))
    max_iter = int(cfg.solver.get("max_iterations", 100_000))
    tail = cfg.solver.get("tail", "lundberg")
    if tail not in ("lundberg", "zero"):
        raise ConfigError("[solver] tail must be 'lundberg' or 'zero'")
    total = np.zeros(len(us))
    worst = 0.0
    for g, d, p in model.mixing.atoms:
        kernel = build_signed_kernel(conditional_model(model, g, d))
        r = find_adjustment(kernel, model.c)
        u_max = cfg.solver.get("u_max")
        if u_max is None:
            u_max = max(40.0, 12.0 / r) if r else 40.0
        u_max = max(float(u_max), max(us) + h)
        mode = LundbergClosure(r) if (tail == "lundberg" and r) else ZeroClosure()
        grid = SolverGrid.from_range(h, u_max, tail_mode=mode, tolerance=tol, max_iterations=max_iter)
        sol = solve_renewal(kernel, model.c, grid)
        total += p * np.asarray(sol(np.asarray(us)))
        worst = max(worst, sol.residual)
    return total, worst


def _mc_params(cfg: RunConfig):
    mc = cfg.mc
    if "seed" not in mc:
        raise ConfigError("[mc] seed is required; there is no entropy fallback")
    seed = mc["seed"]
    if isinstance(seed, bool) or not isinstance(seed, int) or seed < 0:
        raise ConfigError("[mc] seed must be a nonnegative integer")
    paths = mc.get("paths", 100_000)
    if isinstance(paths, bool) or not isinstance(paths, int) or paths < 100:
        raise ConfigError("[mc] paths must be an integer >= 100")
    horizon = float(mc.get("horizon", default_horizon(cfg.model)))
    if not horizon > 0:
        raise ConfigError("[mc] horizon must be positive")
    return int(paths), horizon, int(seed)


def cmd_closed_form(cfg: RunConfig, out: str) -> int:
    rows = [(u, ruin_prob_mixed(cfg.model, u)) for u in grid_points(cfg.u_grid)]
    write_csv(out, ["u", "psi_closed"], rows)
    return EXIT_OK


def cmd_solve(cfg: RunConfig, out: str) -> int:
    us = grid_points(cfg.u_grid)
    vals, residual = solver_curve(cfg, us)
    write_csv(out, ["u", "psi_solver", "residual"], [(u, v, residual) for u, v in zip(us, vals)])
    return EXIT_OK


def cmd_simulate(cfg: RunConfig, out: str) -> int:
    paths, horizon, seed = _mc_params(cfg)
    rows = []
    for u in grid_points(cfg.u_grid):
        est = estimate_ruin(cfg.model, u, horizon=horizon, n_paths=paths, seed=seed)
        rows.append((u, est.estimate, est.ci_low, est.ci_high, est.n_paths, est.seed))
    write_csv(out, ["u", "psi_mc", "ci_low", "ci_high", "n_paths", "seed"], rows)
    return EXIT_OK


def cmd_compare(cfg: RunConfig, out: str) -> int:
    paths, horizon, seed = _mc_params(cfg)
    us = grid_points(cfg.u_grid)
    header = ["u"]
    columns = []
    closed = None
    if _is_exponential(cfg.model):
        closed = [ruin_prob_mixed(cfg.model, u) for u in us]
        header.append("psi_closed")
        columns.append(closed)
    solver = None
    try:
        solver, _ = solver_curve(cfg, us)
        header.append("psi_solver")
        columns.append(list(solver))
    except OutOfScope as exc:
        print(f"note: solver column omitted ({exc})", file=sys.stderr)
    ests = [estimate_ruin(cfg.model, u, horizon=horizon, n_paths=paths, seed=seed) for u in us]
    header += ["psi_mc", "ci_low", "ci_high"]
    columns += [[e.estimate for e in ests], [e.ci_low for e in ests], [e.ci_high for e in ests]]
    rows = [[u] + [col[i] for col in columns] for i, u in enumerate(us)]
    write_csv(out, header, rows)

    parts = []
    if closed is not None and solver is not None:
        parts.append(f"max |closed - solver| = {max(abs(a - b) for a, b in zip(closed, solver)):.3e}")
    reference = closed if closed is not None else (list(solver) if solver is not None else None)
    if reference is not None:
        covered = sum(e.ci_low <= ref <= e.ci_high for e, ref in zip(ests, reference))
        parts.append(f"MC 95% CI covers reference at {covered}/{len(us)} points")
    print("; ".join(parts) if parts else f"wrote {len(us)} rows")
    return EXIT_OK


def cmd_moments(cfg: RunConfig, out: str) -> int:
    rows = [(t, mean_surplus(cfg.model, t), var_surplus(cfg.model, t)) for t in grid_points(cfg.t_grid)]
    write_csv(out, ["t", "mean", "variance"], rows)
    return EXIT_OK


COMMANDS = {
    "closed-form": cmd_closed_form,
    "solve": cmd_solve,
    "simulate": cmd_simulate,
    "compare": cmd_compare,
    "moments": cmd_moments,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mixruin",
        description="Ruin probabilities for surplus models with mixed Poisson premium and claim arrivals.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="TOML model/run configuration")
        p.add_argument("--out", help="output CSV (overrides [output].path)")
        p.add_argument("--u-grid", help="start:stop:step for the initial capital grid")
        if name == "moments":
            p.add_argument("--t-grid", help="start:stop:step for the time grid")
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        if args.u_grid:
            cfg.u_grid = parse_grid(args.u_grid)
        if getattr(args, "t_grid", None):
            cfg.t_grid = parse_grid(args.t_grid)
        out = args.out or cfg.output_path
        if not out:
            raise ConfigError("no output path: pass --out or set [output].path")
        return COMMANDS[args.command](cfg, out)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except UnsupportedJumpLaw as exc:
        print(f"unsupported law: {exc}", file=sys.stderr)
        return EXIT_UNSUPPORTED
    except NoConvergence as exc:
        print(f"solver did not converge: {exc}", file=sys.stderr)
        return EXIT_NO_CONVERGENCE
    except (OutOfScope, NotApplicable) as exc:
        print(f"out of scope: {exc}", file=sys.stderr)
        return EXIT_OUT_OF_SCOPE


if __name__ == "__main__":
    sys.exit(main())
