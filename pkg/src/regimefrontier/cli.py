"""Command line batch runner: solve, frontier, simulate, validate.

All subcommands read one JSON model config (see :mod:`regimefrontier.config`)
and write line-oriented artifacts — CSV for curves, JSON for summaries — so
downstream tooling can consume results without importing this package.

Usage examples::

    regimefrontier solve --config model.json --out results/
    regimefrontier frontier --config model.json --z 1.1:0.05:1.5
    regimefrontier frontier --config model.json --z 1.2,1.3 --density-overlay 0,0.5,0.8
    regimefrontier simulate --config model.json --paths 100000 --seed 7
    regimefrontier validate --config model.json

Exit codes
----------
0   success (validate: every criterion PASS or INCONCLUSIVE)
2   invalid configuration; a single JSON error object goes to stderr
3   solver failure (instability, lost positivity, ill-posed frontier)
4   a requested target mean lies below the feasible minimum
5   validate found at least one FAIL
64  usage error (unknown flag, missing argument)

Output files are written atomically (temp file + rename), so a failed run
never leaves a partial artifact behind.  Numbers in CSV files carry 12
significant digits; reruns with the same config and seed are byte-identical.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import tempfile
from dataclasses import replace
from pathlib import Path

from .bsde import compute_delta, solve_backward
from .config import ModelConfig, load_config
from .errors import InvalidConfig, ModelError, ZBelowMinimum
from .frontier import (
    build_law,
    feasibility_gamma,
    frontier_curve,
    frontier_inputs,
    variance_at,
    variance_minimum,
    z_minimum,
    z_zero,
)
from .horizon import build_horizon
from .montecarlo import dual_cost_check, simulate

_USAGE_ERROR = 64


class _Parser(argparse.ArgumentParser):
    """Parser whose usage errors exit 64 instead of argparse's default 2.

    Exit 2 is reserved for config validation failures, which carry a JSON
    error object; usage mistakes are a different failure class.
    """

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(_USAGE_ERROR, f"{self.prog}: error: {message}\n")


def _build_parser() -> _Parser:
    parser = _Parser(prog="regimefrontier",
                     description="Mean-variance frontiers under regime "
                                 "switching with a random exit horizon.")
    sub = parser.add_subparsers(dest="command", required=True,
                                metavar="{solve,frontier,simulate,validate}")

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--config", required=True,
                       help="path to the JSON model config")
        p.add_argument("--out", default=".",
                       help="output directory, created if missing (default: .)")
        p.add_argument("--step", type=float, default=None,
                       help="backward solver grid step (default: 1e-4 * T)")

    p_solve = sub.add_parser(
        "solve", help="solve the backward systems; write solutions.csv + summary.json")
    common(p_solve)
    p_solve.set_defaults(func=cmd_solve)

    p_front = sub.add_parser(
        "frontier", help="evaluate the frontier; write frontier.csv + frontier.json")
    common(p_front)
    p_front.add_argument("--z", default=None,
                         help="targets: comma list '1.1,1.2' or range 'start:step:stop' "
                              "(default: z_targets from the config)")
    p_front.add_argument("--density-overlay", default=None,
                         help="comma list of constant exit densities; writes one "
                              "frontier CSV/JSON pair per density")
    p_front.set_defaults(func=cmd_frontier)

    p_sim = sub.add_parser(
        "simulate", help="Monte Carlo run of the optimal law; write simulation.json")
    common(p_sim)
    p_sim.add_argument("--z", default=None,
                       help="targets: comma list or 'start:step:stop' "
                            "(default: z_targets from the config)")
    p_sim.add_argument("--paths", type=int, default=None,
                       help="override run.sim.n_paths")
    p_sim.add_argument("--seed", type=int, default=None,
                       help="override run.sim.base_seed")
    p_sim.add_argument("--per-path", action="store_true", dest="per_path",
                       help="also write paths_<z>.csv (path_id, tau, x_at_exit)")
    p_sim.set_defaults(func=cmd_simulate)

    p_val = sub.add_parser(
        "validate", help="check solver invariants and Monte Carlo agreement; "
                         "write validation.json")
    common(p_val)
    p_val.add_argument("--paths", type=int, default=None,
                       help="override run.sim.n_paths")
    p_val.add_argument("--seed", type=int, default=None,
                       help="override run.sim.base_seed")
    p_val.set_defaults(func=cmd_validate)
    return parser


# --- shared plumbing ----------------------------------------------------------


def _ensure_out(out: str) -> Path:
    path = Path(out)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _atomic_write(path: Path, text: str) -> None:
    """Write text to path via a same-directory temp file and atomic rename."""
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.",
                               suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise


def _fmt(value) -> str:
    """12 significant digits: round-trip error stays below test tolerances."""
    return format(float(value), ".12g")


def _json_default(obj):
    try:
        return float(obj)
    except (TypeError, ValueError):
        raise TypeError(f"not JSON serializable: {type(obj).__name__}")


def _json_text(obj) -> str:
    return json.dumps(obj, indent=2, default=_json_default) + "\n"


def _finite_or_none(value: float):
    value = float(value)
    return value if math.isfinite(value) else None


def _zscore(diff: float, se: float):
    return _finite_or_none(diff / se) if se > 0.0 else None


def _emit_error(exc: ModelError, code: int) -> int:
    sys.stderr.write(json.dumps({"code": exc.code, "message": str(exc)}) + "\n")
    return code


def _to_float(text: str, what: str) -> float:
    try:
        return float(text)
    except ValueError:
        raise InvalidConfig(f"{what}: cannot parse {text!r} as a number")


def _parse_z(text: str) -> list[float]:
    """Parse '--z 1.1,1.2,1.3' or '--z start:step:stop' (stop inclusive)."""
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise InvalidConfig(f"--z range must be start:step:stop, got {text!r}")
        start, step, stop = (_to_float(p, "--z") for p in parts)
        if step <= 0.0:
            raise InvalidConfig(f"--z range step must be positive, got {step}")
        if stop < start:
            raise InvalidConfig(f"--z range is empty: stop {stop} < start {start}")
        count = int(math.floor((stop - start) / step + 1e-9))
        return [start + k * step for k in range(count + 1)]
    values = [_to_float(p, "--z") for p in text.split(",") if p.strip()]
    if not values:
        raise InvalidConfig("--z parsed to an empty list")
    return values


def _z_values(args, cfg: ModelConfig) -> list[float]:
    if getattr(args, "z", None) is not None:
        return _parse_z(args.z)
    if cfg.z_targets:
        return list(cfg.z_targets)
    raise InvalidConfig("no targets: pass --z or set z_targets in the config")


def _apply_overrides(cfg: ModelConfig, args) -> ModelConfig:
    step = getattr(args, "step", None)
    if step is not None:
        if step <= 0.0:
            raise InvalidConfig(f"--step must be positive, got {step}")
        cfg = replace(cfg, step=float(step))
    paths = getattr(args, "paths", None)
    if paths is not None:
        if paths < 2:
            raise InvalidConfig(f"--paths must be at least 2, got {paths}")
        cfg = replace(cfg, sim=replace(cfg.sim, n_paths=int(paths)))
    seed = getattr(args, "seed", None)
    if seed is not None:
        if seed < 0:
            raise InvalidConfig(f"--seed must be nonnegative, got {seed}")
        cfg = replace(cfg, sim=replace(cfg.sim, base_seed=int(seed)))
    return cfg


def _analyze(cfg: ModelConfig):
    """Solve the backward systems and assemble every derived scalar."""
    sol = solve_backward(cfg.market, cfg.exit_law, cfg.generator, h=cfg.step)
    occ = cfg.generator.occupation_probabilities(cfg.initial_regime, sol.grid)
    dv = compute_delta(sol.grid, sol.p, sol.g, cfg.exit_law, occ, cfg.generator)
    inputs = frontier_inputs(sol, dv.delta, cfg.x0, cfg.initial_regime)
    gamma = feasibility_gamma(sol.grid, sol.psi, cfg.market, occ)
    return sol, dv, inputs, gamma


def _csv_text(header: tuple, rows) -> str:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(str(v) if isinstance(v, int) else _fmt(v)
                              for v in row))
    return "\n".join(lines) + "\n"


def _tag(value: float) -> str:
    return format(float(value), "g").replace(".", "p").replace("-", "m")


# --- subcommands ----------------------------------------------------------------


def cmd_solve(cfg: ModelConfig, args) -> int:
    out = _ensure_out(args.out)
    sol, dv, inputs, gamma = _analyze(cfg)

    lines = ["t,regime,psi,p,g"]
    for k, t in enumerate(sol.grid):
        ts = _fmt(t)
        for i in range(cfg.market.n_regimes):
            lines.append(f"{ts},{i},{_fmt(sol.psi[i, k])},"
                         f"{_fmt(sol.p[i, k])},{_fmt(sol.g[i, k])}")
    csv_path = out / "solutions.csv"
    _atomic_write(csv_path, "\n".join(lines) + "\n")

    summary = {
        "delta": dv.delta,
        "f_part": dv.f_part,
        "jump_part": dv.jump_part,
        "gamma": gamma,
        "z_zero": z_zero(sol.psi, cfg.x0, cfg.initial_regime),
        "p0": inputs.p0,
        "g0": inputs.g0,
        "z_min": z_minimum(inputs),
        "var_min": variance_minimum(inputs),
        "condition_61": bool(inputs.denominator < 0.0),
        "wellposedness_margin": inputs.wellposedness_margin,
    }
    json_path = out / "summary.json"
    _atomic_write(json_path, _json_text(summary))
    print(f"wrote {csv_path}")
    print(f"wrote {json_path}")
    return 0


def _write_frontier_pair(out: Path, stem: str, points, inputs, gamma: float,
                         sol, cfg: ModelConfig, density: float | None) -> None:
    rows = [(p.z, p.lambda_star, p.variance, p.std_dev) for p in points]
    csv_path = out / f"{stem}.csv"
    _atomic_write(csv_path,
                  _csv_text(("z", "lambda_star", "variance", "std_dev"), rows))
    header = {
        "p0": inputs.p0,
        "g0": inputs.g0,
        "delta": inputs.delta,
        "z_min": z_minimum(inputs),
        "var_min": variance_minimum(inputs),
        "gamma": gamma,
        "z_zero": z_zero(sol.psi, cfg.x0, cfg.initial_regime),
    }
    if density is not None:
        header["density"] = density
    json_path = out / f"{stem}.json"
    _atomic_write(json_path, _json_text(header))
    print(f"wrote {csv_path}")
    print(f"wrote {json_path}")


def cmd_frontier(cfg: ModelConfig, args) -> int:
    out = _ensure_out(args.out)
    z_values = _z_values(args, cfg)

    if args.density_overlay is None:
        sol, dv, inputs, gamma = _analyze(cfg)
        points = frontier_curve(sol, cfg.market, inputs, z_values)
        _write_frontier_pair(out, "frontier", points, inputs, gamma, sol, cfg,
                             density=None)
        return 0

    densities = [_to_float(p, "--density-overlay")
                 for p in args.density_overlay.split(",") if p.strip()]
    if not densities:
        raise InvalidConfig("--density-overlay parsed to an empty list")
    for f in densities:
        exit_law = build_horizon([{"t_start": 0.0, "f": f}], cfg.market.horizon,
                                 epsilon=cfg.exit_law.epsilon)
        mod = replace(cfg, exit_law=exit_law)
        sol, dv, inputs, gamma = _analyze(mod)
        points = frontier_curve(sol, mod.market, inputs, z_values)
        _write_frontier_pair(out, f"frontier_f{_tag(f)}", points, inputs,
                             gamma, sol, mod, density=f)
    return 0


def cmd_simulate(cfg: ModelConfig, args) -> int:
    out = _ensure_out(args.out)
    z_values = _z_values(args, cfg)
    sol, dv, inputs, gamma = _analyze(cfg)

    targets = []
    for z in z_values:
        law = build_law(sol, cfg.market, inputs, z)
        point = variance_at(inputs, z)
        res = simulate(cfg.market, cfg.exit_law, cfg.generator, law,
                       cfg.x0, cfg.initial_regime, cfg.sim, z=z)
        dual = dual_cost_check(res)
        targets.append({
            "z": z,
            "lambda_star": point.lambda_star,
            "analytic_variance": point.variance,
            "mean_terminal": res.mean_terminal,
            "se_mean": res.se_mean,
            "var_terminal": res.var_terminal,
            "se_var": res.se_var,
            "z_score_mean": _zscore(res.mean_terminal - z, res.se_mean),
            "z_score_var": _zscore(res.var_terminal - point.variance, res.se_var),
            "j_mv_sampled": res.j_mv_sampled,
            "j_mv_weighted": res.j_mv_weighted,
            "j1_weighted": res.j1_weighted,
            "dual_gap": dual.difference,
            "dual_gap_n_se": _finite_or_none(dual.n_se),
        })
        if args.per_path:
            rows = zip(range(res.n_paths),
                       (float(v) for v in res.exit_times),
                       (float(v) for v in res.exit_wealth))
            path_csv = out / f"paths_z{_tag(z)}.csv"
            _atomic_write(path_csv, _csv_text(("path_id", "tau", "x_at_exit"), rows))
            print(f"wrote {path_csv}")

    report = {
        "n_paths": cfg.sim.n_paths,
        "euler_step": cfg.sim.euler_step,
        "base_seed": cfg.sim.base_seed,
        "antithetic": cfg.sim.antithetic,
        "x0": cfg.x0,
        "initial_regime": cfg.initial_regime,
        "targets": targets,
    }
    json_path = out / "simulation.json"
    _atomic_write(json_path, _json_text(report))
    print(f"wrote {json_path}")
    return 0


# Monte Carlo criteria are only conclusive once the 3-SE band is narrow
# relative to the quantity being checked; below that, n_paths is too small
# to distinguish agreement from noise and the criterion reports INCONCLUSIVE.
_MEAN_BAND = 0.05
_VAR_BAND = 0.25


def cmd_validate(cfg: ModelConfig, args) -> int:
    out = _ensure_out(args.out)
    sol, dv, inputs, gamma = _analyze(cfg)

    criteria = [
        {"name": "p_positive", "status": "PASS" if bool((sol.p > 0.0).all()) else "FAIL"},
        {"name": "g_in_unit_interval",
         "status": "PASS" if bool((sol.g > 0.0).all() and (sol.g <= 1.0 + 1e-10).all())
         else "FAIL"},
        {"name": "delta_nonnegative",
         "status": "PASS" if dv.delta >= 0.0 else "FAIL",
         "delta": dv.delta},
        {"name": "condition_61",
         "status": "PASS" if inputs.wellposedness_margin < 0.0 else "FAIL",
         "margin": inputs.wellposedness_margin},
    ]

    for z in cfg.z_targets:
        law = build_law(sol, cfg.market, inputs, z)
        point = variance_at(inputs, z)
        res = simulate(cfg.market, cfg.exit_law, cfg.generator, law,
                       cfg.x0, cfg.initial_regime, cfg.sim, z=z)
        dual = dual_cost_check(res)

        mean_ok = 3.0 * res.se_mean <= _MEAN_BAND * max(1.0, abs(z))
        zs_mean = _zscore(res.mean_terminal - z, res.se_mean)
        criteria.append({
            "name": f"mc_mean_z{_tag(z)}",
            "status": ("INCONCLUSIVE" if not mean_ok
                       else "PASS" if abs(zs_mean or 0.0) <= 3.0 else "FAIL"),
            "z_score": zs_mean,
            "se": res.se_mean,
        })

        band = _VAR_BAND * point.variance
        var_ok = 3.0 * res.se_var <= band if band > 0.0 else res.se_var == 0.0
        zs_var = _zscore(res.var_terminal - point.variance, res.se_var)
        criteria.append({
            "name": f"mc_variance_z{_tag(z)}",
            "status": ("INCONCLUSIVE" if not var_ok
                       else "PASS" if abs(zs_var or 0.0) <= 3.0 else "FAIL"),
            "z_score": zs_var,
            "se": res.se_var,
        })

        criteria.append({
            "name": f"mc_dual_cost_z{_tag(z)}",
            "status": "PASS" if dual.passed else "FAIL",
            "n_se": _finite_or_none(dual.n_se),
        })

    n_fail = sum(1 for c in criteria if c["status"] == "FAIL")
    n_inconclusive = sum(1 for c in criteria if c["status"] == "INCONCLUSIVE")
    report = {
        "overall": "FAIL" if n_fail else "PASS",
        "inconclusive": n_inconclusive,
        "n_paths": cfg.sim.n_paths,
        "criteria": criteria,
    }
    json_path = out / "validation.json"
    _atomic_write(json_path, _json_text(report))

    for c in criteria:
        print(f"{c['status']:12s} {c['name']}")
    print(f"wrote {json_path}")
    if n_inconclusive:
        sys.stderr.write(
            f"warning: {n_inconclusive} Monte Carlo criteria inconclusive "
            f"(standard errors too wide at n_paths={cfg.sim.n_paths})\n")
    return 5 if n_fail else 0


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = load_config(args.config)
        cfg = _apply_overrides(cfg, args)
    except ModelError as exc:
        return _emit_error(exc, 2)
    try:
        return args.func(cfg, args)
    except ZBelowMinimum as exc:
        return _emit_error(exc, 4)
    except InvalidConfig as exc:
        return _emit_error(exc, 2)
    except ModelError as exc:
        return _emit_error(exc, 3)


if __name__ == "__main__":
    sys.exit(main())
