"""Command-line front end.

Subcommands:
  check-model  randomized structural checks of a model's momentum matrix
  optimize     solve a flight problem from a config file
  playback     re-integrate a saved trajectory at high resolution
  bench        timing statistics over repeated identical solves

Exit codes: 0 success, 2 validation error, 3 infeasible problem,
4 internal numerical failure.
"""

import argparse
import json
import os
import platform
import subprocess
import sys
import time

import numpy as np

from . import _kernels
from .geometry import quat_normalize
from .poly import traj_from_json_dict
from .problem import CONSTRAINT_NAMES, FlightProblem, optimize_flight, playback
from .rbd import compute_centroidal_map, momentum_from_velocities, rotational_coupling_residual
from .robot import ModelError
from .solver import SolverError, SolverOptions
from .urdf import ParseError, load_model


def _write_json(path, payload):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2)
        fh.write("\n")


def _load_config(path):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as e:
        raise ValueError(f"cannot read config {path}: {e}")
    except json.JSONDecodeError as e:
        raise ValueError(f"config {path} is not valid JSON: {e}")


def solver_options_from_config(cfg: dict) -> SolverOptions:
    known = {
        "gradient_step", "constraint_tol", "gradient_tol", "cost_change_tol",
        "max_outer_iterations", "max_line_search_evals", "expansion_factor",
        "max_constraint_passes", "armijo_c1", "zero_search_span", "trust_radius",
    }
    unknown = set(cfg) - known
    if unknown:
        raise ValueError(f"unknown solver option(s): {sorted(unknown)}")
    return SolverOptions(**cfg)


def problem_from_config(model, cfg: dict, literal_swing_anchor: bool = False) -> FlightProblem:
    required = ("t_f", "v_com_liftoff", "p_stance_td_target", "p_swing_lo_target",
                "h_stance", "h_swing")
    missing = [key for key in required if key not in cfg]
    if missing:
        raise ValueError(f"config missing field(s): {missing}")
    kwargs = dict(
        model=model,
        t_f=float(cfg["t_f"]),
        theta0=np.asarray(cfg.get("theta0_quat", [1.0, 0.0, 0.0, 0.0]), dtype=float),
        omega0=np.asarray(cfg.get("omega0", [0.0, 0.0, 0.0]), dtype=float),
        v_com_liftoff=np.asarray(cfg["v_com_liftoff"], dtype=float),
        p_stance_td_target=np.asarray(cfg["p_stance_td_target"], dtype=float),
        p_swing_lo_target=np.asarray(cfg["p_swing_lo_target"], dtype=float),
        h_stance=float(cfg["h_stance"]),
        h_swing=float(cfg["h_swing"]),
        N=int(cfg.get("N", 11)),
        degree=int(cfg.get("degree", 3)),
        literal_swing_anchor=literal_swing_anchor,
    )
    if "q_liftoff_hold" in cfg:
        kwargs["q_liftoff_hold"] = np.asarray(cfg["q_liftoff_hold"], dtype=float)
    for key in ("stance_foot", "swing_foot"):
        if key in cfg:
            kwargs[key] = cfg[key]
    if "normalized_time" in cfg:
        kwargs["normalized_time"] = bool(cfg["normalized_time"])
    return FlightProblem(**kwargs)


def _resolve_model(args, cfg=None):
    source = getattr(args, "model", None)
    if source is None and cfg is not None:
        source = cfg.get("model")
    if source is None:
        raise ValueError("no model given: use --model or a config 'model' field")
    return load_model(source)


def _random_state(rng, model):
    axis = rng.standard_normal(3)
    axis /= np.linalg.norm(axis)
    angle = rng.uniform(-np.pi, np.pi)
    theta = np.empty(4)
    theta[0] = np.cos(0.5 * angle)
    theta[1:] = np.sin(0.5 * angle) * axis
    q = rng.uniform(-np.pi, np.pi, model.n)
    return quat_normalize(theta), q


def cmd_check_model(args):
    model = _resolve_model(args)
    rng = np.random.default_rng(args.seed)
    configs = args.configs
    max_base_lin = 0.0
    max_identity = 0.0
    min_sv = np.inf
    max_momentum = 0.0
    first_failure = None
    for trial in range(configs):
        theta, q = _random_state(rng, model)
        cmap = compute_centroidal_map(model, theta, q)
        base_lin = float(np.max(np.abs(cmap.ang_base_lin)))
        residual, sv = rotational_coupling_residual(model, theta, q)
        v_b = rng.standard_normal(3)
        omega_b = rng.standard_normal(3)
        qdot = rng.standard_normal(model.n)
        state = cmap.momentum(v_b, omega_b, qdot)
        l_ref, k_ref = momentum_from_velocities(model, theta, q, v_b, omega_b, qdot)
        ref = np.concatenate([l_ref, k_ref])
        got = np.concatenate([state.l, state.k])
        mismatch = float(np.linalg.norm(got - ref) / (1.0 + np.linalg.norm(ref)))
        max_base_lin = max(max_base_lin, base_lin)
        max_identity = max(max_identity, residual)
        min_sv = min(min_sv, sv)
        max_momentum = max(max_momentum, mismatch)
        ok = base_lin < 1e-9 and residual < 1e-9 and sv > 0 and mismatch < 1e-8
        if not ok and first_failure is None:
            first_failure = {
                "trial": trial,
                "theta": theta.tolist(),
                "q": q.tolist(),
                "base_linear_entry": base_lin,
                "identity_residual": residual,
                "min_singular_value": sv,
                "momentum_mismatch": mismatch,
            }
    passed = first_failure is None
    report = {
        "model": model.name,
        "joints": model.n,
        "total_mass": model.total_mass,
        "configs": configs,
        "seed": args.seed,
        "max_base_linear_entry": max_base_lin,
        "max_identity_residual": max_identity,
        "min_singular_value": float(min_sv),
        "max_momentum_mismatch": max_momentum,
        "passed": passed,
    }
    if first_failure is not None:
        report["first_failure"] = first_failure
    print(f"model {model.name}: {model.n} joints, {model.total_mass:.2f} kg, {configs} random configurations")
    print(f"  max base-linear momentum entry : {max_base_lin:.3e}  (< 1e-9)")
    print(f"  max coupling identity residual : {max_identity:.3e}  (< 1e-9)")
    print(f"  min coupling singular value    : {min_sv:.3e}  (> 0)")
    print(f"  max momentum route mismatch    : {max_momentum:.3e}  (< 1e-8)")
    print("PASS" if passed else "FAIL")
    if not passed:
        print(json.dumps(first_failure, indent=2))
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        _write_json(os.path.join(args.out, "check_model.json"), report)
    return 0 if passed else 4


def _result_payload(result, seed, cfg):
    return {
        "x_star": result.x_star.tolist(),
        "cost_star": result.cost_star,
        "constraint_residuals": result.constraint_residuals.tolist(),
        "constraint_names": list(CONSTRAINT_NAMES),
        "outer_iterations": result.outer_iterations,
        "function_evaluations": result.function_evaluations,
        "wall_time_s": result.wall_time,
        "termination_reason": result.termination_reason,
        "feasible": result.feasible,
        "projected_gradient_norm": result.projected_gradient_norm,
        "cost_history": result.cost_history,
        "backend": _kernels.BACKEND,
        "seed": seed,
        "config": cfg,
    }


def cmd_optimize(args):
    cfg = _load_config(args.config)
    model = _resolve_model(args, cfg)
    problem = problem_from_config(model, cfg, literal_swing_anchor=args.literal_constraint_3)
    options = solver_options_from_config(cfg.get("solver", {}))
    _kernels.warmup(model.packed)
    result, traj, log = optimize_flight(problem, options, n_verify=args.n_verify)
    _, report = playback(model, problem, traj, n_verify=args.n_verify)

    out = args.out or "."
    os.makedirs(out, exist_ok=True)
    _write_json(os.path.join(out, "result.json"), _result_payload(result, args.seed, cfg))
    _write_json(os.path.join(out, "gamma.json"), traj.to_json_dict(model.joint_names))
    log.to_csv(os.path.join(out, "flight.csv"))
    solver_lines = [
        f"solve: {result.termination_reason} after {result.outer_iterations} iterations, "
        f"{result.function_evaluations} evaluations, {1e3 * result.wall_time:.2f} ms "
        f"[{_kernels.BACKEND} backend]",
        f"cost (touchdown angle at N={problem.N}): {result.cost_star:.6f} rad",
        f"max |constraint residual|: {np.max(np.abs(result.constraint_residuals)):.3e}",
        f"feasible: {result.feasible}",
        "",
    ]
    with open(os.path.join(out, "report.txt"), "w", encoding="utf-8") as fh:
        fh.write("\n".join(solver_lines))
        fh.write(report.text())
    print("\n".join(solver_lines) + report.text(), end="")
    if not result.feasible:
        print("infeasible: constraint residuals did not reach tolerance", file=sys.stderr)
        return 3
    return 0


def cmd_playback(args):
    cfg = _load_config(args.config)
    model = _resolve_model(args, cfg)
    problem = problem_from_config(model, cfg, literal_swing_anchor=args.literal_constraint_3)
    with open(args.gamma, "r", encoding="utf-8") as fh:
        traj = traj_from_json_dict(json.load(fh))
    if abs(traj.t_f - problem.t_f) > 1e-12 * max(problem.t_f, 1.0):
        raise ValueError(
            f"trajectory horizon {traj.t_f} does not match config flight time {problem.t_f}"
        )
    if traj.n != model.n:
        raise ValueError(f"trajectory has {traj.n} joints, model has {model.n}")
    _kernels.warmup(model.packed)
    log, report = playback(model, problem, traj, n_verify=args.n_verify)
    out = args.out or "."
    os.makedirs(out, exist_ok=True)
    log.to_csv(os.path.join(out, "flight.csv"))
    with open(os.path.join(out, "report.txt"), "w", encoding="utf-8") as fh:
        fh.write(report.text())
    print(report.text(), end="")
    return 0


def cmd_bench(args):
    cfg = _load_config(args.config)
    model = _resolve_model(args, cfg)
    problem = problem_from_config(model, cfg, literal_swing_anchor=args.literal_constraint_3)
    options = solver_options_from_config(cfg.get("solver", {}))
    _kernels.warmup(model.packed)
    # untimed run to settle caches and allocator
    warm_result, _, _ = optimize_flight(problem, options, n_verify=problem.N)
    times = []
    results = []
    for _ in range(args.repeats):
        t0 = time.perf_counter()
        result, _, _ = optimize_flight(problem, options, n_verify=problem.N)
        times.append(time.perf_counter() - t0)
        results.append(result)
    times_ms = 1e3 * np.asarray(times)
    deterministic = all(
        np.array_equal(r.x_star, results[0].x_star) for r in results[1:]
    ) and np.array_equal(results[0].x_star, warm_result.x_star)
    stats = {
        "model": model.name,
        "free_variables": problem.layout().p,
        "repeats": args.repeats,
        "backend": _kernels.BACKEND,
        "median_ms": float(np.median(times_ms)),
        "p95_ms": float(np.percentile(times_ms, 95)),
        "min_ms": float(np.min(times_ms)),
        "max_ms": float(np.max(times_ms)),
        "solver_wall_time_median_ms": float(np.median([1e3 * r.wall_time for r in results])),
        "outer_iterations": results[0].outer_iterations,
        "function_evaluations": results[0].function_evaluations,
        "deterministic": bool(deterministic),
        "machine": {
            "platform": platform.platform(),
            "processor": platform.processor() or platform.machine(),
            "python": sys.version.split()[0],
            "numpy": np.__version__,
        },
    }
    if _kernels.BACKEND == "numba":
        import numba

        stats["machine"]["numba"] = numba.__version__
    print(f"{model.name} (p={stats['free_variables']}, {stats['backend']} backend, "
          f"{args.repeats} repeats)")
    print(f"  median {stats['median_ms']:.2f} ms | p95 {stats['p95_ms']:.2f} ms | "
          f"min {stats['min_ms']:.2f} ms | max {stats['max_ms']:.2f} ms")
    print(f"  {stats['outer_iterations']} iterations, {stats['function_evaluations']} evaluations, "
          f"deterministic: {stats['deterministic']}")
    if args.compare_backends:
        stats["fallback"] = _bench_other_backend(args)
        print(f"  pure-python fallback median {stats['fallback']['median_ms']:.2f} ms "
              f"(x{stats['fallback']['median_ms'] / stats['median_ms']:.1f})")
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        _write_json(os.path.join(args.out, "bench.json"), stats)
    return 0


def _bench_other_backend(args):
    """Run a reduced benchmark in a subprocess with the numba path disabled."""
    import tempfile

    with tempfile.TemporaryDirectory() as tmp:
        cli_args = [
            sys.executable, "-m", "swingopt", "bench",
            "--config", args.config,
            "--repeats", str(min(args.repeats, 5)),
            "--out", tmp,
        ]
        if args.model:
            cli_args += ["--model", args.model]
        env = dict(os.environ, SWINGOPT_DISABLE_NUMBA="1")
        proc = subprocess.run(cli_args, env=env, capture_output=True, text=True)
        if proc.returncode != 0:
            raise SolverError(f"fallback benchmark failed:\n{proc.stderr}")
        with open(os.path.join(tmp, "bench.json"), "r", encoding="utf-8") as fh:
            sub = json.load(fh)
    return {
        "backend": sub["backend"],
        "repeats": sub["repeats"],
        "median_ms": sub["median_ms"],
        "p95_ms": sub["p95_ms"],
    }


def build_parser():
    parser = argparse.ArgumentParser(
        prog="swingopt",
        description="Flight-phase limb-swing trajectory optimization for legged robots.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, config_required=False):
        p.add_argument("--model", help="builtin model name or robot description path")
        p.add_argument("--config", required=config_required, help="problem config JSON")
        p.add_argument("--out", help="output directory")
        p.add_argument("--seed", type=int, default=0, help="seed for randomized checks")
        p.add_argument("--n-verify", type=int, default=1001,
                       help="integration samples for verification playback")
        p.add_argument("--literal-constraint-3", action="store_true",
                       help="anchor the swing liftoff position to the touchdown CoM")

    p_check = sub.add_parser("check-model", help="randomized momentum-structure checks")
    common(p_check)
    p_check.add_argument("--configs", type=int, default=1000,
                         help="number of random configurations")
    p_check.set_defaults(fn=cmd_check_model)

    p_opt = sub.add_parser("optimize", help="solve a flight problem")
    common(p_opt, config_required=True)
    p_opt.set_defaults(fn=cmd_optimize)

    p_play = sub.add_parser("playback", help="re-integrate a saved trajectory")
    common(p_play, config_required=True)
    p_play.add_argument("--gamma", required=True, help="trajectory JSON from optimize")
    p_play.set_defaults(fn=cmd_playback)

    p_bench = sub.add_parser("bench", help="repeated-solve timing statistics")
    common(p_bench, config_required=True)
    p_bench.add_argument("--repeats", type=int, default=20)
    p_bench.add_argument("--compare-backends", action="store_true",
                         help="also time the pure-python fallback in a subprocess")
    p_bench.set_defaults(fn=cmd_bench)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except (ParseError, ModelError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except SolverError as e:
        print(f"numerical failure: {e}", file=sys.stderr)
        return 4
    except np.linalg.LinAlgError as e:
        print(f"numerical failure: {e}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
