"""Command-line front end.

Subcommands: solve, space-order, time-order, stability, demo.  Settings
merge with precedence built-in defaults < config file (--config) < flags;
the config file holds flat `key = value` lines with `#` comments, keys
spelled like the long options.  Unknown keys are hard errors.  Exit status:
0 success, 1 numerical failure, 2 usage error.  All file outputs are UTF-8
with LF line endings.  Row-level study parallelism is capped by the
TEMPERED_LDG_THREADS environment variable (0 or unset = sequential).
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from . import problems
from .mesh import perturbed_mesh, uniform_mesh
from .dg import error_norms
from .solver import NumericalError, SchemeConfig, solve_to_final
from .study import (
    StudyAborted,
    emit_csv,
    emit_stability_csv,
    spatial_study,
    stability_study,
    temporal_study,
)

PROBLEM_LABELS = ("ex4.1", "ex4.2", "ex4.3")


def _alpha(text: str) -> float:
    value = float(text)
    if not 0.0 < value < 1.0:
        raise argparse.ArgumentTypeError(f"alpha must lie in (0, 1), got {text}")
    return value


def _delta(text: str) -> float:
    value = float(text)
    if abs(value - 0.5) < 1e-12:
        raise argparse.ArgumentTypeError(
            "delta = 1/2 is not allowed: the scheme's generalized alternating "
            "fluxes require delta != 1/2"
        )
    return value


def _nonneg_float(text: str) -> float:
    value = float(text)
    if value < 0.0:
        raise argparse.ArgumentTypeError(f"must be >= 0, got {text}")
    return value


def _pos_float(text: str) -> float:
    value = float(text)
    if value <= 0.0:
        raise argparse.ArgumentTypeError(f"must be > 0, got {text}")
    return value


def _pos_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be a positive integer, got {text}")
    return value


def _degree(text: str) -> int:
    value = int(text)
    if value < 0:
        raise argparse.ArgumentTypeError(f"polynomial degree must be >= 0, got {text}")
    return value


def _csv_list(convert):
    def parse(text: str):
        items = [s for s in text.split(",") if s.strip() != ""]
        if not items:
            raise argparse.ArgumentTypeError("empty list")
        return [convert(s.strip()) for s in items]
    return parse


def _domain(text: str) -> tuple[float, float]:
    parts = text.split(",")
    if len(parts) != 2:
        raise argparse.ArgumentTypeError(f"domain must be 'a,b', got {text!r}")
    a, b = float(parts[0]), float(parts[1])
    if not a < b:
        raise argparse.ArgumentTypeError(f"domain needs a < b, got {text!r}")
    return (a, b)


def _add_config_option(sub):
    sub.add_argument("--config", default=None,
                     help="flat key=value settings file (flags override it)")


def _add_scheme_options(sub, *, delta_default: float, k_default: int):
    _add_config_option(sub)
    sub.add_argument("--problem", choices=PROBLEM_LABELS, default="ex4.1",
                     help="manufactured/demo problem to run")
    sub.add_argument("--alpha", type=_alpha, default=0.5, help="fractional order in (0,1)")
    sub.add_argument("--gamma", type=_nonneg_float, default=2.0, help="tempering parameter >= 0")
    sub.add_argument("--delta", type=_delta, default=delta_default,
                     help="flux weight, any value except 1/2")
    sub.add_argument("--k", type=_degree, default=k_default, help="polynomial degree")
    sub.add_argument("--T", type=_pos_float, default=1.0, help="final time")
    sub.add_argument("--quad-order", type=_pos_int, default=None,
                     help="quadrature points per cell (default max(k+2, 6))")
    sub.add_argument("--init", choices=("gauss_radau", "l2"), default="gauss_radau",
                     help="initial-data projection")


def build_parser() -> tuple[argparse.ArgumentParser, dict]:
    parser = argparse.ArgumentParser(
        prog="tempered-ldg",
        description="LDG solver and study harness for the 1D tempered "
                    "fractional diffusion equation (periodic boundaries).",
    )
    parser.add_argument("--config", default=None,
                        help="flat key=value settings file (flags override it)")
    subs = parser.add_subparsers(dest="command", required=True)
    registry = {}

    solve = subs.add_parser("solve", help="single solve, report errors at T")
    _add_scheme_options(solve, delta_default=0.3, k_default=2)
    solve.add_argument("--N", type=_pos_int, default=40, help="number of cells")
    solve.add_argument("--M", type=_pos_int, default=1000, help="number of time steps")
    solve.add_argument("--mesh", choices=("uniform", "perturbed"), default="uniform")
    solve.add_argument("--seed", type=int, default=0, help="perturbed-mesh seed")
    solve.add_argument("--domain", type=_domain, default=None,
                       help="a,b (only for ex4.3; default 0,6)")
    solve.add_argument("--out", default=None, help="write solution samples CSV here")
    solve.add_argument("--samples-per-cell", type=_pos_int, default=9)
    solve.add_argument("--dump-mesh", default=None, help="write mesh interface CSV here")
    registry["solve"] = solve

    space = subs.add_parser("space-order", help="spatial refinement sweep")
    _add_scheme_options(space, delta_default=0.3, k_default=2)
    space.add_argument("--N", type=_csv_list(_pos_int), default=[5, 10, 20, 40],
                       help="comma-separated increasing mesh sizes")
    space.add_argument("--M", type=_pos_int, default=1000, help="time steps (fixed)")
    space.add_argument("--mesh", choices=("uniform", "perturbed"), default="uniform")
    space.add_argument("--seed", type=int, default=0)
    space.add_argument("--out", default="space-order.csv")
    registry["space-order"] = space

    tord = subs.add_parser("time-order", help="temporal refinement sweep")
    _add_scheme_options(tord, delta_default=0.1, k_default=2)
    tord.add_argument("--N", type=_pos_int, default=100, help="number of cells (fixed)")
    tord.add_argument("--tau", type=_csv_list(_pos_float),
                      default=[0.04, 0.02, 0.01, 0.005],
                      help="comma-separated decreasing time steps; each must divide T")
    tord.add_argument("--out", default="time-order.csv")
    registry["time-order"] = tord

    stab = subs.add_parser("stability", help="zero-forcing norm-ratio sweep")
    _add_config_option(stab)
    stab.add_argument("--alpha", type=_csv_list(_alpha), default=[0.1, 0.5, 0.9])
    stab.add_argument("--gamma", type=_csv_list(_nonneg_float), default=[0.0, 2.0, 10.0])
    stab.add_argument("--delta", type=_csv_list(_delta), default=[0.0, 0.1, 0.3, 0.9, 1.0])
    stab.add_argument("--tau", type=_csv_list(_pos_float), default=[0.001, 0.1, 10.0])
    stab.add_argument("--k", type=_degree, default=2)
    stab.add_argument("--N", type=_pos_int, default=16)
    stab.add_argument("--seed", type=int, default=0)
    stab.add_argument("--steps", type=_pos_int, default=50,
                      help="time levels per parameter combination")
    stab.add_argument("--out", default="stability.csv")
    registry["stability"] = stab

    demo = subs.add_parser("demo", help="evolve the Gaussian pulse, write snapshots")
    _add_config_option(demo)
    demo.add_argument("--alpha", type=_alpha, default=0.3)
    demo.add_argument("--gamma", type=_nonneg_float, default=2.0)
    demo.add_argument("--delta", type=_delta, default=0.2)
    demo.add_argument("--k", type=_degree, default=2)
    demo.add_argument("--tau", type=_pos_float, default=0.001)
    demo.add_argument("--h", type=_pos_float, default=0.01, help="target cell size")
    demo.add_argument("--domain", type=_domain, default=(0.0, 6.0))
    demo.add_argument("--times", type=_csv_list(_nonneg_float),
                      default=[0.0, 0.1, 0.5, 1.0],
                      help="snapshot times; the largest sets the final time")
    demo.add_argument("--samples-per-cell", type=_pos_int, default=5)
    demo.add_argument("--out-prefix", default="demo", help="snapshot file prefix")
    registry["demo"] = demo

    return parser, registry


def _load_config_file(path, parser: argparse.ArgumentParser) -> dict:
    settings = {}
    try:
        with open(path, "r", encoding="utf-8") as fh:
            for lineno, raw in enumerate(fh, 1):
                line = raw.split("#", 1)[0].strip()
                if not line:
                    continue
                if "=" not in line:
                    parser.error(f"{path}:{lineno}: expected 'key = value', got {raw.strip()!r}")
                key, _, value = line.partition("=")
                settings[key.strip()] = value.strip()
    except OSError as exc:
        parser.error(f"cannot read config file {path}: {exc}")
    return settings


def _apply_config(settings: dict, sub: argparse.ArgumentParser,
                  parser: argparse.ArgumentParser) -> None:
    actions = {}
    for action in sub._actions:
        for opt in action.option_strings:
            if opt.startswith("--"):
                actions[opt[2:]] = action
    defaults = {}
    for key, text in settings.items():
        action = actions.get(key) or actions.get(key.replace("_", "-"))
        if action is None:
            parser.error(f"unknown config key {key!r} for this subcommand")
        try:
            defaults[action.dest] = action.type(text) if action.type else text
        except (ValueError, argparse.ArgumentTypeError) as exc:
            parser.error(f"config key {key!r}: {exc}")
    sub.set_defaults(**defaults)


def parse_args(argv) -> argparse.Namespace:
    parser, registry = build_parser()
    argv = list(argv)

    command = next((a for a in argv if not a.startswith("-")), None)
    config_path = None
    for i, arg in enumerate(argv):
        if arg == "--config":
            if i + 1 >= len(argv):
                parser.error("--config needs a path")
            config_path = argv[i + 1]
        elif arg.startswith("--config="):
            config_path = arg.split("=", 1)[1]
    if config_path is not None:
        if command not in registry:
            parser.error("--config requires a subcommand")
        _apply_config(_load_config_file(config_path, parser), registry[command], parser)

    ns = parser.parse_args(argv)
    _validate(ns, parser)
    return ns


def _steps_for(tau: float, final_time: float, parser, what: str) -> int:
    steps = round(final_time / tau)
    if steps < 1 or abs(final_time / tau - steps) > 1e-9 * max(steps, 1):
        parser.error(f"{what}: T={final_time} is not an integer multiple of tau={tau}")
    return steps


def _validate(ns: argparse.Namespace, parser: argparse.ArgumentParser) -> None:
    if ns.command == "time-order":
        if any(b >= a for a, b in zip(ns.tau, ns.tau[1:])):
            parser.error(f"--tau values must be decreasing, got {ns.tau}")
        for tau in ns.tau:
            _steps_for(tau, ns.T, parser, "--tau")
    elif ns.command == "space-order":
        if any(b <= a for a, b in zip(ns.N, ns.N[1:])):
            parser.error(f"--N values must be increasing, got {ns.N}")
    elif ns.command == "demo":
        final_time = max(ns.times)
        if final_time <= 0:
            parser.error("--times must contain a positive final time")
        _steps_for(ns.tau, final_time, parser, "demo")
        span = ns.domain[1] - ns.domain[0]
        n = round(span / ns.h)
        if n < 2 or abs(span / ns.h - n) > 1e-9 * n:
            parser.error(f"--h {ns.h} does not evenly divide the domain span {span}")
    if getattr(ns, "problem", None) in ("ex4.1", "ex4.2") and getattr(ns, "domain", None):
        parser.error(f"--domain only applies to ex4.3; {ns.problem} lives on [0,1]")


def _make_problem(ns: argparse.Namespace):
    domain = getattr(ns, "domain", None)
    return problems.by_label(ns.problem, ns.gamma, ns.alpha, domain=domain)


def _run_solve(ns) -> int:
    problem = _make_problem(ns)
    if ns.mesh == "uniform":
        mesh = uniform_mesh(problem.a, problem.b, ns.N)
    else:
        mesh = perturbed_mesh(problem.a, problem.b, ns.N, ns.seed)
    config = SchemeConfig(
        mesh=mesh, degree=ns.k, alpha=ns.alpha, gamma=ns.gamma, rho=problem.rho,
        delta=ns.delta, steps=ns.M, final_time=ns.T, init=ns.init,
        quad_order=ns.quad_order,
    )
    u_h, _, diag = solve_to_final(config, problem)
    print(f"solved {problem.label}: N={ns.N} k={ns.k} M={ns.M} T={ns.T} "
          f"alpha={ns.alpha} gamma={ns.gamma} delta={ns.delta}")
    print(f"setup {diag['setup_seconds']:.3f}s, stepping {diag['solve_seconds']:.3f}s, "
          f"max solve residual {diag['residual_max']:.2e}")
    if problem.exact is not None:
        l2, linf = error_norms(u_h, lambda x: problem.exact(x, ns.T),
                               quad_order=ns.quad_order)
        print(f"L2 error at T={ns.T}: {l2:.15e}")
        print(f"Linf error at T={ns.T}: {linf:.15e}")
    if ns.dump_mesh:
        mesh.write_interfaces_csv(ns.dump_mesh)
        print(f"mesh interfaces written to {ns.dump_mesh}")
    if ns.out:
        u_h.write_samples_csv(ns.out, samples_per_cell=ns.samples_per_cell)
        print(f"solution samples written to {ns.out}")
    return 0


def _run_space_order(ns) -> int:
    problem = _make_problem(ns)
    result = spatial_study(
        problem, ns.alpha, ns.delta, ns.k, ns.N, ns.M, ns.T,
        mesh_kind=ns.mesh, seed=ns.seed, quad_order=ns.quad_order, init=ns.init,
    )
    emit_csv(result, ns.out)
    print(f"spatial study written to {ns.out}")
    for row in result.rows:
        order = "-" if row.l2_order is None else f"{row.l2_order:.2f}"
        print(f"  N={int(row.param):4d}  L2={row.l2_error:.6e}  order={order}")
    return 0


def _run_time_order(ns) -> int:
    problem = _make_problem(ns)
    result = temporal_study(
        problem, ns.alpha, ns.delta, ns.k, ns.N, ns.tau, ns.T,
        quad_order=ns.quad_order, init=ns.init,
    )
    emit_csv(result, ns.out)
    print(f"temporal study written to {ns.out}")
    for row in result.rows:
        order = "-" if row.l2_order is None else f"{row.l2_order:.2f}"
        print(f"  tau={row.param:<8g}  L2={row.l2_error:.6e}  order={order}")
    return 0


def _run_stability(ns) -> int:
    report = stability_study(
        ns.alpha, ns.gamma, ns.delta, ns.tau, ns.k, ns.N, ns.seed, steps=ns.steps,
    )
    emit_stability_csv(report, ns.out)
    verdict = "PASS" if report.all_passed else "FAIL"
    print(f"stability sweep: {len(report.rows)} combinations, "
          f"worst ratio {report.worst_ratio:.15f} -> {verdict}")
    print(f"report written to {ns.out}")
    return 0 if report.all_passed else 1


def _run_demo(ns) -> int:
    problem = problems.gaussian_pulse(ns.gamma, ns.alpha, ns.domain)
    final_time = max(ns.times)
    steps = round(final_time / ns.tau)
    n = round((ns.domain[1] - ns.domain[0]) / ns.h)
    mesh = uniform_mesh(problem.a, problem.b, n)
    config = SchemeConfig(
        mesh=mesh, degree=ns.k, alpha=ns.alpha, gamma=ns.gamma, rho=0.0,
        delta=ns.delta, steps=steps, final_time=final_time,
    )
    _, _, diag = solve_to_final(config, problem, snapshot_times=ns.times)
    paths = []
    for t, snapshot in diag["snapshots"]:
        path = f"{ns.out_prefix}_t{t:g}.csv"
        snapshot.write_samples_csv(path, samples_per_cell=ns.samples_per_cell)
        paths.append(path)
    print(f"demo: N={n} k={ns.k} tau={ns.tau} alpha={ns.alpha} gamma={ns.gamma} "
          f"delta={ns.delta}, {steps} steps")
    print("snapshots: " + ", ".join(paths))
    return 0


_RUNNERS = {
    "solve": _run_solve,
    "space-order": _run_space_order,
    "time-order": _run_time_order,
    "stability": _run_stability,
    "demo": _run_demo,
}


def run(ns: argparse.Namespace) -> int:
    try:
        return _RUNNERS[ns.command](ns)
    except StudyAborted as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 1


def main(argv=None) -> int:
    ns = parse_args(sys.argv[1:] if argv is None else argv)
    return run(ns)


if __name__ == "__main__":
    sys.exit(main())
