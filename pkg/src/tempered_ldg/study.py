"""Convergence and stability studies with CSV table output.

Observed orders follow the usual refinement-table convention: row i > 0
gets log(e_{i-1}/e_i) / log(r_{i-1}/r_i), where r is h_max for spatial
sweeps (so perturbed meshes are rated by their true resolution) and tau
for temporal sweeps.  Rows of a study are independent solver runs; setting
the environment variable TEMPERED_LDG_THREADS >= 2 runs them in a thread
pool (0 or unset = sequential) with results in deterministic order.
"""

from __future__ import annotations

import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .dg import error_norms
from .mesh import perturbed_mesh, uniform_mesh
from .problems import Problem
from .solver import NumericalError, SchemeConfig, setup, solve_to_final

THREADS_ENV = "TEMPERED_LDG_THREADS"

STABILITY_TOLERANCE = 1e-12


class StudyAborted(RuntimeError):
    """A solver failure aborted a study; .partial holds the finished rows."""

    def __init__(self, message: str, partial: "StudyResult"):
        super().__init__(message)
        self.partial = partial


@dataclass(frozen=True)
class StudyRow:
    param: float  # N for spatial sweeps, tau for temporal sweeps
    l2_error: float
    l2_order: Optional[float]
    linf_error: Optional[float]
    linf_order: Optional[float]
    wall_time_s: float


@dataclass
class StudyResult:
    rows: list[StudyRow]
    metadata: dict = field(default_factory=dict)


def _thread_limit() -> int:
    raw = os.environ.get(THREADS_ENV, "").strip()
    if not raw:
        return 0
    try:
        return max(int(raw), 0)
    except ValueError:
        return 0


def _run_rows(tasks):
    """Run row tasks, optionally in parallel, preserving order.

    Returns (values, first_error_index, first_error); values has one entry
    per finished task, None from the first failure onward.
    """
    limit = _thread_limit()
    results = [None] * len(tasks)
    first_error = None
    if limit >= 2:
        with ThreadPoolExecutor(max_workers=limit) as pool:
            futures = [pool.submit(task) for task in tasks]
            for i, fut in enumerate(futures):
                try:
                    results[i] = fut.result()
                except NumericalError as exc:
                    if first_error is None:
                        first_error = (i, exc)
    else:
        for i, task in enumerate(tasks):
            try:
                results[i] = task()
            except NumericalError as exc:
                first_error = (i, exc)
                break
    return results, first_error


def _order(e_prev: float, e_cur: float, r_prev: float, r_cur: float) -> Optional[float]:
    if e_prev <= 0.0 or e_cur <= 0.0:
        return None
    return math.log(e_prev / e_cur) / math.log(r_prev / r_cur)


def _attach_orders(raw, metadata) -> StudyResult:
    """raw: list of (param, refinement_measure, l2, linf, wall)."""
    rows = []
    degenerate = False
    for i, (param, r, l2, linf, wall) in enumerate(raw):
        if l2 == 0.0 or linf == 0.0:
            degenerate = True
        l2_order = linf_order = None
        if i > 0:
            _, r_prev, l2_prev, linf_prev, _ = raw[i - 1]
            l2_order = _order(l2_prev, l2, r_prev, r)
            linf_order = _order(linf_prev, linf, r_prev, r)
        rows.append(StudyRow(param, l2, l2_order, linf, linf_order, wall))
    if degenerate:
        metadata["degenerate"] = True
    return StudyResult(rows=rows, metadata=metadata)


def _finish(raw_results, first_error, metadata, label) -> StudyResult:
    if first_error is None:
        return _attach_orders(raw_results, metadata)
    idx, exc = first_error
    metadata["aborted_at_row"] = idx
    partial = _attach_orders([r for r in raw_results[:idx] if r is not None], metadata)
    raise StudyAborted(f"{label} aborted at row {idx}: {exc}", partial) from exc


def spatial_study(
    problem: Problem,
    alpha: float,
    delta: float,
    degree: int,
    n_list,
    steps: int,
    final_time: float,
    mesh_kind: str = "uniform",
    seed: int = 0,
    quad_order: int | None = None,
    init: str = "gauss_radau",
) -> StudyResult:
    """One solve per mesh size N at fixed time step; errors at final time."""
    if problem.exact is None:
        raise ValueError("spatial study needs a problem with an exact solution")
    n_list = [int(n) for n in n_list]
    if any(b <= a for a, b in zip(n_list, n_list[1:])):
        raise ValueError(f"mesh sizes must be increasing, got {n_list}")
    if mesh_kind not in ("uniform", "perturbed"):
        raise ValueError(f"mesh_kind must be 'uniform' or 'perturbed', got {mesh_kind!r}")

    def run(n_cells: int):
        t0 = time.perf_counter()
        if mesh_kind == "uniform":
            mesh = uniform_mesh(problem.a, problem.b, n_cells)
        else:
            mesh = perturbed_mesh(problem.a, problem.b, n_cells, seed)
        config = SchemeConfig(
            mesh=mesh, degree=degree, alpha=alpha, gamma=problem.gamma,
            rho=problem.rho, delta=delta, steps=steps, final_time=final_time,
            init=init, quad_order=quad_order,
        )
        u_h, _, _ = solve_to_final(config, problem)
        l2, linf = error_norms(u_h, lambda x: problem.exact(x, final_time),
                               quad_order=quad_order)
        return (n_cells, mesh.h_max, l2, linf, time.perf_counter() - t0)

    metadata = {
        "study": "spatial", "problem": problem.label, "alpha": alpha,
        "delta": delta, "degree": degree, "steps": steps,
        "final_time": final_time, "mesh": mesh_kind, "seed": seed,
    }
    results, first_error = _run_rows([lambda n=n: run(n) for n in n_list])
    return _finish(results, first_error, metadata, "spatial study")


def temporal_study(
    problem: Problem,
    alpha: float,
    delta: float,
    degree: int,
    n_cells: int,
    tau_list,
    final_time: float,
    quad_order: int | None = None,
    init: str = "gauss_radau",
) -> StudyResult:
    """One solve per time step size at fixed mesh; errors at final time."""
    if problem.exact is None:
        raise ValueError("temporal study needs a problem with an exact solution")
    tau_list = [float(t) for t in tau_list]
    if any(b >= a for a, b in zip(tau_list, tau_list[1:])):
        raise ValueError(f"time steps must be decreasing, got {tau_list}")
    steps_list = []
    for tau in tau_list:
        steps = round(final_time / tau)
        if steps < 1 or abs(final_time / tau - steps) > 1e-9 * max(steps, 1):
            raise ValueError(f"final time {final_time} is not an integer multiple of tau={tau}")
        steps_list.append(steps)

    mesh = uniform_mesh(problem.a, problem.b, n_cells)

    def run(tau: float, steps: int):
        t0 = time.perf_counter()
        config = SchemeConfig(
            mesh=mesh, degree=degree, alpha=alpha, gamma=problem.gamma,
            rho=problem.rho, delta=delta, steps=steps, final_time=final_time,
            init=init, quad_order=quad_order,
        )
        u_h, _, _ = solve_to_final(config, problem)
        l2, linf = error_norms(u_h, lambda x: problem.exact(x, final_time),
                               quad_order=quad_order)
        return (tau, tau, l2, linf, time.perf_counter() - t0)

    metadata = {
        "study": "temporal", "problem": problem.label, "alpha": alpha,
        "delta": delta, "degree": degree, "n_cells": n_cells,
        "final_time": final_time, "mesh": "uniform",
    }
    tasks = [lambda t=t, s=s: run(t, s) for t, s in zip(tau_list, steps_list)]
    results, first_error = _run_rows(tasks)
    return _finish(results, first_error, metadata, "temporal study")


@dataclass(frozen=True)
class StabilityRow:
    alpha: float
    gamma: float
    delta: float
    tau: float
    degree: int
    max_ratio: float

    @property
    def passed(self) -> bool:
        return self.max_ratio <= 1.0 + STABILITY_TOLERANCE


@dataclass
class StabilityReport:
    rows: list[StabilityRow]
    metadata: dict = field(default_factory=dict)

    @property
    def all_passed(self) -> bool:
        return all(row.passed for row in self.rows)

    @property
    def worst_ratio(self) -> float:
        return max((row.max_ratio for row in self.rows), default=0.0)


def stability_study(
    alpha_list,
    gamma_list,
    delta_list,
    tau_list,
    degree: int,
    n_cells: int,
    seed: int,
    steps: int = 50,
    domain: tuple[float, float] = (0.0, 1.0),
) -> StabilityReport:
    """Zero-forcing runs from seeded random coefficients.

    For every parameter combination the solver takes `steps` steps of size
    tau and the largest ratio ||u^n|| / ||u^0|| is recorded; the report
    passes iff every ratio stays below 1 + 1e-12 (no step-size restriction
    is expected, so absurdly large tau values are fair game).
    """
    mesh = uniform_mesh(domain[0], domain[1], n_cells)
    combos = [
        (alpha, gamma, delta, tau)
        for alpha in alpha_list
        for gamma in gamma_list
        for delta in delta_list
        for tau in tau_list
    ]
    children = np.random.SeedSequence(seed).spawn(len(combos))

    def run(combo, child):
        alpha, gamma, delta, tau = combo
        rng = np.random.default_rng(child)
        u0 = rng.standard_normal(mesh.n_cells * (degree + 1))
        config = SchemeConfig(
            mesh=mesh, degree=degree, alpha=alpha, gamma=gamma, rho=0.0,
            delta=delta, steps=steps, final_time=steps * tau,
        )
        state = setup(config, None, u0_coeffs=u0)
        u0_norm = state.u0_norm
        worst = 0.0
        for _ in range(steps):
            state.step()
            worst = max(worst, state.diagnostics["step_norms"][-1])
        ratio = worst / u0_norm if u0_norm > 0 else 0.0
        return StabilityRow(alpha, gamma, delta, tau, degree, ratio)

    tasks = [lambda c=c, s=s: run(c, s) for c, s in zip(combos, children)]
    results, first_error = _run_rows(tasks)
    if first_error is not None:
        idx, exc = first_error
        raise NumericalError(f"stability study failed on combination {combos[idx]}: {exc}")
    metadata = {
        "study": "stability", "degree": degree, "n_cells": n_cells,
        "seed": seed, "steps": steps,
    }
    return StabilityReport(rows=results, metadata=metadata)


def _fmt(value) -> str:
    """Round-trip formatting: repr of floats recovers them bit-exactly."""
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value)).lower()
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        f = float(value)
        return str(int(f)) if f.is_integer() and abs(f) < 1e15 else repr(f)
    return str(value)


CSV_HEADER = "param,l2_error,l2_order,linf_error,linf_order,wall_time_s"


def emit_csv(result: StudyResult, path) -> None:
    """Write metadata comments, the fixed header and one line per row."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for key, value in result.metadata.items():
            fh.write(f"# {key}={_fmt(value)}\n")
        fh.write(CSV_HEADER + "\n")
        for row in result.rows:
            fields = (row.param, row.l2_error, row.l2_order,
                      row.linf_error, row.linf_order, row.wall_time_s)
            fh.write(",".join(_fmt(v) for v in fields) + "\n")


def read_csv(path) -> StudyResult:
    """Parse a file written by emit_csv (full float precision preserved)."""
    metadata = {}
    rows = []
    with open(path, "r", encoding="utf-8") as fh:
        lines = [ln.rstrip("\n") for ln in fh]
    body = []
    for ln in lines:
        if ln.startswith("#"):
            key, _, value = ln[1:].strip().partition("=")
            metadata[key.strip()] = value
        elif ln:
            body.append(ln)
    if not body or body[0] != CSV_HEADER:
        raise ValueError(f"{path} does not carry the study CSV header")
    for ln in body[1:]:
        parts = ln.split(",")
        if len(parts) != 6:
            raise ValueError(f"malformed row: {ln!r}")
        rows.append(StudyRow(
            param=float(parts[0]),
            l2_error=float(parts[1]),
            l2_order=float(parts[2]) if parts[2] else None,
            linf_error=float(parts[3]),
            linf_order=float(parts[4]) if parts[4] else None,
            wall_time_s=float(parts[5]),
        ))
    return StudyResult(rows=rows, metadata=metadata)


def emit_stability_csv(report: StabilityReport, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for key, value in report.metadata.items():
            fh.write(f"# {key}={_fmt(value)}\n")
        fh.write("alpha,gamma,delta,tau,degree,max_ratio,passed\n")
        for row in report.rows:
            fields = (row.alpha, row.gamma, row.delta, row.tau, row.degree,
                      row.max_ratio, row.passed)
            fh.write(",".join(_fmt(v) for v in fields) + "\n")
