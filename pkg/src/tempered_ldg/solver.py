"""Fully discrete time stepping for the tempered fractional diffusion
equation.

Each implicit step solves, for the new coefficients u and the auxiliary
gradient variable p = u_x,

    (rho + mu) M u + A_{1-delta} p = mu M h^n + F^n,      M p + A_delta u = 0,

where M is the diagonal mass matrix, A_delta the flux-derivative operator,
mu = tau^{-alpha} / Gamma(2-alpha), h^n the tempered history combination and
F^n the forcing moments.  Eliminating p via p = -M^{-1} A_delta u and using
A_{1-delta} = -A_delta^T turns every step into one solve with the
time-invariant symmetric positive definite matrix

    S = (rho + mu) M + A_delta^T M^{-1} A_delta,

which is factored once and reused for all steps.  A monolithic coupled-block
solver is kept as an independent reference implementation for validation.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .dg import (
    DGFunction,
    FluxOperator,
    MassMatrix,
    _check_delta,
    assemble_flux_operator,
    cell_integrals,
    gauss_radau_project,
    l2_project,
    mass_matrix,
)
from .mesh import Mesh1D
from .problems import Problem
from .quadrature import default_quad_order, gauss_legendre, legendre_eval
from .tempered import TemperedWeights, build_weights, history_combination

# Below this system size a dense Cholesky factorization is used (simpler to
# inspect); the banded-periodic sparse LU path covers everything larger.
DENSE_LIMIT = 64

SOLVE_RESIDUAL_RTOL = 1e-12
STABILITY_SLACK = 1e-12
OPERATOR_PAIRING_TOL = 1e-13

INIT_MODES = ("gauss_radau", "l2")


class NumericalError(RuntimeError):
    """A solve failed to meet its accuracy contract."""


@dataclass(frozen=True, eq=False)
class SchemeConfig:
    """Everything needed for one solver run on a fixed mesh."""

    mesh: Mesh1D
    degree: int
    alpha: float
    gamma: float
    rho: float
    delta: float
    steps: int
    final_time: float
    init: str = "gauss_radau"
    quad_order: int | None = None

    def __post_init__(self):
        if self.degree < 0:
            raise ValueError(f"degree must be >= 0, got {self.degree}")
        if not 0.0 < self.alpha < 1.0:
            raise ValueError(f"alpha must lie in (0, 1), got {self.alpha}")
        if self.gamma < 0.0:
            raise ValueError(f"gamma must be >= 0, got {self.gamma}")
        if self.rho < 0.0:
            raise ValueError(f"rho must be >= 0, got {self.rho}")
        _check_delta(self.delta)
        if self.steps < 1:
            raise ValueError(f"step count must be >= 1, got {self.steps}")
        if self.final_time <= 0.0:
            raise ValueError(f"final time must be > 0, got {self.final_time}")
        if self.init not in INIT_MODES:
            raise ValueError(f"init must be one of {INIT_MODES}, got {self.init!r}")

    @property
    def tau(self) -> float:
        return self.final_time / self.steps

    @property
    def effective_quad_order(self) -> int:
        return self.quad_order if self.quad_order is not None else default_quad_order(self.degree)


@dataclass(eq=False)
class SolverState:
    """Mutable stepping state; confined to one logical task."""

    config: SchemeConfig
    weights: TemperedWeights
    mass: MassMatrix
    flux: FluxOperator
    system: sp.csr_matrix = field(repr=False)
    u_history: np.ndarray = field(repr=False)  # (M+1, dim), rows 0..n valid
    n: int = 0
    p_flat: np.ndarray | None = None
    u0_norm: float = 0.0
    stability_check: bool = False
    diagnostics: dict = field(default_factory=dict)
    _solve: object = field(default=None, repr=False)
    _system_norm: float = 0.0

    # quadrature tables for forcing moments
    _quad_x: np.ndarray | None = field(default=None, repr=False)  # (N, q)
    _quad_b: np.ndarray | None = field(default=None, repr=False)  # (q, k+1)

    @property
    def time(self) -> float:
        return self.n * self.config.tau

    def current_u(self) -> DGFunction:
        return DGFunction.from_flat(self.config.mesh, self.config.degree, self.u_history[self.n])

    def current_p(self) -> DGFunction:
        return DGFunction.from_flat(self.config.mesh, self.config.degree, self.p_flat)

    def forcing_vector(self, f_of_x) -> np.ndarray:
        """Moments int_{I_j} f P_m dx from pointwise quadrature samples."""
        fv = f_of_x(self._quad_x)
        h = self.config.mesh.cell_lengths
        return (0.5 * h[:, None] * (fv @ self._quad_b)).reshape(-1)

    def step(self, forcing=None) -> "SolverState":
        """Advance one time level; forcing is f(x) at the new time (or None)."""
        cfg = self.config
        if self.n >= cfg.steps:
            raise ValueError(f"all {cfg.steps} steps already taken")
        n_new = self.n + 1

        hist = history_combination(self.weights, n_new, self.u_history[:n_new])
        rhs = self.weights.mu * self.mass.apply(hist)
        if forcing is not None:
            rhs = rhs + self.forcing_vector(forcing)

        u_new = self._solve(rhs)
        # ||S|| ||u|| enters the scale: a backward-stable solve cannot push
        # the residual below eps * ||S|| ||u|| even when ||rhs|| is tiny
        # (rapidly decaying solutions at very large tau).
        scale = np.linalg.norm(rhs) + self._system_norm * np.linalg.norm(u_new)
        residual = np.linalg.norm(self.system @ u_new - rhs)
        if residual > SOLVE_RESIDUAL_RTOL * scale:
            # one pass of iterative refinement before giving up
            u_new = u_new + self._solve(rhs - self.system @ u_new)
            residual = np.linalg.norm(self.system @ u_new - rhs)
            if residual > SOLVE_RESIDUAL_RTOL * scale:
                raise NumericalError(
                    f"step {n_new}: solve residual {residual:.3e} exceeds "
                    f"{SOLVE_RESIDUAL_RTOL:.0e} * (||rhs|| + ||S|| ||u||) "
                    f"= {SOLVE_RESIDUAL_RTOL * scale:.3e}"
                )

        self.u_history[n_new] = u_new
        self.n = n_new
        self.p_flat = -self.mass.solve(self.flux.apply(u_new))

        u_norm = self.mass.norm(u_new)
        self.diagnostics["step_norms"].append(u_norm)
        self.diagnostics["residual_max"] = max(self.diagnostics["residual_max"], residual)
        if self.stability_check and forcing is None:
            if u_norm > self.u0_norm * (1.0 + STABILITY_SLACK):
                raise NumericalError(
                    f"stability violated at step {n_new}: ||u^n|| = {u_norm!r} "
                    f"> ||u^0|| = {self.u0_norm!r}"
                )
        return self


def _initial_coefficients(config: SchemeConfig, problem: Problem) -> np.ndarray:
    if config.init == "gauss_radau":
        proj = gauss_radau_project(
            problem.u0, config.mesh, config.degree, config.delta,
            quad_order=config.effective_quad_order,
        )
    else:
        proj = l2_project(problem.u0, config.mesh, config.degree,
                          quad_order=config.effective_quad_order)
    return proj.flat


def setup(
    config: SchemeConfig,
    problem: Problem | None,
    u0_coeffs: np.ndarray | None = None,
    stability_check: bool = False,
) -> SolverState:
    """Assemble operators, factor the step matrix once, set the initial data.

    u0_coeffs, when given, bypasses the projection of problem.u0 (used by
    the stability studies, which start from random coefficients; problem
    may then be None).
    """
    if u0_coeffs is None and problem is None:
        raise ValueError("need either a problem (for initial data) or u0_coeffs")
    t0 = time.perf_counter()
    mesh, k = config.mesh, config.degree
    weights = build_weights(config.alpha, config.gamma, config.tau, config.steps)
    mass = mass_matrix(mesh, k)
    flux = assemble_flux_operator(mesh, k, config.delta)
    flux_conj = assemble_flux_operator(mesh, k, 1.0 - config.delta)

    pairing_gap = np.abs(flux.matrix.T + flux_conj.matrix).max()
    if pairing_gap > OPERATOR_PAIRING_TOL:
        raise NumericalError(
            f"flux operator pairing A_delta^T = -A_(1-delta) violated by {pairing_gap:.3e}"
        )

    mu = weights.mu
    inv_mass = sp.diags(1.0 / mass.flat)
    system = (
        sp.diags((config.rho + mu) * mass.flat)
        + flux.matrix.T @ inv_mass @ flux.matrix
    ).tocsr()

    dim = mesh.n_cells * (k + 1)
    diagnostics = {
        "pairing_gap": float(pairing_gap),
        "step_norms": [],
        "residual_max": 0.0,
    }
    if dim <= DENSE_LIMIT:
        try:
            factor = sla.cho_factor(system.toarray())
        except sla.LinAlgError as exc:
            raise NumericalError(
                f"step matrix is not positive definite (delta={config.delta}): {exc}"
            ) from exc
        diagnostics["factorization"] = "dense-cholesky"
        diagnostics["min_pivot"] = float(np.min(np.diagonal(factor[0])) ** 2)
        solve = lambda rhs: sla.cho_solve(factor, rhs)  # noqa: E731
    else:
        try:
            lu = spla.splu(system.tocsc())
        except RuntimeError as exc:
            raise NumericalError(f"step matrix factorization failed: {exc}") from exc
        diagnostics["factorization"] = "sparse-lu"
        diagnostics["min_pivot"] = float(lu.U.diagonal().real.min())
        solve = lu.solve

    if u0_coeffs is None:
        u0 = _initial_coefficients(config, problem)
    else:
        u0 = np.asarray(u0_coeffs, dtype=float).reshape(-1)
        if u0.size != dim:
            raise ValueError(f"initial coefficients must have length {dim}, got {u0.size}")

    rule = gauss_legendre(config.effective_quad_order)
    vals, _ = legendre_eval(k, rule.nodes)
    quad_x = mesh.centers[:, None] + 0.5 * mesh.cell_lengths[:, None] * rule.nodes
    quad_b = rule.weights[:, None] * vals.T

    history = np.zeros((config.steps + 1, dim))
    history[0] = u0
    state = SolverState(
        config=config, weights=weights, mass=mass, flux=flux, system=system,
        u_history=history, n=0, p_flat=-mass.solve(flux.apply(u0)),
        u0_norm=mass.norm(u0), stability_check=stability_check,
        diagnostics=diagnostics, _solve=solve, _quad_x=quad_x, _quad_b=quad_b,
        _system_norm=float(np.abs(system).sum(axis=0).max()),
    )
    diagnostics["setup_seconds"] = time.perf_counter() - t0
    return state


def _consistency_check(config: SchemeConfig, problem: Problem) -> None:
    span = config.mesh.b - config.mesh.a
    if abs(config.mesh.a - problem.a) > 1e-12 * span or abs(config.mesh.b - problem.b) > 1e-12 * span:
        raise ValueError(
            f"mesh domain [{config.mesh.a}, {config.mesh.b}] does not match "
            f"problem domain [{problem.a}, {problem.b}]"
        )
    if problem.alpha is not None and problem.alpha != config.alpha:
        raise ValueError(
            f"problem was built for alpha={problem.alpha}, config has alpha={config.alpha}"
        )
    if problem.gamma != config.gamma:
        raise ValueError(
            f"problem was built for gamma={problem.gamma}, config has gamma={config.gamma}"
        )
    if problem.rho != config.rho:
        raise ValueError(f"problem has rho={problem.rho}, config has rho={config.rho}")


def solve_to_final(
    config: SchemeConfig,
    problem: Problem,
    u0_coeffs: np.ndarray | None = None,
    stability_check: bool = False,
    snapshot_times=None,
):
    """Run all steps; returns (u_h, p_h, diagnostics).

    snapshot_times, when given, are snapped to the nearest time level and
    the corresponding solutions collected under diagnostics["snapshots"]
    as (time, DGFunction) pairs.
    """
    _consistency_check(config, problem)
    state = setup(config, problem, u0_coeffs=u0_coeffs, stability_check=stability_check)

    snap_steps: dict[int, float] = {}
    if snapshot_times is not None:
        for t in snapshot_times:
            if not 0.0 <= t <= config.final_time + 1e-9 * config.final_time:
                raise ValueError(f"snapshot time {t} outside [0, {config.final_time}]")
            snap_steps[min(round(t / config.tau), config.steps)] = t
    snapshots = []
    if 0 in snap_steps:
        snapshots.append((0.0, state.current_u()))

    f = problem.forcing
    t0 = time.perf_counter()
    for n_new in range(1, config.steps + 1):
        if f is None:
            state.step()
        else:
            t_new = n_new * config.tau
            state.step(forcing=lambda x, _t=t_new: f(x, _t))
        if n_new in snap_steps:
            snapshots.append((n_new * config.tau, state.current_u()))
    state.diagnostics["solve_seconds"] = time.perf_counter() - t0
    state.diagnostics["snapshots"] = snapshots
    return state.current_u(), state.current_p(), state.diagnostics


def solve_to_final_coupled(
    config: SchemeConfig,
    problem: Problem,
    u0_coeffs: np.ndarray | None = None,
):
    """Reference stepper: solve the full coupled (u, p) block system densely.

    No elimination, no operator transpose identity, no factorization reuse;
    the history sum is accumulated term by term.  Returns the complete
    u and p histories, shape (steps+1, dim).  Intended for validating the
    factored stepper on small problems.
    """
    _consistency_check(config, problem)
    mesh, k = config.mesh, config.degree
    dim = mesh.n_cells * (k + 1)
    weights = build_weights(config.alpha, config.gamma, config.tau, config.steps)
    mu = weights.mu

    mass_dense = np.diag(mass_matrix(mesh, k).flat)
    a_delta = assemble_flux_operator(mesh, k, config.delta).matrix.toarray()
    a_conj = assemble_flux_operator(mesh, k, 1.0 - config.delta).matrix.toarray()

    block = np.zeros((2 * dim, 2 * dim))
    block[:dim, :dim] = (config.rho + mu) * mass_dense
    block[:dim, dim:] = a_conj
    block[dim:, :dim] = a_delta
    block[dim:, dim:] = mass_dense

    if u0_coeffs is None:
        u0 = _initial_coefficients(config, problem)
    else:
        u0 = np.asarray(u0_coeffs, dtype=float).reshape(-1)

    u_hist = np.zeros((config.steps + 1, dim))
    p_hist = np.zeros((config.steps + 1, dim))
    u_hist[0] = u0
    p_hist[0] = np.linalg.solve(mass_dense, -a_delta @ u0)

    quad = config.effective_quad_order
    rhs = np.zeros(2 * dim)
    for n in range(1, config.steps + 1):
        hist = weights.b[n - 1] * weights.damp[n] * u_hist[0]
        for i in range(1, n):
            hist = hist + (weights.b[i - 1] - weights.b[i]) * weights.damp[i] * u_hist[n - i]
        rhs[:dim] = mu * (mass_dense @ hist)
        if problem.forcing is not None:
            t_n = n * config.tau
            rhs[:dim] += cell_integrals(
                lambda x: problem.forcing(x, t_n), mesh, k, quad
            ).reshape(-1)
        sol = np.linalg.solve(block, rhs)
        u_hist[n] = sol[:dim]
        p_hist[n] = sol[dim:]
    return u_hist, p_hist
