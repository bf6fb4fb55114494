"""LDG solver for the 1D tempered fractional diffusion equation.

Implicit L1 time stepping for the tempered Caputo derivative combined with
a local discontinuous Galerkin discretization using delta-weighted
alternating interface fluxes on periodic meshes, plus convergence-order
and stability study tools with CSV output.
"""

from .mesh import Mesh1D, perturbed_mesh, uniform_mesh
from .quadrature import LegendreBasis, QuadRule, default_quad_order, gauss_legendre, legendre_eval
from .tempered import TemperedWeights, build_weights, history_combination, tempered_derivative_scalar
from .dg import (
    DGFunction,
    FluxOperator,
    MassMatrix,
    assemble_flux_operator,
    error_norms,
    gauss_radau_project,
    l2_project,
    mass_matrix,
)
from .problems import Problem, gaussian_pulse, manufactured_quartic, manufactured_sine
from .solver import (
    NumericalError,
    SchemeConfig,
    SolverState,
    setup,
    solve_to_final,
    solve_to_final_coupled,
)
from .study import (
    StabilityReport,
    StudyResult,
    StudyRow,
    emit_csv,
    emit_stability_csv,
    read_csv,
    spatial_study,
    stability_study,
    temporal_study,
)

__version__ = "0.1.0"

__all__ = [
    "Mesh1D", "uniform_mesh", "perturbed_mesh",
    "QuadRule", "LegendreBasis", "gauss_legendre", "legendre_eval", "default_quad_order",
    "TemperedWeights", "build_weights", "history_combination", "tempered_derivative_scalar",
    "DGFunction", "MassMatrix", "FluxOperator",
    "assemble_flux_operator", "mass_matrix", "l2_project", "gauss_radau_project", "error_norms",
    "Problem", "manufactured_sine", "manufactured_quartic", "gaussian_pulse",
    "SchemeConfig", "SolverState", "NumericalError",
    "setup", "solve_to_final", "solve_to_final_coupled",
    "StudyResult", "StudyRow", "StabilityReport",
    "spatial_study", "temporal_study", "stability_study",
    "emit_csv", "emit_stability_csv", "read_csv",
    "__version__",
]
