"""Spatial side of the scheme: DG functions on periodic meshes, the
flux-derivative operators built from delta-weighted interface averages,
diagonal mass matrices, L2 and weighted Gauss-Radau projections, and
error norms.

For u, v piecewise polynomials the flux-derivative bilinear form is

    G_delta(u; v) = sum_j int_{I_j} u v_x dx
                    - sum_j [ (u^{(d)} v^-)_{j+1/2} - (u^{(d)} v^+)_{j-1/2} ],

with the weighted interface average u^{(d)} = delta u^+ + (1-delta) u^-
and periodic wrap (interface N+1/2 identified with 1/2).  In coefficients
v^T A_delta u = G_delta(u; v); integration by parts gives the exact pairing
A_delta^T = -A_{1-delta}, which is the discrete energy identity behind
unconditional stability.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .mesh import Mesh1D
from .quadrature import default_quad_order, gauss_legendre, legendre_eval

_DELTA_GUARD = 1e-12


def _check_delta(delta: float) -> None:
    if abs(delta - 0.5) < _DELTA_GUARD:
        raise ValueError(
            "delta = 1/2 is excluded: the generalized alternating fluxes "
            "require delta != 1/2 (central averaging makes the scheme singular)"
        )


@dataclass(frozen=True, eq=False)
class DGFunction:
    """Piecewise polynomial of degree k in Legendre coefficients.

    coeffs[j, m] multiplies P_m on cell j under the affine map of I_j
    onto [-1, 1].
    """

    mesh: Mesh1D
    degree: int
    coeffs: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=float)
        expected = (self.mesh.n_cells, self.degree + 1)
        if c.shape != expected:
            raise ValueError(f"coefficient array must be {expected}, got {c.shape}")
        object.__setattr__(self, "coeffs", c)

    @classmethod
    def zeros(cls, mesh: Mesh1D, degree: int) -> "DGFunction":
        return cls(mesh, degree, np.zeros((mesh.n_cells, degree + 1)))

    @classmethod
    def from_flat(cls, mesh: Mesh1D, degree: int, flat: np.ndarray) -> "DGFunction":
        return cls(mesh, degree, np.asarray(flat, dtype=float).reshape(mesh.n_cells, degree + 1))

    @property
    def flat(self) -> np.ndarray:
        return self.coeffs.reshape(-1)

    def evaluate(self, x, side: str = "interior"):
        """Point values, with one-sided traces at interfaces.

        side="left" takes the value from the cell left of x when x is an
        interface (wrapping to the last cell at x=a), side="right" from the
        cell to the right (wrapping to the first cell at x=b).  "interior"
        uses the right cell except at x=b.
        """
        mesh = self.mesh
        arr = np.asarray(x, dtype=float)
        pts = arr.reshape(-1)
        span = mesh.b - mesh.a
        if np.any(pts < mesh.a - 1e-12 * span) or np.any(pts > mesh.b + 1e-12 * span):
            raise ValueError(f"evaluation point outside [{mesh.a}, {mesh.b}]")
        pts = np.clip(pts, mesh.a, mesh.b)

        n = mesh.n_cells
        if side == "left":
            j = np.searchsorted(mesh.interfaces, pts, side="left") - 1
            # x = a wraps to the last cell; evaluate at its periodic image
            pts = np.where(j < 0, pts + span, pts)
            j = np.where(j < 0, n - 1, j)
        elif side == "right":
            j = np.searchsorted(mesh.interfaces, pts, side="right") - 1
            pts = np.where(j >= n, pts - span, pts)
            j = np.where(j >= n, 0, j)
        elif side == "interior":
            j = np.searchsorted(mesh.interfaces, pts, side="right") - 1
            j = np.clip(j, 0, n - 1)
        else:
            raise ValueError(f"side must be 'left', 'right' or 'interior', got {side!r}")

        xi = (2.0 * pts - (mesh.interfaces[j] + mesh.interfaces[j + 1])) / mesh.cell_lengths[j]
        vals, _ = legendre_eval(self.degree, np.clip(xi, -1.0, 1.0))
        out = np.einsum("jm,mj->j", self.coeffs[j], vals)
        return float(out[0]) if arr.ndim == 0 else out.reshape(arr.shape)

    def l2_norm(self) -> float:
        """||u|| from the diagonal mass identity sum c^2 h_j/(2m+1)."""
        m = np.arange(self.degree + 1)
        return float(np.sqrt(np.sum(self.coeffs**2 * (self.mesh.cell_lengths[:, None] / (2 * m + 1)))))

    def write_samples_csv(self, path, samples_per_cell: int = 9) -> None:
        """(x, u_h(x)) rows at equispaced points per cell, traces included."""
        if samples_per_cell < 2:
            raise ValueError("need at least 2 samples per cell")
        xi = np.linspace(-1.0, 1.0, samples_per_cell)
        vals, _ = legendre_eval(self.degree, xi)
        u = self.coeffs @ vals  # (N, S)
        x = self.mesh.centers[:, None] + 0.5 * self.mesh.cell_lengths[:, None] * xi
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write("x,u\n")
            for xr, ur in zip(x.reshape(-1), u.reshape(-1)):
                fh.write(f"{float(xr)!r},{float(ur)!r}\n")


@dataclass(frozen=True, eq=False)
class MassMatrix:
    """Diagonal mass matrix with entries h_j / (2m + 1)."""

    diag: np.ndarray  # (N, k+1)

    @property
    def flat(self) -> np.ndarray:
        return self.diag.reshape(-1)

    def apply(self, flat: np.ndarray) -> np.ndarray:
        return self.flat * flat

    def solve(self, flat: np.ndarray) -> np.ndarray:
        return flat / self.flat

    def norm(self, flat: np.ndarray) -> float:
        return float(np.sqrt(np.dot(flat, self.flat * flat)))


def mass_matrix(mesh: Mesh1D, k: int) -> MassMatrix:
    m = np.arange(k + 1)
    return MassMatrix(diag=mesh.cell_lengths[:, None] / (2 * m + 1))


@dataclass(frozen=True, eq=False)
class FluxOperator:
    """Sparse A_delta with v^T A_delta u = G_delta(u; v).

    Block tridiagonal with periodic corners; cell j couples only to
    j +/- 1 (mod N).  The entries are mesh-independent: the volume term
    int u v_x and the traces carry no cell-length factor.
    """

    delta: float
    degree: int
    n_cells: int
    matrix: sp.csr_matrix = field(repr=False)

    def apply(self, flat: np.ndarray) -> np.ndarray:
        return self.matrix @ flat

    def bilinear(self, u_flat: np.ndarray, v_flat: np.ndarray) -> float:
        """G_delta(u; v) for coefficient vectors."""
        return float(v_flat @ (self.matrix @ u_flat))


def assemble_flux_operator(mesh: Mesh1D, k: int, delta: float) -> FluxOperator:
    """Assemble A_delta on a periodic mesh.

    Volume blocks D[m, l] = int_{-1}^{1} P_l P'_m dxi are integrated with a
    (k+1)-point rule (exact: the integrand has degree <= 2k - 1).
    """
    _check_delta(delta)
    n = mesh.n_cells
    rule = gauss_legendre(max(k + 1, 1))
    vals, ders = legendre_eval(k, rule.nodes)
    dmat = (ders * rule.weights) @ vals.T  # D[m, l]

    sign = (-1.0) ** np.arange(k + 1)
    ones = np.ones(k + 1)
    # Traces: v^- at j+1/2 is P_m(1) = 1 from cell j, v^+ at j-1/2 is
    # P_m(-1) = (-1)^m; u^{(d)} = delta u^+ + (1-delta) u^-.
    diag_block = dmat - (1.0 - delta) * np.outer(ones, ones) + delta * np.outer(sign, sign)
    right_block = -delta * np.outer(ones, sign)      # u from cell j+1 at j+1/2
    left_block = (1.0 - delta) * np.outer(sign, ones)  # u from cell j-1 at j-1/2

    j = np.arange(n)
    eye = sp.identity(n, format="coo")
    shift_up = sp.coo_matrix((np.ones(n), (j, (j + 1) % n)), shape=(n, n))
    shift_down = sp.coo_matrix((np.ones(n), (j, (j - 1) % n)), shape=(n, n))
    matrix = (
        sp.kron(eye, diag_block)
        + sp.kron(shift_up, right_block)
        + sp.kron(shift_down, left_block)
    ).tocsr()
    return FluxOperator(delta=delta, degree=k, n_cells=n, matrix=matrix)


def _cell_quad_points(mesh: Mesh1D, nodes: np.ndarray) -> np.ndarray:
    """Mapped quadrature points, shape (N, q)."""
    return mesh.centers[:, None] + 0.5 * mesh.cell_lengths[:, None] * nodes


def cell_integrals(f, mesh: Mesh1D, k: int, quad_order: int) -> np.ndarray:
    """int_{I_j} f P_m dx for every cell and mode, shape (N, k+1)."""
    rule = gauss_legendre(quad_order)
    vals, _ = legendre_eval(k, rule.nodes)
    fv = f(_cell_quad_points(mesh, rule.nodes))  # (N, q)
    return 0.5 * mesh.cell_lengths[:, None] * (fv @ (rule.weights[:, None] * vals.T))


def l2_project(f, mesh: Mesh1D, k: int, quad_order: int | None = None) -> DGFunction:
    """Cellwise L2 projection: coeffs[j, m] = (2m+1)/h_j int_{I_j} f P_m dx."""
    q = default_quad_order(k) if quad_order is None else quad_order
    m = np.arange(k + 1)
    coeffs = cell_integrals(f, mesh, k, q) * ((2 * m + 1) / mesh.cell_lengths[:, None])
    return DGFunction(mesh, k, coeffs)


def gauss_radau_project(
    f,
    mesh: Mesh1D,
    k: int,
    delta: float,
    f_trace: np.ndarray | None = None,
    quad_order: int | None = None,
) -> DGFunction:
    """Weighted Gauss-Radau projection P_delta f.

    The projection satisfies, per cell j,
        int_{I_j} (P_delta f - f) v dx = 0   for all v in P^{k-1}(I_j),
        delta (P_delta f)^+ + (1-delta) (P_delta f)^- = f  at x_{j+1/2},
    with periodic wrap; for k = 0 only the interface conditions apply.
    The interface condition couples neighbouring cells cyclically, so the
    conditions are solved as one global sparse system.

    f_trace may supply the N interface values at the right end of each
    cell (interfaces[1:]); by default they are evaluated from f.
    """
    _check_delta(delta)
    q = default_quad_order(k) if quad_order is None else quad_order
    n = mesh.n_cells
    dim = n * (k + 1)

    if f_trace is None:
        f_trace = f(mesh.interfaces[1:])
    f_trace = np.asarray(f_trace, dtype=float)
    if f_trace.shape != (n,):
        raise ValueError(f"f_trace must have one value per interface, shape ({n},)")

    rows, cols, data = [], [], []
    rhs = np.zeros(dim)
    j = np.arange(n)

    if k > 0:
        moments = cell_integrals(f, mesh, k - 1, q)  # (N, k)
        m = np.arange(k)
        r = (j[:, None] * (k + 1) + m).reshape(-1)
        rows.append(r)
        cols.append(r)
        data.append((mesh.cell_lengths[:, None] / (2 * m + 1)).reshape(-1))
        rhs[r] = moments.reshape(-1)

    sign = (-1.0) ** np.arange(k + 1)
    r_iface = j * (k + 1) + k
    own = (j[:, None] * (k + 1) + np.arange(k + 1)).reshape(-1)
    nbr = ((((j + 1) % n) * (k + 1))[:, None] + np.arange(k + 1)).reshape(-1)
    rows.append(np.repeat(r_iface, k + 1))
    cols.append(own)
    data.append(np.full(n * (k + 1), 1.0 - delta))
    rows.append(np.repeat(r_iface, k + 1))
    cols.append(nbr)
    data.append(np.tile(delta * sign, n))
    rhs[r_iface] = f_trace

    system = sp.coo_matrix(
        (np.concatenate(data), (np.concatenate(rows), np.concatenate(cols))),
        shape=(dim, dim),
    ).tocsr()
    try:
        flat = spla.spsolve(system, rhs)
    except Exception as exc:  # pragma: no cover - delta=1/2 already excluded
        raise RuntimeError(
            f"Gauss-Radau projection system is singular (delta={delta}, k={k}, N={n})"
        ) from exc
    if not np.all(np.isfinite(flat)):
        raise RuntimeError(
            f"Gauss-Radau projection solve produced non-finite values "
            f"(delta={delta}, k={k}, N={n})"
        )
    return DGFunction.from_flat(mesh, k, flat)


def error_norms(
    u_h: DGFunction,
    u_exact,
    quad_order: int | None = None,
    samples_per_cell: int = 8,
) -> tuple[float, float]:
    """(L2, Linf) distance between a DG function and an exact profile.

    L2 by cellwise quadrature; Linf over the union of the quadrature nodes,
    samples_per_cell equispaced interior points and both one-sided traces
    in every cell (the DG sup error is generally attained away from nodes).
    """
    k = u_h.degree
    mesh = u_h.mesh
    q = default_quad_order(k) if quad_order is None else quad_order
    rule = gauss_legendre(q)

    interior = np.linspace(-1.0, 1.0, samples_per_cell + 2)[1:-1]
    xi = np.concatenate([rule.nodes, interior, [-1.0, 1.0]])
    vals, _ = legendre_eval(k, xi)
    diff = u_h.coeffs @ vals - u_exact(_cell_quad_points(mesh, xi))  # (N, S)

    nq = rule.order
    l2 = float(np.sqrt(np.sum(0.5 * mesh.cell_lengths * (diff[:, :nq] ** 2 @ rule.weights))))
    linf = float(np.max(np.abs(diff)))
    return l2, linf
