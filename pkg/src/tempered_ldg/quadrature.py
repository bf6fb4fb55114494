"""Legendre polynomials and Gauss-Legendre quadrature on [-1, 1].

All spatial assembly and error measurement is built on the non-normalized
Legendre family P_0, P_1, ..., which makes every cell mass matrix diagonal
with entries h_j / (2m + 1).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

MAX_QUAD_POINTS = 32

_NEWTON_TOL = 1e-15
_NEWTON_MAX_ITER = 100


def legendre_eval(k: int, xi):
    """Evaluate P_0..P_k and P_0'..P_k' at xi in [-1, 1].

    xi may be a scalar or an ndarray; returns (values, derivatives) with
    leading axis m = 0..k.  Uses the three-term recurrences
        (m+1) P_{m+1} = (2m+1) xi P_m - m P_{m-1}
        P'_{m+1} = (2m+1) P_m + P'_{m-1}
    """
    if k < 0:
        raise ValueError(f"degree must be >= 0, got {k}")
    xi = np.asarray(xi, dtype=float)
    if np.any(xi < -1.0) or np.any(xi > 1.0):
        raise ValueError("evaluation point outside [-1, 1]")

    values = np.zeros((k + 1,) + xi.shape)
    derivs = np.zeros_like(values)
    values[0] = 1.0
    if k >= 1:
        values[1] = xi
        derivs[1] = 1.0
    for m in range(1, k):
        values[m + 1] = ((2 * m + 1) * xi * values[m] - m * values[m - 1]) / (m + 1)
        derivs[m + 1] = (2 * m + 1) * values[m] + derivs[m - 1]
    return values, derivs


@dataclass(frozen=True, eq=False)
class LegendreBasis:
    """Legendre basis of degree k on the reference cell [-1, 1]."""

    degree: int

    def __post_init__(self):
        if self.degree < 0:
            raise ValueError(f"degree must be >= 0, got {self.degree}")

    def eval(self, xi):
        return legendre_eval(self.degree, xi)

    def values_at(self, xi):
        return legendre_eval(self.degree, xi)[0]

    @property
    def right_traces(self) -> np.ndarray:
        """P_m(+1) = 1 for all m."""
        return np.ones(self.degree + 1)

    @property
    def left_traces(self) -> np.ndarray:
        """P_m(-1) = (-1)^m."""
        return np.array([(-1.0) ** m for m in range(self.degree + 1)])


@dataclass(frozen=True, eq=False)
class QuadRule:
    """A q-point quadrature rule on [-1, 1], exact for degree <= 2q - 1."""

    nodes: np.ndarray
    weights: np.ndarray
    order: int

    def integrate(self, fvals: np.ndarray) -> float:
        """Integrate from samples taken at the rule's nodes (last axis)."""
        return fvals @ self.weights


def gauss_legendre(q: int) -> QuadRule:
    """q-point Gauss-Legendre rule on [-1, 1].

    Nodes are the roots of P_q, found by Newton iteration from the
    Chebyshev-based initial guesses cos(pi (i + 3/4) / (q + 1/2));
    weights are 2 / ((1 - x^2) P_q'(x)^2).
    """
    if not isinstance(q, (int, np.integer)) or isinstance(q, bool):
        raise ValueError(f"quadrature order must be an integer, got {q!r}")
    if q < 1 or q > MAX_QUAD_POINTS:
        raise ValueError(f"quadrature order must be in [1, {MAX_QUAD_POINTS}], got {q}")

    i = np.arange(q)
    x = np.cos(np.pi * (i + 0.75) / (q + 0.5))
    for _ in range(_NEWTON_MAX_ITER):
        vals, ders = legendre_eval(q, x)
        dx = vals[q] / ders[q]
        x = x - dx
        if np.max(np.abs(dx)) < _NEWTON_TOL:
            break

    # Enforce exact symmetry about 0 (the roots come in +/- pairs).
    x = np.sort(x)
    x = 0.5 * (x - x[::-1])
    _, ders = legendre_eval(q, x)
    w = 2.0 / ((1.0 - x * x) * ders[q] ** 2)
    w = 0.5 * (w + w[::-1])
    return QuadRule(nodes=x, weights=w, order=q)


def default_quad_order(k: int) -> int:
    """Volume-integral order used for assembly and error norms.

    max(k + 2, 6) keeps quadrature error negligible next to the h^{k+1}
    scheme error for smooth data.
    """
    return max(k + 2, 6)
