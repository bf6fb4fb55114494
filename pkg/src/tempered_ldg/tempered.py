"""L1 discretization of the tempered Caputo derivative of order alpha in (0, 1).

At time t_n = n tau the derivative of g is approximated by

    Phi^n = mu * ( g(t_n)
                   + sum_{i=1}^{n-1} (b_i - b_{i-1}) e^{-i gamma tau} g(t_{n-i})
                   - b_{n-1} e^{-n gamma tau} g(t_0) ),

with b_i = (i+1)^{1-alpha} - i^{1-alpha} and mu = tau^{-alpha} / Gamma(2-alpha).
The truncation error is O(tau^{2-alpha}) for smooth g.  Equivalently
Phi^n = mu * (g(t_n) - h^n) where h^n is the history combination consumed by
the implicit scheme's right-hand side each step.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True, eq=False)
class TemperedWeights:
    """Precomputed L1 weights and tempering factors for one (alpha, gamma, tau, M).

    b[i] = (i+1)^{1-alpha} - i^{1-alpha} for i = 0..M-1 (b[0] = 1, strictly
    decreasing, positive); damp[i] = e^{-i gamma tau} for i = 0..M;
    mu = tau^{-alpha} / Gamma(2 - alpha).
    """

    alpha: float
    gamma: float
    tau: float
    steps: int
    b: np.ndarray
    damp: np.ndarray
    mu: float
    # (b_{i-1} - b_i) * damp[i] for i = 1..M-1; entry 0 unused.
    _wdiff: np.ndarray = field(repr=False)


def build_weights(alpha: float, gamma: float, tau: float, steps: int) -> TemperedWeights:
    """Weights for M = steps time levels of size tau."""
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    if gamma < 0.0:
        raise ValueError(f"gamma must be >= 0, got {gamma}")
    if tau <= 0.0:
        raise ValueError(f"tau must be > 0, got {tau}")
    if steps < 1:
        raise ValueError(f"step count must be >= 1, got {steps}")

    i = np.arange(steps, dtype=float)
    b = (i + 1.0) ** (1.0 - alpha) - i ** (1.0 - alpha)
    damp = np.exp(-gamma * tau * np.arange(steps + 1, dtype=float))
    mu = tau ** (-alpha) / math.gamma(2.0 - alpha)
    wdiff = np.zeros(steps)
    if steps > 1:
        wdiff[1:] = (b[:-1] - b[1:]) * damp[1:steps]
    return TemperedWeights(
        alpha=alpha, gamma=gamma, tau=tau, steps=steps, b=b, damp=damp, mu=mu,
        _wdiff=wdiff,
    )


def history_combination(weights: TemperedWeights, n: int, history) -> np.ndarray:
    """h^n entering the right-hand side at step n.

    history holds the n vectors u^0 .. u^{n-1} (rows of equal length, or
    scalars);

        h^n = sum_{i=1}^{n-1} (b_{i-1} - b_i) e^{-i gamma tau} u^{n-i}
              + b_{n-1} e^{-n gamma tau} u^0.

    Telescoping gives h^n = c for a constant history u^i = c when gamma = 0.
    """
    if not 1 <= n <= weights.steps:
        raise ValueError(f"step index n={n} outside [1, {weights.steps}]")
    hist = np.asarray(history, dtype=float)
    if hist.shape[0] != n:
        raise ValueError(f"history must hold exactly n={n} entries, got {hist.shape[0]}")

    coeff = np.empty(n)
    coeff[0] = weights.b[n - 1] * weights.damp[n]
    if n > 1:
        # u^j for j = 1..n-1 pairs with i = n-j.
        coeff[1:] = weights._wdiff[n - 1:0:-1]
    return coeff @ hist


def tempered_derivative_scalar(weights: TemperedWeights, samples) -> float:
    """Discrete tempered derivative Phi^n from samples g(t_0)..g(t_n).

    Drives the truncation-order tests against analytic tempered derivatives;
    the solver itself uses history_combination on coefficient vectors.
    """
    g = np.asarray(samples, dtype=float)
    if g.ndim != 1 or g.size < 2:
        raise ValueError("need samples g(t_0)..g(t_n) with n >= 1")
    n = g.size - 1
    if n > weights.steps:
        raise ValueError(f"n={n} exceeds the {weights.steps} precomputed steps")
    return weights.mu * (g[n] - history_combination(weights, n, g[:n]))
