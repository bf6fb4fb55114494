"""1D periodic partitions of [a, b]: uniform and randomly perturbed."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

# Perturbed meshes shift each interior node by at most +/- 5% of the uniform
# spacing (a 10% total window), which keeps nodes ordered unconditionally and
# guarantees min h_j / max h_j >= 0.9/1.1 > 0.5.
PERTURBATION_FRACTION = 0.05
QUASI_UNIFORMITY_KAPPA = 0.5


@dataclass(frozen=True, eq=False)
class Mesh1D:
    """Partition a = x_{1/2} < x_{3/2} < ... < x_{N+1/2} = b into N cells.

    Cell j (0-based) is [interfaces[j], interfaces[j+1]] with length h_j.
    Boundaries are treated periodically: interface N+1/2 is identified
    with interface 1/2.
    """

    interfaces: np.ndarray
    periodic: bool = True
    cell_lengths: np.ndarray = field(init=False)

    def __post_init__(self):
        pts = np.asarray(self.interfaces, dtype=float)
        if pts.ndim != 1 or pts.size < 3:
            raise ValueError("a mesh needs at least 2 cells (3 interface points)")
        if not np.all(np.isfinite(pts)):
            raise ValueError("mesh interfaces must be finite")
        lengths = np.diff(pts)
        if np.any(lengths <= 0.0):
            raise ValueError("mesh interfaces must be strictly increasing")
        object.__setattr__(self, "interfaces", pts)
        object.__setattr__(self, "cell_lengths", lengths)

    @property
    def n_cells(self) -> int:
        return self.interfaces.size - 1

    @property
    def a(self) -> float:
        return float(self.interfaces[0])

    @property
    def b(self) -> float:
        return float(self.interfaces[-1])

    @property
    def h_max(self) -> float:
        return float(self.cell_lengths.max())

    @property
    def h_min(self) -> float:
        return float(self.cell_lengths.min())

    @property
    def centers(self) -> np.ndarray:
        return 0.5 * (self.interfaces[:-1] + self.interfaces[1:])

    def quasi_uniformity(self) -> float:
        """min_j h_j / max_j h_j (the kappa of the partition)."""
        return self.h_min / self.h_max

    def write_interfaces_csv(self, path) -> None:
        """One interface coordinate per line (debugging/plotting aid)."""
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            for x in self.interfaces:
                fh.write(f"{float(x)!r}\n")


def _check_domain(a: float, b: float, n: int) -> None:
    if n < 2:
        raise ValueError(f"need at least 2 cells, got N={n}")
    if not a < b:
        raise ValueError(f"domain requires a < b, got a={a}, b={b}")


def uniform_mesh(a: float, b: float, n: int) -> Mesh1D:
    """N equal cells on [a, b]."""
    _check_domain(a, b, n)
    return Mesh1D(interfaces=np.linspace(a, b, n + 1))


def perturbed_mesh(
    a: float, b: float, n: int, seed: int,
    fraction: float = PERTURBATION_FRACTION,
) -> Mesh1D:
    """Uniform mesh with interior interfaces independently shifted.

    Each interior node moves by a draw uniform in [-fraction h, +fraction h],
    h = (b - a)/N; endpoints stay fixed.  Deterministic for fixed seed
    (numpy PCG64 stream).  fraction must stay below 1/2 to keep nodes ordered.
    """
    _check_domain(a, b, n)
    if not 0.0 <= fraction < 0.5:
        raise ValueError(f"perturbation fraction must lie in [0, 1/2), got {fraction}")
    h = (b - a) / n
    rng = np.random.default_rng(seed)
    pts = np.linspace(a, b, n + 1)
    pts[1:-1] += rng.uniform(-fraction * h, fraction * h, size=n - 1)
    return Mesh1D(interfaces=pts)
