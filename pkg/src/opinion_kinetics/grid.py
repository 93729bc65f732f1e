"""Cell-centered grids on (-1, 1) and nonnegative densities living on them."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np


class GridMismatchError(ValueError):
    """Raised when two fields that must share a grid do not."""


@dataclass(frozen=True)
class Grid:
    """Uniform cell-centered grid on (-1, 1) with n_cells cells.

    Cell centers are y_i = -1 + (i + 1/2) dy, dy = 2/n; all centers are
    strictly interior, so endpoint singularities of the steady state are
    never evaluated.  Centers and interfaces are stored exactly mirror
    symmetric so that even/odd symmetry of the dynamics survives in
    floating point.
    """

    n_cells: int

    def __post_init__(self):
        if self.n_cells < 4:
            raise ValueError(f"need at least 4 cells, got {self.n_cells}")

    @property
    def cell_width(self) -> float:
        return 2.0 / self.n_cells

    @cached_property
    def centers(self) -> np.ndarray:
        y = -1.0 + (np.arange(self.n_cells) + 0.5) * self.cell_width
        y = 0.5 * (y - y[::-1])
        y.flags.writeable = False
        return y

    @cached_property
    def interior_interfaces(self) -> np.ndarray:
        """The n-1 interfaces between neighboring cells (boundaries excluded)."""
        z = -1.0 + (np.arange(1, self.n_cells)) * self.cell_width
        z = 0.5 * (z - z[::-1])
        z.flags.writeable = False
        return z

    @cached_property
    def edges(self) -> np.ndarray:
        """All n+1 cell edges, including the domain endpoints -1 and 1."""
        e = np.concatenate(([-1.0], self.interior_interfaces, [1.0]))
        e.flags.writeable = False
        return e


def build_grid(n: int) -> Grid:
    """Uniform grid with n >= 4 cells on (-1, 1)."""
    return Grid(n)


@dataclass(frozen=True)
class DensityField:
    """Nonnegative cell values of a density on a Grid.

    values[i] approximates the density at the cell center y_i; the discrete
    mass is sum(values) * dy.
    """

    grid: Grid
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape != (self.grid.n_cells,):
            raise ValueError(
                f"values shape {v.shape} does not match grid with {self.grid.n_cells} cells"
            )
        if not np.all(np.isfinite(v)):
            raise ValueError("density values must be finite")
        if np.any(v < 0.0):
            raise ValueError(f"density values must be nonnegative (min {v.min()})")
        v = v.copy()
        v.flags.writeable = False
        object.__setattr__(self, "values", v)

    def mass(self) -> float:
        return float(self.values.sum() * self.grid.cell_width)

    def is_normalized(self, tol: float = 1e-12) -> bool:
        return abs(self.mass() - 1.0) <= tol

    def normalized(self) -> "DensityField":
        m = self.mass()
        if m <= 0.0:
            raise ValueError("cannot normalize a field with zero mass")
        return DensityField(self.grid, self.values / m)

    def mean(self) -> float:
        return float((self.grid.centers * self.values).sum() * self.grid.cell_width)


def require_same_grid(*fields: DensityField) -> Grid:
    g = fields[0].grid
    for f in fields[1:]:
        if f.grid.n_cells != g.n_cells:
            raise GridMismatchError(
                f"grids differ: {g.n_cells} vs {f.grid.n_cells} cells"
            )
    return g


def uniform_density(grid: Grid) -> DensityField:
    """The uniform probability density 1/2 on (-1, 1)."""
    return DensityField(grid, np.full(grid.n_cells, 0.5))


def bimodal_density(grid: Grid, width: float = 0.15) -> DensityField:
    """Equal-weight Gaussian mixture at +-1/2, truncated to (-1,1), renormalized.

    The standard initial condition for the decay experiments.  Values are
    symmetrized so the discrete field is exactly even.
    """
    if width <= 0.0:
        raise ValueError("width must be positive")
    y = grid.centers
    v = np.exp(-0.5 * ((y - 0.5) / width) ** 2) + np.exp(-0.5 * ((y + 0.5) / width) ** 2)
    v = 0.5 * (v + v[::-1])
    v /= v.sum() * grid.cell_width
    return DensityField(grid, v)


def random_smooth_density(grid: Grid, rng: np.random.Generator, degree: int = 4,
                          amplitude: float = 0.6) -> DensityField:
    """Strictly positive smooth random density: exp of a low-order trig series.

    Used by the inequality property batteries; smoothness keeps the
    discretization error of the functionals at second order.
    """
    y = grid.centers
    logv = np.zeros_like(y)
    for k in range(1, degree + 1):
        a, b = rng.normal(size=2) * amplitude / k
        logv += a * np.cos(0.5 * np.pi * k * y) + b * np.sin(0.5 * np.pi * k * y)
    v = np.exp(logv)
    v /= v.sum() * grid.cell_width
    return DensityField(grid, v)


def random_grid_function(grid: Grid, rng: np.random.Generator, degree: int = 4,
                         amplitude: float = 1.0) -> np.ndarray:
    """Sign-changing smooth random function for the L2 form of the inequality."""
    y = grid.centers
    w = rng.normal() * amplitude * np.ones_like(y)
    for k in range(1, degree + 1):
        a, b = rng.normal(size=2) * amplitude / k
        w += a * np.cos(0.5 * np.pi * k * y) + b * np.sin(0.5 * np.pi * k * y)
    return w
