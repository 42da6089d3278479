"""Uniform 1-D grids carrying densities p(x) and amplitudes psi(x) = sqrt(p(x)).

All quadrature is the trapezoid rule on a uniform grid. Fisher information is
estimated from the amplitude, I = 4 * int (psi')^2 dx, which stays finite
where p -> 0 (the log-derivative form does not).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Mapping

import numpy as np

from .errors import (
    DataError,
    NegativeDensity,
    NonUniformGrid,
    TailMassWarning,
    ZeroMass,
)

TAIL_RATIO = 1e-8
_UNIFORM_RTOL = 1e-6
# re-normalizing an already normalized density must be a no-op
_MASS_EPS = 16 * np.finfo(float).eps


def _frozen_array(values) -> np.ndarray:
    arr = np.array(values, dtype=float)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class Grid:
    """Uniform grid of ``n_points`` nodes on ``[x_min, x_max]``.

    ``n_points`` must be odd so that a symmetric grid has a node at x = 0.
    """

    x_min: float
    x_max: float
    n_points: int

    def __post_init__(self):
        if not (np.isfinite(self.x_min) and np.isfinite(self.x_max)):
            raise DataError("grid bounds must be finite")
        if not self.x_min < self.x_max:
            raise DataError(f"need x_min < x_max, got {self.x_min} >= {self.x_max}")
        if int(self.n_points) != self.n_points or self.n_points < 3:
            raise DataError(f"n_points must be an integer >= 3, got {self.n_points}")
        if self.n_points % 2 == 0:
            raise DataError(f"n_points must be odd, got {self.n_points}")
        object.__setattr__(self, "n_points", int(self.n_points))
        object.__setattr__(self, "x_min", float(self.x_min))
        object.__setattr__(self, "x_max", float(self.x_max))

    @classmethod
    def symmetric(cls, half_width: float, n_points: int) -> "Grid":
        return cls(-float(half_width), float(half_width), n_points)

    @classmethod
    def from_nodes(cls, x) -> "Grid":
        """Recover the grid behind an ascending, uniformly spaced node array."""
        x = np.asarray(x, dtype=float)
        if x.ndim != 1 or x.size < 3:
            raise DataError("need at least 3 nodes")
        dx = np.diff(x)
        if np.any(dx <= 0):
            raise DataError("nodes must be strictly ascending")
        h = (x[-1] - x[0]) / (x.size - 1)
        if np.max(np.abs(dx - h)) > _UNIFORM_RTOL * h:
            raise NonUniformGrid("only uniform grids are supported")
        return cls(x[0], x[-1], x.size)

    @property
    def spacing(self) -> float:
        return (self.x_max - self.x_min) / (self.n_points - 1)

    @property
    def is_symmetric(self) -> bool:
        return self.x_min == -self.x_max

    @cached_property
    def nodes(self) -> np.ndarray:
        x = np.linspace(self.x_min, self.x_max, self.n_points)
        if self.is_symmetric:
            x = 0.5 * (x - x[::-1])
            x[self.n_points // 2] = 0.0
        x.setflags(write=False)
        return x

    def refined(self) -> "Grid":
        """Same interval with the spacing halved; every node of ``self`` is kept."""
        return Grid(self.x_min, self.x_max, 2 * self.n_points - 1)

    def scaled(self, c: float) -> "Grid":
        if c <= 0:
            raise DataError("scale factor must be positive")
        return Grid(c * self.x_min, c * self.x_max, self.n_points)

    def as_dict(self) -> dict:
        return {"x_min": self.x_min, "x_max": self.x_max, "n_points": self.n_points}


def trapezoid(values, grid: Grid) -> float:
    return float(np.trapezoid(values, dx=grid.spacing))


@dataclass(frozen=True)
class DensityOnGrid:
    grid: Grid
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        vals = _frozen_array(self.values)
        if vals.shape != (self.grid.n_points,):
            raise DataError(f"expected {self.grid.n_points} values, got {vals.shape}")
        if not np.all(np.isfinite(vals)):
            raise ZeroMass("density contains non-finite values")
        if np.any(vals < 0):
            raise NegativeDensity(f"density has negative values (min {vals.min():.3e})")
        object.__setattr__(self, "values", vals)

    @classmethod
    def from_function(cls, grid: Grid, f: Callable[[np.ndarray], np.ndarray]) -> "DensityOnGrid":
        return cls(grid, f(grid.nodes))

    @property
    def x(self) -> np.ndarray:
        return self.grid.nodes

    def mass(self) -> float:
        return trapezoid(self.values, self.grid)


@dataclass(frozen=True)
class AmplitudeOnGrid:
    grid: Grid
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        vals = _frozen_array(self.values)
        if vals.shape != (self.grid.n_points,):
            raise DataError(f"expected {self.grid.n_points} values, got {vals.shape}")
        if not np.all(np.isfinite(vals)):
            raise DataError("amplitude contains non-finite values")
        object.__setattr__(self, "values", vals)

    @classmethod
    def from_function(cls, grid: Grid, f: Callable[[np.ndarray], np.ndarray]) -> "AmplitudeOnGrid":
        return cls(grid, f(grid.nodes))

    @property
    def x(self) -> np.ndarray:
        return self.grid.nodes

    def norm2(self) -> float:
        return trapezoid(self.values**2, self.grid)

    def normalized(self) -> "AmplitudeOnGrid":
        n2 = self.norm2()
        if not n2 > 0:
            raise ZeroMass("amplitude has zero norm")
        return AmplitudeOnGrid(self.grid, self.values / np.sqrt(n2))


@dataclass(frozen=True)
class MomentSet:
    """Power moments F_k = <x^k> keyed by order k >= 1."""

    moments: Mapping[int, float]

    def __post_init__(self):
        m = {int(k): float(v) for k, v in dict(self.moments).items()}
        if any(k < 1 for k in m):
            raise DataError("moment orders start at 1")
        if 1 in m and 2 in m and m[2] < m[1] ** 2 * (1 - 1e-12):
            raise DataError("F_2 < F_1^2: negative variance")
        object.__setattr__(self, "moments", m)

    def __getitem__(self, k: int) -> float:
        return self.moments[k]


def normalize(d: DensityOnGrid) -> DensityOnGrid:
    mass = d.mass()
    if not np.isfinite(mass) or mass <= 0:
        raise ZeroMass(f"density integrates to {mass}")
    if abs(mass - 1.0) <= _MASS_EPS:
        return d
    return DensityOnGrid(d.grid, d.values / mass)


def amplitude_from_density(d: DensityOnGrid) -> AmplitudeOnGrid:
    return AmplitudeOnGrid(d.grid, np.sqrt(d.values))


def density_from_amplitude(a: AmplitudeOnGrid) -> DensityOnGrid:
    return DensityOnGrid(a.grid, a.values**2)


def moment(d: DensityOnGrid, k: int) -> float:
    """Trapezoid estimate of int x^k p(x) dx (no renormalization)."""
    if int(k) != k or k < 1:
        raise DataError(f"moment order must be an integer >= 1, got {k}")
    return trapezoid(d.x ** int(k) * d.values, d.grid)


def moments(d: DensityOnGrid, orders=(1, 2, 3, 4)) -> MomentSet:
    return MomentSet({k: moment(d, k) for k in orders})


def mean(d: DensityOnGrid) -> float:
    return moment(d, 1) / d.mass()


def variance(d: DensityOnGrid) -> float:
    """Variance about the mean, with moments taken relative to the total mass."""
    m0 = d.mass()
    if not m0 > 0:
        raise ZeroMass("density has zero mass")
    mu = moment(d, 1) / m0
    return trapezoid((d.x - mu) ** 2 * d.values, d.grid) / m0


def check_tail_mass(values, what: str = "density") -> bool:
    """Warn and return False when the edge values are not negligible next to the peak."""
    vals = np.asarray(values)
    peak = np.max(vals)
    edge = max(vals[0], vals[-1])
    if peak > 0 and edge > TAIL_RATIO * peak:
        warnings.warn(
            f"{what} at grid edge is {edge / peak:.2e} of peak; widen the grid",
            TailMassWarning,
            stacklevel=3,
        )
        return False
    return True


def fisher_information(a: AmplitudeOnGrid) -> float:
    """I = 4 * int (dpsi/dx)^2 dx with central differences, one-sided at the ends.

    Second order in the spacing for smooth amplitudes; first order when the
    amplitude has a kink (e.g. the Laplace cusp at 0).
    """
    psi = a.values
    check_tail_mass(psi**2)
    dpsi = np.gradient(psi, a.grid.spacing, edge_order=2)
    return 4.0 * trapezoid(dpsi**2, a.grid)


def cramer_rao_product(d: DensityOnGrid) -> float:
    """sigma^2 * I; at least 1 for any density, equal to 1 only for the Gaussian."""
    d = normalize(d)
    return variance(d) * fisher_information(amplitude_from_density(d))


def peak_height(d: DensityOnGrid) -> float:
    """p(0), read from the node at 0 or linearly interpolated."""
    x = d.x
    if not x[0] <= 0.0 <= x[-1]:
        raise DataError("x = 0 lies outside the grid")
    i = np.flatnonzero(x == 0.0)
    if i.size:
        return float(d.values[i[0]])
    return float(np.interp(0.0, x, d.values))
