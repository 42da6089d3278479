"""Ground states of -psi''/2 + U psi = E psi.

Polynomial and square-well potentials are discretized on a uniform grid with
the three-point second difference and zero boundary values, giving a
symmetric tridiagonal matrix. Its lowest eigenvalue is bracketed by Sturm
sequence counts (multisection), then polished by shifted inverse iteration and
a Rayleigh quotient. By default the grid solve is repeated at half spacing and
the two results are Richardson-extrapolated, which removes the O(h^2) stencil
error; the raw eigenpair is kept on the result.

The square well also has a transcendental closed form and the delta well a
fully closed form; both live here so they can be cross-checked against the
grid solver.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Union

import numpy as np
from scipy.linalg import cho_solve_banded, cholesky_banded

from .errors import DataError, GridTooNarrow, NoBoundState, NotConverged
from .grid import AmplitudeOnGrid, DensityOnGrid, Grid, TAIL_RATIO, trapezoid
from .potentials import (
    DeltaPotential,
    OscillatorParams,
    PolynomialPotential,
    SquareWellPotential,
    omega_from_lambda2,
)

RESIDUAL_RTOL = 1e-8
EDGE_MARGIN = 10.0
_N_SHIFTS = 255
_BRACKET_RTOL = 1e-5
_MAX_INVIT = 50

GridPotential = Union[PolynomialPotential, OscillatorParams, SquareWellPotential]


@dataclass(frozen=True)
class GroundState:
    """Lowest eigenpair on a grid.

    ``energy`` and ``amplitude`` are Richardson-extrapolated when the solve
    used it; ``raw_energy`` is always the plain tridiagonal eigenvalue on
    ``amplitude.grid`` and ``residual`` is max_i |(H psi)_i - E psi_i| for that
    raw pair.
    """

    energy: float
    amplitude: AmplitudeOnGrid = field(repr=False)
    residual: float
    raw_energy: float
    extrapolated: bool = True

    @property
    def grid(self) -> Grid:
        return self.amplitude.grid

    def density(self) -> DensityOnGrid:
        return DensityOnGrid(self.grid, self.amplitude.values**2)


# --- symmetric tridiagonal machinery ---------------------------------------

def hamiltonian_tridiagonal(U, grid: Grid) -> tuple[np.ndarray, np.ndarray]:
    """Diagonal and off-diagonal of H = -D2/2 + diag(U) on the interior nodes."""
    h = grid.spacing
    xi = grid.nodes[1:-1]
    diag = 1.0 / h**2 + np.asarray(U(xi), dtype=float)
    off = np.full(xi.size - 1, -0.5 / h**2)
    return diag, off


def sturm_count(diag, off, shifts) -> np.ndarray:
    """Number of eigenvalues strictly below each shift.

    Counts negative pivots of the LDL^T factorization of T - s I (Sylvester
    inertia). ``shifts`` may be a scalar or an array; all shifts advance
    through the recurrence together.
    """
    diag = np.asarray(diag, dtype=float)
    off2 = (np.asarray(off, dtype=float) ** 2).tolist()
    s = np.atleast_1d(np.asarray(shifts, dtype=float))
    q = diag[0] - s
    count = (q < 0).astype(np.int64)
    # an exactly zero pivot gives q = -inf next, which is the correct count
    with np.errstate(divide="ignore", invalid="ignore"):
        for d_i, b2 in zip(diag[1:].tolist(), off2):
            q = (d_i - s) - b2 / q
            count += q < 0
    return count if np.ndim(shifts) else count[0]


def _gershgorin_lower(diag, off) -> float:
    r = np.zeros_like(diag)
    r[:-1] += np.abs(off)
    r[1:] += np.abs(off)
    return float(np.min(diag - r))


def _rayleigh(diag, off, v) -> float:
    tv = diag * v
    tv[:-1] += off * v[1:]
    tv[1:] += off * v[:-1]
    return float(v @ tv / (v @ v))


def bracket_lowest(diag, off, rtol: float = _BRACKET_RTOL) -> tuple[float, float]:
    """(lo, hi) with exactly no eigenvalue below lo and at least one below hi."""
    n = diag.size
    lo = _gershgorin_lower(diag, off)
    trial = np.sin(np.pi * np.arange(1, n + 1) / (n + 1))
    hi = _rayleigh(diag, off, trial)
    hi += 1e-12 * max(1.0, abs(hi))  # make sure count(hi) >= 1
    scale = max(1.0, abs(lo), abs(hi))
    while hi - lo > rtol * max(abs(lo), abs(hi), 1e-3 * scale):
        shifts = np.linspace(lo, hi, _N_SHIFTS + 2)[1:-1]
        counts = sturm_count(diag, off, shifts)
        below = np.flatnonzero(counts >= 1)
        if below.size:
            j = below[0]
            hi = shifts[j]
            if j > 0:
                lo = shifts[j - 1]
        else:
            lo = shifts[-1]
    return lo, hi


def lowest_eigenpair(diag, off) -> tuple[float, np.ndarray]:
    """Lowest eigenvalue and unit eigenvector of a symmetric tridiagonal matrix."""
    diag = np.asarray(diag, dtype=float)
    off = np.asarray(off, dtype=float)
    lo, hi = bracket_lowest(diag, off)
    # T - lo*I is positive definite because nothing lies below lo
    ab = np.zeros((2, diag.size))
    ab[0] = diag - lo
    ab[1, :-1] = off
    chol = cholesky_banded(ab, lower=True)
    v = np.sin(np.pi * np.arange(1, diag.size + 1) / (diag.size + 1))
    v /= np.linalg.norm(v)
    for _ in range(_MAX_INVIT):
        w = cho_solve_banded((chol, True), v)
        w /= np.linalg.norm(w)
        if w.sum() < 0:
            w = -w
        step = np.max(np.abs(w - v))
        v = w
        # the Rayleigh quotient error is O(step^2); its own jitter is eps*||T||
        if step < 1e-12:
            break
    else:
        raise NotConverged("inverse iteration did not settle")
    energy = _rayleigh(diag, off, v)
    if not lo - 1e-9 * max(1.0, abs(lo)) <= energy <= hi + 1e-9 * max(1.0, abs(hi)):
        raise NotConverged(f"Rayleigh quotient {energy} escaped the Sturm bracket [{lo}, {hi}]")
    return energy, v


def interior_sign_changes(values, rtol: float = 1e-10) -> int:
    v = np.asarray(values)
    sig = v[np.abs(v) > rtol * np.max(np.abs(v))]
    return int(np.count_nonzero(np.diff(np.sign(sig))))


# --- grid solves -------------------------------------------------------------

def _as_callable(U: GridPotential):
    if isinstance(U, OscillatorParams):
        return U.potential
    if isinstance(U, (PolynomialPotential, SquareWellPotential)):
        return U
    if isinstance(U, DeltaPotential):
        raise DataError("the delta well is handled in closed form: use delta_ground_state")
    raise TypeError(f"unsupported potential {U!r}")


def _solve_raw(Ufun, grid: Grid) -> tuple[float, np.ndarray, float]:
    diag, off = hamiltonian_tridiagonal(Ufun, grid)
    energy, v = lowest_eigenpair(diag, off)
    tv = diag * v
    tv[:-1] += off * v[1:]
    tv[1:] += off * v[:-1]
    psi = np.zeros(grid.n_points)
    psi[1:-1] = v
    norm = math.sqrt(trapezoid(psi**2, grid))
    residual = float(np.max(np.abs(tv - energy * v))) / norm
    return energy, psi / norm, residual


def _clean_sign(psi: np.ndarray, grid: Grid) -> np.ndarray:
    x = grid.nodes
    if x[0] <= 0.0 <= x[-1]:
        ref = np.interp(0.0, x, psi)
        if ref < 0 or (ref == 0 and psi.sum() < 0):
            psi = -psi
    elif psi.sum() < 0:
        psi = -psi
    if interior_sign_changes(psi) > 0:
        raise NotConverged("lowest eigenvector has a node; it is not a ground state")
    return np.maximum(psi, 0.0)


def ground_state(U: GridPotential, grid: Grid | None = None, richardson: bool = True) -> GroundState:
    """Ground state of a polynomial/oscillator or square-well potential on ``grid``.

    Raises
    ------
    NoBoundState
        A square well whose lowest grid eigenvalue is not below zero.
    GridTooNarrow
        Density at the first/last interior node exceeds 1e-8 of the peak, or a
        polynomial potential rises less than 10 energy units above E at the edges.
    """
    if grid is None:
        grid = default_grid(U)
    Ufun = _as_callable(U)
    if isinstance(U, SquareWellPotential):
        diag, off = hamiltonian_tridiagonal(Ufun, grid)
        if sturm_count(diag, off, 0.0) == 0:
            raise NoBoundState(f"no eigenvalue below 0 for {U} on this grid")

    raw_energy, psi, residual = _solve_raw(Ufun, grid)
    psi = _clean_sign(psi, grid)
    if residual > RESIDUAL_RTOL * np.max(psi):
        raise NotConverged(f"eigen-residual {residual:.3e} exceeds tolerance")
    if isinstance(U, SquareWellPotential) and raw_energy >= 0:
        raise NoBoundState("lowest eigenvalue is not negative")
    if isinstance(U, (PolynomialPotential, OscillatorParams)):
        edge_u = min(float(Ufun(grid.x_min)), float(Ufun(grid.x_max)))
        if edge_u <= raw_energy + EDGE_MARGIN:
            raise GridTooNarrow(
                f"U at the grid edge ({edge_u:.4g}) is within {EDGE_MARGIN} of E={raw_energy:.4g}"
            )
    p = psi**2
    if max(p[1], p[-2]) > TAIL_RATIO * p.max():
        raise GridTooNarrow(f"edge density is {max(p[1], p[-2]) / p.max():.2e} of peak")

    if not richardson:
        return GroundState(raw_energy, AmplitudeOnGrid(grid, psi), residual, raw_energy, False)

    fine = grid.refined()
    e_fine, psi_fine, _ = _solve_raw(Ufun, fine)
    psi_fine = _clean_sign(psi_fine, fine)
    energy = (4.0 * e_fine - raw_energy) / 3.0
    psi_x = np.maximum((4.0 * psi_fine[::2] - psi) / 3.0, 0.0)
    psi_x /= math.sqrt(trapezoid(psi_x**2, grid))
    return GroundState(energy, AmplitudeOnGrid(grid, psi_x), residual, raw_energy, True)


def default_grid(U, n_points: int = 2001) -> Grid:
    """Default solve grid.

    Harmonic-type potentials use [-10/sqrt(w), 10/sqrt(w)]. Square wells use a
    grid with +-a on nodes, at least 10 steps across the well and 25 decay
    lengths of tail.
    """
    if isinstance(U, OscillatorParams):
        return Grid.symmetric(10.0 / math.sqrt(U.omega), n_points)
    if isinstance(U, PolynomialPotential):
        if U.lam(2) < 0:
            return Grid.symmetric(10.0 / math.sqrt(omega_from_lambda2(U.lam(2))), n_points)
        L = 1.0
        umin = float(np.min(U(np.linspace(-L, L, 201))))
        while min(float(U(L)), float(U(-L))) - umin < 50.0:
            L *= 1.5
            umin = min(umin, float(np.min(U(np.linspace(-L, L, 201)))))
        return Grid.symmetric(L, n_points)
    if isinstance(U, SquareWellPotential):
        return square_well_grid(U)
    raise DataError(f"no default grid for {U!r}")


def square_well_grid(w: SquareWellPotential, steps_per_side: int | None = None,
                     tail_decay_lengths: float = 25.0) -> Grid:
    """Symmetric grid with the walls at +-a exactly on nodes."""
    binding = square_well_ground_energy(w)
    k = math.sqrt(2.0 * (w.depth - binding))
    kappa = math.sqrt(2.0 * binding)
    a = w.half_width
    L_target = a + tail_decay_lengths / (2.0 * kappa)
    if steps_per_side is None:
        h_target = min(a / 10.0, 0.05 / max(k, 1e-300), 0.05 / kappa)
        m_a = max(10, math.ceil(a / h_target))
        h = a / m_a
        m = m_a + math.ceil((L_target - a) / h)
    else:
        m = int(steps_per_side)
        h = L_target / m
        m_a = max(1, round(a / h))
        h = a / m_a
        m = max(m, m_a + 1)
    return Grid.symmetric(m * h, 2 * m + 1)


# --- closed forms ------------------------------------------------------------

def square_well_ground_energy(w: SquareWellPotential, tol: float = 1e-12) -> float:
    """Binding energy |E| of the even ground state of a square well.

    Solves k tan(k a) = kappa with k = sqrt(2(depth - |E|)), kappa = sqrt(2|E|)
    by bisection on |E|. The ground state has k a in (0, pi/2), which fixes the
    bracket; the matching function is written as k sin(ka) - kappa cos(ka) so
    nothing blows up at the bracket ends. Returns a positive number; the
    energy itself is ``-square_well_ground_energy(w)``.
    """
    lam, a = w.depth, w.half_width

    def f(b):
        k = math.sqrt(2.0 * (lam - b))
        kappa = math.sqrt(2.0 * b)
        return k * math.sin(k * a) - kappa * math.cos(k * a)

    lo = max(0.0, lam - math.pi**2 / (8.0 * a * a))
    hi = lam
    # f decreases in |E|: f(lo) >= 0 >= f(hi)
    while hi - lo > tol * hi:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if f(mid) > 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def square_well_wavenumbers(w: SquareWellPotential) -> tuple[float, float, float]:
    """(|E|, k, kappa) of the ground state."""
    b = square_well_ground_energy(w)
    return b, math.sqrt(2.0 * (w.depth - b)), math.sqrt(2.0 * b)


def square_well_pdf(w: SquareWellPotential, x):
    """Normalized ground-state density evaluated at arbitrary points."""
    _, k, kappa = square_well_wavenumbers(w)
    return _well_pdf(w.half_width, k, kappa, x)


def _well_pdf(a: float, k: float, kappa: float, x):
    x = np.abs(np.asarray(x, dtype=float))
    cka = math.cos(k * a)
    norm = a + math.sin(2.0 * k * a) / (2.0 * k) + cka * cka / kappa
    inside = np.cos(k * np.minimum(x, a)) ** 2
    outside = cka * cka * np.exp(-2.0 * kappa * (x - a))
    return np.where(x <= a, inside, outside) / norm


def square_well_density(w: SquareWellPotential, grid: Grid) -> DensityOnGrid:
    """cos(k x) inside, B exp(-kappa |x|) outside, matched at |x| = a, unit mass on the line."""
    return DensityOnGrid(grid, square_well_pdf(w, grid.nodes))


@dataclass(frozen=True)
class DeltaGroundState:
    """Bound state of U = -strength * delta(x): psi = sqrt(s) exp(-s |x|), E = -s^2/2."""

    strength: float

    @property
    def energy(self) -> float:
        return -0.5 * self.strength**2

    @property
    def std(self) -> float:
        return 1.0 / (2.0 * math.sqrt(-self.energy))

    def amplitude(self, x):
        s = self.strength
        return math.sqrt(s) * np.exp(-s * np.abs(np.asarray(x, dtype=float)))

    def density(self, x):
        s = self.strength
        return s * np.exp(-2.0 * s * np.abs(np.asarray(x, dtype=float)))

    def on_grid(self, grid: Grid) -> AmplitudeOnGrid:
        return AmplitudeOnGrid(grid, self.amplitude(grid.nodes))


def delta_ground_state(dp: DeltaPotential) -> DeltaGroundState:
    """The derivative jump psi'(0+) - psi'(0-) = -2 s psi(0) forces decay rate kappa = s."""
    return DeltaGroundState(dp.strength)
