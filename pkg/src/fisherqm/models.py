"""Closed-form return densities and the first-order anharmonic ground state.

Families (all zero-centred):

* ``GaussianModel``    p = sqrt(w/pi) exp(-w x^2), variance 1/(2w)
* ``PerturbedOscillatorModel``  Gaussian times a squared quartic bracket (a
  degree-8 polynomial), from first-order perturbation theory in eps1, eps2
* ``SquareWellModel``  ground state of a finite square well
* ``LaplaceModel``     p = lam exp(-2 lam |x|), variance 1/(2 lam^2)

The anharmonic bracket exists in two versions. ``source="paper"`` is the
printed closed form, evaluated literally. ``source="oracle"`` is rebuilt from
the perturbation sum over Hermite functions with ladder-operator matrix
elements; it is the one checked against the grid eigensolver and the default
for fitting. :func:`bracket_divergence` reports how far apart they are.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from numpy.polynomial import hermite as H
from numpy.polynomial import polynomial as P

from .eigensolver import square_well_wavenumbers, _well_pdf
from .errors import ClampMassExceeded, DataError, DomainError, PerturbationInvalid
from .grid import AmplitudeOnGrid, DensityOnGrid, Grid
from .potentials import OscillatorParams, SquareWellPotential

PERTURBATION_LIMIT = 0.3
CLAMP_MASS_LIMIT = 1e-3
MODEL_GRID_POINTS = 20001
SOURCES = ("paper", "oracle")


# --- harmonic oscillator basis ------------------------------------------------

def hermite_polynomial(n: int, xi):
    """Physicists' H_n via H_{n+1} = 2 xi H_n - 2 n H_{n-1}."""
    xi = np.asarray(xi, dtype=float)
    h_prev, h = np.ones_like(xi), 2.0 * xi
    if n == 0:
        return h_prev
    for k in range(1, n):
        h_prev, h = h, 2.0 * xi * h - 2.0 * k * h_prev
    return h


def hermite_eigenfunction(n: int, omega: float, x):
    """Normalized oscillator eigenfunction psi_n for frequency ``omega`` (0 <= n <= 10)."""
    if not 0 <= n <= 10:
        raise DataError("hermite_eigenfunction supports 0 <= n <= 10")
    if omega <= 0:
        raise DataError("omega must be positive")
    x = np.asarray(x, dtype=float)
    xi = math.sqrt(omega) * x
    norm = math.sqrt(math.sqrt(omega / math.pi) / (2.0**n * math.factorial(n)))
    return norm * hermite_polynomial(n, xi) * np.exp(-0.5 * xi * xi)


def position_matrix(size: int, omega: float) -> np.ndarray:
    """x = (a + a^dagger)/sqrt(2 omega) in the first ``size`` number states."""
    sub = np.sqrt(np.arange(1, size))
    X = np.diag(sub, 1) + np.diag(sub, -1)
    return X / math.sqrt(2.0 * omega)


def matrix_element(m: int, power: int, omega: float) -> float:
    """<m| x^power |0> for the oscillator of frequency ``omega``."""
    size = m + power + 1
    X = position_matrix(size, omega)
    col = np.zeros(size)
    col[0] = 1.0
    for _ in range(power):
        col = X @ col
    return float(col[m])


def perturbation_coefficients(p: OscillatorParams, n_max: int = 4) -> np.ndarray:
    """Mixing coefficients c_m = -<m|V|0> / (m w), m = 0..n_max, with c_0 = 0.

    V = eps1 (sqrt(w) x)^3 + eps2 (sqrt(w) x)^4 and E_m - E_0 = m w.
    """
    _check_perturbation(p)
    if n_max < 4:
        raise DataError("n_max must be at least 4 to hold the x^3 and x^4 couplings")
    w = p.omega
    c = np.zeros(n_max + 1)
    for m in range(1, n_max + 1):
        v = p.eps1 * w**1.5 * matrix_element(m, 3, w) + p.eps2 * w * w * matrix_element(m, 4, w)
        c[m] = -v / (m * w)
    return c


def _check_perturbation(p: OscillatorParams):
    r1, r2 = p.smallness
    if max(r1, r2) > PERTURBATION_LIMIT:
        raise PerturbationInvalid(
            f"|eps1|/omega={r1:.3g}, |eps2|/omega={r2:.3g} exceed {PERTURBATION_LIMIT}"
        )


def perturbation_first_order(p: OscillatorParams, n_max: int = 4, grid: Grid | None = None) -> AmplitudeOnGrid:
    """psi_0 + sum_m c_m psi_m on a grid (not renormalized; norm^2 = 1 + sum c_m^2)."""
    c = perturbation_coefficients(p, n_max)
    if grid is None:
        grid = oscillator_grid(p.omega)
    x = grid.nodes
    psi = hermite_eigenfunction(0, p.omega, x)
    for m in range(1, n_max + 1):
        if c[m] != 0.0:
            psi = psi + c[m] * hermite_eigenfunction(m, p.omega, x)
    return AmplitudeOnGrid(grid, psi)


def oscillator_grid(omega: float, n_points: int = MODEL_GRID_POINTS) -> Grid:
    return Grid.symmetric(12.0 / math.sqrt(omega), n_points)


# --- brackets -----------------------------------------------------------------

def oracle_bracket(p: OscillatorParams) -> np.ndarray:
    """Coefficients b_0..b_4 (ascending powers of x) of 1 + sum_m c_m psi_m / psi_0."""
    c = perturbation_coefficients(p, 4)
    # psi_m / psi_0 = H_m(xi) / sqrt(2^m m!)
    herm = np.array([c[m] / math.sqrt(2.0**m * math.factorial(m)) for m in range(5)])
    herm[0] = 1.0
    in_xi = np.zeros(5)
    poly = H.herm2poly(herm)
    in_xi[: poly.size] = poly
    return in_xi * math.sqrt(p.omega) ** np.arange(5)


def paper_bracket(p: OscillatorParams) -> np.ndarray:
    """Printed bracket, verbatim:
    1 - (15/16) eps2/w - (2 eps1/sqrt w) x + (9/4) eps2 x^2 + (sqrt(w) eps1/3) x^3 - (w eps2/4) x^4.
    """
    w, e1, e2 = p.omega, p.eps1, p.eps2
    sw = math.sqrt(w)
    return np.array([1.0 - 15.0 / 16.0 * e2 / w, -2.0 * e1 / sw, 9.0 / 4.0 * e2, sw * e1 / 3.0, -w * e2 / 4.0])


def bracket(p: OscillatorParams, source: str = "oracle") -> np.ndarray:
    if source == "oracle":
        return oracle_bracket(p)
    if source == "paper":
        _check_perturbation(p)
        return paper_bracket(p)
    raise DataError(f"source must be one of {SOURCES}, got {source!r}")


def perturbed_amplitude_paper(p: OscillatorParams, x):
    """Printed first-order ground-state amplitude evaluated literally."""
    x = np.asarray(x, dtype=float)
    return hermite_eigenfunction(0, p.omega, x) * P.polyval(x, paper_bracket(p))


def perturbed_amplitude_oracle(p: OscillatorParams, x):
    x = np.asarray(x, dtype=float)
    return hermite_eigenfunction(0, p.omega, x) * P.polyval(x, oracle_bracket(p))


_BRACKET_TERMS = ("1", "x", "x^2", "x^3", "x^4")


def bracket_divergence(p: OscillatorParams) -> dict:
    """Term-by-term comparison of the printed and the recomputed bracket."""
    bp, bo = paper_bracket(p), oracle_bracket(p)
    terms = {
        t: {"paper": float(a), "oracle": float(b), "difference": float(a - b)}
        for t, a, b in zip(_BRACKET_TERMS, bp, bo)
    }
    grid = oscillator_grid(p.omega)
    x = grid.nodes
    gauss = math.sqrt(p.omega / math.pi) * np.exp(-p.omega * x * x)
    dp = gauss * P.polyval(x, bp) ** 2
    do = gauss * P.polyval(x, bo) ** 2
    dp /= np.trapezoid(dp, dx=grid.spacing)
    do /= np.trapezoid(do, dx=grid.spacing)
    return {
        "params": {"omega": p.omega, "eps1": p.eps1, "eps2": p.eps2},
        "coefficients": terms,
        "max_coefficient_difference": float(np.max(np.abs(bp - bo))),
        "density_sup_difference": float(np.max(np.abs(dp - do))),
        "agree": bool(np.allclose(bp, bo, rtol=0, atol=1e-14)),
    }


# --- model families -----------------------------------------------------------

class _Model:
    family: str = ""
    n_params: int = 0

    def pdf(self, x):
        raise NotImplementedError

    def logpdf(self, x):
        with np.errstate(divide="ignore"):
            return np.log(self.pdf(x))

    def default_grid(self) -> Grid:
        raise NotImplementedError

    def density_on_grid(self, grid: Grid | None = None) -> DensityOnGrid:
        grid = grid or self.default_grid()
        return DensityOnGrid(grid, self.pdf(grid.nodes))

    def cdf(self, x):
        """CDF by cumulative trapezoid integration of the density on the default grid."""
        grid = self.default_grid()
        xs = grid.nodes
        f = self.pdf(xs)
        cum = np.concatenate(([0.0], np.cumsum(0.5 * (f[1:] + f[:-1]) * grid.spacing)))
        cum /= cum[-1]
        return np.interp(x, xs, cum, left=0.0, right=1.0)

    def params(self) -> dict:
        raise NotImplementedError

    def to_json(self) -> dict:
        return {"type": self.family, **self.params()}


@dataclass(frozen=True)
class GaussianModel(_Model):
    omega: float
    family = "gaussian"
    n_params = 1

    def __post_init__(self):
        if not (math.isfinite(self.omega) and self.omega > 0):
            raise DataError(f"omega must be positive, got {self.omega}")

    @property
    def variance(self) -> float:
        return 1.0 / (2.0 * self.omega)

    @property
    def fisher_information(self) -> float:
        return 2.0 * self.omega

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        return math.sqrt(self.omega / math.pi) * np.exp(-self.omega * x * x)

    def logpdf(self, x):
        x = np.asarray(x, dtype=float)
        return 0.5 * math.log(self.omega / math.pi) - self.omega * x * x

    def default_grid(self) -> Grid:
        return oscillator_grid(self.omega)

    def params(self) -> dict:
        return {"omega": self.omega}


def gaussian_density(m: GaussianModel, x):
    return m.pdf(x)


@dataclass(frozen=True)
class LaplaceModel(_Model):
    lam: float
    family = "laplace"
    n_params = 1

    def __post_init__(self):
        if not (math.isfinite(self.lam) and self.lam > 0):
            raise DataError(f"lambda must be positive, got {self.lam}")

    @property
    def variance(self) -> float:
        return 1.0 / (2.0 * self.lam**2)

    @property
    def fisher_information(self) -> float:
        return 4.0 * self.lam**2

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        return self.lam * np.exp(-2.0 * self.lam * np.abs(x))

    def logpdf(self, x):
        x = np.asarray(x, dtype=float)
        return math.log(self.lam) - 2.0 * self.lam * np.abs(x)

    def default_grid(self) -> Grid:
        return Grid.symmetric(12.0 / self.lam, MODEL_GRID_POINTS)

    def params(self) -> dict:
        return {"lambda": self.lam}


def laplace_density(m: LaplaceModel, x):
    return m.pdf(x)


def price_return_density(m: LaplaceModel, y, paper_form: bool = False):
    """Density of the gross return y = e^x when x is Laplace-distributed.

    The change of variables gives p_x(ln y)/y, i.e. lam y^-(2 lam + 1) for
    y >= 1 and lam y^(2 lam - 1) below 1. ``paper_form=True`` returns the
    printed lam/|y|^(2 lam), which lacks the 1/y Jacobian and is not a
    normalized density; it is kept only for comparison.
    """
    y = np.asarray(y, dtype=float)
    if np.any(~(y > 0)):
        raise DomainError("price returns y = e^x must be strictly positive")
    if paper_form:
        return m.lam / np.abs(y) ** (2.0 * m.lam)
    return m.pdf(np.log(y)) / y


@dataclass(frozen=True)
class PerturbedOscillatorModel(_Model):
    """Gaussian times the squared first-order bracket, C8 density.

    Where the truncated bracket turns negative (far tails, or large eps) the
    amplitude would acquire a node. It is clamped to zero there; the density
    mass removed this way is ``clamped_mass`` and the rest is renormalized.
    """

    oscillator: OscillatorParams
    source: str = "oracle"
    n_grid: int = 4001
    family = "anharmonic"
    n_params = 3

    def __post_init__(self):
        if self.source not in SOURCES:
            raise DataError(f"source must be one of {SOURCES}, got {self.source!r}")
        _check_perturbation(self.oscillator)

    @cached_property
    def coefficients(self) -> np.ndarray:
        return bracket(self.oscillator, self.source)

    @cached_property
    def _mass(self) -> tuple[float, float]:
        w = self.oscillator.omega
        grid = Grid.symmetric(12.0 / math.sqrt(w), self.n_grid)
        x = grid.nodes
        gauss = math.sqrt(w / math.pi) * np.exp(-w * x * x)
        b = P.polyval(x, self.coefficients)
        full = np.trapezoid(gauss * b * b, dx=grid.spacing)
        kept = np.trapezoid(gauss * np.maximum(b, 0.0) ** 2, dx=grid.spacing)
        return kept, full

    @property
    def normalization(self) -> float:
        return self._mass[0]

    @property
    def clamped_mass(self) -> float:
        kept, full = self._mass
        return (full - kept) / full

    def check_clamp(self):
        if self.clamped_mass > CLAMP_MASS_LIMIT:
            raise ClampMassExceeded(
                f"clamping removed {self.clamped_mass:.3e} of the mass (limit {CLAMP_MASS_LIMIT})"
            )

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        w = self.oscillator.omega
        b = np.maximum(P.polyval(x, self.coefficients), 0.0)
        return math.sqrt(w / math.pi) * np.exp(-w * x * x) * b * b / self.normalization

    def logpdf(self, x):
        x = np.asarray(x, dtype=float)
        w = self.oscillator.omega
        b = P.polyval(x, self.coefficients)
        with np.errstate(divide="ignore", invalid="ignore"):
            logb = np.where(b > 0, np.log(np.abs(b)), -np.inf)
        return 0.5 * math.log(w / math.pi) - w * x * x + 2.0 * logb - math.log(self.normalization)

    def default_grid(self) -> Grid:
        return oscillator_grid(self.oscillator.omega)

    def params(self) -> dict:
        p = self.oscillator
        return {"omega": p.omega, "eps1": p.eps1, "eps2": p.eps2, "source": self.source}

    def to_json(self) -> dict:
        return {"type": "oscillator", **self.params()}


def c8_density(p: OscillatorParams, x, source: str = "oracle"):
    """Normalized C8 density at ``x``; raises ClampMassExceeded past 1e-3 clamped mass."""
    m = PerturbedOscillatorModel(p, source)
    m.check_clamp()
    return m.pdf(x)


@dataclass(frozen=True)
class SquareWellModel(_Model):
    half_width: float
    depth: float
    family = "square_well"
    n_params = 2

    def __post_init__(self):
        SquareWellPotential(self.half_width, self.depth)

    @cached_property
    def potential(self) -> SquareWellPotential:
        return SquareWellPotential(self.half_width, self.depth)

    @cached_property
    def wavenumbers(self) -> tuple[float, float, float]:
        return square_well_wavenumbers(self.potential)

    @property
    def binding_energy(self) -> float:
        return self.wavenumbers[0]

    def pdf(self, x):
        _, k, kappa = self.wavenumbers
        return _well_pdf(self.half_width, k, kappa, x)

    def default_grid(self) -> Grid:
        _, _, kappa = self.wavenumbers
        return Grid.symmetric(self.half_width + 12.0 / kappa, MODEL_GRID_POINTS)

    def params(self) -> dict:
        return {
            "half_width": self.half_width,
            "depth": self.depth,
            "fineness": self.potential.fineness,
        }

    def to_json(self) -> dict:
        return {"type": "square_well", "half_width": self.half_width, "depth": self.depth}


def model_from_json(spec: dict) -> _Model:
    if not isinstance(spec, dict) or "type" not in spec:
        raise DataError("model spec must be an object with a 'type' field")
    kind = spec["type"]
    try:
        if kind == "gaussian":
            return GaussianModel(float(spec["omega"]))
        if kind == "laplace":
            return LaplaceModel(float(spec["lambda"]))
        if kind in ("oscillator", "anharmonic"):
            p = OscillatorParams(spec["omega"], spec.get("eps1", 0.0), spec.get("eps2", 0.0))
            return PerturbedOscillatorModel(p, spec.get("source", "oracle"))
        if kind == "square_well":
            return SquareWellModel(float(spec["half_width"]), float(spec["depth"]))
    except KeyError as exc:
        raise DataError(f"model spec of type {kind!r} is missing {exc}") from None
    raise DataError(f"unknown model type {kind!r}")
