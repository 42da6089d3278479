"""Information potentials and Lagrange-multiplier <-> model-parameter maps.

Conventions
-----------
Measured power moments <x^k> enter the extremal-information problem through
multipliers lambda_k, giving the potential

    U(x) = -(1/8) * sum_k lambda_k x^k.

The anharmonic oscillator is written with a frequency ``omega`` and two
couplings ``eps1`` (cubic) and ``eps2`` (quartic), all in energy units, so
``eps/omega`` is the dimensionless smallness parameter.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Union

import numpy as np

from .errors import DataError, NotConfining, PerturbationWarning, SignError

PERTURBATION_WARN = 0.1


@dataclass(frozen=True)
class PolynomialPotential:
    """U(x) = -(1/8) sum_{k>=1} lambdas[k-1] x^k."""

    lambdas: tuple

    def __post_init__(self):
        lam = tuple(float(v) for v in self.lambdas)
        if not lam or not all(math.isfinite(v) for v in lam):
            raise DataError("multipliers must be a non-empty list of finite reals")
        object.__setattr__(self, "lambdas", lam)
        nz = [k for k, v in enumerate(lam, start=1) if v != 0.0]
        if not nz:
            raise NotConfining("all multipliers are zero")
        top = nz[-1]
        if top % 2 or lam[top - 1] >= 0:
            raise NotConfining(
                f"highest retained multiplier lambda_{top}={lam[top - 1]} must be of even "
                "order and negative for U to confine"
            )

    @property
    def order(self) -> int:
        return len(self.lambdas)

    def lam(self, k: int) -> float:
        return self.lambdas[k - 1] if 1 <= k <= len(self.lambdas) else 0.0

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        # Horner on -(1/8) * sum lambda_k x^k
        acc = np.zeros_like(x)
        for c in reversed(self.lambdas):
            acc = (acc + c) * x
        return -0.125 * acc

    def is_even(self) -> bool:
        return all(v == 0.0 for k, v in enumerate(self.lambdas, start=1) if k % 2)


def potential_from_multipliers(lambdas) -> PolynomialPotential:
    return PolynomialPotential(tuple(lambdas))


def evaluate(p, x):
    return p(x)


@dataclass(frozen=True)
class OscillatorParams:
    omega: float
    eps1: float = 0.0
    eps2: float = 0.0

    def __post_init__(self):
        for name in ("omega", "eps1", "eps2"):
            v = float(getattr(self, name))
            if not math.isfinite(v):
                raise DataError(f"{name} must be finite")
            object.__setattr__(self, name, v)
        if self.omega <= 0:
            raise SignError(f"omega must be positive, got {self.omega}")
        r1, r2 = self.smallness
        if max(r1, r2) > PERTURBATION_WARN:
            warnings.warn(
                f"|eps1|/omega={r1:.3g}, |eps2|/omega={r2:.3g}: first-order "
                "perturbation theory is unreliable above 0.1",
                PerturbationWarning,
                stacklevel=3,
            )

    @property
    def smallness(self) -> tuple[float, float]:
        return abs(self.eps1) / self.omega, abs(self.eps2) / self.omega

    def potential(self, x):
        """omega^2 x^2 / 2 + eps1 (sqrt(omega) x)^3 + eps2 (sqrt(omega) x)^4."""
        x = np.asarray(x, dtype=float)
        xi = math.sqrt(self.omega) * x
        return 0.5 * self.omega**2 * x**2 + self.eps1 * xi**3 + self.eps2 * xi**4


@dataclass(frozen=True)
class SquareWellPotential:
    """U = -depth for |x| <= half_width, 0 outside."""

    half_width: float
    depth: float

    def __post_init__(self):
        a, lam = float(self.half_width), float(self.depth)
        if not (math.isfinite(a) and math.isfinite(lam)):
            raise DataError("square well parameters must be finite")
        if a <= 0 or lam <= 0:
            raise SignError(f"need half_width > 0 and depth > 0, got a={a}, depth={lam}")
        object.__setattr__(self, "half_width", a)
        object.__setattr__(self, "depth", lam)

    @property
    def fineness(self) -> float:
        """a^2 * depth; the well is 'fine' when this is << 1."""
        return self.half_width**2 * self.depth

    @property
    def strength(self) -> float:
        """Integrated depth 2*a*depth, the strength of the delta well it approximates."""
        return 2.0 * self.half_width * self.depth

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        ax = np.abs(x)
        u = np.where(ax < self.half_width, -self.depth, 0.0)
        # a node sitting on the wall takes the mean of both sides (keeps O(h^2))
        on_wall = np.abs(ax - self.half_width) <= 1e-12 * max(self.half_width, 1.0)
        return np.where(on_wall, -0.5 * self.depth, u)


@dataclass(frozen=True)
class DeltaPotential:
    """U = -strength * delta(x); never discretized."""

    strength: float

    def __post_init__(self):
        s = float(self.strength)
        if not math.isfinite(s) or s <= 0:
            raise SignError(f"delta strength must be positive, got {self.strength}")
        object.__setattr__(self, "strength", s)


Potential = Union[PolynomialPotential, SquareWellPotential, DeltaPotential, OscillatorParams]


def omega_from_lambda2(lambda2: float) -> float:
    if not lambda2 < 0:
        raise SignError(f"lambda_2 must be negative, got {lambda2}")
    return math.sqrt(-lambda2) / 2.0


def lambda2_from_omega(omega: float) -> float:
    if not omega > 0:
        raise SignError(f"omega must be positive, got {omega}")
    return -4.0 * omega * omega


def multipliers_from_oscillator(p: OscillatorParams) -> PolynomialPotential:
    """lambda_2 = -4 w^2, lambda_3 = -8 eps1 w^(3/2), lambda_4 = -8 eps2 w^2."""
    if p.eps2 < 0 or (p.eps2 == 0 and p.eps1 != 0):
        raise SignError(f"eps2 must be > 0 for a confining anharmonic potential, got {p.eps2}")
    w = p.omega
    return PolynomialPotential((0.0, lambda2_from_omega(w), -8.0 * p.eps1 * w**1.5, -8.0 * p.eps2 * w * w))


def oscillator_from_multipliers(pp: PolynomialPotential) -> OscillatorParams:
    if pp.order > 4 or pp.lam(1) != 0.0:
        raise DataError("only lambda_2..lambda_4 map onto oscillator parameters")
    w = omega_from_lambda2(pp.lam(2))
    return OscillatorParams(w, -pp.lam(3) / (8.0 * w**1.5), -pp.lam(4) / (8.0 * w * w))


def energy_from_epsilon(eps: float) -> float:
    """The normalization multiplier epsilon becomes the eigenvalue E = epsilon/8."""
    return eps / 8.0


def epsilon_from_energy(energy: float) -> float:
    return 8.0 * energy


def potential_from_json(spec: dict) -> Potential:
    """Build a potential from its JSON form; see README for the accepted shapes."""
    if not isinstance(spec, dict) or "type" not in spec:
        raise DataError("potential spec must be an object with a 'type' field")
    kind = spec["type"]
    try:
        if kind == "polynomial":
            return PolynomialPotential(tuple(spec["lambdas"]))
        if kind == "oscillator":
            return OscillatorParams(spec["omega"], spec.get("eps1", 0.0), spec.get("eps2", 0.0))
        if kind == "square_well":
            return SquareWellPotential(spec["half_width"], spec["depth"])
        if kind == "delta":
            return DeltaPotential(spec["strength"])
    except KeyError as exc:
        raise DataError(f"potential spec of type {kind!r} is missing {exc}") from None
    except TypeError as exc:
        raise DataError(f"bad potential spec: {exc}") from None
    raise DataError(f"unknown potential type {kind!r}")


def potential_to_json(p: Potential) -> dict:
    if isinstance(p, PolynomialPotential):
        return {"type": "polynomial", "lambdas": list(p.lambdas)}
    if isinstance(p, OscillatorParams):
        return {"type": "oscillator", "omega": p.omega, "eps1": p.eps1, "eps2": p.eps2}
    if isinstance(p, SquareWellPotential):
        return {"type": "square_well", "half_width": p.half_width, "depth": p.depth}
    if isinstance(p, DeltaPotential):
        return {"type": "delta", "strength": p.strength}
    raise TypeError(f"not a potential: {p!r}")
