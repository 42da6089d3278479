"""Extremal Fisher-information densities for financial log returns.

Moment constraints on a return density turn the Fisher-information extremum
into a Schrodinger-type ground-state problem. This package solves that
problem on a grid, evaluates the closed-form families it produces (Gaussian,
first-order anharmonic, square well, Laplace) and fits them to return data.
"""

from .errors import (
    ClampMassExceeded,
    DataError,
    DegenerateData,
    DomainError,
    FisherQMError,
    GridTooNarrow,
    InsufficientData,
    NegativeDensity,
    NoBoundState,
    NonPositivePrice,
    NonUniformGrid,
    NotConfining,
    NotConverged,
    NumericalError,
    PerturbationInvalid,
    SignError,
    ZeroMass,
)
from .grid import (
    AmplitudeOnGrid,
    DensityOnGrid,
    Grid,
    MomentSet,
    amplitude_from_density,
    cramer_rao_product,
    density_from_amplitude,
    fisher_information,
    moment,
    normalize,
    peak_height,
    variance,
)
from .potentials import (
    DeltaPotential,
    OscillatorParams,
    PolynomialPotential,
    SquareWellPotential,
    energy_from_epsilon,
    lambda2_from_omega,
    multipliers_from_oscillator,
    omega_from_lambda2,
    potential_from_multipliers,
)
from .eigensolver import (
    GroundState,
    delta_ground_state,
    ground_state,
    square_well_density,
    square_well_ground_energy,
)
from .models import (
    GaussianModel,
    LaplaceModel,
    PerturbedOscillatorModel,
    SquareWellModel,
    c8_density,
    gaussian_density,
    hermite_eigenfunction,
    laplace_density,
    perturbation_first_order,
    perturbed_amplitude_paper,
    price_return_density,
)
from .fitting import (
    FitReport,
    ReturnSeries,
    compare_models,
    fit_anharmonic,
    fit_gaussian,
    fit_laplace,
    fit_square_well,
    log_returns,
)

__version__ = "0.1.0"
