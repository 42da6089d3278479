"""Log returns, histograms and per-sample maximum-likelihood fits.

Gaussian and Laplace have closed-form MLEs. The anharmonic (C8) and
square-well families are fitted with bounded Nelder-Mead on the exact
per-sample negative log-likelihood, in transformed coordinates where the
simplex diameter tolerance is a relative one:

* anharmonic:  (log omega, eps1/omega, eps2/omega), |eps/omega| <= 0.3
* square well: (log a, log s) with s = 2 a depth, the integrated well strength

Symmetric families are fitted to de-meaned data and report the removed mean.
The anharmonic family carries its own first moment through eps1, so its data
are used as given.
"""

from __future__ import annotations

import logging
import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from . import grid as gridmod
from .errors import (
    ClampMassExceeded,
    DataError,
    DegenerateData,
    FisherQMError,
    InsufficientData,
    NonPositivePrice,
    NotConverged,
    PerturbationWarning,
)
from .models import (
    CLAMP_MASS_LIMIT,
    PERTURBATION_LIMIT,
    GaussianModel,
    LaplaceModel,
    PerturbedOscillatorModel,
    SquareWellModel,
)
from .potentials import OscillatorParams

log = logging.getLogger(__name__)

MIN_CLOSED_FORM = 30
MIN_ITERATIVE = 500
MAX_EVALUATIONS = 10_000
XTOL = 1e-8
FAMILIES = ("gaussian", "laplace", "anharmonic", "square_well")


@dataclass(frozen=True)
class ReturnSeries:
    values: np.ndarray = field(repr=False)
    interval_label: str = ""
    source: str = ""

    def __post_init__(self):
        v = np.array(self.values, dtype=float).ravel()
        if not np.all(np.isfinite(v)):
            raise DataError("return series contains non-finite values")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    def __len__(self):
        return self.values.size

    def scaled(self, c: float) -> "ReturnSeries":
        return ReturnSeries(c * self.values, self.interval_label, self.source)


def log_returns(prices, interval_label: str = "", source: str = "") -> ReturnSeries:
    p = np.asarray(prices, dtype=float).ravel()
    if p.size < 2:
        raise DataError("need at least two prices")
    if not np.all(np.isfinite(p)) or np.any(p <= 0):
        raise NonPositivePrice("prices must be finite and strictly positive")
    return ReturnSeries(np.log(p[1:] / p[:-1]), interval_label, source)


@dataclass(frozen=True)
class Histogram:
    bin_edges: np.ndarray
    densities: np.ndarray
    count: int

    @property
    def centers(self) -> np.ndarray:
        return 0.5 * (self.bin_edges[1:] + self.bin_edges[:-1])


def histogram(r: ReturnSeries, min_bins: int = 32, max_bins: int = 512) -> Histogram:
    """Freedman-Diaconis binning clipped to [min_bins, max_bins]; for reporting only."""
    x = r.values
    if x.size < 2:
        raise InsufficientData("need at least two returns for a histogram")
    n_fd = len(np.histogram_bin_edges(x, bins="fd")) - 1
    bins = int(np.clip(n_fd, min_bins, max_bins))
    counts, edges = np.histogram(x, bins=bins)
    dens = counts / (counts.sum() * np.diff(edges))
    return Histogram(edges, dens, int(x.size))


@dataclass
class FitReport:
    model: str
    params: dict
    nll: float
    aic: float
    bic: float
    ks_stat: float
    fisher_info: float
    variance: float
    cramer_rao_product: float
    n: int
    n_params: int
    mean_removed: float = 0.0
    std_errors: dict = field(default_factory=dict)
    evaluations: int = 0
    seed: int | None = None
    warnings: list = field(default_factory=list)

    def to_dict(self) -> dict:
        d = {
            "model": self.model,
            "params": dict(self.params),
            "nll": self.nll,
            "aic": self.aic,
            "bic": self.bic,
            "ks_stat": self.ks_stat,
            "fisher_info": self.fisher_info,
            "variance": self.variance,
            "cramer_rao_product": self.cramer_rao_product,
            "n": self.n,
            "n_params": self.n_params,
            "mean_removed": self.mean_removed,
            "std_errors": dict(self.std_errors),
            "evaluations": self.evaluations,
        }
        if self.seed is not None:
            d["seed"] = self.seed
        d["warnings"] = list(self.warnings)
        return d


def ks_statistic(x, cdf) -> float:
    xs = np.sort(np.asarray(x, dtype=float))
    n = xs.size
    F = cdf(xs)
    i = np.arange(1, n + 1)
    return float(max(np.max(i / n - F), np.max(F - (i - 1) / n)))


def _require(r: ReturnSeries, n_min: int, family: str):
    if len(r) < n_min:
        raise InsufficientData(f"{family} fit needs at least {n_min} returns, got {len(r)}")


def _report(model, x, nll, mean_removed, seed, notes, std_errors=None, evaluations=0) -> FitReport:
    n = x.size
    k = model.n_params
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        d = gridmod.normalize(model.density_on_grid())
        var = gridmod.variance(d)
        fi = gridmod.fisher_information(gridmod.amplitude_from_density(d))
    notes = list(notes) + [str(w.message) for w in caught]
    crp = var * fi
    if crp < 1 - 1e-3:
        notes.append(f"Cramer-Rao product {crp:.6f} below 1: density grid too coarse")
    params = model.params()
    return FitReport(
        model=model.family,
        params=params,
        nll=float(nll),
        aic=2.0 * k + 2.0 * float(nll),
        bic=k * math.log(n) + 2.0 * float(nll),
        ks_stat=ks_statistic(x, model.cdf),
        fisher_info=fi,
        variance=var,
        cramer_rao_product=crp,
        n=n,
        n_params=k,
        mean_removed=float(mean_removed),
        std_errors=dict(std_errors or {}),
        evaluations=evaluations,
        seed=seed,
        warnings=notes,
    )


# --- closed-form families ----------------------------------------------------------

def gaussian_mle(x) -> float:
    m2 = float(np.mean(np.square(x)))
    if not m2 > 0:
        raise DegenerateData("all returns are identical; variance is zero")
    return 1.0 / (2.0 * m2)


def laplace_mle(x) -> float:
    m1 = float(np.mean(np.abs(x)))
    if not m1 > 0:
        raise DegenerateData("all returns are identical; mean absolute deviation is zero")
    return 1.0 / (2.0 * m1)


def fit_gaussian(r: ReturnSeries, seed: int | None = None) -> FitReport:
    _require(r, MIN_CLOSED_FORM, "gaussian")
    mu = float(np.mean(r.values))
    x = r.values - mu
    w = gaussian_mle(x)
    model = GaussianModel(w)
    nll = -float(np.sum(model.logpdf(x)))
    se = {"omega": w * math.sqrt(2.0 / x.size)}
    return _report(model, x, nll, mu, seed, [], se)


def fit_laplace(r: ReturnSeries, seed: int | None = None) -> FitReport:
    _require(r, MIN_CLOSED_FORM, "laplace")
    mu = float(np.mean(r.values))
    x = r.values - mu
    lam = laplace_mle(x)
    model = LaplaceModel(lam)
    nll = -float(np.sum(model.logpdf(x)))
    se = {"lambda": lam / math.sqrt(x.size)}
    return _report(model, x, nll, mu, seed, [], se)


# --- derivative-free machinery -----------------------------------------------------

@dataclass
class SimplexResult:
    x: np.ndarray
    fun: float
    nfev: int


def nelder_mead(objective, x0, steps, bounds, xtol: float = XTOL, max_evaluations: int = MAX_EVALUATIONS) -> SimplexResult:
    """Bounded Nelder-Mead from an axis-aligned start simplex.

    Converges when every vertex is within ``xtol`` of the best one in every
    coordinate (coordinates are chosen so this is a relative tolerance) and
    the objective spread is at round-off level.
    """
    x0 = np.asarray(x0, dtype=float)
    f0 = objective(x0)
    if not np.isfinite(f0):
        raise DataError("objective is not finite at the starting point")
    simplex = np.vstack([x0] + [x0 + s * e for s, e in zip(steps, np.eye(x0.size))])
    lo = np.array([b[0] for b in bounds])
    hi = np.array([b[1] for b in bounds])
    simplex = np.clip(simplex, lo, hi)
    res = minimize(
        objective,
        x0,
        method="Nelder-Mead",
        bounds=list(bounds),
        options={
            "initial_simplex": simplex,
            "xatol": xtol,
            "fatol": 1e-12 * max(1.0, abs(f0)),
            "maxfev": max_evaluations,
            "maxiter": max_evaluations,
        },
    )
    if not res.success:
        raise NotConverged(f"Nelder-Mead stopped after {res.nfev} evaluations: {res.message}")
    return SimplexResult(np.asarray(res.x), float(res.fun), int(res.nfev))


def _hessian(f, x, rel_step: float = 1e-4) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    n = x.size
    h = rel_step * np.maximum(np.abs(x), 1e-2)
    Hm = np.zeros((n, n))
    f0 = f(x)
    for i in range(n):
        ei = np.zeros(n)
        ei[i] = h[i]
        Hm[i, i] = (f(x + ei) - 2 * f0 + f(x - ei)) / h[i] ** 2
        for j in range(i + 1, n):
            ej = np.zeros(n)
            ej[j] = h[j]
            Hm[i, j] = Hm[j, i] = (
                f(x + ei + ej) - f(x + ei - ej) - f(x - ei + ej) + f(x - ei - ej)
            ) / (4 * h[i] * h[j])
    return Hm


def _std_errors(nll, theta, names) -> tuple[dict, list]:
    try:
        Hm = _hessian(nll, theta)
        cov = np.linalg.inv(Hm)
        var = np.diag(cov)
        if np.all(np.isfinite(var)) and np.all(var > 0):
            return {k: float(math.sqrt(v)) for k, v in zip(names, var)}, []
    except (np.linalg.LinAlgError, FisherQMError):
        pass
    return {}, ["standard errors unavailable: observed information is not positive definite"]


# --- anharmonic ---------------------------------------------------------------------

_T2_FLOOR = 1e-9


def fit_anharmonic(r: ReturnSeries, source: str = "oracle", start: OscillatorParams | None = None,
                   seed: int | None = None) -> FitReport:
    """Maximum-likelihood (omega, eps1, eps2) for the C8 density."""
    _require(r, MIN_ITERATIVE, "anharmonic")
    x = r.values
    if start is None:
        start = OscillatorParams(gaussian_mle(x), 0.0, 0.0)
    if start.eps2 < 0:
        raise DataError(f"start eps2 must be >= 0 (confinement), got {start.eps2}")
    lim = PERTURBATION_LIMIT

    def model_at(u):
        w = math.exp(u[0])
        return PerturbedOscillatorModel(OscillatorParams(w, u[1] * w, u[2] * w), source)

    def objective(u):
        try:
            m = model_at(u)
            if m.clamped_mass > CLAMP_MASS_LIMIT:
                return np.inf
            val = -float(np.sum(m.logpdf(x)))
        except FisherQMError:
            return np.inf
        return val if np.isfinite(val) else np.inf

    u0 = np.array([math.log(start.omega), start.eps1 / start.omega, max(start.eps2 / start.omega, _T2_FLOOR)])
    bounds = [(u0[0] - 5.0, u0[0] + 5.0), (-lim, lim), (_T2_FLOOR, lim)]
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", PerturbationWarning)
        res = nelder_mead(objective, u0, steps=(0.1, 0.02, 0.02), bounds=bounds)
        model = model_at(res.x)
        model.check_clamp()
        p = model.oscillator

        def nll_natural(theta):
            try:
                m = PerturbedOscillatorModel(OscillatorParams(*theta), source)
                return -float(np.sum(m.logpdf(x)))
            except FisherQMError:
                return np.inf

        se, notes = _std_errors(nll_natural, np.array([p.omega, p.eps1, p.eps2]), ("omega", "eps1", "eps2"))
    r1, r2 = p.smallness
    if max(r1, r2) > 0.1:
        notes.append(f"|eps|/omega = {max(r1, r2):.3g} > 0.1: first-order accuracy is doubtful")
    if res.x[2] <= _T2_FLOOR * (1 + 1e-6):
        notes.append("eps2 sits on its lower bound (no quartic excess detected)")
    if model.clamped_mass > 0:
        notes.append(f"clamped mass {model.clamped_mass:.3e}")
    return _report(model, x, res.fun, 0.0, seed, notes, se, res.nfev)


# --- square well --------------------------------------------------------------------

def square_well_nll(x, half_width: float, depth: float) -> float:
    return -float(np.sum(np.log(SquareWellModel(half_width, depth).pdf(x))))


def fit_square_well(r: ReturnSeries, seed: int | None = None) -> FitReport:
    """Maximum-likelihood (a, depth); the report carries fineness = a^2 depth."""
    _require(r, MIN_ITERATIVE, "square_well")
    mu = float(np.mean(r.values))
    x = r.values - mu
    sigma = float(np.std(x))
    if not sigma > 0:
        raise DegenerateData("all returns are identical")
    s0 = laplace_mle(x)  # delta-well strength matching the Laplace decay rate

    def unpack(u):
        a = math.exp(u[0])
        return a, math.exp(u[1]) / (2.0 * a)

    def objective(u):
        try:
            return square_well_nll(x, *unpack(u))
        except FisherQMError:
            return np.inf

    bounds = [(math.log(1e-4 * sigma), math.log(20.0 * sigma)), (math.log(s0 / 100.0), math.log(100.0 * s0))]
    starts = [np.array([math.log(f * sigma), math.log(g * s0)]) for f in (0.1, 0.5, 1.0) for g in (1.0, 2.0)]
    u0 = min(starts, key=objective)
    res = nelder_mead(objective, u0, steps=(0.5, 0.2), bounds=bounds)
    a, depth = unpack(res.x)
    model = SquareWellModel(a, depth)
    notes = []
    if res.x[0] <= bounds[0][0] + 1e-6:
        notes.append("half-width at its lower bound: the fit prefers the delta (Laplace) limit")
    se, more = _std_errors(lambda th: square_well_nll(x, th[0], th[1]) if min(th) > 0 else np.inf,
                           np.array([a, depth]), ("half_width", "depth"))
    notes += more
    return _report(model, x, res.fun, mu, seed, notes, se, res.nfev)


# --- comparison ---------------------------------------------------------------------

_FITTERS = {
    "gaussian": fit_gaussian,
    "laplace": fit_laplace,
    "anharmonic": fit_anharmonic,
    "square_well": fit_square_well,
}


def fit(r: ReturnSeries, family: str, seed: int | None = None, **kw) -> FitReport:
    if family not in _FITTERS:
        raise DataError(f"unknown model family {family!r}; choose from {FAMILIES}")
    return _FITTERS[family](r, seed=seed, **kw)


@dataclass
class Comparison:
    """Fit reports ranked by AIC (ties: fewer parameters first) plus per-family failures."""

    ranked: list
    failures: dict = field(default_factory=dict)

    def __iter__(self):
        return iter(self.ranked)

    def __len__(self):
        return len(self.ranked)

    def __getitem__(self, i):
        return self.ranked[i]

    def to_dict(self) -> dict:
        return {
            "ranking": [rep.model for rep in self.ranked],
            "reports": [rep.to_dict() for rep in self.ranked],
            "failures": dict(self.failures),
        }


def compare_models(r: ReturnSeries, families, seed: int | None = None, max_workers: int = 1,
                   source: str = "oracle") -> Comparison:
    families = list(dict.fromkeys(families))
    if len(families) < 2:
        raise DataError("compare_models needs at least two families")
    for f in families:
        if f not in _FITTERS:
            raise DataError(f"unknown model family {f!r}; choose from {FAMILIES}")

    def run(family):
        kw = {"source": source} if family == "anharmonic" else {}
        try:
            return family, fit(r, family, seed=seed, **kw), None
        except FisherQMError as exc:
            log.info("%s fit failed: %s", family, exc)
            return family, None, f"{type(exc).__name__}: {exc}"

    if max_workers > 1:
        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            results = list(pool.map(run, families))
    else:
        results = [run(f) for f in families]
    reports = [rep for _, rep, _ in results if rep is not None]
    failures = {fam: msg for fam, _, msg in results if msg is not None}
    reports.sort(key=lambda rep: (rep.aic, rep.n_params))
    for rep in reports:
        rep.warnings.extend(f"{fam} fit failed: {msg}" for fam, msg in failures.items())
    return Comparison(reports, failures)
