"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run alone with ``pytest tests/test_acceptance.py -v`` (the lines appear in the
"acceptance criteria" summary section) or ``python tests/test_acceptance.py``.
Criterion 6 writes ``artifacts/perturbation_divergence.json`` at the repo root.
"""

from __future__ import annotations

import json
import math
import os
import subprocess
import sys
import time
import warnings
from pathlib import Path

import numpy as np
import pytest
from scipy import integrate

from fisherqm import io
from fisherqm.cli import main as cli_main
from fisherqm.eigensolver import (
    default_grid,
    delta_ground_state,
    ground_state,
    square_well_density,
    square_well_ground_energy,
)
from fisherqm.errors import PerturbationWarning
from fisherqm.fitting import ReturnSeries, compare_models, fit_anharmonic, fit_gaussian, fit_laplace
from fisherqm.grid import Grid, amplitude_from_density, fisher_information, normalize, variance
from fisherqm.models import (
    GaussianModel,
    LaplaceModel,
    PerturbedOscillatorModel,
    bracket_divergence,
    c8_density,
    laplace_density,
    price_return_density,
)
from fisherqm.potentials import DeltaPotential, OscillatorParams, SquareWellPotential
from fisherqm.sampling import sample_model

from conftest import ACCEPTANCE_LINES, SEED

REPO = Path(__file__).resolve().parents[1]
ARTIFACTS = Path(os.environ.get("FISHERQM_ARTIFACTS", REPO / "artifacts"))

# Independent high-precision roots of sqrt(2(d-E)) tan(sqrt(2(d-E)) a) = sqrt(2E)
# for the binding energy E, computed once with mpmath.findroot at 30 digits.
WELL_ORACLE = {
    (0.1, 5.0): 0.44210695355903376836,
    (0.05, 10.0): 0.46902664910274391679,
    (0.02, 25.0): 0.48706240434661794811,
    (0.05, 2.0): 0.019737355333102471669,
}


def record(number: int, ok: bool, detail: str):
    line = f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE_LINES[number] = line
    print(line)
    assert ok, line


def harmonic_amplitude(omega, x):
    return (omega / math.pi) ** 0.25 * np.exp(-0.5 * omega * x * x)


def test_criterion_01_harmonic_ground_state():
    worst_e = worst_psi = slowest = 0.0
    for omega in (0.5, 1.0, 4.0):
        p = OscillatorParams(omega)
        t0 = time.perf_counter()
        gs = ground_state(p, default_grid(p))
        slowest = max(slowest, time.perf_counter() - t0)
        worst_e = max(worst_e, abs(gs.energy - omega / 2))
        x = gs.grid.nodes
        worst_psi = max(worst_psi, float(np.max(np.abs(gs.amplitude.values - harmonic_amplitude(omega, x)))))
    ok = worst_e <= 1e-6 and worst_psi <= 1e-6 and slowest < 1.0
    record(1, ok, f"max |E-w/2|={worst_e:.2e}, max sup|psi-psi0|={worst_psi:.2e}, slowest solve {slowest:.2f}s")


def test_criterion_02_gaussian_saturation():
    worst_prod = worst_rel = worst_abs = 0.0
    for omega in (0.5, 1.0, 4.0):
        d = normalize(GaussianModel(omega).density_on_grid())
        fi = fisher_information(amplitude_from_density(d))
        worst_prod = max(worst_prod, abs(variance(d) * fi - 1.0))
        worst_rel = max(worst_rel, abs(fi - 2 * omega) / (2 * omega))
        worst_abs = max(worst_abs, abs(fi - 2 * omega))
    ok = worst_prod <= 1e-3 and worst_abs <= 1e-4
    record(2, ok, f"max |s2*I-1|={worst_prod:.2e}, max |I-2w|={worst_abs:.2e} (relative {worst_rel:.2e})")


def test_criterion_03_laplace_diagnostics():
    worst = 0.0
    for lam in (0.5, 1.0, 2.0):
        grid = Grid.symmetric(12.0 / lam, 4001)
        d = normalize(LaplaceModel(lam).density_on_grid(grid))
        var = variance(d)
        fi = fisher_information(amplitude_from_density(d))
        errs = (var * 2 * lam**2 - 1, fi / (4 * lam**2) - 1, var * fi / 2 - 1)
        worst = max(worst, *(abs(e) for e in errs))
    record(3, worst <= 0.02, f"max relative error of (var, I, product) = {worst:.2e} on 4001 points")


def test_criterion_04_delta_chain():
    lam = 1.0
    x = np.linspace(-15, 15, 30001)
    dgs = delta_ground_state(DeltaPotential(lam))
    pointwise = float(np.max(np.abs(dgs.density(x) - laplace_density(LaplaceModel(lam), x))))

    energies, oracle_gap = [], 0.0
    for a in (0.1, 0.05, 0.02):
        depth = lam / (2 * a)  # delta strength 2*a*depth held at lam
        w = SquareWellPotential(a, depth)
        e = ground_state(w).energy
        energies.append(e)
        oracle_gap = max(oracle_gap, abs(-e - WELL_ORACLE[(a, depth)]) / WELL_ORACLE[(a, depth)])
    target = -lam**2 / 2
    monotone = all(abs(e2 - target) < abs(e1 - target) for e1, e2 in zip(energies, energies[1:]))
    final = abs(energies[-1] - target) / abs(target)
    ok = pointwise <= 1e-12 and final <= 0.05 and monotone and oracle_gap <= 1e-5
    record(4, ok, f"delta vs Laplace {pointwise:.1e}; E(a)={['%.5f' % e for e in energies]}, "
                  f"rel gap at a=0.02 {final:.2%}; grid vs closed-form root {oracle_gap:.1e}")


def test_criterion_05_fineness_limit():
    a, depth = 0.05, 2.0
    w = SquareWellPotential(a, depth)
    assert math.isclose(w.fineness, 0.005)
    e = square_well_ground_energy(w)
    e_err = abs(e - 2 * depth**2 * a**2) / (2 * depth**2 * a**2)
    kappa = math.sqrt(2 * e)
    d = normalize(square_well_density(w, Grid.symmetric(a + 30.0 / kappa, 200001)))
    sigma = math.sqrt(variance(d))
    sigma_ref = (4 * e) ** -0.5
    s_err = abs(sigma - sigma_ref) / sigma_ref
    oracle = abs(e - WELL_ORACLE[(a, depth)]) / WELL_ORACLE[(a, depth)]
    ok = e_err <= 0.10 and s_err <= 0.05 and oracle <= 1e-10
    record(5, ok, f"|E|={e:.6g} vs 2l^2a^2 ({e_err:.2%}); sigma vs (4|E|)^-1/2 ({s_err:.2%})")


def _gap(p: OscillatorParams) -> float:
    gs = ground_state(p)
    x = gs.grid.nodes
    return float(np.max(np.abs(c8_density(p, x) - gs.density().values)))


def test_criterion_06_perturbation_validity():
    eps = np.array([0.01, 0.02, 0.04])
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", PerturbationWarning)
        gaps = np.array([_gap(OscillatorParams(1.0, 0.0, e)) for e in eps])
        joint = np.array([_gap(OscillatorParams(1.0, e, e)) for e in eps])
        divergence = [bracket_divergence(OscillatorParams(1.0, e1, e2))
                      for e in eps for e1, e2 in ((0.0, e), (e, e))]
    slope = float(np.polyfit(np.log(eps), np.log(gaps), 1)[0])
    joint_slope = float(np.polyfit(np.log(eps), np.log(joint), 1)[0])
    at_002 = float(gaps[1])

    ARTIFACTS.mkdir(parents=True, exist_ok=True)
    io.write_json(ARTIFACTS / "perturbation_divergence.json", {
        "omega": 1.0,
        "eps": eps.tolist(),
        "gap_eps2_only": gaps.tolist(),
        "slope_eps2_only": slope,
        "gap_eps1_eq_eps2": joint.tolist(),
        "slope_eps1_eq_eps2": joint_slope,
        "printed_vs_recomputed_bracket": divergence,
        "printed_bracket_agrees": all(d["agree"] for d in divergence),
    })
    ok = abs(slope - 2) <= 0.3 and at_002 <= 1e-3
    record(6, ok, f"gaps {['%.2e' % g for g in gaps]}, slope {slope:.2f}; "
                  f"artifact {ARTIFACTS.name}/perturbation_divergence.json")


def test_criterion_07_fit_recovery():
    n = 100_000
    t0 = time.perf_counter()
    g = fit_gaussian(ReturnSeries(sample_model(GaussianModel(1.0), n, SEED))).params["omega"]
    lap = fit_laplace(ReturnSeries(sample_model(LaplaceModel(1.0), n, SEED))).params["lambda"]
    truth = OscillatorParams(1.0, 0.03, 0.03)
    data = sample_model(PerturbedOscillatorModel(truth), n, SEED)
    an = fit_anharmonic(ReturnSeries(data)).params
    elapsed = time.perf_counter() - t0
    rel = {
        "omega_gauss": abs(g - 1.0),
        "lambda": abs(lap - 1.0),
        "omega": abs(an["omega"] - 1.0),
        "eps1": abs(an["eps1"] - 0.03) / 0.03,
        "eps2": abs(an["eps2"] - 0.03) / 0.03,
    }
    ok = (rel["omega_gauss"] <= 0.01 and rel["lambda"] <= 0.01
          and max(rel["omega"], rel["eps1"], rel["eps2"]) <= 0.15 and elapsed < 60)
    record(7, ok, ", ".join(f"{k} {v:.2%}" for k, v in rel.items()) + f"; {elapsed:.1f}s")


def test_criterion_08_model_selection():
    n = 100_000
    lap_data = ReturnSeries(sample_model(LaplaceModel(1.0), n, SEED))
    gau_data = ReturnSeries(sample_model(GaussianModel(1.0), n, SEED))
    on_lap = compare_models(lap_data, ["gaussian", "laplace"], seed=SEED)
    on_gau = compare_models(gau_data, ["gaussian", "laplace"], seed=SEED)
    ks = next(r.ks_stat for r in on_lap if r.model == "laplace")
    ok = ([r.model for r in on_lap] == ["laplace", "gaussian"]
          and [r.model for r in on_gau] == ["gaussian", "laplace"] and ks < 0.01)
    record(8, ok, f"Laplace data -> {[r.model for r in on_lap]} (KS {ks:.4f}); "
                  f"Gaussian data -> {[r.model for r in on_gau]}")


def test_criterion_09_power_law_transform():
    worst_mass = worst_median = worst_slope = 0.0
    for lam in (0.5, 1.0, 2.0):
        m = LaplaceModel(lam)
        f = lambda y: float(price_return_density(m, y))  # noqa: E731
        lower = integrate.quad(f, 0, 1, epsabs=1e-14, epsrel=1e-13)[0]
        upper = integrate.quad(f, 1, np.inf, epsabs=1e-14, epsrel=1e-13)[0]
        worst_mass = max(worst_mass, abs(lower + upper - 1))
        worst_median = max(worst_median, abs(lower - 0.5))
        y = np.geomspace(5, 50, 200)
        slope = np.polyfit(np.log(y), np.log(price_return_density(m, y)), 1)[0]
        worst_slope = max(worst_slope, abs(-slope - (2 * lam + 1)) / (2 * lam + 1))
    ok = worst_mass <= 1e-8 and worst_median <= 1e-8 and worst_slope <= 0.02
    record(9, ok, f"|mass-1|={worst_mass:.1e}, |F(1)-1/2|={worst_median:.1e}, "
                  f"tail exponent rel err {worst_slope:.1e}")


def test_criterion_10_determinism(tmp_path):
    data = sample_model(LaplaceModel(1.0), 20_000, SEED)
    csv = tmp_path / "returns.csv"
    io.write_returns_csv(csv, data)
    outs = [tmp_path / f"cmp{i}.json" for i in range(3)]
    args = ["compare", "--input", str(csv), "--seed", str(SEED), "-o"]
    codes = [cli_main(args + [str(outs[0])]), cli_main(args + [str(outs[1])])]
    env = dict(os.environ, PYTHONHASHSEED="7")
    codes.append(subprocess.run([sys.executable, "-m", "fisherqm", *args, str(outs[2])], env=env).returncode)
    blobs = [p.read_bytes() for p in outs]
    ok = codes == [0, 0, 0] and blobs[0] == blobs[1] == blobs[2] and json.loads(blobs[0])["ranking"]
    record(10, bool(ok), f"exit codes {codes}; three runs byte-identical: {blobs[0] == blobs[1] == blobs[2]}")


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q", "-s"]))
