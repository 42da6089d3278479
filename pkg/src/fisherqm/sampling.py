"""Inverse-CDF sampling from a tabulated density."""

from __future__ import annotations

import numpy as np

from .grid import Grid

TABLE_POINTS = 2**20 + 1


def tabulated_cdf(pdf, grid: Grid) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and normalized cumulative trapezoid integral of ``pdf`` on ``grid``.

    Zero-density stretches are reduced to their end nodes, so inverting the
    table by linear interpolation never lands inside a region of zero density.
    """
    x = grid.nodes
    f = np.asarray(pdf(x), dtype=float)
    cdf = np.concatenate(([0.0], np.cumsum(0.5 * (f[1:] + f[:-1]) * grid.spacing)))
    cdf /= cdf[-1]
    rises = np.diff(cdf) > 0
    keep = np.concatenate(([False], rises)) | np.concatenate((rises, [False]))
    return x[keep], cdf[keep]


def sample_from_density(pdf, grid: Grid, n: int, seed: int) -> np.ndarray:
    """Draw ``n`` values by inverting the tabulated CDF; deterministic for a given seed."""
    x, cdf = tabulated_cdf(pdf, grid)
    u = np.random.default_rng(seed).random(int(n))
    return np.interp(u, cdf, x)


def sample_model(model, n: int, seed: int, n_table: int = TABLE_POINTS) -> np.ndarray:
    """Sample a model (anything with ``pdf`` and ``default_grid``) on a 2^20-point table."""
    g = model.default_grid()
    table = Grid(g.x_min, g.x_max, n_table)
    return sample_from_density(model.pdf, table, n, seed)
