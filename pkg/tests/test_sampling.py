import math

import numpy as np
import pytest
from scipy import stats

from fisherqm.grid import Grid
from fisherqm.models import GaussianModel, LaplaceModel
from fisherqm.sampling import sample_from_density, sample_model, tabulated_cdf

from conftest import SEED


def test_deterministic_for_seed():
    m = LaplaceModel(1.0)
    a = sample_model(m, 1000, SEED)
    np.testing.assert_array_equal(a, sample_model(m, 1000, SEED))
    assert not np.array_equal(a, sample_model(m, 1000, SEED + 1))


def test_zero_density_tails_are_never_sampled():
    g = Grid(-2, 2, 401)
    x, cdf = tabulated_cdf(lambda t: np.where(np.abs(t) < 1, 1.0, 0.0), g)
    assert cdf[0] == 0 and cdf[-1] == 1
    assert np.all(np.diff(cdf) > 0)
    assert x[0] == pytest.approx(-1.0) and x[-1] == pytest.approx(1.0)
    s = sample_from_density(lambda t: np.where(np.abs(t) < 1, 1.0, 0.0), g, 5000, SEED)
    assert np.all(np.abs(s) <= 1.0)


@pytest.mark.parametrize("model,dist", [
    (GaussianModel(1.0), stats.norm(scale=1 / math.sqrt(2))),
    (LaplaceModel(2.0), stats.laplace(scale=1 / 4)),
])
def test_samples_follow_the_model(model, dist):
    x = sample_model(model, 50_000, SEED)
    assert stats.kstest(x, dist.cdf).pvalue > 1e-3
