import math

import numpy as np
import pytest

from scipy.integrate import trapezoid

from fspn.events import Interval
from fspn.leaves import (BinnedHistogram, DiscreteHistogram, GaussianMixture, SparseHistogram, dist_from_dict,
                         gaussian_box_mass)


def test_histogram_mle_and_smoothing():
    values = np.array([0] * 2 + [1] * 3 + [2] * 5)[:, None]
    h = DiscreteHistogram.fit(values, [3], alpha=0.0)
    np.testing.assert_allclose(h.masses, [0.2, 0.3, 0.5])
    h = DiscreteHistogram.fit(values, [3], alpha=1.0)
    np.testing.assert_allclose(h.masses, [3 / 13, 4 / 13, 6 / 13])


def test_joint_histogram_diagonal():
    h = DiscreteHistogram.fit(np.array([[0, 0], [1, 1]]), [2, 2], alpha=0.0)
    np.testing.assert_allclose(h.masses, [[0.5, 0.0], [0.0, 0.5]])
    assert h.mass([Interval(0, 1), Interval(0, 0)]) == pytest.approx(0.5)
    assert h.mass([Interval(0, 1), Interval(0, 1)]) == pytest.approx(1.0)


def test_histogram_range_mass_and_points():
    h = DiscreteHistogram([4], [0.1, 0.2, 0.3, 0.4])
    assert h.mass([Interval(1, 2)]) == pytest.approx(0.5)
    assert h.mass([Interval(3, 2)]) == 0.0
    np.testing.assert_allclose(h.log_point(np.array([[0], [3]])), np.log([0.1, 0.4]))


def test_large_lattice_falls_back_to_sparse():
    rng = np.random.default_rng(0)
    dims = [100] * 4
    values = rng.integers(0, 100, size=(500, 4))
    h = DiscreteHistogram.fit(values, dims, alpha=0.1)
    assert isinstance(h, SparseHistogram)
    full = [Interval(0, 99)] * 4
    assert h.mass(full) == pytest.approx(1.0, abs=1e-9)
    seen = h.log_point(values[:1].astype(float))[0]
    unseen = h.log_point(np.array([[99.0, 99.0, 99.0, 98.0]]))[0]
    assert np.isfinite(unseen) and unseen < seen
    assert dist_from_dict(h.to_dict()).mass(full) == pytest.approx(1.0)


def test_binned_histogram_partial_overlap():
    b = BinnedHistogram([[0.0, 3.0, 5.0, 6.0, 20.0]], [0.2, 0.1, 0.3, 0.4])
    assert b.mass([Interval(3.0, 6.0)]) == pytest.approx(0.4)
    assert b.mass([Interval(4.0, 5.5)]) == pytest.approx(0.05 + 0.15)
    assert b.mass([Interval(0.0, 20.0)]) == pytest.approx(1.0)


def test_gaussian_box_mass_quadrant_closed_form():
    # P(Z1 >= 0, Z2 >= 0) = 1/4 + asin(rho) / (2 pi) for a standard bivariate normal
    want = 0.25 + math.asin(0.9) / (2 * math.pi)
    got = gaussian_box_mass(np.zeros(2), np.array([[1.0, 0.9], [0.9, 1.0]]), np.zeros(2), np.full(2, np.inf))
    assert got == pytest.approx(want, abs=1e-4)


def test_gaussian_mixture_quadrant_against_monte_carlo():
    # Monte Carlo oracle (10^6 draws, seed 5) gave 0.427718
    g = GaussianMixture([-50, -50], [50, 50], [False, False], [1.0], [[0.0, 0.0]], [[[1.0, 0.9], [0.9, 1.0]]])
    assert g.mass([Interval(0.0, 50.0), Interval(0.0, 50.0)]) == pytest.approx(0.427718, abs=0.01)
    assert g.mass([Interval(-50.0, 50.0)] * 2) == pytest.approx(1.0, abs=1e-4)


def test_gmm_fit_standard_normal():
    x = np.random.default_rng(3).standard_normal(10_000)[:, None]
    g = GaussianMixture.fit(x, [-10], [10], [False], 1, seed=0, reg_covar=1e-6)
    assert abs(g.means[0, 0]) < 0.05
    assert abs(math.sqrt(g.covs[0, 0, 0]) - 1.0) < 0.05


def test_gmm_truncation_normalizes_and_density_integrates():
    x = np.random.default_rng(4).normal(1.0, 2.0, size=(2000, 1))
    g = GaussianMixture.fit(x, [0.0], [3.0], [False], 2, seed=0, reg_covar=1e-6)
    assert g.mass([Interval(0.0, 3.0)]) == pytest.approx(1.0, abs=1e-9)
    grid = np.linspace(0.0, 3.0, 30001)[:, None]
    assert trapezoid(np.exp(g.log_point(grid)), grid[:, 0]) == pytest.approx(1.0, abs=1e-4)


def test_mixed_gmm_discrete_cells_sum_to_one():
    rng = np.random.default_rng(8)
    d = rng.integers(0, 3, 500)
    c = d + rng.normal(0, 0.3, 500)
    g = GaussianMixture.fit(np.c_[d, c], [-0.5, -2.0], [2.5, 4.0], [True, False], 2, seed=0, reg_covar=1e-6)
    assert sum(g.mass([Interval(k, k), Interval(-2.0, 4.0)]) for k in range(3)) == pytest.approx(1.0, abs=1e-6)


@pytest.mark.parametrize("dist", [
    DiscreteHistogram([2, 3], np.full(6, 1 / 6)),
    BinnedHistogram([[0.0, 1.0, 2.0]], [0.25, 0.75]),
    GaussianMixture([0.0], [1.0], [False], [0.4, 0.6], [[0.2], [0.7]], [[[0.01]], [[0.04]]]),
])
def test_leaf_roundtrip(dist):
    back = dist_from_dict(dist.to_dict())
    assert back.to_dict() == dist.to_dict()
    assert back.n_params == dist.n_params
