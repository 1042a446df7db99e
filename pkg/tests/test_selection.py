import math

import numpy as np
import pytest

from wemix.errors import GridTooSmall
from wemix.estimation.density import component_dist2, log_likelihood
from wemix.models.mixture import MixtureModel
from wemix.schemas.documents import MonitorCell, MonitorGrid, MonitorGridSpec
from wemix.schemas.options import FitConfig, KernelSpec
from wemix.selection import (
    classical_ic,
    complexity_penalty,
    monitor,
    n_free_parameters,
    suggest_h,
    weighted_ic,
)


def _grid(levels_by_k, h_values):
    cells = [
        MonitorCell(k=k, h=h, downweighting=level, converged=True)
        for k, levels in levels_by_k.items()
        for h, level in zip(h_values, levels)
    ]
    return MonitorGrid(spec=MonitorGridSpec(h_values=h_values, k_values=sorted(levels_by_k)), cells=cells)


class TestCriteria:
    """Test the weighted information criteria."""

    def test_parameter_count(self):
        """Test nu = (K-1) + Kp + Kp(p+1)/2 for K=3, p=2."""
        assert n_free_parameters(3, 2) == 17
        assert n_free_parameters(1, 1) == 2

    def test_penalties(self):
        """Test the AIC and BIC penalty terms."""
        assert complexity_penalty("aic", 3, 2, 100) == 34.0
        assert complexity_penalty("bic", 3, 2, 100) == pytest.approx(17 * math.log(100))
        with pytest.raises(ValueError):
            complexity_penalty("hqc", 3, 2, 100)

    def test_unit_weights_equal_classical(self, two_cluster_data, two_cluster_model, make_fit):
        """Test that all-one weights give the classical criterion exactly."""
        assignments = np.repeat([1, 2], 150)
        dist2 = component_dist2(two_cluster_data, two_cluster_model)[np.arange(300), assignments - 1]
        fitted = make_fit(two_cluster_model, assignments, np.ones(300), dist2)
        for penalty in ("aic", "bic"):
            assert weighted_ic(fitted, two_cluster_data, penalty, 2, 2) == classical_ic(
                fitted, two_cluster_data, penalty, 2, 2)

    def test_univariate_toy(self, make_fit):
        """Test K=1, p=1 against a hand computation with one downweighted point."""
        model = MixtureModel(weights=[1.0], means=[[0.0]], covariances=[[[1.0]]])
        data = np.array([[0.0], [1.0], [4.0]])
        weights = np.array([1.0, 1.0, 0.5])
        fitted = make_fit(model, np.ones(3, dtype=int), weights, data[:, 0] ** 2)
        log_phi = -0.5 * math.log(2.0 * math.pi) - 0.5 * data[:, 0] ** 2
        expected = -2.0 * float(np.sum(weights * log_phi)) + 2.0 * math.log(3.0)
        assert weighted_ic(fitted, data, "bic", 1, 1) == pytest.approx(expected, rel=1e-12)
        assert classical_ic(fitted, data, "bic", 1, 1) == pytest.approx(
            -2.0 * log_likelihood(data, model) + 2.0 * math.log(3.0), rel=1e-12)

    def test_downweighting_lowers_the_criterion_term(self, two_cluster_data, two_cluster_model, make_fit):
        """Test that smaller weights never increase the fit term of the criterion."""
        assignments = np.repeat([1, 2], 150)
        dist2 = component_dist2(two_cluster_data, two_cluster_model)[np.arange(300), assignments - 1]
        full = make_fit(two_cluster_model, assignments, np.ones(300), dist2)
        half = make_fit(two_cluster_model, assignments, np.full(300, 0.5), dist2)
        assert weighted_ic(half, two_cluster_data, "bic", 2, 2) < weighted_ic(full, two_cluster_data, "bic", 2, 2)


class TestSuggestH:
    """Test the bandwidth suggestion."""

    def test_changepoint(self):
        """Test that the profile {0.35, 0.34, 0.33, 0.08, 0.07} selects the third h."""
        grid = _grid({3: [0.35, 0.34, 0.33, 0.08, 0.07]}, [0.01, 0.02, 0.05, 0.1, 0.2])
        suggestion = suggest_h(grid)
        assert suggestion.rationale == "changepoint"
        assert suggestion.h == 0.05
        assert suggestion.k == 3
        assert suggestion.drop == pytest.approx(0.25)

    def test_flat_profile(self):
        """Test that a flat profile falls back to the level closest to the target."""
        grid = _grid({2: [0.05, 0.05, 0.05, 0.05]}, [0.01, 0.02, 0.05, 0.1])
        suggestion = suggest_h(grid)
        assert suggestion.rationale == "no-changepoint"
        assert suggestion.downweighting == 0.05
        assert suggestion.h == 0.01

    def test_largest_drop_across_k(self):
        """Test that the K with the most abrupt drop wins."""
        grid = _grid({2: [0.4, 0.25, 0.2], 3: [0.45, 0.44, 0.05]}, [0.1, 0.2, 0.3])
        suggestion = suggest_h(grid)
        assert (suggestion.k, suggestion.h) == (3, 0.2)

    def test_failed_cells_are_skipped(self):
        """Test that cells with an error are left out of the profile."""
        grid = _grid({2: [0.3, 0.3, 0.05, 0.04]}, [0.1, 0.2, 0.3, 0.4])
        cells = list(grid.cells)
        cells[1] = MonitorCell(k=2, h=0.2, error="degenerate")
        grid = MonitorGrid(spec=grid.spec, cells=cells)
        assert suggest_h(grid).h == 0.1

    def test_grid_too_small(self):
        """Test GridTooSmall when no K has three successful cells."""
        with pytest.raises(GridTooSmall):
            suggest_h(_grid({2: [0.3, 0.1]}, [0.1, 0.2]))


class TestMonitor:
    """Test monitoring sweeps."""

    def test_small_grid(self, two_cluster_data):
        """Test that every (K, h) cell is filled and the levels lie in [0, 1]."""
        config = FitConfig(kernel=KernelSpec(h=0.1), eigen_ratio=15.0, n_starts=3, seed=4, root_mc_draws=500)
        spec = MonitorGridSpec(h_values=[0.2, 0.5, 1.0], k_values=[1, 2])
        grid = monitor(two_cluster_data, config, spec, threads=2)
        assert [(c.k, c.h) for c in grid.cells] == [(1, 0.2), (1, 0.5), (1, 1.0), (2, 0.2), (2, 0.5), (2, 1.0)]
        for cell in grid.profile(2):
            assert 0.0 <= cell.downweighting <= 1.0
            assert len(cell.dist2) == 300
        assert len(grid.profile(2)) == 3
        assert all(cell.ok or cell.error for cell in grid.cells)

    def test_thread_count_does_not_change_the_grid(self, two_cluster_data):
        """Test that one and several threads give the same cells."""
        config = FitConfig(kernel=KernelSpec(h=0.1), n_starts=2, seed=9, root_mc_draws=300)
        spec = MonitorGridSpec(h_values=[0.3, 0.6], k_values=[1, 2])
        assert monitor(two_cluster_data, config, spec, threads=1) == monitor(two_cluster_data, config, spec, threads=3)
