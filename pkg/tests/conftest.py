import numpy as np
import pytest

from wemix.models.fit_result import FitResult
from wemix.models.mixture import MixtureModel
from wemix.schemas.options import FitConfig, KernelSpec, RafSpec
from wemix.simulation.generators import example4_truth, gen_example4


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


@pytest.fixture
def standard_normal_2d():
    return MixtureModel(weights=[1.0], means=[[0.0, 0.0]], covariances=[np.eye(2)])


@pytest.fixture
def two_cluster_data(rng):
    """Two well separated bivariate Gaussian clusters of 150 points each."""
    first = rng.normal(size=(150, 2)) + np.array([-6.0, 0.0])
    second = rng.normal(size=(150, 2)) + np.array([6.0, 0.0])
    return np.vstack([first, second])


@pytest.fixture
def two_cluster_model():
    return MixtureModel(
        weights=[0.5, 0.5],
        means=[[-6.0, 0.0], [6.0, 0.0]],
        covariances=[np.eye(2), np.eye(2)],
    )


@pytest.fixture
def example4_clean():
    data, labels, truth = gen_example4(500, seed=7)
    return data, labels, truth


@pytest.fixture
def wem_config():
    return FitConfig(
        algorithm="wem",
        kernel=KernelSpec(family="folded-normal", h=0.5),
        raf=RafSpec(family="gkl", tau=0.9),
        eigen_ratio=15.0,
        n_starts=5,
        seed=11,
        root_mc_draws=2000,
    )


@pytest.fixture
def make_fit():
    """Build a FitResult by hand from a model and per-point arrays."""

    def _make(model: MixtureModel, assignments, cond_weights, cond_dist2, weighted_loglik=0.0):
        assignments = np.asarray(assignments)
        posterior = np.zeros((assignments.size, model.n_components))
        posterior[np.arange(assignments.size), assignments - 1] = 1.0
        return FitResult(
            algorithm="wem",
            model=model,
            assignments=assignments,
            posterior=posterior,
            cond_weights=cond_weights,
            cond_dist2=cond_dist2,
            weighted_loglik=weighted_loglik,
            weighted_class_loglik=weighted_loglik,
            converged=True,
            n_iter=1,
        )

    return _make


@pytest.fixture
def truth4():
    return example4_truth()
