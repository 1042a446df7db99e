import math
import time

import numpy as np
import pytest
from scipy import integrate, stats

from wemix.errors import DomainError, EmptySample, ReferenceDensityZero
from wemix.estimation.density import component_dist2
from wemix.estimation.downweight import (
    RESIDUAL_FLOOR,
    kde_boundary,
    kernel_matrix,
    pearson_residual,
    pearson_residuals,
    raf_apply,
    raf_values,
    weight,
    weight_values,
)
from wemix.estimation.engine import soft_trim
from wemix.models.mixture import MixtureModel
from wemix.schemas.options import FitConfig, KernelSpec, RafSpec

RAF_SPECS = [
    RafSpec(family="pdm", tau=-1.0),
    RafSpec(family="pdm", tau=2.0),
    RafSpec(family="pdm", tau=math.inf),
    RafSpec(family="gkl", tau=0.1),
    RafSpec(family="gkl", tau=0.5),
    RafSpec(family="gkl", tau=0.9),
    RafSpec(family="gkl", tau=1.0),
]


class TestKdeBoundary:
    """Test the boundary-corrected kernel density estimates."""

    def test_folded_normal_reflection_doubles_boundary_mass(self):
        """Test that a single sample at zero gives 2 phi(0) at zero."""
        spec = KernelSpec(family="folded-normal", h=1.0)
        value = kde_boundary([0.0], [0.0], spec)[0]
        assert value == pytest.approx(2.0 / math.sqrt(2.0 * math.pi), rel=1e-10)

    def test_folded_normal_far_from_boundary_is_plain_kde(self):
        """Test that the reflection term vanishes far from zero."""
        spec = KernelSpec(family="folded-normal", h=1.0)
        samples = np.array([48.0, 49.5, 50.0, 50.5, 52.0])
        plain = np.mean(stats.norm.pdf((50.0 - samples) / 1.0)) / 1.0
        assert kde_boundary([50.0], samples, spec)[0] == pytest.approx(plain, rel=1e-9)

    @pytest.mark.parametrize("family,h", [("folded-normal", 0.5), ("gamma", 0.02), ("log-transform", 0.3)])
    def test_mass_conservation(self, family, h, rng):
        """Test that each estimate integrates to about one over [0, 40]."""
        samples = rng.chisquare(2, size=200)
        grid = np.concatenate([np.geomspace(1e-8, 1.0, 20000, endpoint=False), np.linspace(1.0, 40.0, 20001)])
        density = kde_boundary(grid, samples, KernelSpec(family=family, h=h))
        assert integrate.trapezoid(density, grid) == pytest.approx(1.0, abs=0.02)

    @pytest.mark.parametrize("family,h", [("folded-normal", 0.6), ("gamma", 0.1), ("log-transform", 0.15)])
    def test_convergence_to_chi_square(self, family, h, rng):
        """Test that the estimate of chi-square(5) draws is close to the true density."""
        samples = rng.chisquare(5, size=4000)
        grid = np.linspace(1.0, 15.0, 141)
        density = kde_boundary(grid, samples, KernelSpec(family=family, h=h))
        assert np.mean(np.abs(density - stats.chi2.pdf(grid, 5))) < 0.01

    def test_sample_weights_select_samples(self):
        """Test that zero-weight samples are ignored."""
        spec = KernelSpec(family="gamma", h=0.2)
        weighted = kde_boundary([1.0, 2.0], [1.0, 3.0, 50.0], spec, sample_weights=[1.0, 1.0, 0.0])
        plain = kde_boundary([1.0, 2.0], [1.0, 3.0], spec)
        np.testing.assert_allclose(weighted, plain, rtol=1e-12)

    def test_errors(self):
        """Test the empty-sample and negative-value errors."""
        spec = KernelSpec(family="folded-normal", h=1.0)
        with pytest.raises(EmptySample):
            kde_boundary([1.0], [], spec)
        with pytest.raises(DomainError):
            kde_boundary([-1.0], [1.0], spec)
        with pytest.raises(DomainError):
            kde_boundary([1.0], [-0.5], spec)
        with pytest.raises(DomainError):
            kde_boundary([1.0], [1.0, 2.0], spec, sample_weights=[1.0, -1.0])

    def test_log_transform_accepts_zero_distances(self):
        """Test that zero squared distances are clamped instead of rejected."""
        spec = KernelSpec(family="log-transform", h=0.2)
        values = kde_boundary([0.0, 1.0, 2.0], [0.0, 1.0, 1.5, 2.0], spec)
        assert np.all(np.isfinite(values)) and np.all(values >= 0.0)
        assert values[1] > 0.0

    @pytest.mark.parametrize("family", ["folded-normal", "gamma", "log-transform"])
    def test_matches_explicit_kernel_sum(self, family, rng):
        """Test the chunked evaluation against a direct sum over samples, across chunk borders."""
        spec = KernelSpec(family=family, h=0.4)
        samples = rng.chisquare(3, size=50)
        weights = rng.uniform(0.1, 1.0, size=50)
        points = rng.chisquare(3, size=1100)
        expected = kernel_matrix(points, samples, spec) @ (weights / weights.sum())
        np.testing.assert_allclose(kde_boundary(points, samples, spec, sample_weights=weights),
                                   expected, rtol=1e-12)

    def test_runtime_at_study_size(self, rng):
        """Test that a 2000 x 2000 folded-normal estimate takes well under two seconds."""
        samples = rng.chisquare(2, size=2000)
        spec = KernelSpec(family="folded-normal", h=0.1)
        start = time.perf_counter()
        kde_boundary(samples, samples, spec, sample_weights=rng.uniform(size=2000))
        assert time.perf_counter() - start < 2.0


class TestPearsonResidual:
    """Test Pearson residuals against the chi-square density."""

    def test_perfect_agreement(self):
        """Test that the reference density itself gives a zero residual."""
        assert pearson_residual(3.0, 4, stats.chi2.pdf(3.0, 4)) == pytest.approx(0.0, abs=1e-14)

    def test_empty_region_is_floored(self):
        """Test that a zero estimate gives the floor -1 + 1e-12."""
        assert pearson_residual(2.0, 2, 0.0) == RESIDUAL_FLOOR

    def test_closed_form(self):
        """Test d2=2, p=2, kde=0.3."""
        assert pearson_residual(2.0, 2, 0.3) == pytest.approx(0.3 / 0.183939721 - 1.0, rel=1e-8)

    def test_underflow_sentinel(self):
        """Test that an underflowed reference gives +inf, or raises when strict."""
        assert pearson_residual(5000.0, 2, 0.1) == math.inf
        with pytest.raises(ReferenceDensityZero):
            pearson_residual(5000.0, 2, 0.1, strict=True)
        assert weight(math.inf, RafSpec()) == 0.0

    def test_vectorised_matches_scalar(self):
        """Test the vector version against the scalar one."""
        d2 = np.array([0.5, 2.0, 7.0, 3000.0])
        kde = np.array([0.3, 0.2, 0.0, 0.01])
        expected = [pearson_residual(d, 2, k) for d, k in zip(d2, kde)]
        np.testing.assert_allclose(pearson_residuals(d2, 2, kde), expected)


class TestRaf:
    """Test residual adjustment functions."""

    @pytest.mark.parametrize("spec", RAF_SPECS)
    def test_zero_maps_to_zero(self, spec):
        """Test A(0) = 0."""
        assert raf_apply(0.0, spec) == pytest.approx(0.0, abs=1e-15)

    def test_maximum_likelihood_identity(self):
        """Test that pdm with tau=1 is the identity."""
        assert raf_apply(0.7, RafSpec(family="pdm", tau=1.0)) == pytest.approx(0.7)

    def test_hellinger(self):
        """Test pdm tau=2 at delta=3."""
        assert raf_apply(3.0, RafSpec(family="pdm", tau=2.0)) == pytest.approx(2.0)

    def test_kullback_leibler_limit(self):
        """Test that pdm tau=inf is log(1 + delta)."""
        assert raf_apply(1.5, RafSpec(family="pdm", tau=math.inf)) == pytest.approx(math.log(2.5))

    def test_gkl_small_tau_is_identity(self):
        """Test that gkl with tau below 1e-12 returns delta."""
        assert raf_apply(4.0, RafSpec(family="gkl", tau=0.0)) == 4.0

    def test_gkl_undefined_argument(self):
        """Test the -inf sentinel at delta=-1 for gkl tau=1, and the delta < -1 error."""
        assert raf_apply(-1.0, RafSpec(family="gkl", tau=1.0)) == -math.inf
        with pytest.raises(DomainError):
            raf_apply(-1.5, RafSpec())

    @pytest.mark.parametrize("spec", RAF_SPECS)
    def test_bounded_by_residual(self, spec, rng):
        """Test |A(delta)| <= |delta| on nonnegative residuals."""
        delta = np.concatenate([rng.uniform(0.0, 10.0, 5000), rng.uniform(0.0, 1e6, 5000)])
        adjusted = raf_values(delta, spec)
        assert np.all(np.abs(adjusted) <= np.abs(delta) + 1e-12)


class TestWeight:
    """Test the weight function."""

    def test_unit_weight_at_zero(self):
        """Test w(0) = 1."""
        for spec in RAF_SPECS:
            assert weight(0.0, spec) == pytest.approx(1.0)

    def test_hellinger_example(self):
        """Test pdm tau=2 at delta=3."""
        assert weight(3.0, RafSpec(family="pdm", tau=2.0)) == pytest.approx(0.75)

    def test_gkl_example(self):
        """Test gkl tau=1 at delta=e-1."""
        assert weight(math.e - 1.0, RafSpec(family="gkl", tau=1.0)) == pytest.approx(2.0 / math.e)

    def test_floor_gives_zero(self):
        """Test that the floored residual gets weight 0."""
        assert weight(RESIDUAL_FLOOR, RafSpec()) == 0.0
        assert weight(-1.0, RafSpec(family="pdm", tau=2.0)) == 0.0

    @pytest.mark.parametrize("spec", RAF_SPECS)
    def test_weights_in_unit_interval(self, spec, rng):
        """Test 0 <= w <= 1 over random residuals in [-1, 1e6]."""
        delta = np.concatenate([rng.uniform(-1.0, 10.0, 5000), rng.uniform(-1.0, 1e6, 5000)])
        w = weight_values(delta, spec)
        assert np.all((w >= 0.0) & (w <= 1.0))

    @pytest.mark.parametrize("spec", RAF_SPECS)
    def test_nonincreasing_for_positive_residuals(self, spec):
        """Test monotonicity on a grid of nonnegative residuals."""
        delta = np.concatenate([np.linspace(0.0, 10.0, 2001), np.geomspace(10.0, 1e6, 500)])
        w = weight_values(delta, spec)
        assert np.all(np.diff(w) <= 1e-12)


class TestSoftTrim:
    """Test the weights computed at a fitted model."""

    def test_huge_bandwidth_keeps_every_point(self, standard_normal_2d, rng):
        """Test that h=1e6 with the smoothed reference gives weights near one."""
        data = rng.normal(size=(300, 2))
        config = FitConfig(algorithm="wem", kernel=KernelSpec(h=1e6, reference="smoothed"))
        w = soft_trim(data, standard_normal_2d, config)
        assert w.shape == (300, 1)
        assert np.all(w >= 0.99)

    def test_single_outlier(self, standard_normal_2d, rng):
        """Test that a point at d2=100 is downweighted while clean points are kept."""
        data = np.vstack([rng.normal(size=(300, 2)), [[10.0, 0.0]]])
        config = FitConfig(algorithm="wem", kernel=KernelSpec(h=0.5))
        w = soft_trim(data, standard_normal_2d, config)[:, 0]
        assert w[-1] < 0.05
        assert np.mean(w[:-1]) > 0.9

    def test_wem_and_wcem_agree_on_separated_clusters(self, rng):
        """Test that posterior-weighted and cluster-conditional weights coincide for separated clusters."""
        model = MixtureModel(weights=[0.5, 0.5], means=[[-20.0, 0.0], [20.0, 0.0]],
                             covariances=[np.eye(2), np.eye(2)])
        data = np.vstack([rng.normal(size=(200, 2)) + [-20.0, 0.0], rng.normal(size=(200, 2)) + [20.0, 0.0]])
        labels = np.repeat([1, 2], 200)
        kernel = KernelSpec(h=0.5)
        wem = soft_trim(data, model, FitConfig(algorithm="wem", kernel=kernel))
        wcem = soft_trim(data, model, FitConfig(algorithm="wcem", kernel=kernel), assignments=labels)
        np.testing.assert_allclose(wem[np.arange(400), labels - 1], wcem, atol=0.02)

    def test_classification_requires_assignments(self, standard_normal_2d, rng):
        """Test that wcem without assignments is rejected."""
        with pytest.raises(DomainError):
            soft_trim(rng.normal(size=(10, 2)), standard_normal_2d, FitConfig(algorithm="wcem"))

    def test_baselines_use_unit_weights(self, standard_normal_2d, rng):
        """Test that em returns an n x K matrix of ones and cem an n-vector of ones."""
        data = rng.normal(size=(20, 2))
        np.testing.assert_array_equal(soft_trim(data, standard_normal_2d, FitConfig(algorithm="em")), 1.0)
        cem = soft_trim(data, standard_normal_2d, FitConfig(algorithm="cem"), assignments=np.ones(20, dtype=int))
        assert cem.shape == (20,)

    def test_distances_match_component_dist2(self, two_cluster_model, two_cluster_data):
        """Test that the distances behind the weights are the component-wise Mahalanobis distances."""
        dist2 = component_dist2(two_cluster_data, two_cluster_model)
        assert dist2.shape == (300, 2)
        assert np.all(dist2 >= 0.0)
