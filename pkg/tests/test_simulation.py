import numpy as np
import pytest
from pydantic import ValidationError

from wemix.errors import DimensionTooSmall, KMismatch, TooFewRows
from wemix.estimation.density import chi2_quantile, component_dist2
from wemix.models.mixture import MixtureModel
from wemix.schemas.options import DetectionRule, FitConfig, KernelSpec
from wemix.schemas.simulation import SimScenario, StudySpec
from wemix.simulation import (
    accuracy_metrics,
    contaminate,
    example4_truth,
    gen_example4,
    gen_m5,
    label_align,
    m5_truth,
    run_study,
)
from wemix.simulation.generators import n_outliers
from wemix.simulation.study import simulate_scenario, trial_seeds


def _pooled_ratio(model):
    eigenvalues = np.linalg.eigvalsh(model.covariances)
    return eigenvalues.max() / eigenvalues.min()


class TestGenerators:
    """Test the benchmark designs."""

    def test_m5_truth(self):
        """Test the M5 covariance eigenvalues and their pooled ratio of 45."""
        truth = m5_truth(2, 10.0)
        np.testing.assert_allclose(np.linalg.eigvalsh(truth.covariances[0]), [5.0, 25.0])
        np.testing.assert_allclose(np.linalg.eigvalsh(truth.covariances[2]), [30.0, 45.0])
        assert _pooled_ratio(truth) == pytest.approx(45.0)
        np.testing.assert_array_equal(truth.means[1], [0.0, 10.0])

    def test_m5_extra_dimensions(self):
        """Test that coordinates beyond the second are standard normal noise."""
        truth = m5_truth(4, 6.0)
        for cov in truth.covariances:
            np.testing.assert_array_equal(cov[2:, 2:], np.eye(2))
        assert np.all(truth.means[:, 2:] == 0.0)

    def test_m5_errors(self):
        """Test DimensionTooSmall and TooFewRows."""
        with pytest.raises(DimensionTooSmall):
            m5_truth(1, 10.0)
        with pytest.raises(TooFewRows):
            gen_m5(3, 10.0, 11)

    def test_m5_component_mean(self):
        """Test the sample mean of component 2 against (0, beta, 0)."""
        data, labels, _ = gen_m5(3, 8.0, 2000, seed=3)
        members = data[labels == 2]
        bound = 4.0 / np.sqrt(members.shape[0])
        np.testing.assert_allclose(members.mean(axis=0), [0.0, 8.0, 0.0], atol=bound)

    @pytest.mark.parametrize("generate", [
        lambda: gen_m5(2, 10.0, 5000, seed=21),
        lambda: gen_m5(4, 6.0, 5000, seed=22),
        lambda: gen_example4(5000, seed=23),
    ])
    def test_component_covariances(self, generate):
        """Test that each component's sample covariance is within 15/sqrt(n_k) of the truth.

        The error is the Frobenius norm of L^-1 S L^-T - I, with L the Cholesky
        factor of the true covariance, so it does not grow with the scale of
        the component.
        """
        data, labels, truth = generate()
        for k in range(truth.n_components):
            members = data[labels == k + 1]
            sample = np.cov(members, rowvar=False)
            inverse_factor = np.linalg.inv(np.linalg.cholesky(truth.covariances[k]))
            whitened = inverse_factor @ sample @ inverse_factor.T
            error = np.linalg.norm(whitened - np.eye(truth.n_features), ord="fro")
            assert error < 15.0 / np.sqrt(members.shape[0])

    def test_example4_truth(self):
        """Test the true pooled eigen-ratio of 9.5."""
        assert _pooled_ratio(example4_truth()) == pytest.approx(9.5)

    def test_seed_repetition(self):
        """Test that equal seeds give identical data."""
        a, la, _ = gen_example4(200, seed=5)
        b, lb, _ = gen_example4(200, seed=5)
        np.testing.assert_array_equal(a, b)
        np.testing.assert_array_equal(la, lb)
        assert set(np.unique(la)) <= {1, 2, 3}


class TestContaminate:
    """Test uniform background noise."""

    def test_no_contamination(self, example4_clean):
        """Test that eps=0 returns the input unchanged with no flags."""
        clean, _, truth = example4_clean
        data, flags = contaminate(clean, truth, 0.0)
        np.testing.assert_array_equal(data, clean)
        assert not flags.any()

    def test_forty_percent_of_total(self, truth4):
        """Test that eps=0.4 of a 1000-row sample appends 400 outliers outside the 0.99 ellipses."""
        clean, _, _ = gen_example4(600, seed=1)
        data, flags = contaminate(clean, truth4, 0.4, quantile=0.99, seed=2)
        assert data.shape == (1000, 2)
        assert int(flags.sum()) == 400
        np.testing.assert_array_equal(data[:600], clean)
        assert np.all(component_dist2(data[flags], truth4).min(axis=1) > chi2_quantile(0.99, 2))

    def test_outlier_counts(self):
        """Test eps as a fraction of the total and of the clean part."""
        assert n_outliers(600, 0.4) == 400
        assert n_outliers(600, 0.4, of_total=False) == 240
        assert n_outliers(600, 0.0) == 0

    def test_rate_domain(self, example4_clean):
        """Test that eps outside [0, 1) is rejected."""
        clean, _, truth = example4_clean
        with pytest.raises(ValueError):
            contaminate(clean, truth, 1.0)


class TestAccuracy:
    """Test parameter accuracy measures and label alignment."""

    def test_truth_has_zero_error(self, truth4):
        """Test that the truth itself scores (0, 0, 0)."""
        mu_err, sigma_err, pi_err = accuracy_metrics(truth4, truth4)
        assert mu_err == 0.0 and pi_err == 0.0
        assert sigma_err == pytest.approx(0.0, abs=1e-12)

    def test_scaled_covariances(self, truth4):
        """Test that doubling every covariance leaves sigma_err at zero."""
        scaled = MixtureModel(weights=truth4.weights, means=truth4.means, covariances=2.0 * truth4.covariances)
        assert accuracy_metrics(scaled, truth4)[1] == pytest.approx(0.0, abs=1e-12)

    def test_sigma_err_two_by_two_oracle(self):
        """Test sigma_err against the closed-form eigenvalues of Sigma^-1/2 Sigma_hat Sigma^-1/2."""
        truth = MixtureModel(weights=[1.0], means=[[0.0, 0.0]], covariances=[np.diag([1.0, 4.0])])
        fitted = MixtureModel(weights=[1.0], means=[[0.0, 0.0]], covariances=[[[2.0, 1.0], [1.0, 2.0]]])
        # symmetric form [[2, 0.5], [0.5, 0.5]]: trace 2.5, determinant 0.75
        root = np.sqrt(2.5 ** 2 - 4 * 0.75)
        expected = np.log((2.5 + root) / (2.5 - root))
        assert accuracy_metrics(fitted, truth)[1] == pytest.approx(expected, rel=1e-10)
        assert expected == pytest.approx(1.819908334537526, rel=1e-12)

    def test_k_mismatch(self, truth4, standard_normal_2d):
        """Test that a different K is rejected."""
        with pytest.raises(KMismatch):
            accuracy_metrics(standard_normal_2d, truth4)

    def test_label_align_permutation(self, make_fit):
        """Test that first mean coordinates (5, -5, 0) give the order (2, 3, 1)."""
        model = MixtureModel(
            weights=[0.2, 0.3, 0.5],
            means=[[5.0, 0.0], [-5.0, 1.0], [0.0, 2.0]],
            covariances=[np.eye(2)] * 3,
        )
        fitted = make_fit(model, [1, 2, 3, 1], np.ones(4), np.ones(4))
        aligned = label_align(fitted)
        np.testing.assert_array_equal(aligned.model.means[:, 0], [-5.0, 0.0, 5.0])
        np.testing.assert_array_equal(aligned.model.weights, [0.3, 0.5, 0.2])
        np.testing.assert_array_equal(aligned.assignments, [3, 1, 2, 3])
        np.testing.assert_array_equal(aligned.posterior[0], [0.0, 0.0, 1.0])

    def test_label_align_sorted_is_identity(self, make_fit, truth4):
        """Test that already sorted means are left alone."""
        sorted_truth = truth4.permuted(np.argsort(truth4.means[:, 0], kind="stable"))
        fitted = make_fit(sorted_truth, [1, 2, 3], np.ones(3), np.ones(3))
        assert label_align(fitted) is fitted


class TestScenarios:
    """Test scenario schemas and trial seeding."""

    def test_scenario_validation(self):
        """Test the dimension rules of the two schemes."""
        with pytest.raises(ValidationError):
            SimScenario(scheme="example4", p=3)
        with pytest.raises(ValidationError):
            SimScenario(scheme="m5", p=1)
        with pytest.raises(ValidationError):
            SimScenario(n=5)

    def test_clean_size(self):
        """Test the clean part under both contamination conventions."""
        assert SimScenario(scheme="example4", n=1000, eps=0.4).n_clean == 600
        assert SimScenario(scheme="example4", n=1000, eps=0.4, eps_of_total=False).n_clean == 1000

    def test_simulate_scenario(self):
        """Test that outliers get truth label 0."""
        scenario = SimScenario(scheme="example4", n=200, eps=0.25, seed=3)
        data, labels, outlier, _ = simulate_scenario(scenario, 1, 2)
        assert data.shape == (200, 2)
        assert int(outlier.sum()) == 50
        assert np.all(labels[outlier] == 0)
        assert np.all(labels[~outlier] >= 1)

    def test_trial_seeds(self):
        """Test that seeds are reproducible and differ between trials."""
        assert trial_seeds(7, 0) == trial_seeds(7, 0)
        assert trial_seeds(7, 0) != trial_seeds(7, 1)
        assert len(set(trial_seeds(7, 0))) == 3

    def test_study_spec_validation(self):
        """Test that zero trials and duplicate algorithms are rejected."""
        scenario = SimScenario(scheme="example4", n=100)
        with pytest.raises(ValidationError):
            StudySpec(scenarios=[scenario], n_trials=0)
        with pytest.raises(ValidationError):
            StudySpec(scenarios=[scenario], n_trials=1, algorithms=["wem", "wem"])


class TestRunStudy:
    """Test the Monte Carlo driver."""

    @pytest.fixture
    def spec(self):
        return StudySpec(
            scenarios=[SimScenario(scheme="example4", n=240, eps=0.1, seed=5)],
            fit=FitConfig(kernel=KernelSpec(h=0.3), eigen_ratio=15.0, n_starts=2, root_mc_draws=300),
            algorithms=["wem", "em"],
            rules=[DetectionRule(kind="chi2", alpha=0.025), DetectionRule(kind="weight", threshold=0.2)],
            n_trials=2,
        )

    def test_records_and_aggregates(self, spec):
        """Test one record per (trial, algorithm, rule) and one aggregate per (algorithm, rule)."""
        report = run_study(spec, threads=1)
        assert len(report.records) + 2 * report.n_failures == 8
        assert report.n_trials == 2
        keys = {(a.algorithm, a.rule) for a in report.aggregates}
        assert keys <= {(alg, rule) for alg in ("wem", "em") for rule in ("chi2:0.025", "weight:0.2")}
        for record in report.records:
            assert 0.0 <= record.eps_hat <= 1.0
            assert record.mu_err >= 0.0

    def test_independent_of_threads(self, spec):
        """Test that the report is identical for one and several threads."""
        assert run_study(spec, threads=1) == run_study(spec, threads=3)
