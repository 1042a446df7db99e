"""Selection among the fixed points reached from different starting values."""

import logging

import numpy as np

from wemix.errors import AllRootsDegenerate
from wemix.estimation.density import component_log_densities, component_dist2, sample_mixture
from wemix.estimation.downweight import kde_boundary, pearson_residuals, reference_density
from wemix.models.fit_result import FitResult
from wemix.schemas.options import FitConfig

logger = logging.getLogger(__name__)

# Residuals below this value mark regions the fit leaves empty
STRONGLY_NEGATIVE = -0.95

# Roots whose mean conditional weight is below this fit only a small part of the data
MIN_MEAN_WEIGHT = 0.25


def conditional_residuals(points: np.ndarray, fit: FitResult, config: FitConfig) -> np.ndarray:
    """Pearson residuals of points w.r.t. their MAP component under `fit`.

    The density of squared distances of component k is estimated from the
    distances of the data points assigned to k; points that fall in a
    component without data get the residual -1.
    """
    points = np.atleast_2d(np.asarray(points, dtype=float))
    p = fit.model.n_features
    labels = np.argmax(component_log_densities(points, fit.model), axis=1)
    dist2 = component_dist2(points, fit.model)[np.arange(points.shape[0]), labels]
    residuals = np.full(points.shape[0], -1.0)
    for k in range(fit.n_components):
        members = labels == k
        samples = fit.cond_dist2[fit.assignments == k + 1]
        if not members.any() or samples.size == 0:
            continue
        kde = kde_boundary(dist2[members], samples, config.kernel)
        reference = reference_density(dist2[members], p, config.kernel)
        residuals[members] = pearson_residuals(dist2[members], p, kde, reference)
    return residuals


def root_score(fit: FitResult, config: FitConfig, rng: np.random.Generator) -> float:
    """Monte Carlo estimate of Pr[delta < -0.95] under the fitted mixture."""
    draws, _ = sample_mixture(fit.model, config.root_mc_draws, rng)
    return float(np.mean(conditional_residuals(draws, fit, config) < STRONGLY_NEGATIVE))


def empirical_root_score(fit: FitResult, data: np.ndarray, config: FitConfig) -> float:
    """Fraction of the observed rows with delta < -0.95."""
    return float(np.mean(conditional_residuals(data, fit, config) < STRONGLY_NEGATIVE))


def select_root(results: list[FitResult], data: np.ndarray, config: FitConfig) -> FitResult:
    """Pick the root with the lowest probability of strongly negative residuals.

    Roots with mean conditional weight below 0.25 are discarded first. Every
    survivor is scored on the same Monte Carlo stream (seeded by
    `config.seed`); ties go to the higher weighted log-likelihood.

    Raises:
        AllRootsDegenerate: if the list is empty or no root survives
    """
    survivors = []
    for index, fit in enumerate(results):
        mean_weight = float(np.mean(fit.cond_weights))
        if mean_weight < MIN_MEAN_WEIGHT:
            logger.warning("root %d discarded as degenerate (mean weight %.3f)", index, mean_weight)
            continue
        survivors.append(fit)
    if not survivors:
        raise AllRootsDegenerate(f"none of {len(results)} roots has mean weight >= {MIN_MEAN_WEIGHT}")

    scored = []
    for fit in survivors:
        rng = np.random.default_rng(config.seed)
        scored.append(fit.model_copy(update={
            "root_score": root_score(fit, config, rng),
            "root_score_empirical": empirical_root_score(fit, data, config),
        }))
    best = min(scored, key=lambda fit: (fit.root_score, -fit.weighted_loglik))
    logger.info("selected root with score %.4f among %d survivors", best.root_score, len(scored))
    return best
