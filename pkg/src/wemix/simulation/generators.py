"""Data generators: the three-component benchmark designs and uniform background noise."""

import logging
from typing import Sequence

import numpy as np

from wemix.errors import DimensionTooSmall, RejectionBudgetExceeded, TooFewRows
from wemix.estimation.density import chi2_quantile, component_dist2, sample_mixture
from wemix.models.mixture import MixtureModel

logger = logging.getLogger(__name__)

# Rejection-sampling attempts allowed per requested outlier
REJECTION_BUDGET = 1_000_000

M5_WEIGHTS = (0.2, 0.4, 0.4)


def m5_truth(p: int, beta: float, weights: Sequence[float] = M5_WEIGHTS) -> MixtureModel:
    """M5 design: three p-variate Gaussians whose overlap is governed by beta.

    Raises:
        DimensionTooSmall: if p < 2
    """
    if p < 2:
        raise DimensionTooSmall(f"the M5 design needs p >= 2, got {p}")
    means = np.zeros((3, p))
    means[0, :2] = (-beta, -beta)
    means[1, :2] = (0.0, beta)
    means[2, :2] = (beta, 0.0)
    covariances = np.stack([np.eye(p)] * 3)
    covariances[0, :2, :2] = [[15.0, -10.0], [-10.0, 15.0]]
    covariances[2, :2, :2] = [[45.0, 0.0], [0.0, 30.0]]
    return MixtureModel(weights=np.asarray(weights, dtype=float), means=means, covariances=covariances)


def example4_truth() -> MixtureModel:
    """Bivariate three-component mixture with a true eigen-ratio of 9.5."""
    return MixtureModel(
        weights=[0.2, 0.3, 0.5],
        means=[[-5.0, 0.0], [0.0, -5.0], [5.0, 0.0]],
        covariances=[
            [[1.0, -0.5], [-0.5, 1.0]],
            [[2.0, 1.25], [1.25, 2.0]],
            [[3.0, -1.75], [-1.75, 3.0]],
        ],
    )


def _draw(truth: MixtureModel, n: int, seed: int) -> tuple[np.ndarray, np.ndarray, MixtureModel]:
    rng = np.random.default_rng(seed)
    data, labels = sample_mixture(truth, n, rng)
    order = rng.permutation(n)
    return data[order], labels[order] + 1, truth


def gen_m5(p: int, beta: float, n: int, weights: Sequence[float] = M5_WEIGHTS,
           seed: int = 0) -> tuple[np.ndarray, np.ndarray, MixtureModel]:
    """Sample n rows of the M5 design.

    Returns:
        (data, labels in 1..3, truth)

    Raises:
        DimensionTooSmall: if p < 2
        TooFewRows: if n < 3(p + 1)
    """
    truth = m5_truth(p, beta, weights)
    if n < 3 * (p + 1):
        raise TooFewRows(f"need at least {3 * (p + 1)} rows, got {n}")
    return _draw(truth, n, seed)


def gen_example4(n: int, seed: int = 0) -> tuple[np.ndarray, np.ndarray, MixtureModel]:
    """Sample n rows of the bivariate three-component example."""
    if n < 12:
        raise TooFewRows(f"need at least 12 rows, got {n}")
    return _draw(example4_truth(), n, seed)


def n_outliers(n_clean: int, eps: float, of_total: bool = True) -> int:
    """Number of outliers to append so that eps is the contamination rate.

    With `of_total` eps is a fraction of the final sample, otherwise of the clean part.
    """
    if eps == 0.0:
        return 0
    if of_total:
        return round(n_clean * eps / (1.0 - eps))
    return round(n_clean * eps)


def contaminate(clean: np.ndarray, truth: MixtureModel, eps: float, quantile: float = 0.99,
                seed: int = 0, of_total: bool = True) -> tuple[np.ndarray, np.ndarray]:
    """Append uniform background noise away from every component.

    Outliers are drawn uniformly on the bounding box of the clean data and
    kept only when their smallest squared distance to a component exceeds the
    chi-square(p) quantile at `quantile`.

    Returns:
        (data with outliers appended, outlier flags)

    Raises:
        RejectionBudgetExceeded: after 10^6 attempts per requested outlier
    """
    clean = np.asarray(clean, dtype=float)
    if not (0.0 <= eps < 1.0):
        raise ValueError(f"contamination rate must lie in [0, 1), got {eps}")
    count = n_outliers(clean.shape[0], eps, of_total)
    if count == 0:
        return clean, np.zeros(clean.shape[0], dtype=bool)

    rng = np.random.default_rng(seed)
    low, high = clean.min(axis=0), clean.max(axis=0)
    cutoff = chi2_quantile(quantile, clean.shape[1])
    accepted: list[np.ndarray] = []
    found, attempts, budget = 0, 0, REJECTION_BUDGET * count
    while found < count:
        if attempts >= budget:
            raise RejectionBudgetExceeded(f"only {found} of {count} outliers after {attempts} draws")
        batch = int(min(max(1024, 4 * (count - found)), budget - attempts))
        candidates = rng.uniform(low, high, size=(batch, clean.shape[1]))
        attempts += batch
        keep = candidates[component_dist2(candidates, truth).min(axis=1) > cutoff]
        accepted.append(keep[:count - found])
        found += min(keep.shape[0], count - found)
    outliers = np.vstack(accepted)
    logger.debug("drew %d outliers in %d attempts", count, attempts)
    flags = np.concatenate([np.zeros(clean.shape[0], dtype=bool), np.ones(count, dtype=bool)])
    return np.vstack([clean, outliers]), flags
