"""Eigen-ratio constraint on the component covariance matrices."""

from typing import Optional

import numpy as np


def truncation_deviance(eigenvalues: np.ndarray, counts: np.ndarray, m: float, c: float) -> float:
    """Deviance sum_k n_k sum_j (log lambda*_jk + lambda_jk / lambda*_jk) for level m."""
    truncated = np.clip(eigenvalues, m, c * m)
    return float(np.sum(counts[:, None] * (np.log(truncated) + eigenvalues / truncated)))


def optimal_truncation_level(eigenvalues: np.ndarray, counts: np.ndarray, c: float) -> float:
    """Lower truncation level m minimising the deviance over [m, c m] truncations.

    Between consecutive breakpoints {lambda_jk, lambda_jk / c} the sets of
    eigenvalues truncated from below and from above are fixed, and the
    stationary point has the closed form

        m = sum n_k (sum_{lambda < m} lambda + sum_{lambda > c m} lambda / c)
            / sum n_k (#{lambda < m} + #{lambda > c m}),

    so one candidate per interval (2 K p + 1 of them) is evaluated.
    """
    weights = np.broadcast_to(counts[:, None], eigenvalues.shape).ravel()
    values = eigenvalues.ravel()
    breakpoints = np.unique(np.concatenate([values, values / c]))
    bounds = np.concatenate([[0.0], breakpoints, [np.inf]])

    best_m, best_deviance = None, np.inf
    for low, high in zip(bounds[:-1], bounds[1:]):
        trial_m = high / 2.0 if low == 0.0 else (2.0 * low if np.isinf(high) else 0.5 * (low + high))
        below = values < trial_m
        above = values > c * trial_m
        denominator = np.sum(weights[below]) + np.sum(weights[above])
        if denominator > 0.0:
            m = (np.sum(weights[below] * values[below]) + np.sum(weights[above] * values[above]) / c) / denominator
            m = float(np.clip(m, low, high))
        else:
            m = float(trial_m)
        if m <= 0.0:
            continue
        deviance = truncation_deviance(eigenvalues, counts, m, c)
        if deviance < best_deviance:
            best_m, best_deviance = m, deviance
    return best_m


def eigen_ratio_enforce(covariances: np.ndarray, c: float,
                        counts: Optional[np.ndarray] = None) -> np.ndarray:
    """Truncate the pooled eigenvalues so that max/min over all components is at most c.

    Args:
        covariances: K x p x p symmetric matrices
        c: Eigen-ratio bound, c >= 1
        counts: Soft component sizes weighting the truncation deviance
            (equal weights when omitted)

    Returns:
        Constrained covariances. Eigenvectors are kept; input that already
        satisfies the bound is returned as is.
    """
    covariances = np.asarray(covariances, dtype=float)
    eigenvalues, eigenvectors = np.linalg.eigh(covariances)
    eigenvalues = np.maximum(eigenvalues, 0.0)
    largest, smallest = eigenvalues.max(), eigenvalues.min()
    if smallest > 0.0 and largest <= c * smallest:
        return covariances

    counts = np.ones(covariances.shape[0]) if counts is None else np.asarray(counts, dtype=float)
    if counts.sum() <= 0.0:
        counts = np.ones(covariances.shape[0])
    m = optimal_truncation_level(eigenvalues, counts, c)
    if m is None:
        # every eigenvalue vanished; nothing sensible to truncate to
        return covariances
    truncated = np.clip(eigenvalues, m, c * m)
    constrained = np.einsum("kij,kj,klj->kil", eigenvectors, truncated, eigenvectors)
    return 0.5 * (constrained + np.transpose(constrained, (0, 2, 1)))
