"""Gaussian and mixture densities, Mahalanobis distances and the chi-square reference."""

import numpy as np
from scipy import special, stats

from wemix.errors import BoundarySingularity, DomainError, SingularCovariance
from wemix.models.mixture import MixtureModel
from wemix.utils.validation import is_near_singular

LOG_2PI = float(np.log(2.0 * np.pi))


def _checked_eigen(model: MixtureModel) -> tuple[np.ndarray, np.ndarray]:
    eigenvalues, eigenvectors = model.eigen
    for k in range(model.n_components):
        if is_near_singular(eigenvalues[k]):
            raise SingularCovariance(f"covariance of component {k + 1} is singular")
    return eigenvalues, eigenvectors


def mahalanobis_sq(point: np.ndarray, mean: np.ndarray, cov: np.ndarray) -> float:
    """Squared Mahalanobis distance (y - mu)' Sigma^-1 (y - mu).

    The inverse is taken through the eigendecomposition of `cov`.

    Raises:
        SingularCovariance: if the smallest eigenvalue is <= 1e-300 times the largest
    """
    eigenvalues, eigenvectors = np.linalg.eigh(np.asarray(cov, dtype=float))
    if is_near_singular(eigenvalues):
        raise SingularCovariance("covariance matrix is singular")
    diff = np.asarray(point, dtype=float) - np.asarray(mean, dtype=float)
    z = (eigenvectors.T @ diff) / np.sqrt(eigenvalues)
    return float(z @ z)


def component_dist2(data: np.ndarray, model: MixtureModel) -> np.ndarray:
    """n x K matrix of squared Mahalanobis distances of each row to each component."""
    data = np.atleast_2d(np.asarray(data, dtype=float))
    eigenvalues, eigenvectors = _checked_eigen(model)
    dist2 = np.empty((data.shape[0], model.n_components))
    for k in range(model.n_components):
        z = (data - model.means[k]) @ eigenvectors[k] / np.sqrt(eigenvalues[k])
        dist2[:, k] = np.einsum("ij,ij->i", z, z)
    return dist2


def component_log_densities(data: np.ndarray, model: MixtureModel) -> np.ndarray:
    """n x K matrix of log(pi_k) + log phi_p(y_i; mu_k, Sigma_k)."""
    eigenvalues, _ = _checked_eigen(model)
    dist2 = component_dist2(data, model)
    log_det = np.sum(np.log(eigenvalues), axis=1)
    with np.errstate(divide="ignore"):
        log_weights = np.log(model.weights)
    return log_weights - 0.5 * (model.n_features * LOG_2PI + log_det + dist2)


def log_mixture_density(data: np.ndarray, model: MixtureModel) -> np.ndarray:
    """log m(y_i; tau) for every row, accumulated with a max shift."""
    return special.logsumexp(component_log_densities(data, model), axis=1)


def mixture_density(point: np.ndarray, model: MixtureModel) -> float:
    """Mixture density m(y; tau) at a single point."""
    point = np.asarray(point, dtype=float).reshape(1, -1)
    return float(np.exp(log_mixture_density(point, model)[0]))


def log_likelihood(data: np.ndarray, model: MixtureModel) -> float:
    """Mixture log-likelihood sum_i log m(y_i; tau)."""
    data = np.atleast_2d(np.asarray(data, dtype=float))
    if data.shape[1] != model.n_features:
        raise DomainError(f"data has {data.shape[1]} columns, model expects {model.n_features}")
    return float(np.sum(log_mixture_density(data, model)))


def chi2_pdf(t: float, p: int) -> float:
    """Density of the chi-square distribution with p degrees of freedom.

    Raises:
        DomainError: for t < 0
        BoundarySingularity: for p = 1 at t = 0, where the density is unbounded
    """
    if t < 0:
        raise DomainError(f"chi-square density undefined at t={t}")
    if p == 1 and t == 0:
        raise BoundarySingularity("chi-square density with 1 dof is unbounded at 0")
    return float(stats.chi2.pdf(t, p))


def chi2_pdf_values(t: np.ndarray, p: int) -> np.ndarray:
    """Vectorised chi-square density; +inf at t = 0 when p = 1."""
    return stats.chi2.pdf(np.asarray(t, dtype=float), p)


def chi2_cdf(t: float, p: int) -> float:
    """Chi-square CDF through the regularized lower incomplete gamma function."""
    if t < 0:
        raise DomainError(f"chi-square CDF undefined at t={t}")
    return float(special.gammainc(p / 2.0, t / 2.0))


def chi2_quantile(prob: float, p: int) -> float:
    """Chi-square quantile: the t with chi2_cdf(t, p) = prob.

    Raises:
        DomainError: if prob is outside (0, 1)
    """
    if not (0.0 < prob < 1.0):
        raise DomainError(f"quantile level must lie in (0, 1), got {prob}")
    return float(2.0 * special.gammaincinv(p / 2.0, prob))


def sample_mixture(model: MixtureModel, n: int, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    """Draw n labelled observations from the mixture.

    Component sizes are multinomial; rows come out grouped by component.

    Returns:
        (n x p data, 0-based component labels)
    """
    if n < 1:
        raise DomainError(f"cannot draw {n} observations")
    sizes = rng.multinomial(n, model.weights)
    data = np.vstack([
        rng.multivariate_normal(model.means[k], model.covariances[k], size=int(size))
        for k, size in enumerate(sizes)
    ])
    labels = np.repeat(np.arange(model.n_components), sizes)
    return data, labels
