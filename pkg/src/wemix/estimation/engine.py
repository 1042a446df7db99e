"""WEM and WCEM iterations, with plain EM and CEM as non-robust baselines."""

import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Optional, Sequence

import numpy as np
from pydantic import ValidationError
from scipy.special import logsumexp

from wemix.errors import (
    AllRootsDegenerate,
    DegenerateComponent,
    DomainError,
    EmptySample,
    SingularCovariance,
    TooFewRows,
)
from wemix.estimation.constraints import eigen_ratio_enforce
from wemix.estimation.density import component_dist2, component_log_densities
from wemix.estimation.downweight import (
    kde_boundary,
    pearson_residuals,
    reference_density,
    weight_values,
)
from wemix.models.fit_result import FitResult
from wemix.models.mixture import MixtureModel
from wemix.schemas.options import FitConfig
from wemix.utils.validation import is_finite_matrix

logger = logging.getLogger(__name__)

# A component whose weighted mass falls below this fraction of n is degenerate
DEGENERATE_MASS = 1e-8

# Relative noise added to the means of perturbed user-supplied starts
PERTURBATION_SD = 0.10


def _posterior_from_logs(log_dens: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    log_mix = logsumexp(log_dens, axis=1)
    underflow = ~np.isfinite(log_mix)
    with np.errstate(invalid="ignore"):
        posterior = np.exp(log_dens - log_mix[:, None])
    if np.any(underflow):
        logger.warning("all component densities underflow for %d rows; using uniform posteriors",
                       int(underflow.sum()))
        posterior[underflow] = 1.0 / log_dens.shape[1]
    return posterior, log_mix


def e_step(data: np.ndarray, model: MixtureModel) -> np.ndarray:
    """Posterior membership probabilities u_ik, computed in log space."""
    posterior, _ = _posterior_from_logs(component_log_densities(data, model))
    return posterior


def c_step(posterior: np.ndarray) -> np.ndarray:
    """One-hot assignment to the most probable component (ties go to the lowest index)."""
    posterior = np.asarray(posterior, dtype=float)
    hard = np.zeros_like(posterior)
    hard[np.arange(posterior.shape[0]), np.argmax(posterior, axis=1)] = 1.0
    return hard


def _weights_from_kde(dist2: np.ndarray, samples: np.ndarray, p: int, config: FitConfig,
                      sample_weights: Optional[np.ndarray] = None) -> np.ndarray:
    kde = kde_boundary(dist2, samples, config.kernel, sample_weights=sample_weights)
    reference = reference_density(dist2, p, config.kernel)
    return weight_values(pearson_residuals(dist2, p, kde, reference), config.raf)


def conditional_weights(dist2: np.ndarray, labels: np.ndarray, p: int, config: FitConfig,
                        min_members: int = 2) -> np.ndarray:
    """Weights of each point w.r.t. its assigned component (labels are 0-based).

    The KDE of component k only uses the squared distances of the points
    currently assigned to k.
    """
    n, n_components = dist2.shape
    weights = np.ones(n)
    for k in range(n_components):
        members = labels == k
        count = int(members.sum())
        if count == 0 and min_members <= 1:
            continue
        if count < min_members:
            raise DegenerateComponent(f"cluster {k + 1} has {count} assigned points")
        own = dist2[members, k]
        weights[members] = _weights_from_kde(own, own, p, config)
    return weights


def soft_trim(data: np.ndarray, model: MixtureModel, config: FitConfig,
              assignments: Optional[np.ndarray] = None,
              posterior: Optional[np.ndarray] = None) -> np.ndarray:
    """Pearson-residual weights of the current fit.

    WEM returns an n x K matrix: the KDE of component k is built from the whole
    column of squared distances d2_ik, each weighted by the posterior u_ik.
    WCEM returns an n-vector: each point is weighed against the KDE of the
    points assigned to the same cluster. `assignments` are labels in 1..K and
    are required for WCEM. EM/CEM return unit weights of the matching shape.

    Raises:
        DegenerateComponent: if a WCEM cluster has fewer than 2 points, or a WEM
            component carries no posterior mass
    """
    data = np.asarray(data, dtype=float)
    n, p = data.shape
    classification = config.classification
    if classification and assignments is None:
        raise DomainError("assignments are required for classification algorithms")
    if not config.weighted:
        return np.ones(n) if classification else np.ones((n, model.n_components))

    dist2 = component_dist2(data, model)
    if classification:
        labels = np.asarray(assignments, dtype=int) - 1
        return conditional_weights(dist2, labels, p, config, min_members=2)

    if posterior is None:
        posterior = e_step(data, model)
    weights = np.empty_like(dist2)
    for k in range(model.n_components):
        if posterior[:, k].sum() <= 0.0:
            raise DegenerateComponent(f"component {k + 1} has no posterior mass")
        weights[:, k] = _weights_from_kde(dist2[:, k], dist2[:, k], p, config,
                                          sample_weights=posterior[:, k])
    return weights


def m_step_weighted(data: np.ndarray, posterior: np.ndarray, weights: np.ndarray,
                    config: FitConfig) -> MixtureModel:
    """Weighted update of mixing weights, means and covariances.

    `weights` is n x K (component-wise, WEM) or an n-vector (one weight per
    point, WCEM). The covariances are then put under the eigen-ratio
    constraint, with the soft counts sum_i u_ik w_ik as deviance weights.

    Raises:
        DegenerateComponent: if a component's weighted mass is below 1e-8 n
    """
    data = np.asarray(data, dtype=float)
    n, p = data.shape
    weights = np.asarray(weights, dtype=float)
    if weights.ndim == 1:
        weights = weights[:, None]
    resp = posterior * weights
    nk = resp.sum(axis=0)
    if np.any(nk < DEGENERATE_MASS * n):
        raise DegenerateComponent(f"component mass {nk.min():.3g} below {DEGENERATE_MASS} * n")

    means = resp.T @ data / nk[:, None]
    n_components = resp.shape[1]
    covariances = np.empty((n_components, p, p))
    for k in range(n_components):
        diff = data - means[k]
        covariances[k] = np.dot(resp[:, k] * diff.T, diff) / nk[k]
    covariances = 0.5 * (covariances + np.transpose(covariances, (0, 2, 1)))

    if config.unbias_cov:
        effective = nk - np.sum(resp ** 2, axis=0) / nk
        if np.any(effective <= 0.0):
            raise DegenerateComponent("not enough effective observations for the unbiased covariance")
        covariances *= (nk / effective)[:, None, None]

    covariances = eigen_ratio_enforce(covariances, config.eigen_ratio, counts=nk)
    if np.any(np.linalg.eigvalsh(covariances)[:, -1] <= 0.0):
        raise DegenerateComponent("a covariance matrix collapsed to zero")
    try:
        return MixtureModel(weights=nk / nk.sum(), means=means, covariances=covariances)
    except ValidationError as e:
        raise DegenerateComponent(str(e)) from e


def _random_start(data: np.ndarray, n_components: int, config: FitConfig,
                  rng: np.random.Generator) -> MixtureModel:
    n, p = data.shape
    rows = rng.choice(n, size=n_components * (p + 1), replace=False)
    groups = data[rows].reshape(n_components, p + 1, p)
    feature_var = np.var(data, axis=0)
    feature_var = np.where(feature_var > 0.0, feature_var, 1.0)
    means = groups.mean(axis=1)
    variances = groups.var(axis=1, ddof=1)
    variances = np.where(variances > 0.0, variances, feature_var)
    covariances = np.stack([np.diag(v) for v in variances])
    covariances = eigen_ratio_enforce(covariances, config.eigen_ratio)
    return MixtureModel(
        weights=np.full(n_components, 1.0 / n_components),
        means=means,
        covariances=covariances,
    )


def init_candidates(data: np.ndarray, n_components: int, config: FitConfig,
                    starts: Optional[Sequence[MixtureModel]] = None) -> list[MixtureModel]:
    """Starting values: user-supplied starts followed by n_starts generated ones.

    Generated candidate i uses the RNG stream seed + i. Without user starts
    every candidate comes from K(p+1) rows sampled without replacement and
    split at random into K groups (group means, diagonal group variances).
    With user starts, odd-indexed candidates are instead copies of a user
    start whose means get Gaussian noise with sd 10% of each feature's sd.

    Raises:
        DomainError: if the data is not a finite n x p matrix
        TooFewRows: if n < K(p+1)
    """
    data = np.asarray(data, dtype=float)
    if not is_finite_matrix(data):
        raise DomainError("data must be a non-empty matrix of finite values")
    n, p = data.shape
    if n < n_components * (p + 1):
        raise TooFewRows(f"need at least {n_components * (p + 1)} rows for K={n_components}, got {n}")
    user = list(starts or [])
    feature_sd = np.std(data, axis=0)
    candidates = list(user)
    for index in range(config.n_starts):
        rng = np.random.default_rng(config.seed + index)
        if user and index % 2 == 1:
            base = user[(index // 2) % len(user)]
            noise = rng.normal(0.0, PERTURBATION_SD * feature_sd, size=base.means.shape)
            candidates.append(MixtureModel(
                weights=base.weights,
                means=base.means + noise,
                covariances=base.covariances,
            ))
        else:
            candidates.append(_random_start(data, n_components, config, rng))
    return candidates


def _objective(log_dens: np.ndarray, log_mix: np.ndarray, labels: np.ndarray,
               weights: np.ndarray, config: FitConfig) -> float:
    rows = np.arange(labels.shape[0])
    cond = weights[rows, labels] if weights.ndim == 2 else weights
    if config.classification:
        return float(np.sum(cond * log_dens[rows, labels]))
    return float(np.sum(cond * log_mix))


def _finalize(data: np.ndarray, model: MixtureModel, config: FitConfig, trace: list[float],
              converged: bool, n_iter: int) -> FitResult:
    n, p = data.shape
    log_dens = component_log_densities(data, model)
    posterior, log_mix = _posterior_from_logs(log_dens)
    labels = np.argmax(posterior, axis=1)
    rows = np.arange(n)
    dist2 = component_dist2(data, model)
    cond_dist2 = dist2[rows, labels]
    if config.weighted:
        cond_weights = conditional_weights(dist2, labels, p, config, min_members=1)
    else:
        cond_weights = np.ones(n)
    return FitResult(
        algorithm=config.algorithm,
        model=model,
        assignments=labels + 1,
        posterior=posterior,
        cond_weights=cond_weights,
        cond_dist2=cond_dist2,
        weighted_loglik=float(np.sum(cond_weights * log_mix)),
        weighted_class_loglik=float(np.sum(cond_weights * log_dens[rows, labels])),
        trace=trace,
        converged=converged,
        n_iter=n_iter,
    )


def fit_once(data: np.ndarray, n_components: int, start: MixtureModel, config: FitConfig) -> FitResult:
    """Iterate from one starting value until the weighted objective settles.

    Each iteration runs the E-step (plus the C-step for wcem/cem), the soft
    trimming and the weighted M-step. The objective is the weighted mixture
    log-likelihood sum_i w_ik_i log m(y_i) for wem/em and the weighted
    classification log-likelihood for wcem/cem; iterations stop when its
    relative change |dQ| / (|Q| + 1) drops below rel_tol or after max_iter.

    Raises:
        DegenerateComponent: when a component collapses along the way
    """
    data = np.asarray(data, dtype=float)
    n, p = data.shape
    if start.n_components != n_components or start.n_features != p:
        raise DomainError("starting model does not match K or the data dimension")

    model = start
    trace: list[float] = []
    previous: Optional[float] = None
    converged = False
    iteration = 0
    for iteration in range(1, config.max_iter + 1):
        log_dens = component_log_densities(data, model)
        posterior, log_mix = _posterior_from_logs(log_dens)
        labels = np.argmax(posterior, axis=1)
        if config.classification:
            posterior = c_step(posterior)
            weights = soft_trim(data, model, config, assignments=labels + 1)
        else:
            weights = soft_trim(data, model, config, posterior=posterior)

        objective = _objective(log_dens, log_mix, labels, weights, config)
        trace.append(objective)
        logger.debug("%s iteration %d: objective %.10g", config.algorithm, iteration, objective)
        if previous is not None and abs(objective - previous) / (abs(previous) + 1.0) < config.rel_tol:
            converged = True
            break
        previous = objective
        model = m_step_weighted(data, posterior, weights, config)

    if not converged:
        logger.info("%s stopped after %d iterations without converging", config.algorithm, iteration)
    return _finalize(data, model, config, trace, converged, iteration)


def fit(data: np.ndarray, n_components: int, config: FitConfig,
        starts: Optional[Sequence[MixtureModel]] = None,
        threads: Optional[int] = None) -> FitResult:
    """Multi-start fit followed by root selection.

    Candidates run on a thread pool; results are gathered in start order so
    the outcome does not depend on the number of threads.

    Raises:
        AllRootsDegenerate: if every candidate degenerates or is discarded
    """
    from wemix.estimation.roots import select_root

    data = np.asarray(data, dtype=float)
    candidates = init_candidates(data, n_components, config, starts=starts)

    def run(indexed: tuple[int, MixtureModel]) -> Optional[FitResult]:
        index, start = indexed
        try:
            return fit_once(data, n_components, start, config)
        except (DegenerateComponent, SingularCovariance, EmptySample) as e:
            logger.warning("start %d discarded: %s", index, e)
            return None

    with ThreadPoolExecutor(max_workers=max(1, threads or 1)) as pool:
        results = [r for r in pool.map(run, enumerate(candidates)) if r is not None]
    if not results:
        raise AllRootsDegenerate(f"all {len(candidates)} starts degenerated")
    logger.info("%d of %d starts converged to a usable root", len(results), len(candidates))
    return select_root(results, data, config)
