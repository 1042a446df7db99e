"""Monte Carlo studies: generate, contaminate, fit, align and score."""

import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Optional, Union

import numpy as np
import pandas as pd
from scipy import linalg

from wemix.diagnostics.metrics import clustering_report
from wemix.errors import KMismatch, WemixError
from wemix.estimation.engine import fit
from wemix.models.fit_result import FitResult
from wemix.models.mixture import MixtureModel
from wemix.schemas.documents import StudyAggregate, StudyReport, TrialRecord
from wemix.schemas.simulation import SimScenario, StudySpec
from wemix.simulation.generators import contaminate, gen_example4, gen_m5

logger = logging.getLogger(__name__)

METRICS = ("mu_err", "sigma_err", "pi_err", "rand", "mce", "eps_hat", "swamping", "masking", "downweighting")


def log_eigen_ratio(fitted: np.ndarray, truth: np.ndarray) -> float:
    """log(lambda_max / lambda_min) of Sigma_hat Sigma^-1, zero when Sigma_hat is a multiple of Sigma."""
    eigenvalues = linalg.eigh(fitted, truth, eigvals_only=True)
    return float(np.log(eigenvalues[-1] / eigenvalues[0]))


def accuracy_metrics(fitted: Union[FitResult, MixtureModel], truth: MixtureModel) -> tuple[float, float, float]:
    """(mu_err, sigma_err, pi_err) of an aligned fit.

    mu_err is the Frobenius norm of the mean differences, sigma_err the mean
    over k of the log ratio of the extreme eigenvalues of Sigma_hat_k Sigma_k^-1
    (a generalized symmetric eigenproblem) and pi_err the Euclidean norm of
    the weight differences.

    Raises:
        KMismatch: if the fit and the truth have different K
    """
    model = fitted.model if isinstance(fitted, FitResult) else fitted
    if model.n_components != truth.n_components:
        raise KMismatch(f"fit has {model.n_components} components, truth has {truth.n_components}")
    mu_err = float(np.linalg.norm(model.means - truth.means))
    sigma_err = float(np.mean([
        log_eigen_ratio(model.covariances[k], truth.covariances[k]) for k in range(truth.n_components)
    ]))
    pi_err = float(np.linalg.norm(model.weights - truth.weights))
    return mu_err, sigma_err, pi_err


def label_align(result: FitResult) -> FitResult:
    """Relabel components so that the first mean coordinates are nondecreasing."""
    order = np.argsort(result.model.means[:, 0], kind="stable")
    if np.array_equal(order, np.arange(order.size)):
        return result
    rank = np.empty_like(order)
    rank[order] = np.arange(order.size)
    return result.model_copy(update={
        "model": result.model.permuted(order),
        "assignments": rank[result.assignments - 1] + 1,
        "posterior": result.posterior[:, order],
    })


def simulate_scenario(scenario: SimScenario, seed: int, noise_seed: int
                      ) -> tuple[np.ndarray, np.ndarray, np.ndarray, MixtureModel]:
    """Clean draw plus background noise.

    Returns:
        (data, truth labels with 0 for outliers, outlier flags, truth)
    """
    if scenario.scheme == "example4":
        clean, labels, truth = gen_example4(scenario.n_clean, seed=seed)
    else:
        clean, labels, truth = gen_m5(scenario.p, scenario.beta, scenario.n_clean, seed=seed)
    data, outlier = contaminate(clean, truth, scenario.eps, scenario.outlier_quantile,
                                seed=noise_seed, of_total=scenario.eps_of_total)
    truth_labels = np.concatenate([labels, np.zeros(int(outlier.sum()), dtype=int)])
    return data, truth_labels, outlier, truth


def trial_seeds(scenario_seed: int, trial: int) -> tuple[int, int, int]:
    """Data, noise and fit seeds of one trial, derived from (scenario seed, trial index)."""
    state = np.random.SeedSequence([scenario_seed, trial]).generate_state(3, dtype=np.uint32)
    return int(state[0]), int(state[1]), int(state[2])


def run_trial(scenario: SimScenario, trial: int, spec: StudySpec) -> tuple[list[TrialRecord], int]:
    """One pipeline run for every configured algorithm; returns (records, failed algorithms)."""
    data_seed, noise_seed, fit_seed = trial_seeds(scenario.seed, trial)
    data, truth_labels, outlier, truth = simulate_scenario(scenario, data_seed, noise_seed)
    records, failures = [], 0
    for algorithm in spec.algorithms:
        config = spec.fit.model_copy(update={"algorithm": algorithm, "seed": fit_seed})
        try:
            result = label_align(fit(data, truth.n_components, config, threads=1))
            mu_err, sigma_err, pi_err = accuracy_metrics(result, truth)
            for rule in spec.rules:
                report = clustering_report(result, rule, scenario.p, truth_labels, outlier,
                                           truth_components=truth.n_components)
                records.append(TrialRecord(
                    scenario=scenario.label, trial=trial, seed=fit_seed, algorithm=algorithm,
                    rule=rule.label, mu_err=mu_err, sigma_err=sigma_err, pi_err=pi_err,
                    rand=report.rand, mce=report.mce, eps_hat=report.eps_hat,
                    swamping=report.swamping, masking=report.masking,
                    downweighting=report.downweighting,
                ))
        except WemixError as e:
            logger.warning("trial %d of %s failed for %s: %s", trial, scenario.label, algorithm, e)
            failures += 1
    return records, failures


def aggregate(records: list[TrialRecord]) -> list[StudyAggregate]:
    """Means over successful trials per (scenario, algorithm, rule)."""
    if not records:
        return []
    frame = pd.DataFrame([r.model_dump() for r in records])
    frame[list(METRICS)] = frame[list(METRICS)].astype(float)
    keys = ["scenario", "algorithm", "rule"]
    grouped = frame.sort_values(keys + ["trial"]).groupby(keys, sort=True)
    means = grouped[list(METRICS)].mean()
    counts = grouped["trial"].count()
    aggregates = []
    for key, row in means.iterrows():
        values = {m: (None if pd.isna(row[m]) else float(row[m])) for m in METRICS}
        aggregates.append(StudyAggregate(**dict(zip(keys, key)), n_trials=int(counts[key]), **values))
    return aggregates


def run_study(spec: StudySpec, threads: Optional[int] = None) -> StudyReport:
    """Run spec.n_trials trials of every scenario, trials in parallel.

    Each trial draws its own seeds from (scenario seed, trial index), so the
    report does not depend on the number of threads or the completion order.
    """
    tasks = [(scenario, trial) for scenario in spec.scenarios for trial in range(spec.n_trials)]
    with ThreadPoolExecutor(max_workers=max(1, threads or 1)) as pool:
        outcomes = list(pool.map(lambda task: run_trial(task[0], task[1], spec), tasks))

    records = [record for trial_records, _ in outcomes for record in trial_records]
    n_failures = sum(failures for _, failures in outcomes)
    logger.info("study finished: %d records, %d failed fits", len(records), n_failures)
    config = spec.fit.echo()
    del config["algorithm"]
    config.update({
        "algorithms": list(spec.algorithms),
        "rules": [rule.label for rule in spec.rules],
        "scenarios": [scenario.label for scenario in spec.scenarios],
    })
    return StudyReport(
        config=config,
        n_trials=spec.n_trials,
        n_failures=n_failures,
        records=records,
        aggregates=aggregate(records),
    )
