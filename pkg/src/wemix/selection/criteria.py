"""Weighted information criteria."""

import math
from typing import Literal

import numpy as np

from wemix.estimation.density import log_likelihood, log_mixture_density
from wemix.models.fit_result import FitResult

Penalty = Literal["aic", "bic"]


def n_free_parameters(n_components: int, p: int) -> int:
    """Mixing weights, means and full covariance entries: (K-1) + Kp + Kp(p+1)/2."""
    return (n_components - 1) + n_components * p + n_components * p * (p + 1) // 2


def complexity_penalty(penalty: Penalty, n_components: int, p: int, n: int) -> float:
    nu = n_free_parameters(n_components, p)
    if penalty == "aic":
        return 2.0 * nu
    if penalty == "bic":
        return nu * math.log(n)
    raise ValueError(f"unknown penalty {penalty!r}; valid options: aic, bic")


def weighted_ic(fit: FitResult, data: np.ndarray, penalty: Penalty, n_components: int, p: int) -> float:
    """-2 sum_i w_ik_i log m(y_i; tau) + penalty, with the final conditional weights."""
    data = np.asarray(data, dtype=float)
    loglik = float(np.sum(fit.cond_weights * log_mixture_density(data, fit.model)))
    return -2.0 * loglik + complexity_penalty(penalty, n_components, p, data.shape[0])


def classical_ic(fit: FitResult, data: np.ndarray, penalty: Penalty, n_components: int, p: int) -> float:
    """The unweighted criterion of the same fit."""
    data = np.asarray(data, dtype=float)
    return -2.0 * log_likelihood(data, fit.model) + complexity_penalty(penalty, n_components, p, data.shape[0])
