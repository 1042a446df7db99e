"""Outlier detection rules applied conditionally on the final cluster assignment."""

import logging

import numpy as np

from wemix.estimation.density import chi2_quantile
from wemix.models.fit_result import FitResult
from wemix.schemas.options import DetectionRule

logger = logging.getLogger(__name__)

# Label given to flagged observations; components are labelled 1..K
OUTLIER = 0


def resolve_threshold(fit: FitResult, rule: DetectionRule) -> float:
    """Numeric weight cut-off of a weight rule; "adaptive" is 1 - mean(w)."""
    if rule.threshold == "adaptive":
        return fit.downweighting_level
    return float(rule.threshold)


def detect_outliers(fit: FitResult, rule: DetectionRule, p: int) -> np.ndarray:
    """Boolean outlier flags.

    chi2 flags d2_ik_i > chi2_{p; 1 - alpha}; weight flags w_ik_i < threshold.
    """
    if rule.kind == "chi2":
        cutoff = chi2_quantile(1.0 - rule.alpha, p)
        flags = fit.cond_dist2 > cutoff
    else:
        flags = fit.cond_weights < resolve_threshold(fit, rule)
    logger.debug("rule %s flagged %d of %d points", rule.label, int(flags.sum()), flags.size)
    return flags


def classify(fit: FitResult, rule: DetectionRule, p: int) -> np.ndarray:
    """Final labels: the fitted assignment, or OUTLIER for flagged points."""
    return np.where(detect_outliers(fit, rule, p), OUTLIER, fit.assignments)


def _rate(count: int, total: int) -> float:
    return float(count) / total if total else 0.0


def detection_errors(flags: np.ndarray, truth_outlier: np.ndarray) -> tuple[float, float, float]:
    """(eps_hat, swamping, masking).

    Swamping is the flagged fraction of genuine points, masking the unflagged
    fraction of true outliers; an empty group gives a rate of 0.
    """
    flags = np.asarray(flags, dtype=bool)
    truth_outlier = np.asarray(truth_outlier, dtype=bool)
    if flags.shape != truth_outlier.shape:
        raise ValueError("flags and truth must have the same length")
    genuine = ~truth_outlier
    eps_hat = float(np.mean(flags)) if flags.size else 0.0
    swamping = _rate(int(np.sum(flags & genuine)), int(genuine.sum()))
    masking = _rate(int(np.sum(~flags & truth_outlier)), int(truth_outlier.sum()))
    return eps_hat, swamping, masking
