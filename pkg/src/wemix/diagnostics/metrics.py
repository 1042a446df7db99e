"""Clustering accuracy measures and the per-rule clustering report."""

from typing import Optional

import numpy as np
from sklearn.metrics import rand_score

from wemix.diagnostics.detection import OUTLIER, classify, detect_outliers, detection_errors
from wemix.errors import FewerThanTwoPoints, KMismatch
from wemix.models.fit_result import FitResult
from wemix.schemas.documents import ClusteringReport
from wemix.schemas.options import DetectionRule


def _masked(labels_a, labels_b, mask) -> tuple[np.ndarray, np.ndarray]:
    labels_a = np.asarray(labels_a).reshape(-1)
    labels_b = np.asarray(labels_b).reshape(-1)
    mask = np.ones(labels_a.shape, dtype=bool) if mask is None else np.asarray(mask, dtype=bool)
    if not (labels_a.shape == labels_b.shape == mask.shape):
        raise ValueError("labelings and mask must have the same length")
    return labels_a[mask], labels_b[mask]


def rand_index(labels_a, labels_b, mask=None) -> float:
    """Rand index over the masked-in points.

    Raises:
        FewerThanTwoPoints: if fewer than two points survive the mask
    """
    a, b = _masked(labels_a, labels_b, mask)
    if a.size < 2:
        raise FewerThanTwoPoints(f"rand index needs two points, {a.size} left after masking")
    return float(rand_score(a, b))


def mce(labels_fit, labels_truth, mask=None, k_fit: Optional[int] = None,
        k_truth: Optional[int] = None) -> float:
    """Misclassification error rate over the masked-in points.

    Both labelings are expected in 1..K (OUTLIER = 0 for excluded points)
    and already aligned. Without explicit component counts, K is read off
    the largest label of each labeling.

    Raises:
        KMismatch: if the two labelings use a different number of components
    """
    if k_fit is None:
        k_fit = int(np.max(labels_fit, initial=OUTLIER))
    if k_truth is None:
        k_truth = int(np.max(labels_truth, initial=OUTLIER))
    if k_fit != k_truth:
        raise KMismatch(f"fit has {k_fit} components, truth has {k_truth}")
    fit, truth = _masked(labels_fit, labels_truth, mask)
    if fit.size == 0:
        return 0.0
    return float(np.mean(fit != truth))


def downweighting_level(fit: FitResult) -> float:
    """Empirical downweighting level 1 - mean(w)."""
    return fit.downweighting_level


def clustering_report(fit: FitResult, rule: DetectionRule, p: int,
                      truth_labels: Optional[np.ndarray] = None,
                      truth_outlier: Optional[np.ndarray] = None,
                      truth_components: Optional[int] = None) -> ClusteringReport:
    """Flags, labels and (with ground truth) error rates of one detection rule.

    Rand index and MCE are evaluated over true negatives: points that are
    genuine in the truth and not flagged by the rule. `truth_components`
    defaults to the K of the fit.
    """
    flags = detect_outliers(fit, rule, p)
    labels = classify(fit, rule, p)
    eps_hat = float(np.mean(flags))
    fields = dict(
        rule=rule.label,
        flags=flags,
        labels=labels,
        eps_hat=eps_hat,
        downweighting=downweighting_level(fit),
    )
    if truth_outlier is not None:
        truth_outlier = np.asarray(truth_outlier, dtype=bool)
        _, fields["swamping"], fields["masking"] = detection_errors(flags, truth_outlier)
    if truth_labels is not None:
        outliers = np.zeros(flags.shape, dtype=bool) if truth_outlier is None else truth_outlier
        mask = ~outliers & ~flags
        if mask.sum() >= 2:
            fields["rand"] = rand_index(fit.assignments, truth_labels, mask)
            fields["mce"] = mce(fit.assignments, truth_labels, mask, k_fit=fit.n_components,
                                k_truth=truth_components or fit.n_components)
    return ClusteringReport(**fields)
