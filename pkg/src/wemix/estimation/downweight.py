"""Boundary-corrected KDE of squared distances, Pearson residuals, RAFs and weights."""

import logging
import math
from typing import Optional

import numpy as np
from scipy import integrate, stats

from wemix.errors import DomainError, EmptySample, ReferenceDensityZero
from wemix.estimation.density import chi2_pdf, chi2_pdf_values
from wemix.schemas.options import GKL_ML_TAU, KernelSpec, RafSpec

logger = logging.getLogger(__name__)

# Pearson residuals never go below this value
RESIDUAL_FLOOR = -1.0 + 1e-12

# Rows of the kernel matrix evaluated at once
_KERNEL_CHUNK = 512

# Squared distances are clamped to this value before taking logs
LOG_TRANSFORM_FLOOR = 1e-12


def _as_nonnegative(values, name: str) -> np.ndarray:
    values = np.asarray(values, dtype=float).reshape(-1)
    if np.any(values < 0) or np.any(np.isnan(values)):
        raise DomainError(f"{name} must be nonnegative")
    return values


def kernel_matrix(eval_points: np.ndarray, samples: np.ndarray, spec: KernelSpec) -> np.ndarray:
    """Kernel values k(t; s, h) for every (evaluation point, sample) pair."""
    t = np.asarray(eval_points, dtype=float).reshape(-1, 1)
    s = np.asarray(samples, dtype=float).reshape(1, -1)
    h = spec.h
    if spec.family == "folded-normal":
        return (stats.norm.pdf((t - s) / h) + stats.norm.pdf((t + s) / h)) / h
    if spec.family == "gamma":
        return stats.gamma.pdf(s, a=t / h + 1.0, scale=h)
    with np.errstate(divide="ignore"):
        return stats.norm.pdf((np.log(t) - np.log(s)) / h) / (h * t)


def kde_boundary(eval_points, samples, spec: KernelSpec,
                 sample_weights: Optional[np.ndarray] = None) -> np.ndarray:
    """Kernel density estimate on (0, inf) that is unbiased at the boundary.

    Args:
        eval_points: Nonnegative points t where the estimate is evaluated
        samples: Nonnegative squared distances s_i
        spec: Kernel family and bandwidth
        sample_weights: Optional nonnegative weights of the samples; the
            estimate is normalised by their sum

    Returns:
        Density estimates at eval_points

    Raises:
        EmptySample: if there are no samples (or all weights vanish)
        DomainError: for negative inputs
    """
    points = _as_nonnegative(eval_points, "evaluation points")
    samples = _as_nonnegative(samples, "samples")
    if samples.size == 0:
        raise EmptySample("kernel density estimate needs at least one sample")
    if sample_weights is not None:
        sample_weights = np.asarray(sample_weights, dtype=float).reshape(-1)
        if sample_weights.shape != samples.shape or np.any(sample_weights < 0):
            raise DomainError("sample weights must be nonnegative and match the samples")
        if sample_weights.sum() <= 0.0:
            raise EmptySample("all sample weights are zero")
    if points.size == 0:
        return np.empty(0)

    if spec.family == "log-transform":
        points = np.maximum(points, LOG_TRANSFORM_FLOOR)
        samples = np.maximum(samples, LOG_TRANSFORM_FLOOR)

    weights = np.ones_like(samples) if sample_weights is None else sample_weights
    weights = weights / weights.sum()
    out = np.empty(points.size)
    for start in range(0, points.size, _KERNEL_CHUNK):
        block = kernel_matrix(points[start:start + _KERNEL_CHUNK], samples, spec)
        out[start:start + _KERNEL_CHUNK] = block @ weights
    return out


def smoothed_reference(eval_points, p: int, spec: KernelSpec) -> np.ndarray:
    """The chi-square(p) density smoothed by the same kernel: int k(t; s, h) f(s) ds."""
    points = _as_nonnegative(eval_points, "evaluation points")
    if points.size == 0:
        return np.empty(0)

    def integrand(s: float) -> np.ndarray:
        if s <= 0.0:
            return np.zeros(points.size)
        return kernel_matrix(points, np.array([s]), spec)[:, 0] * stats.chi2.pdf(s, p)

    values, _ = integrate.quad_vec(integrand, 0.0, np.inf, epsabs=0.0, epsrel=1e-10, norm="max")
    return np.asarray(values)


def reference_density(dist2, p: int, spec: KernelSpec) -> np.ndarray:
    """Reference density of squared distances: raw chi-square or its smoothed version."""
    if spec.reference == "smoothed":
        return smoothed_reference(dist2, p, spec)
    return chi2_pdf_values(dist2, p)


def pearson_residuals(dist2, p: int, kde_values, reference_values=None) -> np.ndarray:
    """Vectorised Pearson residuals kde / reference - 1.

    A vanished reference density gives the +inf sentinel; the result is
    floored at -1 + 1e-12.
    """
    dist2 = np.asarray(dist2, dtype=float)
    kde_values = np.asarray(kde_values, dtype=float)
    reference = chi2_pdf_values(dist2, p) if reference_values is None else np.asarray(reference_values, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        delta = kde_values / reference - 1.0
    delta = np.where(reference <= 0.0, np.inf, delta)
    return np.maximum(delta, RESIDUAL_FLOOR)


def pearson_residual(d2: float, p: int, kde_value: float, strict: bool = False) -> float:
    """Pearson residual of one squared distance against the chi-square(p) density.

    Raises:
        ReferenceDensityZero: only when strict is set; otherwise +inf is returned
    """
    reference = chi2_pdf(d2, p)
    if reference <= 0.0:
        if strict:
            raise ReferenceDensityZero(f"chi-square density underflows at d2={d2}")
        logger.debug("chi-square reference underflow at d2=%g, residual set to +inf", d2)
        return math.inf
    return max(kde_value / reference - 1.0, RESIDUAL_FLOOR)


def raf_values(delta, spec: RafSpec) -> np.ndarray:
    """Vectorised residual adjustment function A(delta)."""
    delta = np.asarray(delta, dtype=float)
    if np.any(delta < -1.0):
        raise DomainError("Pearson residuals must be >= -1")
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        if spec.family == "pdm":
            if math.isinf(spec.tau):
                return np.log1p(delta)
            return spec.tau * (np.power(delta + 1.0, 1.0 / spec.tau) - 1.0)
        if spec.tau < GKL_ML_TAU:
            return delta.copy()
        argument = spec.tau * delta + 1.0
        return np.where(argument > 0.0, np.log(np.where(argument > 0.0, argument, 1.0)) / spec.tau, -np.inf)


def raf_apply(delta: float, spec: RafSpec) -> float:
    """Residual adjustment function A(delta) for one residual."""
    return float(raf_values(np.array([delta]), spec)[0])


def weight_values(delta, spec: RafSpec) -> np.ndarray:
    """Vectorised weight function [A(delta) + 1]^+ / (delta + 1), clipped to [0, 1]."""
    delta = np.asarray(delta, dtype=float)
    adjusted = raf_values(delta, spec)
    with np.errstate(divide="ignore", invalid="ignore"):
        w = np.maximum(adjusted + 1.0, 0.0) / (delta + 1.0)
    w = np.where((delta <= RESIDUAL_FLOOR) | np.isposinf(delta) | np.isnan(w), 0.0, w)
    return np.clip(w, 0.0, 1.0)


def weight(delta: float, spec: RafSpec) -> float:
    """Weight attached to one Pearson residual."""
    return float(weight_values(np.array([delta]), spec)[0])


