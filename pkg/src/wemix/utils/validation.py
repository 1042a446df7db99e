"""Validation utility functions for numeric arrays."""

import numpy as np

# Relative asymmetry tolerated in a covariance matrix
SYMMETRY_TOL: float = 1e-10

# Smallest eigenvalue, relative to the largest, before a matrix counts as singular
SINGULAR_RTOL: float = 1e-300


def is_finite_matrix(values: np.ndarray) -> bool:
    """Check that an array is a non-empty 2-D matrix of finite reals.

    Args:
        values: The array to validate

    Returns:
        True if the array has shape (n, p) with n, p >= 1 and no NaN/inf entry
    """
    values = np.asarray(values)
    if values.ndim != 2 or values.shape[0] < 1 or values.shape[1] < 1:
        return False
    if not np.issubdtype(values.dtype, np.number):
        return False
    return bool(np.all(np.isfinite(values)))


def is_symmetric(matrix: np.ndarray, tol: float = SYMMETRY_TOL) -> bool:
    """Check that a square matrix is symmetric up to an absolute tolerance.

    Args:
        matrix: Square matrix
        tol: Largest accepted entry of |A - A^T|

    Returns:
        True if the matrix is square and max |A - A^T| <= tol
    """
    matrix = np.asarray(matrix, dtype=float)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        return False
    return bool(np.max(np.abs(matrix - matrix.T), initial=0.0) <= tol)


def is_positive_definite(matrix: np.ndarray) -> bool:
    """Check that a symmetric matrix has strictly positive eigenvalues."""
    eigenvalues = np.linalg.eigvalsh(np.asarray(matrix, dtype=float))
    return bool(eigenvalues[0] > 0.0)


def is_near_singular(eigenvalues: np.ndarray) -> bool:
    """Check whether sorted-or-unsorted eigenvalues describe a singular matrix.

    A matrix is treated as singular when its smallest eigenvalue is not larger
    than SINGULAR_RTOL times its largest one (or is not positive at all).
    """
    eigenvalues = np.asarray(eigenvalues, dtype=float)
    smallest = eigenvalues.min()
    largest = eigenvalues.max()
    return bool(smallest <= 0.0 or smallest <= SINGULAR_RTOL * largest)


def is_probability_vector(weights: np.ndarray, tol: float = 1e-12) -> bool:
    """Check that weights are nonnegative and sum to one within tol."""
    weights = np.asarray(weights, dtype=float)
    if weights.ndim != 1 or weights.size == 0:
        return False
    return bool(np.all(weights >= 0.0) and abs(weights.sum() - 1.0) <= tol)
