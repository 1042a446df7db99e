"""The Gaussian mixture parameter container."""

from functools import cached_property

import numpy as np
from pydantic import BaseModel, ConfigDict, field_serializer, field_validator, model_validator

from wemix.utils.validation import is_positive_definite, is_probability_vector, is_symmetric


class MixtureModel(BaseModel):
    """Mixing weights, mean vectors and covariance matrices of K Gaussian components."""
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    weights: np.ndarray
    means: np.ndarray
    covariances: np.ndarray

    @field_validator("weights", mode="before")
    @classmethod
    def validate_weights(cls, v) -> np.ndarray:
        v = np.array(v, dtype=float).reshape(-1)
        if not is_probability_vector(v):
            raise ValueError("weights must be nonnegative and sum to 1")
        return v

    @field_validator("means", mode="before")
    @classmethod
    def validate_means(cls, v) -> np.ndarray:
        v = np.array(v, dtype=float)
        if v.ndim != 2 or not np.all(np.isfinite(v)):
            raise ValueError("means must be a finite K x p matrix")
        return v

    @field_validator("covariances", mode="before")
    @classmethod
    def validate_covariances(cls, v) -> np.ndarray:
        v = np.array(v, dtype=float)
        if v.ndim != 3 or v.shape[1] != v.shape[2] or not np.all(np.isfinite(v)):
            raise ValueError("covariances must be a finite K x p x p array")
        for k, cov in enumerate(v):
            if not is_symmetric(cov):
                raise ValueError(f"covariance {k + 1} is not symmetric")
            if not is_positive_definite(cov):
                raise ValueError(f"covariance {k + 1} is not positive definite")
        return v

    @model_validator(mode="after")
    def validate_dimensions(self) -> "MixtureModel":
        n_components = self.weights.shape[0]
        if self.means.shape[0] != n_components or self.covariances.shape[0] != n_components:
            raise ValueError("weights, means and covariances disagree on K")
        if self.covariances.shape[1] != self.means.shape[1]:
            raise ValueError("means and covariances disagree on dimension p")
        return self

    @field_serializer("weights", "means", "covariances")
    def serialize_array(self, v: np.ndarray) -> list:
        return v.tolist()

    @property
    def n_components(self) -> int:
        return int(self.weights.shape[0])

    @property
    def n_features(self) -> int:
        return int(self.means.shape[1])

    @cached_property
    def eigen(self) -> tuple[np.ndarray, np.ndarray]:
        """Eigenvalues (K x p, ascending) and eigenvectors (K x p x p) of the covariances."""
        eigenvalues, eigenvectors = np.linalg.eigh(self.covariances)
        return eigenvalues, eigenvectors

    def permuted(self, order: np.ndarray) -> "MixtureModel":
        """Return the model with components reordered so that new k is old order[k]."""
        order = np.asarray(order, dtype=int)
        return MixtureModel(
            weights=self.weights[order],
            means=self.means[order],
            covariances=self.covariances[order],
        )

    def __repr__(self):
        return f"<MixtureModel(K={self.n_components}, p={self.n_features})>"
