"""Result of fitting a mixture from one starting point."""

from typing import Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_serializer, field_validator

from wemix.models.mixture import MixtureModel

# Allowed deviation of a posterior row sum from one
POSTERIOR_ROW_TOL = 1e-10


class FitResult(BaseModel):
    """Converged model plus the per-observation quantities read at convergence.

    `assignments` are component labels in 1..K; `cond_weights` and
    `cond_dist2` are the weight and squared distance of each observation with
    respect to its assigned component.
    """
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    algorithm: str
    model: MixtureModel
    assignments: np.ndarray
    posterior: np.ndarray
    cond_weights: np.ndarray
    cond_dist2: np.ndarray
    weighted_loglik: float
    weighted_class_loglik: float
    trace: list[float] = Field(default_factory=list)
    converged: bool = False
    n_iter: int = 0
    root_score: Optional[float] = Field(None, ge=0.0, le=1.0)
    root_score_empirical: Optional[float] = Field(None, ge=0.0, le=1.0)

    @field_validator("assignments", mode="before")
    @classmethod
    def validate_assignments(cls, v) -> np.ndarray:
        v = np.asarray(v, dtype=int).reshape(-1)
        if v.size and v.min() < 1:
            raise ValueError("assignments must be labels in 1..K")
        return v

    @field_validator("cond_weights", mode="before")
    @classmethod
    def validate_cond_weights(cls, v) -> np.ndarray:
        v = np.asarray(v, dtype=float).reshape(-1)
        if np.any(v < 0.0) or np.any(v > 1.0):
            raise ValueError("conditional weights must lie in [0, 1]")
        return v

    @field_validator("cond_dist2", mode="before")
    @classmethod
    def validate_cond_dist2(cls, v) -> np.ndarray:
        v = np.asarray(v, dtype=float).reshape(-1)
        if np.any(v < 0.0):
            raise ValueError("squared distances must be nonnegative")
        return v

    @field_validator("posterior", mode="before")
    @classmethod
    def validate_posterior(cls, v) -> np.ndarray:
        v = np.asarray(v, dtype=float)
        if v.ndim != 2 or np.any(v < 0.0) or np.any(v > 1.0):
            raise ValueError("posterior must be an n x K matrix of probabilities")
        if not np.allclose(v.sum(axis=1), 1.0, rtol=0.0, atol=POSTERIOR_ROW_TOL):
            raise ValueError("posterior rows must sum to one")
        return v

    @field_serializer("assignments", "posterior", "cond_weights", "cond_dist2")
    def serialize_array(self, v: np.ndarray) -> list:
        return v.tolist()

    @property
    def n_components(self) -> int:
        return self.model.n_components

    @property
    def downweighting_level(self) -> float:
        """Empirical downweighting level 1 - mean(w)."""
        return float(1.0 - np.mean(self.cond_weights))

    def __repr__(self):
        return (
            f"<FitResult(algorithm='{self.algorithm}', K={self.n_components}, "
            f"converged={self.converged}, n_iter={self.n_iter})>"
        )
