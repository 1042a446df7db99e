"""Pydantic schemas for the documents wemix writes: fit results, monitor grids, study reports."""

import math
from typing import Optional, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_serializer, field_validator, model_validator

from wemix.models.mixture import MixtureModel

SCHEMA_VERSION = "1.0"

ConfigValue = Union[bool, int, float, str, list[str], list[float], list[int], None]


class ClusteringReport(BaseModel):
    """Outlier flags, final labels and, when the truth is known, error rates for one rule."""
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    rule: str
    flags: np.ndarray
    labels: np.ndarray
    eps_hat: float = Field(..., ge=0.0, le=1.0)
    downweighting: float = Field(..., ge=0.0, le=1.0)
    swamping: Optional[float] = Field(None, ge=0.0, le=1.0)
    masking: Optional[float] = Field(None, ge=0.0, le=1.0)
    rand: Optional[float] = Field(None, ge=0.0, le=1.0)
    mce: Optional[float] = Field(None, ge=0.0, le=1.0)

    @field_validator("flags", mode="before")
    @classmethod
    def validate_flags(cls, v) -> np.ndarray:
        return np.asarray(v, dtype=bool).reshape(-1)

    @field_validator("labels", mode="before")
    @classmethod
    def validate_labels(cls, v) -> np.ndarray:
        return np.asarray(v, dtype=int).reshape(-1)

    @model_validator(mode="after")
    def validate_rate(self) -> "ClusteringReport":
        if self.flags.shape != self.labels.shape:
            raise ValueError("flags and labels must have the same length")
        if self.flags.size and not math.isclose(self.eps_hat, float(np.mean(self.flags)), abs_tol=1e-12):
            raise ValueError("eps_hat must equal the flagged fraction")
        return self

    @field_serializer("flags", "labels")
    def serialize_array(self, v: np.ndarray) -> list:
        return v.tolist()


class ResultRow(BaseModel):
    """Per-observation output of a fit."""
    row: int = Field(..., ge=1)
    assignment: int = Field(..., ge=1)
    cond_weight: float = Field(..., ge=0.0, le=1.0)
    cond_dist2: float = Field(..., ge=0.0)
    flags: dict[str, bool] = Field(default_factory=dict)
    label: dict[str, int] = Field(default_factory=dict)


class FitDiagnostics(BaseModel):
    weighted_loglik: float
    weighted_class_loglik: float
    weighted_bic: float
    weighted_aic: float
    downweighting: float = Field(..., ge=0.0, le=1.0)
    root_score: Optional[float] = None
    root_score_empirical: Optional[float] = None
    n_iter: int
    converged: bool
    eps_hat: dict[str, float] = Field(default_factory=dict)


class ResultDocument(BaseModel):
    """The JSON document written by `wemix fit`."""
    schema_version: str = SCHEMA_VERSION
    config: dict[str, ConfigValue]
    model: MixtureModel
    rows: list[ResultRow]
    diagnostics: FitDiagnostics

    @model_validator(mode="after")
    def validate_rows(self) -> "ResultDocument":
        if any(row.assignment > self.model.n_components for row in self.rows):
            raise ValueError("row assignment exceeds the number of components")
        return self


class MonitorGridSpec(BaseModel):
    """The (h, K) grid swept by `monitor`."""
    model_config = ConfigDict(frozen=True)

    h_values: list[float] = Field(..., min_length=1)
    k_values: list[int] = Field(..., min_length=1)

    @field_validator("h_values")
    @classmethod
    def validate_h_values(cls, v: list[float]) -> list[float]:
        if any(not (h > 0.0 and math.isfinite(h)) for h in v):
            raise ValueError("bandwidths must be positive and finite")
        if any(a >= b for a, b in zip(v, v[1:])):
            raise ValueError("bandwidths must be strictly increasing")
        return v

    @field_validator("k_values")
    @classmethod
    def validate_k_values(cls, v: list[int]) -> list[int]:
        if any(k < 1 for k in v):
            raise ValueError("numbers of components must be >= 1")
        if any(a >= b for a, b in zip(v, v[1:])):
            raise ValueError("numbers of components must be strictly increasing")
        return v


class MonitorCell(BaseModel):
    """Statistics of the fit at one (K, h) cell; failed cells carry only `error`."""
    k: int
    h: float
    downweighting: Optional[float] = Field(None, ge=0.0, le=1.0)
    weighted_bic: Optional[float] = None
    weighted_aic: Optional[float] = None
    wclass_loglik: Optional[float] = None
    converged: bool = False
    dist2: list[float] = Field(default_factory=list)
    error: Optional[str] = None

    @property
    def ok(self) -> bool:
        return self.error is None


class MonitorGrid(BaseModel):
    spec: MonitorGridSpec
    cells: list[MonitorCell] = Field(default_factory=list)

    def profile(self, k: int) -> list[MonitorCell]:
        """Successful cells of one K, in increasing h."""
        return sorted((c for c in self.cells if c.k == k and c.ok), key=lambda c: c.h)


class HSuggestion(BaseModel):
    k: int
    h: float
    rationale: str
    downweighting: float
    drop: Optional[float] = None


class TrialRecord(BaseModel):
    """Metrics of one (trial, algorithm, rule) combination of a study."""
    scenario: str
    trial: int = Field(..., ge=0)
    seed: int
    algorithm: str
    rule: str
    mu_err: float
    sigma_err: float
    pi_err: float
    rand: Optional[float] = None
    mce: Optional[float] = None
    eps_hat: float
    swamping: float
    masking: float
    downweighting: float


class StudyAggregate(BaseModel):
    scenario: str
    algorithm: str
    rule: str
    n_trials: int
    mu_err: float
    sigma_err: float
    pi_err: float
    rand: Optional[float] = None
    mce: Optional[float] = None
    eps_hat: float
    swamping: float
    masking: float
    downweighting: float


class StudyReport(BaseModel):
    """Per-trial records and their means over successful trials."""
    schema_version: str = SCHEMA_VERSION
    config: dict[str, ConfigValue] = Field(default_factory=dict)
    n_trials: int = Field(..., ge=1)
    n_failures: int = Field(0, ge=0)
    records: list[TrialRecord] = Field(default_factory=list)
    aggregates: list[StudyAggregate] = Field(default_factory=list)
