"""Pydantic schemas for simulation scenarios and Monte Carlo studies."""

from typing import Literal

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from wemix.models.mixture import MixtureModel
from wemix.schemas.options import DetectionRule, FitConfig

SCHEMES = ("m5", "example4")


class SimScenario(BaseModel):
    """A data-generating design plus its contamination protocol.

    `n` is the total sample size when `eps_of_total` is set (the default):
    the clean part then has n - round(n eps) rows. Otherwise `n` clean rows
    are generated and round(n eps) outliers are appended.
    """
    model_config = ConfigDict(frozen=True)

    scheme: Literal["m5", "example4"] = "m5"
    n: int = Field(1000, ge=12)
    eps: float = Field(0.0, ge=0.0, lt=1.0)
    beta: float = Field(10.0, gt=0.0)
    p: int = Field(2, ge=1)
    seed: int = Field(0, ge=0, lt=2**64)
    outlier_quantile: float = Field(0.99, gt=0.0, lt=1.0)
    eps_of_total: bool = True

    @model_validator(mode="after")
    def validate_dimension(self) -> "SimScenario":
        if self.scheme == "example4" and self.p != 2:
            raise ValueError("the example4 scheme is bivariate (p = 2)")
        if self.scheme == "m5" and self.p < 2:
            raise ValueError("the m5 scheme needs p >= 2")
        return self

    @property
    def n_clean(self) -> int:
        if self.eps_of_total:
            return self.n - round(self.n * self.eps)
        return self.n

    @property
    def n_components(self) -> int:
        return 3

    @property
    def label(self) -> str:
        if self.scheme == "example4":
            return f"example4:n={self.n}:eps={self.eps:g}"
        return f"m5:p={self.p}:beta={self.beta:g}:n={self.n}:eps={self.eps:g}"

    def truth(self) -> MixtureModel:
        from wemix.simulation.generators import example4_truth, m5_truth

        if self.scheme == "example4":
            return example4_truth()
        return m5_truth(self.p, self.beta)


class StudySpec(BaseModel):
    """Everything `run_study` needs: scenarios, algorithms to compare, detection rules."""
    model_config = ConfigDict(frozen=True)

    scenarios: list[SimScenario] = Field(..., min_length=1)
    fit: FitConfig = Field(default_factory=FitConfig)
    algorithms: list[Literal["wem", "wcem", "em", "cem"]] = Field(default_factory=lambda: ["wem"])
    rules: list[DetectionRule] = Field(
        default_factory=lambda: [DetectionRule(kind="chi2", alpha=0.01)]
    )
    n_trials: int = Field(..., ge=1)

    @field_validator("algorithms")
    @classmethod
    def validate_algorithms(cls, v: list[str]) -> list[str]:
        if not v:
            raise ValueError("at least one algorithm is required")
        if len(set(v)) != len(v):
            raise ValueError("algorithms must be distinct")
        return v
