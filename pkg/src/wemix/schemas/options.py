"""Pydantic schemas for kernel, RAF, fitting and detection options."""

import math
from pathlib import Path
from typing import Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from wemix.config import WEMIX_ROOT_MC_DRAWS
from wemix.utils.parsing import parse_number, split_family

KERNEL_FAMILIES = ("folded-normal", "gamma", "log-transform")
RAF_FAMILIES = ("pdm", "gkl")
ALGORITHMS = ("wem", "wcem", "em", "cem")
RULE_KINDS = ("chi2", "weight")

# GKL tuning below this value is treated as the maximum likelihood limit
GKL_ML_TAU = 1e-12


class KernelSpec(BaseModel):
    """Univariate kernel used to estimate the density of squared distances.

    `h` is on the squared-distance scale for the folded-normal and gamma
    kernels and on the log scale for the log-transform kernel.
    """
    model_config = ConfigDict(frozen=True)

    family: Literal["folded-normal", "gamma", "log-transform"] = "folded-normal"
    h: float = Field(..., gt=0)
    reference: Literal["raw", "smoothed"] = "raw"

    @field_validator("h")
    @classmethod
    def validate_h(cls, v: float) -> float:
        if not math.isfinite(v):
            raise ValueError("bandwidth must be finite")
        return v

    @classmethod
    def from_string(cls, text: str, h: float, reference: str = "raw") -> "KernelSpec":
        family, _ = split_family(text, KERNEL_FAMILIES)
        return cls(family=family, h=h, reference=reference)


class RafSpec(BaseModel):
    """Residual adjustment function: family plus tuning constant.

    For `pdm` a tuning of +inf selects the Kullback-Leibler limit log(1 + delta).
    """
    model_config = ConfigDict(frozen=True)

    family: Literal["pdm", "gkl"] = "gkl"
    tau: float = 0.9

    @model_validator(mode="after")
    def validate_tau(self) -> "RafSpec":
        if math.isnan(self.tau):
            raise ValueError("tau must be a number")
        if self.family == "gkl" and not (0.0 <= self.tau <= 1.0):
            raise ValueError("gkl tau must lie in [0, 1]")
        if self.family == "pdm":
            if self.tau == 0.0:
                raise ValueError("pdm tau must be nonzero")
            if self.tau == -math.inf:
                raise ValueError("pdm tau must be finite or +inf")
        return self

    @property
    def label(self) -> str:
        return f"{self.family}:{self.tau:g}"

    @classmethod
    def from_string(cls, text: str) -> "RafSpec":
        family, param = split_family(text, RAF_FAMILIES)
        if param is None:
            return cls(family=family, tau=0.9 if family == "gkl" else 1.0)
        return cls(family=family, tau=parse_number(param))


class FitConfig(BaseModel):
    """Options of a single WEM/WCEM (or EM/CEM baseline) fit."""
    model_config = ConfigDict(frozen=True)

    algorithm: Literal["wem", "wcem", "em", "cem"] = "wem"
    kernel: KernelSpec = Field(default_factory=lambda: KernelSpec(h=0.1))
    raf: RafSpec = Field(default_factory=RafSpec)
    eigen_ratio: float = Field(50.0, ge=1.0)
    max_iter: int = Field(500, gt=0)
    rel_tol: float = Field(1e-8, gt=0)
    n_starts: int = Field(20, ge=1)
    seed: int = Field(0, ge=0, lt=2**64)
    unbias_cov: bool = False
    root_mc_draws: int = Field(WEMIX_ROOT_MC_DRAWS, gt=0)

    @property
    def weighted(self) -> bool:
        """True for the algorithms that downweight observations."""
        return self.algorithm in ("wem", "wcem")

    @property
    def classification(self) -> bool:
        """True for the algorithms with a C-step."""
        return self.algorithm in ("wcem", "cem")

    def echo(self) -> dict:
        """Flat, JSON-safe summary written into result documents."""
        return {
            "algorithm": self.algorithm,
            "kernel": self.kernel.family,
            "h": self.kernel.h,
            "reference": self.kernel.reference,
            "raf": self.raf.label,
            "eigen_ratio": self.eigen_ratio,
            "max_iter": self.max_iter,
            "rel_tol": self.rel_tol,
            "n_starts": self.n_starts,
            "seed": self.seed,
            "unbias_cov": self.unbias_cov,
            "root_mc_draws": self.root_mc_draws,
        }


class DetectionRule(BaseModel):
    """Outlier detection rule applied conditionally on the final assignment.

    `chi2` flags squared distances above the (1 - alpha) chi-square quantile;
    `weight` flags conditional weights below a threshold, where "adaptive"
    resolves to the empirical downweighting level 1 - mean(w).
    """
    model_config = ConfigDict(frozen=True)

    kind: Literal["chi2", "weight"]
    alpha: Optional[float] = Field(None, gt=0, lt=1)
    threshold: Optional[Union[Literal["adaptive"], float]] = None

    @field_validator("threshold")
    @classmethod
    def validate_threshold(cls, v):
        if isinstance(v, float) and not (0.0 <= v < 1.0):
            raise ValueError("weight threshold must lie in [0, 1)")
        return v

    @model_validator(mode="before")
    @classmethod
    def default_alpha(cls, data):
        if isinstance(data, dict) and data.get("kind") == "chi2" and data.get("alpha") is None:
            if data.get("threshold") is None:
                data = {**data, "alpha": 0.01}
        return data

    @model_validator(mode="after")
    def validate_parameterization(self) -> "DetectionRule":
        if self.kind == "chi2":
            if self.threshold is not None:
                raise ValueError("chi2 rule takes alpha, not threshold")
        else:
            if self.alpha is not None:
                raise ValueError("weight rule takes threshold, not alpha")
            if self.threshold is None:
                raise ValueError("weight rule requires a threshold")
        return self

    @property
    def label(self) -> str:
        if self.kind == "chi2":
            return f"chi2:{self.alpha:g}"
        if self.threshold == "adaptive":
            return "weight:adaptive"
        return f"weight:{self.threshold:g}"

    @classmethod
    def from_string(cls, text: str) -> "DetectionRule":
        kind, param = split_family(text, RULE_KINDS)
        if kind == "chi2":
            return cls(kind="chi2", alpha=None if param is None else parse_number(param))
        if param is None:
            return cls(kind="weight", threshold="adaptive")
        if param.lower() == "adaptive":
            return cls(kind="weight", threshold="adaptive")
        return cls(kind="weight", threshold=parse_number(param))


class RunConfig(BaseModel):
    """Everything one `wemix fit` or `wemix monitor` run needs besides the grids."""
    model_config = ConfigDict(frozen=True)

    data: Path
    out: Path
    k: Optional[int] = Field(None, ge=1)
    columns: Optional[list[str]] = None
    delimiter: str = Field(",", min_length=1, max_length=1)
    header: bool = True
    fit: FitConfig = Field(default_factory=FitConfig)
    rules: list[DetectionRule] = Field(default_factory=list)
    threads: int = Field(1, ge=1)

    @field_validator("data")
    @classmethod
    def validate_data_exists(cls, v: Path) -> Path:
        if not v.is_file():
            raise ValueError(f"no such data file: {v}")
        return v

    def echo(self) -> dict:
        """Fit options plus the run-level settings, JSON-safe."""
        echo = self.fit.echo()
        echo.update({"data": str(self.data), "detect": [rule.label for rule in self.rules]})
        if self.k is not None:
            echo["k"] = self.k
        return echo
