"""Option handling shared by the sub-commands: config files, flag merging, typed configs."""

import argparse
import json
import logging
from pathlib import Path
from typing import Any, Optional

import numpy as np

from wemix.config import WEMIX_THREADS
from wemix.errors import InputError
from wemix.schemas.options import DetectionRule, FitConfig, KernelSpec, RafSpec, RunConfig

logger = logging.getLogger(__name__)

FIT_DEFAULTS = {
    "algorithm": "wem",
    "raf": "gkl:0.9",
    "kernel": "folded-normal",
    "h": 0.1,
    "reference": "raw",
}


def load_config_file(path: Optional[Path]) -> dict[str, Any]:
    """Options stored in a JSON object; keys use the flag names with dashes as underscores."""
    if path is None:
        return {}
    try:
        with open(path, encoding="utf-8") as handle:
            options = json.load(handle)
    except FileNotFoundError as e:
        raise InputError(f"no such config file: {path}") from e
    except json.JSONDecodeError as e:
        raise InputError(f"invalid JSON in {path}: {e.msg}", line=e.lineno) from e
    if not isinstance(options, dict):
        raise InputError(f"config file {path} must hold a JSON object")
    return {key.replace("-", "_"): value for key, value in options.items()}


def merge_options(args: argparse.Namespace) -> dict[str, Any]:
    """Config-file values overridden by every flag given on the command line."""
    options = load_config_file(getattr(args, "config", None))
    options.update({key: value for key, value in vars(args).items()
                    if value is not None and key not in ("config", "func")})
    return options


def resolve_seed(options: dict[str, Any]) -> int:
    """The --seed value, or a fresh one drawn from OS entropy (echoed in the output)."""
    seed = options.get("seed")
    if seed is None:
        seed = int(np.random.SeedSequence().entropy % 2**63)
        logger.info("no seed given, using %d", seed)
    return int(seed)


def resolve_threads(options: dict[str, Any]) -> int:
    threads = int(options.get("threads") or WEMIX_THREADS)
    if threads < 1:
        raise InputError(f"--threads must be >= 1, got {threads}")
    return threads


def build_fit_config(options: dict[str, Any], seed: int) -> FitConfig:
    values = {**FIT_DEFAULTS, **options}
    fields = {
        "algorithm": values["algorithm"],
        "kernel": KernelSpec.from_string(values["kernel"], h=float(values["h"]),
                                         reference=values["reference"]),
        "raf": RafSpec.from_string(values["raf"]),
        "seed": seed,
    }
    for name in ("eigen_ratio", "max_iter", "rel_tol", "n_starts", "unbias_cov", "root_mc_draws"):
        if options.get(name) is not None:
            fields[name] = options[name]
    return FitConfig(**fields)


def build_rules(options: dict[str, Any]) -> list[DetectionRule]:
    detect = options.get("detect") or []
    if isinstance(detect, str):
        detect = [detect]
    return [DetectionRule.from_string(text) for text in detect]


def require(options: dict[str, Any], name: str) -> Any:
    if options.get(name) is None:
        raise InputError(f"--{name.replace('_', '-')} is required")
    return options[name]


def build_run_config(options: dict[str, Any], fit_config: FitConfig) -> RunConfig:
    """Run-level settings of `fit` and `monitor`; missing --data or --out is an input error."""
    return RunConfig(
        data=Path(require(options, "data")),
        out=Path(require(options, "out")),
        k=options.get("k"),
        columns=options.get("columns"),
        delimiter=options.get("delimiter") or ",",
        header=not options.get("no_header", False),
        fit=fit_config,
        rules=build_rules(options),
        threads=resolve_threads(options),
    )
