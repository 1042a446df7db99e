"""`wemix simulate`: Monte Carlo studies on the benchmark designs."""

import argparse
import logging
from pathlib import Path

from wemix.commands.common import (
    build_fit_config,
    build_rules,
    merge_options,
    require,
    resolve_seed,
    resolve_threads,
)
from wemix.dataio import study_frame, write_csv, write_json
from wemix.schemas.simulation import SimScenario, StudySpec
from wemix.simulation.study import run_study

logger = logging.getLogger(__name__)

EXIT_ALL_FAILED = 3

SCENARIO_FIELDS = ("scheme", "n", "eps", "beta", "p", "outlier_quantile")


def trials_path(out_path: Path) -> Path:
    return out_path.with_name(f"{out_path.stem}_trials.csv")


def build_scenarios(options: dict, seed: int) -> list[SimScenario]:
    """Scenarios from a config-file list, or a single one from the flags."""
    common = {"seed": seed}
    if options.get("eps_of_clean"):
        common["eps_of_total"] = False
    if options.get("scenarios"):
        return [SimScenario(**{**common, **scenario}) for scenario in options["scenarios"]]
    fields = {name: options[name] for name in SCENARIO_FIELDS if options.get(name) is not None}
    return [SimScenario(**{**common, **fields})]


def cmd_simulate(args: argparse.Namespace) -> int:
    """Run the study, write the JSON report and the per-trial CSV."""
    options = merge_options(args)
    out_path = Path(require(options, "out"))
    seed = resolve_seed(options)
    algorithms = options.get("algorithms") or ["wem"]
    if isinstance(algorithms, str):
        algorithms = [a.strip() for a in algorithms.split(",") if a.strip()]
    fields = dict(
        scenarios=build_scenarios(options, seed),
        fit=build_fit_config(options, seed),
        algorithms=algorithms,
        n_trials=require(options, "trials"),
    )
    rules = build_rules(options)
    if rules:
        fields["rules"] = rules
    report = run_study(StudySpec(**fields), threads=resolve_threads(options))

    write_json(report, out_path)
    write_csv(study_frame(report), trials_path(out_path))
    logger.info("wrote %s with %d records", out_path, len(report.records))
    if not report.records and report.n_failures:
        return EXIT_ALL_FAILED
    return 0
