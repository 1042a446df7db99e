"""`wemix fit`: one robust fit of a user-supplied data set."""

import argparse
import logging

import numpy as np

from wemix.commands.common import (
    build_fit_config,
    build_run_config,
    merge_options,
    require,
    resolve_seed,
)
from wemix.dataio import read_data, write_json
from wemix.diagnostics import classify, detect_outliers
from wemix.estimation.engine import fit
from wemix.models.fit_result import FitResult
from wemix.schemas.documents import FitDiagnostics, ResultDocument, ResultRow
from wemix.schemas.options import DetectionRule
from wemix.selection.criteria import weighted_ic

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_NOT_CONVERGED = 2


def build_document(result: FitResult, data: np.ndarray, rules: list[DetectionRule],
                   config_echo: dict) -> ResultDocument:
    n, p = data.shape
    k = result.n_components
    flags = {rule.label: detect_outliers(result, rule, p) for rule in rules}
    labels = {rule.label: classify(result, rule, p) for rule in rules}
    rows = [
        ResultRow(
            row=i + 1,
            assignment=int(result.assignments[i]),
            cond_weight=float(result.cond_weights[i]),
            cond_dist2=float(result.cond_dist2[i]),
            flags={name: bool(f[i]) for name, f in flags.items()},
            label={name: int(lab[i]) for name, lab in labels.items()},
        )
        for i in range(n)
    ]
    diagnostics = FitDiagnostics(
        weighted_loglik=result.weighted_loglik,
        weighted_class_loglik=result.weighted_class_loglik,
        weighted_bic=weighted_ic(result, data, "bic", k, p),
        weighted_aic=weighted_ic(result, data, "aic", k, p),
        downweighting=result.downweighting_level,
        root_score=result.root_score,
        root_score_empirical=result.root_score_empirical,
        n_iter=result.n_iter,
        converged=result.converged,
        eps_hat={name: float(np.mean(f)) for name, f in flags.items()},
    )
    return ResultDocument(config=config_echo, model=result.model, rows=rows, diagnostics=diagnostics)


def cmd_fit(args: argparse.Namespace) -> int:
    """Fit, write the result document, and report convergence through the exit code."""
    options = merge_options(args)
    require(options, "k")
    seed = resolve_seed(options)
    run = build_run_config(options, build_fit_config(options, seed))

    data, names = read_data(run.data, delimiter=run.delimiter, header=run.header, columns=run.columns)
    result = fit(data, run.k, run.fit, threads=run.threads)

    echo = run.echo()
    echo["columns"] = names
    write_json(build_document(result, data, run.rules, echo), run.out)
    logger.info("wrote %s (converged=%s, downweighting %.4f)", run.out, result.converged,
                result.downweighting_level)
    return EXIT_OK if result.converged else EXIT_NOT_CONVERGED
