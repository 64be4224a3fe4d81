"""
Experiment runner for bound-versus-test-error grids.

Every trial draws a fresh in-sample set and a fresh test set from the quadrant
distribution, measures the test error of g*, and evaluates a bound at each
(m fraction, r, d) cell. Trial t uses its own seed stream spawned from the
master seed, so records do not depend on the worker count.
"""

import math
import time
from collections import defaultdict
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from knnbound.engine.combination_validation import combination_bound
from knnbound.engine.dataset import generate_quadrant_dataset, partition, shuffle_with_permutation
from knnbound.engine.dependent_bounds import result_bound, test_bound
from knnbound.engine.evidence import collect_evidence
from knnbound.engine.neighbors import classify_full
from knnbound.exceptions import ParameterError
from knnbound.logging_config import bound_run_context, get_logger
from knnbound.models.bounds import BoundConfig, BoundVariant
from knnbound.models.dataset import ExampleSet
from knnbound.models.experiment import (
    CellSummary,
    ExperimentConfig,
    ExperimentResult,
    SkippedCell,
    TrialRecord,
)
from knnbound.utils.exporters import (
    export_summary_to_csv,
    export_trials_to_csv,
    summary_path_for,
)

logger = get_logger(__name__)

VARIANT_FUNCTIONS = {
    BoundVariant.TEST: test_bound,
    BoundVariant.RESULT: result_bound,
    BoundVariant.COMBINATION: combination_bound,
}


def trial_seeds(master_seed: int, trials: int) -> list[np.random.SeedSequence]:
    """Seed stream for each trial index."""
    return np.random.SeedSequence(master_seed).spawn(trials)


def measure_test_error(cfg: ExperimentConfig, examples: ExampleSet, seed: int) -> float:
    """Error rate of g* on cfg.test_size fresh examples drawn with `seed`."""
    test = generate_quadrant_dataset(cfg.test_size, cfg.dim, cfg.noise, seed)
    predictions = classify_full(examples, test.inputs, test.tiebreaks, cfg.k, cfg.metric)
    return float(np.mean(predictions != test.labels))


def run_trial(
    cfg: ExperimentConfig, trial: int, stream: np.random.SeedSequence
) -> tuple[list[TrialRecord], list[SkippedCell]]:
    """
    Run every grid cell for one trial.

    The recorded seed is the first word of the trial's stream; the data,
    test-set, and shuffle seeds are the next three.
    """
    record_seed, data_seed, test_seed, shuffle_seed = (int(v) for v in stream.generate_state(4))
    examples = generate_quadrant_dataset(cfg.n, cfg.dim, cfg.noise, data_seed)
    permutation = np.random.default_rng(shuffle_seed).permutation(cfg.n)
    examples = shuffle_with_permutation(examples, permutation)
    error = measure_test_error(cfg, examples, test_seed)

    records: list[TrialRecord] = []
    skipped: list[SkippedCell] = []
    bound_fn = VARIANT_FUNCTIONS[cfg.variant]
    for fraction in cfg.m_fractions:
        m = int(round(fraction * cfg.n))
        for r in cfg.r_values:
            depths = cfg.depths_for(r)
            if m < 1 or (r + 1) * m > cfg.n - cfg.k:
                reason = f"infeasible: r*m + w = {(r + 1) * m} against n - k = {cfg.n - cfg.k}"
                for d in depths:
                    skipped.append(SkippedCell(trial=trial, r=r, d=d, m=m, reason=reason))
                logger.warning("cell_skipped", trial=trial, r=r, m=m, reason=reason)
                continue

            started = time.perf_counter()
            dataset = partition(examples, r, m, m, cfg.k)
            evidence = collect_evidence(dataset, cfg.metric)
            shared = time.perf_counter() - started
            for d in depths:
                started = time.perf_counter()
                bound_cfg = BoundConfig(
                    k=cfg.k,
                    r=r,
                    m=m,
                    w=m,
                    depth=d,
                    delta=cfg.delta,
                    delta_w=cfg.delta_w,
                    variant=cfg.variant,
                    metric=cfg.metric,
                )
                try:
                    report = bound_fn(dataset, bound_cfg, evidence)
                except ParameterError as e:
                    skipped.append(SkippedCell(trial=trial, r=r, d=d, m=m, reason=str(e)))
                    logger.warning("cell_skipped", trial=trial, r=r, d=d, m=m, reason=str(e))
                    continue
                elapsed = shared + time.perf_counter() - started
                bound = report.reported_bound
                records.append(
                    TrialRecord(
                        trial=trial,
                        n=cfg.n,
                        k=cfg.k,
                        r=r,
                        d=d,
                        m=m,
                        w=m,
                        variant=cfg.variant,
                        bound=bound,
                        test_error=error,
                        gap=bound - error,
                        seed=record_seed,
                        runtime_s=elapsed if cfg.record_runtime else 0.0,
                    )
                )

    logger.info("trial_completed", trial=trial, records=len(records), skipped=len(skipped))
    return records, skipped


def summarize(cfg: ExperimentConfig, records: list[TrialRecord]) -> list[CellSummary]:
    """Per-cell mean gap, sample std, and std of the mean, in first-seen cell order."""
    cells: dict[tuple[int, int, int], list[TrialRecord]] = defaultdict(list)
    for record in records:
        cells[(record.r, record.d, record.m)].append(record)

    summaries = []
    for (r, d, m), group in cells.items():
        gaps = np.array([rec.gap for rec in group])
        std = float(np.std(gaps, ddof=1)) if len(group) > 1 else 0.0
        summaries.append(
            CellSummary(
                r=r,
                d=d,
                m=m,
                fraction=m / cfg.n,
                trials=len(group),
                mean_gap=math.fsum(gaps.tolist()) / len(group),
                std_gap=std,
                std_mean=std / math.sqrt(len(group)),
                mean_bound=math.fsum(rec.bound for rec in group) / len(group),
                mean_test_error=math.fsum(rec.test_error for rec in group) / len(group),
            )
        )
    return summaries


def run_experiment(cfg: ExperimentConfig) -> ExperimentResult:
    """
    Run all trials and, when cfg.output is set, write the trial CSV and its
    companion summary CSV.

    Records are assembled in trial order after all workers finish.
    """
    streams = trial_seeds(cfg.seed, cfg.trials)
    with bound_run_context(master_seed=cfg.seed, variant=cfg.variant.value):
        logger.info(
            "experiment_started", n=cfg.n, k=cfg.k, trials=cfg.trials, workers=cfg.workers
        )
        if cfg.workers > 1 and cfg.trials > 1:
            with ProcessPoolExecutor(max_workers=cfg.workers) as executor:
                outcomes = list(
                    executor.map(run_trial, [cfg] * cfg.trials, range(cfg.trials), streams)
                )
        else:
            outcomes = [run_trial(cfg, t, stream) for t, stream in enumerate(streams)]

        records = [record for trial_records, _ in outcomes for record in trial_records]
        skipped = [cell for _, trial_skipped in outcomes for cell in trial_skipped]
        result = ExperimentResult(
            config=cfg, records=records, skipped=skipped, summaries=summarize(cfg, records)
        )

        if cfg.output is not None:
            export_trials_to_csv(records, cfg.output)
            export_summary_to_csv(result.summaries, summary_path_for(cfg.output))

        best = result.best_cell()
        logger.info(
            "experiment_completed",
            records=len(records),
            skipped=len(skipped),
            best_r=None if best is None else best.r,
            best_d=None if best is None else best.d,
            best_m=None if best is None else best.m,
            best_mean_gap=None if best is None else best.mean_gap,
        )
    return result
