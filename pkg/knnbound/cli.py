"""
Command-line interface for knnbound.

This provides commands for generating data, computing a single bound, running
experiment grids, and checking the identity and coverage suites.
"""

import sys

import click

from knnbound import __version__
from knnbound.config import settings
from knnbound.engine.combination_validation import combination_bound
from knnbound.engine.coverage import run_coverage
from knnbound.engine.dataset import generate_quadrant_dataset
from knnbound.engine.dependent_bounds import (
    expected_epsilon_bound,
    partition_for,
    result_bound,
    suggest_m,
    suggest_r,
    test_bound,
)
from knnbound.engine.harness import run_experiment
from knnbound.engine.identity import verify_identity
from knnbound.engine.independent_bounds import (
    epsilon_permutation_asymptotic,
    independent_bound,
    suggest_m_independent,
)
from knnbound.exceptions import ParameterError
from knnbound.logging_config import configure_logging, get_logger
from knnbound.models.bounds import (
    BoundConfig,
    BoundDirection,
    BoundVariant,
    PermutationPlan,
    ScheduleSelector,
)
from knnbound.models.experiment import CoverageSuite, ExperimentConfig
from knnbound.utils import (
    export_examples_to_csv,
    load_examples_csv,
    load_experiment_config,
    to_json_string,
    to_yaml_string,
)

logger = get_logger(__name__)

FORMATS = click.Choice(["summary", "json", "yaml"])


@click.group()
@click.version_option(version=__version__)
@click.option("--log-level", default=None, help="Log level (default: settings.log_level)")
@click.option(
    "--log-format", type=click.Choice(["json", "text"]), default=None, help="Log renderer"
)
def main(log_level: str | None, log_format: str | None) -> None:
    """
    knnbound - error bounds for k-nearest neighbor classifiers.

    Compute validation-based bounds, run experiment grids, and check the
    identity and coverage suites.
    """
    configure_logging(log_level, log_format)


# ============================================================================
# DATA COMMANDS
# ============================================================================


@main.command(name="generate")
@click.option("--n", "n", type=int, required=True, help="Number of examples")
@click.option("--dim", type=int, default=2, show_default=True, help="Input dimension")
@click.option("--noise", type=float, default=0.1, show_default=True, help="Label flip rate")
@click.option("--seed", type=int, default=None, help="Seed (default: settings.default_seed)")
@click.option(
    "--out", "--output", "-o", "output", type=click.Path(), required=True, help="Output CSV file"
)
@click.option("--tiebreaks", is_flag=True, help="Append each example's tie-break value")
def generate_cmd(
    n: int, dim: int, noise: float, seed: int | None, output: str, tiebreaks: bool
) -> None:
    """Generate a quadrant-parity dataset as headerless CSV (inputs, then label)."""
    try:
        seed = settings.default_seed if seed is None else seed
        examples = generate_quadrant_dataset(n, dim, noise, seed)
        export_examples_to_csv(examples, output, include_tiebreaks=tiebreaks)
        click.secho(f"✓ Wrote {n} examples to {output}", fg="green")
        sys.exit(0)
    except Exception as e:
        click.secho("✗ Generation failed:", fg="red", err=True)
        click.echo(f"  {str(e)}", err=True)
        sys.exit(1)


# ============================================================================
# BOUND COMMANDS
# ============================================================================


@main.command(name="bound")
@click.option("--data", type=click.Path(exists=True), help="Examples CSV (default: generate)")
@click.option("--tiebreaks", is_flag=True, help="The examples CSV ends each line with a tie-break")
@click.option("--n", "n", type=int, default=2000, show_default=True, help="Examples to generate")
@click.option("--seed", type=int, default=None, help="Data seed when generating")
@click.option(
    "--variant",
    type=click.Choice([v.value for v in BoundVariant]),
    default=BoundVariant.TEST.value,
    show_default=True,
)
@click.option(
    "--direction",
    type=click.Choice([d.value for d in BoundDirection]),
    default=BoundDirection.UPPER.value,
    show_default=True,
)
@click.option("--k", "k", type=int, default=3, show_default=True, help="Number of neighbors")
@click.option("--r", "r", type=int, default=None, help="Validation subsets (default: suggested)")
@click.option("--m", "m", type=int, default=None, help="Subset size (default: suggested)")
@click.option("--w", "w", type=int, default=None, help="Holdout tail size (default: m)")
@click.option("--depth", type=int, default=None, help="Truncation depth (test variant)")
@click.option("--delta", type=float, default=0.025, show_default=True)
@click.option("--delta-w", type=float, default=0.025, show_default=True)
@click.option("--delta-q", type=float, default=0.025, show_default=True)
@click.option("--metric", default="euclidean", show_default=True, help="Registered metric")
@click.option("--q", "q", type=int, default=None, help="Sampled permutations (independent)")
@click.option("--perm-seed", type=int, default=0, show_default=True)
@click.option("--loose", is_flag=True, help="Chvatal-style residual instead of u(n, k, r)")
@click.option(
    "--selector",
    type=click.Choice([s.value for s in ScheduleSelector]),
    default=ScheduleSelector.CLOSED_FORM.value,
    show_default=True,
    help="Failure-probability schedule (combination variant)",
)
@click.option(
    "--format", type=click.Choice(["summary", "json", "yaml", "record"]), default="summary"
)
def bound_cmd(
    data: str | None,
    tiebreaks: bool,
    n: int,
    seed: int | None,
    variant: str,
    direction: str,
    k: int,
    r: int | None,
    m: int | None,
    w: int | None,
    depth: int | None,
    delta: float,
    delta_w: float,
    delta_q: float,
    metric: str,
    q: int | None,
    perm_seed: int,
    loose: bool,
    selector: str,
    format: str,
) -> None:
    """Compute one bound on a dataset."""
    try:
        seed = settings.default_seed if seed is None else seed
        if data:
            examples = load_examples_csv(data, seed, with_tiebreaks=tiebreaks)
        else:
            examples = generate_quadrant_dataset(n, seed=seed)
        size = len(examples)
        chosen_variant = BoundVariant(variant)
        r = suggest_r(size) if r is None else r

        if chosen_variant == BoundVariant.INDEPENDENT:
            m = suggest_m_independent(size, k, r)[0] if m is None else m
            if q is None:
                q = min(size, settings.q_cap)
                if q < size:
                    logger.warning("q_capped", q=q, n=size, cap=settings.q_cap)
            cfg = BoundConfig(
                k=k,
                r=r,
                m=m,
                delta=delta,
                delta_q=delta_q,
                variant=chosen_variant,
                direction=BoundDirection(direction),
                metric=metric,
            )
            plan = PermutationPlan(q=q, seed=perm_seed, delta_q=delta_q)
            report = independent_bound(
                examples, cfg, plan, tight=not loose, workers=settings.workers
            )
        else:
            if m is None:
                m, suggested_w = suggest_m(size, k, r)
                w = suggested_w if w is None else w
            w = m if w is None else w
            cfg = BoundConfig(
                k=k,
                r=r,
                m=m,
                w=w,
                depth=depth,
                delta=delta,
                delta_w=delta_w,
                variant=chosen_variant,
                direction=BoundDirection(direction),
                metric=metric,
            )
            dataset = partition_for(examples, cfg)
            if chosen_variant == BoundVariant.TEST:
                report = test_bound(dataset, cfg)
            elif chosen_variant == BoundVariant.RESULT:
                report = result_bound(dataset, cfg)
            else:
                report = combination_bound(dataset, cfg, selector=ScheduleSelector(selector))

        if format == "json":
            click.echo(to_json_string(report))
        elif format == "yaml":
            click.echo(to_yaml_string(report))
        elif format == "record":
            click.echo(report.to_record())
        else:
            click.secho(f"\n{report.variant.value} bound ({report.direction.value})", bold=True)
            click.echo(
                f"  n={report.n} k={report.k} r={report.r} "
                f"m={report.m} w={report.w} d={report.d}"
            )
            click.echo(f"  Estimate:   {report.estimate:.6f}")
            click.echo(f"  epsilon_V:  {report.epsilon_v:.6f}")
            click.echo(f"  epsilon_W:  {report.epsilon_w:.6f}")
            if report.epsilon_sampling is not None:
                click.echo(f"  Sampling:   {report.epsilon_sampling:.6f}")
            if report.lower_bound is not None:
                click.echo(f"  Lower:      {report.lower_bound:.6f}")
            if report.upper_bound is not None:
                click.echo(f"  Upper:      {report.upper_bound:.6f}")
            click.secho(f"  Bound:      {report.reported_bound:.6f}", fg="green")
            click.echo(f"  Failure probability: {report.failure_prob:.4f}")

        sys.exit(0)
    except Exception as e:
        click.secho("✗ Bound computation failed:", fg="red", err=True)
        click.echo(f"  {str(e)}", err=True)
        sys.exit(1)


@main.command(name="suggest-params")
@click.option("--n", "n", type=int, required=True, help="Number of examples")
@click.option("--k", "k", type=int, default=3, show_default=True, help="Number of neighbors")
@click.option("--r", "r", type=int, default=None, help="Validation subsets (default: suggested)")
@click.option("--delta", type=float, default=0.025, show_default=True)
@click.option("--delta-w", type=float, default=0.025, show_default=True)
def suggest_params_cmd(n: int, k: int, r: int | None, delta: float, delta_w: float) -> None:
    """Suggest r, m, w, and q for n examples."""
    try:
        r = suggest_r(n) if r is None else r
        click.secho(f"\nSuggested parameters for n={n}, k={k}", bold=True)
        click.echo(f"  r = {r}")
        try:
            m, w = suggest_m(n, k, r)
            width = expected_epsilon_bound(n, k, r, m, w, delta, delta_w)
            click.echo(f"  data-dependent: m = {m}, w = {w}, expected width <= {width:.6f}")
        except ParameterError as e:
            click.secho(f"  data-dependent: {e}", fg="yellow")
        try:
            m_ind, q = suggest_m_independent(n, k, r)
            width = epsilon_permutation_asymptotic(n, k, r, delta, delta_w)
            click.echo(f"  data-independent: m = {m_ind}, q = {q}, width <= {width:.6f}")
        except ParameterError as e:
            click.secho(f"  data-independent: {e}", fg="yellow")
        sys.exit(0)
    except Exception as e:
        click.secho("✗ Parameter suggestion failed:", fg="red", err=True)
        click.echo(f"  {str(e)}", err=True)
        sys.exit(1)


# ============================================================================
# EXPERIMENT COMMANDS
# ============================================================================


@main.command(name="experiment")
@click.option("--config", "config_file", type=click.Path(exists=True), help="YAML/JSON grid")
@click.option("--n", "n", type=int, default=None)
@click.option("--k", "k", type=int, default=None)
@click.option("--dim", type=int, default=None)
@click.option("--noise", type=float, default=None)
@click.option("--trials", type=int, default=None)
@click.option("--m-fraction", "m_fractions", type=float, multiple=True, help="Repeatable")
@click.option("--r", "r_values", type=int, multiple=True, help="Repeatable")
@click.option("--d", "d_values", type=int, multiple=True, help="Repeatable")
@click.option("--delta", type=float, default=None)
@click.option("--delta-w", type=float, default=None)
@click.option("--test-size", type=int, default=None)
@click.option("--seed", type=int, default=None)
@click.option("--variant", type=click.Choice(["test", "result", "combination"]), default=None)
@click.option("--metric", default=None)
@click.option("--workers", type=int, default=None, help="Default: settings.workers")
@click.option("--no-runtime", is_flag=True, help="Write runtime_s as 0.0 for byte-stable CSV")
@click.option("--output", "-o", type=click.Path(), required=True, help="Trial CSV path")
def experiment_cmd(
    config_file: str | None,
    n: int | None,
    k: int | None,
    dim: int | None,
    noise: float | None,
    trials: int | None,
    m_fractions: tuple[float, ...],
    r_values: tuple[int, ...],
    d_values: tuple[int, ...],
    delta: float | None,
    delta_w: float | None,
    test_size: int | None,
    seed: int | None,
    variant: str | None,
    metric: str | None,
    workers: int | None,
    no_runtime: bool,
    output: str,
) -> None:
    """Run a bound-versus-test-error grid and write CSV."""
    try:
        overrides = {
            "n": n,
            "k": k,
            "dim": dim,
            "noise": noise,
            "trials": trials,
            "m_fractions": list(m_fractions) or None,
            "r_values": list(r_values) or None,
            "d_values": list(d_values) or None,
            "delta": delta,
            "delta_w": delta_w,
            "test_size": test_size,
            "seed": seed,
            "variant": variant,
            "metric": metric,
            "workers": workers,
            "output": output,
            "record_runtime": False if no_runtime else None,
        }
        if config_file:
            cfg = load_experiment_config(config_file, **overrides)
        else:
            if overrides["workers"] is None:
                overrides["workers"] = settings.workers
            cfg = ExperimentConfig(**{key: v for key, v in overrides.items() if v is not None})

        result = run_experiment(cfg)

        click.secho(f"\n✓ Wrote {len(result.records)} records to {output}", fg="green")
        if result.skipped:
            click.secho(f"⚠ Skipped {len(result.skipped)} infeasible cells", fg="yellow")
        click.echo("\nBest cell per r (mean gap +/- std of mean):")
        for r, cell in sorted(result.best_by_r().items()):
            click.echo(
                f"  r={r} d={cell.d} m={cell.m} ({cell.fraction:.2%}): "
                f"{cell.mean_gap:.4f} +/- {cell.std_mean:.4f}"
            )
        best = result.best_cell()
        if best is not None:
            click.secho(
                f"Best overall: r={best.r} d={best.d} m={best.m} mean gap {best.mean_gap:.4f}",
                bold=True,
            )
        sys.exit(0)
    except Exception as e:
        click.secho("✗ Experiment failed:", fg="red", err=True)
        click.echo(f"  {str(e)}", err=True)
        sys.exit(1)


# ============================================================================
# VERIFICATION COMMANDS
# ============================================================================


@main.command(name="verify-identity")
@click.option("--domain-size", type=int, default=200, show_default=True)
@click.option("--r", "r", type=int, default=2, show_default=True)
@click.option("--k", "k", type=int, default=3, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--n", "n", type=int, default=40, show_default=True, help="Size of F")
@click.option("--format", type=FORMATS, default="summary")
def verify_identity_cmd(
    domain_size: int, r: int, k: int, seed: int, n: int, format: str
) -> None:
    """Check the inclusion-exclusion identity exactly on a finite domain."""
    try:
        report = verify_identity(domain_size, r, k, seed, n=n)
        if format == "json":
            click.echo(to_json_string(report))
        elif format == "yaml":
            click.echo(to_yaml_string(report))
        else:
            click.secho(str(report), fg="green" if report.passed else "red")
            for depth, value in sorted(report.truncated_sums.items()):
                click.echo(f"  depth {depth}: {value:.12f}")
            for failure in report.failures:
                click.secho(f"  ✗ {failure}", fg="red")
        sys.exit(0 if report.passed else 1)
    except Exception as e:
        click.secho("✗ Identity check failed:", fg="red", err=True)
        click.echo(f"  {str(e)}", err=True)
        sys.exit(1)


@main.command(name="coverage")
@click.option(
    "--suite",
    "suites",
    type=click.Choice([s.value for s in CoverageSuite]),
    multiple=True,
    help="Repeatable (default: all)",
)
@click.option("--repetitions", type=int, default=200, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--n", "n", type=int, default=2000, show_default=True)
@click.option("--k", "k", type=int, default=3, show_default=True)
@click.option("--r", "r", type=int, default=2, show_default=True)
@click.option("--q", "q", type=int, default=20, show_default=True)
@click.option("--test-size", type=int, default=20000, show_default=True)
@click.option("--format", type=FORMATS, default="summary")
def coverage_cmd(
    suites: tuple[str, ...],
    repetitions: int,
    seed: int,
    n: int,
    k: int,
    r: int,
    q: int,
    test_size: int,
    format: str,
) -> None:
    """Run Monte Carlo coverage and oracle suites."""
    try:
        selected = [CoverageSuite(s) for s in suites] or list(CoverageSuite)
        reports = [
            run_coverage(suite, repetitions, seed, n=n, k=k, r=r, test_size=test_size, q=q)
            for suite in selected
        ]
        for report in reports:
            if format == "json":
                click.echo(to_json_string(report))
            elif format == "yaml":
                click.echo(to_yaml_string(report))
            else:
                click.secho(str(report), fg="green" if report.passed else "red")
        sys.exit(0 if all(report.passed for report in reports) else 1)
    except Exception as e:
        click.secho("✗ Coverage run failed:", fg="red", err=True)
        click.echo(f"  {str(e)}", err=True)
        sys.exit(1)


if __name__ == "__main__":
    main()
