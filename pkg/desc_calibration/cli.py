"""
Command-line entry point: data generation, training, evaluation, ablations,
method comparison, per-value analysis and gradient checking.

Exit codes: 0 success, 1 usage or config/data error, 2 runtime or numeric error.
"""

from __future__ import annotations

import functools
import logging
import sys
from pathlib import Path

import click
import numpy as np
import pandas as pd

from .calibrators import fit_calibrator, load_calibrator, save_calibrator
from .cli_utils import RESOLVED_CONFIG, reconstruct_command_line, resolve_config, resolved_document
from .config import PRESETS, Method, RunConfig
from .data.dataset import Dataset, Role, load_csv, split_indices, subsample, to_frame
from .desc import DescModel, ablation_table, check_gradients
from .errors import CheckpointError, ConfigError, DataError, NotFittedError, NumericError
from .io import AtomicWriter
from .metrics import evaluate, mf_metrics, per_value_table, reliability_table
from .synthgen import TRUE_PROBABILITY_COLUMN, DistortionSpec, generate, oracle_report, schema_for

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_RUNTIME = 2

CHECKPOINT_FILE = "checkpoint.json"
COMPARE_METHODS = (Method.IDENTITY, Method.HB, Method.IR, Method.PLATT, Method.TEMP, Method.SIR, Method.SCALEBIN, Method.DESC)
ROW_NAMES = {Method.IDENTITY: "No Calib."}


def run_options(func):
    """Options shared by every subcommand."""

    @click.option("--config", "-c", "config_path", default=None, type=click.Path(exists=True, dir_okay=False), help="JSON run config")
    @click.option("--preset", default=None, type=click.Choice(sorted(PRESETS)), help="Start from a named config")
    @click.option("--seed", default=None, type=int, help="Seed for generation, shuffling and initialization")
    @click.option("--method", "-m", default=None, type=click.Choice([m.value for m in Method]), help="Calibration method")
    @click.option("--data", "data_dir", default=None, type=click.Path(file_okay=False), help="Directory holding validation.csv and test.csv")
    @click.option("--out", "-o", default="out", type=click.Path(file_okay=False), help="Output directory")
    @click.option("--set", "overrides", multiple=True, help="Config override section.key=value (repeatable)")
    @functools.wraps(func)
    def wrapper(config_path, preset, seed, method, data_dir, out, overrides, **kwargs):
        config = resolve_config(config_path, preset, seed, method, overrides, data_dir)
        out = Path(out)
        writer = AtomicWriter()
        writer.write_json(out / RESOLVED_CONFIG, resolved_document(config, reconstruct_command_line(click.get_current_context().command)))
        return func(config, out, writer, **kwargs)

    return wrapper


def load_scored(path: Path) -> Dataset:
    """Test rows indexed by their own tokens: the field grouping every metric uses."""
    return load_csv(path, role=Role.TRAIN).with_role(Role.TEST)


def load_splits(config: RunConfig) -> tuple[Dataset, Dataset, Dataset]:
    """
    (calibration, test, scored).

    `test` is indexed against the calibration vocabularies and feeds the
    calibrators; `scored` holds the same rows grouped by their own tokens, so
    unseen test values stay apart in the metrics.
    """
    data_dir = Path(config.data.data_dir)
    calibration = load_csv(data_dir / config.data.calibration_file, role=Role.TRAIN).with_role(Role.VALIDATION)
    test = load_csv(data_dir / config.data.test_file, role=Role.TEST, schema=calibration.schema)
    return calibration, test, load_scored(data_dir / config.data.test_file)


def echo_summary(title: str, summary: dict) -> None:
    click.echo(title)
    for key, value in summary.items():
        click.echo(f"  {key:>14}: {'n/a' if value is None else f'{value:.6f}'}")


@click.group()
@click.option("--verbose", "-v", is_flag=True, default=False, help="Debug logging")
def main(verbose):
    """Multi-field post-hoc calibration toolkit."""
    logging.basicConfig(level=logging.DEBUG if verbose else logging.INFO, format="%(asctime)s %(levelname)s %(name)s: %(message)s")


@main.command()
@run_options
def gen(config: RunConfig, out: Path, writer: AtomicWriter):
    """Generate a synthetic dataset with known true probabilities and its splits."""
    distortion = DistortionSpec.from_config(schema_for(config.gen), config.distortion)
    generated = generate(config.gen, distortion)
    frame = to_frame(generated.dataset)
    frame[TRUE_PROBABILITY_COLUMN] = generated.true_probs
    writer.write_frame(out / "dataset.csv", frame)
    for name, indices in zip(("train", "validation", "test"), split_indices(len(frame), config.data.split_fractions, config.seed)):
        writer.write_frame(out / f"{name}.csv", frame.iloc[indices].reset_index(drop=True))
    writer.write_json(out / "metadata.json", generated.metadata())

    m = config.metrics
    oracle = oracle_report(generated.dataset, generated.true_probs, config.data.fields, m.ece_bins, m.complexity_bins)
    writer.write_json(out / "oracle_report.json", oracle.to_dict())
    echo_summary(f"Generated {len(frame)} samples into {out}; oracle metrics:", oracle.summary())


@main.command()
@run_options
def train(config: RunConfig, out: Path, writer: AtomicWriter):
    """Fit a calibrator on the validation split and write its checkpoint."""
    calibration, _, _ = load_splits(config)
    calibrator = fit_calibrator(config.method, calibration, config)
    save_calibrator(out / CHECKPOINT_FILE, calibrator)
    if isinstance(calibrator, DescModel) and calibrator.trace is not None:
        writer.write_frame(out / "loss_trace.csv", calibrator.trace.to_frame())
        click.echo(f"Trained DESC: loss {calibrator.trace.initial_loss:.6f} -> {calibrator.trace.final_loss:.6f} (epoch {calibrator.trace.best_epoch} kept)")
    click.echo(f"Wrote {calibrator.kind} checkpoint to {out / CHECKPOINT_FILE}")


@main.command(name="eval")
@click.option("--checkpoint", "checkpoint_path", default=None, type=click.Path(dir_okay=False), help="Checkpoint (default <out>/checkpoint.json)")
@run_options
def eval_(config: RunConfig, out: Path, writer: AtomicWriter, checkpoint_path):
    """Apply a checkpoint to the test split and write the metrics report."""
    calibrator = load_calibrator(checkpoint_path or out / CHECKPOINT_FILE)
    test_path = Path(config.data.data_dir) / config.data.test_file
    test = load_scored(test_path)
    inputs = load_csv(test_path, role=Role.TEST, schema=calibrator.schema) if isinstance(calibrator, DescModel) else test
    p_calib = calibrator.predict(inputs)

    m = config.metrics
    report = evaluate(test, p_calib, config.data.fields, m.ece_bins, m.bin_mode, m.complexity_bins)
    writer.write_json(out / "metrics.json", report.to_dict())
    writer.write_frame(out / "reliability.csv", reliability_table(test.labels, p_calib, test.p_uncalib, m.reliability_bins, m.bin_mode))
    writer.write_frame(out / "predictions.csv", pd.DataFrame({"label": test.labels.astype(np.int64), "p_uncalib": test.p_uncalib, "p_calib": p_calib}))
    echo_summary(f"{calibrator.kind} on {len(test)} test samples:", report.summary())


@main.command()
@run_options
def ablate(config: RunConfig, out: Path, writer: AtomicWriter):
    """Train the full model and every ablation variant under one seed."""
    calibration, test, scored = load_splits(config)
    table, reports = ablation_table(calibration, test, config.desc, config.metrics, config.variants, config.data.fields, scored)
    writer.write_frame(out / "ablation.csv", table)
    writer.write_json(out / "ablation.json", {name: report.to_dict() for name, report in reports.items()})
    click.echo(table.to_string(index=False))


@main.command()
@click.option("--corrupt", default=None, hidden=True, help="Falsify the gradient of one parameter (negative control)")
@run_options
def gradcheck(config: RunConfig, out: Path, writer: AtomicWriter, corrupt):
    """Check DESC gradients against finite differences on a built-in micro dataset."""
    report = check_gradients(seed=config.desc.seed, corrupt=corrupt)
    writer.write_json(out / "gradcheck.json", report.to_dict())
    status = "PASS" if report.passed else "FAIL"
    click.echo(f"{status}: max relative error {report.max_error:.3e} (worst parameter: {report.worst_parameter})")
    return EXIT_OK if report.passed else EXIT_RUNTIME


@main.command()
@run_options
def compare(config: RunConfig, out: Path, writer: AtomicWriter):
    """Fit DESC and every baseline on the validation split and compare them on the test split."""
    calibration, test, scored = load_splits(config)
    m = config.metrics
    rows, reports = [], {}
    for method in COMPARE_METHODS:
        calibrator = fit_calibrator(method, calibration, config)
        report = evaluate(scored, calibrator.predict(test), config.data.fields, m.ece_bins, m.bin_mode, m.complexity_bins)
        reports[method.value] = report.to_dict()
        rows.append({"method": ROW_NAMES.get(method, method.value), **report.summary()})
    table = pd.DataFrame(rows)
    writer.write_frame(out / "compare.csv", table)
    writer.write_json(out / "compare.json", reports)
    click.echo(table.to_string(index=False))


@main.command()
@run_options
def analyze(config: RunConfig, out: Path, writer: AtomicWriter):
    """Per-field-value error ratios and the calibration-data down-sampling sweep."""
    calibration, test, scored = load_splits(config)
    m = config.metrics
    methods = [Method.DESC, *(Method(c) for c in m.competitors if c != Method.DESC.value)]
    fields = config.data.fields or list(scored.schema.field_names)
    bins = max(m.ece_bins)

    predictions = {method.value: fit_calibrator(method, calibration, config).predict(test) for method in methods}
    tables = [per_value_table(scored, predictions, field, m.complexity_bins, bins, "desc", m.bin_mode) for field in fields]
    writer.write_frame(out / "per_value.csv", pd.concat(tables, ignore_index=True))

    rows = []
    for ratio in m.sample_ratios:
        subset = subsample(calibration, ratio, config.seed)
        for method in methods:
            p_calib = fit_calibrator(method, subset, config).predict(test)
            row = {"ratio": ratio, "calibration_samples": len(subset), "method": method.value}
            for count in m.ece_bins:
                row[f"mf_ece@{count}"] = mf_metrics(scored, p_calib, fields, count, m.bin_mode)[1]
            rows.append(row)
    sweep = pd.DataFrame(rows)
    writer.write_frame(out / "sampling.csv", sweep)
    click.echo(sweep.to_string(index=False))


def invoke(args: list[str] | None = None) -> int:
    """Run the CLI and map failures to exit codes."""
    try:
        result = main.main(args=args, prog_name="desc_calibration", standalone_mode=False)
    except click.exceptions.Abort:
        click.echo("Aborted.", err=True)
        return EXIT_USAGE
    except click.ClickException as e:
        e.show()
        return EXIT_USAGE
    except (ConfigError, DataError, NotFittedError) as e:
        click.echo(f"Error: {e}", err=True)
        return EXIT_USAGE
    except (NumericError, CheckpointError, OSError, ValueError) as e:
        click.echo(f"Error: {e}", err=True)
        return EXIT_RUNTIME
    return result if isinstance(result, int) else EXIT_OK


def run() -> None:
    sys.exit(invoke())


if __name__ == "__main__":
    run()
