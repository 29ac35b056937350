"""Command-line interface: train, evaluate, grid-search, reproduce, curves.

Exit codes: 0 on success, 2 for input or configuration problems (missing
files, malformed data, mismatched feature counts, bad flags), 3 when a
learner's parameters became non-finite during training.
"""

from __future__ import annotations

import functools
import json
import sys
from pathlib import Path

import click

from . import _backend, harness
from .dataset import (
    DatasetError,
    load_benchmark,
    load_csv,
    load_manifest,
    split_train_test,
)
from .harness import CURVE_METHODS, GridSpec
from .learners import (
    METHODS,
    Hyperparams,
    NumericFailure,
    canonical_method,
    make_learner,
)
from .serialize import SnapshotError, load_model, save_model

EXIT_CONFIG = 2
EXIT_NUMERIC = 3


def _fail(code: int, message: str):
    click.echo(f"error: {message}", err=True)
    sys.exit(code)


def handle_errors(fn):
    """Map library exceptions onto the documented exit codes."""

    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except NumericFailure as err:
            _fail(EXIT_NUMERIC, str(err))
        except (DatasetError, SnapshotError, ValueError, OSError) as err:
            _fail(EXIT_CONFIG, str(err))

    return wrapper


def _parse_grid(text: str | None, name: str):
    if text is None:
        return None
    try:
        values = tuple(float(tok) for tok in text.split(",") if tok.strip())
    except ValueError:
        raise ValueError(f"--grid-{name} must be a comma-separated list of numbers")
    if not values:
        raise ValueError(f"--grid-{name} is empty")
    return values


def build_grids(grid_lambda, grid_mu, grid_nu, grid_c) -> GridSpec:
    spec = GridSpec()
    overrides = {}
    for name, text in (("lam", grid_lambda), ("mu", grid_mu),
                       ("nu", grid_nu), ("c", grid_c)):
        parsed = _parse_grid(text, name if name != "lam" else "lambda")
        if parsed is not None:
            overrides[name] = parsed
    if overrides:
        from dataclasses import replace
        spec = replace(spec, **overrides)
    spec.validate()
    return spec


def resolve_dataset(dataset: str, manifest, label_column, positive_label,
                    train_count, split_seed, stratify):
    """Benchmark name or CSV path -> (train, test) datasets.

    CSV paths need --label-column and --positive-label; --train-count
    defaults to 80% of the rows.
    """
    path = Path(dataset)
    if path.suffix or path.exists():
        if not path.exists():
            raise DatasetError(f"dataset file not found: {path}")
        if label_column is None or positive_label is None:
            raise DatasetError(
                "user-supplied files need --label-column and --positive-label")
        full = load_csv(path, label_column, positive_label, name=path.stem)
        count = train_count if train_count else max(1, round(0.8 * len(full)))
    else:
        full, spec = load_benchmark(dataset, manifest)
        count = train_count if train_count else spec.train_count
    return split_train_test(full, count, split_seed, stratify=stratify)


def _format_params(params: dict) -> str:
    names = {"lam": "lambda", "mu": "mu", "nu": "nu", "c": "c"}
    return " ".join(f"{names[k]}={v:g}" for k, v in params.items())


dataset_options = [
    click.option("--dataset", required=True,
                 help="Benchmark name (heart, liver, diabetes) or a CSV path."),
    click.option("--manifest", type=click.Path(), default=None,
                 help="Alternative dataset manifest file."),
    click.option("--label-column", type=int, default=None,
                 help="0-based label column for user-supplied CSV files."),
    click.option("--positive-label", default=None,
                 help="Label value mapped to +1 for user-supplied CSV files."),
    click.option("--train-count", type=int, default=None,
                 help="Training split size (defaults to the manifest value)."),
    click.option("--split-seed", type=int, default=0, show_default=True,
                 help="Seed of the train/test partition."),
    click.option("--stratify", is_flag=True, default=False,
                 help="Stratify the train/test partition by class."),
]

grid_options = [
    click.option("--grid-lambda", default=None,
                 help="Comma list overriding the weight-penalty grid."),
    click.option("--grid-mu", default=None,
                 help="Comma list overriding the slope-penalty grid."),
    click.option("--grid-nu", default=None,
                 help="Comma list overriding the offset-penalty grid."),
    click.option("--grid-c", default=None,
                 help="Comma list overriding the PA aggressiveness grid."),
]

backend_option = click.option(
    "--backend", type=click.Choice(["auto", "compiled", "python"]),
    default="auto", show_default=True,
    help="Training loop implementation (auto prefers the compiled kernel).")


def add_options(options):
    def wrap(fn):
        for option in reversed(options):
            fn = option(fn)
        return fn
    return wrap


def _resolve_backend_flag(backend: str):
    if backend == "auto":
        return None
    return backend


@click.group()
@click.version_option()
def main():
    """One-pass online learning with dynamic feature scaling."""


@main.command()
@add_options(dataset_options)
@click.option("--method", required=True, help="One of the 18 roster methods.")
@click.option("--lam", type=float, default=0.0, show_default=True,
              help="L2 penalty on the weights.")
@click.option("--mu", type=float, default=0.0, show_default=True,
              help="L2 penalty on the scale slopes.")
@click.option("--nu", type=float, default=0.0, show_default=True,
              help="L2 penalty on the scale offsets.")
@click.option("--c", type=float, default=1.0, show_default=True,
              help="PA aggressiveness bound.")
@click.option("--eta0", type=float, default=0.1, show_default=True,
              help="Initial learning rate.")
@click.option("--seed", type=int, default=0, show_default=True,
              help="Training-order shuffle seed.")
@click.option("--out", type=click.Path(), required=True,
              help="Where to write the model snapshot.")
@backend_option
@handle_errors
def train(dataset, manifest, label_column, positive_label, train_count,
          split_seed, stratify, method, lam, mu, nu, c, eta0, seed, out,
          backend):
    """Train one method on a dataset's training split and save the model."""
    method = canonical_method(method)
    train_part, _ = resolve_dataset(dataset, manifest, label_column,
                                    positive_label, train_count, split_seed,
                                    stratify)
    from .dataset import shuffle as shuffle_dataset

    stream = shuffle_dataset(train_part, seed)
    hyper = Hyperparams(lam=lam, mu=mu, nu=nu, c=c, eta0=eta0,
                        n_train=len(stream))
    learner = make_learner(method, stream.feature_count, hyper)
    curve = harness.run_one_pass(learner, stream,
                                 backend=_resolve_backend_flag(backend))
    save_model(learner, out)
    accuracy = harness.evaluate(learner, train_part)
    click.echo(f"trained {method} on {len(stream)} instances "
               f"({curve.final_errors} cumulative errors); "
               f"train accuracy {accuracy:.6f}; model written to {out}")


@main.command()
@add_options(dataset_options)
@click.option("--model", "model_path", type=click.Path(), required=True,
              help="Model snapshot written by the train command.")
@click.option("--split", type=click.Choice(["train", "test", "full"]),
              default="test", show_default=True,
              help="Which part of the dataset to score.")
@click.option("--adapt-test-stats", is_flag=True, default=False,
              help="Let GN statistics keep adapting on the scored features.")
@handle_errors
def evaluate(dataset, manifest, label_column, positive_label, train_count,
             split_seed, stratify, model_path, split, adapt_test_stats):
    """Score a saved model on a dataset split; prints the accuracy."""
    learner = load_model(model_path)
    train_part, test_part = resolve_dataset(dataset, manifest, label_column,
                                            positive_label, train_count,
                                            split_seed, stratify)
    if split == "train":
        part = train_part
    elif split == "test":
        part = test_part
    else:
        part = train_part.replace_instances(
            train_part.instances + test_part.instances, "full")
    if part.feature_count != learner.n_features:
        raise DatasetError(
            f"model expects {learner.n_features} features but dataset "
            f"{part.name!r} has {part.feature_count}")
    accuracy = harness.evaluate(learner, part, adapt_stats=adapt_test_stats)
    click.echo(f"{accuracy:.6f}")


@main.command("grid-search")
@add_options(dataset_options)
@click.option("--method", required=True, help="One of the 18 roster methods.")
@click.option("--seed", type=int, default=0, show_default=True,
              help="Shuffle/validation-split seed.")
@click.option("--eta0", type=float, default=0.1, show_default=True)
@add_options(grid_options)
@backend_option
@handle_errors
def grid_search(dataset, manifest, label_column, positive_label, train_count,
                split_seed, stratify, method, seed, eta0, grid_lambda, grid_mu,
                grid_nu, grid_c, backend):
    """Print the hyperparameters that win the validation search."""
    method = canonical_method(method)
    grids = build_grids(grid_lambda, grid_mu, grid_nu, grid_c)
    train_part, _ = resolve_dataset(dataset, manifest, label_column,
                                    positive_label, train_count, split_seed,
                                    stratify)
    from .dataset import shuffle as shuffle_dataset

    stream = shuffle_dataset(train_part, seed)
    best = harness.grid_search(method, stream, grids, seed=seed, eta0=eta0,
                               backend=_resolve_backend_flag(backend))
    used = harness.method_parameters(method)
    params = {name: getattr(best, name) for name in used}
    click.echo(_format_params(params))


def _report_rows(report):
    return {
        "dataset": report.dataset,
        "method": report.method,
        "train_accuracy": report.train_accuracy,
        "test_accuracy": report.test_accuracy,
        "best_params": report.best_params,
        "seeds": report.seeds,
        "seed_base": report.seed_base,
        "per_seed_train": list(report.per_seed_train),
        "per_seed_test": list(report.per_seed_test),
        "per_seed_params": list(report.per_seed_params),
    }


def _write_reproduce_csv(path: Path, reports):
    lines = ["method,train_accuracy,test_accuracy,best_params,"
             "per_seed_train,per_seed_test"]
    for r in reports:
        per_train = ";".join(f"{v:.6f}" for v in r.per_seed_train)
        per_test = ";".join(f"{v:.6f}" for v in r.per_seed_test)
        lines.append(f"{r.method},{r.train_accuracy:.6f},{r.test_accuracy:.6f},"
                     f"{_format_params(r.best_params)},{per_train},{per_test}")
    path.write_text("\n".join(lines) + "\n")


def _write_reproduce_jsonl(path: Path, reports):
    lines = [json.dumps(_report_rows(r), sort_keys=True) for r in reports]
    path.write_text("\n".join(lines) + "\n")


def _echo_table(name: str, reports):
    click.echo(f"\nResults on the {name} dataset "
               f"({reports[0].seeds}-seed means):")
    header = f"{'method':<10} {'train acc':>10} {'test acc':>10}  best parameters"
    click.echo(header)
    click.echo("-" * len(header))
    for r in reports:
        click.echo(f"{r.method:<10} {r.train_accuracy:>10.6f} "
                   f"{r.test_accuracy:>10.6f}  {_format_params(r.best_params)}")


@main.command()
@click.option("--dataset", default="all", show_default=True,
              help="Benchmark name or 'all'.")
@click.option("--manifest", type=click.Path(), default=None)
@click.option("--method", default="all", show_default=True,
              help="Roster method or 'all'.")
@click.option("--seeds", type=int, default=10, show_default=True)
@click.option("--seed-base", type=int, default=0, show_default=True)
@click.option("--split-seed", type=int, default=0, show_default=True)
@click.option("--stratify", is_flag=True, default=False)
@click.option("--adapt-test-stats", is_flag=True, default=False)
@click.option("--eta0", type=float, default=0.1, show_default=True)
@add_options(grid_options)
@click.option("--out", type=click.Path(), default=None,
              help="Directory for result files (one per dataset).")
@click.option("--format", "output_format",
              type=click.Choice(["csv", "json-lines"]), default="csv",
              show_default=True)
@click.option("--jobs", type=int, default=None,
              help="Parallel worker processes [default: CPU count].")
@backend_option
@handle_errors
def reproduce(dataset, manifest, method, seeds, seed_base, split_seed,
              stratify, adapt_test_stats, eta0, grid_lambda, grid_mu, grid_nu,
              grid_c, out, output_format, jobs, backend):
    """Run the full benchmark protocol and emit per-dataset result tables."""
    grids = build_grids(grid_lambda, grid_mu, grid_nu, grid_c)
    names = sorted(load_manifest(manifest)) if dataset == "all" else [dataset]
    methods = "all" if method == "all" else [method]
    if jobs is None:
        import os
        jobs = os.cpu_count() or 1
    if seeds < 1:
        raise ValueError("--seeds must be >= 1")

    results = harness.reproduce(
        names, methods, seeds=seeds, seed_base=seed_base, grids=grids,
        eta0=eta0, split_seed=split_seed, stratify=stratify,
        adapt_stats=adapt_test_stats, backend=_resolve_backend_flag(backend),
        manifest=manifest, jobs=jobs)

    out_dir = Path(out) if out else None
    if out_dir:
        out_dir.mkdir(parents=True, exist_ok=True)
    for name in names:
        reports = results[name]
        _echo_table(name, reports)
        if out_dir:
            if output_format == "csv":
                _write_reproduce_csv(out_dir / f"{name}.csv", reports)
            else:
                _write_reproduce_jsonl(out_dir / f"{name}.jsonl", reports)
    if out_dir:
        click.echo(f"\nresult files written to {out_dir}")


@main.command()
@click.option("--dataset", required=True, help="Benchmark name.")
@click.option("--manifest", type=click.Path(), default=None)
@click.option("--method", "methods", multiple=True,
              help="Curve methods (repeatable) "
                   f"[default: {', '.join(CURVE_METHODS)}].")
@click.option("--seed-base", type=int, default=0, show_default=True)
@click.option("--split-seed", type=int, default=0, show_default=True)
@click.option("--stratify", is_flag=True, default=False)
@click.option("--eta0", type=float, default=0.1, show_default=True)
@add_options(grid_options)
@click.option("--out", type=click.Path(), required=True,
              help="Directory for the curve CSV files.")
@backend_option
@handle_errors
def curves(dataset, manifest, methods, seed_base, split_seed, stratify, eta0,
           grid_lambda, grid_mu, grid_nu, grid_c, out, backend):
    """Write cumulative-training-error curves, one CSV per method.

    Each curve comes from the first seed's retraining run with its
    grid-selected hyperparameters.
    """
    grids = build_grids(grid_lambda, grid_mu, grid_nu, grid_c)
    method_list = [canonical_method(m) for m in methods] if methods \
        else list(CURVE_METHODS)
    out_dir = Path(out)
    out_dir.mkdir(parents=True, exist_ok=True)
    for method in method_list:
        report = harness.run_experiment(
            method, dataset, seeds=1, seed_base=seed_base, grids=grids,
            eta0=eta0, split_seed=split_seed, stratify=stratify,
            backend=_resolve_backend_flag(backend), manifest=manifest)
        path = out_dir / f"{dataset}_{method}.csv"
        lines = ["instances_seen,cumulative_errors"]
        lines.extend(f"{seen},{errors}" for seen, errors in report.curve.points())
        path.write_text("\n".join(lines) + "\n")
        click.echo(f"{path} (final errors: {report.curve.final_errors})")


if __name__ == "__main__":
    main()
