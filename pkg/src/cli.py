"""Command-line interface for the ranking toolkit."""

import functools
import json
import logging
import sys
from pathlib import Path
from typing import Any, Callable, Optional, Sequence

import click

from src import __version__
from src.models import (
    DistortionSpec,
    FeatureExtractionError,
    PairConfig,
    RankedPair,
    RankerError,
    Split,
    TrainConfig,
)
from src.models.config import config_from_dict, config_to_dict
from src.models.errors import EXIT_IO, EXIT_VALIDATION
from src.models.record import ImageRecord, Manifest
from src.services.checkpoint import load_checkpoint, save_checkpoint
from src.services.corpus import build_val_triples, filter_split, load_manifest, resolve_path
from src.services.distortion import distort_chain
from src.services.evaluation import (
    BaselineKind,
    baseline_scorer,
    evaluate,
    format_report,
    model_scorer,
)
from src.services.exporter import save_image
from src.services.extractors import check_extractor_contract, extractor_identity, load_extractors
from src.services.features import (
    FeatureStore,
    build_feature_store,
    fit_normalizer,
    load_feature_store,
    save_feature_store,
)
from src.services.fixtures import MANIFEST_NAME, make_fixture_corpus
from src.services.loader import load_image
from src.services.pairgen import build_pairs, class_counts, materialize, read_pair_file
from src.services.scorer import score_images
from src.services.trainer import (
    HISTORY_FILE_NAME,
    pair_matrices,
    train,
    triple_tensor,
    write_history,
)
from src.utils.jsonl import dumps
from src.utils.log import configure_logging
from src.utils.parallel import THREADS_ENV
from src.utils.progress import create_reporter
from src.utils.run_config import load_config_file, resolve, write_resolved_config

logger = logging.getLogger(__name__)

CHECKPOINT_NAME = "model.rnkr"
REPORT_JSON_NAME = "report.json"
REPORT_TEXT_NAME = "report.txt"
SCORES_NAME = "scores.tsv"


class RankerGroup(click.Group):
    """Group that reports click usage errors with the validation exit code."""

    def main(self, args=None, prog_name=None, complete_var=None, standalone_mode=True, **extra):
        try:
            return super().main(
                args, prog_name, complete_var, standalone_mode=False, **extra
            )
        except click.ClickException as e:
            e.show()
            sys.exit(EXIT_VALIDATION)
        except click.Abort:
            click.echo("Aborted!", err=True)
            sys.exit(EXIT_VALIDATION)


def handle_errors(fn: Callable) -> Callable:
    """Map toolkit, config and OS errors to diagnostics and exit codes."""

    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except RankerError as e:
            click.echo(f"Error: {e.message}", err=True)
            sys.exit(e.exit_code)
        except ValueError as e:
            click.echo(f"Error: {e}", err=True)
            sys.exit(EXIT_VALIDATION)
        except OSError as e:
            click.echo(f"Error: {e}", err=True)
            sys.exit(EXIT_IO)

    return wrapper


def _settings(
    ctx: click.Context, command: str, defaults: dict[str, Any], flags: dict[str, Any]
) -> dict[str, Any]:
    """Resolve flag > config file > default for one subcommand."""
    file_values = load_config_file(ctx.obj.get("config"), command)
    settings = resolve(defaults, file_values, flags)
    logger.debug("Resolved %s config: %s", command, settings)
    return settings


def _load_manifest(path: str, lenient: bool = False) -> Manifest:
    if not Path(path).exists():
        raise FileNotFoundError(f"Manifest not found: {path}")
    return load_manifest(path, lenient=lenient)


def _image_root(manifest_path: str, image_root: Optional[str]) -> Path:
    return Path(image_root) if image_root else Path(manifest_path).resolve().parent


def _parse_floats(text: Optional[str]) -> Optional[tuple[float, ...]]:
    return None if text is None else tuple(float(v) for v in text.split(","))


threads_option = click.option(
    "--threads",
    type=int,
    default=None,
    envvar=THREADS_ENV,
    help=f"Worker threads (default: ${THREADS_ENV} or available CPUs).",
)
image_root_option = click.option(
    "--image-root",
    type=click.Path(),
    default=None,
    help="Directory relative image paths are resolved against (default: manifest directory).",
)


@click.group(cls=RankerGroup)
@click.option(
    "-v", "--verbose",
    is_flag=True,
    default=False,
    help="Show detailed progress information.",
)
@click.option(
    "--quiet",
    is_flag=True,
    default=False,
    help="Suppress all output except errors.",
)
@click.option(
    "--config",
    "config_path",
    type=click.Path(),
    default=None,
    help="TOML file with one table per subcommand.",
)
@click.version_option(version=__version__, prog_name="ugc-rank")
@click.pass_context
def cli(ctx: click.Context, verbose: bool, quiet: bool, config_path: Optional[str]) -> None:
    """Learn to rank image quality from synthetically distorted pairs.

    Examples:

        ugc-rank make-fixtures --out corpus

        ugc-rank generate-pairs --manifest corpus/manifest.jsonl --out run

        ugc-rank extract-features --manifest corpus/manifest.jsonl --pairs run/pairs.jsonl --out run/features.ugcf

        ugc-rank train --manifest corpus/manifest.jsonl --pairs run/pairs.jsonl --features run/features.ugcf --out run

        ugc-rank score --model run/model.rnkr photo1.jpg photo2.jpg
    """
    configure_logging(verbose=verbose, quiet=quiet)
    if config_path is not None and not Path(config_path).exists():
        click.echo(f"Error: Config file not found: {config_path}", err=True)
        sys.exit(EXIT_IO)
    ctx.obj = {"verbose": verbose, "quiet": quiet, "config": config_path}


@cli.command("generate-pairs")
@click.option("--manifest", "manifest_path", required=True, help="Image manifest (JSON lines).")
@click.option("--out", "out_dir", required=True, type=click.Path(), help="Output directory.")
@image_root_option
@click.option("--n-pairs", type=int, default=None, help="Number of pairs (default: 1000).")
@click.option("--chain-max", type=int, default=None, help="Longest distortion chain (default: 2).")
@click.option("--seed", type=int, default=None, help="Sampling seed (default: 0).")
@click.option(
    "--class-weights",
    default=None,
    help="Six comma-separated class weights (default: uniform).",
)
@click.option(
    "--preset",
    type=click.Choice(["uniform", "distortion-heavy"]),
    default=None,
    help="Named class weights; --class-weights wins.",
)
@click.option("--lenient", is_flag=True, default=False, help="Ignore unknown manifest fields.")
@threads_option
@click.pass_context
@handle_errors
def generate_pairs(
    ctx: click.Context,
    manifest_path: str,
    out_dir: str,
    image_root: Optional[str],
    n_pairs: Optional[int],
    chain_max: Optional[int],
    seed: Optional[int],
    class_weights: Optional[str],
    preset: Optional[str],
    lenient: bool,
    threads: Optional[int],
) -> None:
    """Sample ranked pairs from the train split and write distorted negatives."""
    defaults = config_to_dict(PairConfig())
    defaults["preset"] = "uniform"
    settings = _settings(
        ctx,
        "generate-pairs",
        defaults,
        {
            "n_pairs": n_pairs,
            "chain_max": chain_max,
            "seed": seed,
            "class_weights": _parse_floats(class_weights),
            "preset": preset,
        },
    )
    if settings["preset"] == "distortion-heavy" and class_weights is None:
        settings["class_weights"] = PairConfig.distortion_heavy(1).class_weights
    cfg = config_from_dict(PairConfig, settings)

    manifest = filter_split(_load_manifest(manifest_path, lenient), Split.TRAIN)
    root = _image_root(manifest_path, image_root)

    pairs = build_pairs(manifest, cfg)
    result = materialize(
        pairs, manifest, root, out_dir, threads, show_progress=not ctx.obj["quiet"]
    )
    write_resolved_config(
        out_dir,
        "generate-pairs",
        {**config_to_dict(cfg), "manifest": manifest_path, "image_root": root},
    )

    if not ctx.obj["quiet"]:
        counts = class_counts(result.pairs)
        click.echo(f"Pairs: {len(result.pairs)} -> {result.pair_file}")
        click.echo("  Classes: " + ", ".join(f"{k}={counts[k]}" for k in sorted(counts)))
        click.echo(f"  Distorted images written: {result.files_written}")
        if result.errors:
            click.echo(click.style(f"  Dropped: {len(result.errors)}", fg="yellow"))


@cli.command("extract-features")
@click.option("--manifest", "manifest_path", required=True, help="Image manifest (JSON lines).")
@click.option("--pairs", "pairs_path", default=None, help="Pair file whose distorted negatives to include.")
@click.option("--out", "out_path", required=True, type=click.Path(), help="Feature store file.")
@image_root_option
@click.option(
    "--extractor",
    default=None,
    help="'analytic' or 'onnx:PATH_A,PATH_T' (default: analytic).",
)
@click.option("--lenient", is_flag=True, default=False, help="Ignore unknown manifest fields.")
@threads_option
@click.pass_context
@handle_errors
def extract_features(
    ctx: click.Context,
    manifest_path: str,
    pairs_path: Optional[str],
    out_path: str,
    image_root: Optional[str],
    extractor: Optional[str],
    lenient: bool,
    threads: Optional[int],
) -> None:
    """Extract feature vectors of all manifest images and pair negatives."""
    settings = _settings(ctx, "extract-features", {"extractor": "analytic"}, {"extractor": extractor})
    aesthetic, technical = load_extractors(settings["extractor"])
    check_extractor_contract(aesthetic)
    check_extractor_contract(technical)

    manifest = _load_manifest(manifest_path, lenient)
    root = _image_root(manifest_path, image_root)
    pairs = read_pair_file(pairs_path) if pairs_path is not None else []
    items = _feature_items(manifest.records, root, pairs)

    store, errors = build_feature_store(
        items, aesthetic, technical, threads, show_progress=not ctx.obj["quiet"]
    )
    save_feature_store(store, out_path)
    write_resolved_config(
        Path(out_path).parent,
        "extract-features",
        {
            "extractor": settings["extractor"],
            "manifest": manifest_path,
            "pairs": pairs_path,
            "image_root": root,
            "out": out_path,
        },
    )

    if not ctx.obj["quiet"]:
        click.echo(f"Features: {len(store)} vectors (D={store.dim}) -> {out_path}")
        for key, message in errors:
            click.echo(click.style(f"  Skipped {key}: {message}", fg="yellow"), err=True)


@cli.command("train")
@click.option("--manifest", "manifest_path", required=True, help="Manifest with the val split.")
@click.option("--pairs", "pairs_path", required=True, help="Pair file from generate-pairs.")
@click.option(
    "--features",
    "features_path",
    default=None,
    help="Feature store from extract-features (default: extract from the manifest and pairs).",
)
@click.option("--out", "out_dir", required=True, type=click.Path(), help="Output directory.")
@click.option("--extractor", default=None, help="'analytic' or 'onnx:PATH_A,PATH_T' (default: analytic).")
@image_root_option
@click.option("--margin", type=float, default=None, help="Hinge margin (default: 1.0).")
@click.option("--lr", type=float, default=None, help="Initial learning rate (default: 1e-3).")
@click.option("--weight-decay", type=float, default=None, help="L2 coefficient (default: 5e-4).")
@click.option("--batch-size", type=int, default=None, help="Pairs per step (default: 16).")
@click.option("--max-epochs", type=int, default=None, help="Epoch budget (default: 50).")
@click.option("--patience", type=int, default=None, help="Plateau epochs before halving lr (default: 5).")
@click.option("--hidden", default=None, help="Hidden widths (default: 512,256,128).")
@click.option("--seed", type=int, default=None, help="Initialization and shuffle seed (default: 0).")
@click.option("--lenient", is_flag=True, default=False, help="Ignore unknown manifest fields.")
@threads_option
@click.pass_context
@handle_errors
def train_command(
    ctx: click.Context,
    manifest_path: str,
    pairs_path: str,
    features_path: Optional[str],
    out_dir: str,
    extractor: Optional[str],
    image_root: Optional[str],
    margin: Optional[float],
    lr: Optional[float],
    weight_decay: Optional[float],
    batch_size: Optional[int],
    max_epochs: Optional[int],
    patience: Optional[int],
    hidden: Optional[str],
    seed: Optional[int],
    lenient: bool,
    threads: Optional[int],
) -> None:
    """Train the ranker and write the best checkpoint with its history."""
    hidden_widths = None if hidden is None else tuple(int(v) for v in hidden.split(","))
    settings = _settings(
        ctx,
        "train",
        {**config_to_dict(TrainConfig()), "extractor": "analytic"},
        {
            "margin": margin,
            "lr": lr,
            "weight_decay": weight_decay,
            "batch_size": batch_size,
            "max_epochs": max_epochs,
            "patience": patience,
            "hidden": hidden_widths,
            "seed": seed,
            "extractor": extractor,
        },
    )
    cfg = config_from_dict(TrainConfig, settings)

    manifest = _load_manifest(manifest_path, lenient)
    pairs = read_pair_file(pairs_path)
    triples = build_val_triples(manifest)
    if not pairs:
        raise ValueError(f"no pairs in {pairs_path}")
    if not triples:
        raise ValueError("the val split has no style with studio, good and bad images")
    root = _image_root(manifest_path, image_root)
    if features_path is not None:
        store = load_feature_store(features_path)
    else:
        needed = [r for r in manifest.records if r.split in (Split.TRAIN, Split.VAL)]
        store = _extract_store(
            _feature_items(needed, root, pairs),
            settings["extractor"],
            threads,
            not ctx.obj["quiet"],
        )

    x_pos, x_neg = pair_matrices(store, pairs)
    unique_keys = sorted({p.pos_id for p in pairs} | {p.neg_id for p in pairs})
    normalizer = fit_normalizer(store.matrix(unique_keys)) if len(unique_keys) >= 2 else None

    reporter = create_reporter(1, ctx.obj["verbose"], ctx.obj["quiet"])
    try:
        result = train(
            x_pos,
            x_neg,
            triple_tensor(store, triples),
            cfg,
            normalizer=normalizer,
            extractor=store.extractor,
            reporter=reporter,
        )
    finally:
        if reporter is not None:
            reporter.close()

    out = Path(out_dir)
    checkpoint = save_checkpoint(result.model, out / CHECKPOINT_NAME)
    write_history(out / HISTORY_FILE_NAME, result.history)
    write_resolved_config(
        out,
        "train",
        {
            **config_to_dict(cfg),
            "manifest": manifest_path,
            "pairs": pairs_path,
            "features": features_path,
            "extractor": settings["extractor"],
            "image_root": root,
        },
    )

    if not ctx.obj["quiet"]:
        click.echo(
            click.style(f"Complete: {checkpoint}", fg="green", bold=True)
        )
        click.echo(
            f"  Best validation accuracy: {result.best_accuracy:.3f} "
            f"(epoch {result.best_epoch} of {len(result.history)})"
        )


@cli.command("score")
@click.argument("images", nargs=-1, required=True)
@click.option("--model", "model_path", required=True, help="Checkpoint from train.")
@click.option("--extractor", default=None, help="'analytic' or 'onnx:PATH_A,PATH_T' (default: analytic).")
@click.option("--out", "out_dir", type=click.Path(), default=None, help="Also write scores.tsv here.")
@click.option("--json", "json_output", is_flag=True, default=False, help="Output results as JSON.")
@threads_option
@click.pass_context
@handle_errors
def score(
    ctx: click.Context,
    images: tuple[str, ...],
    model_path: str,
    extractor: Optional[str],
    out_dir: Optional[str],
    json_output: bool,
    threads: Optional[int],
) -> None:
    """Print 'score<TAB>path' for each image, best first."""
    settings = _settings(ctx, "score", {"extractor": "analytic"}, {"extractor": extractor})
    aesthetic, technical = load_extractors(settings["extractor"])
    model = load_checkpoint(model_path)

    result = score_images(model, aesthetic, technical, list(images), threads)
    lines = [f"{value:.6f}\t{path}" for path, value in result.ranked]

    if json_output:
        click.echo(
            json.dumps(
                {
                    "ranked": [{"path": p, "score": s} for p, s in result.ranked],
                    "errors": [{"path": p, "error": m} for p, m in result.errors],
                },
                indent=2,
            )
        )
    else:
        for line in lines:
            click.echo(line)
        for path, message in result.errors:
            click.echo(f"Error: {message}", err=True)

    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / SCORES_NAME).write_text("".join(line + "\n" for line in lines), encoding="utf-8")
        write_resolved_config(
            out,
            "score",
            {"extractor": settings["extractor"], "model": model_path, "images": list(images)},
        )

    if not result.ranked:
        sys.exit(EXIT_IO)


@cli.command("evaluate")
@click.option("--test-manifest", "test_manifest_path", required=True, help="Manifest with the test split.")
@click.option("--train-manifest", "train_manifest_path", default=None, help="Manifest checked for id leakage.")
@click.option("--model", "model_path", default=None, help="Checkpoint to evaluate.")
@click.option("--baselines", is_flag=True, default=False, help="Also evaluate both expected-score baselines.")
@click.option("--features", "features_path", default=None, help="Feature store holding the test images.")
@click.option("--extractor", default=None, help="'analytic' or 'onnx:PATH_A,PATH_T' (default: analytic).")
@image_root_option
@click.option("--pairs-per-style", type=int, default=None, help="Sampled pairs per style (default: 50).")
@click.option("--seed", type=int, default=None, help="Pair-sampling seed (default: 0).")
@click.option("--out", "out_dir", type=click.Path(), default=None, help="Write report.json and report.txt here.")
@click.option("--per-style", is_flag=True, default=False, help="Show per-style rows.")
@click.option("--json", "json_output", is_flag=True, default=False, help="Output results as JSON.")
@click.option("--lenient", is_flag=True, default=False, help="Ignore unknown manifest fields.")
@threads_option
@click.pass_context
@handle_errors
def evaluate_command(
    ctx: click.Context,
    test_manifest_path: str,
    train_manifest_path: Optional[str],
    model_path: Optional[str],
    baselines: bool,
    features_path: Optional[str],
    extractor: Optional[str],
    image_root: Optional[str],
    pairs_per_style: Optional[int],
    seed: Optional[int],
    out_dir: Optional[str],
    per_style: bool,
    json_output: bool,
    lenient: bool,
    threads: Optional[int],
) -> None:
    """Per-style Pearson correlation and pair accuracy against proxy scores."""
    if model_path is None and not baselines:
        raise click.UsageError("give --model, --baselines, or both")
    settings = _settings(
        ctx,
        "evaluate",
        {"extractor": "analytic", "pairs_per_style": 50, "seed": 0},
        {"extractor": extractor, "pairs_per_style": pairs_per_style, "seed": seed},
    )
    if settings["pairs_per_style"] < 1:
        raise ValueError("pairs_per_style must be >= 1")

    test_manifest = _load_manifest(test_manifest_path, lenient)
    train_manifest = (
        _load_manifest(train_manifest_path, lenient) if train_manifest_path else None
    )
    test_records = filter_split(test_manifest, Split.TEST)

    store = _test_features(
        test_records,
        features_path,
        settings["extractor"],
        _image_root(test_manifest_path, image_root),
        threads,
        not ctx.obj["quiet"] and not json_output,
    )

    scorers = {}
    if model_path is not None:
        model = load_checkpoint(model_path, expected_extractor=store.extractor)
        scorers[Path(model_path).stem] = model_scorer(model, store)
    if baselines:
        for kind in BaselineKind:
            scorers[kind.model_name] = baseline_scorer(kind, store)

    report = evaluate(
        scorers,
        test_manifest,
        seed=settings["seed"],
        pairs_per_style=settings["pairs_per_style"],
        train_manifest=train_manifest,
    )
    table = format_report(report, per_style=per_style)

    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / REPORT_JSON_NAME).write_text(json.dumps(report.to_dict(), indent=2) + "\n", encoding="utf-8")
        (out / REPORT_TEXT_NAME).write_text(table + "\n", encoding="utf-8")
        write_resolved_config(
            out,
            "evaluate",
            {
                **settings,
                "test_manifest": test_manifest_path,
                "train_manifest": train_manifest_path,
                "model": model_path,
                "baselines": baselines,
                "features": features_path,
            },
        )

    if json_output:
        click.echo(json.dumps(report.to_dict(), indent=2))
    else:
        click.echo(table)


def _test_features(
    test_records: Manifest,
    features_path: Optional[str],
    extractor_spec: str,
    root: Path,
    threads: Optional[int],
    show_progress: bool,
) -> FeatureStore:
    """Stored features of the test images, extracted on the fly when no store is given."""
    if features_path is not None:
        return load_feature_store(features_path)
    return _extract_store(
        _feature_items(test_records.records, root), extractor_spec, threads, show_progress
    )


def _feature_items(
    records: Sequence[ImageRecord], root: Path, pairs: Sequence[RankedPair] = ()
) -> dict[str, Path]:
    """Image paths keyed by record id, plus the distorted negatives of ``pairs``."""
    items: dict[str, Path] = {r.id: resolve_path(r, root) for r in records}
    for pair in pairs:
        if pair.is_distortion_pair:
            items.setdefault(pair.neg_id, Path(pair.neg_path))
    return items


def _extract_store(
    items: dict[str, Path], extractor_spec: str, threads: Optional[int], show_progress: bool
) -> FeatureStore:
    """Features of every item; any image that fails to decode is an error."""
    aesthetic, technical = load_extractors(extractor_spec)
    check_extractor_contract(aesthetic)
    check_extractor_contract(technical)
    store, errors = build_feature_store(items, aesthetic, technical, threads, show_progress)
    if errors:
        raise FeatureExtractionError(errors)
    logger.debug(
        "Extracted %d vectors with %s", len(store), extractor_identity(aesthetic, technical)
    )
    return store


@cli.command("distort")
@click.argument("input_path")
@click.option(
    "--spec",
    "spec_json",
    required=True,
    help="Distortion spec as a JSON object, or a JSON list of them for a chain.",
)
@click.option("--out", "out_path", required=True, type=click.Path(), help="Output PNG path.")
@click.option("--chain-max", type=int, default=None, help="Longest accepted chain (default: 2).")
@click.pass_context
@handle_errors
def distort(
    ctx: click.Context,
    input_path: str,
    spec_json: str,
    out_path: str,
    chain_max: Optional[int],
) -> None:
    """Apply a distortion spec (or chain) to one image."""
    settings = _settings(ctx, "distort", {"chain_max": 2}, {"chain_max": chain_max})
    try:
        data = json.loads(spec_json)
    except json.JSONDecodeError as e:
        raise ValueError(f"--spec is not valid JSON: {e}")
    items = data if isinstance(data, list) else [data]
    try:
        specs = [DistortionSpec.from_dict(item) for item in items]
    except (KeyError, TypeError) as e:
        raise ValueError(f"invalid distortion spec: {e}")

    img = load_image(input_path)
    out = distort_chain(img, specs, chain_max=settings["chain_max"])
    save_image(out, out_path)

    if not ctx.obj["quiet"]:
        chain = " -> ".join(dumps(spec.to_dict()) for spec in specs)
        click.echo(f"{input_path} [{chain}] -> {out_path} ({out.height}x{out.width})")


@cli.command("make-fixtures")
@click.option("--out", "out_dir", required=True, type=click.Path(), help="Output directory.")
@click.option("--seed", type=int, default=0, show_default=True, help="Generator seed.")
@click.option("--styles", type=int, default=16, show_default=True, help="Number of styles.")
@click.pass_context
@handle_errors
def make_fixtures(ctx: click.Context, out_dir: str, seed: int, styles: int) -> None:
    """Write the procedurally generated fixture corpus and its manifest."""
    manifest = make_fixture_corpus(out_dir, seed=seed, n_styles=styles)
    write_resolved_config(out_dir, "make-fixtures", {"seed": seed, "styles": styles})
    if not ctx.obj["quiet"]:
        click.echo(f"Fixtures: {len(manifest)} images -> {Path(out_dir) / MANIFEST_NAME}")


def main() -> None:
    """Console script entry point."""
    cli()


if __name__ == "__main__":
    main()
