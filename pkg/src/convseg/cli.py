"""Command-line entry point: ingest -> split -> stats -> train -> segment ->
evaluate -> compare.

Every command writes its outputs into an output directory together with a
single manifest.json recording the command, its configuration, input digests,
seed, and wall-clock duration. Exit codes: 0 success, 1 I/O, 2 usage/format,
3 empty result, 4 mismatch.
"""

import functools
import hashlib
import json
import sys
import time
from pathlib import Path

import click

from . import __version__, corpus, metrics, segmenters, stats, training
from .errors import (
    ConvsegError,
    EvalMismatchError,
    IngestError,
    MetricError,
    ScorerError,
    SegmenterError,
    SplitError,
    TrainingError,
)
from .scorer_client import HttpScorer

DEFAULT_SEED = 13

EXIT_IO = 1
EXIT_FORMAT = 2
EXIT_EMPTY = 3
EXIT_MISMATCH = 4


def _digest(path):
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            h.update(chunk)
    return h.hexdigest()


def _json_dump(obj, path):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


class ManifestWriter:
    """Records input digests up front, outputs and duration at the end."""

    def __init__(self, command, outdir, config, seed, inputs):
        self.outdir = Path(outdir)
        self.outdir.mkdir(parents=True, exist_ok=True)
        self.started = time.monotonic()
        self.payload = {
            "command": command,
            "config": config,
            "inputs": {str(p): _digest(p) for p in inputs},
            "seed": seed,
            "tool_version": __version__,
            "outputs": [],
        }

    def path_for(self, name):
        path = self.outdir / name
        self.payload["outputs"].append(str(path))
        return path

    def finish(self):
        self.payload["duration_s"] = round(time.monotonic() - self.started, 6)
        _json_dump(self.payload, self.outdir / "manifest.json")


def handle_errors(func):
    @functools.wraps(func)
    def wrapper(*args, **kwargs):
        try:
            return func(*args, **kwargs)
        except (SplitError, MetricError) as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(EXIT_EMPTY)
        except EvalMismatchError as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(EXIT_MISMATCH)
        except (IngestError, SegmenterError, TrainingError, ScorerError, ValueError) as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(EXIT_FORMAT)
        except ConvsegError as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(EXIT_FORMAT)
        except OSError as exc:
            click.echo(f"I/O error: {exc}", err=True)
            sys.exit(EXIT_IO)

    return wrapper


@click.group()
@click.option(
    "--config",
    "config_path",
    type=click.Path(dir_okay=False),
    default=None,
    help="JSON config file; flags take precedence over config values.",
)
@click.version_option(__version__)
@click.pass_context
def cli(ctx, config_path):
    if config_path is not None:
        try:
            with open(config_path, encoding="utf-8") as fh:
                ctx.default_map = json.load(fh)
        except OSError as exc:
            click.echo(f"I/O error: {exc}", err=True)
            sys.exit(EXIT_IO)
        except json.JSONDecodeError as exc:
            click.echo(f"error: bad config file: {exc}", err=True)
            sys.exit(EXIT_FORMAT)


def seed_option(func):
    return click.option(
        "--seed",
        type=int,
        default=DEFAULT_SEED,
        envvar="CONVSEG_SEED",
        show_default=True,
    )(func)


@cli.command()
@click.argument("input_path", type=click.Path(dir_okay=False))
@click.option("-o", "--outdir", required=True, type=click.Path(file_okay=False))
@click.option("--min-steps", type=int, default=corpus.DEFAULT_MIN_STEPS, show_default=True)
@click.option(
    "--dedup-hamming", type=int, default=corpus.DEFAULT_MAX_HAMMING, show_default=True
)
@seed_option
@handle_errors
def ingest(input_path, outdir, min_steps, dedup_hamming, seed):
    """Parse raw step-annotated JSONL into a flattened corpus."""
    recipes = corpus.ingest(input_path)
    n_read = len(recipes)
    kept_steps = corpus.filter_min_steps(recipes, min_steps)
    n_short = n_read - len(kept_steps)
    kept = corpus.dedup(kept_steps, dedup_hamming)
    n_dup = len(kept_steps) - len(kept)

    manifest = ManifestWriter(
        "ingest",
        outdir,
        {"min_steps": min_steps, "dedup_hamming": dedup_hamming},
        seed,
        [input_path],
    )
    unannotated = [corpus.build_document(r) for r in kept if not r.annotated]
    annotated = [corpus.build_document(r) for r in kept if r.annotated]
    corpus.save_corpus(unannotated, manifest.path_for("corpus.jsonl"))
    if annotated:
        corpus.save_corpus(annotated, manifest.path_for("annotated.jsonl"))
    manifest.finish()
    click.echo(
        f"read {n_read}  kept {len(kept)}  dropped-short {n_short}  dropped-dup {n_dup}"
    )


@cli.command()
@click.argument("corpus_path", type=click.Path(dir_okay=False))
@click.argument("annotated_path", type=click.Path(dir_okay=False))
@click.option("-o", "--outdir", required=True, type=click.Path(file_okay=False))
@click.option("--ratio", type=float, default=corpus.DEFAULT_SPLIT_RATIO, show_default=True)
@click.option("--threshold", type=float, default=None, help="Override the sentences-per-step threshold.")
@seed_option
@handle_errors
def split(corpus_path, annotated_path, outdir, ratio, threshold, seed):
    """Build the train/validation/test split manifest."""
    unannotated = corpus.load_corpus(corpus_path)
    annotated = corpus.load_corpus(annotated_path)
    result = corpus.make_split(
        annotated, unannotated, ratio=ratio, seed=seed, threshold=threshold
    )
    manifest = ManifestWriter(
        "split", outdir, {"ratio": ratio, "threshold": threshold}, seed,
        [corpus_path, annotated_path],
    )
    _json_dump(
        {
            "threshold": result.threshold_sentences_per_step,
            "seed": seed,
            "train": [d.id for d in result.train],
            "validation": [d.id for d in result.validation],
            "test": [d.id for d in result.test],
        },
        manifest.path_for("split.json"),
    )
    manifest.finish()
    click.echo(
        f"threshold {result.threshold_sentences_per_step:.4f}  "
        f"train {len(result.train)}  validation {len(result.validation)}  "
        f"test {len(result.test)}"
    )


@cli.command(name="stats")
@click.argument("corpus_path", type=click.Path(dir_okay=False))
@click.option("-o", "--outdir", required=True, type=click.Path(file_okay=False))
@click.option("--ngram-n", type=int, default=3, show_default=True)
@click.option("--top-k", type=int, default=20, show_default=True)
@seed_option
@handle_errors
def stats_cmd(corpus_path, outdir, ngram_n, top_k, seed):
    """Corpus distribution battery and boundary n-gram tables."""
    docs = corpus.load_corpus(corpus_path)
    result = stats.corpus_stats(docs)
    manifest = ManifestWriter(
        "stats", outdir, {"ngram_n": ngram_n, "top_k": top_k}, seed, [corpus_path]
    )
    stats.stats_to_json(result, manifest.path_for("stats.json"))
    for name in ("doc_steps", "doc_sentences", "step_tokens", "step_verbs", "step_nouns"):
        stats.histogram_to_csv(result, name, manifest.path_for(f"hist_{name}.csv"))
    for position in ("starting", "ending"):
        table = stats.boundary_ngrams(docs, position, ngram_n, top_k)
        stats.ngram_table_to_csv(table, manifest.path_for(f"ngrams_{position}.csv"))
    uniq = stats.uniqueness_fraction(docs, ngram_n)
    _json_dump(
        {"n": ngram_n, "uniqueness_fraction": uniq},
        manifest.path_for("uniqueness.json"),
    )
    manifest.finish()
    click.echo(
        f"documents {len(docs)}  mean steps {result.mean_steps:.2f}  "
        f"uniqueness@{ngram_n} {uniq:.3f}"
    )


@cli.command()
@click.option("--corpus", "corpus_path", required=True, type=click.Path(dir_okay=False))
@click.option("--split", "split_path", required=True, type=click.Path(dir_okay=False))
@click.option("-o", "--outdir", required=True, type=click.Path(file_okay=False))
@click.option("--epochs", type=int, default=20, show_default=True)
@click.option("--batch-size", type=int, default=16, show_default=True)
@click.option("--lr", type=float, default=1e-2, show_default=True)
@click.option("--l2", type=float, default=0.0, show_default=True)
@click.option("--pos-weight", type=float, default=1.0, show_default=True)
@seed_option
@handle_errors
def train(corpus_path, split_path, outdir, epochs, batch_size, lr, l2, pos_weight, seed):
    """Train the boundary classifier on a split and keep the best epoch."""
    docs = {d.id: d for d in corpus.load_corpus(corpus_path)}
    with open(split_path, encoding="utf-8") as fh:
        split_manifest = json.load(fh)
    try:
        train_docs = [docs[i] for i in split_manifest["train"]]
        val_docs = [docs[i] for i in split_manifest["validation"]]
    except KeyError as exc:
        raise EvalMismatchError(f"split references unknown doc id {exc}") from exc
    config = training.TrainConfig(
        epochs=epochs,
        batch_size=batch_size,
        learning_rate=lr,
        l2=l2,
        pos_weight=pos_weight,
        seed=seed,
    )
    report = training.train_on_documents(train_docs, val_docs, config=config)
    manifest = ManifestWriter(
        "train",
        outdir,
        {
            "epochs": epochs,
            "batch_size": batch_size,
            "learning_rate": lr,
            "l2": l2,
            "pos_weight": pos_weight,
        },
        seed,
        [corpus_path, split_path],
    )
    training.save_model(report.model, manifest.path_for("model.json"))
    _json_dump(report.to_dict(), manifest.path_for("train_report.json"))
    manifest.finish()
    best = report.epochs[report.best_epoch]
    click.echo(
        f"best epoch {report.best_epoch}  val F1 {best.val_f1:.4f}  "
        f"val P {best.val_precision:.4f}  val R {best.val_recall:.4f}"
    )


@cli.command()
@click.argument("corpus_path", type=click.Path(dir_okay=False))
@click.option("-o", "--outdir", required=True, type=click.Path(file_okay=False))
@click.option(
    "--method",
    required=True,
    type=click.Choice(sorted(segmenters.SEGMENTER_CLASSES)),
)
@click.option("--p", type=float, default=0.5, show_default=True, help="rand: break probability")
@click.option("--n", type=int, default=1, show_default=True, help="every: break interval")
@click.option("--w", type=int, default=10, show_default=True, help="texttiling: pseudosentence size")
@click.option("--k-blocks", type=int, default=3, show_default=True)
@click.option("--smoothing-width", type=int, default=2, show_default=True)
@click.option("--model", "model_path", type=click.Path(dir_okay=False), default=None)
@click.option("--endpoint", default=None, help="external: scorer URL")
@click.option("--threshold", type=float, default=0.5, show_default=True)
@seed_option
@handle_errors
def segment(
    corpus_path, outdir, method, p, n, w, k_blocks, smoothing_width,
    model_path, endpoint, threshold, seed,
):
    """Segment every document of a corpus with one method."""
    docs = corpus.load_corpus(corpus_path)
    if method == "rand":
        seg = segmenters.RandPSegmenter(p=p, seed=seed)
    elif method == "every":
        seg = segmenters.EveryNSegmenter(n=n)
    elif method == "texttiling":
        seg = segmenters.TextTilingSegmenter(
            w=w, k_blocks=k_blocks, smoothing_width=smoothing_width
        )
    elif method == "classifier":
        if model_path is None:
            raise SegmenterError("--method classifier requires --model")
        seg = segmenters.ClassifierSegmenter(model=training.load_model(model_path))
    else:
        if endpoint is None:
            raise SegmenterError("--method external requires --endpoint")
        seg = segmenters.ExternalSegmenter(
            scorer=HttpScorer(endpoint), threshold=threshold
        )
    inputs = [corpus_path] + ([model_path] if model_path else [])
    manifest = ManifestWriter(
        "segment",
        outdir,
        {"method": method, **{k: v for k, v in seg.get_params().items() if k != "scorer"}},
        seed,
        inputs,
    )
    out_path = manifest.path_for("segmentations.jsonl")
    with open(out_path, "w", encoding="utf-8") as fh:
        for doc in docs:
            record = segmenters.segmentation_to_record(seg.predict(doc), method)
            fh.write(json.dumps(record, sort_keys=True) + "\n")
    manifest.finish()
    click.echo(f"segmented {len(docs)} documents with {method}")


def _load_predictions(path):
    preds = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            if not raw.strip():
                continue
            try:
                obj = json.loads(raw)
                preds[obj["id"]] = list(obj["breaks"])
            except (json.JSONDecodeError, KeyError, TypeError) as exc:
                raise IngestError(f"bad prediction record: {exc}", lineno) from exc
    return preds


@cli.command()
@click.argument("gold_path", type=click.Path(dir_okay=False))
@click.argument("pred_paths", nargs=-1, required=True, type=click.Path(dir_okay=False))
@click.option("-o", "--outdir", required=True, type=click.Path(file_okay=False))
@click.option("--k", type=int, default=None, help="Fixed Pk window size.")
@seed_option
@handle_errors
def evaluate(gold_path, pred_paths, outdir, k, seed):
    """Score predictions against gold breaks; multiple files = seeded runs."""
    docs = corpus.load_corpus(gold_path)
    reports = [
        metrics.evaluate_corpus(docs, _load_predictions(p), k=k) for p in pred_paths
    ]
    manifest = ManifestWriter(
        "evaluate", outdir, {"k": k, "runs": len(pred_paths)}, seed,
        [gold_path, *pred_paths],
    )
    runs = metrics.aggregate_runs(reports) if len(reports) > 1 else None
    metrics.report_to_json(reports[0], manifest.path_for("report.json"), runs=runs)
    metrics.report_to_csv(reports[0], manifest.path_for("report.csv"))
    manifest.finish()
    agg = reports[0].aggregate
    if runs:
        line = "  ".join(
            f"{name} {runs['aggregate'][name]['formatted']}"
            for name in ("pk_mean", "precision_micro", "recall_micro", "f1_micro")
        )
        click.echo(f"runs {len(reports)}  {line}")
    else:
        click.echo(
            f"Pk {agg['pk_mean']:.4f}  P {agg['precision_micro']:.4f}  "
            f"R {agg['recall_micro']:.4f}  F1 {agg['f1_micro']:.4f}"
        )


@cli.command()
@click.argument("report_a", type=click.Path(dir_okay=False))
@click.argument("report_b", type=click.Path(dir_okay=False))
@handle_errors
def compare(report_a, report_b):
    """Side-by-side aggregate table with a delta column per metric."""
    rows = []
    sides = []
    for path in (report_a, report_b):
        with open(path, encoding="utf-8") as fh:
            payload = json.load(fh)
        if "aggregate" not in payload:
            raise IngestError(f"{path}: missing 'aggregate' section")
        sides.append(payload["aggregate"])
    for _, key in metrics.CSV_COLUMNS:
        if key not in sides[0] or key not in sides[1]:
            raise IngestError(f"missing column {key!r} in report")
        a, b = sides[0][key], sides[1][key]
        rows.append((key, a, b, b - a))
    width = max(len(r[0]) for r in rows)
    click.echo(f"{'metric':<{width}}  {'A':>12}  {'B':>12}  {'delta':>12}")
    for key, a, b, delta in rows:
        click.echo(f"{key:<{width}}  {a:>12.4f}  {b:>12.4f}  {delta:>+12.4f}")


def main():
    cli()


if __name__ == "__main__":
    main()
