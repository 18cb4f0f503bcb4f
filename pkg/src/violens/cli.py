"""One executable for the whole pipeline.

Subcommands mirror the pipeline stages: bootstrap (bundled demo data),
ingest, build-dataset, augment, train, evaluate, annotate-zeroshot, report
and serve. Every command writes a run manifest (config snapshot, input
hashes, outputs, timing) under the manifest directory; a rerun with
identical inputs and config references the prior manifest.

Options may come from a YAML config file (``--config``); explicit flags win.
Exit codes: 2 for missing inputs, 3 for validation failures.
"""

from __future__ import annotations

import functools
import hashlib
import json
import os
import sys
import time
from pathlib import Path

import click
import yaml

from . import bundled, dataset as ds, evalkit, ingest as ing, llm, models
from .jsonl import read_jsonl, write_jsonl
from .records import (
    CATEGORY_TASKS,
    TASK_DETECT,
    TASKS,
    ConfigurationError,
    ConflictError,
    LabeledExample,
    Prediction,
    ValidationError,
)
from .store import CorpusStore, new_id

EXIT_MISSING_INPUT = 2
EXIT_VALIDATION = 3

API_KEY_ENV = "VIOLENS_API_KEY"


def _fail(kind: str, message: str, code: int):
    click.echo(f"error: {kind}: {message}", err=True)
    sys.exit(code)


def pipeline_command(fn):
    """Map pipeline failures onto the documented exit codes."""

    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except FileNotFoundError as exc:
            _fail("missing-input", str(exc), EXIT_MISSING_INPUT)
        except (ValidationError, ConfigurationError, ConflictError, ing.ParseError) as exc:
            _fail("validation", str(exc), EXIT_VALIDATION)

    return wrapper


def _sha256_file(path: Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            h.update(chunk)
    return h.hexdigest()


def _collect_inputs(paths) -> dict[str, str]:
    hashes = {}
    for p in paths:
        p = Path(p)
        if p.is_dir():
            for child in sorted(p.rglob("*")):
                if child.is_file():
                    hashes[str(child)] = _sha256_file(child)
        elif p.is_file():
            hashes[str(p)] = _sha256_file(p)
    return hashes


def write_manifest(ctx, command: str, inputs, outputs, config: dict, started: float):
    mdir = Path(ctx.obj["manifest_dir"])
    mdir.mkdir(parents=True, exist_ok=True)
    input_hashes = _collect_inputs(inputs)
    key_src = json.dumps(
        {"command": command, "inputs": input_hashes, "config": config}, sort_keys=True
    )
    key = hashlib.sha256(key_src.encode()).hexdigest()[:16]
    prior = sorted(mdir.glob(f"{command}-{key}-*.json"))
    manifest = {
        "command": command,
        "config": config,
        "inputs": input_hashes,
        "outputs": [str(o) for o in outputs],
        "started": started,
        "duration_s": round(time.time() - started, 3),
        "key": key,
        "reuses": prior[0].name if prior else None,
    }
    path = mdir / f"{command}-{key}-{len(prior) + 1}.json"
    path.write_text(json.dumps(manifest, indent=2), "utf-8")
    return path


def _cfg(ctx, key: str, flag_value, default):
    if flag_value is not None:
        return flag_value
    return ctx.obj["config"].get(key, default)


@click.group()
@click.option("--config", "config_path", type=click.Path(), default=None,
              help="YAML config file; explicit flags override its keys.")
@click.option("--manifest-dir", default="runs/manifests", show_default=True)
@click.pass_context
def main(ctx, config_path, manifest_dir):
    """Violence detection and categorization pipeline for historical corpora."""
    config = {}
    if config_path:
        if not Path(config_path).exists():
            _fail("missing-input", f"config file {config_path} not found", EXIT_MISSING_INPUT)
        config = yaml.safe_load(Path(config_path).read_text("utf-8")) or {}
    ctx.obj = {"config": config, "manifest_dir": manifest_dir}


@main.command()
@click.option("--out", "out_dir", required=True, type=click.Path())
@click.pass_context
@pipeline_command
def bootstrap(ctx, out_dir):
    """Write the bundled demonstration corpus and curated events."""
    started = time.time()
    paths = bundled.write_bundle(out_dir)
    click.echo(f"corpus: {paths['corpus_dir']} ({len(paths['corpus_files'])} works)")
    click.echo(f"events: {paths['events']}")
    click.echo(f"catalog: {paths['catalog']}")
    write_manifest(ctx, "bootstrap", [], [paths["corpus_dir"], paths["events"], paths["catalog"]],
                   {"out": str(out_dir)}, started)


@main.command()
@click.option("--corpus", "corpus_paths", multiple=True, required=True, type=click.Path())
@click.option("--events", "events_path", type=click.Path(), default=None)
@click.option("--store", "store_path", required=True, type=click.Path())
@click.pass_context
@pipeline_command
def ingest(ctx, corpus_paths, events_path, store_path):
    """Parse corpus files, store passages and events, report alignment."""
    started = time.time()
    files: list[Path] = []
    for p in corpus_paths:
        p = Path(p)
        if not p.exists():
            raise FileNotFoundError(f"corpus path {p} does not exist")
        files.extend(sorted(p.glob("*.txt")) + sorted(p.glob("*.jsonl")) if p.is_dir() else [p])
    passages = ing.parse_corpus(files)
    store = CorpusStore(store_path)
    stored = store.put_passages(passages)
    click.echo(f"passages: {len(passages)} parsed, {stored} newly stored")
    if events_path:
        if not Path(events_path).exists():
            raise FileNotFoundError(f"events file {events_path} does not exist")
        events = [ing.CuratedEvent.from_json(obj) for obj in read_jsonl(events_path)]
        store.put_events(events)
        report, _ = ing.align_events(events, passages)
        click.echo(
            f"alignment: matched={report.matched} unmatched={len(report.unmatched)} "
            f"violent={report.violent_passages} nonviolent={report.nonviolent_passages}"
        )
    write_manifest(ctx, "ingest", list(files) + ([events_path] if events_path else []),
                   [store_path], {"store": str(store_path)}, started)


@main.command("build-dataset")
@click.option("--store", "store_path", required=True, type=click.Path())
@click.option("--task", type=click.Choice(TASKS), default=TASK_DETECT, show_default=True)
@click.option("--out", "out_dir", required=True, type=click.Path())
@click.option("--seed", type=int, default=None)
@click.option("--test-size", type=int, default=None)
@click.option("--train-frac", type=float, default=None)
@click.pass_context
@pipeline_command
def build_dataset(ctx, store_path, task, out_dir, seed, test_size, train_frac):
    """Build the train/test split for one task from the stored corpus."""
    started = time.time()
    if not Path(store_path).exists():
        raise FileNotFoundError(f"store {store_path} does not exist")
    seed = _cfg(ctx, "seed", seed, ds.DEFAULT_SEED)
    store = CorpusStore(store_path)
    if task == TASK_DETECT:
        test_size = _cfg(ctx, "test_size", test_size, 500)
        passages = store.list_passages()
        events = store.list_events()
        violent, negatives, report = ing.split_violent_nonviolent(passages, events)
        click.echo(f"alignment: violent={len(violent)} nonviolent={len(negatives)}")
        split = ds.make_detection_split(violent, negatives, test_size=test_size, seed=seed)
    else:
        train_frac = _cfg(ctx, "train_frac", train_frac, 0.8)
        events = store.list_events()
        split = ds.make_categorization_split(events, task, train_frac=train_frac, seed=seed)
    ds.check_no_leakage(split)
    paths = ds.write_split(split, out_dir)
    click.echo(f"train: {len(split.train)} test: {len(split.test)} -> {out_dir}")
    click.echo(json.dumps(split.stats))
    write_manifest(ctx, "build-dataset", [store_path], list(paths.values()),
                   {"task": task, "seed": seed, "test_size": test_size,
                    "train_frac": train_frac}, started)


def _make_paraphraser(use_stub, base_url, model_name, cache_dir, rate):
    if use_stub:
        return llm.StubParaphraser()
    api_key = os.environ.get(API_KEY_ENV)
    if not api_key:
        raise ConfigurationError(f"{API_KEY_ENV} must be set for --api augmentation")
    chat = llm.HttpChatClient(base_url, model_name, api_key=api_key, rate_per_minute=rate)
    return llm.ParaphraseClient(chat, cache_dir=cache_dir)


@main.command()
@click.option("--train", "train_path", required=True, type=click.Path())
@click.option("--out", "out_path", required=True, type=click.Path())
@click.option("--k", type=int, default=None)
@click.option("--cache-dir", default=None, type=click.Path())
@click.option("--stub/--api", "use_stub", default=True, show_default=True)
@click.option("--base-url", default="https://api.openai.com/v1")
@click.option("--model-name", default="gpt-4o-mini")
@click.option("--rate", type=float, default=60.0, help="requests per minute")
@click.option("--parallelism", type=int, default=4)
@click.pass_context
@pipeline_command
def augment(ctx, train_path, out_path, k, cache_dir, use_stub, base_url, model_name,
            rate, parallelism):
    """Expand a training file with label-preserving paraphrases."""
    started = time.time()
    if not Path(train_path).exists():
        raise FileNotFoundError(f"training file {train_path} does not exist")
    k = _cfg(ctx, "k", k, 3)
    cache_dir = _cfg(ctx, "cache_dir", cache_dir, None)
    examples = ds.read_examples(train_path)
    paraphraser = _make_paraphraser(use_stub, base_url, model_name, cache_dir, rate)
    result = ds.augment(examples, paraphraser, k=k, parallelism=parallelism)
    ds.write_examples(out_path, result.examples, split="train")
    click.echo(result.summary())
    by_label: dict[str, int] = {}
    for e in result.examples:
        by_label[e.label] = by_label.get(e.label, 0) + 1
    click.echo(json.dumps(by_label))
    if result.failures:
        click.echo(f"failures: {json.dumps(result.failures[:10])}", err=True)
    write_manifest(ctx, "augment", [train_path], [out_path],
                   {"k": k, "stub": use_stub, "model_name": model_name}, started)


@main.command()
@click.option("--task", type=click.Choice(TASKS), required=True)
@click.option("--train", "train_path", required=True, type=click.Path())
@click.option("--run-dir", required=True, type=click.Path())
@click.option("--backbone", default=None)
@click.option("--seed", type=int, default=None)
@click.option("--epochs", type=int, default=None)
@click.option("--learning-rate", type=float, default=None)
@click.option("--batch-size", type=int, default=None)
@click.option("--max-sequence-length", type=int, default=None)
@click.option("--validation-fraction", type=float, default=None)
@click.option("--fine-tune/--as-is", "fine_tune", default=True, show_default=True)
@click.option("--name", default=None, help="explicit model id")
@click.pass_context
@pipeline_command
def train(ctx, task, train_path, run_dir, backbone, seed, epochs, learning_rate,
          batch_size, max_sequence_length, validation_fraction, fine_tune, name):
    """Fine-tune a classifier for one task and persist its artifact."""
    started = time.time()
    if not Path(train_path).exists():
        raise FileNotFoundError(f"training file {train_path} does not exist")
    config = models.TrainConfig(
        backbone=_cfg(ctx, "backbone", backbone, models.SMALL_BACKBONE),
        seed=_cfg(ctx, "seed", seed, ds.DEFAULT_SEED),
        epochs=_cfg(ctx, "epochs", epochs, 3),
        learning_rate=_cfg(ctx, "learning_rate", learning_rate, 2e-5),
        batch_size=_cfg(ctx, "batch_size", batch_size, 16),
        max_sequence_length=_cfg(ctx, "max_sequence_length", max_sequence_length, 512),
        validation_fraction=_cfg(ctx, "validation_fraction", validation_fraction, 0.0),
        fine_tune=fine_tune,
    )
    examples = ds.read_examples(train_path)
    if task == TASK_DETECT:
        handle = models.train_detector(examples, config, run_dir, name=name)
    else:
        handle = models.train_categorizer(task, examples, config, run_dir, name=name)
    click.echo(f"model: {handle.model_id} [{', '.join(handle.tags)}]")
    click.echo(f"artifact: {handle.path}")
    if "validation" in handle.metrics:
        overall = handle.metrics["validation"]["overall"]
        click.echo(f"validation F1 (weighted): {overall['f1']:.3f}")
    write_manifest(ctx, "train", [train_path], [handle.path],
                   {"task": task, "config": json.loads(json.dumps(vars(config), default=str)),
                    "model_id": handle.model_id}, started)


def _report_from_vectors(preds, golds, task, model_id):
    from .registries import load_registry

    return evalkit.evaluate(preds, golds, load_registry(task), task, model_id=model_id)


@main.command()
@click.option("--task", type=click.Choice(TASKS), default=None)
@click.option("--preds", "preds_path", type=click.Path(), default=None,
              help="JSONL with passage_id, task, pred and optionally gold")
@click.option("--golds", "golds_path", type=click.Path(), default=None,
              help="JSONL with passage_id and gold (or label)")
@click.option("--model", "model_id", default=None)
@click.option("--run-dir", default=None, type=click.Path())
@click.option("--test", "test_path", default=None, type=click.Path(),
              help="labeled examples JSONL to score a stored model on")
@click.option("--format", "fmt", type=click.Choice(["text", "csv"]), default="text")
@click.option("--out", "out_path", default=None, type=click.Path(),
              help="also write the report as JSON")
@click.pass_context
@pipeline_command
def evaluate(ctx, task, preds_path, golds_path, model_id, run_dir, test_path, fmt, out_path):
    """Score predictions against gold labels and render the report table."""
    started = time.time()
    inputs = []
    if model_id and test_path:
        if not Path(test_path).exists():
            raise FileNotFoundError(f"test file {test_path} does not exist")
        handle = models.load_model(run_dir or "runs", model_id)
        examples = ds.read_examples(test_path)
        report = models.evaluate_examples(handle, examples)
        inputs = [test_path]
    elif preds_path:
        if not Path(preds_path).exists():
            raise FileNotFoundError(f"predictions file {preds_path} does not exist")
        pred_rows = list(read_jsonl(preds_path))
        golds_by_id = {}
        if golds_path:
            if not Path(golds_path).exists():
                raise FileNotFoundError(f"golds file {golds_path} does not exist")
            for row in read_jsonl(golds_path):
                golds_by_id[row.get("passage_id") or row["id"]] = row.get("gold") or row["label"]
            inputs = [preds_path, golds_path]
        else:
            inputs = [preds_path]
        preds, golds = [], []
        for row in pred_rows:
            pid = row.get("passage_id") or row.get("id")
            gold = row.get("gold") if row.get("gold") is not None else golds_by_id.get(pid)
            if gold is None:
                raise ValidationError(f"no gold label for {pid}")
            preds.append(row["pred"])
            golds.append(gold)
        task = task or pred_rows[0].get("task") or TASK_DETECT
        report = _report_from_vectors(preds, golds, task, model_id or "predictions")
    else:
        raise ValidationError("provide either --preds or --model with --test")
    click.echo(evalkit.render_report([report], fmt=fmt), nl=False)
    outputs = []
    if out_path:
        Path(out_path).parent.mkdir(parents=True, exist_ok=True)
        Path(out_path).write_text(json.dumps(report.to_json(), indent=2), "utf-8")
        outputs.append(out_path)
    write_manifest(ctx, "evaluate", inputs, outputs,
                   {"task": report.task, "model_id": report.model_id, "format": fmt}, started)


@main.command("annotate-zeroshot")
@click.option("--store", "store_path", required=True, type=click.Path())
@click.option("--work", "works", multiple=True, help="restrict to these works")
@click.option("--out", "out_path", required=True, type=click.Path())
@click.option("--stub/--api", "use_stub", default=True, show_default=True)
@click.option("--base-url", default="https://api.openai.com/v1")
@click.option("--model-name", default="gpt-4o-mini")
@click.option("--rate", type=float, default=60.0)
@click.option("--cache-dir", default=None, type=click.Path())
@click.option("--record/--no-record", default=False,
              help="also persist predictions into the store")
@click.pass_context
@pipeline_command
def annotate_zeroshot(ctx, store_path, works, out_path, use_stub, base_url, model_name,
                      rate, cache_dir, record):
    """Classify stored passages with the zero-shot annotator prompt."""
    started = time.time()
    if not Path(store_path).exists():
        raise FileNotFoundError(f"store {store_path} does not exist")
    store = CorpusStore(store_path)
    passages = store.list_passages(work_ids=list(works) or None)
    if not passages:
        raise ValidationError("no passages match the work filter")
    if use_stub:
        chat = llm.StubZeroShotChat()
    else:
        api_key = os.environ.get(API_KEY_ENV)
        if not api_key:
            raise ConfigurationError(f"{API_KEY_ENV} must be set for --api annotation")
        chat = llm.HttpChatClient(base_url, model_name, api_key=api_key, rate_per_minute=rate)
    annotator = llm.ZeroShotAnnotator(chat, cache_dir=cache_dir)
    rows, predictions = [], []
    for p in passages:
        result = annotator.classify_zero_shot(p.text)
        label = annotator.label_or_default(result)
        score = {True: 1.0 if label == "violent" else 0.0}.get(result.parse_ok, 0.5)
        rows.append(
            {"passage_id": p.id, "task": TASK_DETECT, "pred": label,
             "parse_ok": result.parse_ok, "model_id": f"zeroshot-{chat.model_name}"}
        )
        predictions.append(
            Prediction(
                id=new_id("pred"), passage_id=p.id, task=TASK_DETECT, label=label,
                score=score, model_id=f"zeroshot-{chat.model_name}",
            )
        )
    write_jsonl(out_path, rows)
    if record:
        store.add_predictions(predictions)
    click.echo(
        f"annotated {len(rows)} passages, {annotator.ambiguous_count} ambiguous -> {out_path}"
    )
    write_manifest(ctx, "annotate-zeroshot", [store_path], [out_path],
                   {"works": sorted(works), "stub": use_stub, "model_name": model_name},
                   started)


@main.command()
@click.option("--reports", "report_paths", multiple=True, required=True, type=click.Path())
@click.option("--format", "fmt", type=click.Choice(["text", "csv"]), default="text")
@click.pass_context
@pipeline_command
def report(ctx, report_paths, fmt):
    """Render one or more saved evaluation reports as a combined table."""
    started = time.time()
    loaded = []
    for p in report_paths:
        if not Path(p).exists():
            raise FileNotFoundError(f"report {p} does not exist")
        loaded.append(evalkit.EvalReport.from_json(json.loads(Path(p).read_text("utf-8"))))
    click.echo(evalkit.render_report(loaded, fmt=fmt), nl=False)
    write_manifest(ctx, "report", list(report_paths), [], {"format": fmt}, started)


@main.command()
@click.option("--store", "store_path", required=True, type=click.Path())
@click.option("--run-dir", required=True, type=click.Path())
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=None,
              help="defaults to VIOLENS_PORT or 8000")
@pipeline_command
def serve(store_path, run_dir, host, port):
    """Run the review service (token read from VIOLENS_API_TOKEN)."""
    import uvicorn

    from .service import create_app

    if not Path(store_path).exists():
        raise FileNotFoundError(f"store {store_path} does not exist")
    if port is None:
        port = int(os.environ.get("VIOLENS_PORT", "8000"))
    app = create_app(CorpusStore(store_path), run_dir)
    uvicorn.run(app, host=host, port=port)


if __name__ == "__main__":
    main()
