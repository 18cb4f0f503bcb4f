"""Trainable classifiers for violence detection and the four event
dimensions.

Backbones come in two tiers behind one interface:

* ``tfidf-logreg`` (default): TF-IDF features with a logistic-regression
  head. Trains in seconds on a laptop, fully offline; this is the tier the
  test suite and acceptance checks run.
* ``transformer:<model-id-or-path>``: fine-tunes a pretrained bidirectional
  encoder (requires the ``encoders`` extra and reachable weights).

Both tiers share the artifact layout: ``run_dir/<model_id>/`` holding
config.json, registry.txt (the frozen label snapshot), metrics.json and the
weights. "As-is" (no fine-tuning) keeps the randomly initialized head over
the frozen features, which reproduces the degenerate near-constant behavior
of unadapted models.
"""

from __future__ import annotations

import hashlib
import json
import time
import uuid
from dataclasses import asdict, dataclass, field
from pathlib import Path
from random import Random

import joblib
import numpy as np
from sklearn.feature_extraction.text import TfidfVectorizer
from sklearn.linear_model import LogisticRegression

from . import evalkit
from .records import (
    CATEGORY_TASKS,
    LABEL_VIOLENT,
    TASK_DETECT,
    ConfigurationError,
    LabeledExample,
    Passage,
    Prediction,
    ValidationError,
)
from .registries import LabelRegistry, load_registry

SMALL_BACKBONE = "tfidf-logreg"
TRANSFORMER_PREFIX = "transformer:"


@dataclass
class TrainConfig:
    backbone: str = SMALL_BACKBONE
    max_sequence_length: int = 512
    epochs: int = 3
    learning_rate: float = 2e-5
    batch_size: int = 16
    seed: int = 13
    validation_fraction: float = 0.0
    fine_tune: bool = True
    class_weight: str | None = None  # imbalance reweighting, off by default

    def __post_init__(self):
        if self.max_sequence_length <= 0:
            raise ValidationError("max_sequence_length must be > 0")
        if not 0.0 <= self.validation_fraction < 1.0:
            raise ValidationError("validation_fraction must be in [0, 1)")


@dataclass
class ModelHandle:
    model_id: str
    task: str
    labels: tuple[str, ...]
    config: TrainConfig
    tags: list[str] = field(default_factory=list)
    metrics: dict = field(default_factory=dict)
    path: Path | None = None
    _predictor: object | None = field(default=None, repr=False)

    @property
    def registry(self) -> LabelRegistry:
        return LabelRegistry(task=self.task, labels=self.labels)


def truncate_tokens(text: str, max_len: int) -> tuple[str, bool]:
    tokens = text.split()
    if len(tokens) <= max_len:
        return text, False
    return " ".join(tokens[:max_len]), True


class TfidfLogisticClassifier:
    """Small-tier backbone: TF-IDF features + logistic regression head."""

    def __init__(self, labels: tuple[str, ...], config: TrainConfig):
        self.labels = labels
        self.config = config
        self.vectorizer = TfidfVectorizer(
            lowercase=True, ngram_range=(1, 2), sublinear_tf=True, max_features=100_000
        )
        self.clf: LogisticRegression | None = None

    def fit(self, texts: list[str], labels: list[str]):
        texts = [truncate_tokens(t, self.config.max_sequence_length)[0] for t in texts]
        features = self.vectorizer.fit_transform(texts)
        if self.config.fine_tune:
            self.clf = LogisticRegression(
                max_iter=2000,
                random_state=self.config.seed,
                class_weight=self.config.class_weight,
            )
            self.clf.fit(features, labels)
        else:
            # frozen features + untrained random head
            rng = np.random.default_rng(self.config.seed)
            seen = sorted(set(labels))
            clf = LogisticRegression()
            clf.classes_ = np.array(seen)
            rows = 1 if len(seen) == 2 else len(seen)
            clf.coef_ = rng.normal(0.0, 0.02, size=(rows, features.shape[1]))
            clf.intercept_ = rng.normal(0.0, 0.5, size=rows)
            clf.n_features_in_ = features.shape[1]
            self.clf = clf
        return self

    def predict_proba_texts(self, texts: list[str]) -> tuple[np.ndarray, list[bool]]:
        truncated_pairs = [truncate_tokens(t, self.config.max_sequence_length) for t in texts]
        clipped = [t for t, _ in truncated_pairs]
        flags = [f for _, f in truncated_pairs]
        raw = self.clf.predict_proba(self.vectorizer.transform(clipped))
        # embed the fitted classes into the full registry snapshot
        probs = np.zeros((len(texts), len(self.labels)))
        for j, cls in enumerate(self.clf.classes_):
            probs[:, self.labels.index(cls)] = raw[:, j]
        return probs, flags

    def save(self, path: Path):
        joblib.dump(
            {"vectorizer": self.vectorizer, "clf": self.clf, "labels": self.labels},
            path / "weights.joblib",
        )

    @classmethod
    def load(cls, path: Path, config: TrainConfig) -> "TfidfLogisticClassifier":
        blob = joblib.load(path / "weights.joblib")
        model = cls(labels=tuple(blob["labels"]), config=config)
        model.vectorizer = blob["vectorizer"]
        model.clf = blob["clf"]
        return model


class TransformerClassifier:
    """Full-tier backbone: fine-tuned pretrained encoder (torch required)."""

    def __init__(self, labels: tuple[str, ...], config: TrainConfig, source: str | None = None):
        self.labels = labels
        self.config = config
        self.source = source or config.backbone.removeprefix(TRANSFORMER_PREFIX)
        self._torch = None
        self.tokenizer = None
        self.model = None

    def _imports(self):
        try:
            import torch
            from transformers import AutoModelForSequenceClassification, AutoTokenizer
        except ImportError as exc:  # pragma: no cover
            raise ConfigurationError(
                "transformer backbones need the 'encoders' extra: pip install violens[encoders]"
            ) from exc
        self._torch = torch
        return AutoModelForSequenceClassification, AutoTokenizer

    def _load_pretrained(self):
        auto_model, auto_tok = self._imports()
        self.tokenizer = auto_tok.from_pretrained(self.source)
        id2label = {i: lab for i, lab in enumerate(self.labels)}
        self.model = auto_model.from_pretrained(
            self.source,
            num_labels=len(self.labels),
            id2label=id2label,
            label2id={lab: i for i, lab in id2label.items()},
        )

    def fit(self, texts: list[str], labels: list[str]):
        self._load_pretrained()
        torch = self._torch
        torch.manual_seed(self.config.seed)
        if not self.config.fine_tune:
            return self  # keep the freshly initialized head
        device = torch.device("cuda" if torch.cuda.is_available() else "cpu")
        self.model.to(device).train()
        optimizer = torch.optim.AdamW(self.model.parameters(), lr=self.config.learning_rate)
        label_ids = torch.tensor([self.labels.index(lab) for lab in labels])
        order = list(range(len(texts)))
        rng = Random(self.config.seed)
        for _ in range(self.config.epochs):
            rng.shuffle(order)
            for start in range(0, len(order), self.config.batch_size):
                idx = order[start : start + self.config.batch_size]
                batch = self.tokenizer(
                    [texts[i] for i in idx],
                    truncation=True,
                    max_length=self.config.max_sequence_length,
                    padding=True,
                    return_tensors="pt",
                ).to(device)
                out = self.model(**batch, labels=label_ids[idx].to(device))
                out.loss.backward()
                optimizer.step()
                optimizer.zero_grad()
        self.model.eval()
        return self

    def predict_proba_texts(self, texts: list[str]) -> tuple[np.ndarray, list[bool]]:
        torch = self._torch
        self.model.eval()
        flags = [
            len(self.tokenizer(t, truncation=False)["input_ids"]) > self.config.max_sequence_length
            for t in texts
        ]
        probs = []
        with torch.no_grad():
            for start in range(0, len(texts), self.config.batch_size):
                batch = self.tokenizer(
                    texts[start : start + self.config.batch_size],
                    truncation=True,
                    max_length=self.config.max_sequence_length,
                    padding=True,
                    return_tensors="pt",
                )
                logits = self.model(**batch).logits
                probs.append(torch.softmax(logits, dim=-1).numpy())
        return np.concatenate(probs, axis=0), flags

    def save(self, path: Path):
        weights = path / "weights"
        self.model.save_pretrained(weights)
        self.tokenizer.save_pretrained(weights)

    @classmethod
    def load(cls, path: Path, config: TrainConfig, labels: tuple[str, ...]) -> "TransformerClassifier":
        model = cls(labels=labels, config=config, source=str(path / "weights"))
        model._load_pretrained()
        model.model.eval()
        return model


def _build_backbone(labels: tuple[str, ...], config: TrainConfig):
    if config.backbone == SMALL_BACKBONE:
        return TfidfLogisticClassifier(labels, config)
    if config.backbone.startswith(TRANSFORMER_PREFIX):
        return TransformerClassifier(labels, config)
    raise ConfigurationError(f"unknown backbone: {config.backbone!r}")


def _dataset_digest(examples: list[LabeledExample], config: TrainConfig) -> str:
    h = hashlib.sha256(json.dumps(asdict(config), sort_keys=True).encode())
    for e in sorted(examples, key=lambda e: (e.source_id, e.provenance)):
        h.update(f"{e.source_id}\x00{e.provenance}\x00{e.label}\x00{e.text}".encode())
    return h.hexdigest()[:8]


def _carve_validation(
    examples: list[LabeledExample], fraction: float, seed: int
) -> tuple[list[LabeledExample], list[LabeledExample]]:
    if fraction <= 0:
        return examples, []
    rng = Random(seed)
    by_label: dict[str, list[LabeledExample]] = {}
    for e in sorted(examples, key=lambda e: (e.source_id, e.provenance)):
        by_label.setdefault(e.label, []).append(e)
    train, val = [], []
    for label in sorted(by_label):
        pool = by_label[label]
        n_val = int(len(pool) * fraction)
        chosen = set(rng.sample(range(len(pool)), n_val)) if len(pool) > 1 else set()
        for i, e in enumerate(pool):
            (val if i in chosen else train).append(e)
    return train, val


def _train(
    task: str,
    train_examples: list[LabeledExample],
    config: TrainConfig,
    run_dir: str | Path,
    name: str | None,
    registry: LabelRegistry,
) -> ModelHandle:
    if not train_examples:
        raise ConfigurationError("empty training set")
    label_set = {e.label for e in train_examples}
    for label in label_set:
        registry.validate(label)
    if len(label_set) < 2:
        raise ConfigurationError(
            f"training set has a single class ({label_set.pop()}); need at least 2"
        )

    fit_examples, val_examples = _carve_validation(
        train_examples, config.validation_fraction, config.seed
    )
    augmented = any(e.is_paraphrase for e in train_examples)
    tags = ["fine-tuned" if config.fine_tune else "as-is"]
    if augmented:
        tags.append("augmented")

    model_id = name or f"{task}-{_slug(config.backbone)}-s{config.seed}-{_dataset_digest(train_examples, config)}"
    backbone = _build_backbone(registry.labels, config)
    backbone.fit([e.text for e in fit_examples], [e.label for e in fit_examples])

    handle = ModelHandle(
        model_id=model_id,
        task=task,
        labels=registry.labels,
        config=config,
        tags=tags,
        _predictor=backbone,
    )
    handle.metrics = {
        "train_size": len(fit_examples),
        "validation_size": len(val_examples),
        "augmented": augmented,
        "trained_at": time.time(),
    }
    if val_examples:
        report = evaluate_examples(handle, val_examples)
        handle.metrics["validation"] = report.to_json()

    _persist(handle, Path(run_dir))
    return handle


def _slug(backbone: str) -> str:
    return backbone.replace(TRANSFORMER_PREFIX, "").replace("/", "-").replace(":", "-")


def train_detector(
    train_examples: list[LabeledExample],
    config: TrainConfig,
    run_dir: str | Path,
    name: str | None = None,
) -> ModelHandle:
    """Fit a binary violent/non-violent classifier and persist its artifact."""
    return _train(
        TASK_DETECT, train_examples, config, run_dir, name, load_registry(TASK_DETECT)
    )


def train_categorizer(
    task: str,
    train_examples: list[LabeledExample],
    config: TrainConfig,
    run_dir: str | Path,
    name: str | None = None,
) -> ModelHandle:
    """Fit one independent multi-class model for a single event dimension.

    The label snapshot is the full registry for the dimension, even when the
    training data realizes fewer classes.
    """
    if task not in CATEGORY_TASKS:
        raise ValidationError(f"unsupported categorization dimension: {task!r}")
    return _train(task, train_examples, config, run_dir, name, load_registry(task))


def _persist(handle: ModelHandle, run_dir: Path):
    path = run_dir / handle.model_id
    path.mkdir(parents=True, exist_ok=True)
    (path / "config.json").write_text(
        json.dumps(
            {
                "model_id": handle.model_id,
                "task": handle.task,
                "tags": handle.tags,
                "config": asdict(handle.config),
            },
            indent=2,
        ),
        "utf-8",
    )
    (path / "registry.txt").write_text("\n".join(handle.labels) + "\n", "utf-8")
    (path / "metrics.json").write_text(json.dumps(handle.metrics, indent=2), "utf-8")
    handle._predictor.save(path)
    handle.path = path


def load_model(run_dir: str | Path, model_id: str) -> ModelHandle:
    path = Path(run_dir) / model_id
    if not (path / "config.json").exists():
        raise ConfigurationError(f"no model artifact at {path}")
    meta = json.loads((path / "config.json").read_text("utf-8"))
    labels = tuple((path / "registry.txt").read_text("utf-8").split())
    config = TrainConfig(**meta["config"])
    if config.backbone == SMALL_BACKBONE:
        predictor = TfidfLogisticClassifier.load(path, config)
    else:
        predictor = TransformerClassifier.load(path, config, labels)
    metrics = json.loads((path / "metrics.json").read_text("utf-8"))
    return ModelHandle(
        model_id=meta["model_id"],
        task=meta["task"],
        labels=labels,
        config=config,
        tags=meta.get("tags", []),
        metrics=metrics,
        path=path,
        _predictor=predictor,
    )


def _texts_and_ids(items) -> tuple[list[str], list[str]]:
    texts, ids = [], []
    for i, item in enumerate(items):
        if isinstance(item, Passage):
            texts.append(item.text)
            ids.append(item.id)
        elif isinstance(item, LabeledExample):
            texts.append(item.text)
            ids.append(item.source_id)
        else:
            texts.append(str(item))
            ids.append(f"text-{i}")
    return texts, ids


def predict_violence(
    handle: ModelHandle, passages: list, threshold: float = 0.5
) -> list[Prediction]:
    """One prediction per passage, batch order preserved.

    The score is the violent-class probability; the label is violent exactly
    when it reaches the threshold.
    """
    if handle.task != TASK_DETECT:
        raise ValidationError(f"model {handle.model_id} is a {handle.task} model, not detect")
    if not passages:
        return []
    texts, ids = _texts_and_ids(passages)
    probs, flags = handle._predictor.predict_proba_texts(texts)
    violent_col = handle.labels.index(LABEL_VIOLENT)
    out = []
    for pid, row, flag in zip(ids, probs, flags):
        score = float(row[violent_col])
        label = handle.labels[violent_col] if score >= threshold else _other_label(handle)
        out.append(
            Prediction(
                id=f"pred-{uuid.uuid4().hex[:12]}",
                passage_id=pid,
                task=TASK_DETECT,
                label=label,
                score=score,
                model_id=handle.model_id,
                truncated=flag,
                probs={lab: float(p) for lab, p in zip(handle.labels, row)},
            )
        )
    return out


def _other_label(handle: ModelHandle) -> str:
    return next(lab for lab in handle.labels if lab != LABEL_VIOLENT)


def predict_category(handle: ModelHandle, texts: list) -> list[Prediction]:
    """Argmax over the registry snapshot; ties break toward earlier labels."""
    if handle.task not in CATEGORY_TASKS:
        raise ValidationError(f"model {handle.model_id} is a {handle.task} model")
    if not texts:
        return []
    raw_texts, ids = _texts_and_ids(texts)
    probs, flags = handle._predictor.predict_proba_texts(raw_texts)
    out = []
    for pid, row, flag in zip(ids, probs, flags):
        best = int(np.argmax(row))  # first maximum wins, i.e. registry order
        out.append(
            Prediction(
                id=f"pred-{uuid.uuid4().hex[:12]}",
                passage_id=pid,
                task=handle.task,
                label=handle.labels[best],
                score=float(row[best]),
                model_id=handle.model_id,
                truncated=flag,
                probs={lab: float(p) for lab, p in zip(handle.labels, row)},
            )
        )
    return out


def predict_for_task(handle: ModelHandle, items: list, threshold: float = 0.5) -> list[Prediction]:
    if handle.task == TASK_DETECT:
        return predict_violence(handle, items, threshold=threshold)
    return predict_category(handle, items)


def evaluate_examples(handle: ModelHandle, examples: list[LabeledExample]) -> evalkit.EvalReport:
    """Predict on labeled examples and score against their labels."""
    preds = predict_for_task(handle, examples)
    return evalkit.evaluate(
        [p.label for p in preds],
        [e.label for e in examples],
        handle.registry,
        task=handle.task,
        model_id=handle.model_id,
    )
