"""Dataset construction: the held-out detection split, the 80/20
categorization splits, and paraphrase augmentation of training data.

All splitting is deterministic given a seed (default 13, recorded in the
split). Paraphrases never enter a test set: augmentation applies to training
examples only and a paraphrase shares its parent's source id, which is the
unit the splits are drawn over.
"""

from __future__ import annotations

import logging
from collections import Counter, defaultdict
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from random import Random

from .jsonl import read_jsonl, write_jsonl
from .records import (
    LABEL_NONVIOLENT,
    LABEL_VIOLENT,
    TASK_DETECT,
    CATEGORY_TASKS,
    ConfigurationError,
    CuratedEvent,
    LabeledExample,
    Passage,
    normalize_text,
    paraphrase_provenance,
)

log = logging.getLogger(__name__)

DEFAULT_SEED = 13

# Composition of the held-out detection test set: 129 of 500 items violent.
# Other test sizes scale this ratio.
TEST_VIOLENT_PER_500 = 129


@dataclass
class DatasetSplit:
    train: list[LabeledExample]
    test: list[LabeledExample]
    seed: int
    stats: dict = field(default_factory=dict)

    def class_counts(self, part: str) -> dict[str, int]:
        examples = self.train if part == "train" else self.test
        return dict(Counter(e.label for e in examples))


def largest_remainder(weights: list[int], total: int) -> list[int]:
    """Apportion ``total`` across strata proportionally to ``weights``.

    Floor the exact quotas, then hand the leftover units to the largest
    fractional parts (earlier strata win ties), so the result is deterministic
    and each stratum is within 1 of its exact quota.
    """
    if total < 0:
        raise ConfigurationError(f"cannot apportion negative total {total}")
    weight_sum = sum(weights)
    if weight_sum == 0:
        if total > 0:
            raise ConfigurationError("cannot apportion over zero weights")
        return [0] * len(weights)
    exact = [total * w / weight_sum for w in weights]
    counts = [int(q) for q in exact]
    leftovers = total - sum(counts)
    order = sorted(range(len(weights)), key=lambda i: (-(exact[i] - counts[i]), i))
    for i in order[:leftovers]:
        counts[i] += 1
    return counts


def _detect_example(passage: Passage, label: str) -> LabeledExample:
    return LabeledExample(
        source_id=passage.id, text=passage.text, task=TASK_DETECT, label=label
    )


def make_detection_split(
    violent: list[Passage],
    nonviolent: list[Passage],
    test_size: int = 500,
    seed: int = DEFAULT_SEED,
) -> DatasetSplit:
    """Hold out a fixed-size detection test set, the rest is training data.

    The test set contains 129 violent + 371 non-violent items per 500 (other
    sizes scale that ratio), and within each class the test items are spread
    across works proportionally to the class's per-work counts, rounded by
    largest remainder.
    """
    test_violent = round(test_size * TEST_VIOLENT_PER_500 / 500)
    test_nonviolent = test_size - test_violent
    if len(violent) < test_violent or len(nonviolent) < test_nonviolent:
        raise ConfigurationError(
            f"need >= {test_violent} violent and >= {test_nonviolent} non-violent "
            f"passages, have {len(violent)}/{len(nonviolent)}"
        )

    rng = Random(seed)
    test: list[LabeledExample] = []
    train: list[LabeledExample] = []
    for passages, label, quota in (
        (violent, LABEL_VIOLENT, test_violent),
        (nonviolent, LABEL_NONVIOLENT, test_nonviolent),
    ):
        by_work: dict[str, list[Passage]] = defaultdict(list)
        for p in sorted(passages, key=lambda p: (p.ref.work_id, p.ref.chapter, p.ref.section)):
            by_work[p.ref.work_id].append(p)
        works = sorted(by_work)
        quotas = largest_remainder([len(by_work[w]) for w in works], quota)
        for work, q in zip(works, quotas):
            pool = by_work[work]
            chosen = set(rng.sample(range(len(pool)), q))
            for i, passage in enumerate(pool):
                (test if i in chosen else train).append(_detect_example(passage, label))

    split = DatasetSplit(train=train, test=test, seed=seed)
    split.stats = {
        "task": TASK_DETECT,
        "seed": seed,
        "train": split.class_counts("train"),
        "test": split.class_counts("test"),
    }
    return split


def make_categorization_split(
    events: list[CuratedEvent],
    task: str,
    train_frac: float = 0.8,
    seed: int = DEFAULT_SEED,
) -> DatasetSplit:
    """Stratified-by-label split of curated events for one dimension.

    Classes with fewer than 2 instances go entirely to train; the remaining
    classes share the test quota proportionally (largest remainder).
    """
    if task not in CATEGORY_TASKS:
        raise ConfigurationError(f"not a categorization task: {task!r}")
    if not events:
        raise ConfigurationError("no events to split")
    if not 0.0 < train_frac <= 1.0:
        raise ConfigurationError(f"train_frac must be in (0, 1], got {train_frac}")

    by_label: dict[str, list[CuratedEvent]] = defaultdict(list)
    for event in sorted(events, key=lambda e: e.id):
        by_label[event.label_for(task)].append(event)

    total_test = round(len(events) * (1.0 - train_frac))
    eligible = [lab for lab in sorted(by_label) if len(by_label[lab]) >= 2]
    quotas = dict(
        zip(
            eligible,
            largest_remainder([len(by_label[lab]) for lab in eligible], total_test),
        )
    )

    rng = Random(seed)
    train: list[LabeledExample] = []
    test: list[LabeledExample] = []
    for label in sorted(by_label):
        pool = by_label[label]
        q = quotas.get(label, 0)
        chosen = set(rng.sample(range(len(pool)), q))
        for i, event in enumerate(pool):
            example = LabeledExample(
                source_id=event.id,
                text=event.translation_text,
                task=task,
                label=label,
            )
            (test if i in chosen else train).append(example)

    split = DatasetSplit(train=train, test=test, seed=seed)
    split.stats = {
        "task": task,
        "seed": seed,
        "train": split.class_counts("train"),
        "test": split.class_counts("test"),
    }
    return split


@dataclass
class AugmentResult:
    examples: list[LabeledExample]
    failures: list[dict] = field(default_factory=list)

    def summary(self) -> str:
        return (
            f"{len(self.examples)} examples "
            f"({sum(1 for e in self.examples if e.is_paraphrase)} paraphrases, "
            f"{len(self.failures)} failures)"
        )


def augment(
    train: list[LabeledExample],
    paraphraser,
    k: int = 3,
    parallelism: int = 1,
) -> AugmentResult:
    """Add ``k`` label-preserving paraphrases of every original example.

    The paraphraser is any object with ``paraphrase(text, k) -> list[str]``
    (live client or offline stub). A paraphrase that comes back identical to
    its source after normalization is requested once more, then skipped; hard
    failures are skipped and reported, never silently substituted.
    """
    if k < 0:
        raise ConfigurationError(f"k must be >= 0, got {k}")
    if k == 0:
        return AugmentResult(examples=list(train))

    originals = [e for e in train if not e.is_paraphrase]

    def rewrite(example: LabeledExample) -> tuple[list[LabeledExample], list[dict]]:
        out: list[LabeledExample] = [example]
        failures: list[dict] = []
        try:
            variants = paraphraser.paraphrase(example.text, k)
        except Exception as exc:  # client exhausted its own retries
            log.warning("paraphrase failed for %s: %s", example.source_id, exc)
            return out, [
                {"source_id": example.source_id, "k": i + 1, "reason": str(exc)}
                for i in range(k)
            ]
        for i, variant in enumerate(variants[:k], start=1):
            if normalize_text(variant) == example.text:
                variant = _retry_distinct(paraphraser, example.text, k, i)
            if variant is None:
                failures.append(
                    {
                        "source_id": example.source_id,
                        "k": i,
                        "reason": "paraphrase identical to original",
                    }
                )
                continue
            out.append(
                LabeledExample(
                    source_id=example.source_id,
                    text=normalize_text(variant),
                    task=example.task,
                    label=example.label,
                    provenance=paraphrase_provenance(i),
                )
            )
        return out, failures

    passthrough = [e for e in train if e.is_paraphrase]
    if parallelism > 1:
        with ThreadPoolExecutor(max_workers=parallelism) as pool:
            results = list(pool.map(rewrite, originals))
    else:
        results = [rewrite(e) for e in originals]

    examples: list[LabeledExample] = []
    failures: list[dict] = []
    for exs, fails in results:
        examples.extend(exs)
        failures.extend(fails)
    examples.extend(passthrough)
    if failures:
        log.warning("augmentation skipped %d paraphrases", len(failures))
    return AugmentResult(examples=examples, failures=failures)


def _retry_distinct(paraphraser, text: str, k: int, index: int) -> str | None:
    try:
        again = paraphraser.paraphrase(text, k, attempt=1)
    except TypeError:
        # paraphraser without regeneration support: a retry would return the
        # same cached degenerate output, so skip straight away
        return None
    except Exception:
        return None
    if index <= len(again) and normalize_text(again[index - 1]) != normalize_text(text):
        return again[index - 1]
    return None


def check_no_leakage(split: DatasetSplit):
    """Assert train/test are disjoint by source id (paraphrases included)."""
    train_ids = {e.source_id for e in split.train}
    test_ids = {e.source_id for e in split.test}
    overlap = train_ids & test_ids
    if overlap:
        raise ConfigurationError(f"split leaks {len(overlap)} source ids: {sorted(overlap)[:5]}")
    for e in split.test:
        if e.is_paraphrase:
            raise ConfigurationError(f"paraphrase {e.source_id} in test split")


def write_split(split: DatasetSplit, out_dir: str | Path) -> dict[str, Path]:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = {}
    for part in ("train", "test"):
        examples = getattr(split, part)
        path = out_dir / f"{part}.jsonl"
        write_jsonl(
            path,
            (dict(e.to_json(), split=part, seed=split.seed) for e in examples),
        )
        paths[part] = path
    stats_path = out_dir / "stats.json"
    write_jsonl(stats_path, [split.stats])
    paths["stats"] = stats_path
    return paths


def read_examples(path: str | Path) -> list[LabeledExample]:
    return [LabeledExample.from_json(obj) for obj in read_jsonl(path)]


def write_examples(
    path: str | Path, examples: list[LabeledExample], split: str | None = None, seed: int | None = None
) -> int:
    extra = {}
    if split is not None:
        extra["split"] = split
    if seed is not None:
        extra["seed"] = seed
    return write_jsonl(path, (dict(e.to_json(), **extra) for e in examples))
