"""Core record types shared across the pipeline.

Everything that flows between modules (passages, curated events, model
predictions, review verdicts, labeled examples) is defined here as plain
dataclasses so the store, dataset builder, models and service all agree on
one vocabulary.
"""

from __future__ import annotations

import re
import time
from dataclasses import dataclass, field, asdict

# Classification tasks. "detect" is the binary violent/non-violent task,
# the other four are the fine-grained event dimensions.
TASK_DETECT = "detect"
TASK_LEVEL = "level"
TASK_CONTEXT = "context"
TASK_MOTIVE = "motive"
TASK_CONSEQUENCE = "consequence"
TASKS = (TASK_DETECT, TASK_LEVEL, TASK_CONTEXT, TASK_MOTIVE, TASK_CONSEQUENCE)
CATEGORY_TASKS = (TASK_LEVEL, TASK_CONTEXT, TASK_MOTIVE, TASK_CONSEQUENCE)

LABEL_VIOLENT = "violent"
LABEL_NONVIOLENT = "nonviolent"

PROVENANCE_ORIGINAL = "original"

_WS_RUN = re.compile(r"\s+")
_PARAPHRASE_RE = re.compile(r"^paraphrase\((\d+)\)$")


class ValidationError(ValueError):
    """An input record violates one of its invariants."""


class ConflictError(ValueError):
    """A write collides with existing data (same key, different content)."""


class ConfigurationError(ValueError):
    """Inputs cannot satisfy the requested configuration."""


class NotFoundError(KeyError):
    """A referenced record does not exist."""


def normalize_text(text: str) -> str:
    """Collapse whitespace runs to single spaces and strip the ends.

    Unicode content (typographic quotes, Greek) is preserved untouched.
    """
    return _WS_RUN.sub(" ", text).strip()


def paraphrase_provenance(k: int) -> str:
    return f"paraphrase({k})"


def parse_provenance(provenance: str) -> int | None:
    """Return the paraphrase index, or None for an original."""
    if provenance == PROVENANCE_ORIGINAL:
        return None
    m = _PARAPHRASE_RE.match(provenance)
    if not m:
        raise ValidationError(f"bad provenance: {provenance!r}")
    return int(m.group(1))


@dataclass(frozen=True, order=True)
class SourceRef:
    """Citation of one section of a source work, e.g. Alexander 51.5."""

    work_id: str
    chapter: int
    section: int

    def __post_init__(self):
        if not self.work_id or not str(self.work_id).strip():
            raise ValidationError("work_id must be non-empty")
        if self.chapter < 1 or self.section < 1:
            raise ValidationError(
                f"chapter and section must be >= 1, got {self.chapter}.{self.section}"
            )

    def display(self) -> str:
        return f"{self.work_id} {self.chapter}.{self.section}"


@dataclass
class Passage:
    """One section of a source work; the unit of classification."""

    id: str
    ref: SourceRef
    text: str
    lang: str = "en"

    def __post_init__(self):
        self.text = normalize_text(self.text)
        if not self.text:
            raise ValidationError(f"passage {self.id}: empty text after normalization")
        if not self.id:
            raise ValidationError("passage id must be non-empty")

    def to_json(self) -> dict:
        return {
            "id": self.id,
            "work_id": self.ref.work_id,
            "chapter": self.ref.chapter,
            "section": self.ref.section,
            "text": self.text,
            "lang": self.lang,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "Passage":
        return cls(
            id=obj["id"],
            ref=SourceRef(obj["work_id"], int(obj["chapter"]), int(obj["section"])),
            text=obj["text"],
            lang=obj.get("lang", "en"),
        )


@dataclass
class CuratedEvent:
    """One curated violent-event entry: excerpt text plus its four labels.

    Sub-records that are not modeled (perpetrator, victim, third parties,
    weapon, year, ...) ride along opaquely in ``extras``.
    """

    id: str
    title: str
    ref: SourceRef
    translation_text: str
    level: str
    context: str
    motive: str
    consequence: str
    extras: dict = field(default_factory=dict)

    def __post_init__(self):
        self.translation_text = normalize_text(self.translation_text)
        if not self.translation_text:
            raise ValidationError(f"event {self.id}: empty translation_text")

    def label_for(self, task: str) -> str:
        if task not in CATEGORY_TASKS:
            raise ValidationError(f"not a categorization task: {task!r}")
        return getattr(self, task)

    def to_json(self) -> dict:
        return {
            "id": self.id,
            "title": self.title,
            "work_id": self.ref.work_id,
            "chapter": self.ref.chapter,
            "section": self.ref.section,
            "translation_text": self.translation_text,
            "level": self.level,
            "context": self.context,
            "motive": self.motive,
            "consequence": self.consequence,
            "extras": self.extras,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "CuratedEvent":
        return cls(
            id=obj["id"],
            title=obj.get("title", ""),
            ref=SourceRef(obj["work_id"], int(obj["chapter"]), int(obj["section"])),
            translation_text=obj["translation_text"],
            level=obj["level"],
            context=obj["context"],
            motive=obj["motive"],
            consequence=obj["consequence"],
            extras=obj.get("extras", {}) or {},
        )


@dataclass
class Prediction:
    """A model's label for one passage, awaiting optional human review."""

    id: str
    passage_id: str
    task: str
    label: str
    score: float
    model_id: str
    created_at: float = field(default_factory=time.time)
    truncated: bool = False
    probs: dict | None = None  # full class distribution, used for entropy ordering

    def __post_init__(self):
        if self.task not in TASKS:
            raise ValidationError(f"unknown task: {self.task!r}")
        if not 0.0 <= self.score <= 1.0:
            raise ValidationError(f"score out of [0,1]: {self.score}")

    def to_json(self) -> dict:
        return asdict(self)

    @classmethod
    def from_json(cls, obj: dict) -> "Prediction":
        return cls(**obj)


DECISIONS = ("accept", "reject", "relabel")


@dataclass
class ReviewVerdict:
    """A historian's judgement on one prediction."""

    id: str
    prediction_id: str
    decision: str
    reviewer: str
    corrected_label: str | None = None
    created_at: float = field(default_factory=time.time)

    def __post_init__(self):
        if self.decision not in DECISIONS:
            raise ValidationError(f"unknown decision: {self.decision!r}")
        if self.decision == "relabel" and not self.corrected_label:
            raise ValidationError("relabel verdict requires corrected_label")
        if not self.reviewer:
            raise ValidationError("reviewer must be non-empty")


@dataclass
class LabeledExample:
    """A text bound to a task label, with provenance.

    ``source_id`` is the passage or event the text came from; paraphrases
    share their parent's source_id and carry provenance ``paraphrase(k)``,
    which is what keeps a paraphrase in the same split as its parent.
    """

    source_id: str
    text: str
    task: str
    label: str
    provenance: str = PROVENANCE_ORIGINAL

    def __post_init__(self):
        parse_provenance(self.provenance)  # raises on malformed values
        if self.task not in TASKS:
            raise ValidationError(f"unknown task: {self.task!r}")

    @property
    def is_paraphrase(self) -> bool:
        return self.provenance != PROVENANCE_ORIGINAL

    def to_json(self) -> dict:
        return {
            "id": self.source_id,
            "text": self.text,
            "task": self.task,
            "label": self.label,
            "provenance": self.provenance,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "LabeledExample":
        return cls(
            source_id=obj["id"],
            text=obj["text"],
            task=obj["task"],
            label=obj["label"],
            provenance=obj.get("provenance", PROVENANCE_ORIGINAL),
        )
