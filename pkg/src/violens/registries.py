"""Closed label registries, one per classification task.

Registries ship as editable text files under ``violens/labels/`` (one label
per line, optional tab-separated description). Label order in the file is
authoritative: it breaks argmax and majority ties deterministically.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from .records import TASKS, ValidationError

EXPECTED_SIZES = {
    "detect": 2,
    "level": 4,
    "context": 25,
    "motive": 13,
    "consequence": 38,
}


@dataclass(frozen=True)
class LabelRegistry:
    task: str
    labels: tuple[str, ...]
    descriptions: dict[str, str] = field(default_factory=dict)

    def __post_init__(self):
        if len(set(self.labels)) != len(self.labels):
            raise ValidationError(f"duplicate labels in {self.task} registry")
        if not self.labels:
            raise ValidationError(f"empty registry for {self.task}")

    def __contains__(self, label: str) -> bool:
        return label in self.labels

    def __len__(self) -> int:
        return len(self.labels)

    def index(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise ValidationError(f"label {label!r} not in {self.task} registry") from None

    def validate(self, label: str) -> str:
        if label not in self.labels:
            raise ValidationError(f"label {label!r} not in {self.task} registry")
        return label


def parse_registry_file(task: str, text: str) -> LabelRegistry:
    labels: list[str] = []
    descriptions: dict[str, str] = {}
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        name, _, desc = line.partition("\t")
        name = name.strip()
        labels.append(name)
        if desc.strip():
            descriptions[name] = desc.strip()
    return LabelRegistry(task=task, labels=tuple(labels), descriptions=descriptions)


def load_registry(task: str, path: str | Path | None = None) -> LabelRegistry:
    """Load a task's registry, from ``path`` if given, else the bundled file."""
    if task not in TASKS:
        raise ValidationError(f"unknown task: {task!r}")
    if path is not None:
        text = Path(path).read_text(encoding="utf-8")
    else:
        text = resources.files("violens.labels").joinpath(f"{task}.txt").read_text("utf-8")
    reg = parse_registry_file(task, text)
    expected = EXPECTED_SIZES[task]
    if len(reg) != expected:
        raise ValidationError(
            f"{task} registry has {len(reg)} labels, expected {expected}"
        )
    return reg


def load_registries() -> dict[str, LabelRegistry]:
    return {task: load_registry(task) for task in TASKS}
