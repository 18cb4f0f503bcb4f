"""Corpus ingestion: parse section-structured source files, align curated
events to their sections, and derive the non-violent negatives.

Corpus input format: UTF-8 text, one work per file, sections introduced by
header lines ``@@ <work_id> <chapter>.<section>`` with the section text on
the following lines. Passages JSONL (as written by the store interfaces) is
accepted directly.
"""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass, field
from pathlib import Path

from .jsonl import read_jsonl
from .records import CuratedEvent, Passage, SourceRef, ValidationError

log = logging.getLogger(__name__)

_HEADER_RE = re.compile(r"^@@\s+(?P<work>.+?)\s+(?P<chapter>\d+)\.(?P<section>\d+)\s*$")


class ParseError(ValueError):
    """Malformed corpus input; message carries file and line."""


def passage_id_for(ref: SourceRef) -> str:
    slug = re.sub(r"\s+", "_", ref.work_id.strip())
    return f"{slug}.{ref.chapter}.{ref.section}"


@dataclass
class AlignmentReport:
    matched: int = 0
    unmatched: list[tuple[str, str]] = field(default_factory=list)  # (event_id, reason)
    violent_passages: int = 0
    nonviolent_passages: int = 0

    @property
    def total_events(self) -> int:
        return self.matched + len(self.unmatched)

    def to_json(self) -> dict:
        return {
            "matched": self.matched,
            "unmatched": [{"event_id": e, "reason": r} for e, r in self.unmatched],
            "violent_passages": self.violent_passages,
            "nonviolent_passages": self.nonviolent_passages,
        }


def parse_corpus(files: list[str | Path]) -> list[Passage]:
    """Parse corpus files into passages, ordered by (work_id, chapter, section)."""
    passages: list[Passage] = []
    for path in files:
        path = Path(path)
        if path.suffix == ".jsonl":
            passages.extend(Passage.from_json(obj) for obj in read_jsonl(path))
        else:
            passages.extend(_parse_sections_file(path))
    passages.sort(key=lambda p: (p.ref.work_id, p.ref.chapter, p.ref.section))
    return passages


def _parse_sections_file(path: Path) -> list[Passage]:
    passages: list[Passage] = []
    seen_refs: set[SourceRef] = set()
    work_of_file: str | None = None
    current_ref: SourceRef | None = None
    current_lines: list[str] = []
    header_line = 0

    def flush():
        nonlocal current_ref, current_lines
        if current_ref is None:
            return
        text = " ".join(current_lines).strip()
        if not text:
            log.warning("%s:%d: empty section %s skipped", path, header_line, current_ref.display())
        else:
            passages.append(Passage(id=passage_id_for(current_ref), ref=current_ref, text=text))
        current_ref, current_lines = None, []

    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.rstrip("\n")
            if line.startswith("@@"):
                m = _HEADER_RE.match(line)
                if not m:
                    raise ParseError(f"{path}:{lineno}: malformed section header: {line!r}")
                flush()
                try:
                    ref = SourceRef(
                        m.group("work"), int(m.group("chapter")), int(m.group("section"))
                    )
                except ValidationError as exc:
                    raise ParseError(f"{path}:{lineno}: {exc}") from exc
                if ref in seen_refs:
                    raise ParseError(
                        f"{path}:{lineno}: duplicate section header {ref.display()}"
                    )
                if work_of_file is None:
                    work_of_file = ref.work_id
                elif ref.work_id != work_of_file:
                    raise ParseError(
                        f"{path}:{lineno}: one work per file, found {ref.work_id!r} "
                        f"after {work_of_file!r}"
                    )
                seen_refs.add(ref)
                current_ref = ref
                header_line = lineno
            else:
                if current_ref is None and line.strip():
                    raise ParseError(f"{path}:{lineno}: text before first section header")
                current_lines.append(line.strip())
    flush()
    return passages


def align_events(
    events: list[CuratedEvent], passages: list[Passage]
) -> tuple[AlignmentReport, set[SourceRef]]:
    """Mark the section each event cites as violent.

    Returns the report and the set of violent refs. An event whose ref is not
    in the corpus is reported unmatched with a reason, never guessed; two
    events citing the same section mark one violent passage.
    """
    by_ref = {p.ref: p for p in passages}
    works = {p.ref.work_id for p in passages}
    report = AlignmentReport()
    violent_refs: set[SourceRef] = set()
    for event in events:
        if event.ref.work_id not in works:
            report.unmatched.append((event.id, "work absent"))
        elif event.ref not in by_ref:
            report.unmatched.append((event.id, "section absent"))
        else:
            report.matched += 1
            violent_refs.add(event.ref)
    report.violent_passages = len(violent_refs)
    report.nonviolent_passages = len(passages) - len(violent_refs)
    return report, violent_refs


def extract_negatives(
    passages: list[Passage],
    violent_refs: set[SourceRef],
    annotated_works: set[str] | None = None,
) -> list[Passage]:
    """Return the passages not marked violent, in input order.

    When ``annotated_works`` is given, only passages from those works are
    eligible: a work nobody curated cannot vouch for its silence, so it
    contributes no negatives.
    """
    negatives = []
    for p in passages:
        if p.ref in violent_refs:
            continue
        if annotated_works is not None and p.ref.work_id not in annotated_works:
            continue
        negatives.append(p)
    return negatives


def split_violent_nonviolent(
    passages: list[Passage], events: list[CuratedEvent]
) -> tuple[list[Passage], list[Passage], AlignmentReport]:
    """Full alignment pipeline: violent passages, negatives, and the report.

    Negatives come only from works that have at least one curated event.
    """
    report, violent_refs = align_events(events, passages)
    annotated_works = {e.ref.work_id for e in events}
    violent = [p for p in passages if p.ref in violent_refs]
    negatives = extract_negatives(passages, violent_refs, annotated_works=annotated_works)
    return violent, negatives, report
