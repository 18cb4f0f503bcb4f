import logging

import pytest

from tests.conftest import make_event, make_passage
from violens.ingest import (
    ParseError,
    align_events,
    extract_negatives,
    parse_corpus,
    split_violent_nonviolent,
)
from violens.jsonl import write_jsonl


def write_corpus(tmp_path, name, content):
    path = tmp_path / name
    path.write_text(content, "utf-8")
    return path


def test_parse_three_sections_in_order(tmp_path):
    path = write_corpus(
        tmp_path,
        "alexander.txt",
        "@@ Alexander 1.2\nSecond section text.\n"
        "@@ Alexander 1.1\nFirst section text.\nMore of it.\n"
        "@@ Alexander 2.1\nThird section text.\n",
    )
    passages = parse_corpus([path])
    assert [(p.ref.chapter, p.ref.section) for p in passages] == [(1, 1), (1, 2), (2, 1)]
    assert passages[0].text == "First section text. More of it."


def test_work_id_with_spaces(tmp_path):
    path = write_corpus(
        tmp_path, "tg.txt", "@@ Tiberius Gracchus 3.2\nA section about the tribune.\n"
    )
    (p,) = parse_corpus([path])
    assert p.ref.work_id == "Tiberius Gracchus"
    assert (p.ref.chapter, p.ref.section) == (3, 2)


def test_duplicate_section_header_rejected(tmp_path):
    path = write_corpus(
        tmp_path, "dup.txt", "@@ Caesar 1.1\nfirst\n@@ Caesar 1.1\nagain\n"
    )
    with pytest.raises(ParseError, match="duplicate section header"):
        parse_corpus([path])


def test_malformed_header_reports_file_and_line(tmp_path):
    path = write_corpus(tmp_path, "bad.txt", "@@ Caesar one.two\ntext\n")
    with pytest.raises(ParseError, match=r"bad\.txt:1"):
        parse_corpus([path])


def test_empty_section_skipped_with_warning(tmp_path, caplog):
    path = write_corpus(
        tmp_path, "gap.txt", "@@ Caesar 1.1\n\n@@ Caesar 1.2\nactual text\n"
    )
    with caplog.at_level(logging.WARNING):
        passages = parse_corpus([path])
    assert len(passages) == 1
    assert "skipped" in caplog.text


def test_two_works_in_one_file_rejected(tmp_path):
    path = write_corpus(
        tmp_path, "mixed.txt", "@@ Caesar 1.1\na\n@@ Sulla 1.1\nb\n"
    )
    with pytest.raises(ParseError, match="one work per file"):
        parse_corpus([path])


def test_text_before_first_header_rejected(tmp_path):
    path = write_corpus(tmp_path, "stray.txt", "stray prose\n@@ Caesar 1.1\na\n")
    with pytest.raises(ParseError):
        parse_corpus([path])


def test_jsonl_passages_accepted_directly(tmp_path):
    p = make_passage("Caesar", 4, 2, text="From the JSONL side.")
    path = tmp_path / "passages.jsonl"
    write_jsonl(path, [p.to_json()])
    (got,) = parse_corpus([path])
    assert got == p


def test_align_matches_and_reports_reasons():
    passages = [make_passage("Alexander", 51, s) for s in range(1, 6)]
    events = [
        make_event("e-hit", "Alexander", 51, 5),
        make_event("e-nowork", "Herodian History", 1, 1),
        make_event("e-nosection", "Alexander", 99, 1),
    ]
    report, violent_refs = align_events(events, passages)
    assert report.matched == 1
    assert dict(report.unmatched) == {
        "e-nowork": "work absent",
        "e-nosection": "section absent",
    }
    assert report.matched + len(report.unmatched) == len(events)
    assert len(violent_refs) == 1


def test_align_dedups_events_on_same_section():
    passages = [make_passage("Alexander", 51, s) for s in range(1, 6)]
    events = [make_event("e1", section=5), make_event("e2", section=5)]
    report, violent_refs = align_events(events, passages)
    assert report.matched == 2
    assert report.violent_passages == 1
    assert len(violent_refs) == 1


def test_extract_negatives_basic():
    passages = [make_passage(chapter=c) for c in range(1, 11)]
    violent = {p.ref for p in passages[:3]}
    negatives = extract_negatives(passages, violent)
    assert len(negatives) == 7
    assert all(p.ref not in violent for p in negatives)


def test_extract_negatives_identity_when_no_violent_refs():
    passages = [make_passage(chapter=c) for c in range(1, 11)]
    assert extract_negatives(passages, set()) == passages


def test_extract_negatives_skips_unannotated_works():
    alexander = [make_passage("Alexander", c) for c in range(1, 5)]
    sulla = [make_passage("Sulla", c) for c in range(1, 5)]
    violent = {alexander[0].ref}
    negatives = extract_negatives(
        alexander + sulla, violent, annotated_works={"Alexander"}
    )
    assert {p.ref.work_id for p in negatives} == {"Alexander"}
    assert len(negatives) == 3


def test_partition_property():
    passages = [make_passage(chapter=c, section=s) for c in range(1, 8) for s in (1, 2)]
    events = [make_event(f"e{c}", chapter=c, section=1) for c in (1, 3, 5)]
    violent, negatives, report = split_violent_nonviolent(passages, events)
    violent_ids = {p.id for p in violent}
    negative_ids = {p.id for p in negatives}
    assert violent_ids & negative_ids == set()
    assert violent_ids | negative_ids == {p.id for p in passages}
    assert report.violent_passages == len(violent)


def test_parse_is_deterministic(tmp_path):
    content = "@@ Caesar 1.1\nalpha\n@@ Caesar 1.2\nbeta\n"
    path = write_corpus(tmp_path, "det.txt", content)
    first = parse_corpus([path])
    second = parse_corpus([path])
    assert [(p.id, p.text) for p in first] == [(p.id, p.text) for p in second]
