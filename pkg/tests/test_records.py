import pytest

from violens.records import (
    LabeledExample,
    Passage,
    ReviewVerdict,
    SourceRef,
    ValidationError,
    normalize_text,
    paraphrase_provenance,
    parse_provenance,
)


def test_normalize_collapses_whitespace_and_keeps_unicode():
    assert normalize_text("  a\t b\n\nc  ") == "a b c"
    greek = "λαβὼν  παρά\tτινος “quoted”"
    assert normalize_text(greek) == "λαβὼν παρά τινος “quoted”"


def test_sourceref_requires_positive_chapter_and_section():
    SourceRef("Alexander", 1, 1)
    with pytest.raises(ValidationError):
        SourceRef("Alexander", 0, 1)
    with pytest.raises(ValidationError):
        SourceRef("Alexander", 3, 0)
    with pytest.raises(ValidationError):
        SourceRef("  ", 1, 1)


def test_sourceref_display():
    assert SourceRef("Alexander", 51, 5).display() == "Alexander 51.5"


def test_passage_rejects_empty_text():
    with pytest.raises(ValidationError):
        Passage(id="p1", ref=SourceRef("A", 1, 1), text="   \n\t ")


def test_passage_json_round_trip():
    p = Passage(id="p1", ref=SourceRef("Caesar", 2, 3), text="He crossed the river.")
    assert Passage.from_json(p.to_json()) == p


def test_provenance_round_trip():
    assert parse_provenance("original") is None
    assert parse_provenance(paraphrase_provenance(2)) == 2
    with pytest.raises(ValidationError):
        parse_provenance("paraphrase-2")


def test_labeled_example_validates_provenance_and_task():
    LabeledExample(source_id="x", text="t", task="detect", label="violent")
    with pytest.raises(ValidationError):
        LabeledExample(source_id="x", text="t", task="weapon", label="spear")
    with pytest.raises(ValidationError):
        LabeledExample(
            source_id="x", text="t", task="detect", label="violent", provenance="copy"
        )


def test_relabel_requires_corrected_label():
    with pytest.raises(ValidationError):
        ReviewVerdict(id="v1", prediction_id="p1", decision="relabel", reviewer="r")
    v = ReviewVerdict(
        id="v1", prediction_id="p1", decision="relabel", reviewer="r",
        corrected_label="interpersonal",
    )
    assert v.corrected_label == "interpersonal"
