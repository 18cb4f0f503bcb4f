import pytest

from violens.records import CuratedEvent, Passage, SourceRef
from violens.store import CorpusStore


def make_passage(work="Alexander", chapter=1, section=1, text="A quiet day in the city."):
    ref = SourceRef(work, chapter, section)
    return Passage(id=f"{work}.{chapter}.{section}", ref=ref, text=text)


def make_event(
    event_id="ev-1",
    work="Alexander",
    chapter=51,
    section=5,
    text="Alexander ran Cleitus through with a spear.",
    level="interpersonal",
    context="entertaining",
    motive="emotional",
    consequence="death",
):
    return CuratedEvent(
        id=event_id,
        title="test event",
        ref=SourceRef(work, chapter, section),
        translation_text=text,
        level=level,
        context=context,
        motive=motive,
        consequence=consequence,
    )


@pytest.fixture
def store(tmp_path):
    return CorpusStore(tmp_path / "store.db")
