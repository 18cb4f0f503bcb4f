"""Detection and categorization of violence depictions in historical text
corpora, with dataset construction, evaluation and a human review loop."""

from .records import (
    CuratedEvent,
    LabeledExample,
    Passage,
    Prediction,
    ReviewVerdict,
    SourceRef,
)
from .store import CorpusStore

__version__ = "0.1.0"

__all__ = [
    "CorpusStore",
    "CuratedEvent",
    "LabeledExample",
    "Passage",
    "Prediction",
    "ReviewVerdict",
    "SourceRef",
    "__version__",
]
