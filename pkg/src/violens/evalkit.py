"""Evaluation: one-vs-rest confusion counts, precision/recall/F1, weighted
overall scores, majority and random baselines, an exact McNemar test, and
plain-text/CSV report tables.

Degenerate 0/0 ratios are 0 by convention, matching how collapsed models
report. All internal values are full precision; rounding (half-up, two
decimals) happens only at render time.
"""

from __future__ import annotations

import csv
import io
import math
from collections import Counter
from dataclasses import dataclass, field
from decimal import ROUND_HALF_UP, Decimal
from fractions import Fraction

from .records import ValidationError
from .registries import LabelRegistry


@dataclass
class ClassCounts:
    tp: int = 0
    fp: int = 0
    fn: int = 0
    tn: int = 0

    @property
    def support(self) -> int:
        return self.tp + self.fn


@dataclass
class ConfusionCounts:
    labels: tuple[str, ...]
    per_class: dict[str, ClassCounts]
    n: int

    def support(self, label: str) -> int:
        return self.per_class[label].support


def confusion(preds: list[str], golds: list[str], registry: LabelRegistry) -> ConfusionCounts:
    """Exact one-vs-rest counts for every registry label."""
    if len(preds) != len(golds):
        raise ValidationError(f"length mismatch: {len(preds)} preds vs {len(golds)} golds")
    if not golds:
        raise ValidationError("empty prediction/gold vectors")
    for label in set(preds) | set(golds):
        registry.validate(label)
    counts = {label: ClassCounts() for label in registry.labels}
    for pred, gold in zip(preds, golds):
        for label, c in counts.items():
            if gold == label and pred == label:
                c.tp += 1
            elif gold == label:
                c.fn += 1
            elif pred == label:
                c.fp += 1
            else:
                c.tn += 1
    return ConfusionCounts(labels=registry.labels, per_class=counts, n=len(golds))


def _ratio(num: int, den: int) -> float:
    return num / den if den else 0.0


def precision(c: ClassCounts) -> float:
    return _ratio(c.tp, c.tp + c.fp)


def recall(c: ClassCounts) -> float:
    return _ratio(c.tp, c.tp + c.fn)


def f1(c: ClassCounts) -> float:
    # single division over exact integer counts (identical to the harmonic
    # mean of precision and recall) keeps the result correctly rounded
    return _ratio(2 * c.tp, 2 * c.tp + c.fp + c.fn)


def f1_from_pr(p: float, r: float) -> float:
    """Harmonic mean of precision and recall; 0 when both are 0."""
    return 2 * p * r / (p + r) if p + r else 0.0


@dataclass
class ClassMetrics:
    precision: float
    recall: float
    f1: float
    support: int


@dataclass
class EvalReport:
    task: str
    model_id: str
    per_class: dict[str, ClassMetrics]
    overall: ClassMetrics
    accuracy: float
    baselines: dict[str, float] = field(default_factory=dict)

    @property
    def n(self) -> int:
        return self.overall.support

    def to_json(self) -> dict:
        return {
            "task": self.task,
            "model_id": self.model_id,
            "per_class": {
                lab: vars(m) for lab, m in self.per_class.items()
            },
            "overall": vars(self.overall),
            "accuracy": self.accuracy,
            "baselines": self.baselines,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "EvalReport":
        return cls(
            task=obj["task"],
            model_id=obj["model_id"],
            per_class={lab: ClassMetrics(**m) for lab, m in obj["per_class"].items()},
            overall=ClassMetrics(**obj["overall"]),
            accuracy=obj["accuracy"],
            baselines=obj.get("baselines", {}),
        )


def weighted_overall(counts: ConfusionCounts) -> ClassMetrics:
    """Support-weighted average of the per-class metrics."""
    total = counts.n
    p = sum(precision(c) * c.support for c in counts.per_class.values()) / total
    r = sum(recall(c) * c.support for c in counts.per_class.values()) / total
    f = sum(f1(c) * c.support for c in counts.per_class.values()) / total
    return ClassMetrics(precision=p, recall=r, f1=f, support=total)


def majority_baseline(golds: list[str], registry: LabelRegistry | None = None) -> float:
    """Accuracy of always predicting the most frequent class.

    Ties break toward the label listed first in the registry.
    """
    if not golds:
        raise ValidationError("empty gold vector")
    tally = Counter(golds)
    if registry is not None:
        best = max(tally, key=lambda lab: (tally[lab], -registry.index(lab)))
    else:
        best = max(sorted(tally), key=lambda lab: tally[lab])
    return tally[best] / len(golds)


def random_baseline(golds: list[str]) -> float:
    """Expected accuracy of sampling labels from the empirical distribution,
    i.e. the sum of squared class proportions."""
    if not golds:
        raise ValidationError("empty gold vector")
    n = len(golds)
    return float(sum(Fraction(c, n) ** 2 for c in Counter(golds).values()))


@dataclass
class McNemarResult:
    b: int  # first model correct, second wrong
    c: int  # first model wrong, second correct
    p_value: float
    degenerate: bool = False


def mcnemar(preds_a: list[str], preds_b: list[str], golds: list[str]) -> McNemarResult:
    """Exact two-sided McNemar test on the discordant pairs.

    Uses the exact binomial tail rather than the chi-square approximation:
    discordant counts at this scale are small, where the approximation is
    invalid. p = min(1, 2 * sum_{i<=min(b,c)} C(b+c, i) / 2^(b+c)).
    """
    if not (len(preds_a) == len(preds_b) == len(golds)):
        raise ValidationError("prediction and gold vectors must share one length")
    b = sum(1 for pa, pb, g in zip(preds_a, preds_b, golds) if pa == g and pb != g)
    c = sum(1 for pa, pb, g in zip(preds_a, preds_b, golds) if pa != g and pb == g)
    n = b + c
    if n == 0:
        return McNemarResult(b=0, c=0, p_value=1.0, degenerate=True)
    tail = sum(Fraction(math.comb(n, i), 2**n) for i in range(min(b, c) + 1))
    return McNemarResult(b=b, c=c, p_value=float(min(Fraction(1), 2 * tail)))


def evaluate(
    preds: list[str],
    golds: list[str],
    registry: LabelRegistry,
    task: str,
    model_id: str = "model",
) -> EvalReport:
    counts = confusion(preds, golds, registry)
    per_class = {
        label: ClassMetrics(
            precision=precision(c), recall=recall(c), f1=f1(c), support=c.support
        )
        for label, c in counts.per_class.items()
    }
    acc = sum(1 for p, g in zip(preds, golds) if p == g) / len(golds)
    return EvalReport(
        task=task,
        model_id=model_id,
        per_class=per_class,
        overall=weighted_overall(counts),
        accuracy=acc,
        baselines={
            "majority": majority_baseline(golds, registry),
            "random": random_baseline(golds),
        },
    )


def round2(value: float) -> str:
    # quantize the shortest decimal repr, not the raw binary float, so that
    # e.g. 0.865 rounds half-up to 0.87
    return str(Decimal(str(value)).quantize(Decimal("0.01"), rounding=ROUND_HALF_UP))


def _report_rows(reports: list[EvalReport]) -> list[tuple[str, str, str, str, str, str]]:
    rows = []
    if not reports:
        return rows
    labels = [lab for lab in reports[0].per_class if any(r.per_class[lab].support for r in reports)]
    for label in labels:
        for r in reports:
            m = r.per_class[label]
            rows.append(
                (label.title(), r.model_id, round2(m.precision), round2(m.recall),
                 round2(m.f1), str(m.support))
            )
    for r in reports:
        o = r.overall
        rows.append(
            ("Overall", r.model_id, round2(o.precision), round2(o.recall),
             round2(o.f1), str(o.support))
        )
    baseline = reports[0]
    for name in ("majority", "random"):
        if name in baseline.baselines:
            v = round2(baseline.baselines[name])
            rows.append(("Baselines", name.title(), v, v, v, str(baseline.n)))
    return rows


def render_report(reports: list[EvalReport], fmt: str = "text") -> str:
    """Render reports as an aligned text table or CSV.

    Rows per class, then Overall, then Baselines; metrics rounded half-up to
    two decimals with the support column alongside.
    """
    header = ("Class", "Model", "Precision", "Recall", "F1-Score", "Support")
    rows = _report_rows(reports)
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf)
        writer.writerow(h.lower() for h in header)
        writer.writerows(rows)
        return buf.getvalue()
    if fmt != "text":
        raise ValidationError(f"unknown report format: {fmt!r}")
    table = [header, *rows]
    widths = [max(len(row[i]) for row in table) for i in range(len(header))]
    lines = []
    for idx, row in enumerate(table):
        lines.append("  ".join(cell.ljust(w) for cell, w in zip(row, widths)).rstrip())
        if idx == 0:
            lines.append("  ".join("-" * w for w in widths))
    return "\n".join(lines) + "\n"
