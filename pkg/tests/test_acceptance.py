"""Acceptance criteria, one test per criterion.

Every test prints a single PASS line (or fails its assertion) so the suite
doubles as the release checklist. Pipeline counts are exact, evaluation math
is oracle-exact, and model quality gates run on the small encoder tier with
the bundled dataset and a fixed seed.
"""

import itertools
import math
import time
from dataclasses import dataclass
from fractions import Fraction

import pytest
from fastapi.testclient import TestClient

from violens import bundled, dataset as ds, evalkit, ingest, models
from violens.llm import StubParaphraser, parse_zero_shot
from violens.records import LabeledExample
from violens.registries import load_registry
from violens.service import create_app
from violens.store import CorpusStore

SEED = 13
DETECT = load_registry("detect")


def ok(line: str):
    print(f"PASS: {line}")


@dataclass
class Pipeline:
    passages: list
    events: list
    violent: list
    nonviolent: list
    split: ds.DatasetSplit
    augmented: ds.AugmentResult
    plain_model: models.ModelHandle
    augmented_model: models.ModelHandle
    run_dir: str
    elapsed_data: float
    elapsed_train: float


@pytest.fixture(scope="module")
def pipeline(tmp_path_factory) -> Pipeline:
    run_dir = tmp_path_factory.mktemp("runs")
    t0 = time.monotonic()
    passages, events = bundled.build_detection_bundle()
    violent, nonviolent, _ = ingest.split_violent_nonviolent(passages, events)
    split = ds.make_detection_split(violent, nonviolent, test_size=500, seed=SEED)
    augmented = ds.augment(split.train, StubParaphraser(), k=3)
    elapsed_data = time.monotonic() - t0

    t1 = time.monotonic()
    config = models.TrainConfig(seed=SEED)
    plain = models.train_detector(split.train, config, run_dir, name="acc-detect-plain")
    aug = models.train_detector(augmented.examples, config, run_dir, name="acc-detect-aug")
    elapsed_train = time.monotonic() - t1
    return Pipeline(
        passages=passages,
        events=events,
        violent=violent,
        nonviolent=nonviolent,
        split=split,
        augmented=augmented,
        plain_model=plain,
        augmented_model=aug,
        run_dir=str(run_dir),
        elapsed_data=elapsed_data,
        elapsed_train=elapsed_train,
    )


def test_data_pipeline_count_reproduction(pipeline):
    """Ingest/align, held-out split and stub augmentation hit exact counts."""
    assert len(pipeline.violent) == 461
    assert len(pipeline.nonviolent) == 2103
    assert pipeline.split.class_counts("test") == {"violent": 129, "nonviolent": 371}
    assert pipeline.split.class_counts("train") == {"violent": 332, "nonviolent": 1732}
    by_label = {}
    for e in pipeline.augmented.examples:
        by_label[e.label] = by_label.get(e.label, 0) + 1
    assert by_label == {"nonviolent": 6928, "violent": 1328}
    assert pipeline.augmented.failures == []
    assert pipeline.elapsed_data < 60.0
    ok(
        "data pipeline counts: 461 violent / 2103 non-violent; test 129/371; "
        f"train 332/1732; augmented 1328/6928 (in {pipeline.elapsed_data:.1f}s)"
    )


def test_metric_oracle_equivalence_exhaustive():
    """P/R/F1 equal a brute-force counting oracle on every binary vector pair
    of length <= 8, with zero tolerance."""
    t0 = time.monotonic()
    labels = ("violent", "nonviolent")
    cases = 0
    for n in range(1, 9):
        for golds in itertools.product(labels, repeat=n):
            for preds in itertools.product(labels, repeat=n):
                counts = evalkit.confusion(list(preds), list(golds), DETECT)
                for label in labels:
                    c = counts.per_class[label]
                    tp = sum(1 for p, g in zip(preds, golds) if g == label and p == label)
                    fn = sum(1 for p, g in zip(preds, golds) if g == label and p != label)
                    fp = sum(1 for p, g in zip(preds, golds) if g != label and p == label)
                    assert (c.tp, c.fp, c.fn) == (tp, fp, fn)
                    p_exact = Fraction(tp, tp + fp) if tp + fp else Fraction(0)
                    r_exact = Fraction(tp, tp + fn) if tp + fn else Fraction(0)
                    f_exact = (
                        Fraction(2 * tp, 2 * tp + fp + fn) if 2 * tp + fp + fn else Fraction(0)
                    )
                    assert evalkit.precision(c) == float(p_exact)
                    assert evalkit.recall(c) == float(r_exact)
                    assert evalkit.f1(c) == float(f_exact)
                cases += 1
    elapsed = time.monotonic() - t0
    assert cases == sum(4**n for n in range(1, 9))
    assert cases >= 2**16
    assert elapsed < 60.0
    ok(f"metric oracle equivalence: {cases} vector pairs, zero tolerance ({elapsed:.1f}s)")


def test_table_arithmetic_checks():
    """Reported-table arithmetic at the stated tolerances."""
    assert evalkit.f1_from_pr(0.87, 0.99) == pytest.approx(0.93, abs=0.005)
    assert evalkit.f1_from_pr(0.89, 0.86) == pytest.approx(0.87, abs=0.005)
    golds = ["nonviolent"] * 371 + ["violent"] * 129
    assert evalkit.majority_baseline(golds, DETECT) == pytest.approx(0.74, abs=0.005)
    # the formula gives 0.6172; the published table rounds it to 0.61
    assert evalkit.random_baseline(golds) == pytest.approx(0.617, abs=0.001)
    ok(
        "table arithmetic: f1(0.87,0.99)=0.93, f1(0.89,0.86)=0.87, "
        "majority=0.742, random=0.6171 (documented vs published 0.61)"
    )


def test_mcnemar_exactness():
    golds = ["violent"] * 30
    preds_a = ["violent"] * 30
    preds_b = ["violent"] * 30
    for i in range(10):
        preds_b[i] = "nonviolent"
    for i in range(10, 12):
        preds_a[i] = "nonviolent"
    result = evalkit.mcnemar(preds_a, preds_b, golds)
    assert (result.b, result.c) == (10, 2)

    # brute-force binomial-sum oracle over i = 0..min(b, c)
    oracle = min(
        Fraction(1),
        2 * sum(Fraction(math.comb(12, i), 2**12) for i in range(3)),
    )
    assert oracle == Fraction(158, 4096)
    assert abs(result.p_value - float(oracle)) < 1e-9

    swapped = evalkit.mcnemar(preds_b, preds_a, golds)
    assert swapped.p_value == result.p_value and (swapped.b, swapped.c) == (2, 10)

    degenerate = evalkit.mcnemar(golds, golds, golds)
    assert degenerate.degenerate and degenerate.p_value == 1.0
    ok("mcnemar: p(b=10,c=2) = 158/4096 within 1e-9; symmetry and degenerate case hold")


def test_desk_scale_detection_training(pipeline):
    """Small-tier detection beats the majority baseline with usable recall,
    and augmentation does not hurt recall."""
    rep_plain = models.evaluate_examples(pipeline.plain_model, pipeline.split.test)
    rep_aug = models.evaluate_examples(pipeline.augmented_model, pipeline.split.test)
    v_plain = rep_plain.per_class["violent"]
    v_aug = rep_aug.per_class["violent"]
    for rep in (rep_plain, rep_aug):
        assert rep.per_class["violent"].f1 >= 0.60
        assert rep.accuracy > 0.742
    assert v_aug.recall >= v_plain.recall
    assert pipeline.elapsed_train < 30 * 60
    ok(
        f"desk-scale detection: Violent F1 plain={v_plain.f1:.3f} aug={v_aug.f1:.3f} "
        f"(>= 0.60); accuracy {rep_plain.accuracy:.3f}/{rep_aug.accuracy:.3f} > 0.742; "
        f"augmented recall {v_aug.recall:.3f} >= {v_plain.recall:.3f} "
        f"(trained in {pipeline.elapsed_train:.0f}s)"
    )


def test_desk_scale_level_categorization(pipeline):
    catalog = bundled.make_catalog_events()
    split = ds.make_categorization_split(catalog, "level", train_frac=0.8, seed=SEED)
    assert len(split.test) == 556
    handle = models.train_categorizer(
        "level", split.train, models.TrainConfig(seed=SEED), pipeline.run_dir,
        name="acc-level",
    )
    report = models.evaluate_examples(handle, split.test)
    majority = report.baselines["majority"]
    assert majority == pytest.approx(0.67, abs=0.005)
    assert report.overall.f1 >= 0.75
    assert report.accuracy > majority
    ok(
        f"desk-scale level categorization: weighted F1={report.overall.f1:.3f} >= 0.75; "
        f"accuracy {report.accuracy:.3f} beats majority {majority:.3f}"
    )


ZERO_SHOT_FIXTURE = [
    ("[VIOLENT]", "violent", True),
    ("[NON-VIOLENT]", "nonviolent", True),
    ("[violent]", "violent", True),
    ("[non-violent]", "nonviolent", True),
    ("[Violent]", "violent", True),
    ("[NON-VIOLENT].\n", "nonviolent", True),
    ("The passage is [VIOLENT]", "violent", True),
    ("Classification: [NON-VIOLENT] per the criteria.", "nonviolent", True),
    ("[ VIOLENT ]", "violent", True),
    ("[NON VIOLENT]", "nonviolent", True),
    ("[NONVIOLENT]", "nonviolent", True),
    ("[VIOLENT] [VIOLENT]", "violent", True),
    ("Answer: [non-Violent]", "nonviolent", True),
    ("  [VIOLENT]  ", "violent", True),
    ("It seems violent.", None, False),
    ("", None, False),
    ("[VIOLENT] or [NON-VIOLENT]", None, False),
    ("VIOLENT", None, False),
    ("[UNKNOWN]", None, False),
    ("non-violent, I would say", None, False),
]


def test_zero_shot_parser_fixture():
    assert len(ZERO_SHOT_FIXTURE) == 20
    for raw, label, parse_ok in ZERO_SHOT_FIXTURE:
        result = parse_zero_shot(raw)
        assert result.parse_ok is parse_ok, f"parse_ok mismatch on {raw!r}"
        assert result.label == label, f"label mismatch on {raw!r}"
        assert result.raw_response == raw
    ok("zero-shot parser: 20/20 fixture cases extracted correctly")


def test_end_to_end_review_loop(pipeline, tmp_path):
    """Ingest -> split -> train -> annotate a held-out work -> review queue ->
    verdicts -> feedback export, all without the browser UI."""
    store = CorpusStore(tmp_path / "e2e.db")
    store.put_passages(pipeline.passages)
    store.put_events(pipeline.events)

    app = create_app(store, pipeline.run_dir, token="acceptance")
    client = TestClient(app)
    client.headers["Authorization"] = "Bearer acceptance"

    def finish(job_id):
        deadline = time.time() + 120
        while time.time() < deadline:
            job = client.get(f"/jobs/{job_id}").json()
            if job["status"] in ("done", "failed"):
                return job
            time.sleep(0.05)
        raise AssertionError("job did not finish in time")

    # annotate one held-out work
    resp = client.post(
        "/jobs",
        json={"task": "detect", "model_id": "acc-detect-aug", "works": ["Cimon"]},
    )
    assert resp.status_code == 201
    job = finish(resp.json()["id"])
    assert job["status"] == "done"
    assert job["processed"] == 95  # every section of the held-out work

    # the queue is uncertainty-ordered and carries text plus citation
    queue = client.get("/review/queue", params={"task": "detect", "limit": 95}).json()
    assert queue["total"] == 95
    distances = [abs(item["score"] - 0.5) for item in queue["items"]]
    assert distances == sorted(distances)
    assert all(item["text"] and item["citation"] for item in queue["items"])

    # verdicts: accept one, relabel one, reject one violent-labeled item
    items = queue["items"]
    violent_item = next(i for i in items if i["label"] == "violent")
    others = [i for i in items if i is not violent_item][:2]
    assert client.post(
        f"/review/{others[0]['prediction_id']}/verdict",
        json={"decision": "accept", "reviewer": "historian"},
    ).status_code == 200
    assert client.post(
        f"/review/{others[1]['prediction_id']}/verdict",
        json={"decision": "relabel", "reviewer": "historian", "corrected_label": "violent"},
    ).status_code == 200
    assert client.post(
        f"/review/{violent_item['prediction_id']}/verdict",
        json={"decision": "reject", "reviewer": "historian"},
    ).status_code == 200

    remaining = client.get("/review/queue", params={"task": "detect"}).json()
    assert remaining["total"] == 92

    # feedback round-trips into a valid labeled-example file
    export = client.get("/export/feedback", params={"task": "detect"})
    out_path = tmp_path / "feedback.jsonl"
    out_path.write_text(export.text, "utf-8")
    examples = ds.read_examples(out_path)
    assert len(examples) == 3
    assert all(isinstance(e, LabeledExample) for e in examples)
    assert examples[0].label == others[0]["label"]
    assert examples[1].label == "violent"
    assert examples[2].label == "nonviolent"  # rejected violent prediction

    # a strong model annotating the full corpus recovers the curated volume
    resp = client.post(
        "/jobs", json={"task": "detect", "model_id": "acc-detect-aug", "works": []}
    )
    full = finish(resp.json()["id"])
    assert full["status"] == "done"
    violent_count = full["class_counts"].get("violent", 0)
    assert 461 * 0.8 <= violent_count <= 461 * 1.2
    ok(
        "end-to-end: held-out work annotated (95 predictions), queue uncertainty-"
        f"ordered, 3 verdicts exported and re-importable; full-corpus job found "
        f"{violent_count} violent (461 +/- 20%)"
    )


def test_feedback_file_retrains(pipeline, tmp_path):
    """Exported feedback is directly usable as additional training data."""
    rows = [
        LabeledExample("fb-1", "They slew the envoys at the border.", "detect", "violent"),
        LabeledExample("fb-2", "The markets reopened after the truce.", "detect", "nonviolent"),
    ]
    merged = pipeline.split.train + rows
    handle = models.train_detector(
        merged, models.TrainConfig(seed=SEED), tmp_path, name="acc-retrain"
    )
    assert handle.metrics["train_size"] == len(merged)
    ok("feedback examples merge into a retraining set")
