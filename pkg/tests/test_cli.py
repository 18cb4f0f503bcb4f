import hashlib
import json
from pathlib import Path

import pytest
from click.testing import CliRunner

from violens.cli import main
from violens.jsonl import write_jsonl


@pytest.fixture
def runner():
    return CliRunner()


def small_corpus(tmp_path):
    corpus = tmp_path / "corpus"
    corpus.mkdir()
    lines = []
    for chapter in range(1, 9):
        for section in (1, 2):
            lines.append(f"@@ Alexander {chapter}.{section}")
            if chapter % 2 == 0 and section == 1:
                lines.append(
                    f"In chapter {chapter} the soldiers slew the garrison and butchered "
                    "the prisoners at the gate."
                )
            else:
                lines.append(
                    f"In chapter {chapter} the council debated the corn supply at length."
                )
    (corpus / "alexander.txt").write_text("\n".join(lines) + "\n", "utf-8")
    events = [
        {
            "id": f"ev-{c}", "title": "t", "work_id": "Alexander", "chapter": c,
            "section": 1, "translation_text": "the soldiers slew the garrison",
            "level": "intersocial", "context": "battle", "motive": "tactical/strategical",
            "consequence": "death", "extras": {},
        }
        for c in (2, 4, 6, 8)
    ]
    events_path = tmp_path / "events.jsonl"
    write_jsonl(events_path, events)
    return corpus, events_path


def run_ok(runner, args, **kwargs):
    result = runner.invoke(main, args, catch_exceptions=False, **kwargs)
    assert result.exit_code == 0, result.output
    return result


def test_ingest_reports_counts(runner, tmp_path):
    corpus, events = small_corpus(tmp_path)
    result = run_ok(
        runner,
        ["--manifest-dir", str(tmp_path / "m"), "ingest", "--corpus", str(corpus),
         "--events", str(events), "--store", str(tmp_path / "s.db")],
    )
    assert "passages: 16 parsed, 16 newly stored" in result.output
    assert "matched=4" in result.output
    assert "violent=4 nonviolent=12" in result.output


def test_missing_corpus_exit_2(runner, tmp_path):
    result = runner.invoke(
        main, ["ingest", "--corpus", str(tmp_path / "nope"), "--store", str(tmp_path / "s.db")]
    )
    assert result.exit_code == 2
    assert "error: missing-input:" in result.output


def test_bootstrap_writes_bundle(runner, tmp_path):
    result = run_ok(
        runner,
        ["--manifest-dir", str(tmp_path / "m"), "bootstrap", "--out", str(tmp_path / "data")],
    )
    assert (tmp_path / "data" / "corpus").is_dir()
    assert (tmp_path / "data" / "events.jsonl").exists()
    assert (tmp_path / "data" / "catalog_events.jsonl").exists()
    assert "13 works" in result.output


def _hash(path):
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def test_build_dataset_deterministic(runner, tmp_path):
    corpus, events = small_corpus(tmp_path)
    run_ok(runner, ["--manifest-dir", str(tmp_path / "m"), "ingest", "--corpus", str(corpus),
                    "--events", str(events), "--store", str(tmp_path / "s.db")])
    args = ["--manifest-dir", str(tmp_path / "m"), "build-dataset", "--store",
            str(tmp_path / "s.db"), "--task", "detect", "--seed", "13", "--test-size", "5"]
    run_ok(runner, args + ["--out", str(tmp_path / "d1")])
    run_ok(runner, args + ["--out", str(tmp_path / "d2")])
    for name in ("train.jsonl", "test.jsonl"):
        assert _hash(tmp_path / "d1" / name) == _hash(tmp_path / "d2" / name)


def test_full_small_pipeline(runner, tmp_path):
    corpus, events = small_corpus(tmp_path)
    m = ["--manifest-dir", str(tmp_path / "m")]
    store = str(tmp_path / "s.db")
    run_ok(runner, m + ["ingest", "--corpus", str(corpus), "--events", str(events),
                        "--store", store])
    run_ok(runner, m + ["build-dataset", "--store", store, "--task", "detect",
                        "--seed", "13", "--test-size", "5", "--out", str(tmp_path / "ds")])
    run_ok(runner, m + ["augment", "--train", str(tmp_path / "ds" / "train.jsonl"),
                        "--out", str(tmp_path / "ds" / "train_aug.jsonl"), "--k", "2"])
    result = run_ok(
        runner,
        m + ["train", "--task", "detect", "--train", str(tmp_path / "ds" / "train_aug.jsonl"),
             "--run-dir", str(tmp_path / "runs"), "--name", "cli-det", "--seed", "13"],
    )
    assert "cli-det" in result.output
    result = run_ok(
        runner,
        m + ["evaluate", "--task", "detect", "--model", "cli-det",
             "--run-dir", str(tmp_path / "runs"), "--test", str(tmp_path / "ds" / "test.jsonl"),
             "--out", str(tmp_path / "report.json")],
    )
    assert "Overall" in result.output and "Baselines" in result.output
    report = json.loads((tmp_path / "report.json").read_text())
    assert report["task"] == "detect"
    result = run_ok(runner, m + ["report", "--reports", str(tmp_path / "report.json"),
                                 "--format", "csv"])
    assert result.output.startswith("class,model")


def test_augment_quadruples_counts(runner, tmp_path):
    train_path = tmp_path / "train.jsonl"
    write_jsonl(
        train_path,
        [
            {"id": f"p{i}", "text": f"The guards slew the intruder number {i}.",
             "task": "detect", "label": "violent", "provenance": "original"}
            for i in range(4)
        ],
    )
    result = run_ok(
        runner,
        ["--manifest-dir", str(tmp_path / "m"), "augment", "--train", str(train_path),
         "--out", str(tmp_path / "aug.jsonl"), "--k", "3"],
    )
    assert '"violent": 16' in result.output


def test_evaluate_with_preds_and_golds(runner, tmp_path):
    preds = tmp_path / "p.jsonl"
    golds = tmp_path / "g.jsonl"
    write_jsonl(
        preds,
        [{"passage_id": f"x{i}", "task": "detect",
          "pred": "violent" if i < 6 else "nonviolent"} for i in range(10)],
    )
    write_jsonl(
        golds,
        [{"passage_id": f"x{i}", "gold": "violent" if i < 5 else "nonviolent"}
         for i in range(10)],
    )
    result = run_ok(
        runner,
        ["--manifest-dir", str(tmp_path / "m"), "evaluate", "--preds", str(preds),
         "--golds", str(golds)],
    )
    assert "Violent" in result.output and "Overall" in result.output


def test_evaluate_foreign_label_exit_3(runner, tmp_path):
    preds = tmp_path / "p.jsonl"
    write_jsonl(preds, [{"passage_id": "x", "task": "detect", "pred": "martial",
                         "gold": "violent"}])
    result = runner.invoke(
        main, ["--manifest-dir", str(tmp_path / "m"), "evaluate", "--preds", str(preds)]
    )
    assert result.exit_code == 3
    assert "error: validation:" in result.output


def test_annotate_zeroshot_stub(runner, tmp_path):
    corpus, events = small_corpus(tmp_path)
    store = str(tmp_path / "s.db")
    m = ["--manifest-dir", str(tmp_path / "m")]
    run_ok(runner, m + ["ingest", "--corpus", str(corpus), "--store", store])
    out = tmp_path / "zs.jsonl"
    result = run_ok(
        runner,
        m + ["annotate-zeroshot", "--store", store, "--out", str(out), "--record"],
    )
    assert "annotated 16 passages" in result.output
    rows = [json.loads(line) for line in out.read_text().splitlines()]
    assert len(rows) == 16
    assert sum(1 for r in rows if r["pred"] == "violent") == 4


def test_config_file_supplies_defaults(runner, tmp_path):
    corpus, events = small_corpus(tmp_path)
    store = str(tmp_path / "s.db")
    cfg = tmp_path / "violens.yaml"
    cfg.write_text("seed: 99\ntest_size: 5\n", "utf-8")
    m = ["--config", str(cfg), "--manifest-dir", str(tmp_path / "m")]
    run_ok(runner, m + ["ingest", "--corpus", str(corpus), "--events", str(events),
                        "--store", store])
    run_ok(runner, m + ["build-dataset", "--store", store, "--task", "detect",
                        "--out", str(tmp_path / "ds")])
    stats = json.loads((tmp_path / "ds" / "stats.json").read_text())
    assert stats["seed"] == 99
    assert sum(stats["test"].values()) == 5


def test_manifest_references_prior_run(runner, tmp_path):
    corpus, events = small_corpus(tmp_path)
    mdir = tmp_path / "m"
    args = ["--manifest-dir", str(mdir), "bootstrap", "--out", str(tmp_path / "data")]
    run_ok(runner, args)
    run_ok(runner, args)
    manifests = sorted(mdir.glob("bootstrap-*.json"))
    assert len(manifests) == 2
    second = json.loads(manifests[1].read_text())
    assert second["reuses"] == manifests[0].name
