import json
import time

import pytest
from fastapi.testclient import TestClient

from tests.conftest import make_passage
from violens.models import TrainConfig, train_detector
from violens.records import LabeledExample, Prediction
from violens.service import create_app
from violens.store import CorpusStore

TOKEN = "test-token"


def train_texts():
    violent = [
        "The raiders slew the watchmen and butchered the herds.",
        "He stabbed the magistrate on the temple steps.",
        "The troops massacred the garrison after the surrender.",
        "She was cut down in the doorway by the conspirators.",
    ]
    peaceful = [
        "The council voted funds to repair the aqueduct.",
        "Merchants exchanged grain and oil at the fair.",
        "The ambassadors agreed on peace terms.",
        "A festival with choral contests was held in spring.",
    ]
    out = [LabeledExample(f"v{i}", t, "detect", "violent") for i, t in enumerate(violent)]
    out += [LabeledExample(f"n{i}", t, "detect", "nonviolent") for i, t in enumerate(peaceful)]
    return out


@pytest.fixture
def service(tmp_path):
    store = CorpusStore(tmp_path / "store.db")
    store.put_passages(
        [
            make_passage("Alexander", 1, 1, text="The envoys were received with honor."),
            make_passage("Alexander", 1, 2, text="He slew the guard and seized the gate."),
            make_passage("Alexander", 2, 1, text="Taxes on the harbor were remitted."),
            make_passage("Sulla", 1, 1, text="The veterans were settled on new land."),
        ]
    )
    run_dir = tmp_path / "runs"
    handle = train_detector(train_texts(), TrainConfig(seed=13), run_dir, name="det-test")
    app = create_app(store, run_dir, token=TOKEN)
    client = TestClient(app)
    client.headers["Authorization"] = f"Bearer {TOKEN}"
    return client, store, handle


def wait_done(client, job_id, timeout=10.0):
    deadline = time.time() + timeout
    while time.time() < deadline:
        job = client.get(f"/jobs/{job_id}").json()
        if job["status"] in ("done", "failed"):
            return job
        time.sleep(0.02)
    raise AssertionError("job did not finish")


def test_health_is_open(service):
    client, _, _ = service
    bare = TestClient(client.app)
    assert bare.get("/health").json() == {"status": "ok"}


def test_auth_required(service):
    client, _, _ = service
    bare = TestClient(client.app)
    assert bare.get("/review/queue").status_code == 401
    wrong = TestClient(client.app)
    wrong.headers["Authorization"] = "Bearer nope"
    assert wrong.get("/review/queue").status_code == 401


def test_job_over_one_work(service):
    client, store, handle = service
    resp = client.post(
        "/jobs", json={"task": "detect", "model_id": handle.model_id, "works": ["Alexander"]}
    )
    assert resp.status_code == 201
    job = wait_done(client, resp.json()["id"])
    assert job["status"] == "done"
    assert job["processed"] == 3  # section count of Alexander
    assert sum(job["class_counts"].values()) == 3
    assert len(store.list_predictions()) == 3


def test_job_idempotent_unless_forced(service):
    client, _, handle = service
    body = {"task": "detect", "model_id": handle.model_id, "works": ["Sulla"]}
    first = client.post("/jobs", json=body).json()
    wait_done(client, first["id"])
    second = client.post("/jobs", json=body).json()
    assert second["id"] == first["id"]
    forced = client.post("/jobs", json=dict(body, force=True)).json()
    assert forced["id"] != first["id"]
    wait_done(client, forced["id"])


def test_job_unknown_model_404(service):
    client, _, _ = service
    resp = client.post("/jobs", json={"task": "detect", "model_id": "ghost", "works": []})
    assert resp.status_code == 404


def test_job_empty_filter_400(service):
    client, _, handle = service
    resp = client.post(
        "/jobs", json={"task": "detect", "model_id": handle.model_id, "works": ["Atlantis"]}
    )
    assert resp.status_code == 400


def test_queue_ordering_and_verdict_flow(service):
    client, store, _ = service
    store.add_predictions(
        [
            Prediction(id="p-sure", passage_id="Alexander.1.1", task="detect",
                       label="violent", score=0.97, model_id="m"),
            Prediction(id="p-edge", passage_id="Alexander.1.2", task="detect",
                       label="violent", score=0.51, model_id="m"),
        ]
    )
    queue = client.get("/review/queue", params={"task": "detect"}).json()
    assert [item["prediction_id"] for item in queue["items"]] == ["p-edge", "p-sure"]
    first = queue["items"][0]
    assert first["text"] == "He slew the guard and seized the gate."
    assert first["citation"] == "Alexander 1.2"

    resp = client.post(
        "/review/p-edge/verdict",
        json={"decision": "accept", "reviewer": "historian"},
    )
    assert resp.status_code == 200
    queue = client.get("/review/queue", params={"task": "detect"}).json()
    assert [item["prediction_id"] for item in queue["items"]] == ["p-sure"]


def test_verdict_error_codes(service):
    client, store, _ = service
    store.add_predictions(
        [Prediction(id="p1", passage_id="Alexander.1.1", task="detect",
                    label="violent", score=0.9, model_id="m")]
    )
    assert client.post(
        "/review/ghost/verdict", json={"decision": "accept", "reviewer": "a"}
    ).status_code == 404
    assert client.post(
        "/review/p1/verdict", json={"decision": "accept", "reviewer": "a"}
    ).status_code == 200
    assert client.post(
        "/review/p1/verdict", json={"decision": "reject", "reviewer": "a"}
    ).status_code == 409
    assert client.post(
        "/review/p1/verdict",
        json={"decision": "relabel", "reviewer": "b", "corrected_label": "martial"},
    ).status_code == 422
    assert client.post(
        "/review/p1/verdict",
        json={"decision": "relabel", "reviewer": "b"},
    ).status_code == 422


def test_export_feedback_round_trip(service):
    client, store, _ = service
    store.add_predictions(
        [
            Prediction(id="p1", passage_id="Alexander.1.1", task="detect",
                       label="violent", score=0.9, model_id="m"),
            Prediction(id="p2", passage_id="Alexander.1.2", task="detect",
                       label="violent", score=0.8, model_id="m"),
            Prediction(id="p3", passage_id="Alexander.2.1", task="detect",
                       label="nonviolent", score=0.2, model_id="m"),
        ]
    )
    client.post("/review/p1/verdict", json={"decision": "accept", "reviewer": "h"})
    client.post("/review/p2/verdict", json={"decision": "reject", "reviewer": "h"})
    client.post(
        "/review/p3/verdict",
        json={"decision": "relabel", "reviewer": "h", "corrected_label": "violent"},
    )
    resp = client.get("/export/feedback", params={"task": "detect"})
    assert resp.status_code == 200
    lines = [json.loads(line) for line in resp.text.splitlines()]
    assert len(lines) == 3
    labels = {row["id"]: row["label"] for row in lines}
    assert labels == {
        "Alexander.1.1": "violent",
        "Alexander.1.2": "nonviolent",  # rejected violent prediction
        "Alexander.2.1": "violent",  # relabel carries corrected label
    }
    for row in lines:
        LabeledExample.from_json(row)  # importable as training data


def test_export_feedback_empty(service):
    client, _, _ = service
    resp = client.get("/export/feedback", params={"task": "detect"})
    assert resp.status_code == 200
    assert resp.text == ""


def test_queue_empty_store(service):
    client, _, _ = service
    queue = client.get("/review/queue", params={"task": "level"}).json()
    assert queue == {"total": 0, "items": []}


def test_passage_endpoint_carries_citation(service):
    client, _, _ = service
    resp = client.get("/passages/Alexander.1.2")
    assert resp.status_code == 200
    body = resp.json()
    assert body["citation"] == "Alexander 1.2"
    assert body["text"].startswith("He slew")
    assert client.get("/passages/ghost").status_code == 404


def test_registry_endpoint(service):
    client, _, _ = service
    body = client.get("/registry/level").json()
    assert body["task"] == "level"
    assert [lab["name"] for lab in body["labels"]] == [
        "interpersonal", "intrapersonal", "intersocial", "intrasocial"
    ]
    assert all(lab["description"] for lab in body["labels"])
    assert client.get("/registry/weapon").status_code == 404
