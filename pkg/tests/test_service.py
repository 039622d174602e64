from __future__ import annotations

import json

import pytest
from fastapi.testclient import TestClient

import querysketch.lang as L
from conftest import DATA_DIR
from querysketch.service import create_app

CONFIG = {"sample_count": 30, "mh_steps": 50, "max_join_depth": 3, "seed": 5}


@pytest.fixture()
def client():
    return TestClient(create_app())


@pytest.fixture()
def database_payload():
    schema = json.loads((DATA_DIR / "schema.json").read_text(encoding="utf-8"))
    csv = {name: (DATA_DIR / f"{name}.csv").read_text(encoding="utf-8")
           for name in ("authors", "writes", "publications")}
    return {"schema": schema, "csv": csv}


@pytest.fixture()
def database_id(client, database_payload):
    response = client.post("/databases", json=database_payload)
    assert response.status_code == 201
    return response.json()["database_id"]


def _start(client, database_id, sketch_text, config=CONFIG):
    return client.post("/sessions", json={
        "database_id": database_id, "sketch": sketch_text, "config": config})


def test_database_lifecycle(client, database_payload):
    created = client.post("/databases", json=database_payload)
    assert created.status_code == 201
    body = created.json()
    assert body["v"] == 1
    assert body["tables"] == ["authors", "writes", "publications"]

    tables = client.get(f"/databases/{body['database_id']}/tables")
    assert tables.status_code == 200
    assert tables.json()["tables"] == ["authors", "writes", "publications"]


def test_database_errors(client):
    assert client.post("/databases", json={"schema": {"tables": "x"}, "csv": {}}).status_code == 400
    assert client.post("/databases", json={"csv": {}}).status_code == 400
    assert client.get("/databases/nope/tables").status_code == 404
    assert client.get("/databases/nope/tables/authors/preview").status_code == 404


def test_preview_endpoint(client, database_id):
    full = client.get(f"/databases/{database_id}/tables/authors/preview?rows=2").json()
    assert full["columns"] == ["aid", "name"]
    assert full["rows"] == [[0, "Alan M. Turing"], [1, "Alonzo Church"]]

    empty = client.get(f"/databases/{database_id}/tables/authors/preview?rows=0").json()
    assert empty["columns"] == ["aid", "name"]
    assert empty["rows"] == []

    assert client.get(f"/databases/{database_id}/tables/nope/preview").status_code == 404


def test_session_parse_error_is_422(client, database_id):
    response = _start(client, database_id, "SELECT FROM")
    assert response.status_code == 422
    body = response.json()
    assert "line" in body and "column" in body


def test_session_flow_with_ground_truth(client, database_id, pubs_catalog, pubs_gt,
                                        pubs_sketch_text):
    created = _start(client, database_id, pubs_sketch_text)
    assert created.status_code == 201
    resource = created.json()
    session_id = resource["session_id"]
    assert resource["status"] == "awaiting_answer"

    # GET does not mutate: identical bodies on repeat
    once = client.get(f"/sessions/{session_id}").json()
    twice = client.get(f"/sessions/{session_id}").json()
    assert once == twice == resource | {"session_id": session_id}

    answers = 0
    while resource["status"] == "awaiting_answer":
        question = resource["question"]
        # payload completeness: previews cover every table the summary names
        for preview in question["previews"]:
            assert preview["rows"], "question preview must carry data"
        refined = L.parse_sketch(question["resulting_sketch"], pubs_catalog)
        accept = L.matches(refined, pubs_gt)
        resource = client.post(f"/sessions/{session_id}/answer",
                               json={"accept": accept}).json()
        answers += 1
        assert answers < 60

    assert resource["status"] == "complete"
    final = resource["final"]
    assert L.parse_sketch(final["query"], pubs_catalog) == pubs_gt
    assert final["result"]["columns"] == ["name"]
    assert final["result"]["rows"] == [["Alan M. Turing"]]

    # answering a completed session conflicts
    conflict = client.post(f"/sessions/{session_id}/answer", json={"accept": True})
    assert conflict.status_code == 409


def test_undo_round_trip(client, database_id, pubs_sketch_text):
    resource = _start(client, database_id, pubs_sketch_text).json()
    session_id = resource["session_id"]
    initial = client.get(f"/sessions/{session_id}").json()

    answered = client.post(f"/sessions/{session_id}/answer", json={"accept": True}).json()
    assert answered != initial

    undone = client.post(f"/sessions/{session_id}/undo").json()
    assert undone == initial

    empty = client.post(f"/sessions/{session_id}/undo")
    assert empty.status_code == 409


def test_question_previews_match_display_tables(client, database_id, pubs_sketch_text):
    resource = _start(client, database_id, pubs_sketch_text).json()
    question = resource["question"]
    summary = question["summary"]
    for preview in question["previews"]:
        assert preview["table"] in summary or preview["table"] in \
            question["resulting_sketch"]


def test_unknown_session_is_404(client):
    assert client.get("/sessions/nope").status_code == 404
    assert client.post("/sessions/nope/answer", json={"accept": True}).status_code == 404
    assert client.post("/sessions/nope/undo").status_code == 404
    assert client.post("/sessions", json={"database_id": "nope", "sketch": "x"}).status_code == 404


def test_session_persistence(tmp_path, database_payload, pubs_sketch_text):
    from querysketch.service import ServiceState

    service = ServiceState(persist_dir=tmp_path)
    client = TestClient(create_app(service))
    database_id = client.post("/databases", json=database_payload).json()["database_id"]
    resource = _start(client, database_id, pubs_sketch_text).json()
    session_id = resource["session_id"]
    client.post(f"/sessions/{session_id}/answer", json={"accept": False})

    snapshot = json.loads((tmp_path / f"{session_id}.json").read_text(encoding="utf-8"))
    assert snapshot["v"] == 1
    assert len(snapshot["negatives"]) == 1
    assert snapshot["history"][0]["answer"] is False


def test_no_soft_config_strips_blocks(client, database_id, pubs_sketch_text):
    resource = _start(client, database_id, pubs_sketch_text,
                      config=CONFIG | {"no_soft": True}).json()
    assert "{" not in resource["sketch"]


def test_database_from_data_dir(client):
    schema = json.loads((DATA_DIR / "schema.json").read_text(encoding="utf-8"))
    response = client.post("/databases", json={"schema": schema,
                                               "data_dir": str(DATA_DIR)})
    assert response.status_code == 201
    assert response.json()["tables"] == ["authors", "writes", "publications"]
