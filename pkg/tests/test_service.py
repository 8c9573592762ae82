import json

import pytest
from fastapi.testclient import TestClient

from appmt.humaneval import EvalStore
from appmt.service import create_app

from tests.test_humaneval import make_item

FORBIDDEN_MARKERS = ("original_mt", "simplified_mt", "mapping")


@pytest.fixture
def client(tmp_path):
    store = EvalStore(tmp_path / "store")
    store.add_items([make_item(item_id=f"i{k}") for k in range(4)])
    return TestClient(create_app(store)), store


def start_session(client, evaluator="alice", language="en-xx"):
    response = client.post("/sessions", json={"evaluator_id": evaluator, "language": language})
    assert response.status_code == 200
    return response.json()["session_id"]


class TestSessions:
    def test_create_and_conflict(self, client):
        http, _ = client
        session_id = start_session(http)
        assert session_id
        dup = http.post("/sessions", json={"evaluator_id": "alice", "language": "en-xx"})
        assert dup.status_code == 409

    def test_unknown_language_404(self, client):
        http, _ = client
        response = http.post("/sessions", json={"evaluator_id": "a", "language": "zz-yy"})
        assert response.status_code == 404

    def test_validation_422(self, client):
        http, _ = client
        assert http.post("/sessions", json={"evaluator_id": ""}).status_code == 422


class TestNextAndRate:
    def test_full_session_flow(self, client):
        http, store = client
        session_id = start_session(http)
        seen = []
        while True:
            response = http.get(f"/sessions/{session_id}/next")
            assert response.status_code == 200
            body = response.json()
            assert not any(marker in json.dumps(body) for marker in FORBIDDEN_MARKERS)
            if body.get("done"):
                assert body["progress"]["completed"] == 4
                break
            item = body["item"]
            assert set(item["slots"]) == {"A", "B", "C"}
            assert "anchors" in body
            seen.append(item["item_id"])
            rate = http.post(
                f"/sessions/{session_id}/ratings",
                json={"item_id": item["item_id"], "scores": {"A": 6, "B": 4, "C": 2}},
            )
            assert rate.status_code == 204
        assert len(seen) == 4
        assert len(store.export_ratings()) == 4

    def test_unknown_session_404(self, client):
        http, _ = client
        assert http.get("/sessions/ghost/next").status_code == 404

    def test_score_out_of_range_422(self, client):
        http, _ = client
        session_id = start_session(http)
        item = http.get(f"/sessions/{session_id}/next").json()["item"]
        response = http.post(
            f"/sessions/{session_id}/ratings",
            json={"item_id": item["item_id"], "scores": {"A": 7, "B": 0, "C": 0}},
        )
        assert response.status_code == 422

    def test_unknown_item_404(self, client):
        http, _ = client
        session_id = start_session(http)
        response = http.post(
            f"/sessions/{session_id}/ratings",
            json={"item_id": "ghost", "scores": {"A": 1, "B": 1, "C": 1}},
        )
        assert response.status_code == 404

    def test_resubmission_latest_wins(self, client):
        http, store = client
        session_id = start_session(http)
        item = http.get(f"/sessions/{session_id}/next").json()["item"]
        for scores in ({"A": 1, "B": 1, "C": 1}, {"A": 2, "B": 3, "C": 4}):
            http.post(
                f"/sessions/{session_id}/ratings",
                json={"item_id": item["item_id"], "scores": scores},
            )
        exported = [r for r in store.export_ratings() if r["item_id"] == item["item_id"]]
        assert len(exported) == 1
        assert exported[0]["scores"] == {"A": 2, "B": 3, "C": 4}


class TestReportAndExport:
    def test_report_unblinds(self, client):
        http, _ = client
        session_id = start_session(http)
        item = http.get(f"/sessions/{session_id}/next").json()["item"]
        http.post(
            f"/sessions/{session_id}/ratings",
            json={"item_id": item["item_id"], "scores": {"A": 2, "B": 4, "C": 6}},
        )
        report = http.get("/report", params={"language": "en-xx"}).json()
        # fixture mapping is A=original, B=simplified, C=reference
        assert report["n_items"] == 1
        assert report["mean_original"] == 2
        assert report["mean_simple"] == 4
        assert report["mean_human"] == 6
        assert report["pct_positive"] == 100.0

    def test_export_jsonl(self, client):
        http, _ = client
        session_id = start_session(http)
        item = http.get(f"/sessions/{session_id}/next").json()["item"]
        http.post(
            f"/sessions/{session_id}/ratings",
            json={"item_id": item["item_id"], "scores": {"A": 0, "B": 6, "C": 5}},
        )
        response = http.get("/export")
        assert response.status_code == 200
        assert response.headers["content-type"].startswith("application/x-ndjson")
        lines = [json.loads(l) for l in response.text.strip().splitlines()]
        assert len(lines) == 1
        assert lines[0]["scores"] == {"A": 0, "B": 6, "C": 5}
        assert not any(marker in response.text for marker in FORBIDDEN_MARKERS)
