"""HTTP endpoints over a trained supernetwork."""

import pytest
from fastapi.testclient import TestClient

from stitchlab.api import EVALUATOR_CACHE_SIZE, create_app
from stitchlab.phenotype import reference_madds


@pytest.fixture(scope="module")
def client(trained_supernet, spirals):
    return TestClient(create_app(trained_supernet, spirals))


def test_health(client):
    response = client.get("/health")
    assert response.status_code == 200
    assert response.json()["status"] == "ok"


def test_supernetwork_info(client, trained_supernet):
    info = client.get("/supernetwork").json()
    assert info["genotype_length"] == 5
    assert len(info["matches"]) == 2
    assert info["reference_madds"] == reference_madds(trained_supernet)


def test_decode_reference(client, trained_supernet):
    body = client.post("/decode", json={"genotype": "00000"}).json()
    assert body["madds"] == reference_madds(trained_supernet)["parent_a"]
    assert "switch/output" in body["active_switches"]
    assert all(not node.startswith("B/") for node in body["nodes"])


def test_evaluate_on_test_split(client):
    body = client.post("/evaluate", json={"genotype": "00002", "split": "test"}).json()
    assert body["split"] == "test"
    assert 0.0 <= body["accuracy"] <= 1.0
    assert body["stitches"] == 0


@pytest.mark.parametrize("payload", [
    {"genotype": "0000"},
    {"genotype": "00003"},
    {"genotype": "0000x"},
    {"genotype": "00000", "split": "holdout"},
])
def test_bad_requests_are_unprocessable(client, payload):
    assert client.post("/evaluate", json=payload).status_code == 422


@pytest.mark.parametrize("limit", [0, -1])
def test_non_positive_eval_limit_is_unprocessable(client, limit):
    response = client.post("/evaluate", json={"genotype": "00000", "eval_limit": limit})
    assert response.status_code == 422


def test_evaluator_cache_is_bounded(trained_supernet, spirals):
    app = create_app(trained_supernet, spirals)
    with TestClient(app) as local:
        for limit in range(1, EVALUATOR_CACHE_SIZE + 5):
            response = local.post("/evaluate", json={"genotype": "00002", "eval_limit": limit})
            assert response.status_code == 200
    assert app.state.evaluator_for.cache_info().currsize == EVALUATOR_CACHE_SIZE
