"""HTTP service endpoints exercised through the test client."""
import pytest
from fastapi.testclient import TestClient

from polygame import serialize
from polygame.instances import triangle_game, triangle_profiles
from polygame.service import app

client = TestClient(app)


@pytest.fixture(scope="module")
def triangle_payloads():
    game = triangle_game()
    direct, indirect = triangle_profiles(game)
    return (serialize.game_to_dict(game),
            serialize.profile_to_dict(direct),
            serialize.profile_to_dict(indirect))


def test_health():
    resp = client.get("/health")
    assert resp.status_code == 200
    assert resp.json() == {"status": "ok"}


def test_verify_equilibrium(triangle_payloads):
    game, direct, _ = triangle_payloads
    resp = client.post("/verify", json={"game": game, "profile": direct})
    assert resp.status_code == 200
    body = resp.json()
    assert body["status"] == "ok"
    assert body["is_equilibrium"] is True
    assert body["worst_violation"] == 0.0


def test_verify_negative_still_200(triangle_payloads):
    game, direct, _ = triangle_payloads
    split = {"distributions": {"1": {"e": 0.5, "f,g": 0.5},
                               "2": {"f": 1.0}, "3": {"g": 1.0}},
             "loads": {}}
    resp = client.post("/verify", json={"game": game, "profile": split})
    assert resp.status_code == 200
    assert resp.json()["status"] == "not_equilibrium"


def test_solve_and_probe(triangle_payloads):
    game, _, _ = triangle_payloads
    resp = client.post("/solve", json={"game": game, "starts": 3, "seed": 7})
    assert resp.status_code == 200
    assert resp.json()["count"] >= 1
    resp = client.post("/probe", json={"game": game, "starts": 4, "seed": 7, "jobs": 2})
    assert resp.status_code == 200
    assert resp.json()["command"] == "probe"


def test_matroid_check_endpoint():
    resp = client.post("/matroid/check",
                       json={"matroid": {"class": "uniform", "m": 4, "k": 2}})
    assert resp.status_code == 200
    body = resp.json()
    assert body["base_orderable"] is True and body["status"] == "ok"


def test_exchange_endpoint_conflict():
    oracle = {"matroid": {"class": "graphic",
                          "vertices": ["v1", "v2", "v3", "v4"],
                          "edges": [["1", "v1", "v2"], ["2", "v2", "v3"],
                                    ["3", "v3", "v1"], ["4", "v1", "v4"],
                                    ["5", "v2", "v4"], ["6", "v3", "v4"]]}}
    resp = client.post("/exchange", json={
        "oracle": oracle,
        "x": {"1": 1.0, "2": 1.0, "6": 1.0},
        "y": {"3": 1.0, "4": 1.0, "5": 1.0},
        "dot": True})
    assert resp.status_code == 200
    body = resp.json()
    assert body["status"] == "conflicting"
    assert set(body["conflict"]["trapped_supply"]) == {"1", "6"}
    assert "digraph" in body["dot"]["bidirectional"]


def test_reproduce_endpoint():
    resp = client.post("/reproduce", json={"target": "triangle"})
    assert resp.status_code == 200
    assert all(resp.json()["self_check"].values())


def test_property_endpoints():
    resp = client.post("/property/bidir", json={
        "oracle": {"matroid": {"class": "uniform", "m": 3, "k": 1}},
        "samples": 30})
    assert resp.status_code == 200
    assert resp.json()["clean"] is True
    resp = client.post("/property/graph", json={
        "graph": {"vertices": ["a", "b", "c"],
                  "edges": [["1", "a", "b"], ["2", "b", "c"], ["3", "c", "a"]]}})
    assert resp.status_code == 200
    assert resp.json()["uniqueness_property"] is False


def test_malformed_game_maps_to_400(triangle_payloads):
    resp = client.post("/verify", json={"game": {"players": []}, "profile": {}})
    assert resp.status_code == 400


def test_bad_request_shape_maps_to_422():
    resp = client.post("/solve", json={"starts": 1})
    assert resp.status_code == 422


def test_unknown_reproduce_target_maps_to_400():
    resp = client.post("/reproduce", json={"target": "nonsense"})
    assert resp.status_code == 400
