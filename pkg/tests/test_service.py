import json
import math

import numpy as np
import pytest
from fastapi.testclient import TestClient

from gridshape.netmodel import load_case
from gridshape.service import create_app

from conftest import REFERENCE_CASE as CASE


@pytest.fixture()
def client(tmp_path):
    app = create_app(tmp_path / "store", cors_origins="http://localhost:5173")
    with TestClient(app) as c:
        yield c


@pytest.fixture()
def case_id(client):
    data = json.loads(open(CASE).read())
    resp = client.post("/v1/cases", json=data)
    assert resp.status_code == 201
    return resp.json()["id"]


def test_health(client):
    assert client.get("/v1/health").json()["status"] == "ok"
    assert client.get("/health").json()["status"] == "ok"


def test_upload_is_idempotent(client, case_id):
    data = json.loads(open(CASE).read())
    again = client.post("/v1/cases", json=data).json()["id"]
    assert again == case_id
    listing = client.get("/v1/cases").json()["cases"]
    assert [c["id"] for c in listing] == [case_id]


def test_spectrum_endpoint(client, case_id):
    body = client.get(f"/v1/cases/{case_id}/spectrum").json()
    assert body["lambda2"] == pytest.approx(151.47, rel=1e-9)
    assert body["lambda_n"] == pytest.approx(4967.96, rel=1e-9)
    assert len(body["lambda"]) == 3 and body["lambda"][0] == 0.0


def test_tune_reference_targets(client, case_id):
    resp = client.post("/v1/tune", json={
        "case_id": case_id,
        "targets": {"cos_psi_d": 0.1, "alpha_d": 0.2, "delta_p": 0.2,
                    "delta_omega_mhz": 200.0},
        "coi_override": 0.0,
    })
    assert resp.status_code == 200
    body = resp.json()
    assert body["d_b"] == pytest.approx(35.89, abs=0.01)
    assert body["regime"] == "linear_both"


def test_simulate_zero_disturbance(client, case_id):
    resp = client.post("/v1/simulate", json={
        "case_id": case_id, "u0": [0, 0, 0], "t_end": 2.0, "dt": 0.1,
        "controller": {"kind": "fs", "d_b": 35.89}})
    body = resp.json()
    assert body["downsampled"] is False
    assert np.abs(np.array(body["omega"])).max() == 0.0
    assert np.abs(np.array(body["coi"])).max() == 0.0


def test_analyze_tune_analyze_roundtrip(client, case_id):
    region = {"alpha": 0.2, "cos_psi": 0.1}
    first = client.post("/v1/analyze", json={
        "case_id": case_id, "controller": {"kind": "none"},
        "region": region}).json()
    assert first["pass"] is False
    tuned = client.post("/v1/tune", json={
        "case_id": case_id,
        "targets": {"cos_psi_d": 0.1, "alpha_d": 0.2},
    }).json()
    second = client.post("/v1/analyze", json={
        "case_id": case_id,
        "controller": {"kind": "fs", "d_b": tuned["d_b"]},
        "region": region}).json()
    assert second["pass"] is True


def test_unknown_case_is_404(client):
    resp = client.post("/v1/analyze", json={"case_id": "deadbeef",
                                            "controller": {"kind": "none"}})
    assert resp.status_code == 404
    assert resp.json()["code"] == "unknown_case"


def test_infeasible_tuning_is_422_with_bound(client, case_id):
    resp = client.post("/v1/tune", json={
        "case_id": case_id,
        "targets": {"cos_psi_d": 0.1, "alpha_d": 50.0}})
    assert resp.status_code == 422
    body = resp.json()
    assert body["code"] == "infeasible_decay_target"
    assert body["detail"]["violated_bound"] == "decay target"
    assert body["detail"]["bound_value"] == pytest.approx(
        math.sqrt(151.47 / (46.1 / 3)), rel=1e-6)


def test_locus_endpoint(client, case_id):
    resp = client.post("/v1/locus", json={
        "case_id": case_id, "controller": {"kind": "fs", "d_b": 35.89},
        "n_points": 80})
    body = resp.json()
    assert len(body["branches"]) == 2
    assert body["mode_gains"] == [pytest.approx(151.47, rel=1e-9),
                                  pytest.approx(4967.96, rel=1e-9)]


def test_frontier_endpoint(client, case_id):
    body = client.get(f"/v1/frontier?case_id={case_id}").json()
    assert body["alpha_max"] == pytest.approx(
        math.sqrt(151.47 / (46.1 / 3)), rel=1e-6)
    assert len(body["points"]) > 100


def test_simulate_downsampling_preserves_peaks(client, case_id):
    long_req = {
        "case_id": case_id, "u0": [-0.2, 0, 0], "t_end": 400.0, "dt": 0.005,
        "controller": {"kind": "fs", "d_b": 35.89}, "mode": "direct"}
    resp = client.post("/v1/simulate", json=long_req).json()
    assert resp["downsampled"] is True
    series = resp["series"]["omega_1"]
    assert len(series["t"]) <= 4000
    full = client.post("/v1/simulate",
                       json={**long_req, "full": True}).json()
    assert full["downsampled"] is False
    full_omega1 = np.array(full["omega"][0])
    # Global extrema survive the thinning.
    assert min(series["v"]) == pytest.approx(full_omega1.min(), rel=1e-9)
    assert max(series["v"]) == pytest.approx(full_omega1.max(), rel=1e-9)


def test_statelessness_replay_identical(client, case_id):
    req = {"case_id": case_id,
           "targets": {"cos_psi_d": 0.1, "alpha_d": 0.2}}
    a = client.post("/v1/tune", json=req).content
    b = client.post("/v1/tune", json=req).content
    assert a == b


def test_compare_endpoint(client, case_id):
    resp = client.post("/v1/compare", json={
        "case_id": case_id, "d_b": 35.89, "u0": [-0.2, 0, 0],
        "t_end": 110.0, "dt": 0.02})
    assert resp.status_code == 200
    body = resp.json()
    assert body["faster"] == "fs"
    assert body["fs"]["envelope"]["rate"] > body["vi"]["envelope"]["rate"]
    assert body["rate_comparison"]["lhs"] > 2.0
    assert body["vi"]["envelope"]["rate"] <= 1.05 * body["vi"]["rate_bound"]
    assert "omega" in body["fs"]["response"] \
        or "series" in body["fs"]["response"]
