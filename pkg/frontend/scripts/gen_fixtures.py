#!/usr/bin/env python3
"""Record real /v1 responses as test fixtures for the UI suite.

Spins the actual service in-process (no sockets) against the bundled
reference case, so every fixture is a byte-faithful service payload.
"""

import json
import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parents[2]
sys.path.insert(0, str(ROOT / "src"))

from fastapi.testclient import TestClient  # noqa: E402

from gridshape.service import create_app  # noqa: E402

CASE_PATH = ROOT / "src" / "gridshape" / "cases" / "wscc_2area.json"
OUT = Path(__file__).resolve().parents[1] / "test" / "fixtures"

# Scripted target sets for the projection-dominance suite: spread over the
# linear branch, the curved branch, and the saturation corner, all feasible
# on the reference case.
TARGET_SETS = [
    {"cos_psi_d": 0.05, "alpha_d": 0.10},
    {"cos_psi_d": 0.10, "alpha_d": 0.20},
    {"cos_psi_d": 0.10, "alpha_d": 1.00},
    {"cos_psi_d": 0.15, "alpha_d": 2.00},
    {"cos_psi_d": 0.17, "alpha_d": 3.00},
    {"cos_psi_d": 0.30, "alpha_d": 0.50},
    {"cos_psi_d": 0.50, "alpha_d": 0.20},
    {"cos_psi_d": 0.80, "alpha_d": 0.10},
    {"cos_psi_d": 0.95, "alpha_d": 0.25},
    {"cos_psi_d": 1.00, "alpha_d": 0.20},
]


def dump(name: str, payload) -> None:
    path = OUT / name
    path.write_text(json.dumps(payload, sort_keys=True,
                               separators=(",", ":")) + "\n")
    print(f"wrote {path}")


def main() -> None:
    OUT.mkdir(parents=True, exist_ok=True)
    app = create_app(OUT / "_store")
    with TestClient(app) as client:
        case_data = json.loads(CASE_PATH.read_text())
        case_id = client.post("/v1/cases", json=case_data).json()["id"]
        dump("cases.json", client.get("/v1/cases").json())
        dump("spectrum.json",
             client.get(f"/v1/cases/{case_id}/spectrum").json())
        dump("frontier.json",
             client.get(f"/v1/frontier?case_id={case_id}").json())

        resp = client.post("/v1/tune", json={
            "case_id": case_id,
            "targets": {"cos_psi_d": 0.1, "alpha_d": 0.2, "delta_p": 0.2,
                        "delta_omega_mhz": 200.0},
            "coi_override": 0.0})
        assert resp.status_code == 200
        dump("tune_reference.json", resp.json())

        scripted = []
        for targets in TARGET_SETS:
            r = client.post("/v1/tune", json={
                "case_id": case_id, "targets": targets,
                "coi_override": 0.0})
            assert r.status_code == 200, (targets, r.json())
            scripted.append({"targets": targets, "response": r.json()})
        dump("tune_targets.json", scripted)

        dump("locus_fs.json", client.post("/v1/locus", json={
            "case_id": case_id,
            "controller": {"kind": "fs", "d_b": 35.89},
            "n_points": 120}).json())
        dump("analyze_fs.json", client.post("/v1/analyze", json={
            "case_id": case_id,
            "controller": {"kind": "fs", "d_b": 35.89},
            "region": {"alpha": 0.2, "cos_psi": 0.1}}).json())

        dump("simulate_full.json", client.post("/v1/simulate", json={
            "case_id": case_id, "u0": [-0.2, 0, 0], "t_end": 4.0,
            "dt": 0.05, "controller": {"kind": "fs", "d_b": 35.89},
            "mode": "direct"}).json())
        down = client.post("/v1/simulate", json={
            "case_id": case_id, "u0": [-0.2, 0, 0], "t_end": 40.0,
            "dt": 0.005, "controller": {"kind": "fs", "d_b": 35.89},
            "mode": "direct"}).json()
        assert down["downsampled"] is True
        dump("simulate_down.json", down)

        dump("compare.json", client.post("/v1/compare", json={
            "case_id": case_id, "d_b": 35.89, "u0": [-0.2, 0, 0],
            "t_end": 110.0, "dt": 0.05}).json())
    for extra in (OUT / "_store").glob("*"):
        extra.unlink()
    (OUT / "_store").rmdir()


if __name__ == "__main__":
    main()
