"""Stateless HTTP layer over the library for UI clients.

JSON endpoints under /v1 mirror the library report schemas; every response
is a pure function of (stored case bytes, request body). The case store is
content-addressed and append-only: uploads create ``{id}.json`` atomically,
re-uploading identical content yields the same id, and reads never need
locking.
"""

from __future__ import annotations

import math
import os
import tempfile
from pathlib import Path

import numpy as np
from fastapi import FastAPI, Query, Request
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from . import __version__
from .errors import (GridshapeError, NadirConditionViolated, NotSettled,
                     TuningInfeasible)
from .netmodel import (NetworkCase, case_from_dict, case_spectrum,
                       proportional_variant, representative_params)
from .dynamics import (ControllerSpec, StepResponse, full_system_ss,
                       modal_step_response, step_response)
from .locus import default_gain_grid, geometry_for, locus_export, trace_locus
from .stability import StabilityRegion, analysis_report
from .tuning import (TuningTargets, achievable_frontier, delta_omega_from_mhz,
                     frontier_payload, tuning_report)
from .serialize import dump_json, to_jsonable

MAX_PLAIN_BYTES = 1_000_000
MAX_POINTS_PER_SERIES = 4000
_FLOAT_BYTES = 20      # rough JSON footprint of one serialized number


class CaseStore:
    """Directory-backed, content-addressed case storage."""

    def __init__(self, directory: str | Path):
        self.dir = Path(directory)
        self.dir.mkdir(parents=True, exist_ok=True)

    def put(self, data: dict) -> str:
        case = case_from_dict(data)     # validate before storing
        case_id = case.content_hash()
        path = self.dir / f"{case_id}.json"
        if not path.exists():
            fd, tmp = tempfile.mkstemp(dir=self.dir, suffix=".tmp")
            with os.fdopen(fd, "w") as f:
                f.write(dump_json(case.to_dict(), sig=17))
            os.replace(tmp, path)      # atomic; idempotent under races
        return case_id

    def get(self, case_id: str) -> NetworkCase:
        path = self.dir / f"{case_id}.json"
        if not path.is_file():
            raise KeyError(case_id)
        import json
        return case_from_dict(json.loads(path.read_text()))

    def list(self) -> list[dict]:
        out = []
        for path in sorted(self.dir.glob("*.json")):
            case = None
            try:
                import json
                case = case_from_dict(json.loads(path.read_text()))
            except Exception:
                continue
            out.append({"id": path.stem, "n": case.n, "f0": case.f0,
                        "s_base": case.s_base})
        return out


class ControllerBody(BaseModel):
    kind: str = "none"
    d_b: float = 0.0
    m_v: float | None = None


class RegionBody(BaseModel):
    alpha: float
    cos_psi: float


class AnalyzeBody(BaseModel):
    case_id: str
    controller: ControllerBody = Field(default_factory=ControllerBody)
    region: RegionBody | None = None


class TargetsBody(BaseModel):
    cos_psi_d: float
    alpha_d: float
    delta_p: float = 0.0
    delta_omega_d: float | None = None     # pu
    delta_omega_mhz: float | None = None   # converted with the case f0


class TuneBody(BaseModel):
    case_id: str
    targets: TargetsBody
    coi_override: float | None = None
    with_frontier: bool = False


class LocusBody(BaseModel):
    case_id: str
    controller: ControllerBody
    grid: list[float] | None = None
    n_points: int = 400


class SimulateBody(BaseModel):
    case_id: str
    controller: ControllerBody = Field(default_factory=ControllerBody)
    u0: list[float]
    t_end: float = 40.0
    dt: float = 0.01
    onset: float = 0.0
    mode: str = "modal"             # modal | direct | both
    heterogeneous: bool = False
    full: bool = False


class CompareBody(BaseModel):
    case_id: str
    d_b: float
    m_v: float | None = None        # defaults to the Nadir-free minimum
    u0: list[float]
    t_end: float = 120.0
    dt: float = 0.02
    onset: float = 0.0
    heterogeneous: bool = False
    full: bool = False


def _controller_spec(body: ControllerBody, params) -> ControllerSpec:
    from .tuning import vi_mv_min
    if body.kind == "vi":
        m_v = body.m_v if body.m_v is not None else vi_mv_min(params, body.d_b)
        return ControllerSpec("vi", d_b=body.d_b, m_v=m_v)
    if body.kind == "fs":
        return ControllerSpec("fs", d_b=body.d_b)
    return ControllerSpec("none")


def _targets(body: TargetsBody, f0: float) -> TuningTargets:
    dwd = math.inf
    if body.delta_omega_d is not None:
        dwd = body.delta_omega_d
    elif body.delta_omega_mhz is not None:
        dwd = delta_omega_from_mhz(body.delta_omega_mhz, f0)
    return TuningTargets(cos_psi_d=body.cos_psi_d, alpha_d=body.alpha_d,
                         delta_p=body.delta_p, delta_omega_d=dwd)


def _downsample_series(t: np.ndarray, v: np.ndarray) -> dict:
    """Per-bucket min/max thinning to at most MAX_POINTS_PER_SERIES points."""
    n_buckets = MAX_POINTS_PER_SERIES // 2
    if t.size <= MAX_POINTS_PER_SERIES:
        return {"t": t, "v": v}
    edges = np.linspace(0, t.size, n_buckets + 1).astype(int)
    idx = []
    for a, b in zip(edges[:-1], edges[1:]):
        if b <= a:
            continue
        seg = v[a:b]
        lo, hi = a + int(np.argmin(seg)), a + int(np.argmax(seg))
        idx.extend(sorted({lo, hi}))
    keep = np.array(idx)
    return {"t": t[keep], "v": v[keep]}


def _response_payload(resp: StepResponse, meta: dict, full: bool) -> dict:
    n, t_len = resp.n, resp.t.size
    est_bytes = (2 * n + 2) * t_len * _FLOAT_BYTES
    if full or est_bytes <= MAX_PLAIN_BYTES:
        return {"downsampled": False, "t": resp.t, "omega": resp.omega,
                "coi": resp.coi, "p_inv": resp.p_inv, "u0": resp.u0,
                "meta": meta}
    series = {"coi": _downsample_series(resp.t, resp.coi)}
    for i in range(n):
        series[f"omega_{i+1}"] = _downsample_series(resp.t, resp.omega[i])
        series[f"pinv_{i+1}"] = _downsample_series(resp.t, resp.p_inv[i])
    return {"downsampled": True, "series": series, "u0": resp.u0,
            "meta": meta}


def create_app(store_dir: str | Path, cors_origins=None) -> FastAPI:
    app = FastAPI(title="gridshape", version=__version__)
    store = CaseStore(store_dir)

    if cors_origins:
        from fastapi.middleware.cors import CORSMiddleware
        origins = ([cors_origins] if isinstance(cors_origins, str)
                   else list(cors_origins))
        app.add_middleware(CORSMiddleware, allow_origins=origins,
                           allow_methods=["*"], allow_headers=["*"])

    def _json(payload: dict, status: int = 200) -> JSONResponse:
        return JSONResponse(to_jsonable(payload), status_code=status)

    def _error(status: int, code: str, message: str, detail=None):
        return _json({"code": code, "message": message,
                      "detail": detail or {}}, status)

    @app.exception_handler(GridshapeError)
    async def _gridshape_error(request: Request, exc: GridshapeError):
        detail = {}
        status = 500
        if isinstance(exc, TuningInfeasible):
            status = 422
            detail = {"violated_bound": exc.bound_name,
                      "bound_value": exc.bound_value}
        elif isinstance(exc, (NadirConditionViolated, NotSettled)):
            status = 422
        return _error(status, exc.code, str(exc), detail)

    @app.exception_handler(ValueError)
    async def _value_error(request: Request, exc: ValueError):
        return _error(400, "validation_error", str(exc))

    @app.exception_handler(KeyError)
    async def _key_error(request: Request, exc: KeyError):
        return _error(404, "unknown_case", f"no case {exc.args[0]!r}")

    def _load(case_id: str):
        case = store.get(case_id)
        rep = representative_params(case)
        return case, rep, case_spectrum(case, rep)

    def _meta(case: NetworkCase) -> dict:
        return {"case_hash": case.content_hash(),
                "toolkit_version": __version__}

    @app.get("/health")
    @app.get("/v1/health")
    async def health():
        return {"status": "ok", "version": __version__}

    @app.post("/v1/cases")
    async def upload_case(body: dict):
        case_id = store.put(body)
        return _json({"id": case_id}, status=201)

    @app.get("/v1/cases")
    async def list_cases():
        return _json({"cases": store.list()})

    @app.get("/v1/cases/{case_id}/spectrum")
    async def spectrum(case_id: str):
        case, rep, spec = _load(case_id)
        return _json({
            **_meta(case),
            "lambda": spec.lam, "lambda2": spec.lambda2,
            "lambda_n": spec.lambda_n, "r": rep.r,
            "params": {"m": rep.m, "d": rep.d, "d_t": rep.d_t,
                       "tau": rep.tau, "r_sum": rep.r_sum},
            "buses": [{"id": b.id, "m": b.m, "d": b.d, "d_t": b.d_t,
                       "tau": b.tau} for b in case.buses],
            "f0": case.f0,
        })

    @app.post("/v1/analyze")
    async def analyze(body: AnalyzeBody):
        case, rep, spec = _load(body.case_id)
        ctrl = _controller_spec(body.controller, rep)
        region = None
        if body.region is not None:
            region = StabilityRegion.from_cos(body.region.alpha,
                                              body.region.cos_psi)
        report = analysis_report(ctrl, rep, spec, region)
        report.update(_meta(case))
        return _json(report)

    @app.post("/v1/tune")
    async def tune(body: TuneBody):
        case, rep, spec = _load(body.case_id)
        targets = _targets(body.targets, case.f0)
        report = tuning_report(rep, spec, targets,
                               coi_override=body.coi_override,
                               with_frontier=body.with_frontier)
        report.update(_meta(case))
        return _json(report)

    @app.post("/v1/locus")
    async def locus(body: LocusBody):
        case, rep, spec = _load(body.case_id)
        ctrl = _controller_spec(body.controller, rep)
        geometry = geometry_for(ctrl, rep)
        if body.grid is not None:
            grid = np.asarray(body.grid, dtype=float)
        else:
            grid = default_gain_grid(geometry, spec.lambda2, spec.lambda_n,
                                     n_points=body.n_points)
        branches = trace_locus(ctrl, rep, grid)
        payload = locus_export(ctrl, rep, branches,
                               mode_gains=spec.mode_gains())
        payload.update(_meta(case))
        return _json(payload)

    @app.get("/v1/frontier")
    async def frontier(case_id: str = Query(...),
                       n_points: int = Query(256)):
        case, rep, spec = _load(case_id)
        payload = frontier_payload(achievable_frontier(rep, spec, n_points))
        payload.update(_meta(case))
        return _json(payload)

    @app.post("/v1/simulate")
    async def simulate(body: SimulateBody):
        case, rep, spec = _load(body.case_id)
        ctrl = _controller_spec(body.controller, rep)
        u0 = np.asarray(body.u0, dtype=float)
        if u0.size != case.n:
            raise ValueError("u0 length must match the case size")
        if body.mode not in ("modal", "direct", "both"):
            raise ValueError("mode must be modal, direct, or both")
        out = {}
        modes = ["modal", "direct"] if body.mode == "both" else [body.mode]
        for mode in modes:
            if mode == "modal":
                resp = modal_step_response(ctrl, rep, spec, u0,
                                           t_end=body.t_end, dt=body.dt,
                                           onset=body.onset)
            else:
                sim_case = (case if body.heterogeneous
                            else proportional_variant(case, rep))
                resp = step_response(full_system_ss(sim_case, ctrl, rep), u0,
                                     t_end=body.t_end, dt=body.dt,
                                     onset=body.onset)
            meta = {**_meta(case), "mode": mode,
                    "heterogeneous": body.heterogeneous,
                    "controller": {"kind": ctrl.kind, "d_b": ctrl.d_b,
                                   "m_v": ctrl.m_v}}
            out[mode] = _response_payload(resp, meta, body.full)
        return _json(out if body.mode == "both" else out[modes[0]])

    @app.post("/v1/compare")
    async def compare(body: CompareBody):
        from .dynamics import steady_state_omega
        from .stability import (fit_envelope, fs_beats_vi,
                                fs_convergence_rate, vi_rate_bound)
        from .tuning import vi_mv_min
        case, rep, spec = _load(body.case_id)
        u0 = np.asarray(body.u0, dtype=float)
        if u0.size != case.n:
            raise ValueError("u0 length must match the case size")
        m_v = body.m_v if body.m_v is not None else vi_mv_min(rep, body.d_b)
        sim_case = (case if body.heterogeneous
                    else proportional_variant(case, rep))
        out = {**_meta(case),
               "controllers": {"d_b": body.d_b, "m_v": m_v}}
        rates = {}
        for name, ctrl in (("fs", ControllerSpec("fs", d_b=body.d_b)),
                           ("vi", ControllerSpec("vi", d_b=body.d_b,
                                                 m_v=m_v))):
            resp = step_response(full_system_ss(sim_case, ctrl, rep), u0,
                                 t_end=body.t_end, dt=body.dt,
                                 onset=body.onset)
            steady = steady_state_omega(sim_case, ctrl, u0, rep)
            fit = fit_envelope(resp, np.full(case.n, steady))
            rates[name] = fit.rate
            meta = {**_meta(case), "controller": {"kind": ctrl.kind,
                                                  "d_b": ctrl.d_b,
                                                  "m_v": ctrl.m_v}}
            out[name] = {
                "steady_state": steady,
                "envelope": {"rate": fit.rate, "amplitude": fit.amplitude,
                             "residual": fit.residual},
                "response": _response_payload(resp, meta, body.full),
            }
        bound = vi_rate_bound(rep, body.d_b, m_v)
        out["fs"]["rate_floor"] = fs_convergence_rate(
            rep, body.d_b, spec.lambda2).system_rate
        out["vi"]["rate_bound"] = bound.omega_n
        verdict = fs_beats_vi(rep, body.d_b, m_v)
        out["rate_comparison"] = {"lhs": verdict.lhs, "holds": verdict.holds,
                                  "margin": verdict.margin}
        out["faster"] = "fs" if rates["fs"] > rates["vi"] else "vi"
        return _json(out)

    return app
