"""Command-line front end: case ingestion, analysis, tuning, locus/frontier
export, simulation, FS-vs-VI comparison, and the HTTP service.

All artifacts are data-only (JSON/CSV series; rendering is a client concern)
and deterministic: identical config and case produce byte-identical files.
Every report embeds the case content hash and the toolkit version.

Exit codes: 0 success, 1 validation error, 2 numeric failure; errors go to
stderr as a single JSON object.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .errors import (BranchJump, EigensolveFailure, GridshapeError,
                     NonFiniteState, NotSettled)
from .netmodel import (NetworkCase, load_case, proportional_variant,
                       representative_params, case_spectrum)
from .dynamics import (ControllerSpec, full_system_ss, modal_step_response,
                       steady_state_omega, step_response)
from .locus import default_gain_grid, geometry_for, locus_export, trace_locus
from .stability import (StabilityRegion, analysis_report, fit_envelope,
                        fs_beats_vi, fs_convergence_rate, vi_rate_bound)
from .tuning import (TuningTargets, achievable_frontier, delta_omega_from_mhz,
                     frontier_payload, frontier_project, tuning_report,
                     vi_mv_min)
from .serialize import dump_json

NUMERIC_ERRORS = (EigensolveFailure, NonFiniteState, BranchJump, NotSettled)


def _parse_u0(text: str, n: int) -> np.ndarray:
    vals = [float(x) for x in text.split(",") if x.strip() != ""]
    if len(vals) != n:
        raise ValueError(f"u0 has {len(vals)} entries, case has {n} buses")
    return np.array(vals)


def _parse_dwd(text: str, f0: float) -> float:
    """Allowed COI deviation: plain pu, or '200mHz' / '0.2Hz' on f0."""
    t = text.strip()
    if t.lower().endswith("mhz"):
        return delta_omega_from_mhz(float(t[:-3]), f0)
    if t.lower().endswith("hz"):
        return float(t[:-2]) / f0
    return float(t)


def _controller_from_args(args, params) -> ControllerSpec:
    kind = args.controller
    if kind == "none":
        return ControllerSpec("none")
    if kind == "fs":
        return ControllerSpec("fs", d_b=args.db)
    m_v = args.mv if args.mv is not None else vi_mv_min(params, args.db)
    return ControllerSpec("vi", d_b=args.db, m_v=m_v)


def _write(out_dir: Path, name: str, text: str) -> Path:
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / name
    path.write_text(text)
    return path


def _report_meta(case: NetworkCase) -> dict:
    return {"case_hash": case.content_hash(), "toolkit_version": __version__}


def cmd_analyze(args) -> int:
    case = load_case(args.case)
    rep = representative_params(case)
    spectrum = case_spectrum(case, rep)
    spec = _controller_from_args(args, rep)
    region = None
    if args.alpha is not None:
        if args.cospsi is not None:
            region = StabilityRegion.from_cos(args.alpha, args.cospsi)
        elif args.psi_deg is not None:
            region = StabilityRegion(args.alpha, math.radians(args.psi_deg))
        else:
            raise ValueError("--alpha needs --cospsi or --psi-deg")
    report = analysis_report(spec, rep, spectrum, region)
    report.update(_report_meta(case))
    report["lambda"] = spectrum.lam
    path = _write(Path(args.out), f"analyze_{case.content_hash()}.json",
                  dump_json(report))
    print(f"analyze: min damping {report['min_damping']:.4g}, "
          f"min decay {report['min_decay']:.4g} 1/s"
          + (f", region pass: {report['pass']}" if region else ""))
    print(f"wrote {path}")
    return 0


def cmd_tune(args) -> int:
    case = load_case(args.case)
    rep = representative_params(case)
    spectrum = case_spectrum(case, rep)
    targets = TuningTargets(
        cos_psi_d=args.cospsi, alpha_d=args.alpha,
        delta_p=args.dp,
        delta_omega_d=(_parse_dwd(args.dwd, case.f0) if args.dwd
                       else math.inf))
    report = tuning_report(rep, spectrum, targets,
                           coi_override=args.coi_override,
                           with_frontier=args.frontier)
    report.update(_report_meta(case))
    path = _write(Path(args.out), f"tune_{case.content_hash()}.json",
                  dump_json(report))
    print(f"tune: d_b = {report['d_b']:.4g} pu "
          f"(osc {report['d_b_osc']:.4g}, coi {report['d_b_coi']:.4g}), "
          f"regime {report['regime']}, m_v_min {report['m_v_min']:.4g} s")
    print(f"wrote {path}")
    return 0


def cmd_locus(args) -> int:
    case = load_case(args.case)
    rep = representative_params(case)
    spectrum = case_spectrum(case, rep)
    spec = _controller_from_args(args, rep)
    geometry = geometry_for(spec, rep)
    grid = default_gain_grid(geometry, spectrum.lambda2, spectrum.lambda_n,
                             n_points=args.points)
    branches = trace_locus(spec, rep, grid)
    payload = locus_export(spec, rep, branches,
                           mode_gains=spectrum.mode_gains())
    payload.update(_report_meta(case))
    payload["controller"] = {"kind": spec.kind, "d_b": spec.d_b,
                             "m_v": spec.m_v}
    path = _write(Path(args.out),
                  f"locus_{spec.kind}_{case.content_hash()}.json",
                  dump_json(payload))
    print(f"locus: {len(branches)} branches x {grid.size} gains, "
          f"sigma_a = {geometry.sigma_a:.4g}")
    print(f"wrote {path}")
    return 0


def cmd_frontier(args) -> int:
    case = load_case(args.case)
    rep = representative_params(case)
    spectrum = case_spectrum(case, rep)
    fr = achievable_frontier(rep, spectrum, n_points=args.points)
    payload = frontier_payload(fr)
    payload.update(_report_meta(case))
    path = _write(Path(args.out), f"frontier_{case.content_hash()}.json",
                  dump_json(payload))
    print(f"frontier: {len(fr)} points, max decay "
          f"{fr.alpha_max:.4g} 1/s at knee cos_psi = {fr.cos_knee:.4g}")
    print(f"wrote {path}")
    return 0


def _simulate_one(case, rep, spectrum, spec, u0, args, mode: str):
    if mode == "modal":
        return modal_step_response(spec, rep, spectrum, u0,
                                   t_end=args.t_end, dt=args.dt,
                                   onset=args.onset)
    sim_case = case if args.heterogeneous else proportional_variant(case, rep)
    sys_ss = full_system_ss(sim_case, spec, rep)
    return step_response(sys_ss, u0, t_end=args.t_end, dt=args.dt,
                         onset=args.onset)


def cmd_simulate(args) -> int:
    case = load_case(args.case)
    rep = representative_params(case)
    spectrum = case_spectrum(case, rep)
    spec = _controller_from_args(args, rep)
    u0 = _parse_u0(args.u0, case.n)
    modes = ["modal", "direct"] if args.mode == "both" else [args.mode]
    if args.heterogeneous and args.mode == "modal":
        modes = ["direct"]
    formats = [f.strip() for f in args.formats.split(",")]
    out_dir = Path(args.out)
    for mode in modes:
        resp = _simulate_one(case, rep, spectrum, spec, u0, args, mode)
        stem = f"simulate_{spec.kind}_{mode}_{case.content_hash()}"
        if "csv" in formats:
            print(f"wrote {_write(out_dir, stem + '.csv', resp.to_csv())}")
        if "json" in formats:
            payload = resp.to_dict()
            payload["meta"] = {**_report_meta(case), "mode": mode,
                               "heterogeneous": bool(args.heterogeneous),
                               "controller": {"kind": spec.kind,
                                              "d_b": spec.d_b,
                                              "m_v": spec.m_v}}
            path = _write(out_dir, stem + ".json", dump_json(payload))
            print(f"wrote {path}")
    return 0


def cmd_compare(args) -> int:
    case = load_case(args.case)
    rep = representative_params(case)
    spectrum = case_spectrum(case, rep)
    u0 = _parse_u0(args.u0, case.n)
    m_v = args.mv if args.mv is not None else vi_mv_min(rep, args.db)
    fs_spec = ControllerSpec("fs", d_b=args.db)
    vi_spec = ControllerSpec("vi", d_b=args.db, m_v=m_v)
    sim_case = case if args.heterogeneous else proportional_variant(case, rep)

    out = {"controllers": {"d_b": args.db, "m_v": m_v},
           **_report_meta(case)}
    rates = {}
    out_dir = Path(args.out)
    for name, spec in (("fs", fs_spec), ("vi", vi_spec)):
        sys_ss = full_system_ss(sim_case, spec, rep)
        resp = step_response(sys_ss, u0, t_end=args.t_end, dt=args.dt,
                             onset=args.onset)
        steady = steady_state_omega(sim_case, spec, u0, rep)
        fit = fit_envelope(resp, np.full(case.n, steady))
        rates[name] = fit.rate
        out[name] = {"steady_state": steady,
                     "envelope": {"rate": fit.rate,
                                  "amplitude": fit.amplitude,
                                  "residual": fit.residual}}
        path = _write(out_dir, f"compare_{name}_{case.content_hash()}.csv",
                      resp.to_csv())
        print(f"wrote {path}")
    cmp_res = fs_beats_vi(rep, args.db, m_v)
    bound = vi_rate_bound(rep, args.db, m_v)
    out["fs"]["rate_floor"] = fs_convergence_rate(
        rep, args.db, spectrum.lambda2).system_rate
    out["vi"]["rate_bound"] = bound.omega_n
    out["rate_comparison"] = {"lhs": cmp_res.lhs, "holds": cmp_res.holds,
                              "margin": cmp_res.margin}
    out["faster"] = "fs" if rates["fs"] > rates["vi"] else "vi"
    path = _write(out_dir, f"compare_{case.content_hash()}.json",
                  dump_json(out))
    print(f"compare: fs rate {rates['fs']:.4g} vs vi rate {rates['vi']:.4g} "
          f"1/s; faster = {out['faster']}")
    print(f"wrote {path}")
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app
    app = create_app(args.store, cors_origins=args.cors)
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="gridshape", description=__doc__)
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    def add_common(sp, controller=True):
        sp.add_argument("--case", required=True, help="case JSON file")
        sp.add_argument("--out", default="out", help="artifact directory")
        if controller:
            sp.add_argument("--controller", choices=["fs", "vi", "none"],
                            default="none")
            sp.add_argument("--db", type=float, default=0.0,
                            help="inverter inverse droop d_b (pu)")
            sp.add_argument("--mv", type=float, default=None,
                            help="virtual inertia m_v (s); defaults to the "
                                 "Nadir-elimination minimum for vi")

    sp = sub.add_parser("analyze", help="per-mode poles, damping, decay")
    add_common(sp)
    sp.add_argument("--alpha", type=float, default=None,
                    help="region decay requirement (1/s)")
    sp.add_argument("--cospsi", type=float, default=None,
                    help="region damping-ratio requirement")
    sp.add_argument("--psi-deg", type=float, default=None,
                    help="region half-angle (degrees)")
    sp.set_defaults(func=cmd_analyze)

    sp = sub.add_parser("tune", help="droop tuning for targets")
    add_common(sp, controller=False)
    sp.add_argument("--cospsi", type=float, required=True)
    sp.add_argument("--alpha", type=float, required=True)
    sp.add_argument("--dp", type=float, default=0.0,
                    help="max net power imbalance (pu)")
    sp.add_argument("--dwd", default=None,
                    help="allowed COI deviation: pu, '0.2Hz', or '200mHz'")
    sp.add_argument("--coi-override", type=float, default=None,
                    help="replace the computed security droop (pu)")
    sp.add_argument("--frontier", action="store_true",
                    help="embed the achievable frontier in the report")
    sp.set_defaults(func=cmd_tune)

    sp = sub.add_parser("locus", help="trace the root locus")
    add_common(sp)
    sp.add_argument("--points", type=int, default=400)
    sp.set_defaults(func=cmd_locus)

    sp = sub.add_parser("frontier", help="achievable damping/decay frontier")
    add_common(sp, controller=False)
    sp.add_argument("--points", type=int, default=256)
    sp.set_defaults(func=cmd_frontier)

    sp = sub.add_parser("simulate", help="step-response simulation")
    add_common(sp)
    sp.add_argument("--u0", required=True,
                    help="disturbance vector, comma-separated pu")
    sp.add_argument("--t-end", type=float, default=40.0)
    sp.add_argument("--dt", type=float, default=0.01)
    sp.add_argument("--onset", type=float, default=1.0,
                    help="disturbance onset time (s)")
    sp.add_argument("--mode", choices=["modal", "direct", "both"],
                    default="modal")
    sp.add_argument("--heterogeneous", action="store_true",
                    help="simulate the case as-is (direct route); default "
                         "uses the proportional companion")
    sp.add_argument("--formats", default="json,csv")
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("compare", help="paired FS-vs-VI simulation")
    add_common(sp, controller=False)
    sp.add_argument("--db", type=float, required=True)
    sp.add_argument("--mv", type=float, default=None)
    sp.add_argument("--u0", required=True)
    sp.add_argument("--t-end", type=float, default=120.0)
    sp.add_argument("--dt", type=float, default=0.02)
    sp.add_argument("--onset", type=float, default=1.0)
    sp.add_argument("--heterogeneous", action="store_true")
    sp.set_defaults(func=cmd_compare)

    sp = sub.add_parser("serve", help="run the HTTP service")
    sp.add_argument("--port", type=int, default=8422)
    sp.add_argument("--host", default="127.0.0.1")
    sp.add_argument("--store", default="cases_store",
                    help="directory for uploaded cases")
    sp.add_argument("--cors", default=None, help="allowed UI origin")
    sp.set_defaults(func=cmd_serve)
    return p


def _fold_u0(argv: list[str]) -> list[str]:
    """Merge '--u0 -0.2,0,0' into '--u0=-0.2,0,0' so argparse does not
    mistake a leading minus sign for an option."""
    out, i = [], 0
    while i < len(argv):
        if argv[i] == "--u0" and i + 1 < len(argv):
            out.append(f"--u0={argv[i + 1]}")
            i += 2
        else:
            out.append(argv[i])
            i += 1
    return out


def main(argv=None) -> int:
    if argv is None:
        argv = sys.argv[1:]
    args = build_parser().parse_args(_fold_u0(list(argv)))
    try:
        return args.func(args)
    except NUMERIC_ERRORS as exc:
        print(json.dumps({"error": {"code": exc.code, "message": str(exc)}}),
              file=sys.stderr)
        return 2
    except GridshapeError as exc:
        print(json.dumps({"error": {"code": exc.code, "message": str(exc)}}),
              file=sys.stderr)
        return 1
    except (ValueError, OSError, json.JSONDecodeError) as exc:
        print(json.dumps({"error": {"code": "validation_error",
                                    "message": str(exc)}}), file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
