"""Oscillatory-stability metrics: per-mode pole analysis, closed-form minima,
region membership, convergence-rate bounds, and envelope fitting.

Damping ratio is pole-specific: -Re(s)/|s|, which is exactly 1 for a real
negative pole. Poles numerically at the origin are excluded from the
damping-ratio computation (the angle is undefined there); such modes fail
any region with a positive decay requirement regardless.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import NadirConditionViolated, NotSettled
from .dynamics import (ControllerSpec, RepresentativeParams, StepResponse,
                       mode_subsystem, nadir_min_inertia, vi_natural_params)
from .netmodel import ScaledSpectrum

# Relative slack used by region membership so closed-form-equal designs pass.
REGION_RTOL = 1e-9
ORIGIN_POLE_RTOL = 1e-10


@dataclass(frozen=True)
class StabilityRegion:
    """Half-plane plus wedge: decay >= alpha and damping >= cos(psi)."""

    alpha: float
    psi: float     # rad, in [0, pi/2)

    def __post_init__(self):
        if not self.alpha > 0:
            raise ValueError("alpha must be > 0")
        if not 0 <= self.psi < math.pi / 2:
            raise ValueError("psi must lie in [0, pi/2)")

    @classmethod
    def from_cos(cls, alpha: float, cos_psi: float) -> "StabilityRegion":
        if not 0 < cos_psi <= 1:
            raise ValueError("cos_psi must lie in (0, 1]")
        return cls(alpha=alpha, psi=math.acos(min(cos_psi, 1.0)))

    @property
    def cos_psi(self) -> float:
        return math.cos(self.psi)

    def contains(self, s: complex, rtol: float = REGION_RTOL) -> bool:
        mag = abs(s)
        if mag <= ORIGIN_POLE_RTOL:
            return False
        decay_ok = -s.real >= self.alpha * (1.0 - rtol)
        damping_ok = -s.real / mag >= self.cos_psi * (1.0 - rtol)
        return decay_ok and damping_ok


def pole_damping(s: complex) -> float:
    """Pole-specific damping ratio -Re(s)/|s| (1 for real negative poles)."""
    return -s.real / abs(s)


@dataclass(frozen=True)
class ModeRecord:
    k: int                 # mode index, 2-based like the eigenvalue ordering
    lam: float
    poles: tuple[complex, ...]
    damping: float
    decay: float


@dataclass(frozen=True)
class ModeAnalysis:
    """Numeric pole analysis of every oscillatory mode (k >= 2)."""

    per_mode: tuple[ModeRecord, ...]
    min_damping: float
    min_decay: float
    argmin_damping_mode: int
    argmin_decay_mode: int


def analyze_modes(spec: ControllerSpec, params: RepresentativeParams,
                  spectrum: ScaledSpectrum | np.ndarray) -> ModeAnalysis:
    """Brute-force oracle: poles, damping, and decay of each mode k >= 2.

    Ties in the minima are resolved the way the closed forms predict them:
    the damping argmin takes the largest tied k (the top eigenvalue), the
    decay argmin the smallest (the Fiedler eigenvalue).
    """
    gains = (spectrum.mode_gains() if isinstance(spectrum, ScaledSpectrum)
             else np.asarray(spectrum, dtype=float))
    records = []
    for idx, lam in enumerate(gains):
        tf = mode_subsystem(spec, params, float(lam))
        poles = tuple(complex(p) for p in tf.poles())
        scale = max(abs(p) for p in poles) or 1.0
        usable = [p for p in poles if abs(p) > ORIGIN_POLE_RTOL * scale]
        damping = min((pole_damping(p) for p in usable), default=0.0)
        decay = min(-p.real for p in poles)
        records.append(ModeRecord(k=idx + 2, lam=float(lam), poles=poles,
                                  damping=damping, decay=decay))
    dampings = np.array([r.damping for r in records])
    decays = np.array([r.decay for r in records])
    dmin, amin = float(dampings.min()), float(decays.min())
    damp_ties = np.flatnonzero(dampings <= dmin * (1 + 1e-12))
    decay_ties = np.flatnonzero(decays <= amin + abs(amin) * 1e-12)
    return ModeAnalysis(
        per_mode=tuple(records),
        min_damping=dmin,
        min_decay=amin,
        argmin_damping_mode=records[damp_ties[-1]].k,
        argmin_decay_mode=records[decay_ties[0]].k,
    )


def fs_min_damping(params: RepresentativeParams, d_b: float,
                   lambda_n: float) -> float:
    """Closed-form minimum damping ratio over all oscillatory modes.

    (d+d_b+d_t) / (2 sqrt(lambda_n m)) until the droop saturates the top
    mode onto the real axis, then exactly 1.
    """
    if not lambda_n > 0:
        raise ValueError("lambda_n must be > 0")
    dd = params.d + d_b + params.d_t
    if d_b < 2.0 * math.sqrt(lambda_n * params.m) - params.d - params.d_t:
        return dd / (2.0 * math.sqrt(lambda_n * params.m))
    return 1.0


def fs_min_decay(params: RepresentativeParams, d_b: float,
                 lambda_2: float) -> float:
    """Closed-form minimum decay rate over all oscillatory modes.

    (d+d_b+d_t)/(2m) while the Fiedler mode sits on the asymptotes; past
    that droop the slow real root of the Fiedler quadratic governs.
    """
    if not lambda_2 > 0:
        raise ValueError("lambda_2 must be > 0")
    dd = params.d + d_b + params.d_t
    m = params.m
    if d_b <= 2.0 * math.sqrt(lambda_2 * m) - params.d - params.d_t:
        return dd / (2.0 * m)
    return (dd - math.sqrt(dd * dd - 4.0 * lambda_2 * m)) / (2.0 * m)


@dataclass(frozen=True)
class ModeRegionResult:
    k: int
    passes: bool
    damping: float
    decay: float


@dataclass(frozen=True)
class RegionCheck:
    region: StabilityRegion
    per_mode: tuple[ModeRegionResult, ...]
    overall: bool


def check_alpha_psi(analysis: ModeAnalysis,
                    region: StabilityRegion) -> RegionCheck:
    """Region membership of every oscillatory mode; overall = all pass."""
    results = []
    for rec in analysis.per_mode:
        ok = all(region.contains(p) for p in rec.poles)
        results.append(ModeRegionResult(k=rec.k, passes=ok,
                                        damping=rec.damping, decay=rec.decay))
    return RegionCheck(region=region, per_mode=tuple(results),
                       overall=all(r.passes for r in results))


@dataclass(frozen=True)
class ConvergenceRates:
    coi_rate: float
    system_rate: float


def fs_convergence_rate(params: RepresentativeParams, d_b: float,
                        lambda_2: float) -> ConvergenceRates:
    """COI rate (d+d_b+d_t)/m and the slower system-wide rate; the COI always
    converges strictly faster than the oscillation envelope."""
    coi = (params.d + d_b + params.d_t) / params.m
    system = fs_min_decay(params, d_b, lambda_2)
    assert coi > system
    return ConvergenceRates(coi_rate=coi, system_rate=system)


@dataclass(frozen=True)
class ViRateBound:
    omega_n: float
    xi: float


def vi_rate_bound(params: RepresentativeParams, d_b: float,
                  m_v: float) -> ViRateBound:
    """Upper bound omega_n on the VI convergence rate (with damping factor xi).

    Requires Nadir-elimination tuning; below the critical inertia the bound
    does not apply and NadirConditionViolated is raised.
    """
    mv_min = nadir_min_inertia(params.m, params.d, params.d_t, params.tau,
                               d_b)
    if m_v < mv_min * (1.0 - 1e-12):
        raise NadirConditionViolated(m_v, mv_min)
    omega_n, xi = vi_natural_params(params, d_b, m_v)
    return ViRateBound(omega_n=omega_n, xi=xi)


@dataclass(frozen=True)
class RateComparison:
    lhs: float
    holds: bool
    margin: float


def fs_beats_vi(params: RepresentativeParams, d_b: float,
                m_v: float) -> RateComparison:
    """Does droop shaping converge faster than virtual inertia at equal d_b?

    True iff sqrt(d+d_b+d_t) * sqrt((m+m_v) tau) / m > 2, i.e. the linear FS
    rate (d+d_b+d_t)/(2m) exceeds the VI bound omega_n.
    """
    mv_min = nadir_min_inertia(params.m, params.d, params.d_t, params.tau,
                               d_b)
    if m_v < mv_min * (1.0 - 1e-12):
        raise NadirConditionViolated(m_v, mv_min)
    lhs = (math.sqrt(params.d + d_b + params.d_t)
           * math.sqrt((params.m + m_v) * params.tau) / params.m)
    return RateComparison(lhs=lhs, holds=lhs > 2.0, margin=lhs - 2.0)


@dataclass(frozen=True)
class EnvelopeFit:
    rate: float
    amplitude: float
    residual: float
    n_points: int = field(default=0)


def fit_envelope(resp: StepResponse, steady: np.ndarray,
                 rel_floor: float = 1e-9) -> EnvelopeFit:
    """Exponential envelope of ||omega(t) - steady|| after its peak.

    Log-linear least squares on the local maxima of the deviation norm over
    the tail window; using peaks rather than raw samples keeps oscillation
    troughs from biasing the slope. Samples below ``rel_floor`` of the peak
    deviation are treated as numerical noise and dropped. Raises NotSettled
    for zero deviation or responses that have not decayed below 1% of peak.
    """
    steady = np.atleast_1d(np.asarray(steady, dtype=float))
    dev = np.linalg.norm(resp.omega - steady[:, None], axis=0)
    peak = float(dev.max())
    if peak <= 0.0:
        raise NotSettled("deviation is identically zero; rate undefined")
    if dev[-1] >= 0.01 * peak:
        raise NotSettled(
            f"final deviation {dev[-1]:.3g} is >= 1% of peak {peak:.3g}; "
            "extend the horizon")
    i0 = int(np.argmax(dev))
    window = dev[i0:]
    tw = resp.t[i0:]
    floor = rel_floor * peak
    peaks = [0]
    for j in range(1, window.size - 1):
        if window[j] >= window[j - 1] and window[j] > window[j + 1] \
                and window[j] > floor:
            peaks.append(j)
    if len(peaks) < 3:
        keep = window > floor
        ts, ys = tw[keep], window[keep]
    else:
        ts, ys = tw[peaks], window[peaks]
    if ts.size < 2:
        raise NotSettled("not enough usable samples above the noise floor")
    coef = np.polyfit(ts, np.log(ys), 1)
    fitted = np.polyval(coef, ts)
    residual = float(np.sqrt(np.mean((np.log(ys) - fitted) ** 2)))
    return EnvelopeFit(rate=float(-coef[0]), amplitude=float(np.exp(coef[1])),
                       residual=residual, n_points=int(ts.size))


def analysis_report(spec: ControllerSpec, params: RepresentativeParams,
                    spectrum: ScaledSpectrum,
                    region: StabilityRegion | None = None) -> dict:
    """JSON-ready per-mode analysis with optional region verdicts."""
    analysis = analyze_modes(spec, params, spectrum)
    out = {
        "controller": {"kind": spec.kind, "d_b": spec.d_b, "m_v": spec.m_v},
        "per_mode": [
            {"k": r.k, "lambda_k": r.lam,
             "poles": [{"re": p.real, "im": p.imag} for p in r.poles],
             "damping": r.damping, "decay": r.decay}
            for r in analysis.per_mode
        ],
        "min_damping": analysis.min_damping,
        "min_decay": analysis.min_decay,
        "argmin_damping_mode": analysis.argmin_damping_mode,
        "argmin_decay_mode": analysis.argmin_decay_mode,
    }
    if region is not None:
        check = check_alpha_psi(analysis, region)
        out["region"] = {"alpha": region.alpha, "psi_deg":
                         math.degrees(region.psi), "cos_psi": region.cos_psi}
        out["per_mode_pass"] = [
            {"k": r.k, "passes": r.passes} for r in check.per_mode]
        out["pass"] = check.overall
    return out
