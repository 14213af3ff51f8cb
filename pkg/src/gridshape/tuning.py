"""Controller gain tuning for frequency-security and oscillatory-stability
targets, plus the achievable damping/decay frontier.

The oscillation droop comes from inverting the closed-form minimum damping
and decay expressions; the frequency-security droop from inverting the COI
steady-state formula. The final inverse droop is the max of the two, with
regime checks that keep the closed forms valid (linear window, or the
relaxed window where the slow Fiedler root still meets the decay target).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator, Literal, Sequence

from .errors import CoiDroopExceedsRelaxedBound, InfeasibleDecayTarget
from .netmodel import RepresentativeParams, ScaledSpectrum
from .dynamics import nadir_min_inertia
from .stability import fs_min_damping, fs_min_decay

Regime = Literal["linear_both", "relaxed_coi", "saturated_damping",
                 "infeasible"]

_RTOL = 1e-12


@dataclass(frozen=True)
class TuningTargets:
    """Desired performance: damping ratio, decay rate, and the COI budget."""

    cos_psi_d: float          # minimum damping ratio, (0, 1]
    alpha_d: float            # minimum decay rate (1/s)
    delta_p: float = 0.0      # max net power imbalance (pu)
    delta_omega_d: float = math.inf   # allowed COI deviation (pu)

    def __post_init__(self):
        if not 0 < self.cos_psi_d <= 1:
            raise ValueError("cos_psi_d must lie in (0, 1]")
        if not self.alpha_d > 0:
            raise ValueError("alpha_d must be > 0")
        if self.delta_p < 0:
            raise ValueError("delta_p must be >= 0")
        if not self.delta_omega_d > 0:
            raise ValueError("delta_omega_d must be > 0")


def delta_omega_from_mhz(mhz: float, f0: float) -> float:
    """Convert an allowed deviation in mHz to per-unit on f0."""
    return mhz / 1000.0 / f0


def _lams(spectrum: ScaledSpectrum | Sequence[float]) -> tuple[float, float]:
    if isinstance(spectrum, ScaledSpectrum):
        return spectrum.lambda2, spectrum.lambda_n
    lam2, lam_n = spectrum
    return float(lam2), float(lam_n)


def tune_db_osc_terms(params: RepresentativeParams, lambda_n: float,
                      targets: TuningTargets) -> tuple[float, float]:
    """The two droop compensations: damping-driven and decay-driven."""
    damping_term = (2.0 * math.sqrt(lambda_n * params.m) * targets.cos_psi_d
                    - params.d - params.d_t)
    decay_term = 2.0 * params.m * targets.alpha_d - params.d - params.d_t
    return damping_term, decay_term


def tune_db_osc(params: RepresentativeParams,
                spectrum: ScaledSpectrum | Sequence[float],
                targets: TuningTargets) -> float:
    """Minimum inverse droop for the oscillatory-stability targets:
    max(0, damping term, decay term).

    Raises InfeasibleDecayTarget when the decay target is at or beyond
    sqrt(lambda_2/m), the largest decay rate any droop can achieve.
    """
    lam2, lam_n = _lams(spectrum)
    alpha_cap = math.sqrt(lam2 / params.m)
    if targets.alpha_d >= alpha_cap:
        raise InfeasibleDecayTarget(
            f"decay target {targets.alpha_d:.4g} 1/s reaches the achievable "
            f"cap sqrt(lambda_2/m) = {alpha_cap:.4g} 1/s",
            bound_value=alpha_cap)
    damping_term, decay_term = tune_db_osc_terms(params, lam_n, targets)
    return max(0.0, damping_term, decay_term)


def tune_db_coi(params: RepresentativeParams,
                targets: TuningTargets) -> float:
    """Minimum inverse droop keeping the COI within +-delta_omega_d:
    max(0, delta_p / (sum(r) delta_omega_d) - d - d_t)."""
    if not math.isfinite(targets.delta_omega_d) or targets.delta_p == 0.0:
        return 0.0
    need = targets.delta_p / (params.r_sum * targets.delta_omega_d)
    return max(0.0, need - params.d - params.d_t)


@dataclass(frozen=True)
class AchievedMetrics:
    cos_psi_bar: float
    alpha_bar: float


@dataclass(frozen=True)
class TuningResult:
    d_b_osc: float
    d_b_coi: float
    d_b: float
    regime: Regime
    achieved: AchievedMetrics
    m_v_min: float
    osc_terms: tuple[float, float]   # (damping-driven, decay-driven)


def vi_mv_min(params: RepresentativeParams, d_b: float) -> float:
    """Smallest virtual inertia with no COI Nadir at the given droop:
    tau (sqrt(d_t) + sqrt(d + d_t + d_b))^2 - m."""
    if d_b < 0:
        raise ValueError("d_b must be >= 0")
    return nadir_min_inertia(params.m, params.d, params.d_t, params.tau, d_b)


def tune_db(params: RepresentativeParams,
            spectrum: ScaledSpectrum | Sequence[float],
            targets: TuningTargets,
            coi_override: float | None = None) -> TuningResult:
    """Full droop tuning: d_b = max(d_b_coi, d_b_osc) with regime checks.

    ``coi_override`` replaces the computed frequency-security droop (set 0
    to accept the existing COI response by inspection). Raises
    InfeasibleDecayTarget when no droop can meet alpha_d, and
    CoiDroopExceedsRelaxedBound when the security droop leaves even the
    relaxed window (m alpha_d^2 + lambda_2)/alpha_d - d - d_t in which the
    slow Fiedler root still satisfies the decay target.
    """
    lam2, lam_n = _lams(spectrum)
    d_b_osc = tune_db_osc(params, spectrum, targets)
    terms = tune_db_osc_terms(params, lam_n, targets)
    d_b_coi = (float(coi_override) if coi_override is not None
               else tune_db_coi(params, targets))
    if d_b_coi < 0:
        raise ValueError("coi_override must be >= 0")

    lin_limit = (2.0 * math.sqrt(lam2 * params.m) - params.d - params.d_t)
    relax_limit = ((params.m * targets.alpha_d ** 2 + lam2) / targets.alpha_d
                   - params.d - params.d_t)
    if d_b_coi > relax_limit * (1 + _RTOL):
        raise CoiDroopExceedsRelaxedBound(
            f"COI droop {d_b_coi:.4g} pu exceeds the relaxed bound "
            f"{relax_limit:.4g} pu; the decay target {targets.alpha_d:.4g} "
            "1/s cannot survive it", bound_value=relax_limit)

    d_b = max(d_b_coi, d_b_osc)
    achieved = AchievedMetrics(
        cos_psi_bar=fs_min_damping(params, d_b, lam_n),
        alpha_bar=fs_min_decay(params, d_b, lam2))
    if achieved.alpha_bar < targets.alpha_d * (1 - 1e-9):
        raise InfeasibleDecayTarget(
            f"droop {d_b:.4g} pu required by the other targets drives the "
            f"achieved decay {achieved.alpha_bar:.4g} below the target "
            f"{targets.alpha_d:.4g}", bound_value=achieved.alpha_bar)

    sat_limit = (2.0 * math.sqrt(lam_n * params.m) - params.d - params.d_t)
    if d_b >= sat_limit:
        regime: Regime = "saturated_damping"
    elif d_b_osc < lin_limit and d_b_coi < lin_limit:
        regime = "linear_both"
    else:
        regime = "relaxed_coi"
    return TuningResult(
        d_b_osc=d_b_osc, d_b_coi=d_b_coi, d_b=d_b, regime=regime,
        achieved=achieved, m_v_min=vi_mv_min(params, d_b), osc_terms=terms)


@dataclass(frozen=True)
class FrontierPoint:
    cos_psi: float
    alpha: float
    d_b: float
    segment: Literal["linear", "curved", "vertical"]


@dataclass(frozen=True)
class Frontier:
    """Achievable (damping ratio, decay rate) pairs and the droop for each.

    Behaves as a sequence of FrontierPoint; also carries the generating
    constants so projection can work with the exact curve rather than the
    sampled polyline.
    """

    points: tuple[FrontierPoint, ...]
    m: float
    d: float
    d_t: float
    lambda2: float
    lambda_n: float

    def __iter__(self) -> Iterator[FrontierPoint]:
        return iter(self.points)

    def __len__(self) -> int:
        return len(self.points)

    def __getitem__(self, i):
        return self.points[i]

    @property
    def cos_at_zero_droop(self) -> float:
        return (self.d + self.d_t) / (2.0 * math.sqrt(self.lambda_n * self.m))

    @property
    def cos_knee(self) -> float:
        return math.sqrt(self.lambda2 / self.lambda_n)

    @property
    def alpha_max(self) -> float:
        """Largest achievable decay rate, sqrt(lambda_2/m), at the knee."""
        return math.sqrt(self.lambda2 / self.m)

    @property
    def alpha_vertical(self) -> float:
        """Decay rate where the curve meets cos = 1:
        sqrt(lambda_n/m) - sqrt((lambda_n - lambda_2)/m)."""
        return (math.sqrt(self.lambda_n / self.m)
                - math.sqrt((self.lambda_n - self.lambda2) / self.m))

    def _alpha_branch2(self, c: float) -> float:
        m, lam2, lam_n = self.m, self.lambda2, self.lambda_n
        return (math.sqrt(lam_n / m) * c
                - math.sqrt(max(lam_n * c * c / m - lam2 / m, 0.0)))

    def _db_linear(self, c: float) -> float:
        return max(0.0, 2.0 * math.sqrt(self.lambda_n * self.m) * c
                   - self.d - self.d_t)

    def _db_vertical(self, alpha: float) -> float:
        return ((self.m * alpha * alpha + self.lambda2) / alpha
                - self.d - self.d_t)


def achievable_frontier(params: RepresentativeParams,
                        spectrum: ScaledSpectrum | Sequence[float],
                        n_points: int = 256) -> Frontier:
    """All achievable (cos_psi, alpha) combinations under droop shaping.

    Linear segment: alpha = sqrt(lambda_n/m) cos_psi up to the knee at
    cos_psi = sqrt(lambda_2/lambda_n); curved segment beyond the knee where
    the slow Fiedler root governs; vertical segment at cos_psi = 1 where
    extra droop only trades decay away. Points are cosine-clustered toward
    the knee; the vertical tail is sampled down to a tenth of its top decay
    (the droop diverges as alpha -> 0).
    """
    lam2, lam_n = _lams(spectrum)
    fr = Frontier(points=(), m=params.m, d=params.d, d_t=params.d_t,
                  lambda2=lam2, lambda_n=lam_n)
    pts: list[FrontierPoint] = []
    c0, c_knee = fr.cos_at_zero_droop, fr.cos_knee
    slope = math.sqrt(lam_n / params.m)

    if c0 < c_knee:
        for i in range(n_points):
            u = i / (n_points - 1)
            c = c0 + (c_knee - c0) * math.sin(u * math.pi / 2.0)
            pts.append(FrontierPoint(cos_psi=c, alpha=slope * c,
                                     d_b=fr._db_linear(c), segment="linear"))
    start2 = max(c_knee, min(c0, 1.0))
    if start2 < 1.0:
        for i in range(1, n_points + 1):
            u = i / (n_points + 1)
            c = start2 + (1.0 - start2) * (1.0 - math.cos(u * math.pi / 2.0))
            pts.append(FrontierPoint(cos_psi=c, alpha=fr._alpha_branch2(c),
                                     d_b=fr._db_linear(c), segment="curved"))
    a_top = fr.alpha_vertical
    if a_top > 0:
        n_vert = max(2, n_points // 4)
        for i in range(n_vert):
            a = a_top * (0.1 ** (i / (n_vert - 1)))
            pts.append(FrontierPoint(cos_psi=1.0, alpha=a,
                                     d_b=fr._db_vertical(a),
                                     segment="vertical"))
    return Frontier(points=tuple(pts), m=params.m, d=params.d, d_t=params.d_t,
                    lambda2=lam2, lambda_n=lam_n)


def frontier_project(targets: TuningTargets,
                     frontier: Frontier) -> FrontierPoint | None:
    """Cheapest frontier point dominating the target component-wise.

    Works on the exact curve (droop is monotone along it, so the first
    dominating point along the path has minimal d_b). Returns None when the
    target lies beyond the frontier.
    """
    fr = frontier
    cos_d, a_d = targets.cos_psi_d, targets.alpha_d
    if a_d > fr.alpha_max * (1 + _RTOL):
        return None
    c0, c_knee = fr.cos_at_zero_droop, fr.cos_knee
    slope = math.sqrt(fr.lambda_n / fr.m)

    if c0 >= 1.0:
        # Fully saturated at zero droop: only (1, alpha(d_b)) is reachable.
        alpha0 = fr._alpha_branch2(c0)
        if a_d <= alpha0 * (1 + _RTOL):
            return FrontierPoint(cos_psi=1.0, alpha=alpha0, d_b=0.0,
                                 segment="vertical")
        return None

    c_star = max(cos_d, a_d / slope, c0)
    if c_star <= c_knee * (1 + _RTOL):
        c_star = min(c_star, c_knee)
        return FrontierPoint(cos_psi=c_star, alpha=slope * c_star,
                             d_b=fr._db_linear(c_star), segment="linear")
    if cos_d < 1.0:
        c_req = max(cos_d, c0)
        alpha_here = fr._alpha_branch2(c_req)
        if alpha_here >= a_d * (1 - _RTOL):
            return FrontierPoint(cos_psi=c_req, alpha=alpha_here,
                                 d_b=fr._db_linear(c_req), segment="curved")
        return None
    # cos_d == 1: junction with the vertical segment is the cheapest point.
    a_top = fr.alpha_vertical
    if a_d <= a_top * (1 + _RTOL):
        return FrontierPoint(cos_psi=1.0, alpha=a_top,
                             d_b=fr._db_vertical(a_top), segment="vertical")
    return None


def tuning_report(params: RepresentativeParams,
                  spectrum: ScaledSpectrum | Sequence[float],
                  targets: TuningTargets,
                  coi_override: float | None = None,
                  with_frontier: bool = False) -> dict:
    """JSON-ready tuning report; raises the tuning errors unmodified."""
    lam2, lam_n = _lams(spectrum)
    result = tune_db(params, spectrum, targets, coi_override=coi_override)
    out = {
        "inputs": {
            "targets": {"cos_psi_d": targets.cos_psi_d,
                        "alpha_d": targets.alpha_d,
                        "delta_p": targets.delta_p,
                        "delta_omega_d": (None if not math.isfinite(
                            targets.delta_omega_d)
                            else targets.delta_omega_d)},
            "coi_override": coi_override,
            "params": {"m": params.m, "d": params.d, "d_t": params.d_t,
                       "tau": params.tau, "r_sum": params.r_sum},
            "lambda2": lam2, "lambda_n": lam_n,
        },
        "d_b_osc": result.d_b_osc,
        "d_b_osc_terms": {"damping": result.osc_terms[0],
                          "decay": result.osc_terms[1]},
        "d_b_coi": result.d_b_coi,
        "d_b": result.d_b,
        "regime": result.regime,
        "achieved": {"cos_psi_bar": result.achieved.cos_psi_bar,
                     "alpha_bar": result.achieved.alpha_bar},
        "m_v_min": result.m_v_min,
    }
    if with_frontier:
        fr = achievable_frontier(params, spectrum)
        out["frontier"] = frontier_payload(fr)
    return out


def frontier_payload(frontier: Frontier) -> dict:
    return {
        "points": [{"cos_psi": p.cos_psi, "alpha": p.alpha, "d_b": p.d_b,
                    "segment": p.segment} for p in frontier],
        "alpha_max": frontier.alpha_max,
        "cos_knee": frontier.cos_knee,
        "alpha_vertical": frontier.alpha_vertical,
        "cos_at_zero_droop": frontier.cos_at_zero_droop,
    }
