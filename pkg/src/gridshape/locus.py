"""Gain-parameterized root loci for the FS and VI loop families.

The loop gain is ``lam * z1(s) / s`` with the network eigenvalue playing the
role of the variable gain: closed-loop roots at gain ``lam_k`` are exactly
the poles of mode k. Geometry (open poles/zeros, asymptotes, break points)
comes from closed forms where available; roots along the gain sweep come
from a companion-matrix eigensolve with nearest-neighbor branch
continuation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import permutations

import numpy as np

from .errors import BranchJump, NadirConditionViolated
from .dynamics import (ControllerSpec, RepresentativeParams, _polyval,
                       nadir_min_inertia, vi_natural_params)

DEFAULT_GRID_POINTS = 400
DEFAULT_DENSIFY = 8
JUMP_FACTOR = 5.0


@dataclass(frozen=True)
class LocusGeometry:
    """Analytic skeleton of one locus family.

    ``num``/``den`` are the unit-gain loop polynomial coefficients
    (ascending), i.e. the characteristic equation is den(s) + lam*num(s) = 0.
    """

    open_poles: tuple[complex, ...]
    open_zeros: tuple[complex, ...]
    sigma_a: float
    asymptote_angles_deg: tuple[float, ...]
    break_points: tuple[float, ...]
    num: tuple[float, ...]
    den: tuple[float, ...]

    @property
    def n_asymptotes(self) -> int:
        return len(self.open_poles) - len(self.open_zeros)


@dataclass(frozen=True)
class LocusBranch:
    """One pole trajectory over an ascending gain grid."""

    branch_id: int
    gains: np.ndarray
    points: np.ndarray     # complex

    def __post_init__(self):
        g = np.asarray(self.gains, dtype=float).copy()
        p = np.asarray(self.points, dtype=complex).copy()
        g.flags.writeable = False
        p.flags.writeable = False
        object.__setattr__(self, "gains", g)
        object.__setattr__(self, "points", p)


def fs_locus_geometry(params: RepresentativeParams,
                      d_b: float) -> LocusGeometry:
    """Locus skeleton of the droop-shaped loop 1/(m s^2 + (d+d_b+d_t) s).

    Open poles 0 and -(d+d_b+d_t)/m, no finite zero, vertical asymptotes
    through the midpoint, which is also the unique break point.
    """
    dd = params.d + d_b + params.d_t
    m = params.m
    sigma_a = -dd / (2.0 * m)
    return LocusGeometry(
        open_poles=(0j, complex(-dd / m)),
        open_zeros=(),
        sigma_a=sigma_a,
        asymptote_angles_deg=(90.0, 270.0),
        break_points=(sigma_a,),
        num=(1.0,),
        den=(0.0, dd, m),
    )


def vi_locus_geometry(params: RepresentativeParams, d_b: float,
                      m_v: float) -> LocusGeometry:
    """Locus skeleton for virtual inertia under Nadir-elimination tuning.

    Zero at -1/tau; poles at the origin and at the roots of
    s^2 + 2 xi w_n s + w_n^2 (real for xi >= 1). Break points are found
    numerically on the real-axis segments since no closed form exists for
    this third-order family.
    """
    mv_min = nadir_min_inertia(params.m, params.d, params.d_t, params.tau,
                               d_b)
    if m_v < mv_min * (1.0 - 1e-12):
        raise NadirConditionViolated(m_v, mv_min)
    omega_n, xi = vi_natural_params(params, d_b, m_v)
    xi = max(xi, 1.0)      # equality case may round a hair below 1
    m_tot = params.m + m_v
    tau = params.tau
    dd = params.d + d_b + params.d_t
    root = omega_n * math.sqrt(xi * xi - 1.0)
    poles = (0j, complex(-xi * omega_n + root), complex(-xi * omega_n - root))
    sigma_a = 0.5 / tau - xi * omega_n
    num = (1.0, tau)
    den = (0.0, dd, m_tot + (params.d + d_b) * tau, m_tot * tau)
    return LocusGeometry(
        open_poles=poles,
        open_zeros=(complex(-1.0 / tau),),
        sigma_a=sigma_a,
        asymptote_angles_deg=(90.0, 270.0),
        break_points=tuple(_real_break_points(num, den)),
        num=num,
        den=den,
    )


def _real_break_points(num, den) -> list[float]:
    """Real roots of d(lam)/ds = 0 with lam(s) = -den(s)/num(s), lam > 0."""
    dden = np.polyder(np.asarray(den[::-1]))
    dnum = np.polyder(np.asarray(num[::-1]))
    expr = (np.polymul(dden, num[::-1]) - np.polymul(den[::-1], dnum))
    roots = np.roots(expr)
    scale = max(abs(r) for r in roots) if roots.size else 1.0
    out = []
    for s in roots:
        if abs(s.imag) > 1e-9 * max(scale, 1.0):
            continue
        x = float(s.real)
        nv = _polyval(num, x)
        if nv == 0:
            continue
        lam = -_polyval(den, x).real / nv.real
        if lam > 0:
            out.append(x)
    return sorted(set(round(x, 12) for x in out))


def gain_at_point(geometry: LocusGeometry, s: complex) -> float:
    """Gain placing a closed-loop pole at s: |den(s)| / |num(s)|.

    For the droop-shaped family this is m |s| |s + (d+d_b+d_t)/m|, the
    product of distances to the open-loop poles scaled by the inertia.
    """
    dv = _polyval(geometry.den, s)
    nv = _polyval(geometry.num, s)
    if abs(nv) == 0.0:
        raise ValueError("s is an open-loop zero; gain is unbounded")
    return abs(dv) / abs(nv)


def geometry_for(spec: ControllerSpec,
                 params: RepresentativeParams) -> LocusGeometry:
    if spec.kind == "fs":
        return fs_locus_geometry(params, spec.d_b)
    if spec.kind == "vi":
        return vi_locus_geometry(params, spec.d_b, spec.m_v)
    raise ValueError("root locus is defined for the fs and vi families only")


def default_gain_grid(geometry: LocusGeometry, lambda2: float,
                      lambda_n: float, n_points: int = DEFAULT_GRID_POINTS,
                      densify: int = DEFAULT_DENSIFY) -> np.ndarray:
    """Log-spaced gains over [lambda2/100, 100*lambda_n], densified by
    ``densify`` within +-20% of every break-point gain."""
    lo, hi = lambda2 / 100.0, 100.0 * lambda_n
    if not (lo > 0 and hi > lo):
        raise ValueError("need 0 < lambda2 <= lambda_n")
    grid = np.geomspace(lo, hi, n_points)
    extras = []
    step = (math.log(hi) - math.log(lo)) / (n_points - 1)
    for bp in geometry.break_points:
        g = gain_at_point(geometry, complex(bp))
        if g <= 0:
            continue
        wlo, whi = max(lo, 0.8 * g), min(hi, 1.2 * g)
        if whi <= wlo:
            continue
        count = max(2, int(round((math.log(whi) - math.log(wlo))
                                 / step * densify)))
        extras.append(np.geomspace(wlo, whi, count))
    if extras:
        grid = np.unique(np.concatenate([grid] + extras))
    return grid


def _closed_loop_roots(geometry: LocusGeometry, lam: float) -> np.ndarray:
    order = len(geometry.den) - 1
    coeffs = np.zeros(order + 1)
    coeffs[:len(geometry.den)] = geometry.den
    coeffs[:len(geometry.num)] += lam * np.asarray(geometry.num)
    return np.roots(coeffs[::-1])


def _match(prev: np.ndarray, new: np.ndarray) -> np.ndarray:
    """Order `new` to minimize total continuation distance from `prev`."""
    k = len(prev)
    best, best_cost = None, math.inf
    for perm in permutations(range(k)):
        cost = sum(abs(prev[i] - new[perm[i]]) for i in range(k))
        if cost < best_cost:
            best, best_cost = perm, cost
    return new[list(best)]


def trace_locus(spec: ControllerSpec, params: RepresentativeParams,
                lambda_grid: np.ndarray) -> list[LocusBranch]:
    """Trace all pole trajectories over an ascending positive gain grid.

    Roots at each gain come from a balanced companion eigensolve; they are
    assigned to branches by globally optimal nearest-neighbor matching from
    the previous gain. A continuation step larger than five times the median
    (relative to the local point magnitude) raises BranchJump: the grid is
    too coarse, typically near a break point.
    """
    grid = np.asarray(lambda_grid, dtype=float)
    if grid.size < 2 or not (np.diff(grid) > 0).all() or grid[0] <= 0:
        raise ValueError("lambda_grid must be ascending and positive")
    geometry = geometry_for(spec, params)
    n_branch = len(geometry.den) - 1
    points = np.zeros((n_branch, grid.size), dtype=complex)

    open_poles = np.asarray(geometry.open_poles)
    prev = _match(open_poles, _closed_loop_roots(geometry, grid[0]))
    points[:, 0] = prev
    moves = []
    scale0 = max(abs(p) for p in open_poles) or 1.0
    for j in range(1, grid.size):
        new = _match(prev, _closed_loop_roots(geometry, grid[j]))
        local = np.abs(prev) + np.abs(new) + 0.1 * scale0
        moves.append(float(np.max(np.abs(new - prev) / local)))
        points[:, j] = new
        prev = new
    med = float(np.median(moves)) if moves else 0.0
    worst = max(moves) if moves else 0.0
    if med > 0 and worst > JUMP_FACTOR * med and worst > 0.25:
        raise BranchJump(
            f"continuation step {worst:.3g} exceeds {JUMP_FACTOR} x median "
            f"{med:.3g}; refine the gain grid near break points")
    return [LocusBranch(branch_id=i, gains=grid, points=points[i])
            for i in range(n_branch)]


def locus_residual(geometry: LocusGeometry, s: complex, lam: float) -> float:
    """Scaled residual of the characteristic equation den(s)+lam*num(s)=0."""
    val = abs(_polyval(geometry.den, s) + lam * _polyval(geometry.num, s))
    mag = max(1.0, abs(s))
    scale = sum(abs(c) * mag ** i for i, c in enumerate(geometry.den))
    scale += lam * sum(abs(c) * mag ** i
                       for i, c in enumerate(geometry.num))
    return val / scale


def locus_export(spec: ControllerSpec, params: RepresentativeParams,
                 branches: list[LocusBranch],
                 mode_gains: np.ndarray | None = None) -> dict:
    """JSON-ready locus payload: geometry plus flattened branch series."""
    geometry = geometry_for(spec, params)
    return {
        "geometry": {
            "open_poles": [{"re": p.real, "im": p.imag}
                           for p in geometry.open_poles],
            "open_zeros": [{"re": z.real, "im": z.imag}
                           for z in geometry.open_zeros],
            "sigma_a": geometry.sigma_a,
            "asymptote_angles_deg": list(geometry.asymptote_angles_deg),
            "break_points": list(geometry.break_points),
        },
        "branches": [
            {"branch_id": b.branch_id, "gains": b.gains,
             "re": b.points.real, "im": b.points.imag}
            for b in branches
        ],
        "mode_gains": ([] if mode_gains is None else list(mode_gains)),
    }
