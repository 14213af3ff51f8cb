"""Network cases, the network Laplacian, and its scaled spectrum.

A case is a connected set of buses (machine parameters, voltage magnitude,
equilibrium angle) and lines (susceptances). From it we build the network
Laplacian ``L_B`` whose edge weights carry the nominal-frequency factor
``2*pi*f0``, so the eigenvalues of the scaled Laplacian
``L = R^{-1/2} L_B R^{-1/2}`` are directly the modal gains used everywhere
else in the toolkit. All quantities are per-unit on the case's power base,
time in seconds.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import DisconnectedGraph, EigensolveFailure, NonPositiveWeight
from .serialize import content_hash

# Relative threshold separating the zero eigenvalue from the Fiedler value.
ZERO_EIG_RTOL = 1e-8
# Row sums of a Laplacian must vanish to this fraction of the largest entry.
ROW_SUM_RTOL = 1e-9


@dataclass(frozen=True)
class Bus:
    """One generator bus: swing-equation machine plus turbine."""

    id: int
    m: float          # inertia (s)
    d: float          # damping (pu)
    d_t: float        # turbine inverse droop (pu)
    tau: float        # turbine time constant (s)
    v_mag: float = 1.0    # voltage magnitude (pu)
    theta0: float = 0.0   # equilibrium angle (rad)

    def __post_init__(self):
        for name in ("m", "d", "d_t", "tau", "v_mag"):
            if not getattr(self, name) > 0:
                raise ValueError(f"bus {self.id}: {name} must be > 0")


@dataclass(frozen=True)
class Line:
    """Transmission line between two buses (unordered pair)."""

    from_bus: int
    to_bus: int
    b: float          # susceptance (pu)

    def __post_init__(self):
        if self.from_bus == self.to_bus:
            raise ValueError("line endpoints must differ")
        if not self.b > 0:
            raise ValueError("line susceptance must be > 0")

    @property
    def key(self) -> tuple[int, int]:
        return tuple(sorted((self.from_bus, self.to_bus)))


@dataclass(frozen=True)
class NetworkCase:
    """Buses + lines + bases, optionally with a precomputed Laplacian.

    ``laplacian_override``, when present, is used verbatim in place of the
    line-built matrix. This supports reduced networks (e.g. after Kron
    reduction) whose branch data is not available in raw form.
    """

    buses: tuple[Bus, ...]
    lines: tuple[Line, ...] = ()
    f0: float = 60.0
    s_base: float = 100.0
    laplacian_override: np.ndarray | None = None

    def __post_init__(self):
        if not self.buses:
            raise ValueError("case needs at least one bus")
        if self.f0 not in (50.0, 60.0):
            raise ValueError("f0 must be 50 or 60 Hz")
        if not self.s_base > 0:
            raise ValueError("s_base must be > 0")
        ids = [b.id for b in self.buses]
        if len(set(ids)) != len(ids):
            raise ValueError("duplicate bus ids")
        keys = [ln.key for ln in self.lines]
        if len(set(keys)) != len(keys):
            raise ValueError("duplicate line (unordered pair)")
        idset = set(ids)
        for ln in self.lines:
            if ln.from_bus not in idset or ln.to_bus not in idset:
                raise ValueError(f"line references unknown bus: {ln}")
        if self.laplacian_override is not None:
            lb = np.asarray(self.laplacian_override, dtype=float)
            n = len(self.buses)
            if lb.shape != (n, n):
                raise ValueError("laplacian_override must be n x n")
            _check_laplacian(lb)
            _check_connected_matrix(lb)
            lb = lb.copy()
            lb.flags.writeable = False
            object.__setattr__(self, "laplacian_override", lb)

    @property
    def n(self) -> int:
        return len(self.buses)

    @property
    def omega0(self) -> float:
        return 2.0 * math.pi * self.f0

    def bus_index(self) -> dict[int, int]:
        return {b.id: i for i, b in enumerate(self.buses)}

    def to_dict(self) -> dict:
        d = {
            "buses": [
                {"id": b.id, "m": b.m, "d": b.d, "d_t": b.d_t, "tau": b.tau,
                 "v_mag": b.v_mag, "theta0": b.theta0}
                for b in self.buses
            ],
            "lines": [
                {"from": ln.from_bus, "to": ln.to_bus, "b": ln.b}
                for ln in self.lines
            ],
            "f0": self.f0,
            "s_base": self.s_base,
        }
        if self.laplacian_override is not None:
            d["laplacian_override"] = [list(row) for row in
                                       self.laplacian_override]
        return d

    def content_hash(self) -> str:
        return content_hash(self.to_dict())


def case_from_dict(data: dict) -> NetworkCase:
    buses = tuple(
        Bus(id=int(b["id"]), m=float(b["m"]), d=float(b["d"]),
            d_t=float(b["d_t"]), tau=float(b["tau"]),
            v_mag=float(b.get("v_mag", 1.0)),
            theta0=float(b.get("theta0", 0.0)))
        for b in data["buses"]
    )
    lines = tuple(
        Line(from_bus=int(ln["from"]), to_bus=int(ln["to"]), b=float(ln["b"]))
        for ln in data.get("lines", [])
    )
    override = data.get("laplacian_override")
    if override is not None:
        override = np.asarray(override, dtype=float)
    return NetworkCase(buses=buses, lines=lines, f0=float(data["f0"]),
                       s_base=float(data["s_base"]),
                       laplacian_override=override)


def load_case(path: str | Path) -> NetworkCase:
    """Read a case from a JSON file (see ``to_dict`` for the schema)."""
    with open(path) as f:
        return case_from_dict(json.load(f))


def _check_laplacian(lb: np.ndarray) -> None:
    scale = np.abs(lb).max() or 1.0
    if np.abs(lb - lb.T).max() > ROW_SUM_RTOL * scale:
        raise ValueError("Laplacian must be symmetric")
    if np.abs(lb.sum(axis=1)).max() > ROW_SUM_RTOL * scale:
        raise ValueError("Laplacian rows must sum to zero")


def _check_connected_matrix(lb: np.ndarray) -> None:
    """Connectivity from the off-diagonal sparsity pattern (BFS)."""
    n = lb.shape[0]
    scale = np.abs(lb).max() or 1.0
    adj = (np.abs(lb) > 1e-12 * scale) & ~np.eye(n, dtype=bool)
    seen = np.zeros(n, dtype=bool)
    stack = [0]
    seen[0] = True
    while stack:
        i = stack.pop()
        for j in np.flatnonzero(adj[i]):
            if not seen[j]:
                seen[j] = True
                stack.append(int(j))
    if not seen.all():
        raise DisconnectedGraph("network graph is not connected")


def build_laplacian(case: NetworkCase) -> np.ndarray:
    """Network Laplacian ``L_B`` in pu*rad/s.

    Edge weight for line {i,j}: ``2*pi*f0 * |V_i||V_j| B_ij cos(th_i0-th_j0)``;
    the diagonal makes every row sum to zero exactly. With an override
    present, the stored matrix is returned verbatim.
    """
    if case.laplacian_override is not None:
        return np.array(case.laplacian_override, dtype=float)
    n = case.n
    idx = case.bus_index()
    w = np.zeros((n, n))
    for ln in case.lines:
        i, j = idx[ln.from_bus], idx[ln.to_bus]
        bi, bj = case.buses[i], case.buses[j]
        weight = (case.omega0 * bi.v_mag * bj.v_mag * ln.b
                  * math.cos(bi.theta0 - bj.theta0))
        if weight <= 0:
            raise NonPositiveWeight(
                f"line {ln.from_bus}-{ln.to_bus}: edge weight {weight:.4g} "
                "<= 0 (equilibrium angle difference >= 90 deg)"
            )
        w[i, j] = w[j, i] = weight
    lb = np.diag(w.sum(axis=1)) - w
    _check_connected_matrix(lb)
    return lb


@dataclass(frozen=True)
class RepresentativeParams:
    """Parameters of the representative generator and the bus proportions.

    Under the mean-inertia convention ``m`` is the average of the bus
    inertias and ``r_i = m_i / m``; damping and turbine inverse droop are
    the proportion-weighted aggregates, the turbine time constant a plain
    mean.
    """

    m: float
    d: float
    d_t: float
    tau: float
    r: np.ndarray = field(repr=False)

    def __post_init__(self):
        for name in ("m", "d", "d_t", "tau"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be > 0")
        r = np.asarray(self.r, dtype=float)
        if not (r > 0).all():
            raise ValueError("all r_i must be > 0")
        r = r.copy()
        r.flags.writeable = False
        object.__setattr__(self, "r", r)

    @property
    def r_sum(self) -> float:
        return float(self.r.sum())


def representative_params(case: NetworkCase,
                          r: np.ndarray | None = None) -> RepresentativeParams:
    """Representative generator parameters for a (possibly heterogeneous) case.

    The default convention derives proportions from inertia: ``m`` is the
    mean bus inertia and ``r_i = m_i / m``. Pass an explicit positive ``r``
    to plug in a different proportionality convention; the aggregate
    ``d = sum(d_i)/sum(r_i)`` and ``d_t = sum(d_t_i)/sum(r_i)`` formulas are
    kept either way.
    """
    ms = np.array([b.m for b in case.buses])
    if r is None:
        m = float(ms.mean())
        r = ms / m
    else:
        r = np.asarray(r, dtype=float)
        if r.shape != (case.n,) or not (r > 0).all():
            raise ValueError("r must be a positive vector of length n")
        m = float(ms.sum() / r.sum())
    r_sum = float(r.sum())
    d = float(sum(b.d for b in case.buses) / r_sum)
    d_t = float(sum(b.d_t for b in case.buses) / r_sum)
    tau = float(np.mean([b.tau for b in case.buses]))
    return RepresentativeParams(m=m, d=d, d_t=d_t, tau=tau, r=r)


@dataclass(frozen=True)
class ScaledSpectrum:
    """Eigendecomposition of the scaled Laplacian ``R^{-1/2} L_B R^{-1/2}``."""

    r: np.ndarray
    lb: np.ndarray
    l: np.ndarray
    lam: np.ndarray        # eigenvalues, non-decreasing, lam[0] == 0
    v: np.ndarray          # orthonormal eigenvectors (columns)

    def __post_init__(self):
        for name in ("r", "lb", "l", "lam", "v"):
            a = np.asarray(getattr(self, name), dtype=float).copy()
            a.flags.writeable = False
            object.__setattr__(self, name, a)

    @property
    def n(self) -> int:
        return self.lam.size

    @property
    def lambda2(self) -> float:
        return float(self.lam[1])

    @property
    def lambda_n(self) -> float:
        return float(self.lam[-1])

    def mode_gains(self) -> np.ndarray:
        """Gains of the oscillatory modes (k >= 2)."""
        return self.lam[1:].copy()


def scaled_spectrum(lb: np.ndarray, r: np.ndarray) -> ScaledSpectrum:
    """Spectrum of ``L = R^{-1/2} L_B R^{-1/2}``.

    Eigenvalues come back sorted ascending with the zero mode clamped to
    exactly 0; eigenvector signs are fixed so the largest-magnitude entry of
    each column is positive, which makes downstream modal quantities
    deterministic.
    """
    lb = np.asarray(lb, dtype=float)
    r = np.asarray(r, dtype=float)
    if not (r > 0).all():
        raise ValueError("all r_i must be > 0")
    _check_laplacian(lb)
    rs = 1.0 / np.sqrt(r)
    l = rs[:, None] * lb * rs[None, :]
    l = 0.5 * (l + l.T)
    try:
        lam, v = np.linalg.eigh(l)
    except np.linalg.LinAlgError as exc:
        raise EigensolveFailure(str(exc)) from exc
    # Deterministic eigenvector signs.
    for k in range(v.shape[1]):
        j = int(np.argmax(np.abs(v[:, k])))
        if v[j, k] < 0:
            v[:, k] = -v[:, k]
    lam_n = float(lam[-1]) if lam[-1] > 0 else 1.0
    if abs(lam[0]) > ZERO_EIG_RTOL * lam_n:
        raise ValueError(f"smallest eigenvalue {lam[0]:.3g} is not ~0; "
                         "input is not a valid Laplacian")
    if lam.size > 1 and lam[1] < ZERO_EIG_RTOL * lam_n:
        raise DisconnectedGraph(
            f"Fiedler eigenvalue {lam[1]:.3g} is numerically zero")
    lam = lam.copy()
    lam[0] = 0.0
    return ScaledSpectrum(r=r, lb=lb, l=l, lam=lam, v=v)


def case_spectrum(case: NetworkCase,
                  rep: RepresentativeParams | None = None) -> ScaledSpectrum:
    """Convenience: Laplacian + representative proportions + spectrum."""
    if rep is None:
        rep = representative_params(case)
    return scaled_spectrum(build_laplacian(case), rep.r)


def proportional_variant(case: NetworkCase,
                         rep: RepresentativeParams | None = None
                         ) -> NetworkCase:
    """The exactly-proportional companion of a case.

    Bus parameters are replaced by r_i-scaled representative values (same
    network); on the result the modal decomposition is exact rather than an
    approximation.
    """
    if rep is None:
        rep = representative_params(case)
    buses = tuple(
        Bus(id=b.id, m=float(ri) * rep.m, d=float(ri) * rep.d,
            d_t=float(ri) * rep.d_t, tau=rep.tau, v_mag=b.v_mag,
            theta0=b.theta0)
        for b, ri in zip(case.buses, rep.r)
    )
    return NetworkCase(buses=buses, lines=case.lines, f0=case.f0,
                       s_base=case.s_base,
                       laplacian_override=case.laplacian_override)
