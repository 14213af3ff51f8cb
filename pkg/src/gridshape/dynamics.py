"""Generator/inverter transfer functions, per-mode subsystems, and simulation.

Two independent simulation routes are provided and cross-check each other on
proportional cases:

* :func:`full_system_ss` assembles the heterogeneous closed loop (one swing
  equation + turbine per bus, per-bus inverters, network integrator realized
  with n-1 angle-difference states) and :func:`step_response` integrates it
  by exact zero-order-hold discretization (matrix exponential).
* :func:`modal_step_response` sums the scalar mode responses of the
  decoupled subsystems, valid under the proportionality assumption.
"""

from __future__ import annotations

import math
import os
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Literal, Sequence

import numpy as np
from scipy.linalg import expm

from .errors import AlgebraicLoop, NonFiniteState
from .netmodel import (NetworkCase, RepresentativeParams, ScaledSpectrum,
                       build_laplacian, representative_params)

DEFAULT_DT = 0.01
DEFAULT_T_END = 40.0

ControllerKind = Literal["fs", "vi", "none"]


def max_threads() -> int:
    """Parallelism cap from GRIDSHAPE_THREADS (default 1 = serial)."""
    try:
        return max(1, int(os.environ.get("GRIDSHAPE_THREADS", "1")))
    except ValueError:
        return 1


@dataclass(frozen=True)
class ControllerSpec:
    """Inverter control law at the representative level.

    ``fs``: inverse-droop controller with a turbine-matching filter,
    ``c(s) = d_t/(tau s + 1) - (d_b + d_t)``.
    ``vi``: virtual inertia plus droop, ``c(s) = -(m_v s + d_b)``.
    ``none``: no inverter.
    """

    kind: ControllerKind = "none"
    d_b: float = 0.0
    m_v: float = 0.0

    def __post_init__(self):
        if self.kind not in ("fs", "vi", "none"):
            raise ValueError(f"unknown controller kind {self.kind!r}")
        if self.d_b < 0 or self.m_v < 0:
            raise ValueError("d_b and m_v must be >= 0")
        if self.kind != "vi" and self.m_v != 0.0:
            raise ValueError("m_v only applies to the vi controller")

    def scaled(self, r_i: float) -> "ControllerSpec":
        """Per-bus instance under proportional scaling c_i = r_i * c."""
        return ControllerSpec(kind=self.kind, d_b=r_i * self.d_b,
                              m_v=r_i * self.m_v)


@dataclass(frozen=True)
class RationalTF:
    """Real-rational transfer function; coefficients in ascending powers."""

    num: tuple[float, ...]
    den: tuple[float, ...]

    def __post_init__(self):
        num = _trim(self.num)
        den = tuple(float(c) for c in self.den)
        if not den or den[-1] == 0.0:
            raise ValueError("denominator leading coefficient must be nonzero")
        object.__setattr__(self, "num", num)
        object.__setattr__(self, "den", den)

    @property
    def order(self) -> int:
        return len(self.den) - 1

    def is_proper(self) -> bool:
        return len(self.num) <= len(self.den)

    def __call__(self, s: complex) -> complex:
        return _polyval(self.num, s) / _polyval(self.den, s)

    def poles(self) -> np.ndarray:
        return np.roots(self.den[::-1]) if self.order else np.array([])

    def zeros(self) -> np.ndarray:
        if len(self.num) <= 1:
            return np.array([])
        return np.roots(self.num[::-1])

    def dc_gain(self) -> float:
        return self.num[0] / self.den[0] if self.den[0] != 0 else math.inf


def _trim(coeffs: Sequence[float]) -> tuple[float, ...]:
    c = [float(x) for x in coeffs]
    while len(c) > 1 and c[-1] == 0.0:
        c.pop()
    return tuple(c)


def _polyval(coeffs: Sequence[float], s: complex) -> complex:
    out = 0.0 + 0.0j
    for c in reversed(coeffs):
        out = out * s + c
    return out


def tf_mul(a: RationalTF, b: RationalTF) -> RationalTF:
    return RationalTF(tuple(np.convolve(a.num, b.num)),
                      tuple(np.convolve(a.den, b.den)))


def generator_tf(m: float, d: float, d_t: float, tau: float) -> RationalTF:
    """Swing equation with a turbine: (tau s + 1) / (m tau s^2 + (m + d tau) s + d + d_t)."""
    if min(m, d, d_t, tau) <= 0:
        raise ValueError("generator parameters must be > 0")
    return RationalTF(num=(1.0, tau),
                      den=(d + d_t, m + d * tau, m * tau))


def controller_tf(spec: ControllerSpec, d_t: float, tau: float) -> RationalTF:
    """Inverter control law as a transfer function from frequency to power."""
    if spec.kind == "fs":
        # d_t/(tau s + 1) - (d_b + d_t)
        h = spec.d_b + d_t
        return RationalTF(num=(d_t - h, -h * tau), den=(1.0, tau))
    if spec.kind == "vi":
        return RationalTF(num=(-spec.d_b, -spec.m_v), den=(1.0,))
    return RationalTF(num=(0.0,), den=(1.0,))


def nadir_min_inertia(m: float, d: float, d_t: float, tau: float,
                      d_b: float) -> float:
    """Smallest virtual inertia removing the COI Nadir for a given droop."""
    return tau * (math.sqrt(d_t) + math.sqrt(d + d_t + d_b)) ** 2 - m


def vi_natural_params(params: RepresentativeParams, d_b: float,
                      m_v: float) -> tuple[float, float]:
    """Natural frequency and damping factor (omega_n, xi) of the VI main mode."""
    m_tot = params.m + m_v
    omega_n = math.sqrt((params.d + d_b + params.d_t) / (m_tot * params.tau))
    xi = (1.0 / params.tau + (params.d + d_b) / m_tot) / (2.0 * omega_n)
    return omega_n, xi


def fs_char_poly(params: RepresentativeParams, d_b: float,
                 lam: float) -> tuple[float, ...]:
    """Closed-loop characteristic polynomial of an FS mode (ascending)."""
    return (lam, params.d + d_b + params.d_t, params.m)


def vi_char_poly(params: RepresentativeParams, d_b: float, m_v: float,
                 lam: float) -> tuple[float, ...]:
    """Closed-loop characteristic polynomial of a VI mode (ascending)."""
    m_tot = params.m + m_v
    dd = params.d + d_b + params.d_t
    tau = params.tau
    return (lam, dd + lam * tau, m_tot + (params.d + d_b) * tau, m_tot * tau)


def none_char_poly(params: RepresentativeParams,
                   lam: float) -> tuple[float, ...]:
    """Characteristic polynomial of an uncontrolled mode (ascending)."""
    m, d, d_t, tau = params.m, params.d, params.d_t, params.tau
    return (lam, d + d_t + lam * tau, m + d * tau, m * tau)


def mode_subsystem(spec: ControllerSpec, params: RepresentativeParams,
                   lam: float) -> RationalTF:
    """Scalar subsystem z_k(s) of the mode with gain lam.

    FS: s / (m s^2 + (d + d_b + d_t) s + lam); for lam = 0 the common s
    cancels leaving the first-order main mode. VI keeps the turbine zero:
    s (tau s + 1) / [s ((m+m_v) tau s^2 + (m+m_v+(d+d_b) tau) s + d+d_b+d_t)
    + lam (tau s + 1)].
    """
    if lam < 0:
        raise ValueError("mode gain must be >= 0")
    if spec.kind == "fs":
        den = fs_char_poly(params, spec.d_b, lam)
        if lam == 0.0:
            return RationalTF(num=(1.0,), den=den[1:])
        return RationalTF(num=(0.0, 1.0), den=den)
    if spec.kind == "vi":
        den = vi_char_poly(params, spec.d_b, spec.m_v, lam)
        num = (0.0, 1.0, params.tau)      # s (tau s + 1)
    else:
        den = none_char_poly(params, lam)
        num = (0.0, 1.0, params.tau)
    if lam == 0.0:
        return RationalTF(num=num[1:], den=den[1:])
    return RationalTF(num=num, den=den)


@dataclass(frozen=True)
class StateSpace:
    """Real LTI realization; outputs stack bus frequencies then inverter powers
    when built by :func:`full_system_ss` (``n_buses`` set)."""

    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    D: np.ndarray
    n_buses: int | None = None
    coi_weights: np.ndarray | None = None

    def __post_init__(self):
        A = np.atleast_2d(np.asarray(self.A, dtype=float))
        B = np.atleast_2d(np.asarray(self.B, dtype=float))
        C = np.atleast_2d(np.asarray(self.C, dtype=float))
        D = np.atleast_2d(np.asarray(self.D, dtype=float))
        n = A.shape[0]
        if A.shape != (n, n) or B.shape[0] != n or C.shape[1] != n \
                or D.shape != (C.shape[0], B.shape[1]):
            raise ValueError("inconsistent state-space dimensions")
        for name, a in (("A", A), ("B", B), ("C", C), ("D", D)):
            a = a.copy()
            a.flags.writeable = False
            object.__setattr__(self, name, a)
        if self.coi_weights is not None:
            w = np.asarray(self.coi_weights, dtype=float).copy()
            w.flags.writeable = False
            object.__setattr__(self, "coi_weights", w)

    @property
    def n_states(self) -> int:
        return self.A.shape[0]


def tf_to_ss(tf: RationalTF) -> StateSpace:
    """Controllable canonical realization of a proper transfer function."""
    if not tf.is_proper():
        raise ValueError("transfer function must be proper")
    n = tf.order
    den = np.asarray(tf.den)
    num = np.zeros(n + 1)
    num[:len(tf.num)] = tf.num
    lead = den[-1]
    a = den[:-1] / lead
    d = num[-1] / lead
    b = num[:-1] - d * den[:-1]
    if n == 0:
        return StateSpace(A=np.zeros((1, 1)), B=np.zeros((1, 1)),
                          C=np.zeros((1, 1)), D=np.array([[d]]))
    A = np.zeros((n, n))
    A[:-1, 1:] = np.eye(n - 1)
    A[-1, :] = -a
    B = np.zeros((n, 1))
    B[-1, 0] = 1.0 / lead
    C = b.reshape(1, n)
    return StateSpace(A=A, B=B, C=C, D=np.array([[d]]))


@dataclass(frozen=True)
class StepResponse:
    """Uniform-grid step response: bus frequencies, COI, inverter powers."""

    t: np.ndarray
    omega: np.ndarray       # (n, T) pu
    coi: np.ndarray         # (T,) pu
    p_inv: np.ndarray       # (n, T) pu
    u0: np.ndarray          # (n,) pu
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        for name in ("t", "omega", "coi", "p_inv", "u0"):
            a = np.asarray(getattr(self, name), dtype=float).copy()
            a.flags.writeable = False
            object.__setattr__(self, name, a)
        if self.omega.shape[1] != self.t.size:
            raise ValueError("omega grid mismatch")

    @property
    def n(self) -> int:
        return self.omega.shape[0]

    def to_csv(self) -> str:
        n = self.n
        header = (["t"] + [f"omega_{i+1}" for i in range(n)] + ["coi"]
                  + [f"pinv_{i+1}" for i in range(n)])
        rows = [",".join(header)]
        for j in range(self.t.size):
            vals = ([self.t[j]] + list(self.omega[:, j]) + [self.coi[j]]
                    + list(self.p_inv[:, j]))
            rows.append(",".join(f"{v:.12g}" for v in vals))
        return "\n".join(rows) + "\n"

    def to_dict(self) -> dict:
        return {
            "t": self.t, "omega": self.omega, "coi": self.coi,
            "p_inv": self.p_inv, "u0": self.u0, "meta": dict(self.meta),
        }


def _zoh_step_outputs(ss: StateSpace, u0: np.ndarray, t: np.ndarray,
                      dt: float, n_hold: int) -> np.ndarray:
    """Outputs of ss driven by a step u0 held from sample n_hold onward."""
    nx = ss.n_states
    bu = (ss.B @ u0.reshape(-1, 1))
    aug = np.zeros((nx + 1, nx + 1))
    aug[:nx, :nx] = ss.A
    aug[:nx, nx:] = bu
    phi = expm(aug * dt)
    ad, bd = phi[:nx, :nx], phi[:nx, nx]
    x = np.zeros(nx)
    du = (ss.D @ u0.reshape(-1, 1)).ravel()
    y = np.zeros((ss.C.shape[0], t.size))
    for j in range(t.size):
        if j >= n_hold:
            y[:, j] = ss.C @ x + du
            if j + 1 < t.size:
                x = ad @ x + bd
    if not np.isfinite(y).all():
        raise NonFiniteState("step response overflowed")
    return y


def _time_grid(t_end: float, dt: float, onset: float) -> tuple[np.ndarray, int]:
    if dt <= 0 or t_end <= 0:
        raise ValueError("t_end and dt must be > 0")
    steps = int(round(t_end / dt))
    t = np.linspace(0.0, steps * dt, steps + 1)
    n_hold = int(round(onset / dt))
    if n_hold < 0 or n_hold > steps:
        raise ValueError("onset must lie within [0, t_end]")
    return t, n_hold


def step_response(sys: StateSpace, u0: np.ndarray, t_end: float = DEFAULT_T_END,
                  dt: float = DEFAULT_DT, onset: float = 0.0) -> StepResponse:
    """Exact ZOH step response on a uniform grid.

    Discretizes the augmented [[A, B u0], [0, 0]] system with one matrix
    exponential; no integrator truncation error enters. Warns (but still
    simulates) when A is not Hurwitz.
    """
    u0 = np.atleast_1d(np.asarray(u0, dtype=float))
    if u0.size != sys.B.shape[1]:
        raise ValueError("u0 length must match the input dimension")
    eigs = np.linalg.eigvals(sys.A)
    if np.max(eigs.real) > 1e-9:
        warnings.warn("system matrix is not Hurwitz; response may diverge",
                      stacklevel=2)
    t, n_hold = _time_grid(t_end, dt, onset)
    y = _zoh_step_outputs(sys, u0, t, dt, n_hold)
    if sys.n_buses is not None:
        n = sys.n_buses
        omega, p_inv = y[:n], y[n:2 * n]
    else:
        n = y.shape[0]
        omega, p_inv = y, np.zeros_like(y)
    w = sys.coi_weights if sys.coi_weights is not None else np.ones(n)
    coi = (w @ omega) / w.sum()
    return StepResponse(t=t, omega=omega, coi=coi, p_inv=p_inv, u0=u0)


def per_bus_specs(spec: ControllerSpec,
                  rep: RepresentativeParams) -> list[ControllerSpec]:
    """Scale a representative controller to every bus: c_i = r_i * c."""
    return [spec.scaled(float(ri)) for ri in rep.r]


def steady_state_omega(case: NetworkCase,
                       controllers: ControllerSpec | Sequence[ControllerSpec],
                       u0: np.ndarray,
                       rep: RepresentativeParams | None = None) -> float:
    """Synchronized steady-state frequency after a step disturbance:
    sum(u0) / sum(d_i + d_t_i + d_b_i)."""
    if rep is None:
        rep = representative_params(case)
    if isinstance(controllers, ControllerSpec):
        controllers = per_bus_specs(controllers, rep)
    total = sum(b.d + b.d_t for b in case.buses)
    total += sum(c.d_b for c in controllers)
    return float(np.sum(u0) / total)


def full_system_ss(case: NetworkCase,
                   controllers: ControllerSpec | Sequence[ControllerSpec],
                   rep: RepresentativeParams | None = None) -> StateSpace:
    """Closed-loop state space of the full (heterogeneous) network.

    States: per-bus frequency and turbine power, one filter state per FS
    inverter, and n-1 angle-difference states realizing the network
    integrator without its marginal uniform mode (keeps A Hurwitz). The VI
    derivative term is absorbed by inertia augmentation m_i -> m_i + m_v_i,
    never by differentiation, so no algebraic loop can arise. A single
    ControllerSpec is scaled per-bus by r_i; a sequence is taken as per-bus
    specs whose d_b/m_v are already the bus values (FS filters still use
    r_i-scaled representative turbine constants).

    Outputs: bus frequencies (n), then inverter power injections (n).
    Input: the bus disturbance vector.
    """
    n = case.n
    if rep is None:
        rep = representative_params(case)
    if isinstance(controllers, ControllerSpec):
        controllers = per_bus_specs(controllers, rep)
    controllers = list(controllers)
    if len(controllers) != n:
        raise ValueError("need one controller spec per bus")

    lb = build_laplacian(case)
    fs_buses = [i for i, c in enumerate(controllers) if c.kind == "fs"]
    fs_slot = {i: k for k, i in enumerate(fs_buses)}
    n_fs = len(fs_buses)
    nx = 2 * n + n_fs + (n - 1)
    i_omega = np.arange(n)
    i_q = n + np.arange(n)
    i_xc = 2 * n + np.arange(n_fs)
    i_delta = 2 * n + n_fs + np.arange(n - 1)

    # Total inertia per bus; VI merges its m_v with the machine inertia.
    m_tot = np.array([case.buses[i].m
                      + (controllers[i].m_v if controllers[i].kind == "vi"
                         else 0.0) for i in range(n)])
    # FS filter constants (r_i-scaled representative turbine values).
    g_fs = {i: float(rep.r[i]) * rep.d_t for i in fs_buses}
    tau_c = rep.tau

    A = np.zeros((nx, nx))
    B = np.zeros((nx, n))
    for i in range(n):
        bus = case.buses[i]
        ctrl = controllers[i]
        # Static frequency feedback seen by the swing equation.
        d_eff = bus.d
        if ctrl.kind == "fs":
            d_eff += ctrl.d_b + g_fs[i]
        elif ctrl.kind == "vi":
            d_eff += ctrl.d_b
        A[i_omega[i], i_omega[i]] = -d_eff / m_tot[i]
        A[i_omega[i], i_q[i]] = 1.0 / m_tot[i]
        if ctrl.kind == "fs":
            A[i_omega[i], i_xc[fs_slot[i]]] = 1.0 / m_tot[i]
        A[i_omega[i], i_delta] = -lb[i, :n - 1] / m_tot[i]
        B[i_omega[i], i] = 1.0 / m_tot[i]
        # Turbine.
        A[i_q[i], i_q[i]] = -1.0 / bus.tau
        A[i_q[i], i_omega[i]] = -bus.d_t / bus.tau
    for i in fs_buses:
        k = fs_slot[i]
        A[i_xc[k], i_xc[k]] = -1.0 / tau_c
        A[i_xc[k], i_omega[i]] = g_fs[i] / tau_c
    for j in range(n - 1):
        A[i_delta[j], i_omega[j]] = 1.0
        A[i_delta[j], i_omega[n - 1]] = -1.0

    # Outputs: omega (n) then inverter powers (n).
    C = np.zeros((2 * n, nx))
    D = np.zeros((2 * n, n))
    C[:n, :n] = np.eye(n)
    for i in range(n):
        ctrl = controllers[i]
        row = n + i
        if ctrl.kind == "fs":
            C[row, i_xc[fs_slot[i]]] = 1.0
            C[row, i_omega[i]] = -(ctrl.d_b + g_fs[i])
        elif ctrl.kind == "vi":
            # p_b = -m_v * domega/dt - d_b * omega, via the omega state row.
            C[row, :] = -ctrl.m_v * A[i_omega[i], :]
            C[row, i_omega[i]] += -ctrl.d_b
            D[row, :] = -ctrl.m_v * B[i_omega[i], :]
    return StateSpace(A=A, B=B, C=C, D=D, n_buses=n, coi_weights=m_tot)


def _mode_terms(spec, params, lam_k, c_tf, t, dt, n_hold):
    z_tf = mode_subsystem(spec, params, lam_k)
    zu = _zoh_step_outputs(tf_to_ss(z_tf), np.array([1.0]), t, dt, n_hold)[0]
    wu = None
    if c_tf is not None:
        wu = _zoh_step_outputs(tf_to_ss(tf_mul(c_tf, z_tf)),
                               np.array([1.0]), t, dt, n_hold)[0]
    return zu, wu


def modal_step_response(spec: ControllerSpec, params: RepresentativeParams,
                        spectrum: ScaledSpectrum, u0: np.ndarray,
                        t_end: float = DEFAULT_T_END, dt: float = DEFAULT_DT,
                        onset: float = 0.0) -> StepResponse:
    """Step response assembled from the decoupled scalar modes.

    omega(t) = wbar(t) 1 + sum_{k>=2} z_uk(t) mu_k with
    mu_k = R^{-1/2} v_k v_k^T R^{-1/2} u0; inverter powers come from the
    per-mode controller-output responses the same way. Exact for
    proportional cases; modes run independently (optionally in parallel,
    capped by GRIDSHAPE_THREADS) and merge deterministically by index.
    """
    u0 = np.atleast_1d(np.asarray(u0, dtype=float))
    n = spectrum.n
    if u0.size != n:
        raise ValueError("u0 length must match the case size")
    t, n_hold = _time_grid(t_end, dt, onset)
    sqrt_r = np.sqrt(spectrum.r)
    coords = spectrum.v.T @ (u0 / sqrt_r)      # v_k^T R^{-1/2} u0
    c_tf = (controller_tf(spec, params.d_t, params.tau)
            if spec.kind != "none" else None)

    workers = min(max_threads(), n)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(
                lambda k: _mode_terms(spec, params, float(spectrum.lam[k]),
                                      c_tf, t, dt, n_hold), range(n)))
    else:
        results = [_mode_terms(spec, params, float(spectrum.lam[k]), c_tf,
                               t, dt, n_hold) for k in range(n)]

    omega = np.zeros((n, t.size))
    p_inv = np.zeros((n, t.size))
    for k in range(n):
        zu, wu = results[k]
        shape = coords[k] * (spectrum.v[:, k] / sqrt_r)
        omega += np.outer(shape, zu)
        if wu is not None:
            p_inv += np.outer(coords[k] * (spectrum.v[:, k] * sqrt_r), wu)
    coi = (u0.sum() / spectrum.r.sum()) * results[0][0]
    if not (np.isfinite(omega).all() and np.isfinite(p_inv).all()):
        raise NonFiniteState("modal response overflowed")
    return StepResponse(t=t, omega=omega, coi=coi, p_inv=p_inv, u0=u0)
