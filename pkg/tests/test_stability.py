import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gridshape.errors import NadirConditionViolated, NotSettled
from gridshape.netmodel import RepresentativeParams, case_spectrum
from gridshape.dynamics import (ControllerSpec, StepResponse,
                                full_system_ss, modal_step_response,
                                steady_state_omega, step_response)
from gridshape.stability import (StabilityRegion, analyze_modes,
                                 check_alpha_psi, fit_envelope, fs_beats_vi,
                                 fs_convergence_rate, fs_min_damping,
                                 fs_min_decay, pole_damping, vi_rate_bound)
from gridshape.tuning import vi_mv_min


@pytest.fixture(scope="module")
def params():
    return RepresentativeParams(m=15.37, d=4.37, d_t=15.0, tau=2.19,
                                r=np.ones(3))


def random_draw(rng, n_max=12):
    n_modes = int(rng.integers(1, n_max))
    params = RepresentativeParams(
        m=float(rng.uniform(1.0, 30.0)), d=float(rng.uniform(0.3, 10.0)),
        d_t=float(rng.uniform(3.0, 20.0)), tau=float(rng.uniform(0.5, 4.0)),
        r=np.ones(2))
    d_b = float(rng.uniform(0.0, 80.0))
    lams = np.sort(rng.uniform(0.5, 6000.0, size=n_modes))
    return params, d_b, lams


def test_fs_min_damping_reference_value(params):
    val = fs_min_damping(params, 35.89, 4967.96)
    assert val == pytest.approx(0.100, abs=5e-4)
    assert val == pytest.approx((4.37 + 35.89 + 15.0)
                                / (2 * math.sqrt(4967.96 * 15.37)),
                                rel=1e-12)


def test_fs_min_damping_saturates(params):
    d_b = 2 * math.sqrt(4967.96 * 15.37) - 4.37 - 15.0
    assert fs_min_damping(params, d_b, 4967.96) == 1.0
    assert fs_min_damping(params, d_b + 100.0, 4967.96) == 1.0


def test_fs_min_decay_branch_continuity(params):
    lam2 = 151.47
    switch = 2 * math.sqrt(lam2 * params.m) - params.d - params.d_t
    left = fs_min_decay(params, switch * (1 - 1e-12), lam2)
    right = fs_min_decay(params, switch * (1 + 1e-12), lam2)
    assert left == pytest.approx(right, rel=1e-5)
    assert left == pytest.approx(math.sqrt(lam2 / params.m), rel=1e-6)


def test_fs_min_decay_linear_branch_value(params):
    # d_b = 0 with lambda_2 large enough to keep the Fiedler mode complex.
    assert fs_min_decay(params, 0.0, 1e4) == pytest.approx(
        19.37 / 30.74, rel=1e-12)


def test_closed_forms_match_bruteforce_oracle(params):
    rng = np.random.default_rng(7)
    for _ in range(250):
        p, d_b, lams = random_draw(rng)
        ana = analyze_modes(ControllerSpec("fs", d_b=d_b), p, lams)
        assert ana.min_damping == pytest.approx(
            fs_min_damping(p, d_b, float(lams[-1])), rel=1e-9)
        assert ana.min_decay == pytest.approx(
            fs_min_decay(p, d_b, float(lams[0])), rel=1e-9)
        assert ana.argmin_damping_mode == len(lams) + 1   # k = n
        assert ana.argmin_decay_mode == 2                 # k = 2


def test_pole_damping_convention():
    assert pole_damping(complex(-3.0, 0.0)) == 1.0
    assert pole_damping(complex(-1.0, 1.0)) == pytest.approx(1 / math.sqrt(2))


def test_region_membership_basics():
    region = StabilityRegion.from_cos(0.2, math.cos(math.radians(84.3)))
    assert region.contains(complex(-1.7975, 10.0))
    assert not region.contains(complex(-0.1, 0.0))       # decay fails
    assert not region.contains(complex(-0.3, 10.0))      # damping fails
    assert not region.contains(0j)                       # origin excluded


@given(st.floats(min_value=0.05, max_value=3.0),
       st.floats(min_value=0.05, max_value=0.99),
       st.floats(min_value=-20.0, max_value=-0.01),
       st.floats(min_value=0.0, max_value=30.0))
@settings(max_examples=60, deadline=None)
def test_region_conjugation_invariance(alpha, cos_psi, re, im):
    region = StabilityRegion.from_cos(alpha, cos_psi)
    s = complex(re, im)
    assert region.contains(s) == region.contains(s.conjugate())


def test_reference_case_passes_grid_code_region(params):
    ana = analyze_modes(ControllerSpec("fs", d_b=35.89), params,
                        np.array([151.47, 4967.96]))
    region = StabilityRegion.from_cos(0.2, math.cos(math.radians(84.3)))
    check = check_alpha_psi(ana, region)
    assert check.overall
    assert all(r.passes for r in check.per_mode)


def test_fs_convergence_rate_identity(params):
    rates = fs_convergence_rate(params, 35.89, 151.47)
    assert rates.coi_rate == pytest.approx(
        (4.37 + 35.89 + 15.0) / 15.37, rel=1e-12)
    assert rates.coi_rate == pytest.approx(3.595, abs=5e-3)
    # In the linear regime the COI rate is exactly twice the system rate.
    assert rates.coi_rate == pytest.approx(2 * rates.system_rate, rel=1e-12)
    assert rates.coi_rate > rates.system_rate


def test_vi_rate_bound_reference_value(params):
    p = RepresentativeParams(m=15.37, d=4.366667, d_t=15.0, tau=2.186667,
                             r=np.ones(3))
    m_v = vi_mv_min(p, 35.89)
    bound = vi_rate_bound(p, 35.89, m_v)
    assert bound.omega_n == pytest.approx(0.3004, abs=2e-3)
    assert bound.xi == pytest.approx(1.0, abs=1e-9)
    with pytest.raises(NadirConditionViolated):
        vi_rate_bound(p, 35.89, 0.5 * m_v)


def test_fs_beats_vi_reference_values():
    p = RepresentativeParams(m=15.37, d=4.366667, d_t=15.0, tau=2.186667,
                             r=np.ones(3))
    m_v = vi_mv_min(p, 35.89)
    cmp_res = fs_beats_vi(p, 35.89, m_v)
    assert cmp_res.holds
    assert cmp_res.lhs == pytest.approx(11.96, abs=0.02)
    assert cmp_res.margin == pytest.approx(cmp_res.lhs - 2.0, rel=1e-12)


def test_fs_beats_vi_boundary_identity():
    # Parameters placed exactly at LHS = 2: the two rates coincide.
    from gridshape.dynamics import vi_natural_params
    tau, d, d_t, d_b = 1.0, 0.5, 0.5, 0.0
    dd = d + d_t + d_b
    m = tau * math.sqrt(dd) * (math.sqrt(d_t) + math.sqrt(dd)) / 2.0
    p = RepresentativeParams(m=m, d=d, d_t=d_t, tau=tau, r=np.ones(2))
    m_v = vi_mv_min(p, d_b)
    cmp_res = fs_beats_vi(p, d_b, m_v)
    assert cmp_res.lhs == pytest.approx(2.0, rel=1e-12)
    omega_n, _ = vi_natural_params(p, d_b, m_v)
    assert dd / (2 * m) == pytest.approx(omega_n, rel=1e-12)


def test_fit_envelope_pure_exponential():
    t = np.linspace(0.0, 6.0, 601)
    om = np.exp(-2.0 * t)[None, :]
    resp = StepResponse(t=t, omega=om, coi=om[0], p_inv=np.zeros_like(om),
                        u0=np.array([1.0]))
    fit = fit_envelope(resp, np.array([0.0]))
    assert fit.rate == pytest.approx(2.0, abs=1e-6)


def test_fit_envelope_zero_deviation_not_settled():
    t = np.linspace(0.0, 2.0, 101)
    om = np.zeros((1, t.size))
    resp = StepResponse(t=t, omega=om, coi=om[0], p_inv=om, u0=np.zeros(1))
    with pytest.raises(NotSettled):
        fit_envelope(resp, np.array([0.0]))


def test_fit_envelope_unsettled_response():
    t = np.linspace(0.0, 2.0, 201)
    om = np.exp(-0.05 * t)[None, :]     # barely decayed by t_end
    resp = StepResponse(t=t, omega=om, coi=om[0], p_inv=np.zeros_like(om),
                        u0=np.ones(1))
    with pytest.raises(NotSettled):
        fit_envelope(resp, np.array([0.0]))


def test_fs_envelope_rate_brackets_min_decay(ref_prop, ref_rep):
    db = 35.89
    spectrum = case_spectrum(ref_prop, ref_rep)
    spec_ctrl = ControllerSpec("fs", d_b=db)
    u0 = np.array([-0.2, 0.0, 0.0])
    resp = modal_step_response(spec_ctrl, ref_rep, spectrum, u0,
                               t_end=15.0, dt=0.01)
    steady = steady_state_omega(ref_prop, spec_ctrl, u0, ref_rep)
    fit = fit_envelope(resp, np.full(3, steady))
    alpha = fs_min_decay(ref_rep, db, spectrum.lambda2)
    assert 0.95 * alpha <= fit.rate <= 1.3 * alpha


def test_vi_envelope_rate_below_bound(ref_prop, ref_rep):
    db = 35.89
    m_v = vi_mv_min(ref_rep, db)
    spec_ctrl = ControllerSpec("vi", d_b=db, m_v=m_v)
    u0 = np.array([-0.2, 0.0, 0.0])
    resp = step_response(full_system_ss(ref_prop, spec_ctrl, ref_rep), u0,
                         t_end=110.0, dt=0.02)
    steady = steady_state_omega(ref_prop, spec_ctrl, u0, ref_rep)
    fit = fit_envelope(resp, np.full(3, steady))
    bound = vi_rate_bound(ref_rep, db, m_v)
    assert fit.rate <= 1.05 * bound.omega_n


def test_fs_min_damping_monotone_linear_then_saturated(params):
    lam_n = 4967.96
    sat = 2 * math.sqrt(lam_n * params.m) - params.d - params.d_t
    slope = 1.0 / (2 * math.sqrt(lam_n * params.m))
    grid = np.linspace(0.0, sat * 1.4, 300)
    vals = [fs_min_damping(params, db, lam_n) for db in grid]
    assert all(b >= a - 1e-15 for a, b in zip(vals, vals[1:]))
    linear = (params.d + grid + params.d_t) * slope
    assert np.allclose(vals, np.where(grid < sat, linear, 1.0), rtol=1e-12)


def test_fs_min_decay_unimodal(params):
    lam2 = 151.47
    peak = 2 * math.sqrt(lam2 * params.m) - params.d - params.d_t
    rising = np.linspace(0.0, peak, 120)
    falling = np.linspace(peak, 4 * peak, 120)
    up = [fs_min_decay(params, db, lam2) for db in rising]
    down = [fs_min_decay(params, db, lam2) for db in falling]
    # Linear rise at slope 1/(2m) up to the peak, strict decrease after.
    assert np.allclose(np.diff(up) / np.diff(rising), 1.0 / (2 * params.m),
                       rtol=1e-9)
    assert all(b < a for a, b in zip(down, down[1:]))
    assert max(up) == pytest.approx(math.sqrt(lam2 / params.m), rel=1e-9)
