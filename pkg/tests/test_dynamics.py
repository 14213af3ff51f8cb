import math

import numpy as np
import pytest

from gridshape.netmodel import representative_params
from gridshape.dynamics import (ControllerSpec, StateSpace, controller_tf,
                                fs_char_poly, full_system_ss, generator_tf,
                                modal_step_response, mode_subsystem,
                                per_bus_specs, steady_state_omega,
                                step_response, tf_to_ss)
from gridshape.netmodel import case_spectrum
from conftest import match_pole_sets, random_connected_case


@pytest.fixture(scope="module")
def rep_print():
    """Representative machine with the headline rounded parameter set."""
    from gridshape.netmodel import RepresentativeParams
    return RepresentativeParams(m=15.37, d=4.37, d_t=15.0, tau=2.19,
                                r=np.ones(3))


def test_generator_tf_coefficients(rep_print):
    g = generator_tf(15.37, 4.37, 15.0, 2.19)
    # Direct coefficient arithmetic: (d+d_t, m+d*tau, m*tau).
    assert g.den == pytest.approx((19.37, 15.37 + 4.37 * 2.19,
                                   15.37 * 2.19), rel=1e-12)
    assert g.dc_gain() == pytest.approx(1.0 / 19.37, rel=1e-12)
    # Strictly proper: vanishes at infinity.
    assert abs(g(1e9)) < 1e-6


def test_controller_tf_fs_dc_gain():
    c = controller_tf(ControllerSpec("fs", d_b=35.89), d_t=15.0, tau=2.19)
    assert c(0) == pytest.approx(-35.89, rel=1e-12)


def test_controller_tf_vi_is_affine():
    c = controller_tf(ControllerSpec("vi", d_b=35.89, m_v=264.16),
                      d_t=15.0, tau=2.19)
    assert c.num == pytest.approx((-35.89, -264.16))
    for s in (0.0, 1.0, 10.0):
        assert c(s) == pytest.approx(-264.16 * s - 35.89, rel=1e-12)


def test_controller_tf_none_is_zero():
    c = controller_tf(ControllerSpec("none"), d_t=15.0, tau=2.19)
    assert c(3.7) == 0.0


def test_mode_subsystem_fs_main_mode(rep_print):
    z1 = mode_subsystem(ControllerSpec("fs", d_b=35.89), rep_print, 0.0)
    # 1/(m s + d + d_b + d_t)
    assert z1.num == pytest.approx((1.0,))
    assert z1.den == pytest.approx((4.37 + 35.89 + 15.0, 15.37), rel=1e-12)


def test_mode_subsystem_fs_zero_at_origin(rep_print):
    zk = mode_subsystem(ControllerSpec("fs", d_b=35.89), rep_print, 151.47)
    assert zk(0) == 0.0
    assert zk.num[0] == 0.0


def test_mode_subsystem_vi_main_mode_dc(rep_print):
    spec = ControllerSpec("vi", d_b=35.89, m_v=264.16)
    z1 = mode_subsystem(spec, rep_print, 0.0)
    assert z1(0) == pytest.approx(1.0 / (4.37 + 35.89 + 15.0), rel=1e-12)


def test_mode_subsystem_matches_loop_construction(rep_print):
    # Oracle: z_k = g / (1 + g (lam/s - c)) evaluated pointwise.
    for spec in (ControllerSpec("fs", d_b=12.0),
                 ControllerSpec("vi", d_b=12.0, m_v=150.0),
                 ControllerSpec("none")):
        g = generator_tf(rep_print.m, rep_print.d, rep_print.d_t,
                         rep_print.tau)
        c = controller_tf(spec, rep_print.d_t, rep_print.tau)
        for lam in (13.7, 890.2):
            zk = mode_subsystem(spec, rep_print, lam)
            for s in (0.3 + 1.1j, -0.2 + 3.0j, 2.0 + 0.0j):
                direct = g(s) / (1 + g(s) * (lam / s - c(s)))
                assert zk(s) == pytest.approx(direct, rel=1e-10)


def test_full_system_zero_disturbance(ref_prop, ref_rep):
    sys_ss = full_system_ss(ref_prop, ControllerSpec("fs", d_b=35.89),
                            ref_rep)
    resp = step_response(sys_ss, np.zeros(3), t_end=2.0, dt=0.05)
    assert np.all(resp.omega == 0.0)
    assert np.all(resp.p_inv == 0.0)
    assert np.all(resp.coi == 0.0)


def test_full_system_eigenvalues_are_modal_poles(ref_prop, ref_rep):
    """Pole-set identity between the assembled system and the mode family."""
    db = 35.89
    spec_ctrl = ControllerSpec("fs", d_b=db)
    spectrum = case_spectrum(ref_prop, ref_rep)
    sys_ss = full_system_ss(ref_prop, spec_ctrl, ref_rep)
    got = np.linalg.eigvals(sys_ss.A)
    expected = []
    for lam in spectrum.lam[1:]:
        expected.extend(np.roots(fs_char_poly(ref_rep, db, float(lam))[::-1]))
    expected.append(-(ref_rep.d + db + ref_rep.d_t) / ref_rep.m)  # COI pole
    expected.extend([-1.0 / ref_rep.tau] * (2 * ref_prop.n))  # canceled pair
    match_pole_sets(got, expected, rtol=1e-7)


def test_full_system_heterogeneous_steady_state(ref_case, ref_rep):
    """Final-value theorem on the assembled state space."""
    db = 35.89
    specs = per_bus_specs(ControllerSpec("fs", d_b=db), ref_rep)
    sys_ss = full_system_ss(ref_case, specs, ref_rep)
    u0 = np.array([-0.2, 0.0, 0.0])
    y_ss = (sys_ss.D - sys_ss.C @ np.linalg.solve(sys_ss.A, sys_ss.B)) @ u0
    denom = sum(b.d + b.d_t for b in ref_case.buses) \
        + sum(s.d_b for s in specs)
    expected = -0.2 / denom
    assert y_ss[:3] == pytest.approx(np.full(3, expected), rel=1e-9)
    assert steady_state_omega(ref_case, specs, u0) == pytest.approx(
        expected, rel=1e-12)


def test_step_response_scalar_analytic():
    ss = StateSpace(A=[[-1.0]], B=[[1.0]], C=[[1.0]], D=[[0.0]])
    resp = step_response(ss, [1.0], t_end=5.0, dt=0.01)
    assert np.max(np.abs(resp.omega[0] - (1 - np.exp(-resp.t)))) < 1e-10


def test_step_response_onset_shifts(ref_prop, ref_rep):
    spec_ctrl = ControllerSpec("fs", d_b=10.0)
    sys_ss = full_system_ss(ref_prop, spec_ctrl, ref_rep)
    u0 = np.array([-0.2, 0.1, 0.0])
    base = step_response(sys_ss, u0, t_end=4.0, dt=0.02)
    shifted = step_response(sys_ss, u0, t_end=5.0, dt=0.02, onset=1.0)
    assert np.all(shifted.omega[:, :50] == 0.0)
    k = int(round(1.0 / 0.02))
    assert shifted.omega[:, k:k + base.t.size] == pytest.approx(
        base.omega, abs=1e-12)


def test_fs_coi_matches_first_order_form(ref_prop, ref_rep):
    db = 35.89
    spec_ctrl = ControllerSpec("fs", d_b=db)
    sys_ss = full_system_ss(ref_prop, spec_ctrl, ref_rep)
    u0 = np.array([-0.2, 0.0, 0.0])
    resp = step_response(sys_ss, u0, t_end=15.0, dt=0.01)
    wss = steady_state_omega(ref_prop, spec_ctrl, u0, ref_rep)
    rate = (ref_rep.d + db + ref_rep.d_t) / ref_rep.m
    analytic = wss * (1 - np.exp(-rate * resp.t))
    assert np.max(np.abs(resp.coi - analytic)) < 1e-8


def test_fs_coi_monotone_no_nadir(ref_prop, ref_rep):
    for db in (0.0, 5.0, 35.89):
        sys_ss = full_system_ss(ref_prop, ControllerSpec("fs", d_b=db),
                                ref_rep)
        resp = step_response(sys_ss, np.array([-0.2, 0.0, 0.0]),
                             t_end=20.0, dt=0.01)
        assert np.all(np.diff(resp.coi) <= 1e-14)


def test_modal_coi_only_for_aligned_disturbance(ref_prop, ref_rep):
    spectrum = case_spectrum(ref_prop, ref_rep)
    spec_ctrl = ControllerSpec("fs", d_b=8.0)
    u0 = spectrum.r * 0.1     # aligned with the null-mode preimage
    resp = modal_step_response(spec_ctrl, ref_rep, spectrum, u0,
                               t_end=5.0, dt=0.05)
    spread = resp.omega - resp.coi[None, :]
    assert np.max(np.abs(spread)) < 1e-12


def test_modal_matches_direct_on_random_proportional_cases(subtests=None):
    rng = np.random.default_rng(42)
    for trial in range(12):
        n = int(rng.integers(2, 9))
        case = random_connected_case(rng, n, proportional=True)
        rep = representative_params(case)
        spectrum = case_spectrum(case, rep)
        kind = ["fs", "vi", "none"][trial % 3]
        if kind == "vi":
            from gridshape.tuning import vi_mv_min
            db = float(rng.uniform(0, 30))
            spec_ctrl = ControllerSpec("vi", d_b=db,
                                       m_v=vi_mv_min(rep, db)
                                       * float(rng.uniform(1.0, 1.6)))
        elif kind == "fs":
            spec_ctrl = ControllerSpec("fs", d_b=float(rng.uniform(0, 60)))
        else:
            spec_ctrl = ControllerSpec("none")
        u0 = rng.uniform(-0.5, 0.5, size=n)
        direct = step_response(full_system_ss(case, spec_ctrl, rep), u0,
                               t_end=8.0, dt=0.02)
        modal = modal_step_response(spec_ctrl, rep, spectrum, u0,
                                    t_end=8.0, dt=0.02)
        assert np.max(np.abs(direct.omega - modal.omega)) < 1e-6
        assert np.max(np.abs(direct.coi - modal.coi)) < 1e-6
        assert np.max(np.abs(direct.p_inv - modal.p_inv)) < 1e-6


def test_linearity(ref_prop, ref_rep):
    spectrum = case_spectrum(ref_prop, ref_rep)
    spec_ctrl = ControllerSpec("fs", d_b=20.0)
    u = np.array([-0.2, 0.05, 0.0])
    w = np.array([0.1, 0.0, -0.3])
    kw = dict(t_end=6.0, dt=0.02)
    r_u = modal_step_response(spec_ctrl, ref_rep, spectrum, u, **kw)
    r_w = modal_step_response(spec_ctrl, ref_rep, spectrum, w, **kw)
    r_uw = modal_step_response(spec_ctrl, ref_rep, spectrum, u + w, **kw)
    assert np.max(np.abs(r_uw.omega - (r_u.omega + r_w.omega))) < 1e-9


def test_vi_coi_weights_include_virtual_inertia(ref_prop, ref_rep):
    spec_ctrl = ControllerSpec("vi", d_b=10.0, m_v=100.0)
    sys_ss = full_system_ss(ref_prop, spec_ctrl, ref_rep)
    expected = np.array([b.m for b in ref_prop.buses]) \
        + ref_rep.r * 100.0
    assert sys_ss.coi_weights == pytest.approx(expected, rel=1e-12)


def test_csv_serialization(ref_prop, ref_rep):
    sys_ss = full_system_ss(ref_prop, ControllerSpec("fs", d_b=5.0), ref_rep)
    resp = step_response(sys_ss, np.array([-0.1, 0.0, 0.0]), t_end=1.0,
                         dt=0.5)
    lines = resp.to_csv().strip().splitlines()
    assert lines[0] == "t,omega_1,omega_2,omega_3,coi,pinv_1,pinv_2,pinv_3"
    assert len(lines) == 1 + resp.t.size


def test_tf_to_ss_rejects_improper():
    from gridshape.dynamics import RationalTF
    with pytest.raises(ValueError):
        tf_to_ss(RationalTF(num=(0.0, 1.0, 2.0), den=(1.0, 1.0)))


def test_modal_parallelism_is_deterministic(ref_prop, ref_rep, monkeypatch):
    spectrum = case_spectrum(ref_prop, ref_rep)
    spec_ctrl = ControllerSpec("fs", d_b=20.0)
    u0 = np.array([-0.2, 0.1, 0.05])
    serial = modal_step_response(spec_ctrl, ref_rep, spectrum, u0,
                                 t_end=4.0, dt=0.02)
    monkeypatch.setenv("GRIDSHAPE_THREADS", "3")
    threaded = modal_step_response(spec_ctrl, ref_rep, spectrum, u0,
                                   t_end=4.0, dt=0.02)
    assert np.array_equal(serial.omega, threaded.omega)
    assert np.array_equal(serial.p_inv, threaded.p_inv)
