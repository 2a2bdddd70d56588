import json
import math
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from thzqd import CavityMode, couplings, vacuum_field
from thzqd.gate import (CnotOptions, gate_fidelity, has_interior_minimum, ideal_gate,
                        level_phase, phase_optimized_fidelity, plan_cnot, simulate_gate,
                        write_trajectory_csv)


def test_plan_full_sequence(points, coupling_table, model):
    seq = plan_cnot(points, coupling_table, CnotOptions(), model)
    roles = [s.role for s in seq.segments]
    assert roles == ["laser_rotation", "cavity_pi", "two_photon", "cavity_pi", "laser_rotation"]
    assert [s.dot_id for s in seq.segments] == [1, 0, 1, 0, 1]
    ps = [s.plateau_duration for s in seq.segments]
    assert ps[0] < 0.02 and ps[4] < 0.03  # a few ps
    assert ps[1] == pytest.approx(3.3, rel=0.05) and ps[3] == ps[1]
    assert ps[2] == pytest.approx(25.0, rel=0.3)
    assert seq.segments[2].target_field == points.e_lc


def test_plan_kernel_only(points, coupling_table):
    full = plan_cnot(points, coupling_table, CnotOptions(compensate=False))
    kern = plan_cnot(points, coupling_table, CnotOptions(kernel_only=True, compensate=False))
    assert kern.segments == full.segments[1:4]
    assert kern.meta["mode"] == "kernel"


def test_doubling_vacuum_field_halves_pi_pulses(points, cavity, laser, coupling_table):
    c2 = couplings(points, cavity, laser, e_vac=2 * vacuum_field(cavity))
    opt = CnotOptions(kernel_only=True, compensate=False)
    a = plan_cnot(points, coupling_table, opt).segments
    b = plan_cnot(points, c2, opt).segments
    for i in (0, 2):
        assert b[i].plateau_duration == pytest.approx(a[i].plateau_duration / 2, rel=1e-12)


def test_phase_compensation(points, coupling_table, model):
    seq = plan_cnot(points, coupling_table, CnotOptions(), model)
    res = seq.meta["residual_phases"]
    assert abs(res["storage"]) < 1e-9 and abs(res["laser_phase"]) < 1e-9
    # the added delays never exceed one idle period
    d1 = abs(model.detuning1(0.0))
    assert 0 <= seq.segments[2].post_delay < 2 * math.pi / d1


def test_level_phase_matches_propagator_bookkeeping(points, coupling_table, effective_model):
    seq = plan_cnot(points, coupling_table, CnotOptions(kernel_only=True), effective_model)
    ev = simulate_gate(seq, effective_model)[1]
    b = effective_model.basis
    assert ev.bare_phase[b.index(1, 0, 0)] == pytest.approx(
        level_phase(effective_model, seq, 0, 1), rel=1e-9)
    assert ev.bare_phase[b.index(0, 2, 0)] == pytest.approx(
        level_phase(effective_model, seq, 1, 2), rel=1e-9)


def test_ideal_gates():
    assert gate_fidelity(ideal_gate("full"), ideal_gate("full")) == 1.0
    assert gate_fidelity(ideal_gate("kernel"), np.eye(4)) == pytest.approx(0.25)


@settings(max_examples=20, deadline=None)
@given(st.lists(st.floats(-math.pi, math.pi), min_size=4, max_size=4), st.floats(-3, 3))
def test_z_phases_are_optimized_away(ph, glob):
    a, b, c, d = ph
    pre = np.exp(1j * np.array([0, b, a, a + b]))
    post = np.exp(1j * np.array([0, d, c, c + d]))
    for mode in ("kernel", "full"):
        v = ideal_gate(mode)
        m = np.exp(1j * glob) * post[:, None] * v * pre[None, :]
        raw = gate_fidelity(m, v)
        opt, _ = phase_optimized_fidelity(m, v)
        assert raw <= opt + 1e-12
        assert opt == pytest.approx(1.0, abs=1e-9)


def test_effective_square_kernel_phase_pattern(points, coupling_table, effective_model):
    seq = plan_cnot(points, coupling_table, CnotOptions(kernel_only=True, rise_time=0.0),
                    effective_model)
    rep, _ = simulate_gate(seq, effective_model)
    m = rep.truth_table
    np.testing.assert_allclose(m[:, :2], np.eye(4)[:, :2], atol=1e-3)
    ph = rep.column_phases()
    assert abs(ph[2]) < 0.05 and abs(ph[3]) < 0.05
    assert abs(m[2, 2]) == pytest.approx(1, abs=1e-3) and abs(m[3, 3]) == pytest.approx(1, abs=1e-3)
    assert rep.raw_fidelity <= rep.fidelity <= 1.0
    assert rep.leakage >= 0


@pytest.fixture(scope="module")
def full_kernel(points, coupling_table, calibrated):
    opt, _, model = calibrated
    seq = plan_cnot(points, coupling_table, replace(opt, rise_time=0.01), model)
    return simulate_gate(seq, model)[0], seq, model


def test_full_model_kernel(full_kernel):
    rep = full_kernel[0]
    assert rep.fidelity > 0.99
    assert rep.raw_fidelity <= rep.fidelity <= 1.0
    assert 0 <= rep.leakage < 0.01
    assert rep.norm_drift < 1e-6
    assert rep.orthonormality_error < 1e-6


def test_effective_and_full_agree(full_kernel, points, coupling_table, effective_model):
    seq = plan_cnot(points, coupling_table, CnotOptions(kernel_only=True), effective_model)
    eff = simulate_gate(seq, effective_model)[0]
    assert abs(eff.fidelity - full_kernel[0].fidelity) < 0.01


def test_fock_cutoff_stability(full_kernel):
    rep, seq, model = full_kernel
    bigger = model.with_(cavity=CavityMode(fock_cutoff=3))
    assert abs(simulate_gate(seq, bigger)[0].fidelity - rep.fidelity) < 1e-4


@pytest.mark.slow
def test_full_model_cnot(points, coupling_table, calibrated):
    opt, _, model = calibrated
    seq = plan_cnot(points, coupling_table, replace(opt, kernel_only=False), model)
    rep = simulate_gate(seq, model)[0]
    assert rep.mode == "full"
    assert rep.fidelity > 0.99


def test_report_serialization(full_kernel):
    d = json.loads(full_kernel[0].to_json())
    assert len(d["truth_table"]["re"]) == 4
    assert d["timing"][1]["role"] == "two_photon"


def test_trajectory_csv(tmp_path, points, coupling_table, effective_model):
    seq = plan_cnot(points, coupling_table, CnotOptions(kernel_only=True, rise_time=0.0),
                    effective_model)
    _, ev = simulate_gate(seq, effective_model, sample=True, sample_dt=1.0)
    p = tmp_path / "traj.csv"
    write_trajectory_csv(p, ev, effective_model)
    rows = p.read_text().splitlines()
    assert rows[0].startswith("t_ns,in0_p00")
    assert len(rows) > 30
    t = [float(r.split(",")[0]) for r in rows[1:]]
    assert np.all(np.diff(t) >= 0)


def test_interior_minimum_helper():
    rows = [{"error": e} for e in (0.5, 0.01, 0.001, 0.002)]
    assert has_interior_minimum(rows)
    assert not has_interior_minimum(rows[:3])


@pytest.mark.slow
def test_adiabaticity_scan_has_interior_optimum(points, coupling_table, calibrated):
    from thzqd.gate import adiabaticity_scan
    opt, _, model = calibrated
    rows = adiabaticity_scan(points, coupling_table, model, [0.001, 0.03, 0.1], opt)
    err = [r["error"] for r in rows]
    assert err[0] > err[1] < err[2]
    assert has_interior_minimum(rows)
