"""CNOT pulse planning, gate simulation and scoring.

The controlled-phase kernel is: a pi pulse on the control at e_c (swaps an
excitation into the cavity), a 2pi two-photon pulse on the target at e_lc
(flips the sign of |target 0, one photon>), and the control pi pulse again.
Wrapping it in pi/2 and 3pi/2 laser rotations of the target at e_l makes a
CNOT up to single-qubit Z phases.

Truth tables are reported in the bare frame: each basis state's phase from
the uncoupled, Stark-shifted dot energies along the planned field history is
removed. Idle delays are chosen so that the phase mismatch between a stored
cavity photon and the control's excited level is a multiple of 2 pi, and so
that both target rotations see the same laser phase.
"""

from __future__ import annotations

import csv
import json
import logging
import math
from dataclasses import asdict, dataclass, field, replace
from itertools import product

import numpy as np
from scipy.optimize import brentq, minimize

from .constants import HBAR_MEV_NS
from .errors import ConfigurationError, NumericalError
from .hamiltonian import SystemModel
from .propagation import PulseSegment, PulseSequence, Propagator

log = logging.getLogger(__name__)

_GL_X, _GL_W = np.polynomial.legendre.leggauss(64)


@dataclass(frozen=True)
class CnotOptions:
    kernel_only: bool = False
    rise_time: float = 0.01  # ns
    control: int = 0
    target: int = 1
    min_delay: float = 0.0  # ns
    rotation_laser_scale: float = 1.0
    two_photon_field: float | None = None  # override e_lc (calibrated height)
    two_photon_rate: float | None = None  # override Otilde (calibrated rate)
    compensate: bool = True
    laser_gate: bool = True  # laser only on during field plateaus
    target_phase: float = 0.0  # kernel Z phase on the target, absorbed into the laser phase


def _ramp_integral(fn, e_top, rise):
    """Integral over a linear 0 -> e_top ramp of duration ``rise`` of fn(e)."""
    if rise <= 0 or e_top == 0:
        return 0.0
    e = 0.5 * e_top * (_GL_X + 1)
    return float(0.5 * rise * np.sum(_GL_W * fn(e)))


def level_phase(model: SystemModel, sequence: PulseSequence, dot: int, level: int,
                t_end: float | None = None) -> float:
    """Bare phase integral of one dot level over [0, t_end] (rad)."""
    rate = model.detuning1 if level == 1 else model.detuning2
    r0 = float(rate(0.0))
    t_end = sequence.duration if t_end is None else t_end
    total, t = 0.0, 0.0
    for seg in sequence.segments:
        if t >= t_end - 1e-9 * max(1.0, t_end):
            break
        if seg.duration > t_end - t + 1e-9 * max(1.0, t_end):
            raise ConfigurationError("level_phase only supports segment boundaries")
        if seg.dot_id == dot:
            ramp = _ramp_integral(rate, seg.target_field, seg.rise_time)
            total += 2 * ramp + float(rate(seg.target_field)) * seg.plateau_duration
            total += r0 * seg.post_delay
        else:
            total += r0 * seg.duration
        t += seg.duration
    return total


def plan_cnot(points, coupling_table: dict, options: CnotOptions | None = None,
              model: SystemModel | None = None) -> PulseSequence:
    """Five-segment CNOT program (or the three-segment kernel).

    ``coupling_table`` is the dict returned by :func:`thzqd.cavity.couplings`.
    ``model`` supplies the field-dependent level energies used by the
    phase-compensation delays; without it the delays are ``min_delay``.
    """
    opt = options or CnotOptions()
    cc = coupling_table["cavity"]
    cl = coupling_table["laser"]
    ct = coupling_table["two_photon"]
    rot_rate = cl.Ol01 * opt.rotation_laser_scale
    rate_tp = opt.two_photon_rate or ct.Otilde
    e_tp = opt.two_photon_field if opt.two_photon_field is not None else points.e_lc
    if rate_tp <= 0 or cc.g01 <= 0 or rot_rate <= 0:
        raise ConfigurationError("non-positive coupling in CNOT plan")
    dt, d0 = opt.rise_time, opt.min_delay
    ctrl, tgt = opt.control, opt.target
    pi_c = PulseSegment(ctrl, points.e_c, math.pi / (2 * cc.g01), dt, False, d0, "cavity_pi")
    tp = _laser_segment(tgt, e_tp, math.pi / rate_tp, opt, d0, "two_photon", 1.0)
    kernel = [pi_c, tp, replace(pi_c)]
    segs = list(kernel)
    if not opt.kernel_only:
        r1 = _laser_segment(tgt, points.e_l, math.pi / (4 * rot_rate), opt, d0,
                            "laser_rotation", opt.rotation_laser_scale)
        r2 = _laser_segment(tgt, points.e_l, 3 * math.pi / (4 * rot_rate), opt, 0.0,
                            "laser_rotation", opt.rotation_laser_scale)
        segs = [r1] + kernel + [r2]
    n_dots = max(ctrl, tgt) + 1
    meta = {"mode": "kernel" if opt.kernel_only else "full", "control": ctrl,
            "target": tgt, "residual_phases": {}}
    seq = PulseSequence(tuple(segs), n_dots, meta)
    if model is None or not opt.compensate:
        return seq
    return _compensate(seq, model, opt)


def _laser_segment(dot, e, area_time, opt, delay, role, scale):
    """Laser pulse whose envelope area equals ``area_time`` at full amplitude.

    With gating, the envelope ramps over min(rise_time, area_time) inside
    the plateau, which is lengthened by that ramp to keep the area.
    """
    lr = min(opt.rise_time, area_time) if opt.laser_gate and opt.rise_time > 0 else None
    plateau = area_time + (lr or 0.0)
    return PulseSegment(dot, e, plateau, opt.rise_time, True, delay, role, scale, lr)


def _compensate(seq: PulseSequence, model: SystemModel, opt: CnotOptions) -> PulseSequence:
    segs = list(seq.segments)
    k = 1 if seq.meta["mode"] == "full" else 0  # index of first control pi pulse
    r0 = float(model.detuning1(0.0))
    # photon storage: from the end of the first pi plateau to the start of the second
    pi_c, tp = segs[k], segs[k + 1]
    ramp = _ramp_integral(model.detuning1, pi_c.target_field, pi_c.rise_time)
    base = 2 * ramp + r0 * (pi_c.post_delay + tp.duration)
    extra = _delay_for(base, r0)
    segs[k + 1] = replace(tp, post_delay=tp.post_delay + extra)
    residual = {"storage": float(_wrap(base + r0 * extra))}
    if seq.meta["mode"] == "full":
        tgt = opt.target
        t5 = sum(s.duration for s in segs[:-1])
        trial = PulseSequence(tuple(segs[:-1]), seq.n_dots, seq.meta)
        chi = model.nu * t5 - level_phase(model, trial, tgt, 1) + opt.target_phase
        extra4 = _delay_for(chi, model.nu - r0)
        segs[-2] = replace(segs[-2], post_delay=segs[-2].post_delay + extra4)
        residual["laser_phase"] = float(_wrap(chi + (model.nu - r0) * extra4))
    meta = dict(seq.meta, residual_phases=residual)
    worst = max(abs(v) for v in residual.values())
    if worst > 1e-6:
        log.warning("phase compensation left residual phases %s", residual)
    return PulseSequence(tuple(segs), seq.n_dots, meta)


def _wrap(phi):
    return (phi + math.pi) % (2 * math.pi) - math.pi


def _delay_for(phase, rate):
    """Smallest x >= 0 with phase + rate * x = 0 (mod 2 pi)."""
    if rate == 0:
        return 0.0
    x = (-phase / rate) % (2 * math.pi / abs(rate))
    return float(x)


# --- two-photon calibration -------------------------------------------------

def floquet_block(model: SystemModel, e: float, period_steps=256):
    """Effective 2x2 generator on {|0,1>, |2,0>} from the one-period propagator.

    Single dot, laser at full amplitude. The two Floquet states with most
    weight on the pair are projected onto it and orthonormalized; returns
    ``(detuning, coupling)`` in rad/ns, the diagonal difference
    E(|2,0>) - E(|0,1>) and the modulus of the off-diagonal element.
    """
    from .propagation import Piece
    single = model.with_(n_dots=1)
    prop = Propagator(single, period_steps=period_steps)
    f = np.array([e])
    period = 2 * math.pi / abs(single.nu)
    piece = Piece(0.0, period, f, f, 1.0, 1.0, 0, "two_photon")
    u = prop._cf4(0.0, period, period_steps, piece)
    lam, vecs = np.linalg.eig(u)
    b = single.basis
    rows = [b.index(0, 1), b.index(2, 0)]
    w = np.sum(np.abs(vecs[rows]) ** 2, axis=0)
    pair = np.argsort(w)[-2:]
    eps = -np.angle(lam[pair]) / period
    eps[1] = eps[0] + _wrap((eps[1] - eps[0]) * period) / period
    m = vecs[np.ix_(rows, pair)]
    uu, _, vh = np.linalg.svd(m)
    m = uu @ vh  # nearest unitary
    h = m @ np.diag(eps) @ m.conj().T
    return float((h[1, 1] - h[0, 0]).real), float(abs(h[0, 1]))


def calibrate_two_photon(model: SystemModel, e_lc: float, window=0.01, xtol=1e-13):
    """Field and rate of the dressed two-photon resonance near ``e_lc``.

    The laser's ac Stark shifts move the |0,1> <-> |2,0> resonance away from
    the bare crossing. The dressed resonance is where the effective Floquet
    detuning of the pair vanishes; the effective coupling there is the
    dressed Rabi rate.
    """
    f = lambda e: floquet_block(model, e)[0]
    lo, hi = e_lc - window, e_lc + window
    if f(lo) * f(hi) > 0:
        raise NumericalError("two-photon resonance not bracketed near e_lc")
    e = brentq(f, lo, hi, xtol=xtol, rtol=4 * np.finfo(float).eps)
    det, rate = floquet_block(model, e)
    return {"field": float(e), "rate": rate, "residual_detuning": det,
            "shift": float(e - e_lc)}


# --- scoring -----------------------------------------------------------------

def ideal_gate(mode: str) -> np.ndarray:
    if mode == "kernel":
        return np.diag([1, 1, 1, -1]).astype(complex)
    if mode == "full":
        return np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], complex)
    raise ConfigurationError(f"unknown gate mode {mode!r}")


def gate_fidelity(m: np.ndarray, ideal: np.ndarray) -> float:
    """|Tr(V^dag M)|^2 / d^2 on the computational block."""
    d = ideal.shape[0]
    return float(abs(np.trace(ideal.conj().T @ m)) ** 2 / d**2)


def _z_phases(angles):
    a, b = angles
    return np.exp(1j * np.array([0.0, b, a, a + b]))


def phase_optimized_fidelity(m: np.ndarray, ideal: np.ndarray):
    """Fidelity maximized over Z phases on each qubit before and after the gate.

    Returns ``(fidelity, (pre_a, pre_b, post_a, post_b))``. The global phase
    drops out of the modulus.
    """
    def f(x):
        post = _z_phases(x[2:])
        pre = _z_phases(x[:2])
        return -gate_fidelity(post[:, None] * m * pre[None, :], ideal)

    best = (f(np.zeros(4)), np.zeros(4))
    for start in product((0.0, math.pi / 2, math.pi, -math.pi / 2), repeat=2):
        x0 = np.array([0.0, 0.0, *start])
        r = minimize(f, x0, method="BFGS", options={"gtol": 1e-12})
        if r.fun < best[0]:
            best = (r.fun, r.x)
    return float(-best[0]), tuple(float(_wrap(v)) for v in best[1])


@dataclass
class GateReport:
    mode: str
    model: str
    truth_table: np.ndarray  # 4x4, bare frame, rows/cols 00, 01, 10, 11 (control, target)
    raw_fidelity: float
    fidelity: float  # Z-phase optimized
    z_phases: tuple
    leakage: float
    norm_drift: float
    orthonormality_error: float
    timing: list
    duration: float
    residual_phases: dict = field(default_factory=dict)
    notes: dict = field(default_factory=dict)

    def column_phases(self) -> np.ndarray:
        """Phase of each diagonal (or ideal-position) amplitude relative to the ideal."""
        ideal = ideal_gate(self.mode)
        rows = np.argmax(np.abs(ideal), axis=0)
        amps = self.truth_table[rows, np.arange(4)]
        ref = ideal[rows, np.arange(4)]
        return np.angle(amps / ref)

    def to_dict(self):
        tt = self.truth_table
        return {
            "mode": self.mode, "model": self.model,
            "truth_table": {"re": tt.real.tolist(), "im": tt.imag.tolist()},
            "truth_table_abs": np.abs(tt).tolist(),
            "truth_table_phase_rad": np.angle(tt).tolist(),
            "column_phase_error_rad": self.column_phases().tolist(),
            "raw_fidelity": self.raw_fidelity, "fidelity": self.fidelity,
            "z_phases": list(self.z_phases), "leakage": self.leakage,
            "norm_drift": self.norm_drift,
            "orthonormality_error": self.orthonormality_error,
            "duration_ns": self.duration, "timing": self.timing,
            "residual_phases": self.residual_phases, "notes": self.notes,
        }

    def to_json(self, **kw):
        return json.dumps(self.to_dict(), **kw)


def timing_table(seq: PulseSequence):
    rows = []
    for start, s in zip(seq.start_times(), seq.segments):
        rows.append({"start_ns": start, "dot": s.dot_id, "role": s.role,
                     "field_MVpm": s.target_field, "rise_ns": s.rise_time,
                     "plateau_ns": s.plateau_duration, "post_delay_ns": s.post_delay,
                     "laser_on": s.laser_on, "laser_scale": s.laser_scale})
    return rows


def simulate_gate(sequence: PulseSequence, model: SystemModel, dt_max=1e-3,
                  sample=False, propagator: Propagator | None = None, sample_dt=None):
    """Propagate the four computational states (cavity empty) and score them.

    Returns ``(GateReport, Evolution)``.
    """
    mode = sequence.meta.get("mode", "kernel")
    ctrl = sequence.meta.get("control", 0)
    tgt = sequence.meta.get("target", 1)
    b = model.basis
    if b.n_dots != 2:
        raise ConfigurationError("gate simulation needs a two-dot model")
    cols = []
    for c_bit, t_bit in product((0, 1), repeat=2):
        lab = [0] * b.n_dots
        lab[ctrl], lab[tgt] = c_bit, t_bit
        cols.append(b.index(*lab, 0))
    psi0 = np.zeros((b.dim, 4), complex)
    psi0[cols, range(4)] = 1.0
    prop = propagator or Propagator(model, dt_max)
    ev = prop.evolve(psi0, sequence, sample, sample_dt)
    out = ev.in_bare_frame()
    m = out[cols, :]
    ideal = ideal_gate(mode)
    gram = out.conj().T @ out
    report = GateReport(
        mode=mode, model=model.model, truth_table=m,
        raw_fidelity=gate_fidelity(m, ideal),
        fidelity=0.0, z_phases=(), leakage=float(1 - np.mean(np.sum(np.abs(m) ** 2, axis=0))),
        norm_drift=ev.norm_drift,
        orthonormality_error=float(np.max(np.abs(gram - np.eye(4)))),
        timing=timing_table(sequence), duration=sequence.duration,
        residual_phases=dict(sequence.meta.get("residual_phases", {})))
    report.fidelity, report.z_phases = phase_optimized_fidelity(m, ideal)
    report.fidelity = max(report.fidelity, report.raw_fidelity)
    return report, ev


def write_trajectory_csv(path, evolution, model: SystemModel, columns=None):
    """t_ns, |amplitude|^2 of each computational state, photon probability.

    ``evolution`` must come from a sampled run; one block of columns per
    propagated initial state.
    """
    b = model.basis
    comp = b.computational_indices()
    n_ph = np.diag(b.photon_number()).real
    labels = ["".join(map(str, b.labels()[i][:-1])) for i in comp]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        first = evolution.samples[0]
        ncol = first.shape[1] if first.ndim == 2 else 1
        cols = range(ncol) if columns is None else columns
        head = ["t_ns"]
        for c in cols:
            head += [f"in{c}_p{lab}" for lab in labels] + [f"in{c}_photon"]
        w.writerow(head)
        for t, s in zip(evolution.times, evolution.samples):
            s = s if s.ndim == 2 else s[:, None]
            row = [t]
            for c in cols:
                p = np.abs(s[:, c]) ** 2
                row += list(p[comp]) + [float(np.sum(p[n_ph > 0]))]
            w.writerow([f"{x:.6g}" for x in row])


def calibrate_cnot(points, coupling_table: dict, model: SystemModel,
                   options: CnotOptions | None = None, dt_max=1e-3):
    """Options with the dressed two-photon pulse and the target phase filled in.

    Only needed for the full model, whose laser ac Stark shifts move the
    two-photon resonance and imprint a Z phase on the target during the
    kernel. Returns ``(options, info)``.
    """
    opt = options or CnotOptions()
    cal = calibrate_two_photon(model, points.e_lc)
    opt = replace(opt, two_photon_field=cal["field"], two_photon_rate=cal["rate"])
    kernel = plan_cnot(points, coupling_table, replace(opt, kernel_only=True), model)
    rep, _ = simulate_gate(kernel, model, dt_max)
    m = rep.truth_table
    phase = float(np.angle(m[1, 1] / m[0, 0]))
    info = dict(cal, target_phase=phase, kernel_fidelity=rep.fidelity)
    return replace(opt, target_phase=phase), info


def adiabaticity_scan(points, coupling_table: dict, model: SystemModel, rise_times,
                      options: CnotOptions | None = None, dt_max=1e-3):
    """Kernel gate error 1 - F (phase optimized) against the ramp time.

    Short ramps excite the dots non-adiabatically; long ramps add coupling
    during the ramps that the plateau durations do not account for, so the
    error has an interior minimum.
    """
    opt = replace(options or CnotOptions(), kernel_only=True)
    rows = []
    for dt in rise_times:
        seq = plan_cnot(points, coupling_table, replace(opt, rise_time=float(dt)), model)
        rep, _ = simulate_gate(seq, model, dt_max)
        rows.append({"rise_time_ns": float(dt), "error": 1 - rep.fidelity,
                     "leakage": rep.leakage})
    return rows


def has_interior_minimum(rows) -> bool:
    err = [r["error"] for r in rows]
    i = int(np.argmin(err))
    return 0 < i < len(err) - 1
