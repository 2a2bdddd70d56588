"""Pulse segments and time evolution under a :class:`SystemModel`.

A sequence is cut into pieces where every dot's field is either constant
or changing linearly. Linear ramps are integrated with classical fixed-step
RK4 (no renormalization; the step obeys dt <= 1/(50 w_max) with w_max an
upper bound on the generator's rates and frame frequencies). Constant
pieces are propagated exactly: by a matrix exponential when the generator
is time independent, otherwise by powers of the one-period propagator of
the residual (w_l - w_c) oscillation, itself built from 4th-order
commutator-free Magnus steps.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numba
import numpy as np
from scipy.linalg import schur

from .errors import ConfigurationError, NumericalError
from .hamiltonian import ROLES, CompositeState, SystemModel

NORM_TOL = 1e-6
_CF4_A1 = 0.25 + math.sqrt(3) / 6
_CF4_A2 = 0.25 - math.sqrt(3) / 6
_CF4_C = (0.5 - math.sqrt(3) / 6, 0.5 + math.sqrt(3) / 6)


@dataclass(frozen=True)
class PulseSegment:
    """Trapezoidal field pulse on one dot, followed by an idle delay.

    The field ramps linearly from 0 to ``target_field`` in ``rise_time``,
    holds for ``plateau_duration`` and ramps back. ``rise_time = 0`` gives a
    square pulse. With ``laser_on`` the laser amplitude (times
    ``laser_scale``) follows the same envelope, unless ``laser_rise`` is set:
    then the laser is off during the field ramps and ramps linearly on and
    off over ``laser_rise`` inside the plateau.
    """

    dot_id: int
    target_field: float
    plateau_duration: float
    rise_time: float = 0.01
    laser_on: bool = False
    post_delay: float = 0.0
    role: str = "cavity_pi"
    laser_scale: float = 1.0
    laser_rise: float | None = None

    def __post_init__(self):
        if self.laser_rise is not None and not (
                0 <= 2 * self.laser_rise <= self.plateau_duration):
            raise ConfigurationError("laser_rise must fit twice into the plateau")
        if self.rise_time < 0 or self.plateau_duration < 0 or self.post_delay < 0:
            raise ConfigurationError("segment times must be non-negative")
        if self.role not in ROLES:
            raise ConfigurationError(f"segment role must be one of {ROLES}")
        if not np.isfinite(self.target_field):
            raise ConfigurationError("segment target field must be finite")

    @property
    def duration(self) -> float:
        return 2 * self.rise_time + self.plateau_duration + self.post_delay


@dataclass(frozen=True)
class PulseSequence:
    segments: tuple
    n_dots: int = 2
    meta: dict = field(default_factory=dict, compare=False)

    @property
    def duration(self) -> float:
        return float(sum(s.duration for s in self.segments))

    def start_times(self):
        t, out = 0.0, []
        for s in self.segments:
            out.append(t)
            t += s.duration
        return out

    def pieces(self):
        """Constant-or-linear pieces covering the sequence."""
        out = []
        t = 0.0
        zero = np.zeros(self.n_dots)
        for seg in self.segments:
            if seg.dot_id >= self.n_dots:
                raise ConfigurationError(f"segment addresses dot {seg.dot_id}")
            top = zero.copy()
            top[seg.dot_id] = seg.target_field
            env = seg.laser_scale if seg.laser_on else 0.0
            if seg.laser_rise is None:
                plan = [(seg.rise_time, zero, top, 0.0, env),
                        (seg.plateau_duration, top, top, env, env),
                        (seg.rise_time, top, zero, env, 0.0)]
            else:
                lr = seg.laser_rise
                plan = [(seg.rise_time, zero, top, 0.0, 0.0),
                        (lr, top, top, 0.0, env),
                        (seg.plateau_duration - 2 * lr, top, top, env, env),
                        (lr, top, top, env, 0.0),
                        (seg.rise_time, top, zero, 0.0, 0.0)]
            plan.append((seg.post_delay, zero, zero, 0.0, 0.0))
            for i, (dur, f0, f1, l0, l1) in enumerate(plan):
                if dur <= 0:
                    continue
                idle = i == len(plan) - 1
                out.append(Piece(t, t + dur, f0, f1, l0, l1,
                                 None if idle else seg.dot_id,
                                 None if idle else seg.role))
                t += dur
        return out


@dataclass(frozen=True)
class Piece:
    t0: float
    t1: float
    field_start: np.ndarray
    field_end: np.ndarray
    laser_start: float
    laser_end: float
    active: int | None
    role: str | None

    @property
    def duration(self):
        return self.t1 - self.t0

    @property
    def is_ramp(self):
        return bool(np.any(self.field_start != self.field_end)
                    or self.laser_start != self.laser_end)

    def at(self, t):
        """Fields (n_dots, nt), field rates (n_dots, nt) and laser envelope (nt,)."""
        t = np.atleast_1d(t)
        frac = (t - self.t0) / self.duration
        f0 = self.field_start[:, None]
        f1 = self.field_end[:, None]
        fields = f0 + (f1 - f0) * frac[None, :]
        rates = np.broadcast_to((f1 - f0) / self.duration, fields.shape)
        env = self.laser_start + (self.laser_end - self.laser_start) * frac
        return fields, np.ascontiguousarray(rates), env


@dataclass
class Evolution:
    state: np.ndarray  # (D,) or (D, m), rotating frame
    bare_phase: np.ndarray  # (D,), integral of bare diagonal rates per basis state
    norm_drift: float
    times: list
    samples: list
    steps: int = 0

    def in_bare_frame(self) -> np.ndarray:
        """State with the bare (uncoupled, Stark-shifted) dynamical phases removed."""
        ph = np.exp(1j * self.bare_phase)
        return ph[:, None] * self.state if self.state.ndim == 2 else ph * self.state


@numba.njit(cache=True)
def _apply(coef, j, rows, cols, terms, facs, conj, x, out):
    out[:, :] = 0.0
    for r in range(rows.size):
        c = coef[terms[r], j]
        if conj[r]:
            c = np.conj(c)
        c = c * facs[r]
        if c == 0:
            continue
        for col in range(x.shape[1]):
            out[rows[r], col] += c * x[cols[r], col]
    for i in range(out.shape[0]):
        for col in range(out.shape[1]):
            out[i, col] = -1j * out[i, col]


@numba.njit(cache=True)
def _rk4(psi, coef, rows, cols, terms, facs, conj, h, nsteps):
    k1 = np.empty_like(psi)
    k2 = np.empty_like(psi)
    k3 = np.empty_like(psi)
    k4 = np.empty_like(psi)
    tmp = np.empty_like(psi)
    for s in range(nsteps):
        j = 2 * s
        _apply(coef, j, rows, cols, terms, facs, conj, psi, k1)
        tmp[:, :] = psi + 0.5 * h * k1
        _apply(coef, j + 1, rows, cols, terms, facs, conj, tmp, k2)
        tmp[:, :] = psi + 0.5 * h * k2
        _apply(coef, j + 1, rows, cols, terms, facs, conj, tmp, k3)
        tmp[:, :] = psi + h * k3
        _apply(coef, j + 2, rows, cols, terms, facs, conj, tmp, k4)
        psi += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    return psi


class Propagator:
    """Evolves states of one :class:`SystemModel` through pulse sequences."""

    OSCILLATING = ("l01", "g12")

    def __init__(self, model: SystemModel, dt_max=1e-3, period_steps=256,
                 chunk=20000, norm_tol=NORM_TOL):
        self.model = model
        self.dt_max = dt_max
        self.period_steps = period_steps
        self.chunk = chunk
        self.norm_tol = norm_tol
        ops = model.operator_list()
        rows, cols, terms, facs, conj = [], [], [], [], []
        for m, k, cj in ops:
            r, c = np.nonzero(m)
            rows += list(r)
            cols += list(c)
            terms += [k] * len(r)
            facs += list(m[r, c])
            conj += [cj] * len(r)
        self._sparse = (np.array(rows, np.int64), np.array(cols, np.int64),
                        np.array(terms, np.int64), np.array(facs, complex),
                        np.array(conj, np.bool_))
        self._dense = np.array([m for m, _, _ in ops])  # (n_ops, D, D)
        self._op_term = np.array([k for _, k, _ in ops])
        self._op_conj = np.array([cj for _, _, cj in ops])
        kinds = [t[1] for t in model.terms]
        self._det_rows = {(d, lvl): k for k, (_, kind, d, _) in enumerate(model.terms)
                          for lvl in (1, 2) if kind == f"det{lvl}"}
        self._osc_rows = [k for k, kind in enumerate(kinds) if kind in self.OSCILLATING]
        self._na_rows = [k for k, kind in enumerate(kinds) if kind == "na"]
        self._level_of = np.array(model.basis.labels())[:, :model.n_dots]

    # --- generator helpers -------------------------------------------------
    def coefficients(self, piece: Piece, t):
        fields, rates, env = piece.at(t)
        return self.model.coefficients(t, fields, rates, env, piece.active, piece.role)

    def dense(self, coef):
        """H matrices (nt, D, D) from coefficient columns (n_terms, nt)."""
        c = coef[self._op_term]  # (n_ops, nt)
        c = np.where(self._op_conj[:, None], np.conj(c), c)
        return np.einsum("kt,kij->tij", c, self._dense)

    def _bare_rates(self, coef):
        """Bare diagonal rate of each basis state, shape (D, nt)."""
        out = np.zeros((self._level_of.shape[0], coef.shape[1]))
        for (d, lvl), k in self._det_rows.items():
            out[self._level_of[:, d] == lvl] += coef[k].real
        return out

    def max_rate(self, piece: Piece) -> float:
        ts = np.linspace(piece.t0, piece.t1, 5)
        coef = self.coefficients(piece, ts)
        h = self.dense(coef)
        rate = float(np.max(np.sum(np.abs(h), axis=2)))
        freqs = [0.0]
        if any(np.any(coef[k] != 0) for k in self._osc_rows):
            freqs.append(abs(self.model.nu))
        if any(np.any(coef[k] != 0) for k in self._na_rows):
            freqs += list(self.model.frame_freq.values())
        return rate + max(freqs)

    def is_periodic(self, piece: Piece) -> bool:
        coef = self.coefficients(piece, np.array([piece.t0]))
        return any(coef[k, 0] != 0 for k in self._osc_rows)

    # --- propagation pieces ------------------------------------------------
    def _ramp(self, psi, piece: Piece):
        dur = piece.duration
        h = min(self.dt_max, 1.0 / (50.0 * self.max_rate(piece)))
        n = max(int(math.ceil(dur / h)), 1)
        h = dur / n
        phase = np.zeros(psi.shape[0])
        done = 0
        while done < n:
            m = min(self.chunk, n - done)
            t = piece.t0 + h * (done + 0.5 * np.arange(2 * m + 1))
            coef = np.ascontiguousarray(self.coefficients(piece, t))
            psi = _rk4(psi, coef, *self._sparse, h, m)
            r = self._bare_rates(coef)
            # Simpson on the half-step grid
            phase += (h / 6.0) * (r[:, 0:-1:2] + 4 * r[:, 1::2] + r[:, 2::2]).sum(axis=1)
            done += m
        return psi, phase, n

    def _cf4(self, t0, dur, n, piece):
        """Product of n CF4 Magnus steps over [t0, t0 + dur]."""
        h = dur / n
        starts = t0 + h * np.arange(n)
        t1 = starts + _CF4_C[0] * h
        t2 = starts + _CF4_C[1] * h
        c1 = self.coefficients(piece, t1)
        c2 = self.coefficients(piece, t2)
        ha = self.dense(_CF4_A1 * c1 + _CF4_A2 * c2)
        hb = self.dense(_CF4_A2 * c1 + _CF4_A1 * c2)
        ea = _expm_herm(ha, h)
        eb = _expm_herm(hb, h)
        u = np.eye(ha.shape[1], dtype=complex)
        for i in range(n):
            u = eb[i] @ (ea[i] @ u)
        return u

    def piece_propagator(self, piece: Piece):
        """Exact-or-Floquet propagator of a constant-field piece."""
        dur = piece.duration
        if not self.is_periodic(piece):
            coef = self.coefficients(piece, np.array([piece.t0]))
            return _expm_herm(self.dense(coef), dur)[0], 0
        period = 2 * math.pi / abs(self.model.nu)
        n_per = int(math.floor(dur / period + 1e-12))
        rem = dur - n_per * period
        u = np.eye(self.model.basis.dim, dtype=complex)
        steps = 0
        if n_per > 0:
            ut = self._cf4(piece.t0, period, self.period_steps, piece)
            steps += self.period_steps
            tri, z = schur(ut, output="complex")
            lam = np.diag(tri)
            u = (z * lam**n_per) @ z.conj().T
        if rem > 1e-15:
            n_rem = max(int(math.ceil(self.period_steps * rem / period)), 1)
            u = self._cf4(piece.t0 + n_per * period, rem, n_rem, piece) @ u
            steps += n_rem
        return u, steps

    def _sampled_piece(self, psi, piece: Piece, sample_dt, times, samples):
        """Constant piece with intermediate samples roughly every ``sample_dt``."""
        dur = piece.duration
        if not self.is_periodic(piece):
            n = max(int(math.ceil(dur / sample_dt)), 1)
            coef = self.coefficients(piece, np.array([piece.t0]))
            u = _expm_herm(self.dense(coef), dur / n)[0]
            for k in range(1, n + 1):
                psi = u @ psi
                times.append(piece.t0 + k * dur / n)
                samples.append(psi.copy())
            return psi, 0
        period = 2 * math.pi / abs(self.model.nu)
        n_per = int(math.floor(dur / period + 1e-12))
        stride = max(int(round(sample_dt / period)), 1)
        steps = 0
        if n_per > 0:
            ut = self._cf4(piece.t0, period, self.period_steps, piece)
            steps += self.period_steps
            tri, z = schur(ut, output="complex")
            lam = np.diag(tri)
            base = z.conj().T @ psi
            for k in list(range(stride, n_per, stride)) + [n_per]:
                times.append(piece.t0 + k * period)
                samples.append((z * lam**k) @ base)
            psi = samples[-1].copy()
        rem = dur - n_per * period
        if rem > 1e-15:
            n_rem = max(int(math.ceil(self.period_steps * rem / period)), 1)
            psi = self._cf4(piece.t0 + n_per * period, rem, n_rem, piece) @ psi
            steps += n_rem
            times.append(piece.t1)
            samples.append(psi.copy())
        return psi, steps

    def evolve(self, state, sequence: PulseSequence, sample=False,
               sample_dt=None) -> Evolution:
        """Propagate through ``sequence``.

        With ``sample`` the state is recorded at every piece boundary, and
        additionally about every ``sample_dt`` ns inside constant pieces.
        """
        if isinstance(state, CompositeState):
            state = state.amplitudes
        psi = np.array(state, dtype=complex)
        vector = psi.ndim == 1
        if vector:
            psi = psi[:, None]
        psi = np.ascontiguousarray(psi)
        norms0 = np.sum(np.abs(psi) ** 2, axis=0)
        if np.any(np.abs(norms0 - 1) > 1e-9):
            raise ConfigurationError("initial state must be normalized")
        phase = np.zeros(psi.shape[0])
        times, samples = [0.0], [psi.copy()] if sample else []
        steps = 0
        drift = 0.0
        for piece in sequence.pieces():
            if piece.is_ramp:
                psi, dphi, n = self._ramp(psi, piece)
                phase += dphi
            elif sample and sample_dt:
                psi, n = self._sampled_piece(psi, piece, sample_dt, times, samples)
                psi = np.ascontiguousarray(psi)
                coef = self.coefficients(piece, np.array([piece.t0]))
                phase += self._bare_rates(coef)[:, 0] * piece.duration
            else:
                u, n = self.piece_propagator(piece)
                psi = np.ascontiguousarray(u @ psi)
                coef = self.coefficients(piece, np.array([piece.t0]))
                phase += self._bare_rates(coef)[:, 0] * piece.duration
            steps += n
            drift = float(np.max(np.abs(np.sum(np.abs(psi) ** 2, axis=0) - norms0)))
            if drift > self.norm_tol:
                raise NumericalError(
                    f"norm drift {drift:.3g} exceeds {self.norm_tol:g} at t = "
                    f"{piece.t1:.6g} ns; reduce dt_max")
            if sample and not (sample_dt and not piece.is_ramp):
                times.append(piece.t1)
                samples.append(psi.copy())
        out = psi[:, 0] if vector else psi
        return Evolution(out, phase, drift, times, samples, steps)


def _expm_herm(h, dt):
    """exp(-i h dt) for a stack of Hermitian matrices."""
    h = 0.5 * (h + np.conj(np.swapaxes(h, -1, -2)))
    w, v = np.linalg.eigh(h)
    return (v * np.exp(-1j * w * dt)[..., None, :]) @ np.conj(np.swapaxes(v, -1, -2))


def evolve(state, sequence: PulseSequence, model: SystemModel, dt_max=1e-3,
           sample=False, sample_dt=None) -> Evolution:
    """Propagate ``state`` (vector, column matrix or CompositeState)."""
    return Propagator(model, dt_max).evolve(state, sequence, sample, sample_dt)
