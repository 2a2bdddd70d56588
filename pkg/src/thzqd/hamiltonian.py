"""Dots-plus-cavity generator in the cavity rotating frame.

The frame rotates the cavity at w_c and each dot's |1> at w_c and |2> at
w_l + w_c. In it the vacuum coupling on 0<->1 and the laser coupling on
1<->2 are static, while the laser on 0<->1 and the cavity on 1<->2 keep a
residual oscillation at +-(w_l - w_c). Nonadiabatic couplings from a
moving field, -i de/dt <m|d_e n>, carry the frame factors exp(-i w_mn t).

The generator is kept as a list of constant operators times scalar
coefficient functions, so the propagator can evaluate coefficients for many
times at once.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product

import numpy as np
from scipy.interpolate import CubicSpline

from .cavity import CavityMode, LaserDrive, laser_rabi, vacuum_field, vacuum_rabi
from .constants import HBAR_MEV_NS
from .errors import ConfigurationError, NumericalError
from .stark import StarkMap

MODELS = ("full", "effective")
ROLES = ("cavity_pi", "two_photon", "laser_rotation")


class Basis:
    """Product basis |dot 0 level> x |dot 1 level> x ... x |photon number>."""

    def __init__(self, n_dots=2, fock_cutoff=2, n_levels=3):
        self.n_dots = n_dots
        self.n_levels = n_levels
        self.n_photon = fock_cutoff + 1
        self.dims = (n_levels,) * n_dots + (self.n_photon,)
        self.dim = int(np.prod(self.dims))

    def index(self, *labels) -> int:
        return int(np.ravel_multi_index(labels, self.dims))

    def labels(self):
        return list(product(*[range(d) for d in self.dims]))

    def _embed(self, ops):
        out = np.ones((1, 1))
        for op in ops:
            out = np.kron(out, op)
        return out

    def sigma(self, dot, i, j) -> np.ndarray:
        """|i><j| on one dot."""
        s = np.zeros((self.n_levels, self.n_levels))
        s[i, j] = 1.0
        ops = [np.eye(self.n_levels)] * self.n_dots + [np.eye(self.n_photon)]
        ops[dot] = s
        return self._embed(ops)

    def destroy(self) -> np.ndarray:
        a = np.diag(np.sqrt(np.arange(1, self.n_photon)), 1)
        return self._embed([np.eye(self.n_levels)] * self.n_dots + [a])

    def photon_number(self) -> np.ndarray:
        return self._embed([np.eye(self.n_levels)] * self.n_dots
                           + [np.diag(np.arange(self.n_photon, dtype=float))])

    def computational_indices(self):
        """Indices of |a, b, 0 photons> with a, b in {0, 1}, ordered 00, 01, 10, 11."""
        return [self.index(*bits, 0) for bits in product((0, 1), repeat=self.n_dots)]

    def basis_state(self, *labels) -> np.ndarray:
        v = np.zeros(self.dim, complex)
        v[self.index(*labels)] = 1.0
        return v


@dataclass(frozen=True)
class CompositeState:
    amplitudes: np.ndarray
    basis: Basis = field(repr=False)
    frame: str = "rotating"

    @classmethod
    def from_labels(cls, basis: Basis, *labels, frame="rotating"):
        return cls(basis.basis_state(*labels), basis, frame)

    @property
    def norm2(self) -> float:
        return float(np.vdot(self.amplitudes, self.amplitudes).real)


class CouplingTable:
    """Spline interpolants of E10, E20 and dipoles over the field range.

    Extra node fields (normally the operating points) are solved afresh and
    inserted, so values at those fields are exact rather than interpolated.
    """

    QUANTITIES = ("E10", "E20", "z01", "z12", "z02")

    def __init__(self, smap: StarkMap, extra_fields=(), min_spacing=1e-9):
        fields = list(map(float, smap.fields))
        values = {q: list(map(float, getattr(smap, q))) for q in self.QUANTITIES}
        for e in extra_fields:
            if not (fields[0] <= e <= fields[-1]):
                raise ConfigurationError(f"node {e} outside the map range")
            energies, _, d = smap.tracked_solve(float(e))
            row = {"E10": energies[1] - energies[0], "E20": energies[2] - energies[0],
                   "z01": d[0, 1], "z12": d[1, 2], "z02": d[0, 2]}
            j = int(np.searchsorted(fields, e))
            for cand in (j - 1, j):
                if 0 <= cand < len(fields) and abs(fields[cand] - e) < 1e-6:
                    fields.pop(cand)
                    for q in self.QUANTITIES:
                        values[q].pop(cand)
                    j = cand
                    break
            fields.insert(j, float(e))
            for q in self.QUANTITIES:
                values[q].insert(j, float(row[q]))
        self.fields = np.array(fields)
        if np.any(np.diff(self.fields) < min_spacing):
            raise ConfigurationError("coupling table nodes too close together")
        self.lo, self.hi = self.fields[0], self.fields[-1]
        self._splines = {q: CubicSpline(self.fields, np.array(values[q]))
                         for q in self.QUANTITIES}
        self._derivs = {q: s.derivative() for q, s in self._splines.items()}

    def check_range(self, e):
        e = np.asarray(e)
        if np.any(e < self.lo - 1e-12) or np.any(e > self.hi + 1e-12):
            raise NumericalError(
                f"field {float(np.min(e)) if np.any(e < self.lo) else float(np.max(e))}"
                f" MV/m outside the interpolation range [{self.lo}, {self.hi}]")

    def __call__(self, quantity, e):
        self.check_range(e)
        return self._splines[quantity](e)

    def derivative(self, quantity, e):
        return self._derivs[quantity](e)


class SystemModel:
    """Rates and operator terms for N identical dots sharing one cavity mode.

    ``model='full'`` keeps all four couplings with residual oscillations and
    (optionally) nonadiabatic terms. ``model='effective'`` keeps only the
    resonant term matching the active segment's role on the active dot:
    vacuum coupling for 'cavity_pi', laser 0<->1 for 'laser_rotation' and
    the two-photon |0,n> <-> |2,n-1> coupling for 'two_photon'.
    """

    def __init__(self, table: CouplingTable, cavity: CavityMode, laser: LaserDrive,
                 n_dots=2, model="full", nonadiabatic=True, half_amplitude=True,
                 two_photon_rate=None, e_vac=None):
        if model not in MODELS:
            raise ConfigurationError(f"model must be one of {MODELS}")
        self.table = table
        self.cavity = cavity
        self.laser = laser
        self.n_dots = n_dots
        self.model = model
        self._nonadiabatic_requested = nonadiabatic
        self.nonadiabatic = nonadiabatic and model == "full"
        self.half_amplitude = half_amplitude
        self.two_photon_rate = two_photon_rate
        self.e_vac = vacuum_field(cavity) if e_vac is None else e_vac
        self.basis = Basis(n_dots, cavity.fock_cutoff)
        self.w_c = cavity.photon_energy / HBAR_MEV_NS
        self.w_l = laser.photon_energy / HBAR_MEV_NS
        self.nu = self.w_l - self.w_c
        self._build_terms()

    def with_(self, **kw) -> "SystemModel":
        args = dict(table=self.table, cavity=self.cavity, laser=self.laser,
                    n_dots=self.n_dots, model=self.model,
                    nonadiabatic=self._nonadiabatic_requested,
                    half_amplitude=self.half_amplitude,
                    two_photon_rate=self.two_photon_rate,
                    e_vac=None if "cavity" in kw else self.e_vac)
        args.update(kw)
        return SystemModel(**args)

    # scalar rates (rad/ns) as functions of field
    def detuning1(self, e):
        return self.table("E10", e) / HBAR_MEV_NS - self.w_c

    def detuning2(self, e):
        return self.table("E20", e) / HBAR_MEV_NS - self.w_l - self.w_c

    def g01(self, e):
        return vacuum_rabi(self.table("z01", e), self.e_vac)

    def g12(self, e):
        return vacuum_rabi(self.table("z12", e), self.e_vac)

    def laser01(self, e, scale=1.0):
        return laser_rabi(self.table("z01", e), self.laser.field_amplitude * scale,
                          self.half_amplitude)

    def laser12(self, e, scale=1.0):
        return laser_rabi(self.table("z12", e), self.laser.field_amplitude * scale,
                          self.half_amplitude)

    def nonadiabatic_couplings(self, e):
        """<m|d_e n> for (m, n) = (0, 1), (1, 2), (0, 2), in 1/(MV/m)."""
        e10, e20 = self.table("E10", e), self.table("E20", e)
        return {(0, 1): -self.table("z01", e) / e10,
                (1, 2): -self.table("z12", e) / (e20 - e10),
                (0, 2): -self.table("z02", e) / e20}

    def _build_terms(self):
        b = self.basis
        a = b.destroy()
        ad = a.conj().T
        terms = []  # (matrix, kind, dot, extra)
        for d in range(self.n_dots):
            s = lambda i, j: b.sigma(d, i, j)
            terms.append((s(1, 1), "det1", d, None))
            terms.append((s(2, 2), "det2", d, None))
            terms.append((ad @ s(0, 1), "g01", d, None))
            terms.append((s(0, 1), "l01", d, None))
            if self.model == "full":
                terms.append((ad @ s(1, 2), "g12", d, None))
                terms.append((s(2, 1), "l12", d, None))
                if self.nonadiabatic:
                    for m, n in ((0, 1), (1, 2), (0, 2)):
                        terms.append((s(m, n), "na", d, (m, n)))
            else:
                terms.append((ad @ s(0, 2), "tp", d, None))
        self.terms = terms
        self.frame_freq = {(0, 1): self.w_c, (1, 2): self.w_l, (0, 2): self.w_l + self.w_c}

    def coefficients(self, t, fields, field_rates, laser_env, active=None, role=None):
        """Complex coefficient of every term at times ``t``.

        ``fields`` and ``field_rates`` have shape (n_dots, nt); ``laser_env``
        is the laser amplitude fraction, shape (nt,). Off-diagonal terms get
        their Hermitian partner added in :meth:`operator_list`.
        """
        t = np.atleast_1d(np.asarray(t, float))
        nt = t.size
        out = np.zeros((len(self.terms), nt), complex)
        osc = np.exp(1j * self.nu * t)
        eff = self.model == "effective"
        for k, (_, kind, d, extra) in enumerate(self.terms):
            e = fields[d]
            if kind == "det1":
                out[k] = self.detuning1(e)
                continue
            if kind == "det2":
                out[k] = self.detuning2(e)
                continue
            on = (not eff) or (active == d)
            if not on:
                continue
            if kind == "g01":
                if eff and role != "cavity_pi":
                    continue
                out[k] = self.g01(e)
            elif kind == "l01":
                if eff and role != "laser_rotation":
                    continue
                if np.any(laser_env):
                    out[k] = self.laser01(e) * laser_env * osc
            elif kind == "g12":
                out[k] = self.g12(e) * np.conj(osc)
            elif kind == "l12":
                if np.any(laser_env):
                    out[k] = self.laser12(e) * laser_env
            elif kind == "tp":
                if role != "two_photon":
                    continue
                if self.two_photon_rate is None:
                    raise ConfigurationError("effective model needs two_photon_rate")
                out[k] = self.two_photon_rate * laser_env
            elif kind == "na":
                rate = field_rates[d]
                if np.any(rate):
                    amn = self.nonadiabatic_couplings(e)[extra]
                    out[k] = -1j * rate * amn * np.exp(-1j * self.frame_freq[extra] * t)
        return out

    def is_hermitian_term(self, k) -> bool:
        return self.terms[k][1] in ("det1", "det2")

    def operator_list(self):
        """(matrix, term index, conjugate?) triples spanning H."""
        ops = []
        for k, (m, kind, _, _) in enumerate(self.terms):
            ops.append((m, k, False))
            if kind not in ("det1", "det2"):
                ops.append((m.conj().T, k, True))
        return ops

    def hamiltonian(self, t, fields, field_rates=None, laser_env=0.0, active=None,
                    role=None) -> np.ndarray:
        """Dense H/hbar (rad/ns) at a single time."""
        fields = np.asarray(fields, float).reshape(self.n_dots, 1)
        rates = (np.zeros_like(fields) if field_rates is None
                 else np.asarray(field_rates, float).reshape(self.n_dots, 1))
        c = self.coefficients([t], fields, rates, np.atleast_1d(float(laser_env)),
                              active, role)[:, 0]
        h = np.zeros((self.basis.dim, self.basis.dim), complex)
        for m, k, conj in self.operator_list():
            h += (np.conj(c[k]) if conj else c[k]) * m
        return h


def assemble_hamiltonian(model: SystemModel, t, fields, laser_on=False, field_rates=None,
                         laser_scale=1.0, active=None, role=None) -> np.ndarray:
    """Hermitian generator H/hbar (rad/ns) for per-dot fields at time ``t``.

    Raises :class:`NumericalError` when a field leaves the interpolation range.
    """
    env = laser_scale if laser_on else 0.0
    return model.hamiltonian(t, fields, field_rates, env, active, role)


def build_model(smap: StarkMap, points, cavity: CavityMode, laser: LaserDrive, n_dots=2,
                model="full", nonadiabatic=True, half_amplitude=True,
                two_photon_rate=None, extra_fields=()) -> SystemModel:
    """Coupling table with the operating fields as exact nodes, wrapped in a model."""
    nodes = [points.e_c, points.e_l, points.e_lc, *extra_fields]
    table = CouplingTable(smap, sorted(set(nodes)))
    return SystemModel(table, cavity, laser, n_dots, model, nonadiabatic, half_amplitude,
                       two_photon_rate)
