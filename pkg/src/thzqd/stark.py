"""Stark maps: transition energies and dipoles versus applied field.

Levels are followed across the sweep by wavefunction overlap with the
previous field's tracked states, and wavefunction signs are kept continuous
so the tabulated dipole elements never flip sign between neighbours.
"""

from __future__ import annotations

import csv
import hashlib
import json
import logging
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.optimize import brentq, linear_sum_assignment

from .electronic import AxialGrid, QDGeometry, build_potential, solve_axial
from .errors import ConfigurationError, ResonanceUnreachable

log = logging.getLogger(__name__)

TRANSITIONS = (10, 20)
ROOT_RULES = ("rising", "lowest", "highest")


def provenance_hash(geometry: QDGeometry, grid: AxialGrid) -> str:
    blob = json.dumps({"geometry": asdict(geometry), "grid": asdict(grid)},
                      sort_keys=True)
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


@dataclass(frozen=True, eq=False)
class StarkMap:
    fields: np.ndarray
    energies: np.ndarray  # (n_fields, k), tracked order
    dipoles: np.ndarray  # (n_fields, k, k), tracked order, continuous signs
    geometry: QDGeometry
    grid: AxialGrid
    flagged: tuple = ()  # (e_lo, e_hi) intervals with ambiguous tracking
    min_overlap: np.ndarray = None  # per field, vs previous field
    wavefunctions: np.ndarray = field(default=None, repr=False)
    signs: np.ndarray = field(default=None, repr=False)  # global level signs

    @property
    def provenance(self) -> str:
        return provenance_hash(self.geometry, self.grid)

    @property
    def E10(self):
        return self.energies[:, 1] - self.energies[:, 0]

    @property
    def E20(self):
        return self.energies[:, 2] - self.energies[:, 0]

    @property
    def z01(self):
        return self.dipoles[:, 0, 1]

    @property
    def z12(self):
        return self.dipoles[:, 1, 2]

    @property
    def z02(self):
        return self.dipoles[:, 0, 2]

    def transition_energy(self, transition: int) -> np.ndarray:
        if transition == 10:
            return self.E10
        if transition == 20:
            return self.E20
        raise ConfigurationError(f"unknown transition {transition}; use 10 or 20")

    def interpolate(self, name: str, e):
        """Cubic-spline value of a tabulated column ('E10', 'z01', ...) at e."""
        return CubicSpline(self.fields, getattr(self, name))(e)

    def tracked_solve(self, e: float):
        """Fresh solve at ``e`` with levels labelled like the map.

        Returns ``(energies, wavefunctions, dipoles)`` in tracked order.
        """
        k = self.energies.shape[1]
        spec = _solve(self.geometry, self.grid, e, k + 2)
        i = int(np.argmin(np.abs(self.fields - e)))
        ref = self.wavefunctions[i]
        energies, psi, _, _ = _assign(ref, spec.energies, spec.wavefunctions,
                                      self.grid.spacing)
        return energies, psi, _dipoles(spec.z, psi)

    def write_csv(self, path):
        cols = [self.fields, self.E10, self.E20, self.z01, self.z12, self.z02]
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["e_MVpm", "E10_meV", "E20_meV", "z01_nm", "z12_nm", "z02_nm"])
            for row in zip(*cols):
                w.writerow([f"{x:.6g}" for x in row])


def _solve(geometry, grid, e, k):
    v = build_potential(geometry, e, grid)
    return solve_axial(grid.z, v, geometry.effective_mass_ratio, k, e)


def _dipoles(z, psi):
    return np.trapezoid(psi[:, :, None] * (z[:, None, None] * psi[:, None, :]), z, axis=0)


def _assign(ref, energies, psi, h):
    """Match solved states to reference states by maximum |overlap|."""
    k = ref.shape[1]
    ov = (ref.T @ psi) * h  # (k, n_solved)
    rows, cols = linear_sum_assignment(-np.abs(ov))
    order = cols[np.argsort(rows)]
    chosen = ov[np.arange(k), order]
    sgn = np.sign(chosen)
    sgn[sgn == 0] = 1.0
    new_psi = psi[:, order] * sgn
    # ambiguity: best and runner-up overlaps within 5% of each other
    ambiguous = False
    for n in range(k):
        a = np.sort(np.abs(ov[n]))[::-1]
        if len(a) > 1 and a[1] > 0.95 * a[0]:
            ambiguous = True
    return energies[order], new_psi, np.abs(chosen), ambiguous


def stark_map(geometry: QDGeometry, field_lo=0.0, field_hi=2.5, n_steps=251,
              grid: AxialGrid | None = None, k=4) -> StarkMap:
    """Sweep the applied field and tabulate tracked levels and dipoles.

    ``n_steps`` is the number of field points, ends included.
    """
    if not (np.isfinite(field_lo) and np.isfinite(field_hi) and field_lo < field_hi):
        raise ConfigurationError(f"empty sweep range [{field_lo}, {field_hi}]")
    if n_steps < 50:
        raise ConfigurationError("stark map needs n_steps >= 50")
    grid = grid or AxialGrid.for_geometry(geometry)
    fields = np.linspace(field_lo, field_hi, int(n_steps))
    h = grid.spacing
    n_extra = 2
    energies = np.empty((len(fields), k))
    psis = np.empty((len(fields), grid.n_points, k))
    min_ov = np.ones(len(fields))
    flagged = []
    for i, e in enumerate(fields):
        spec = _solve(geometry, grid, e, k + n_extra)
        if i == 0:
            energies[i] = spec.energies[:k]
            psis[i] = spec.wavefunctions[:, :k]
            continue
        en, psi, ov, amb = _assign(psis[i - 1], spec.energies, spec.wavefunctions, h)
        energies[i], psis[i], min_ov[i] = en, psi, ov.min()
        if amb:
            flagged.append((float(fields[i - 1]), float(e)))
    dip = np.stack([_dipoles(grid.z, psis[i]) for i in range(len(fields))])
    # global level signs: z01 > 0 and z12 > 0 at the first field
    signs = np.ones(k)
    if dip[0, 0, 1] < 0:
        signs[1:] *= -1
    if signs[1] * signs[2] * dip[0, 1, 2] < 0:
        signs[2:] *= -1
    psis *= signs
    dip *= signs[None, :, None] * signs[None, None, :]
    if flagged:
        log.warning("ambiguous level tracking in %d field intervals", len(flagged))
    return StarkMap(fields, energies, dip, geometry, grid, tuple(flagged), min_ov,
                    psis, signs)


def _transition_at(smap: StarkMap, transition: int, e: float) -> float:
    energies, _, _ = smap.tracked_solve(e)
    upper = 1 if transition == 10 else 2
    return float(energies[upper] - energies[0])


def find_resonance_field(smap: StarkMap, transition: int, target_energy: float,
                         refine=True, xtol=1e-12) -> np.ndarray:
    """All fields where the transition energy equals ``target_energy``.

    Brackets come from sign changes on the map; each root is then refined by
    Brent's method on fresh eigen-solves. Roots are returned ascending.
    """
    values = smap.transition_energy(transition) - target_energy
    fields = smap.fields
    roots = []
    for i in range(len(fields) - 1):
        a, b = values[i], values[i + 1]
        if a == 0.0:
            roots.append(float(fields[i]))
            continue
        if a * b < 0:
            if refine:
                f = lambda e: _transition_at(smap, transition, e) - target_energy
                fa, fb = f(fields[i]), f(fields[i + 1])
                if fa * fb < 0:
                    roots.append(brentq(f, fields[i], fields[i + 1], xtol=xtol,
                                        rtol=4 * np.finfo(float).eps))
                    continue
            roots.append(float(fields[i] - a * (fields[i + 1] - fields[i]) / (b - a)))
    if values[-1] == 0.0:
        roots.append(float(fields[-1]))
    if not roots:
        e = smap.transition_energy(transition)
        rng = (float(e.min()), float(e.max()))
        raise ResonanceUnreachable(
            f"E{transition} cannot reach {target_energy} meV between "
            f"{fields[0]} and {fields[-1]} MV/m; achievable range "
            f"{rng[0]:.6g} to {rng[1]:.6g} meV", rng)
    return np.array(sorted(roots))


def transition_slope(smap: StarkMap, transition: int, e: float) -> float:
    """dE/de from Hellmann-Feynman, dE_n/de = -<n|z|n> (meV per MV/m)."""
    _, _, d = smap.tracked_solve(e)
    upper = 1 if transition == 10 else 2
    return float(-(d[upper, upper] - d[0, 0]))


def select_root(smap: StarkMap, transition: int, roots, rule="rising") -> float:
    """Pick one operating field among several resonance candidates.

    ``rising`` takes the lowest-field root where the transition energy grows
    with field, falling back to the lowest root if there is none.
    """
    roots = np.sort(np.asarray(roots, dtype=float))
    if rule == "lowest":
        return float(roots[0])
    if rule == "highest":
        return float(roots[-1])
    if rule != "rising":
        raise ConfigurationError(f"unknown root rule {rule!r}; use one of {ROOT_RULES}")
    for r in roots:
        if transition_slope(smap, transition, r) > 0:
            return float(r)
    return float(roots[0])


@dataclass(frozen=True)
class OperatingPoint:
    field: float
    E10: float
    E20: float
    z01: float
    z12: float
    z02: float
    candidates: tuple = ()

    @property
    def E21(self):
        return self.E20 - self.E10


@dataclass(frozen=True)
class OperatingPoints:
    cavity_energy: float
    laser_energy: float
    cavity: OperatingPoint  # E10 = hbar w_c
    laser: OperatingPoint  # E10 = hbar w_l
    two_photon: OperatingPoint  # E20 = hbar w_l + hbar w_c
    detuning_laser: float  # hbar(w21 - w_l) at e_lc, meV
    detuning_cavity: float  # hbar(w21 - w_c) at e_lc, meV
    hierarchy_ok: bool

    @property
    def e_c(self):
        return self.cavity.field

    @property
    def e_l(self):
        return self.laser.field

    @property
    def e_lc(self):
        return self.two_photon.field

    def as_dict(self):
        return {
            "e_c": self.e_c, "e_l": self.e_l, "e_lc": self.e_lc,
            "cavity": asdict(self.cavity), "laser": asdict(self.laser),
            "two_photon": asdict(self.two_photon),
            "detuning_laser_meV": self.detuning_laser,
            "detuning_cavity_meV": self.detuning_cavity,
            "hierarchy_ok": self.hierarchy_ok,
        }


def operating_point(smap: StarkMap, e: float, candidates=()) -> OperatingPoint:
    energies, _, d = smap.tracked_solve(e)
    return OperatingPoint(float(e), float(energies[1] - energies[0]),
                          float(energies[2] - energies[0]), float(d[0, 1]),
                          float(d[1, 2]), float(d[0, 2]), tuple(float(c) for c in candidates))


def operating_points(geometry: QDGeometry, cavity, laser, smap: StarkMap | None = None,
                     root_rule="rising") -> OperatingPoints:
    """Locate e_c, e_l and e_lc and bundle the quantities the couplings need.

    ``cavity`` and ``laser`` are photon energies in meV or objects with a
    ``photon_energy`` attribute.
    """
    wc = float(getattr(cavity, "photon_energy", cavity))
    wl = float(getattr(laser, "photon_energy", laser))
    smap = smap or stark_map(geometry)
    pts = []
    for transition, target in ((10, wc), (10, wl), (20, wl + wc)):
        roots = find_resonance_field(smap, transition, target)
        e = select_root(smap, transition, roots, root_rule)
        pts.append(operating_point(smap, e, roots))
    lc = pts[2]
    d_l = lc.E21 - wl
    d_c = lc.E21 - wc
    ok = abs(d_l) < abs(d_c)
    if not ok:
        log.warning("detuning hierarchy violated: |w21-wl|=%.4g, |w21-wc|=%.4g meV",
                    abs(d_l), abs(d_c))
    return OperatingPoints(wc, wl, pts[0], pts[1], lc, float(d_l), float(d_c), ok)
