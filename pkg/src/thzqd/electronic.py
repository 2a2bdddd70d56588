"""Single-electron axial and radial eigenproblems of one quantum dot.

The axial problem is a 1-D effective-mass Schrodinger equation on a uniform
grid, discretized with second-order central differences and solved as a
symmetric tridiagonal eigenproblem. The radial problem uses the closed-form
spectrum of an infinitely deep cylindrical well (zeros of Bessel functions).
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np
from scipy import special
from scipy.linalg import LinAlgError, eigh_tridiagonal

from .constants import HBAR2_2ME
from .errors import ConfigurationError, NumericalError

REFERENCE_LAYERS = ((10.0, 0.0), (2.0, 65.0), (17.0, 0.0), (2.0, 65.0), (10.0, 0.0))


@dataclass(frozen=True)
class QDGeometry:
    """Axial layer stack of a triple-well dot plus its radial size.

    ``layers`` is a sequence of ``(thickness_nm, potential_offset_meV)`` from
    the bottom gate side to the top.
    """

    layers: tuple = REFERENCE_LAYERS
    radius_a: float = 13.0
    effective_mass_ratio: float = 1.0 / 15.0

    def __post_init__(self):
        layers = tuple((float(t), float(v)) for t, v in self.layers)
        object.__setattr__(self, "layers", layers)
        if not layers:
            raise ConfigurationError("geometry needs at least one layer")
        for t, v in layers:
            if not (np.isfinite(t) and t > 0):
                raise ConfigurationError(f"layer thickness must be > 0, got {t}")
            if not np.isfinite(v):
                raise ConfigurationError("layer potential must be finite")
        if not (np.isfinite(self.radius_a) and self.radius_a > 0):
            raise ConfigurationError("radius_a must be > 0")
        if not (0 < self.effective_mass_ratio <= 1):
            raise ConfigurationError("effective_mass_ratio must lie in (0, 1]")

    @property
    def total_thickness(self) -> float:
        return float(sum(t for t, _ in self.layers))

    @property
    def hbar2_2m(self) -> float:
        """hbar^2 / 2m* in meV nm^2."""
        return HBAR2_2ME / self.effective_mass_ratio

    def is_mirror_symmetric(self, tol=1e-12) -> bool:
        rev = self.layers[::-1]
        return all(abs(a[0] - b[0]) < tol and abs(a[1] - b[1]) < tol
                   for a, b in zip(self.layers, rev))

    def layer_edges(self) -> np.ndarray:
        """Layer boundaries in nm with z = 0 at the stack midpoint."""
        edges = np.concatenate([[0.0], np.cumsum([t for t, _ in self.layers])])
        return edges - self.total_thickness / 2.0


@dataclass(frozen=True)
class AxialGrid:
    """Uniform axial grid; hard walls sit just beyond both end points.

    Between the stack and the hard walls the potential is ``boundary_potential``
    (the outer AlGaAs barrier).
    """

    z_min: float
    z_max: float
    n_points: int = 4096
    boundary_potential: float = 300.0

    def __post_init__(self):
        if not (self.z_max > self.z_min):
            raise ConfigurationError("grid needs z_max > z_min")
        if int(self.n_points) < 3:
            raise ConfigurationError("grid needs at least 3 points")
        if not np.isfinite(self.boundary_potential):
            raise ConfigurationError("boundary_potential must be finite")

    @classmethod
    def for_geometry(cls, geometry: QDGeometry, padding=20.0, n_points=4096,
                     boundary_potential=300.0) -> "AxialGrid":
        half = geometry.total_thickness / 2.0 + padding
        return cls(-half, half, n_points, boundary_potential)

    @property
    def z(self) -> np.ndarray:
        return np.linspace(self.z_min, self.z_max, int(self.n_points))

    @property
    def spacing(self) -> float:
        return (self.z_max - self.z_min) / (int(self.n_points) - 1)

    def refined(self, factor=2) -> "AxialGrid":
        return AxialGrid(self.z_min, self.z_max, int(self.n_points) * factor,
                         self.boundary_potential)


@dataclass(frozen=True)
class AxialSpectrum:
    field_e: float
    z: np.ndarray
    energies: np.ndarray
    wavefunctions: np.ndarray  # shape (n_points, k)

    @property
    def k(self) -> int:
        return len(self.energies)

    def transition(self, upper, lower=0) -> float:
        return float(self.energies[upper] - self.energies[lower])


@dataclass(frozen=True)
class RadialSpectrum:
    energies: np.ndarray
    labels: tuple  # (l, m): l-th zero of J_m
    delta_e: float
    ceiling: float | None = None
    exceeds_ceiling: bool | None = None
    zeros: np.ndarray = field(default=None, repr=False)


def build_potential(geometry: QDGeometry, field_e: float, grid: AxialGrid) -> np.ndarray:
    """Sampled axial potential in meV, including the linear Stark term.

    A positive field lowers the potential at positive z:
    V(z) = V_stack(z) - field_e * z, using 1 MV/m * 1 nm = 1 meV.
    """
    if not np.isfinite(field_e):
        raise ConfigurationError("field must be finite")
    edges = geometry.layer_edges()
    if grid.z_min > edges[0] or grid.z_max < edges[-1]:
        raise ConfigurationError(
            f"grid [{grid.z_min}, {grid.z_max}] nm narrower than the "
            f"{geometry.total_thickness} nm stack")
    z = grid.z
    v = np.full(z.shape, float(grid.boundary_potential))
    # np.searchsorted puts a point sitting on an interface into the upper layer
    idx = np.searchsorted(edges, z, side="right") - 1
    inside = (idx >= 0) & (idx < len(geometry.layers))
    offsets = np.array([p for _, p in geometry.layers])
    v[inside] = offsets[idx[inside]]
    return v - field_e * z


def _fix_sign(psi):
    # first appreciable lobe positive
    for col in range(psi.shape[1]):
        p = psi[:, col]
        thresh = 1e-3 * np.max(np.abs(p))
        first = np.argmax(np.abs(p) > thresh)
        if p[first] < 0:
            psi[:, col] = -p
    return psi


def solve_axial(z, potential, effective_mass_ratio, k=4, field_e=0.0) -> AxialSpectrum:
    """Lowest ``k`` eigenpairs of -(hbar^2/2m*) d^2/dz^2 + V(z), hard walls."""
    if k < 3:
        raise ConfigurationError("need k >= 3 levels")
    z = np.asarray(z, dtype=float)
    v = np.asarray(potential, dtype=float)
    h = z[1] - z[0]
    if not np.allclose(np.diff(z), h, rtol=1e-9, atol=0):
        raise ConfigurationError("solve_axial needs a uniform grid")
    t = HBAR2_2ME / effective_mass_ratio / h**2
    diag = v + 2.0 * t
    off = np.full(len(z) - 1, -t)
    try:
        energies, vecs = eigh_tridiagonal(diag, off, select="i",
                                          select_range=(0, k - 1))
    except LinAlgError as exc:
        raise NumericalError(
            f"tridiagonal eigensolve failed at field {field_e} MV/m "
            f"(n_points={len(z)}, k={k}): {exc}") from exc
    if len(energies) != k or np.any(np.diff(energies) <= 0):
        raise NumericalError(
            f"eigensolve returned {len(energies)} levels, non-ascending or "
            f"degenerate at field {field_e} MV/m: {energies}")
    norms = np.sqrt(np.trapezoid(vecs**2, z, axis=0))
    vecs = _fix_sign(vecs / norms)
    return AxialSpectrum(float(field_e), z, energies, vecs)


def solve_geometry(geometry: QDGeometry, field_e: float, grid: AxialGrid | None = None,
                   k=4) -> AxialSpectrum:
    """Convenience wrapper: build the potential and solve it."""
    grid = grid or AxialGrid.for_geometry(geometry)
    v = build_potential(geometry, field_e, grid)
    return solve_axial(grid.z, v, geometry.effective_mass_ratio, k, field_e)


def dipole_z(spectrum: AxialSpectrum, i: int, j: int) -> float:
    """Dipole matrix element <i|z|j> in nm (trapezoid rule)."""
    k = spectrum.k
    if not (0 <= i < k and 0 <= j < k):
        raise IndexError(f"levels ({i}, {j}) outside the {k} computed")
    psi = spectrum.wavefunctions
    return float(np.trapezoid(psi[:, i] * spectrum.z * psi[:, j], spectrum.z))


def dipole_matrix(spectrum: AxialSpectrum) -> np.ndarray:
    psi = spectrum.wavefunctions
    return np.trapezoid(psi[:, :, None] * (spectrum.z[:, None, None] * psi[:, None, :]),
                        spectrum.z, axis=0)


def node_count(psi, rel_tol=1e-6) -> int:
    """Number of sign changes, ignoring the exponentially small tails."""
    p = psi[np.abs(psi) > rel_tol * np.max(np.abs(psi))]
    return int(np.count_nonzero(np.diff(np.sign(p)) != 0))


def bessel_zero(m: int, l: int) -> float:
    """l-th positive zero of J_m (l starts at 1)."""
    return float(special.jn_zeros(m, l)[-1])


def radial_spectrum(geometry: QDGeometry, n_levels=6, ceiling=None) -> RadialSpectrum:
    """In-plane levels of a hard-walled cylinder, E = hbar^2 x_ml^2 / (2 m* a^2).

    ``delta_e`` is the gap between the ground level and the first excited
    (l, m) level. When ``ceiling`` is given (meV), ``exceeds_ceiling`` tells
    whether that gap lies above it.
    """
    if not geometry.radius_a > 0:
        raise ConfigurationError("radius_a must be > 0")
    n_levels = max(int(n_levels), 2)
    entries = []
    for m in range(n_levels):
        for l, x in enumerate(special.jn_zeros(m, n_levels), start=1):
            entries.append((float(x), l, m))
    entries.sort()
    entries = entries[:n_levels]
    zeros = np.array([e[0] for e in entries])
    scale = geometry.hbar2_2m / geometry.radius_a**2
    energies = scale * zeros**2
    delta = float(energies[1] - energies[0])
    exceeds = None if ceiling is None else bool(delta > ceiling)
    return RadialSpectrum(energies, tuple((l, m) for _, l, m in entries), delta,
                          ceiling, exceeds, zeros)


def write_spectrum_csv(path, spectrum: AxialSpectrum, potential, n_states=4):
    """Dump z, V and the lowest wavefunctions for plotting."""
    n_states = min(n_states, spectrum.k)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["z_nm", "V_meV"] + [f"psi{i}" for i in range(n_states)])
        for row in zip(spectrum.z, potential, *spectrum.wavefunctions[:, :n_states].T):
            w.writerow([f"{x:.6g}" for x in row])
