"""Cavity mode, laser drive and the coupling rates between them and a dot.

Rates are angular frequencies in rad/ns. The vacuum Rabi rate of a
transition with dipole z is q z e_vac / hbar; a classical laser of peak
amplitude E drives it at q z E / (2 hbar) by default (rotating-wave
half-amplitude convention, switchable with ``half_amplitude``).
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .constants import EPS0, H_PLANCK, C_LIGHT, HBAR_MEV_NS, K_B_MEV_PER_K, MEV
from .errors import ConfigurationError, DivisionHazard


def cavity_wavelength_um(photon_energy_mev: float, refractive_index: float) -> float:
    """Wavelength inside the dielectric, lambda_c = (h c / E) / n, in um."""
    return H_PLANCK * C_LIGHT / (photon_energy_mev * MEV) / refractive_index * 1e6


def minimal_volume_um3(photon_energy_mev: float, refractive_index: float) -> float:
    return (cavity_wavelength_um(photon_energy_mev, refractive_index) / 2.0) ** 3


@dataclass(frozen=True)
class CavityMode:
    """Single lossless cavity mode. ``volume`` (um^3) defaults to (lambda_c/2)^3."""

    photon_energy: float = 11.5
    refractive_index: float = 3.6
    volume: float | None = None
    fock_cutoff: int = 2

    def __post_init__(self):
        for name in ("photon_energy", "refractive_index"):
            val = getattr(self, name)
            if not (np.isfinite(val) and val > 0):
                raise ConfigurationError(f"cavity {name} must be > 0, got {val}")
        vmin = minimal_volume_um3(self.photon_energy, self.refractive_index)
        if self.volume is None:
            object.__setattr__(self, "volume", vmin)
        elif not (np.isfinite(self.volume) and self.volume >= vmin * (1 - 1e-9)):
            raise ConfigurationError(
                f"cavity volume {self.volume} um^3 below the (lambda/2)^3 "
                f"minimum {vmin:.6g} um^3")
        if int(self.fock_cutoff) < 2:
            raise ConfigurationError("fock_cutoff must be >= 2")

    @property
    def wavelength_um(self) -> float:
        return cavity_wavelength_um(self.photon_energy, self.refractive_index)

    @property
    def omega(self) -> float:
        return self.photon_energy / HBAR_MEV_NS


@dataclass(frozen=True)
class LaserDrive:
    """Continuous-wave laser; ``field_amplitude`` is the peak field in kV/m."""

    photon_energy: float = 15.0
    field_amplitude: float = 30.7

    def __post_init__(self):
        if not (np.isfinite(self.photon_energy) and self.photon_energy > 0):
            raise ConfigurationError("laser photon_energy must be > 0")
        if not (np.isfinite(self.field_amplitude) and self.field_amplitude >= 0):
            raise ConfigurationError("laser field_amplitude must be >= 0")

    @property
    def omega(self) -> float:
        return self.photon_energy / HBAR_MEV_NS


def vacuum_field(cavity: CavityMode) -> float:
    """Vacuum field amplitude sqrt(hbar w_c / (2 eps0 n^2 V)) in V/m."""
    energy_j = cavity.photon_energy * MEV
    volume_m3 = cavity.volume * 1e-18
    return math.sqrt(energy_j / (2.0 * EPS0 * cavity.refractive_index**2 * volume_m3))


def vacuum_rabi(z_nm, e_vac):
    """g = q z e_vac / hbar in rad/ns (z in nm, e_vac in V/m)."""
    return np.asarray(z_nm) * e_vac * 1e-6 / HBAR_MEV_NS


def laser_rabi(z_nm, amplitude_kv_m, half_amplitude=True):
    """Laser Rabi rate q z E / (2 hbar), or q z E / hbar, in rad/ns."""
    factor = 0.5 if half_amplitude else 1.0
    return factor * np.asarray(z_nm) * amplitude_kv_m * 1e-3 / HBAR_MEV_NS


def two_photon_rabi(g01, laser12, g12, laser01, detuning_laser, detuning_cavity):
    """Effective |0, 1 photon> <-> |2, 0 photons> rate.

    Each path contributes (first-step rate x second-step rate) / detuning of
    its intermediate state; detunings are hbar(w21 - w_l) and hbar(w21 - w_c)
    in meV.
    """
    if detuning_laser == 0 or detuning_cavity == 0:
        raise DivisionHazard(
            "two-photon rate diverges: w21 - w_l or w21 - w_c vanishes; "
            "move the operating point")
    dl = detuning_laser / HBAR_MEV_NS
    dc = detuning_cavity / HBAR_MEV_NS
    return g01 * laser12 / dl + g12 * laser01 / dc


@dataclass(frozen=True)
class Couplings:
    evaluated_at: float
    g01: float
    g12: float
    Ol01: float
    Ol12: float
    Otilde: float
    detuning_laser: float  # meV, hbar(w21 - w_l) at this field
    detuning_cavity: float  # meV

    def recompute_otilde(self) -> float:
        return two_photon_rabi(self.g01, self.Ol12, self.g12, self.Ol01,
                               self.detuning_laser, self.detuning_cavity)

    def as_dict(self):
        return asdict(self)


def coupling_at(point, cavity: CavityMode, laser: LaserDrive, half_amplitude=True,
                e_vac=None) -> Couplings:
    """Couplings at one operating point (anything with field, E10, E20, z01, z12)."""
    e_vac = vacuum_field(cavity) if e_vac is None else e_vac
    z01, z12 = abs(point.z01), abs(point.z12)
    g01 = float(vacuum_rabi(z01, e_vac))
    g12 = float(vacuum_rabi(z12, e_vac))
    ol01 = float(laser_rabi(z01, laser.field_amplitude, half_amplitude))
    ol12 = float(laser_rabi(z12, laser.field_amplitude, half_amplitude))
    e21 = point.E20 - point.E10
    d_l = e21 - laser.photon_energy
    d_c = e21 - cavity.photon_energy
    otilde = float(two_photon_rabi(g01, ol12, g12, ol01, d_l, d_c))
    return Couplings(float(point.field), g01, g12, ol01, ol12, otilde, float(d_l), float(d_c))


def couplings(points, cavity: CavityMode, laser: LaserDrive, half_amplitude=True,
              e_vac=None) -> dict:
    """Couplings at e_c, e_l and e_lc, keyed 'cavity', 'laser', 'two_photon'.

    At e_lc the detunings are exactly those stored in ``points``.
    """
    out = {}
    for key in ("cavity", "laser", "two_photon"):
        out[key] = coupling_at(getattr(points, key), cavity, laser, half_amplitude, e_vac)
    return out


def budgets(E10: float, g01: float, temperature: float) -> dict:
    """Initialization and readout figures.

    ``E10`` in meV, ``g01`` in rad/ns, ``temperature`` in K. The readout rate
    is quoted as g01 in s^-1. The noise-equivalent power figure is reported
    two ways: E10 * g01^(1/2) (W / Hz^(1/2)) and the literal ratio
    E10 / g01^(1/2) (J s^(1/2)), both with g01 in s^-1.
    """
    if not (E10 > 0 and g01 > 0 and temperature >= 0):
        raise ConfigurationError("budgets need E10 > 0, g01 > 0, temperature >= 0")
    kt = K_B_MEV_PER_K * temperature
    occupation = 0.0 if kt == 0 else math.exp(-E10 / kt)
    rate = g01 * 1e9
    e_j = E10 * MEV
    out = {
        "E10_meV": E10,
        "temperature_K": temperature,
        "thermal_occupation": occupation,
        "threshold_temperature_K": E10 / K_B_MEV_PER_K,
        "readout_rate_per_s": rate,
        "nep_W_per_rtHz": e_j * math.sqrt(rate),
        "nep_literal_J_rts": e_j / math.sqrt(rate),
        "required_bandwidth_Hz": rate,
    }
    return {k: float(v) for k, v in out.items()}
