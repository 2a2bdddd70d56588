"""Zero-temperature LA-phonon emission rate between the two lowest dot levels.

Deformation-potential golden rule with approximate wavefunctions: an
infinite square well of height h along z and the J0 ground state of a hard
cylinder of radius a. The rate reduces to a prefactor times a
one-dimensional integral over the radial phonon wavevector q' = q/K10,

    rate = D^2 K^3 / (4 pi hbar rho c^2) * int_0^1 dq' q'/sqrt(1-q'^2)
           |radial(alpha q')|^2 |axial(beta sqrt(1-q'^2))|^2 .
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.integrate import quad
from scipy.special import j0, j1, jn_zeros

from .constants import HBAR_MEV_NS, MEV, Q_E
from .errors import ConfigurationError, NumericalError

HBAR_SI = HBAR_MEV_NS * MEV * 1e-9  # J s


@dataclass(frozen=True)
class PhononEnvironment:
    mass_density: float = 5300.0  # kg/m^3
    sound_speed: float = 3700.0  # m/s
    deformation_potential: float = 8.6  # eV

    def __post_init__(self):
        if min(self.mass_density, self.sound_speed, self.deformation_potential) <= 0:
            raise ConfigurationError("phonon environment parameters must be positive")


@dataclass(frozen=True)
class ApproxDotShape:
    radius_a: float = 13.0  # nm
    height_h: float = 40.0  # nm

    def __post_init__(self):
        if self.radius_a <= 0 or self.height_h <= 0:
            raise ConfigurationError("dot dimensions must be positive")

    @cached_property
    def x01(self) -> float:
        return float(jn_zeros(0, 1)[0])

    @cached_property
    def norm_inverse(self) -> float:
        """N^-1 = int_0^x01 r J0(r)^2 dr = x01^2 J1(x01)^2 / 2."""
        return float(0.5 * (self.x01 * j1(self.x01)) ** 2)


def dimensionless_params(E10, env=PhononEnvironment(), shape=ApproxDotShape()):
    """(K10 in 1/nm, alpha, beta) for a level spacing E10 in meV."""
    if E10 <= 0:
        raise ConfigurationError("E10 must be positive")
    k10 = E10 / (HBAR_MEV_NS * 1e-9 * env.sound_speed) * 1e-9  # 1/nm
    return k10, k10 * shape.radius_a / shape.x01, k10 * shape.height_h / math.pi


def axial_overlap(beta, qp):
    """(2/pi) int_{-pi/2}^{pi/2} cos z sin 2z exp(i b z) dz, b = beta sqrt(1-qp^2).

    Closed form from cos z sin 2z = (sin 3z + sin z)/2. Purely imaginary.
    """
    qp = np.asarray(qp, float)
    b = beta * np.sqrt(np.clip(1 - qp**2, 0, None))
    s = sum(np.sinc((m - b) / 2) - np.sinc((m + b) / 2) for m in (1, 3))
    return 0.5j * s


def axial_overlap_quad(beta, qp, epsabs=1e-13):
    """Quadrature version of :func:`axial_overlap` (imaginary part only; the real part vanishes)."""
    b = beta * math.sqrt(max(1 - qp * qp, 0.0))
    f = lambda z: math.cos(z) * math.sin(2 * z) * math.sin(b * z)
    limit = 100 + int(4 * b)
    val, _ = quad(f, -math.pi / 2, math.pi / 2, epsabs=epsabs, epsrel=1e-13, limit=limit)
    return 1j * 2 / math.pi * val


def radial_overlap(alpha, qp, shape=ApproxDotShape(), epsrel=1e-8):
    """N int_0^x01 J0(alpha qp r) J0(r)^2 r dr."""
    if qp < 0 or qp > 1 or alpha < 0:
        raise ConfigurationError("radial_overlap needs 0 <= qp <= 1 and alpha >= 0")
    x01 = shape.x01
    f = lambda r: j0(alpha * qp * r) * j0(r) ** 2 * r
    limit = 50 * (1 + int(alpha * qp))
    val, err = quad(f, 0.0, x01, epsrel=epsrel, epsabs=1e-14, limit=limit)
    if not np.isfinite(val) or err > max(1e-6 * abs(val), 1e-12):
        raise NumericalError(f"radial overlap quadrature did not converge (err {err:g})")
    return val / shape.norm_inverse


def golden_rule_prefactor(E10, env=PhononEnvironment()):
    """D^2 K10^3 / (4 pi hbar rho c_s^2) in 1/s."""
    k10 = dimensionless_params(E10, env)[0] * 1e9  # 1/m
    d = env.deformation_potential * Q_E
    return d**2 * k10**3 / (4 * math.pi * HBAR_SI * env.mass_density * env.sound_speed**2)


def _integrand(theta, alpha, beta, shape, epsrel):
    # q' = sin(theta) removes the 1/sqrt(1-q'^2) endpoint singularity
    qp = math.sin(theta)
    rad = radial_overlap(alpha, qp, shape, epsrel)
    ax = axial_overlap(beta, qp)
    return qp * rad**2 * abs(ax) ** 2


def dimensionless_integral(alpha, beta, shape=ApproxDotShape(), epsrel=1e-2,
                           inner_epsrel=1e-8, limit=None):
    limit = limit or 200 + 4 * int(alpha + beta)
    val, err = quad(_integrand, 0.0, math.pi / 2, args=(alpha, beta, shape, inner_epsrel),
                    epsrel=epsrel, epsabs=0.0, limit=limit)
    if not np.isfinite(val) or val < 0:
        raise NumericalError("phonon integral failed")
    return val


def relaxation_rate(E10, env=PhononEnvironment(), shape=ApproxDotShape(), epsrel=1e-2,
                    inner_epsrel=1e-8):
    """(rate in 1/s, lifetime in s) for the 1 -> 0 transition."""
    if E10 <= 0:
        raise ConfigurationError("E10 must be positive")
    _, alpha, beta = dimensionless_params(E10, env, shape)
    rate = golden_rule_prefactor(E10, env) * dimensionless_integral(
        alpha, beta, shape, epsrel, inner_epsrel)
    return rate, 1.0 / rate


def lifetime_sweep(energies, env=PhononEnvironment(), shape=ApproxDotShape(), epsrel=1e-2):
    rows = []
    for e in energies:
        k, a, b = dimensionless_params(e, env, shape)
        rows.append({"E10_meV": float(e), "K10_per_nm": k, "alpha": a, "beta": b,
                     "tau_s": relaxation_rate(e, env, shape, epsrel)[1]})
    return rows


def write_sweep_csv(path, rows):
    keys = ["E10_meV", "K10_per_nm", "alpha", "beta", "tau_s"]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(keys)
        for r in rows:
            w.writerow([f"{r[k]:.6g}" for k in keys])
