"""Physical constants in the package's working units.

Energies are meV, lengths nm, fields MV/m, times ns, angular rates rad/ns.
With these choices an electron in a 1 MV/m field moved by 1 nm changes its
energy by exactly 1 meV.
"""

from scipy import constants as _c

HBAR_J_S = _c.hbar
Q_E = _c.e
M_E = _c.m_e
EPS0 = _c.epsilon_0
K_B = _c.k
C_LIGHT = _c.c
H_PLANCK = _c.h

MEV = 1e-3 * Q_E  # J per meV

HBAR_MEV_NS = HBAR_J_S / MEV * 1e9  # meV * ns
K_B_MEV_PER_K = K_B / MEV

# hbar^2 / (2 m_e) in meV nm^2
HBAR2_2ME = HBAR_J_S**2 / (2.0 * M_E) / MEV * 1e18


def mev_to_rate(energy_mev):
    """Convert an energy in meV to an angular rate in rad/ns."""
    return energy_mev / HBAR_MEV_NS


def rate_to_mev(rate):
    return rate * HBAR_MEV_NS
