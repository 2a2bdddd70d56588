"""Independent reference calculations used to pin numbers in the tests.

The bound-state oracle integrates the piecewise-constant Schrodinger
equation exactly (transfer matrices of psi, psi') and shoots on the
hard-wall condition, so it shares no code with the finite-difference solver.
"""

import math

import numpy as np
from scipy.optimize import brentq

HBAR2_2ME = 38.09982  # meV nm^2


def _region_matrix(kappa2, d):
    """Map (psi, psi') across a region of width d where psi'' = kappa2 psi."""
    if kappa2 > 0:
        k = math.sqrt(kappa2)
        c, s = math.cosh(k * d), math.sinh(k * d)
        return np.array([[c, s / k], [k * s, c]])
    if kappa2 < 0:
        k = math.sqrt(-kappa2)
        c, s = math.cos(k * d), math.sin(k * d)
        return np.array([[c, s / k], [-k * s, c]])
    return np.array([[1.0, d], [0.0, 1.0]])


def wall_mismatch(energy, regions, mass_ratio):
    """psi at the right hard wall for psi(left) = 0, psi'(left) = 1."""
    v = np.array([0.0, 1.0])
    for width, pot in regions:
        kappa2 = (pot - energy) * mass_ratio / HBAR2_2ME
        v = _region_matrix(kappa2, width) @ v
        v /= np.max(np.abs(v))  # only the sign of psi matters
    return v[0]


def bound_states(regions, mass_ratio, e_max, n=4, samples=20000):
    """Lowest n energies (meV) of a piecewise-constant well with hard walls."""
    grid = np.linspace(1e-6, e_max, samples)
    f = np.array([wall_mismatch(e, regions, mass_ratio) for e in grid])
    roots = []
    for i in np.nonzero(np.sign(f[:-1]) != np.sign(f[1:]))[0]:
        roots.append(brentq(wall_mismatch, grid[i], grid[i + 1],
                            args=(regions, mass_ratio), xtol=1e-12))
        if len(roots) == n:
            break
    return np.array(roots)


def reference_regions(padding=20.0, outer=300.0):
    stack = [(10, 0), (2, 65), (17, 0), (2, 65), (10, 0)]
    return [(padding, outer)] + stack + [(padding, outer)]
