r"""
Operating fields and coupling rates
===================================

Find the fields where the dot is resonant with the cavity (e_c), with the
laser (e_l) and with the two-photon transition (e_lc), then evaluate the
vacuum and laser Rabi rates and the effective two-photon rate there.
"""

import math

from thzqd import CavityMode, LaserDrive, QDGeometry, couplings, operating_points, vacuum_field

cavity, laser = CavityMode(), LaserDrive()
points = operating_points(QDGeometry(), cavity, laser)

for name in ("cavity", "laser", "two_photon"):
    p = getattr(points, name)
    print(f"{name:>10}: e = {p.field:.4f} MV/m  z01 = {p.z01:.3f} nm  z12 = {p.z12:.3f} nm"
          f"  candidates {p.candidates}")

print(f"\ndetunings at e_lc: w21 - wl = {points.detuning_laser:.3f} meV,"
      f" w21 - wc = {points.detuning_cavity:.3f} meV")
print(f"vacuum field {vacuum_field(cavity):.2f} V/m in a {cavity.volume:.0f} um^3 cavity")

c = couplings(points, cavity, laser)
print(f"\ncontrol pi pulse  pi/(2 g01) = {math.pi / (2 * c['cavity'].g01):.3f} ns")
print(f"two-photon 2pi    pi/Otilde  = {math.pi / c['two_photon'].Otilde:.2f} ns")
print(f"laser pi/2        pi/(4 Ol01) = {1e3 * math.pi / (4 * c['laser'].Ol01):.2f} ps")
