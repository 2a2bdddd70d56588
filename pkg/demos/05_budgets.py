r"""
Initialization and readout
==========================

Thermal occupation of the excited level, the temperature scale E10/kB, and
the readout rate and detector sensitivity set by the vacuum Rabi rate.
"""

from thzqd import CavityMode, LaserDrive, QDGeometry, budgets, couplings, operating_points

cavity, laser = CavityMode(), LaserDrive()
points = operating_points(QDGeometry(), cavity, laser)
g01 = couplings(points, cavity, laser)["cavity"].g01

for temperature in (4.0, 20.0, 77.0):
    b = budgets(10.0, g01, temperature)
    print(f"T = {temperature:5.1f} K: excited occupation {b['thermal_occupation']:.2e}")
b = budgets(10.0, g01, 4.0)
print(f"temperature scale E10/kB = {b['threshold_temperature_K']:.0f} K")
print(f"readout rate {b['readout_rate_per_s']:.2e} 1/s")
print(f"NEP figure {b['nep_W_per_rtHz']:.1e} W/Hz^1/2"
      f" (literal ratio {b['nep_literal_J_rts']:.1e} J s^1/2)")
