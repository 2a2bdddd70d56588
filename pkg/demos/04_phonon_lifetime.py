r"""
Phonon-limited lifetime
=======================

Golden-rule LA-phonon emission rate from |1> to |0> with square-well and
Bessel approximate wavefunctions, and its dependence on the level spacing.
"""

import numpy as np

from thzqd.phonon import (dimensionless_params, golden_rule_prefactor, lifetime_sweep,
                          relaxation_rate, write_sweep_csv)

k, alpha, beta = dimensionless_params(12.25)
print(f"K10 = {k:.3f} 1/nm, alpha = {alpha:.2f}, beta = {beta:.2f}")
rate, tau = relaxation_rate(12.25)
print(f"prefactor {golden_rule_prefactor(12.25):.3e} 1/s, rate {rate:.3e} 1/s,"
      f" tau = {tau * 1e6:.0f} us")

rows = lifetime_sweep(np.linspace(5, 25, 21))
for r in rows[::4]:
    print(f"  E10 = {r['E10_meV']:5.1f} meV   tau = {r['tau_s']:.3e} s")
write_sweep_csv("phonon_sweep.csv", rows)
