"""Stark-tuned quantum-dot qubits coupled through a THz cavity."""

from .cavity import (CavityMode, Couplings, LaserDrive, budgets, couplings, laser_rabi,
                     two_photon_rabi, vacuum_field, vacuum_rabi)
from .config import RunConfig
from .electronic import (AxialGrid, AxialSpectrum, QDGeometry, RadialSpectrum, build_potential,
                         dipole_z, radial_spectrum, solve_axial, solve_geometry)
from .errors import ConfigurationError, DivisionHazard, NumericalError, ResonanceUnreachable
from .gate import (CnotOptions, GateReport, adiabaticity_scan, calibrate_cnot,
                   calibrate_two_photon, plan_cnot, simulate_gate)
from .hamiltonian import Basis, CompositeState, SystemModel, assemble_hamiltonian, build_model
from .phonon import (ApproxDotShape, PhononEnvironment, axial_overlap, dimensionless_params,
                     golden_rule_prefactor, radial_overlap, relaxation_rate)
from .propagation import Propagator, PulseSegment, PulseSequence, evolve
from .stark import (OperatingPoints, StarkMap, find_resonance_field, operating_points,
                    stark_map)

__version__ = "0.1.0"
