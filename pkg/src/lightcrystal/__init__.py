"""Coupled Gross-Pitaevskii/Helmholtz simulator for light-atom crystallization.

A quasi-1D condensate in a box is illuminated by two counterpropagating,
non-interfering beams.  The package solves the self-consistent field/matter
problem, relaxes crystalline ground states, evolves quenches, and computes
collective excitation spectra below and above the crystallization threshold.
All quantities are dimensionless (recoil units, lengths in laser wavelengths).
"""

__version__ = "0.1.0"

from .driver import (RunRecord, Snapshot, ground_state, quench_evolution,
                     seeded_initial_state, solve_fields, take_snapshot,
                     threshold_scan)
from .errors import ConfigurationError, NumericsError
from .gpe import (CondensateState, chemical_potential_and_residual,
                  homogeneous_state, kinetic_energy, split_step, total_energy)
from .helmholtz import (FieldState, ScatteringCoefficients,
                        integrate_helmholtz_ivp, scattering_coefficients,
                        scattering_coefficients_ivp_oracle, solve_driven_fields)
from .io import RunConfig, parse_config, serialize_config, write_outputs
from .model import (ModelParams, SusceptibilityProfile,
                    critical_intensity_closed_form, drive_field_intensities,
                    effective_wavenumber, lattice_spacing, optical_potential,
                    roton_momentum, susceptibility_profile)
from .observables import (MaximaTrajectories, density_contrast,
                          measure_lattice_spacing, reflectivity,
                          track_intensity_maxima)
from .spectrum import (ExcitationModes, LinearizationMatrix,
                       build_homogeneous_matrix, build_linearization_matrix,
                       diagonalize_and_classify, homogeneous_dispersion,
                       phonon_gap, phonon_gap_estimate)

__all__ = [name for name in dir() if not name.startswith("_")]
