"""Hybrid Monte Carlo engine for the two-dimensional lattice Schwinger model
with a family of splitting integrators, including nested and adapted-nested
force-gradient schemes."""

from .config import HmcConfig, SweepPlan, desk_scale, format_config, parse_experiment_file
from .fermion import (InversionCounter, SolveReport, SolverError, WilsonDirac,
                      chi_xi, fermion_action, fermion_force,
                      fg_fermion_fermion, fg_gauge_fermion, pseudofermion_heatbath,
                      solve_dirac, solve_dirac_dagger, solve_normal)
from .gauge import (avg_plaquette, fg_fermion_gauge, fg_gauge_gauge,
                    gauge_action, gauge_force, plaquettes)
from .hmc import (DhMeasurement, TrajectoryStats, hamiltonian, hmc_update,
                  measure_dh, metropolis, thermalize)
from .integrators import (INVERSIONS_PER_STEP, SCHEME_IDS, IntegratorSpec,
                          MdState, TrajectoryResult, integrate_trajectory)
from .lattice import (LatticeGeom, cold_start, hot_start, kinetic_energy,
                      load_gauge_config, make_rng, rotate_links,
                      sample_momenta, save_gauge_config, shift_momenta,
                      wrap_angles)

__version__ = "0.1.0"
