"""Heat transport and two-photon statistics of a dissipative qubit-resonator system."""

from .dme import (BathSpec, DisconnectedStateSpace, RateMatrix, SteadyState, TransitionRateTable,
                  bose_occupation, build_rate_matrix, evolve_populations, ohmic_density,
                  solve_steady_state, transition_rates)
from .fock import annihilation, creation, displacement, pauli, tensor
from .observables import (CurrentBreakdown, G2Result, g2_approx, g2_zero, gibbs_populations,
                          heat_current, x_minus_operator)
from .oracles import (jx_weak, jz_weak, sigma_x_overlap_exact, sigma_x_overlap_second_order,
                      zeroth_populations)
from .point import converge_truncation, evaluate_point
from .spectrum import (EigenSystem, ModelParams, build_hamiltonian, diagonalize, jc_solution,
                       longitudinal_solution, solve)

__version__ = "0.1.0"
