"""Numerical laboratory for stationary solutions of reaction-diffusion-ODE
systems with Neumann boundary conditions."""

__version__ = "0.1.0"

from .kinetics import (KineticModel, SteadyState, Branch, BranchSet,
                       eval_f, eval_g, jacobian, constant_steady_states,
                       branches, branch_derivative)
from .grid import (Grid, build_grid, NeumannLaplacian, neumann_laplacian,
                   laplacian_eigenvalues, DomainPartition, stripe_partition,
                   uniform_partition, read_mask, write_mask_pbm,
                   generate_ey_mask, save_field_csv, load_field_csv)
from .stationary import (StationaryField, DeviationReport, solve_discontinuous,
                         deviation_sweep, bifurcation_gammas,
                         solve_perturbed_regular, check_sineq,
                         find_admissible_oregonator_alpha,
                         find_admissible_predator_prey_params)
from .stability import (Linearization, SpectrumReport, AssumptionAudit,
                        assemble_linearization, rightmost_spectrum,
                        audit_assumptions, classify_regular,
                        autocatalysis_check)
from .simulate import (SimulationConfig, Trajectory, step, run, cfl_dt,
                       run_ey_experiment, perturbation_decay)
