"""Two-species mosquito competition: equilibria, invasion criteria,
stationary fronts and a 1D reaction-diffusion simulator."""

from .criterion import (GammaResult, GammaSpec, gamma, gamma_analysis, gamma_derivative,
                        homogeneous_spec, interface_point, make_gamma_spec, patch_spec)
from .errors import (ConfigError, ConstructionFailedError, CriterionFailedError,
                     DegenerateParametersError, ModelError, NonConvergenceError, NumericalError)
from .model import (SHARED, SPECIES1, SPECIES2, EquilibriumSet, Habitat, SharedParams,
                    SpeciesParams, StabilityReport, basic_reproduction_number,
                    coexistence_equilibrium, competition_threshold, equilibria,
                    equilibrium_stability, single_species_equilibrium, w_of_F)
from .profiles import (BridgeResult, HalfSpaceSolution, HeterogeneousProfiles, Profile,
                       assemble_heterogeneous, bridge_profile, closed_form_bounds,
                       half_space_stationary, homogeneous_initial_data, sub_solution_profile)
from .simulator import (Diagnostics, FullState, Grid1D, ReducedState, SimConfig, SimResult,
                        Trajectory, ordering_monitor, reduction_experiment, segregation_integral,
                        simulate, step_full, step_reduced)

__version__ = "0.1.0"
