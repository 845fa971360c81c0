"""Point configurations with small Riesz energy near compact sets, and
quantitative equidistribution diagnostics for Newtonian equilibria."""

__version__ = "0.1.0"

from .errors import (
    CoincidentPointsError,
    GridBudgetError,
    InfeasiblePointError,
    MissingHolderDataError,
    RieszPointsError,
    SetDefinitionError,
    SingularityError,
    UnsupportedOracleError,
)
from .kernel import KernelSpec, kernel_gradient, kernel_value, newtonian_flag
from .sets import (
    CompactSetModel,
    EquilibriumOracle,
    ball,
    box,
    distance_to_set,
    equilibrium_oracle,
    load_set_definition,
    parse_set_definition,
    project_to_set,
    sample_candidates,
    sphere_surface,
    union_of_balls,
)
from .measures import (
    PointConfig,
    SmoothedConfig,
    closeness_m_E,
    discrete_energy,
    discrete_potential,
    moment_distance,
    read_points_csv,
    smoothed_energy_terms,
    smoothed_potential,
    write_points_csv,
)
from .configurations import (
    FeketeRun,
    FeketeSearchParams,
    LejaState,
    fekete_search,
    fekete_search_run,
    leja_next,
    leja_sequence,
    random_config,
)
from .discrepancy import (
    DiscrepancyReport,
    TestFunction,
    dirichlet_integral,
    modulus_of_continuity,
    phi_for_potential,
    radial_hat,
    sup_potential_deficit,
    discrepancy_bound,
    potential_error,
    unit_sphere_area,
)

__all__ = [name for name in dir() if not name.startswith("_")]
