"""Electrical currents on finite and infinite resistor networks."""

from .analysis import (
    CycleTerm,
    Decomposition,
    KirchhoffError,
    RayPotential,
    ResidualReport,
    cut_flux,
    cycle_sum,
    decompose_circulation,
    dl_distance,
    energy,
    kirchhoff_residuals,
    node_residuals,
    potential_from_flow,
    power_inequality_holds,
    ray_potential,
    voltage_drop,
)
from .cycles import SpanningForest, fundamental_cycles, spanning_forest
from .generators import (
    FAMILIES,
    ContractedNetwork,
    InfiniteFamily,
    Ray,
    ResistanceSchedule,
    conductance_summable,
    contraction,
    family_from_dict,
    make_family,
    random_network,
    ray,
    truncation,
)
from .limits import (
    ExhaustionReport,
    LadderCirculation,
    LimitComparison,
    compare_limits,
    draynet_pathological_flow,
    draynet_report,
    energy_chain,
    ladder_circulation,
    run_exhaustion,
)
from .netcore import (
    Edge,
    Flow,
    Multigraph,
    Network,
    NetworkError,
    OrientedEdge,
    build_network,
    flow_from_dict,
    flow_to_dict,
    network_from_dict,
    network_to_dict,
)
from .solver import SolveReport, SolverError, effective_resistance, minimize_energy, solve_current
from .walk import HittingReport, escape_fractions, hitting_exact, hitting_mc, potential_vs_hitting

__version__ = "0.1.0"
