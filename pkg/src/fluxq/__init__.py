"""fluxq: quantization and Gaussian simulation of lumped-element LC circuits."""

from .lagrangian import (
    AugmentationRecord,
    GeometricMode,
    GeometricPolicy,
    QuadraticLagrangian,
    Representation,
    augment_geometric,
    charge_law_residual,
    extended_node_lagrangian,
    flux_law_residual,
    loop_lagrangian,
    node_lagrangian,
)
from .netlist import (
    Circuit,
    Component,
    ComponentKind,
    NetlistError,
    parse_netlist,
    serialize_netlist,
    validate_circuit,
)
from .quantize import (
    HBAR,
    GaussianState,
    HamiltonianSystem,
    ModeDecomposition,
    QuantizabilityDiagnosis,
    SingularKineticMatrix,
    diagnose_quantizability,
    ground_state,
    legendre_transform,
    mode_attribution,
    mode_uncertainty_products,
    normal_modes,
)
from .simulate import (
    ComponentSeries,
    InconsistentInitialConditions,
    ModeSolution,
    StepTooLarge,
    Trajectory,
    evolution_matrix,
    evolve_leapfrog,
    evolve_modes,
    initial_state,
    observables,
    propagate_covariance,
)
from .topology import (
    FundamentalLoop,
    SpanningTree,
    TopologyReport,
    build_spanning_tree,
    fundamental_loops,
    passive_loop_deficiency,
    passive_nodes,
    reduce_circuit,
    topology_report,
)

__all__ = [
    "AugmentationRecord",
    "Circuit",
    "Component",
    "ComponentKind",
    "ComponentSeries",
    "FundamentalLoop",
    "GaussianState",
    "GeometricMode",
    "GeometricPolicy",
    "HBAR",
    "HamiltonianSystem",
    "InconsistentInitialConditions",
    "ModeDecomposition",
    "ModeSolution",
    "NetlistError",
    "QuadraticLagrangian",
    "QuantizabilityDiagnosis",
    "Representation",
    "SingularKineticMatrix",
    "SpanningTree",
    "StepTooLarge",
    "TopologyReport",
    "Trajectory",
    "augment_geometric",
    "build_spanning_tree",
    "charge_law_residual",
    "diagnose_quantizability",
    "evolution_matrix",
    "evolve_leapfrog",
    "evolve_modes",
    "extended_node_lagrangian",
    "flux_law_residual",
    "fundamental_loops",
    "ground_state",
    "initial_state",
    "legendre_transform",
    "loop_lagrangian",
    "mode_attribution",
    "mode_uncertainty_products",
    "node_lagrangian",
    "normal_modes",
    "observables",
    "parse_netlist",
    "passive_loop_deficiency",
    "passive_nodes",
    "propagate_covariance",
    "reduce_circuit",
    "serialize_netlist",
    "topology_report",
    "validate_circuit",
]
