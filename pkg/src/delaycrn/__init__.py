"""Mass-action reaction networks with constant or distributed time delays.

Parse a network description, analyze its structure (conservation laws,
weak reversibility, deficiency), locate complex-balanced and in-class
equilibria, integrate the delayed dynamics with dense output, monitor the
conserved functionals and the Lyapunov functional along trajectories, and
verify the dynamical claims numerically.
"""

from .analysis import (
    ChainErrorRow,
    ChainRunRow,
    ChainStudy,
    ClassCountReport,
    OmegaLimitVerdict,
    WindowWitness,
    WrExistenceReport,
    chain_convergence_study,
    classify_omega_limit,
    verify_class_count,
    verify_wr_existence,
)
from .dsl import parse_network, parse_network_file
from .engine import (
    SegmentView,
    SimConfig,
    Trajectory,
    chain_initial_state,
    expand_chain,
    rhs,
    simulate,
    simulate_ode,
)
from .equilibrium import (
    EquilibriumResult,
    check_complex_balance,
    find_complex_balanced_equilibrium,
    in_class_equilibrium,
)
from .errors import (
    ConvergenceError,
    DelayCrnError,
    IntegrationError,
    NetworkSyntaxError,
    NetworkValidationError,
    NotComplexBalancedError,
    NotWeaklyReversibleError,
)
from .functionals import (
    ClassKey,
    FunctionalTrace,
    class_key,
    compute_h,
    h_constant,
    lyapunov_V,
    map_P,
    trajectory_functionals,
)
from .histories import AffinePower, Constant, HistoryFunction, Table, parse_history_spec
from .kernels import NO_DELAY, DelayKernel, PointMassKernel, TableKernel, UniformKernel
from .network import Complex, Reaction, ReactionNetwork, SpeciesId
from .structure import ComplexGraph, StoichInfo, analyze_structure, complex_graph

__version__ = "0.1.0"

__all__ = [
    "AffinePower",
    "ChainErrorRow",
    "ChainRunRow",
    "ChainStudy",
    "ClassCountReport",
    "ClassKey",
    "Complex",
    "ComplexGraph",
    "Constant",
    "ConvergenceError",
    "DelayCrnError",
    "DelayKernel",
    "EquilibriumResult",
    "FunctionalTrace",
    "HistoryFunction",
    "IntegrationError",
    "NO_DELAY",
    "NetworkSyntaxError",
    "NetworkValidationError",
    "NotComplexBalancedError",
    "NotWeaklyReversibleError",
    "OmegaLimitVerdict",
    "PointMassKernel",
    "Reaction",
    "ReactionNetwork",
    "SegmentView",
    "SimConfig",
    "SpeciesId",
    "StoichInfo",
    "Table",
    "TableKernel",
    "Trajectory",
    "UniformKernel",
    "WindowWitness",
    "WrExistenceReport",
    "analyze_structure",
    "chain_convergence_study",
    "chain_initial_state",
    "check_complex_balance",
    "class_key",
    "classify_omega_limit",
    "complex_graph",
    "compute_h",
    "expand_chain",
    "find_complex_balanced_equilibrium",
    "h_constant",
    "in_class_equilibrium",
    "lyapunov_V",
    "map_P",
    "parse_history_spec",
    "parse_network",
    "parse_network_file",
    "rhs",
    "simulate",
    "simulate_ode",
    "trajectory_functionals",
    "verify_class_count",
    "verify_wr_existence",
]
