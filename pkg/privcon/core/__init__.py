from .augment import (
    AugmentationKind,
    AugmentedSystem,
    SplitChoice,
    build_alg1,
    build_alg2,
    build_alg3,
    decode_initial_state,
    recover_split,
    solve_p1d,
    wrap_raw,
)
from .errors import PreconditionError, PrivconError
from .exactla import RationalMatrix, RowSpace, krylov_rowspace, left_eigenvector_unit, nullspace, rank, rref
from .netgraph import WeightedDigraph, period, read_graph, reversibility_vector, to_matrix
from .privacy import ObserverSpec, PrivacyAuditReport, audit, can_recover, is_observable, pbh_matrix
from .simulate import SimulationTrace, convergence_stats, run_matrix
from .agents import AgentNetwork, run_agents, run_distributed_s

__all__ = [
    "AugmentationKind",
    "AugmentedSystem",
    "SplitChoice",
    "build_alg1",
    "build_alg2",
    "build_alg3",
    "decode_initial_state",
    "recover_split",
    "solve_p1d",
    "wrap_raw",
    "PreconditionError",
    "PrivconError",
    "RationalMatrix",
    "RowSpace",
    "krylov_rowspace",
    "left_eigenvector_unit",
    "nullspace",
    "rank",
    "rref",
    "WeightedDigraph",
    "period",
    "read_graph",
    "reversibility_vector",
    "to_matrix",
    "ObserverSpec",
    "PrivacyAuditReport",
    "audit",
    "can_recover",
    "is_observable",
    "pbh_matrix",
    "SimulationTrace",
    "convergence_stats",
    "run_matrix",
    "AgentNetwork",
    "run_agents",
    "run_distributed_s",
]
