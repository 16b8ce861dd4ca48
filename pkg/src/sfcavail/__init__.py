"""Availability-aware redundancy planning for service function chains."""

from .domain import (
    ChainConfig,
    EvalMode,
    EvaluatedChain,
    FieldError,
    LayerParams,
    NodeConfig,
    NodeSpec,
    OptimizationRequest,
    RequestValidationError,
    canonical_request_key,
    chain_cost,
    node_cost,
    steady_state_availability,
    validate_chain_config,
    validate_request,
)
from .markov import (
    DistributionCache,
    NrMarkovModel,
    SolverError,
    build_nr_model,
    chain_availability,
    dense_steady_state,
    gth_steady_state,
    node_availability,
    nr_instance_distribution,
    solve_steady_state,
)
from .optimize import (
    NodeCandidate,
    OptimizationResult,
    SearchReport,
    enumerate_node_configs,
    evaluate_all_nodes,
    optimize,
    pareto_prune,
    select_top_k,
)
from .simulate import NrDistributionEstimate, SimConfig, SimEstimate, simulate_chain, simulate_nr

__version__ = "0.1.0"

__all__ = [
    "ChainConfig",
    "DistributionCache",
    "EvalMode",
    "EvaluatedChain",
    "FieldError",
    "LayerParams",
    "NodeCandidate",
    "NodeConfig",
    "NodeSpec",
    "NrDistributionEstimate",
    "NrMarkovModel",
    "OptimizationRequest",
    "OptimizationResult",
    "RequestValidationError",
    "SearchReport",
    "SimConfig",
    "SimEstimate",
    "SolverError",
    "build_nr_model",
    "canonical_request_key",
    "chain_availability",
    "chain_cost",
    "dense_steady_state",
    "enumerate_node_configs",
    "evaluate_all_nodes",
    "gth_steady_state",
    "node_availability",
    "node_cost",
    "nr_instance_distribution",
    "optimize",
    "pareto_prune",
    "select_top_k",
    "simulate_chain",
    "simulate_nr",
    "solve_steady_state",
    "steady_state_availability",
    "validate_chain_config",
    "validate_request",
]
