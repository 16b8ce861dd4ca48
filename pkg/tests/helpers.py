"""Shared builders and independent oracles for the test suite.

The oracles here deliberately avoid the library's solution paths: the dense
steady-state solve below is plain linear algebra (no state reduction), and
the chain oracles are brute-force enumeration. They exist so the production
algorithms can be checked against something that cannot share their bugs.
"""

from __future__ import annotations

import json
import math
from itertools import product
from pathlib import Path

import numpy as np

from sfcavail import (
    ChainConfig,
    EvaluatedChain,
    LayerParams,
    NodeSpec,
    OptimizationRequest,
    validate_request,
)

REQUESTS_DIR = Path(__file__).resolve().parent.parent / "requests"

DEFAULT_HW = LayerParams(60000.0, 8.0, 1.0)
DEFAULT_VM = LayerParams(5000.0, 1.0, 1.0)
DEFAULT_VNF = LayerParams(3000.0, 0.5, 1.0)


def default_spec(name: str = "node", min_active_vnfs: int = 1) -> NodeSpec:
    return NodeSpec(name, DEFAULT_HW, DEFAULT_VM, DEFAULT_VNF, min_active_vnfs)


def vims_specs() -> list[NodeSpec]:
    return [default_spec(n) for n in ("P-CSCF", "S-CSCF", "I-CSCF", "HSS")]


def load_vims_raw() -> dict:
    with open(REQUESTS_DIR / "vims.json", encoding="utf-8") as handle:
        return json.load(handle)


def load_vims_request() -> OptimizationRequest:
    return validate_request(load_vims_raw())


def random_layer(rng: np.random.Generator, max_ratio: float = 1e6) -> LayerParams:
    """Random positive layer parameters with MTTF/MTTR ratio up to max_ratio."""
    mttr = float(10.0 ** rng.uniform(-1, 1))
    ratio = float(10.0 ** rng.uniform(0, math.log10(max_ratio)))
    cost = float(rng.uniform(0.1, 10.0))
    return LayerParams(mttf=mttr * ratio, mttr=mttr, unit_cost=cost)


def random_spec(rng: np.random.Generator, name: str = "node", max_ratio: float = 1e6) -> NodeSpec:
    return NodeSpec(
        name, random_layer(rng, max_ratio), random_layer(rng, max_ratio), random_layer(rng, max_ratio)
    )


def dense_oracle(generator: np.ndarray) -> np.ndarray:
    """Independent stationary-distribution oracle: solve pi Q = 0, sum(pi) = 1."""
    n = generator.shape[0]
    a = generator.T.copy()
    a[-1, :] = 1.0
    b = np.zeros(n)
    b[-1] = 1.0
    return np.linalg.solve(a, b)


def pareto_oracle(candidates):
    """O(n^2) pairwise-dominance frontier with the same tie handling."""

    def dominates(a, b):
        return (
            a.availability >= b.availability
            and a.cost <= b.cost
            and (a.availability > b.availability or a.cost < b.cost)
        )

    survivors = [c for c in candidates if not any(dominates(o, c) for o in candidates)]
    by_objectives: dict[tuple, object] = {}
    for c in survivors:
        key = (c.cost, c.availability)
        if key not in by_objectives or c.config.vnf_counts < by_objectives[key].config.vnf_counts:
            by_objectives[key] = c
    return sorted(by_objectives.values(), key=lambda c: c.cost)


def brute_force_top_k(per_node_candidates, availability_target, max_sfc):
    """Exhaustive chain ranking over arbitrary per-node candidate lists.

    Accumulates cost and availability node by node, left to right, exactly as
    the search does, so results are comparable bit for bit.
    """
    chains = []
    for combo in product(*per_node_candidates):
        cost = 0.0
        availability = 1.0
        for candidate in combo:
            cost += candidate.cost
            availability *= candidate.availability
        if availability >= availability_target:
            configs = tuple(c.config for c in combo)
            chains.append(
                (
                    (cost, -availability, tuple(c.vnf_counts for c in configs)),
                    EvaluatedChain(
                        config=ChainConfig(configs), availability=availability, cost=cost
                    ),
                )
            )
    chains.sort(key=lambda pair: pair[0])
    return [chain for _, chain in chains[:max_sfc]]
