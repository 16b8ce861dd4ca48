"""Redundancy search: enumerate node configs, Pareto-prune, pick top-K chains.

The search is exact: its output equals exhaustive enumeration of every chain
config, filtered by the availability target and ranked by (cost ascending,
availability descending, config ascending). Candidates are explored
depth-first in that per-node order with two admissible bounds: an optimistic
availability bound (current product times the product of the remaining
nodes' best availabilities) and a cost lower bound against the current top-K
cutoff. Dominated node configs are therefore never *eliminated* - for K > 1
the true ranking can contain a chain that swaps a frontier config for a
shadowed one - but the bounds make them nearly free to carry: anything too
weak to reach the target or too expensive to enter the current top K is cut
without expansion. The per-node Pareto frontier still determines the
reported pruned search-space size, which is what the bounds effectively
explore.
"""

from __future__ import annotations

import bisect
import math
import time
from dataclasses import dataclass, field
from itertools import combinations_with_replacement
from typing import Sequence

from .domain import (
    ChainConfig,
    EvaluatedChain,
    NodeConfig,
    OptimizationRequest,
    node_cost,
)
from .markov import DistributionCache, node_availability


@dataclass(frozen=True)
class NodeCandidate:
    """One enumerated node config with its availability and cost."""

    config: NodeConfig
    availability: float
    cost: float


@dataclass
class SearchReport:
    """Size and effort counters for one optimization run.

    ``raw_chain_count`` is the unpruned product of per-node config counts (an
    exact big integer); ``pruned_chain_count`` is the frontier product the
    search actually ranges over.
    """

    raw_chain_count: int
    pruned_chain_count: int
    explored_nodes: int
    wall_time_seconds: float


@dataclass
class OptimizationResult:
    """Outcome of one request: ranked feasible chains plus search counters.

    When no chain meets the target, ``chains`` is empty, ``feasible`` is
    False, and ``max_achievable_availability`` reports the best the catalog
    could do (the product of per-node maxima).
    """

    chains: list[EvaluatedChain]
    search_report: SearchReport
    feasible: bool
    max_achievable_availability: float


def enumerate_node_configs(max_nr: int, max_vnf: int) -> list[NodeConfig]:
    """All multisets of 1..max_nr replicas with 1..max_vnf instances each.

    Count is sum over r of C(max_vnf + r - 1, r); e.g. (4, 6) gives
    6 + 21 + 56 + 126 = 209.
    """
    if max_nr < 1 or max_vnf < 1:
        raise ValueError("max_nr and max_vnf must be >= 1")
    configs = []
    values = range(max_vnf, 0, -1)  # descending, so tuples come out canonical
    for r in range(1, max_nr + 1):
        for counts in combinations_with_replacement(values, r):
            configs.append(NodeConfig(counts))
    return configs


def pareto_prune(candidates: Sequence[NodeCandidate]) -> list[NodeCandidate]:
    """Drop every dominated candidate; return the frontier sorted by cost.

    a dominates b iff a.availability >= b.availability and a.cost <= b.cost
    with at least one strict. Among candidates identical in both objectives
    only the lexicographically smallest config is kept, so the output is
    deterministic. Comparisons are exact on the computed doubles.
    """
    ordered = sorted(
        candidates, key=lambda c: (c.cost, -c.availability, c.config.vnf_counts)
    )
    frontier: list[NodeCandidate] = []
    best_availability = -math.inf
    for candidate in ordered:
        if candidate.availability > best_availability:
            frontier.append(candidate)
            best_availability = candidate.availability
    return frontier


def evaluate_all_nodes(
    request: OptimizationRequest, cache: DistributionCache | None = None
) -> list[list[NodeCandidate]]:
    """Availability and cost for every enumerated config of every node.

    The shared cache means each distinct (layer params, k) replica model is
    solved once, not once per config that contains it.
    """
    if cache is None:
        cache = DistributionCache()
    configs = enumerate_node_configs(request.max_nr, request.max_vnf)
    per_node: list[list[NodeCandidate]] = []
    for spec in request.nodes:
        candidates = [
            NodeCandidate(
                config=config,
                availability=node_availability(spec, config, request.eval_mode, cache),
                cost=node_cost(spec, config),
            )
            for config in configs
        ]
        per_node.append(candidates)
    return per_node


@dataclass
class _TopK:
    """Bounded, ordered container of the best chains found so far."""

    limit: int
    entries: list[tuple[tuple, EvaluatedChain]] = field(default_factory=list)

    def offer(self, key: tuple, chain: EvaluatedChain) -> None:
        bisect.insort(self.entries, (key, chain))
        if len(self.entries) > self.limit:
            self.entries.pop()

    @property
    def full(self) -> bool:
        return len(self.entries) >= self.limit

    @property
    def worst_cost(self) -> float:
        return self.entries[-1][0][0]


def select_top_k(
    per_node_candidates: Sequence[Sequence[NodeCandidate]],
    availability_target: float,
    max_sfc: int,
) -> tuple[list[EvaluatedChain], SearchReport]:
    """Exact top-``max_sfc`` chains meeting the target, cheapest first.

    Ordering is (cost ascending, availability descending, config ascending):
    the cheapest chain that respects the availability requirement ranks
    first. The output equals exhaustive enumeration over the full candidate
    product. Infeasibility is a result (empty list), not an error.
    """
    if any(len(c) == 0 for c in per_node_candidates):
        raise ValueError("every node must have at least one candidate")
    start = time.perf_counter()
    n = len(per_node_candidates)
    ranked = [
        sorted(c, key=lambda x: (x.cost, -x.availability, x.config.vnf_counts))
        for c in per_node_candidates
    ]

    # Admissible bounds over the remaining nodes i..n-1.
    suffix_min_cost = [0.0] * (n + 1)
    suffix_max_availability = [1.0] * (n + 1)
    for i in range(n - 1, -1, -1):
        suffix_min_cost[i] = suffix_min_cost[i + 1] + ranked[i][0].cost
        suffix_max_availability[i] = suffix_max_availability[i + 1] * max(
            c.availability for c in ranked[i]
        )

    top = _TopK(limit=max_sfc)
    explored = 0
    chosen: list[NodeCandidate] = []

    def descend(i: int, cost_so_far: float, availability_so_far: float) -> None:
        nonlocal explored
        if i == n:
            configs = tuple(c.config for c in chosen)
            chain = EvaluatedChain(
                config=ChainConfig(configs),
                availability=availability_so_far,
                cost=cost_so_far,
            )
            key = (cost_so_far, -availability_so_far, tuple(c.vnf_counts for c in configs))
            top.offer(key, chain)
            return
        for candidate in ranked[i]:
            cost = cost_so_far + candidate.cost
            # Candidates are cost ascending: once the optimistic completion
            # is strictly worse than the current cutoff, the rest are too.
            if top.full and cost + suffix_min_cost[i + 1] > top.worst_cost:
                break
            availability = availability_so_far * candidate.availability
            if availability * suffix_max_availability[i + 1] < availability_target:
                continue
            explored += 1
            chosen.append(candidate)
            descend(i + 1, cost, availability)
            chosen.pop()

    descend(0, 0.0, 1.0)

    report = SearchReport(
        raw_chain_count=math.prod(len(c) for c in per_node_candidates),
        pruned_chain_count=math.prod(len(pareto_prune(c)) for c in per_node_candidates),
        explored_nodes=explored,
        wall_time_seconds=time.perf_counter() - start,
    )
    return [chain for _, chain in top.entries], report


def max_achievable_availability(per_node_candidates: Sequence[Sequence[NodeCandidate]]) -> float:
    """Best possible chain availability: product of per-node maxima."""
    return math.prod(max(c.availability for c in node) for node in per_node_candidates)


def optimize(request: OptimizationRequest) -> OptimizationResult:
    """Run the full pipeline: evaluate, search, report."""
    start = time.perf_counter()
    cache = DistributionCache()
    per_node = evaluate_all_nodes(request, cache)
    chains, report = select_top_k(per_node, request.availability_target, request.max_sfc)
    report.wall_time_seconds = time.perf_counter() - start
    return OptimizationResult(
        chains=chains,
        search_report=report,
        feasible=bool(chains),
        max_achievable_availability=max_achievable_availability(per_node),
    )
