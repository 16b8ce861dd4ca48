"""JSON wire formats shared by the REST service and the CLI.

Availability values serialize as decimal strings with nine fractional digits
so that six-nines results survive any client's float round trip. Chain
configs serialize per node as zero-padded arrays, e.g. ``"S-CSCF": [3,3,0,0]``.

The search report's wall time is deliberately not part of the result payload:
the payload must be byte-identical whenever the same request is solved again
(cache hits, CLI vs service), and timing is not. It is surfaced separately in
the service response envelope and the CLI's human-readable output.
"""

from __future__ import annotations

import json
from typing import Any

from .domain import EvaluatedChain, OptimizationRequest
from .optimize import OptimizationResult, SearchReport


def format_availability(value: float) -> str:
    """Nine fractional digits, e.g. 0.999997664."""
    return f"{value:.9f}"


def format_cost(value: float) -> int | float:
    """Integral costs serialize as JSON integers (40, not 40.0)."""
    return int(value) if float(value).is_integer() else float(value)


def chain_payload(request: OptimizationRequest, chain: EvaluatedChain) -> dict[str, Any]:
    return {
        "nodes": {
            spec.name: config.padded(request.max_nr)
            for spec, config in zip(request.nodes, chain.config.node_configs)
        },
        "availability": format_availability(chain.availability),
        "cost": format_cost(chain.cost),
    }


def search_report_payload(report: SearchReport) -> dict[str, Any]:
    return {
        "raw_chain_count": report.raw_chain_count,
        "raw_chain_count_sci": f"{float(report.raw_chain_count):.3e}",
        "pruned_chain_count": report.pruned_chain_count,
        "explored_nodes": report.explored_nodes,
    }


def result_payload(request: OptimizationRequest, result: OptimizationResult) -> dict[str, Any]:
    """The canonical result body; deterministic for a given request."""
    payload: dict[str, Any] = {
        "feasible": result.feasible,
        "chains": [chain_payload(request, chain) for chain in result.chains],
        "search_report": search_report_payload(result.search_report),
    }
    if not result.feasible:
        payload["max_achievable_availability"] = format_availability(
            result.max_achievable_availability
        )
    return payload


def dumps_canonical(payload: Any) -> str:
    """Exactly the byte form the service's JSON responses use."""
    return json.dumps(payload, ensure_ascii=False, allow_nan=False, separators=(",", ":"))
