"""Core value types, cost arithmetic, and request validation.

A service chain is an ordered series of virtualized nodes. Each node is
deployed as one or more network replicas (NRs): a hardware + virtual machine
stack hosting some number of software instances. Redundancy is decided per
node by choosing how many replicas to deploy and how many instances each one
hosts; this module holds the value types for those decisions plus the
availability and cost primitives that everything else composes.

All times are in hours; costs are dimensionless units.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass
from enum import Enum
from typing import Any, Iterable, Sequence


class EvalMode(str, Enum):
    """How node availability is evaluated.

    ``exact`` solves the replica's Markov model; ``structural`` uses the
    product-of-layer-availabilities approximation.
    """

    EXACT = "exact"
    STRUCTURAL = "structural"


@dataclass(frozen=True)
class LayerParams:
    """Failure/repair statistics and unit cost for one replica layer.

    Attributes:
        mttf: mean time to failure, hours, > 0.
        mttr: mean time to repair, hours, > 0.
        unit_cost: cost of deploying one unit of this layer, >= 0.
    """

    mttf: float
    mttr: float
    unit_cost: float

    def __post_init__(self) -> None:
        if not (isinstance(self.mttf, (int, float)) and self.mttf > 0):
            raise ValueError(f"mttf must be > 0, got {self.mttf!r}")
        if not (isinstance(self.mttr, (int, float)) and self.mttr > 0):
            raise ValueError(f"mttr must be > 0, got {self.mttr!r}")
        if not (isinstance(self.unit_cost, (int, float)) and self.unit_cost >= 0):
            raise ValueError(f"unit_cost must be >= 0, got {self.unit_cost!r}")

    @property
    def availability(self) -> float:
        """Two-state steady-state availability of this layer in isolation."""
        return steady_state_availability(self.mttf, self.mttr)

    @property
    def failure_rate(self) -> float:
        return 1.0 / self.mttf

    @property
    def repair_rate(self) -> float:
        return 1.0 / self.mttr


@dataclass(frozen=True)
class NodeSpec:
    """Per-layer parameters for one chain node.

    ``min_active_vnfs`` is the node-up criterion: the node delivers service
    while at least that many software instances are operational across all of
    its replicas. The default of 1 is the weakest criterion that keeps the
    chain flowing.
    """

    name: str
    hw: LayerParams
    vm: LayerParams
    vnf: LayerParams
    min_active_vnfs: int = 1

    def __post_init__(self) -> None:
        if not isinstance(self.name, str) or not self.name:
            raise ValueError("node name must be a non-empty string")
        if not isinstance(self.min_active_vnfs, int) or self.min_active_vnfs < 1:
            raise ValueError(
                f"min_active_vnfs must be an integer >= 1, got {self.min_active_vnfs!r}"
            )


@dataclass(frozen=True, order=True)
class NodeConfig:
    """Redundancy plan for one node: instance counts per replica, as a multiset.

    Replicas within a node are interchangeable, so the counts are stored
    canonically as a non-increasing tuple with zeros stripped, e.g. ``(3, 3)``
    for two replicas of three instances each. Use :meth:`padded` for the
    zero-padded display form ``[3, 3, 0, 0]``.
    """

    vnf_counts: tuple[int, ...]

    def __post_init__(self) -> None:
        if not self.vnf_counts:
            raise ValueError("config must have at least one replica")
        for c in self.vnf_counts:
            if not isinstance(c, int) or c < 1:
                raise ValueError(f"instance counts must be integers >= 1, got {c!r}")
        if any(a < b for a, b in zip(self.vnf_counts, self.vnf_counts[1:])):
            raise ValueError(f"counts must be non-increasing, got {self.vnf_counts}")

    @classmethod
    def from_counts(cls, counts: Iterable[int]) -> "NodeConfig":
        """Canonicalize an arbitrary count sequence (zeros dropped, sorted)."""
        cleaned = []
        for c in counts:
            if not isinstance(c, int) or isinstance(c, bool) or c < 0:
                raise ValueError(f"instance counts must be integers >= 0, got {c!r}")
            if c > 0:
                cleaned.append(c)
        return cls(tuple(sorted(cleaned, reverse=True)))

    @property
    def nr_count(self) -> int:
        """Number of deployed replicas."""
        return len(self.vnf_counts)

    @property
    def total_vnfs(self) -> int:
        return sum(self.vnf_counts)

    def padded(self, width: int) -> list[int]:
        """Counts padded with zeros to ``width`` entries, for display."""
        return list(self.vnf_counts) + [0] * (width - len(self.vnf_counts))


@dataclass(frozen=True, order=True)
class ChainConfig:
    """One redundancy plan per node, in the chain's node order."""

    node_configs: tuple[NodeConfig, ...]

    def __post_init__(self) -> None:
        if not self.node_configs:
            raise ValueError("chain config must cover at least one node")


@dataclass(frozen=True)
class EvaluatedChain:
    """A chain configuration with its computed availability and total cost."""

    config: ChainConfig
    availability: float
    cost: float


@dataclass(frozen=True)
class OptimizationRequest:
    """A validated optimization request.

    Fields mirror the JSON request body; build instances through
    :func:`validate_request` rather than directly when the input is untrusted.
    """

    nodes: tuple[NodeSpec, ...]
    availability_target: float
    max_nr: int
    max_vnf: int
    max_sfc: int
    eval_mode: EvalMode = EvalMode.EXACT

    def __post_init__(self) -> None:
        if not self.nodes:
            raise ValueError("request must have at least one node")
        if not (0.0 < self.availability_target < 1.0):
            raise ValueError("availability_target must be in (0,1)")
        for field_name in ("max_nr", "max_vnf", "max_sfc"):
            value = getattr(self, field_name)
            if not isinstance(value, int) or value < 1:
                raise ValueError(f"{field_name} must be an integer >= 1")

    def to_payload(self) -> dict[str, Any]:
        """Canonical JSON-ready form; re-validating it reproduces this request."""

        def layer(p: LayerParams) -> dict[str, float]:
            return {"mttf": float(p.mttf), "mttr": float(p.mttr), "cost": float(p.unit_cost)}

        return {
            "nodes": [
                {
                    "name": n.name,
                    "hw": layer(n.hw),
                    "vm": layer(n.vm),
                    "vnf": layer(n.vnf),
                    "min_active_vnfs": n.min_active_vnfs,
                }
                for n in self.nodes
            ],
            "availability_target": float(self.availability_target),
            "max_nr": self.max_nr,
            "max_vnf": self.max_vnf,
            "max_sfc": self.max_sfc,
            "eval_mode": self.eval_mode.value,
        }


def steady_state_availability(mttf: float, mttr: float) -> float:
    """Long-run fraction of time a two-state element is up: MTTF/(MTTF+MTTR)."""
    if not (isinstance(mttf, (int, float)) and mttf > 0):
        raise ValueError(f"mttf must be > 0, got {mttf!r}")
    if not (isinstance(mttr, (int, float)) and mttr > 0):
        raise ValueError(f"mttr must be > 0, got {mttr!r}")
    return mttf / (mttf + mttr)


def node_cost(spec: NodeSpec, config: NodeConfig) -> float:
    """Deployment cost of one node: per replica, one HW + one VM + k instances."""
    total = 0.0
    for k in config.vnf_counts:
        total += spec.hw.unit_cost + spec.vm.unit_cost + k * spec.vnf.unit_cost
    return total


def chain_cost(specs: Sequence[NodeSpec], chain_config: ChainConfig) -> float:
    """Total chain cost: sum of node costs."""
    if len(specs) != len(chain_config.node_configs):
        raise ValueError(
            f"chain config covers {len(chain_config.node_configs)} nodes, "
            f"request has {len(specs)}"
        )
    return sum(node_cost(s, c) for s, c in zip(specs, chain_config.node_configs))


# --- request validation -----------------------------------------------------


@dataclass(frozen=True)
class FieldError:
    """One validation violation: the offending field path and the constraint."""

    field: str
    message: str


class RequestValidationError(ValueError):
    """Carries the complete list of violations found in a raw request."""

    def __init__(self, errors: Iterable[FieldError]):
        self.errors: list[FieldError] = list(errors)
        super().__init__("; ".join(f"{e.field}: {e.message}" for e in self.errors))


_TOP_LEVEL_FIELDS = {
    "nodes",
    "availability_target",
    "max_nr",
    "max_vnf",
    "max_sfc",
    "eval_mode",
}
_NODE_FIELDS = {"name", "hw", "vm", "vnf", "min_active_vnfs"}
_LAYER_FIELDS = {"mttf", "mttr", "cost"}


def _is_number(value: Any) -> bool:
    return (
        isinstance(value, (int, float))
        and not isinstance(value, bool)
        and math.isfinite(value)
    )


def _is_int(value: Any) -> bool:
    return isinstance(value, int) and not isinstance(value, bool)


def _validate_layer(raw: Any, path: str, err) -> LayerParams | None:
    if not isinstance(raw, dict):
        err(path, "must be an object with mttf, mttr, cost")
        return None
    ok = True
    for key in raw:
        if key not in _LAYER_FIELDS:
            err(f"{path}.{key}", "unknown field")
            ok = False
    for key in ("mttf", "mttr"):
        value = raw.get(key)
        if value is None:
            err(f"{path}.{key}", "field is required")
            ok = False
        elif not _is_number(value) or value <= 0:
            err(f"{path}.{key}", "must be a number > 0")
            ok = False
    cost = raw.get("cost")
    if cost is None:
        err(f"{path}.cost", "field is required")
        ok = False
    elif not _is_number(cost) or cost < 0:
        err(f"{path}.cost", "must be a number >= 0")
        ok = False
    if not ok:
        return None
    return LayerParams(float(raw["mttf"]), float(raw["mttr"]), float(raw["cost"]))


def _validate_node(raw: Any, path: str, err, seen_names: dict[str, str]) -> NodeSpec | None:
    if not isinstance(raw, dict):
        err(path, "must be an object")
        return None
    ok = True
    for key in raw:
        if key not in _NODE_FIELDS:
            err(f"{path}.{key}", "unknown field")
            ok = False
    name = raw.get("name")
    if not isinstance(name, str) or not name:
        err(f"{path}.name", "must be a non-empty string")
        ok = False
    elif name in seen_names:
        err(f"{path}.name", f"duplicate node name {name!r} (first at {seen_names[name]})")
        ok = False
    else:
        seen_names[name] = path
    layers = {}
    for key in ("hw", "vm", "vnf"):
        if key not in raw:
            err(f"{path}.{key}", "field is required")
            ok = False
        else:
            layers[key] = _validate_layer(raw[key], f"{path}.{key}", err)
            ok = ok and layers[key] is not None
    min_active = raw.get("min_active_vnfs", 1)
    if not _is_int(min_active) or min_active < 1:
        err(f"{path}.min_active_vnfs", "must be an integer >= 1")
        ok = False
    if not ok:
        return None
    return NodeSpec(
        name=name,
        hw=layers["hw"],
        vm=layers["vm"],
        vnf=layers["vnf"],
        min_active_vnfs=min_active,
    )


def validate_request(raw: Any) -> OptimizationRequest:
    """Check a decoded request body and return the validated request.

    Collects every violation rather than stopping at the first; on any
    failure raises :class:`RequestValidationError` carrying the full list.
    """
    errors: list[FieldError] = []

    def err(field: str, message: str) -> None:
        errors.append(FieldError(field, message))

    if not isinstance(raw, dict):
        raise RequestValidationError([FieldError("$", "request body must be a JSON object")])

    for key in raw:
        if key not in _TOP_LEVEL_FIELDS:
            err(str(key), "unknown field")

    specs: list[NodeSpec | None] = []
    nodes_raw = raw.get("nodes")
    if nodes_raw is None:
        err("nodes", "field is required")
    elif not isinstance(nodes_raw, list):
        err("nodes", "must be an array")
    elif not nodes_raw:
        err("nodes", "must contain at least one node")
    else:
        seen: dict[str, str] = {}
        for i, node_raw in enumerate(nodes_raw):
            specs.append(_validate_node(node_raw, f"nodes[{i}]", err, seen))

    target = raw.get("availability_target")
    if target is None:
        err("availability_target", "field is required")
    elif not _is_number(target):
        err("availability_target", "must be a number")
    elif not (0.0 < target < 1.0):
        err("availability_target", "must be in (0,1)")

    bounds: dict[str, int] = {}
    for key in ("max_nr", "max_vnf", "max_sfc"):
        value = raw.get(key)
        if value is None:
            err(key, "field is required")
        elif not _is_int(value) or value < 1:
            err(key, "must be an integer >= 1")
        else:
            bounds[key] = value

    mode_raw = raw.get("eval_mode", EvalMode.EXACT.value)
    mode: EvalMode | None = None
    try:
        mode = EvalMode(mode_raw)
    except ValueError:
        err("eval_mode", "must be 'exact' or 'structural'")

    if errors or any(s is None for s in specs):
        raise RequestValidationError(errors)

    return OptimizationRequest(
        nodes=tuple(specs),  # type: ignore[arg-type]
        availability_target=float(target),
        max_nr=bounds["max_nr"],
        max_vnf=bounds["max_vnf"],
        max_sfc=bounds["max_sfc"],
        eval_mode=mode,
    )


def validate_chain_config(
    request: OptimizationRequest, counts_per_node: Sequence[Sequence[int]]
) -> ChainConfig:
    """Canonicalize raw per-node count lists against a request's bounds."""
    errors: list[FieldError] = []
    if len(counts_per_node) != len(request.nodes):
        raise RequestValidationError(
            [
                FieldError(
                    "chain",
                    f"expected {len(request.nodes)} node configs, got {len(counts_per_node)}",
                )
            ]
        )
    configs = []
    for i, (spec, counts) in enumerate(zip(request.nodes, counts_per_node)):
        path = f"chain[{i}] ({spec.name})"
        try:
            config = NodeConfig.from_counts(counts)
        except ValueError as exc:
            errors.append(FieldError(path, str(exc)))
            continue
        if config.nr_count > request.max_nr:
            errors.append(FieldError(path, f"more than max_nr={request.max_nr} replicas"))
        if any(c > request.max_vnf for c in config.vnf_counts):
            errors.append(FieldError(path, f"instance count above max_vnf={request.max_vnf}"))
        configs.append(config)
    if errors:
        raise RequestValidationError(errors)
    return ChainConfig(tuple(configs))


def canonical_request_key(request: OptimizationRequest) -> str:
    """Deterministic cache key: equal iff the requests are semantically equal.

    Node order is part of the identity (it names a different chain); field
    order and int/float spellings of the same value are not.
    """
    canonical = json.dumps(
        request.to_payload(), sort_keys=True, separators=(",", ":"), allow_nan=False
    )
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()
