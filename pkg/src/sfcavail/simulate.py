"""Monte Carlo cross-check of the analytic engine.

Event-driven simulation of the same failure/repair dynamics the Markov model
encodes, but sampled per entity instead of solved: every hardware unit, VM,
and software instance draws its own exponential lifetimes and repair times.
A lower-layer failure freezes everything above it; repairing the lower layer
restarts the upper layers as new. Availability is the fraction of
post-warmup time the chain predicate (every node at or above its
min_active_vnfs threshold) holds.

Reproducibility: the RNG is numpy's Philox counter-based generator, with one
sub-stream per replication derived via ``SeedSequence(seed).spawn()``. Both
are specified by numpy's stream-compatibility policy, so (seed, inputs) give
identical results across runs and platforms. Event ties are broken by a
monotone sequence number.
"""

from __future__ import annotations

from dataclasses import dataclass
from heapq import heappop, heappush
from typing import Sequence

import numpy as np

from .domain import ChainConfig, NodeConfig, NodeSpec

_HW_FAIL, _HW_REPAIR, _VM_FAIL, _VM_REPAIR, _VNF_FAIL, _VNF_REPAIR = range(6)


@dataclass(frozen=True)
class SimConfig:
    """Simulation run parameters.

    ``warmup`` defaults to a tenth of the horizon; time before it is
    discarded to reduce the bias of starting in the all-up state.
    """

    horizon: float
    seed: int
    replications: int = 10
    warmup: float | None = None

    def __post_init__(self) -> None:
        if not self.horizon > 0:
            raise ValueError(f"horizon must be > 0, got {self.horizon!r}")
        if not isinstance(self.replications, int) or self.replications < 1:
            raise ValueError(f"replications must be an integer >= 1, got {self.replications!r}")
        if self.warmup is not None and not 0 <= self.warmup < self.horizon:
            raise ValueError(f"warmup must be in [0, horizon), got {self.warmup!r}")

    @property
    def effective_warmup(self) -> float:
        return self.horizon / 10.0 if self.warmup is None else self.warmup


@dataclass(frozen=True)
class SimEstimate:
    """Availability estimate aggregated across replications.

    ``std_error`` is the between-replication standard error (0.0 when only
    one replication ran). ``no_event_warning`` flags a horizon too short for
    any failure/repair event to occur.
    """

    mean: float
    std_error: float
    replications: int
    no_event_warning: bool = False


@dataclass(frozen=True)
class NrDistributionEstimate:
    """Empirical instance-count distribution of one replica.

    ``means[v]`` estimates the long-run fraction of time exactly v instances
    deliver service (0 while HW or VM is down).
    """

    means: tuple[float, ...]
    std_errors: tuple[float, ...]
    replications: int
    no_event_warning: bool = False


class _Nr:
    """Mutable state of one replica during a run.

    ``epoch`` invalidates scheduled events: freezes and restorations bump it,
    so stale timers popped later are discarded. Redrawing the surviving
    exponential clocks after each bump is statistically exact (memorylessness).
    """

    __slots__ = (
        "node",
        "k",
        "hw_mttf",
        "hw_mttr",
        "vm_mttf",
        "vm_mttr",
        "vnf_mttf",
        "vnf_mttr",
        "hw_up",
        "vm_up",
        "inst_up",
        "n_up",
        "epoch",
    )

    def __init__(self, node: int, spec: NodeSpec, k: int):
        self.node = node
        self.k = k
        self.hw_mttf = spec.hw.mttf
        self.hw_mttr = spec.hw.mttr
        self.vm_mttf = spec.vm.mttf
        self.vm_mttr = spec.vm.mttr
        self.vnf_mttf = spec.vnf.mttf
        self.vnf_mttr = spec.vnf.mttr
        self.hw_up = True
        self.vm_up = True
        self.inst_up = [True] * k
        self.n_up = k
        self.epoch = 0

    @property
    def delivering(self) -> int:
        """Working instances actually delivering service (0 when inhibited)."""
        return self.n_up if (self.hw_up and self.vm_up) else 0


class _Run:
    """One replication of the chain simulation."""

    def __init__(
        self,
        specs: Sequence[NodeSpec],
        chain_config: ChainConfig,
        rng: np.random.Generator,
    ):
        self.rng = rng
        self.heap: list[tuple[float, int, int, int, int, int]] = []
        self.seq = 0
        self.nrs: list[_Nr] = []
        for node_index, (spec, config) in enumerate(zip(specs, chain_config.node_configs)):
            for k in config.vnf_counts:
                self.nrs.append(_Nr(node_index, spec, k))
        self.thresholds = [spec.min_active_vnfs for spec in specs]
        self.node_totals = [0] * len(specs)
        for nr in self.nrs:
            self.node_totals[nr.node] += nr.delivering
        self.nodes_ok = sum(
            1 for total, need in zip(self.node_totals, self.thresholds) if total >= need
        )
        self.events_seen = 0

    def _schedule(self, at: float, nr_index: int, kind: int, inst: int, epoch: int) -> None:
        self.seq += 1
        heappush(self.heap, (at, self.seq, nr_index, kind, inst, epoch))

    def _draw(self, mean: float) -> float:
        return self.rng.exponential(mean)

    def _start_nr(self, now: float, i: int) -> None:
        """Schedule fresh clocks for a fully restored (or initial) replica."""
        nr = self.nrs[i]
        epoch = nr.epoch
        self._schedule(now + self._draw(nr.hw_mttf), i, _HW_FAIL, -1, epoch)
        self._schedule(now + self._draw(nr.vm_mttf), i, _VM_FAIL, -1, epoch)
        for inst in range(nr.k):
            self._schedule(now + self._draw(nr.vnf_mttf), i, _VNF_FAIL, inst, epoch)

    def start(self) -> None:
        for i in range(len(self.nrs)):
            self._start_nr(0.0, i)

    def _apply(self, now: float, i: int, kind: int, inst: int) -> None:
        nr = self.nrs[i]
        before = nr.delivering
        if kind == _HW_FAIL:
            nr.hw_up = False
            nr.epoch += 1
            self._schedule(now + self._draw(nr.hw_mttr), i, _HW_REPAIR, -1, nr.epoch)
        elif kind == _HW_REPAIR:
            nr.hw_up = True
            nr.vm_up = True
            nr.inst_up = [True] * nr.k
            nr.n_up = nr.k
            nr.epoch += 1
            self._start_nr(now, i)
        elif kind == _VM_FAIL:
            nr.vm_up = False
            nr.epoch += 1
            # HW keeps failing while the VM is down; its clock is redrawn.
            self._schedule(now + self._draw(nr.hw_mttf), i, _HW_FAIL, -1, nr.epoch)
            self._schedule(now + self._draw(nr.vm_mttr), i, _VM_REPAIR, -1, nr.epoch)
        elif kind == _VM_REPAIR:
            nr.vm_up = True
            nr.inst_up = [True] * nr.k
            nr.n_up = nr.k
            nr.epoch += 1
            self._start_nr(now, i)
        elif kind == _VNF_FAIL:
            nr.inst_up[inst] = False
            nr.n_up -= 1
            self._schedule(now + self._draw(nr.vnf_mttr), i, _VNF_REPAIR, inst, nr.epoch)
        else:  # _VNF_REPAIR
            nr.inst_up[inst] = True
            nr.n_up += 1
            self._schedule(now + self._draw(nr.vnf_mttf), i, _VNF_FAIL, inst, nr.epoch)
        delta = nr.delivering - before
        if delta:
            node = nr.node
            was_ok = self.node_totals[node] >= self.thresholds[node]
            self.node_totals[node] += delta
            is_ok = self.node_totals[node] >= self.thresholds[node]
            if was_ok != is_ok:
                self.nodes_ok += 1 if is_ok else -1

    def run(self, horizon: float, warmup: float, occupancy: np.ndarray | None = None) -> float:
        """Advance to the horizon; return post-warmup up time.

        With ``occupancy`` given (single-replica mode), accumulates post-warmup
        time per delivering-instance count instead of the chain predicate.
        """
        n_nodes = len(self.node_totals)
        up_time = 0.0
        t_prev = 0.0
        heap = self.heap
        while heap:
            at, _, i, kind, inst, epoch = heappop(heap)
            t_now = min(at, horizon)
            if t_now > t_prev:
                span = min(t_now, horizon) - max(t_prev, warmup)
                if span > 0:
                    if occupancy is not None:
                        occupancy[self.nrs[0].delivering] += span
                    elif self.nodes_ok == n_nodes:
                        up_time += span
                t_prev = t_now
            if at >= horizon:
                break
            if epoch != self.nrs[i].epoch:
                continue  # stale timer from before a freeze/restoration
            self.events_seen += 1
            self._apply(at, i, kind, inst)
        return up_time


def _spawned_rngs(seed: int, replications: int) -> list[np.random.Generator]:
    streams = np.random.SeedSequence(seed).spawn(replications)
    return [np.random.Generator(np.random.Philox(s)) for s in streams]


def simulate_chain(
    specs: Sequence[NodeSpec], chain_config: ChainConfig, sim_config: SimConfig
) -> SimEstimate:
    """Estimate chain availability over independent replications."""
    if len(specs) != len(chain_config.node_configs):
        raise ValueError(
            f"chain config covers {len(chain_config.node_configs)} nodes, "
            f"got {len(specs)} specs"
        )
    warmup = sim_config.effective_warmup
    measured = sim_config.horizon - warmup
    values = []
    any_events = False
    for rng in _spawned_rngs(sim_config.seed, sim_config.replications):
        run = _Run(specs, chain_config, rng)
        run.start()
        up = run.run(sim_config.horizon, warmup)
        values.append(up / measured)
        any_events = any_events or run.events_seen > 0
    mean = float(np.mean(values))
    std_error = (
        float(np.std(values, ddof=1) / np.sqrt(len(values))) if len(values) > 1 else 0.0
    )
    return SimEstimate(
        mean=mean,
        std_error=std_error,
        replications=sim_config.replications,
        no_event_warning=not any_events,
    )


def simulate_nr(spec: NodeSpec, k: int, sim_config: SimConfig) -> NrDistributionEstimate:
    """Empirical distribution of delivering instances for one replica."""
    if not isinstance(k, int) or k < 1:
        raise ValueError(f"a replica must host at least one instance, got k={k!r}")
    warmup = sim_config.effective_warmup
    measured = sim_config.horizon - warmup
    single = ChainConfig((NodeConfig((k,)),))
    per_rep = np.zeros((sim_config.replications, k + 1))
    any_events = False
    for r, rng in enumerate(_spawned_rngs(sim_config.seed, sim_config.replications)):
        occupancy = np.zeros(k + 1)
        run = _Run([spec], single, rng)
        run.start()
        run.run(sim_config.horizon, warmup, occupancy=occupancy)
        per_rep[r] = occupancy / measured
        any_events = any_events or run.events_seen > 0
    means = per_rep.mean(axis=0)
    if sim_config.replications > 1:
        std_errors = per_rep.std(axis=0, ddof=1) / np.sqrt(sim_config.replications)
    else:
        std_errors = np.zeros(k + 1)
    return NrDistributionEstimate(
        means=tuple(float(m) for m in means),
        std_errors=tuple(float(s) for s in std_errors),
        replications=sim_config.replications,
        no_event_warning=not any_events,
    )
