"""Exact availability evaluation of replicas, nodes, and chains.

One network replica with k software instances is a continuous-time Markov
chain on k+3 states: ``HwDown``, ``VmDown``, and ``Op(v)`` for v = 0..k
working instances. Failures of a lower layer inhibit everything above it
(the replica delivers nothing while HW or VM is down), and repairing a lower
layer restores all upper layers to working order, which is why a single
HwDown macro-state suffices: restoration erases upper-layer history.

Transitions (lambda = 1/MTTF, mu = 1/MTTR per layer):

    Op(v)  -> HwDown   rate lambda_hw        (hardware fails under any load)
    VmDown -> HwDown   rate lambda_hw        (hardware keeps failing while VM is down)
    Op(v)  -> VmDown   rate lambda_vm
    Op(v)  -> Op(v-1)  rate v * lambda_vnf   (each working instance fails independently)
    Op(v)  -> Op(v+1)  rate (k-v) * mu_vnf   (each failed instance repairs independently)
    VmDown -> Op(k)    rate mu_vm            (VM repair restores all instances)
    HwDown -> Op(k)    rate mu_hw            (HW repair restores VM and all instances)

Steady state is solved with Grassmann-Taksar-Heyman state reduction, which is
subtraction-free and therefore stable for the stiff MTTF/MTTR ratios (1e6+)
these models always have; a dense linear solve is kept as a fallback.

Replicas are statistically independent, so a node's distribution of total
working instances is the convolution of its replicas' distributions, and a
chain's availability is the product of its nodes'.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from .domain import ChainConfig, EvalMode, NodeConfig, NodeSpec

HW_DOWN = 0
VM_DOWN = 1

RESIDUAL_TOLERANCE = 1e-10


class SolverError(RuntimeError):
    """Steady-state solve failed (numerically singular / reducible chain)."""


@dataclass(eq=False)
class NrMarkovModel:
    """Generator matrix of one replica's failure/repair chain.

    State indices: 0 = HwDown, 1 = VmDown, 2 + v = Op(v) for v = 0..k.
    """

    k: int
    generator: np.ndarray

    @property
    def n_states(self) -> int:
        return self.k + 3

    @property
    def states(self) -> tuple[str, ...]:
        return ("hw_down", "vm_down") + tuple(f"op_{v}" for v in range(self.k + 1))

    def op_index(self, v: int) -> int:
        """Index of the state with exactly ``v`` working instances."""
        if not 0 <= v <= self.k:
            raise ValueError(f"v must be in [0, {self.k}], got {v}")
        return 2 + v


def build_nr_model(spec: NodeSpec, k: int) -> NrMarkovModel:
    """Build the k+3-state generator for one replica hosting ``k`` instances."""
    if not isinstance(k, int) or k < 1:
        raise ValueError(f"a replica must host at least one instance, got k={k!r}")
    lam_hw, mu_hw = spec.hw.failure_rate, spec.hw.repair_rate
    lam_vm, mu_vm = spec.vm.failure_rate, spec.vm.repair_rate
    lam_vnf, mu_vnf = spec.vnf.failure_rate, spec.vnf.repair_rate

    n = k + 3
    q = np.zeros((n, n))
    q[HW_DOWN, 2 + k] = mu_hw
    q[VM_DOWN, HW_DOWN] = lam_hw
    q[VM_DOWN, 2 + k] = mu_vm
    for v in range(k + 1):
        s = 2 + v
        q[s, HW_DOWN] = lam_hw
        q[s, VM_DOWN] = lam_vm
        if v >= 1:
            q[s, s - 1] = v * lam_vnf
        if v < k:
            q[s, s + 1] = (k - v) * mu_vnf
    q -= np.diag(q.sum(axis=1))
    return NrMarkovModel(k=k, generator=q)


def gth_steady_state(generator: np.ndarray) -> np.ndarray:
    """Stationary distribution of an irreducible CTMC by GTH state reduction.

    Uses only the off-diagonal rates and never subtracts, so no cancellation
    occurs even when rates span many orders of magnitude.
    """
    a = np.array(generator, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"generator must be square, got shape {a.shape}")
    n = a.shape[0]
    if n == 1:
        return np.ones(1)
    for m in range(n - 1, 0, -1):
        scale = a[m, :m].sum()
        if not scale > 0.0:
            raise SolverError(
                f"state {m} has no transitions to lower-indexed states (reducible chain)"
            )
        a[:m, m] /= scale
        a[:m, :m] += np.outer(a[:m, m], a[m, :m])
    x = np.zeros(n)
    x[0] = 1.0
    for m in range(1, n):
        x[m] = x[:m] @ a[:m, m]
    return x / x.sum()


def dense_steady_state(generator: np.ndarray) -> np.ndarray:
    """Stationary distribution via a dense solve of pi Q = 0, sum(pi) = 1."""
    q = np.asarray(generator, dtype=float)
    n = q.shape[0]
    a = q.T.copy()
    a[-1, :] = 1.0
    b = np.zeros(n)
    b[-1] = 1.0
    try:
        pi = np.linalg.solve(a, b)
    except np.linalg.LinAlgError as exc:
        raise SolverError(f"dense steady-state solve failed: {exc}") from exc
    if np.any(pi < -1e-9):
        raise SolverError("dense steady-state solve produced negative probabilities")
    pi = np.clip(pi, 0.0, None)
    return pi / pi.sum()


def solve_steady_state(model: Union[NrMarkovModel, np.ndarray]) -> np.ndarray:
    """Solve a model (or raw generator) for its stationary distribution.

    GTH first; if its residual is somehow above tolerance, fall back to the
    dense solve and keep whichever satisfies ``||pi Q||_inf <= 1e-10``.
    """
    q = model.generator if isinstance(model, NrMarkovModel) else np.asarray(model, dtype=float)
    pi = gth_steady_state(q)
    residual = float(np.max(np.abs(pi @ q)))
    if residual > RESIDUAL_TOLERANCE:
        pi_dense = dense_steady_state(q)
        residual_dense = float(np.max(np.abs(pi_dense @ q)))
        if residual_dense > RESIDUAL_TOLERANCE:
            raise SolverError(
                f"no solver met the residual tolerance: gth={residual:.3e}, "
                f"dense={residual_dense:.3e}"
            )
        pi = pi_dense
    return pi


class DistributionCache:
    """Thread-safe memo of per-replica instance distributions.

    Keyed by the replica's layer parameters, instance count, and mode, so a
    request with identical nodes solves each distinct k only once overall.
    """

    def __init__(self) -> None:
        self._data: dict = {}
        self._lock = threading.Lock()

    def get_or_compute(self, spec: NodeSpec, k: int, mode: EvalMode) -> np.ndarray:
        key = (spec.hw, spec.vm, spec.vnf, k, mode)
        with self._lock:
            hit = self._data.get(key)
        if hit is None:
            hit = _instance_distribution(spec, k, mode)
            with self._lock:
                self._data.setdefault(key, hit)
        return hit


def _instance_distribution(spec: NodeSpec, k: int, mode: EvalMode) -> np.ndarray:
    if mode is EvalMode.EXACT:
        pi = solve_steady_state(build_nr_model(spec, k))
        probs = np.empty(k + 1)
        # HwDown and VmDown inhibit every instance: they deliver v = 0.
        probs[0] = pi[HW_DOWN] + pi[VM_DOWN] + pi[2]
        for v in range(1, k + 1):
            probs[v] = pi[2 + v]
    else:
        a_hw = spec.hw.availability
        a_vm = spec.vm.availability
        a_vnf = spec.vnf.availability
        probs = np.empty(k + 1)
        for v in range(1, k + 1):
            probs[v] = (
                a_hw * a_vm * math.comb(k, v) * a_vnf**v * (1.0 - a_vnf) ** (k - v)
            )
        probs[0] = max(0.0, 1.0 - probs[1:].sum())
    probs = np.clip(probs, 0.0, None)
    return probs / probs.sum()


def nr_instance_distribution(
    spec: NodeSpec,
    k: int,
    mode: EvalMode = EvalMode.EXACT,
    cache: DistributionCache | None = None,
) -> np.ndarray:
    """P(exactly v instances of one replica are working), v = 0..k.

    In exact mode the HwDown and VmDown states contribute to v = 0. In
    structural mode the distribution is the two-state layer product: the
    replica is delivering with probability A_hw * A_vm and its instances are
    then independently up with probability A_vnf each; this approximates the
    inhibition/restoration chain and reproduces the textbook
    ``A_hw * A_vm * (1 - (1 - A_vnf)^k)`` for P(v >= 1).
    """
    if cache is not None:
        return cache.get_or_compute(spec, k, mode)
    return _instance_distribution(spec, k, mode)


def node_availability(
    spec: NodeSpec,
    config: NodeConfig,
    mode: EvalMode = EvalMode.EXACT,
    cache: DistributionCache | None = None,
) -> float:
    """P(total working instances across the node's replicas >= min_active_vnfs).

    Replicas are independent, so the total-instance distribution is the
    convolution of the per-replica ones. For min_active_vnfs = 1 this equals
    1 - prod_j P(replica j delivers nothing).
    """
    dist: np.ndarray | None = None
    for k in config.vnf_counts:
        d = nr_instance_distribution(spec, k, mode, cache)
        dist = d if dist is None else np.convolve(dist, d)
    assert dist is not None
    threshold = spec.min_active_vnfs
    if threshold >= len(dist):
        return 0.0
    return float(min(1.0, dist[threshold:].sum()))


def chain_availability(
    specs: Sequence[NodeSpec],
    chain_config: ChainConfig,
    mode: EvalMode = EvalMode.EXACT,
    cache: DistributionCache | None = None,
) -> float:
    """Series-system availability: the product over nodes (all must be up)."""
    if len(specs) != len(chain_config.node_configs):
        raise ValueError(
            f"chain config covers {len(chain_config.node_configs)} nodes, "
            f"got {len(specs)} specs"
        )
    result = 1.0
    for spec, config in zip(specs, chain_config.node_configs):
        result *= node_availability(spec, config, mode, cache)
    return result
