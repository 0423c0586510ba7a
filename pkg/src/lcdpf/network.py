"""Sensor deployment, communication graph and average-consensus engine.

Consensus is synchronous: in every round each node replaces its value by
the Metropolis-weighted combination of its own and its neighbors' round-t
values.  Communication accounting is exact: a node transmits its full
payload vector once per round.
"""

import json
import math
from collections import deque
from dataclasses import dataclass, field

import numpy as np


@dataclass
class Topology:
    """Sensor positions plus the range-based communication graph."""

    positions: np.ndarray  # (K, 2)
    adjacency: np.ndarray  # (K, K) bool, symmetric, no self-loops
    comm_range: float

    def __post_init__(self):
        self.positions = np.asarray(self.positions, dtype=float)
        self.adjacency = np.asarray(self.adjacency, dtype=bool)

    @property
    def size(self):
        return self.positions.shape[0]


@dataclass
class ConsensusReport:
    """Per-sensor communication accounting for one consensus call."""

    iterations: int
    payload_dim: int
    scalars_sent_per_sensor: int = field(init=False)

    def __post_init__(self):
        self.scalars_sent_per_sensor = self.iterations * self.payload_dim


def deploy_jittered_grid(k, region, jitter_frac, rng):
    """Place k sensors on a jittered sqrt(k) x sqrt(k) grid inside the region.

    region is (width, height) in meters or a single scalar for a square.
    Each grid-cell center is perturbed per axis by Uniform(-j, j) times the
    cell size, with j = jitter_frac < 0.5, so sites stay inside the region.
    """
    side = math.isqrt(k)
    if side * side != k:
        raise ValueError(f"sensor count {k} is not a perfect square")
    if not 0 <= jitter_frac < 0.5:
        raise ValueError("jitter_frac must lie in [0, 0.5)")
    width, height = (region, region) if np.isscalar(region) else region
    cell = np.array([width / side, height / side])
    gx, gy = np.meshgrid(np.arange(side), np.arange(side), indexing="ij")
    centers = (np.stack([gx.ravel(), gy.ravel()], axis=1) + 0.5) * cell
    jitter = rng.uniform(-jitter_frac, jitter_frac, size=(k, 2)) * cell
    return centers + jitter


def build_topology(positions, comm_range):
    """Range-based adjacency: i ~ j iff 0 < ||xi_i - xi_j|| <= comm_range."""
    positions = np.asarray(positions, dtype=float)
    if positions.shape[0] < 2:
        raise ValueError("need at least two sensors")
    diff = positions[:, None, :] - positions[None, :, :]
    dist = np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))
    adjacency = dist <= comm_range
    np.fill_diagonal(adjacency, False)
    return Topology(positions=positions, adjacency=adjacency, comm_range=comm_range)


def is_connected(topology):
    """Breadth-first reachability from node 0."""
    k = topology.size
    seen = np.zeros(k, dtype=bool)
    seen[0] = True
    queue = deque([0])
    while queue:
        node = queue.popleft()
        for nbr in np.flatnonzero(topology.adjacency[node]):
            if not seen[nbr]:
                seen[nbr] = True
                queue.append(nbr)
    return bool(seen.all())


def metropolis_weights(topology):
    """Metropolis weight matrix: W_ij = 1/(1 + max(d_i, d_j)) on edges."""
    adj = topology.adjacency
    degrees = adj.sum(axis=1)
    pair_max = np.maximum(degrees[:, None], degrees[None, :])
    weights = np.where(adj, 1.0 / (1.0 + pair_max), 0.0)
    np.fill_diagonal(weights, 1.0 - weights.sum(axis=1))
    return weights


def _as_payload_matrix(values, k):
    rows = [np.atleast_1d(np.asarray(v, dtype=float)) for v in values]
    if len(rows) != k:
        raise ValueError(f"expected {k} payloads, got {len(rows)}")
    dim = rows[0].shape[0]
    if any(r.shape != (dim,) for r in rows):
        raise ValueError("payload dimension mismatch across nodes")
    return np.stack(rows)


def consensus_average(weights, values, iterations):
    """Run `iterations` synchronous rounds of v <- W v on per-node payloads.

    values: sequence of K equal-length vectors (or a (K, D) array).
    Returns the (K, D) per-node results and a ConsensusReport.
    """
    weights = np.asarray(weights, dtype=float)
    state = _as_payload_matrix(values, weights.shape[0])
    if iterations < 0:
        raise ValueError("iterations must be non-negative")
    for _ in range(iterations):
        state = weights @ state
    return state, ConsensusReport(iterations=iterations, payload_dim=state.shape[1])


def consensus_sum(weights, values, iterations, k):
    """Distributed sum: K times the consensus average."""
    state, report = consensus_average(weights, values, iterations)
    return k * state, report


def topology_to_json(topology):
    return json.dumps(
        {
            "positions": topology.positions.tolist(),
            "adjacency": topology.adjacency.astype(int).tolist(),
            "comm_range": topology.comm_range,
        },
        sort_keys=True,
    )


def topology_from_json(text):
    doc = json.loads(text)
    return Topology(
        positions=np.asarray(doc["positions"], dtype=float),
        adjacency=np.asarray(doc["adjacency"], dtype=bool),
        comm_range=float(doc["comm_range"]),
    )
