"""Heuristic node scorers used as comparison policies.

Both scorers rank substrate nodes by a resource figure of merit and plug into
the same node/link mapping machinery as the learned policy.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graph import SubstrateNetwork


@dataclass
class NodeRankParams:
    epsilon: float = 0.0001
    max_hop: int = 3
    p_jump: float = 0.15
    p_forward: float = 0.85
    max_iterations: int = 10_000


def _attractiveness(net: SubstrateNetwork) -> np.ndarray:
    h = np.zeros(net.node_count)
    for i, node in enumerate(net.nodes):
        bw = sum(link.bw_residual for _, link in net.neighbors(i))
        h[i] = node.cpu_residual * bw
    return h


def nrm_scores(net: SubstrateNetwork) -> np.ndarray:
    """Multi-dimensional resource product cpu * incident bandwidth, sum-1."""
    raw = _attractiveness(net)
    total = raw.sum()
    if total <= 0.0:
        return np.full(net.node_count, 1.0 / net.node_count)
    return raw / total


def noderank_scores(net: SubstrateNetwork,
                    params: NodeRankParams | None = None) -> np.ndarray:
    """Stationary visit frequency of a resource-biased random walk.

    From each node the walk forwards with probability ``p_forward`` to a
    neighbor drawn proportionally to the neighbor's attractiveness (cpu times
    incident bandwidth) and jumps to a uniform node with probability
    ``p_jump``.  A jump is forced once a walk segment reaches ``max_hop``
    forward steps, and at dead ends.  Iteration stops when the L1 change of
    the state distribution drops below ``epsilon``.
    """
    params = params or NodeRankParams()
    n = net.node_count
    h = _attractiveness(net)

    # row-stochastic forward matrix; rows with no usable neighbor are dead
    fwd = np.zeros((n, n))
    dead = np.zeros(n, dtype=bool)
    for i in range(n):
        weights = np.zeros(n)
        for j, _ in net.neighbors(i):
            weights[j] = h[j]
        total = weights.sum()
        if total > 0.0:
            fwd[i] = weights / total
        else:
            dead[i] = True

    K = params.max_hop
    # layer k holds the mass of walks that took k forward steps since a jump
    d = np.zeros((K + 1, n))
    d[0] = 1.0 / n
    uniform = np.full(n, 1.0 / n)
    for _ in range(params.max_iterations):
        new = np.zeros_like(d)
        jump_mass = 0.0
        for k in range(K + 1):
            layer = d[k]
            if k < K:
                alive = layer * ~dead
                new[k + 1] += params.p_forward * (alive @ fwd)
                jump_mass += params.p_jump * alive.sum() + layer[dead].sum()
            else:
                jump_mass += layer.sum()
        new[0] += jump_mass * uniform
        delta = np.abs(new - d).sum()
        d = new
        if delta < params.epsilon:
            break
    scores = d.sum(axis=0)
    return scores / scores.sum()
