"""Per-node substrate features and max-min normalization.

Three features per substrate node: remaining compute, total remaining
bandwidth on incident links, and a locality score built from the Euclidean
distances to direct neighbors.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graph import SubstrateNetwork


def available_node_resource(net: SubstrateNetwork, i: int) -> float:
    """Remaining compute on node i (capacity minus active allocations)."""
    return net.nodes[i].cpu_residual


def available_link_resource(net: SubstrateNetwork, i: int) -> float:
    """Sum of remaining bandwidth over links incident to node i."""
    return sum(link.bw_residual for _, link in net.neighbors(i))


def average_distance(net: SubstrateNetwork, i: int) -> float:
    """Distance score of node i: sum over direct neighbors j of
    ||loc(i)-loc(j)|| / (1 + hops), with hops = 1 for a direct link.

    Isolated nodes score 0 by convention.
    """
    total = 0.0
    for j, _ in net.neighbors(i):
        total += net.euclidean(i, j) / 2.0
    return total


def normalize_column(values) -> np.ndarray:
    """Max-min normalization to [0, 1]; a constant column maps to all 0.5."""
    v = np.asarray(values, dtype=float)
    lo, hi = v.min(), v.max()
    if hi == lo:
        return np.full_like(v, 0.5)
    return (v - lo) / (hi - lo)


@dataclass
class FeatureMatrix:
    raw: np.ndarray         # |n| x 3, pre-normalization
    normalized: np.ndarray  # |n| x 3, each column in [0, 1]


def build_feature_matrix(net: SubstrateNetwork) -> FeatureMatrix:
    n = net.node_count
    raw = np.zeros((n, 3))
    raw[:, 0] = [node.cpu_residual for node in net.nodes]
    for link in net.links:
        raw[link.u, 1] += link.bw_residual
        raw[link.v, 1] += link.bw_residual
        d = net.euclidean(link.u, link.v) / 2.0
        raw[link.u, 2] += d
        raw[link.v, 2] += d
    normalized = np.column_stack([normalize_column(raw[:, k]) for k in range(3)])
    return FeatureMatrix(raw=raw, normalized=normalized)
