"""Substrate and virtual network model with residual-resource bookkeeping.

The substrate is a multi-domain weighted undirected graph whose nodes carry
compute capacity and whose links carry bandwidth capacity.  Virtual network
requests (VNRs) are small undirected graphs with per-node compute demands,
per-link bandwidth demands and a lifetime window.

Resource allocation is transactional: every residual decrement is recorded on
an :class:`AllocationHandle` so a failed embedding or an expired VNR can be
rolled back to the exact prior state.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field

INTRA_DOMAIN = "intra"
INTER_DOMAIN = "inter"


class AllocationError(Exception):
    """An allocation would drive a residual negative; nothing was mutated."""


class DoubleReleaseError(Exception):
    """A transaction handle was released more than once."""


@dataclass
class SubstrateNode:
    id: int
    domain: int
    location: tuple[float, float]
    cpu_capacity: float
    cpu_residual: float


@dataclass
class SubstrateLink:
    u: int
    v: int
    kind: str
    bw_capacity: float
    bw_residual: float

    @property
    def endpoints(self) -> tuple[int, int]:
        return (self.u, self.v)


class SubstrateNetwork:
    """Undirected simple graph; each link stored once, visible from both ends."""

    def __init__(self, nodes: list[SubstrateNode], links: list[tuple[int, int, float]]):
        self.nodes = nodes
        self.links: list[SubstrateLink] = []
        self.adjacency: list[list[int]] = [[] for _ in nodes]
        self._pair_to_link: dict[tuple[int, int], int] = {}
        for u, v, bw in links:
            self._add_link(u, v, float(bw))

    def _add_link(self, u: int, v: int, bw: float) -> None:
        if u == v:
            raise ValueError(f"self-loop on node {u}")
        key = (min(u, v), max(u, v))
        if key in self._pair_to_link:
            raise ValueError(f"parallel link between {u} and {v}")
        kind = INTRA_DOMAIN if self.nodes[u].domain == self.nodes[v].domain else INTER_DOMAIN
        link = SubstrateLink(key[0], key[1], kind, bw, bw)
        idx = len(self.links)
        self.links.append(link)
        self.adjacency[u].append(idx)
        self.adjacency[v].append(idx)
        self._pair_to_link[key] = idx

    @property
    def node_count(self) -> int:
        return len(self.nodes)

    @property
    def domain_count(self) -> int:
        return 1 + max(n.domain for n in self.nodes) if self.nodes else 0

    def neighbors(self, i: int):
        """Yield (neighbor id, link) pairs incident to node i."""
        for li in self.adjacency[i]:
            link = self.links[li]
            yield (link.v if link.u == i else link.u), link

    def link_between(self, u: int, v: int) -> SubstrateLink:
        return self.links[self._pair_to_link[(min(u, v), max(u, v))]]

    def euclidean(self, i: int, j: int) -> float:
        xi, yi = self.nodes[i].location
        xj, yj = self.nodes[j].location
        return math.hypot(xi - xj, yi - yj)

    def copy(self) -> "SubstrateNetwork":
        """Independent clone sharing nothing mutable with the original."""
        clone = SubstrateNetwork.__new__(SubstrateNetwork)
        clone.nodes = [SubstrateNode(n.id, n.domain, n.location, n.cpu_capacity, n.cpu_residual)
                       for n in self.nodes]
        clone.links = [SubstrateLink(l.u, l.v, l.kind, l.bw_capacity, l.bw_residual)
                       for l in self.links]
        clone.adjacency = [list(a) for a in self.adjacency]
        clone._pair_to_link = dict(self._pair_to_link)
        return clone

    def residual_state(self) -> tuple[tuple[float, ...], tuple[float, ...]]:
        """Snapshot of (node residuals, link residuals) for conservation checks."""
        return (tuple(n.cpu_residual for n in self.nodes),
                tuple(l.bw_residual for l in self.links))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, SubstrateNetwork):
            return NotImplemented
        return self.nodes == other.nodes and self.links == other.links


@dataclass
class VirtualNode:
    id: int
    cpu_demand: float


@dataclass
class VirtualLink:
    a: int
    b: int
    bw_demand: float

    @property
    def endpoints(self) -> tuple[int, int]:
        return (self.a, self.b)


@dataclass
class VirtualNetworkRequest:
    vnr_id: int
    vnodes: list[VirtualNode]
    vlinks: list[VirtualLink]
    t_start: float
    t_end: float


@dataclass
class PathAssignment:
    """A virtual link realized as a loop-free substrate node sequence."""
    vlink: int | None
    substrate_path: list[int]

    @property
    def hops(self) -> int:
        return len(self.substrate_path) - 1


@dataclass
class EmbeddingResult:
    vnr_id: int
    node_assignment: dict[int, int]
    link_assignment: dict[int, PathAssignment]
    accepted: bool
    revenue: float
    cost: float
    # plumbing for the simulator: release token and the score vector that
    # drove the decision (None when rejected before scoring completed)
    handle: "AllocationHandle | None" = None
    scores: object = None


class AllocationHandle:
    """Records residual deltas so they can be undone exactly once."""

    def __init__(self, net: SubstrateNetwork):
        self.net = net
        self.node_deltas: list[tuple[int, float]] = []
        self.link_deltas: list[tuple[int, float]] = []
        self.released = False

    def take_node(self, i: int, amount: float) -> None:
        node = self.net.nodes[i]
        if node.cpu_residual < amount:
            raise AllocationError(
                f"node {i}: demand {amount} exceeds residual {node.cpu_residual}")
        node.cpu_residual -= amount
        self.node_deltas.append((i, amount))

    def take_path(self, path: list[int], amount: float) -> None:
        """Reserve bandwidth on every edge of the path, all-or-nothing."""
        link_ids = [self.net._pair_to_link[(min(a, b), max(a, b))]
                    for a, b in zip(path, path[1:])]
        for li in link_ids:
            if self.net.links[li].bw_residual < amount:
                raise AllocationError(
                    f"link {self.net.links[li].endpoints}: demand {amount} "
                    f"exceeds residual {self.net.links[li].bw_residual}")
        for li in link_ids:
            self.net.links[li].bw_residual -= amount
            self.link_deltas.append((li, amount))


def allocate(net: SubstrateNetwork,
             vnr: VirtualNetworkRequest,
             node_assignment: dict[int, int],
             link_assignment: dict[int, PathAssignment]) -> AllocationHandle:
    """Commit a full embedding atomically.

    Validates the aggregate demand against current residuals before touching
    anything; on infeasibility raises :class:`AllocationError` with the
    network unchanged.
    """
    node_need: dict[int, float] = {}
    for vnode_id, snode in node_assignment.items():
        node_need[snode] = node_need.get(snode, 0.0) + vnr.vnodes[vnode_id].cpu_demand
    link_need: dict[int, float] = {}
    for vlink_idx, pa in link_assignment.items():
        bw = vnr.vlinks[vlink_idx].bw_demand
        for a, b in zip(pa.substrate_path, pa.substrate_path[1:]):
            li = net._pair_to_link[(min(a, b), max(a, b))]
            link_need[li] = link_need.get(li, 0.0) + bw
    for i, need in node_need.items():
        if net.nodes[i].cpu_residual < need:
            raise AllocationError(f"node {i}: demand {need} exceeds residual "
                                  f"{net.nodes[i].cpu_residual}")
    for li, need in link_need.items():
        if net.links[li].bw_residual < need:
            raise AllocationError(f"link {net.links[li].endpoints}: demand {need} "
                                  f"exceeds residual {net.links[li].bw_residual}")

    handle = AllocationHandle(net)
    for i, need in node_need.items():
        net.nodes[i].cpu_residual -= need
        handle.node_deltas.append((i, need))
    for li, need in link_need.items():
        net.links[li].bw_residual -= need
        handle.link_deltas.append((li, need))
    return handle


def release(net: SubstrateNetwork, handle: AllocationHandle) -> None:
    """Restore every residual recorded on the handle; errors on double release."""
    if handle.released:
        raise DoubleReleaseError("handle already released")
    if handle.net is not net:
        raise ValueError("handle belongs to a different network")
    for i, amount in handle.node_deltas:
        net.nodes[i].cpu_residual += amount
    for li, amount in handle.link_deltas:
        net.links[li].bw_residual += amount
    handle.released = True


def _bfs_hops(net: SubstrateNetwork, src: int, min_bw: float) -> list[int]:
    """Hop distances from src using only links with enough residual bandwidth."""
    INF = -1
    dist = [INF] * net.node_count
    dist[src] = 0
    queue = deque([src])
    while queue:
        cur = queue.popleft()
        for li in net.adjacency[cur]:
            link = net.links[li]
            if link.bw_residual < min_bw:
                continue
            nxt = link.v if link.u == cur else link.u
            if dist[nxt] == INF:
                dist[nxt] = dist[cur] + 1
                queue.append(nxt)
    return dist


def shortest_hop_path(net: SubstrateNetwork, u: int, v: int,
                      min_bw: float) -> PathAssignment | None:
    """Minimum-hop path from u to v over links with bw_residual >= min_bw.

    Returns None when no such path exists.  Among all minimum-hop paths the
    lexicographically smallest node sequence is returned, which makes runs
    reproducible.
    """
    if u == v:
        return PathAssignment(None, [u])
    du = _bfs_hops(net, u, min_bw)
    if du[v] < 0:
        return None
    dv = _bfs_hops(net, v, min_bw)
    total = du[v]
    path = [u]
    cur = u
    for step in range(1, total + 1):
        best = None
        for li in net.adjacency[cur]:
            link = net.links[li]
            if link.bw_residual < min_bw:
                continue
            nxt = link.v if link.u == cur else link.u
            if du[nxt] == step and dv[nxt] == total - step:
                if best is None or nxt < best:
                    best = nxt
        path.append(best)
        cur = best
    return PathAssignment(None, path)
