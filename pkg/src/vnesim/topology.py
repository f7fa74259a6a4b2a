"""Seeded generation of substrate topologies and VNR workloads, plus the
plain-text on-disk formats.

Substrate file layout (whitespace separated, LF endings, zero-based ids):
    line 1:        N L D          node, link and domain counts
    next N lines:  id domain x y cpu
    next L lines:  u v bw

VNR file layout (one file per request):
    line 1:        vnr_id t_start t_end n_v
    next n_v lines: vnode_id cpu
    remaining:      a b bw
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .graph import (SubstrateNetwork, SubstrateNode, VirtualLink, VirtualNode,
                    VirtualNetworkRequest)


class ConfigError(Exception):
    """Invalid or inconsistent generator configuration."""


class UnsatisfiableConfigError(ConfigError):
    """Configuration that cannot produce a valid topology."""


class TopologyParseError(Exception):
    def __init__(self, line_no: int, reason: str):
        super().__init__(f"line {line_no}: {reason}")
        self.line_no = line_no
        self.reason = reason


@dataclass
class GeneratorConfig:
    seed: int = 0
    substrate_nodes: int = 100
    substrate_links: int = 600
    domains: int = 4
    node_resource_range: tuple[int, int] = (50, 100)
    link_resource_range: tuple[int, int] = (50, 100)
    vnr_count: int = 2000
    vnr_nodes_range: tuple[int, int] = (2, 10)
    vnr_resource_range: tuple[int, int] = (1, 50)
    vlink_probability: float = 0.5
    mean_interarrival_s: float = 20.0
    mean_lifetime_s: float = 1000.0

    def validate(self) -> None:
        if self.substrate_nodes < 1 or self.substrate_links < 0 or self.domains < 1:
            raise ConfigError("counts must be positive")
        if self.vnr_count < 0:
            raise ConfigError("vnr_count must be nonnegative")
        for name in ("node_resource_range", "link_resource_range",
                     "vnr_nodes_range", "vnr_resource_range"):
            lo, hi = getattr(self, name)
            if lo > hi:
                raise ConfigError(f"{name} is empty: [{lo}, {hi}]")
        if not 0.0 <= self.vlink_probability <= 1.0:
            raise ConfigError("vlink_probability must be in [0, 1]")
        if self.mean_interarrival_s <= 0 or self.mean_lifetime_s <= 0:
            raise ConfigError("mean interarrival and lifetime must be positive")
        if self.substrate_links < self.substrate_nodes - 1:
            raise UnsatisfiableConfigError("too few links for a connected graph")
        max_links = self.substrate_nodes * (self.substrate_nodes - 1) // 2
        if self.substrate_links > max_links:
            raise UnsatisfiableConfigError("too many links for a simple graph")
        if self.vnr_nodes_range[0] < 2:
            raise ConfigError("VNRs need at least 2 virtual nodes")


def _domain_of(x: float, y: float, domains: int) -> int:
    # grid cells over the unit square; for 4 domains this is the quadrant split
    cols = math.ceil(math.sqrt(domains))
    rows = math.ceil(domains / cols)
    cx = min(int(x * cols), cols - 1)
    cy = min(int(y * rows), rows - 1)
    return (cx + cols * cy) % domains


def generate_substrate(cfg: GeneratorConfig) -> SubstrateNetwork:
    """Connected seeded random simple graph with the configured shape.

    Node locations are uniform in the unit square and determine the domain;
    capacities are uniform integers in the configured ranges.
    """
    cfg.validate()
    rng = np.random.default_rng(cfg.seed)
    n, m = cfg.substrate_nodes, cfg.substrate_links

    xs = rng.random(n)
    ys = rng.random(n)
    cpus = rng.integers(cfg.node_resource_range[0], cfg.node_resource_range[1] + 1, n)
    nodes = [SubstrateNode(i, _domain_of(xs[i], ys[i], cfg.domains),
                           (float(xs[i]), float(ys[i])), float(cpus[i]), float(cpus[i]))
             for i in range(n)]

    # random spanning tree first, then distinct extra edges
    perm = rng.permutation(n)
    edges: list[tuple[int, int]] = []
    chosen: set[tuple[int, int]] = set()
    for k in range(1, n):
        a = int(perm[k])
        b = int(perm[rng.integers(0, k)])
        key = (min(a, b), max(a, b))
        edges.append(key)
        chosen.add(key)
    remaining = [(i, j) for i in range(n) for j in range(i + 1, n)
                 if (i, j) not in chosen]
    extra = m - len(edges)
    if extra > 0:
        picks = rng.choice(len(remaining), size=extra, replace=False)
        edges.extend(remaining[int(p)] for p in picks)

    bws = rng.integers(cfg.link_resource_range[0], cfg.link_resource_range[1] + 1,
                       len(edges))
    return SubstrateNetwork(nodes, [(u, v, float(bw)) for (u, v), bw in zip(edges, bws)])


def _connected(n: int, pairs: list[tuple[int, int]]) -> bool:
    if n == 1:
        return True
    adj = [[] for _ in range(n)]
    for a, b in pairs:
        adj[a].append(b)
        adj[b].append(a)
    seen = [False] * n
    stack = [0]
    seen[0] = True
    count = 1
    while stack:
        cur = stack.pop()
        for nxt in adj[cur]:
            if not seen[nxt]:
                seen[nxt] = True
                count += 1
                stack.append(nxt)
    return count == n


def generate_vnrs(cfg: GeneratorConfig) -> list[VirtualNetworkRequest]:
    """Poisson arrivals, exponential lifetimes, per-pair coin-flip topologies.

    Each VNR graph is redrawn until connected, so every request can in
    principle be embedded as one component.
    """
    cfg.validate()
    rng = np.random.default_rng(cfg.seed + 1)
    lo_n, hi_n = cfg.vnr_nodes_range
    lo_r, hi_r = cfg.vnr_resource_range

    vnrs = []
    t = 0.0
    for vnr_id in range(cfg.vnr_count):
        t += float(rng.exponential(cfg.mean_interarrival_s))
        lifetime = float(rng.exponential(cfg.mean_lifetime_s))
        n_v = int(rng.integers(lo_n, hi_n + 1))
        all_pairs = [(a, b) for a in range(n_v) for b in range(a + 1, n_v)]
        while True:
            mask = rng.random(len(all_pairs)) < cfg.vlink_probability
            pairs = [p for p, keep in zip(all_pairs, mask) if keep]
            if _connected(n_v, pairs):
                break
        vnodes = [VirtualNode(j, float(rng.integers(lo_r, hi_r + 1)))
                  for j in range(n_v)]
        vlinks = [VirtualLink(a, b, float(rng.integers(lo_r, hi_r + 1)))
                  for a, b in pairs]
        vnrs.append(VirtualNetworkRequest(vnr_id, vnodes, vlinks, t, t + lifetime))
    return vnrs


def _fmt(x: float) -> str:
    return repr(float(x))


def write_substrate(net: SubstrateNetwork, path: str) -> None:
    lines = [f"{net.node_count} {len(net.links)} {net.domain_count}"]
    for node in net.nodes:
        x, y = node.location
        lines.append(f"{node.id} {node.domain} {_fmt(x)} {_fmt(y)} {_fmt(node.cpu_capacity)}")
    for link in net.links:
        lines.append(f"{link.u} {link.v} {_fmt(link.bw_capacity)}")
    with open(path, "w", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def _split_fields(line: str, expected: int, line_no: int) -> list[str]:
    fields = line.split()
    if len(fields) != expected:
        raise TopologyParseError(line_no, f"expected {expected} fields, got {len(fields)}")
    return fields


def _parse_int(tok: str, line_no: int, what: str) -> int:
    try:
        return int(tok)
    except ValueError:
        raise TopologyParseError(line_no, f"bad {what}: {tok!r}") from None


def _parse_float(tok: str, line_no: int, what: str) -> float:
    try:
        return float(tok)
    except ValueError:
        raise TopologyParseError(line_no, f"bad {what}: {tok!r}") from None


def read_substrate(path: str) -> SubstrateNetwork:
    with open(path) as fh:
        raw = fh.read().splitlines()
    if not raw:
        raise TopologyParseError(1, "empty file")
    header = _split_fields(raw[0], 3, 1)
    n = _parse_int(header[0], 1, "node count")
    m = _parse_int(header[1], 1, "link count")
    _parse_int(header[2], 1, "domain count")
    if len(raw) < 1 + n + m:
        raise TopologyParseError(len(raw) + 1, f"expected {1 + n + m} lines, got {len(raw)}")
    nodes = []
    for i in range(n):
        line_no = 2 + i
        f = _split_fields(raw[1 + i], 5, line_no)
        nid = _parse_int(f[0], line_no, "node id")
        dom = _parse_int(f[1], line_no, "domain")
        x = _parse_float(f[2], line_no, "x")
        y = _parse_float(f[3], line_no, "y")
        cpu = _parse_float(f[4], line_no, "cpu")
        if nid != i:
            raise TopologyParseError(line_no, f"node ids must be sequential, got {nid}")
        nodes.append(SubstrateNode(nid, dom, (x, y), cpu, cpu))
    links = []
    for k in range(m):
        line_no = 2 + n + k
        f = _split_fields(raw[1 + n + k], 3, line_no)
        u = _parse_int(f[0], line_no, "endpoint")
        v = _parse_int(f[1], line_no, "endpoint")
        bw = _parse_float(f[2], line_no, "bw")
        if not (0 <= u < n and 0 <= v < n):
            raise TopologyParseError(line_no, f"endpoint out of range: {u} {v}")
        links.append((u, v, bw))
    return SubstrateNetwork(nodes, links)


def write_vnr(vnr: VirtualNetworkRequest, path: str) -> None:
    lines = [f"{vnr.vnr_id} {_fmt(vnr.t_start)} {_fmt(vnr.t_end)} {len(vnr.vnodes)}"]
    for vn in vnr.vnodes:
        lines.append(f"{vn.id} {_fmt(vn.cpu_demand)}")
    for vl in vnr.vlinks:
        lines.append(f"{vl.a} {vl.b} {_fmt(vl.bw_demand)}")
    with open(path, "w", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def read_vnr(path: str) -> VirtualNetworkRequest:
    with open(path) as fh:
        raw = fh.read().splitlines()
    if not raw:
        raise TopologyParseError(1, "empty file")
    header = _split_fields(raw[0], 4, 1)
    vnr_id = _parse_int(header[0], 1, "vnr id")
    t_start = _parse_float(header[1], 1, "t_start")
    t_end = _parse_float(header[2], 1, "t_end")
    n_v = _parse_int(header[3], 1, "vnode count")
    if t_end <= t_start:
        raise TopologyParseError(1, f"t_end {t_end} not after t_start {t_start}")
    if len(raw) < 1 + n_v:
        raise TopologyParseError(len(raw) + 1, "missing vnode lines")
    vnodes = []
    for j in range(n_v):
        line_no = 2 + j
        f = _split_fields(raw[1 + j], 2, line_no)
        vid = _parse_int(f[0], line_no, "vnode id")
        cpu = _parse_float(f[1], line_no, "cpu")
        if vid != j:
            raise TopologyParseError(line_no, f"vnode ids must be sequential, got {vid}")
        vnodes.append(VirtualNode(vid, cpu))
    vlinks = []
    for k, line in enumerate(raw[1 + n_v:]):
        line_no = 2 + n_v + k
        if not line.strip():
            continue
        f = _split_fields(line, 3, line_no)
        a = _parse_int(f[0], line_no, "endpoint")
        b = _parse_int(f[1], line_no, "endpoint")
        bw = _parse_float(f[2], line_no, "bw")
        if not (0 <= a < n_v and 0 <= b < n_v) or a == b:
            raise TopologyParseError(line_no, f"bad vlink endpoints: {a} {b}")
        vlinks.append(VirtualLink(a, b, bw))
    return VirtualNetworkRequest(vnr_id, vnodes, vlinks, t_start, t_end)
