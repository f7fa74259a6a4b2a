"""End-to-end embedding of one VNR: score nodes, place virtual nodes greedily
by score, route virtual links over minimum-hop bandwidth-feasible paths, then
commit or roll back atomically.

In training mode a successful embedding additionally updates the implication
network by one SGD step and folds the fired rules into the rule base; failed
embeddings never touch the weights.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import implication
from .baselines import NodeRankParams, noderank_scores, nrm_scores
from .defuzz import ConsequentScale, defuzzify, embedding_probabilities
from .features import build_feature_matrix
from .fuzzy import FuzzyPartition, fit_partitions, fuzzify
from .graph import (AllocationError, AllocationHandle, EmbeddingResult,
                    PathAssignment, SubstrateNetwork, VirtualNetworkRequest,
                    release, shortest_hop_path)
from .implication import ImplicationNetwork, TrainConfig
from .rules import RuleBase, derive_rule, update_rulebase

POLICY_VARIANTS = ("dnfs", "noderank", "nrm")


@dataclass
class EpisodeTape:
    """Everything captured while scoring one VNR, for learning and rules."""
    fuzzified_values: np.ndarray
    partition: FuzzyPartition
    forward_tape: dict
    scores: np.ndarray          # defuzzified o
    probabilities: np.ndarray   # p


class DnfsScorer:
    """Feature -> fuzzify -> implication network -> defuzzify -> probabilities."""

    def __init__(self, network: ImplicationNetwork,
                 scale: ConsequentScale | None = None,
                 seed: int = 0, refit_partitions: bool = True):
        self.network = network
        self.scale = scale or ConsequentScale()
        self.seed = seed
        self.refit_partitions = refit_partitions
        self._partition: FuzzyPartition | None = None

    def _partitions_for(self, normalized: np.ndarray) -> FuzzyPartition:
        if self.refit_partitions or self._partition is None:
            self._partition = fit_partitions(normalized, seed=self.seed)
        return self._partition

    def scores_with_tape(self, net: SubstrateNetwork) -> tuple[np.ndarray, EpisodeTape]:
        feats = build_feature_matrix(net)
        partition = self._partitions_for(feats.normalized)
        fz = fuzzify(feats.normalized, partition)
        out, tape = implication.forward(self.network, fz.values, record_tape=True)
        o = defuzzify(out, self.scale)
        p = embedding_probabilities(o)
        return p, EpisodeTape(fz.values, partition, tape, o, p)

    def scores(self, net: SubstrateNetwork) -> np.ndarray:
        p, _ = self.scores_with_tape(net)
        return p


class NodeRankScorer:
    def __init__(self, params: NodeRankParams | None = None):
        self.params = params or NodeRankParams()

    def scores(self, net: SubstrateNetwork) -> np.ndarray:
        return noderank_scores(net, self.params)


class NrmScorer:
    def scores(self, net: SubstrateNetwork) -> np.ndarray:
        return nrm_scores(net)


@dataclass
class EmbeddingPolicy:
    variant: str
    scorer: object

    def __post_init__(self):
        if self.variant not in POLICY_VARIANTS:
            raise ValueError(f"unknown policy variant {self.variant!r}")


def make_policy(variant: str, network: ImplicationNetwork | None = None,
                scale: ConsequentScale | None = None, seed: int = 0,
                refit_partitions: bool = True,
                noderank_params: NodeRankParams | None = None) -> EmbeddingPolicy:
    if variant == "dnfs":
        if network is None:
            raise ValueError("dnfs policy needs an implication network")
        return EmbeddingPolicy("dnfs", DnfsScorer(network, scale, seed,
                                                  refit_partitions))
    if variant == "noderank":
        return EmbeddingPolicy("noderank", NodeRankScorer(noderank_params))
    if variant == "nrm":
        return EmbeddingPolicy("nrm", NrmScorer())
    raise ValueError(f"unknown policy variant {variant!r}")


def score_nodes(net: SubstrateNetwork, policy: EmbeddingPolicy) -> np.ndarray:
    return policy.scorer.scores(net)


def map_nodes(p: np.ndarray, vnr: VirtualNetworkRequest,
              net: SubstrateNetwork) -> dict[int, int] | None:
    """Greedy placement: virtual nodes by descending demand, each taking the
    highest-probability feasible substrate node not already used by this VNR.

    Returns None when some virtual node exhausts its candidates.
    """
    order = sorted(vnr.vnodes, key=lambda vn: (-vn.cpu_demand, vn.id))
    candidates = np.lexsort((np.arange(len(p)), -np.asarray(p)))
    assignment: dict[int, int] = {}
    used: set[int] = set()
    for vnode in order:
        for s in candidates:
            s = int(s)
            if s in used or net.nodes[s].cpu_residual < vnode.cpu_demand:
                continue
            assignment[vnode.id] = s
            used.add(s)
            break
        else:
            return None
    return assignment


def map_links(node_assignment: dict[int, int], vnr: VirtualNetworkRequest,
              net: SubstrateNetwork,
              handle: AllocationHandle) -> dict[int, PathAssignment] | None:
    """Route each virtual link on the residual graph, reserving bandwidth as
    it goes so later links see earlier reservations.  On failure the caller
    rolls back via the handle."""
    assignment: dict[int, PathAssignment] = {}
    for idx, vlink in enumerate(vnr.vlinks):
        su = node_assignment[vlink.a]
        sv = node_assignment[vlink.b]
        pa = shortest_hop_path(net, su, sv, vlink.bw_demand)
        if pa is None:
            return None
        pa.vlink = idx
        handle.take_path(pa.substrate_path, vlink.bw_demand)
        assignment[idx] = pa
    return assignment


def revenue(vnr: VirtualNetworkRequest) -> float:
    """Sum of granted compute and bandwidth demands."""
    return (sum(vn.cpu_demand for vn in vnr.vnodes)
            + sum(vl.bw_demand for vl in vnr.vlinks))


def cost(vnr: VirtualNetworkRequest,
         link_assignment: dict[int, PathAssignment]) -> float:
    """Compute demands plus bandwidth demands weighted by substrate path hops."""
    total = sum(vn.cpu_demand for vn in vnr.vnodes)
    for idx, vlink in enumerate(vnr.vlinks):
        total += link_assignment[idx].hops * vlink.bw_demand
    return total


def _rejected(vnr: VirtualNetworkRequest, scores=None) -> EmbeddingResult:
    return EmbeddingResult(vnr.vnr_id, {}, {}, accepted=False,
                           revenue=0.0, cost=0.0, scores=scores)


def embed_vnr(net: SubstrateNetwork, vnr: VirtualNetworkRequest,
              policy: EmbeddingPolicy, mode: str = "eval",
              rulebase: RuleBase | None = None,
              train_cfg: TrainConfig | None = None) -> EmbeddingResult:
    """Run one embedding episode; rejection is a result, never an exception.

    Residuals reflect either the whole embedding or none of it.  In train
    mode a ``dnfs`` policy learns from successes only: one SGD step on the
    episode loss plus a rule-base update for every substrate node it used.
    """
    training = mode == "train" and policy.variant == "dnfs"
    tape: EpisodeTape | None = None
    if policy.variant == "dnfs":
        p, tape = policy.scorer.scores_with_tape(net)
    else:
        p = policy.scorer.scores(net)

    node_assignment = map_nodes(p, vnr, net)
    if node_assignment is None:
        return _rejected(vnr, scores=p)

    handle = AllocationHandle(net)
    try:
        for vnode in vnr.vnodes:
            handle.take_node(node_assignment[vnode.id], vnode.cpu_demand)
    except AllocationError:
        release(net, handle)
        return _rejected(vnr, scores=p)

    link_assignment = map_links(node_assignment, vnr, net, handle)
    if link_assignment is None:
        release(net, handle)
        return _rejected(vnr, scores=p)

    if training and train_cfg is not None:
        chosen = [node_assignment[vn.id] for vn in vnr.vnodes]
        _, _, grads = implication.episode_loss_and_gradients(
            policy.scorer.network, tape.fuzzified_values, policy.scorer.scale,
            target_mode=train_cfg.target_mode, chosen=chosen,
            tape=tape.forward_tape)
        implication.sgd_step(policy.scorer.network, grads,
                             train_cfg.learning_rate)
        if rulebase is not None:
            for vnode in sorted(vnr.vnodes, key=lambda vn: vn.id):
                s = node_assignment[vnode.id]
                rule = derive_rule(tape.fuzzified_values[s], float(p[s]), p)
                update_rulebase(rulebase, rule)

    return EmbeddingResult(vnr.vnr_id, node_assignment, link_assignment,
                           accepted=True, revenue=revenue(vnr),
                           cost=cost(vnr, link_assignment),
                           handle=handle, scores=p)
