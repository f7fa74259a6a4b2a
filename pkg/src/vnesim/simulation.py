"""Discrete-event simulation loop and evaluation metrics.

Arrivals embed VNRs against the live substrate; accepted VNRs hold their
resources until their end time, when everything they consumed is released
exactly.  A ledger records per-VNR outcomes plus the score vectors and
realized placements needed for the decision-accuracy metrics.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field

import numpy as np

from .engine import EmbeddingPolicy, embed_vnr
from .graph import SubstrateNetwork, VirtualNetworkRequest, release
from .implication import TrainConfig
from .rules import RuleBase

SAMPLE_START_S = 22.0
SAMPLE_INTERVAL_S = 4000.0


@dataclass
class VnrRecord:
    vnr_id: int
    t_start: float
    t_end: float
    accepted: bool
    revenue: float
    cost: float


@dataclass
class MetricsLedger:
    records: list[VnrRecord] = field(default_factory=list)
    arrived_count: int = 0
    accepted_count: int = 0
    predicted: dict[int, np.ndarray] = field(default_factory=dict)
    placements: dict[int, list[int]] = field(default_factory=dict)


@dataclass
class TimeSeriesReport:
    times: list[float]
    avg_revenue: list[float]
    revenue_cost: list[float]
    acceptance: list[float]


def long_term_avg_revenue(ledger: MetricsLedger, t: float) -> float:
    """Accumulated revenue of accepted VNRs that arrived by t, divided by t."""
    total = sum(r.revenue for r in ledger.records
                if r.accepted and r.t_start <= t)
    return total / t if t > 0 else 0.0


def revenue_cost_ratio(ledger: MetricsLedger, t: float) -> float:
    """Ratio of accumulated revenue to accumulated cost; 0 when no cost yet."""
    rev = sum(r.revenue for r in ledger.records if r.accepted and r.t_start <= t)
    cst = sum(r.cost for r in ledger.records if r.accepted and r.t_start <= t)
    return rev / cst if cst > 0 else 0.0


def acceptance_rate(ledger: MetricsLedger, t: float) -> float:
    """Accepted over arrived among VNRs with t_start <= t; 0 before arrivals."""
    arrived = sum(1 for r in ledger.records if r.t_start <= t)
    accepted = sum(1 for r in ledger.records if r.accepted and r.t_start <= t)
    return accepted / arrived if arrived else 0.0


def rmse(predicted, actual) -> float:
    y = np.asarray(predicted, dtype=float)
    yhat = np.asarray(actual, dtype=float)
    return float(np.sqrt(np.mean((y - yhat) ** 2)))


def pearson(predicted, actual) -> float:
    """Centered correlation; 0 when either side has zero variance."""
    y = np.asarray(predicted, dtype=float)
    yhat = np.asarray(actual, dtype=float)
    yc = y - y.mean()
    hc = yhat - yhat.mean()
    denom = np.sqrt((yc ** 2).sum()) * np.sqrt((hc ** 2).sum())
    if denom == 0.0:
        return 0.0
    return float((yc * hc).sum() / denom)


def placement_vector(hosts: list[int], n: int) -> np.ndarray:
    """Uniform distribution over the substrate nodes hosting a VNR."""
    v = np.zeros(n)
    if hosts:
        v[list(hosts)] = 1.0 / len(hosts)
    return v


def decision_accuracy(ledger: MetricsLedger, n: int) -> tuple[float, float, int]:
    """Mean RMSE and mean Pearson correlation between the score vectors and
    the realized placements, over VNRs with recorded placements."""
    phis, psis = [], []
    for vnr_id, hosts in ledger.placements.items():
        pred = ledger.predicted.get(vnr_id)
        if pred is None:
            continue
        actual = placement_vector(hosts, n)
        phis.append(rmse(pred, actual))
        psis.append(pearson(pred, actual))
    if not phis:
        return 0.0, 0.0, 0
    return float(np.mean(phis)), float(np.mean(psis)), len(phis)


def build_time_series(ledger: MetricsLedger,
                      sample_start: float = SAMPLE_START_S,
                      sample_interval: float = SAMPLE_INTERVAL_S) -> TimeSeriesReport:
    """Cumulative metrics on the fixed sampling grid, plus a final sample at
    the last arrival so the series always covers the whole workload."""
    if ledger.records:
        t_last = max(r.t_start for r in ledger.records)
    else:
        t_last = sample_start
    times = []
    t = sample_start
    while t <= t_last:
        times.append(t)
        t += sample_interval
    if not times or times[-1] < t_last:
        times.append(t_last)
    return TimeSeriesReport(
        times=times,
        avg_revenue=[long_term_avg_revenue(ledger, t) for t in times],
        revenue_cost=[revenue_cost_ratio(ledger, t) for t in times],
        acceptance=[acceptance_rate(ledger, t) for t in times],
    )


_DEPARTURE, _ARRIVAL = 0, 1


def run_simulation(net: SubstrateNetwork,
                   vnrs: list[VirtualNetworkRequest],
                   policy: EmbeddingPolicy,
                   mode: str = "eval",
                   rulebase: RuleBase | None = None,
                   train_cfg: TrainConfig | None = None,
                   sample_start: float = SAMPLE_START_S,
                   sample_interval: float = SAMPLE_INTERVAL_S,
                   ) -> tuple[MetricsLedger, TimeSeriesReport]:
    """Process every arrival and expiry in time order and collect metrics.

    Departures at the same instant run before arrivals so expiring resources
    are available to the incoming request.  All lifetimes are drained at the
    end, leaving the network back at full capacity if nothing else holds
    allocations.
    """
    ledger = MetricsLedger()
    events: list[tuple[float, int, int, object]] = []
    for seq, vnr in enumerate(vnrs):
        heapq.heappush(events, (vnr.t_start, _ARRIVAL, seq, vnr))
    seq = len(vnrs)

    while events:
        t, kind, _, payload = heapq.heappop(events)
        if kind == _DEPARTURE:
            release(net, payload)
            continue
        vnr: VirtualNetworkRequest = payload
        result = embed_vnr(net, vnr, policy, mode=mode, rulebase=rulebase,
                           train_cfg=train_cfg)
        ledger.arrived_count += 1
        ledger.records.append(VnrRecord(vnr.vnr_id, vnr.t_start, vnr.t_end,
                                        result.accepted, result.revenue,
                                        result.cost))
        if result.scores is not None:
            ledger.predicted[vnr.vnr_id] = np.asarray(result.scores)
        if result.accepted:
            ledger.accepted_count += 1
            ledger.placements[vnr.vnr_id] = sorted(result.node_assignment.values())
            heapq.heappush(events, (vnr.t_end, _DEPARTURE, seq, result.handle))
            seq += 1

    report = build_time_series(ledger, sample_start, sample_interval)
    return ledger, report


@dataclass
class IterationStats:
    iteration: int
    avg_revenue: float
    revenue_cost: float
    acceptance: float


def train_policy(substrate: SubstrateNetwork,
                 vnrs: list[VirtualNetworkRequest],
                 policy: EmbeddingPolicy,
                 train_cfg: TrainConfig,
                 rulebase: RuleBase | None = None,
                 ) -> list[IterationStats]:
    """Repeatedly replay the workload on a fresh substrate copy, learning
    across iterations; returns the per-iteration indicator curve."""
    train_cfg.validate()
    curves = []
    t_last = max((v.t_start for v in vnrs), default=1.0)
    for iteration in range(train_cfg.max_iterations):
        ledger, _ = run_simulation(substrate.copy(), vnrs, policy,
                                   mode="train", rulebase=rulebase,
                                   train_cfg=train_cfg)
        curves.append(IterationStats(
            iteration=iteration,
            avg_revenue=long_term_avg_revenue(ledger, t_last),
            revenue_cost=revenue_cost_ratio(ledger, t_last),
            acceptance=acceptance_rate(ledger, t_last)))
    return curves


def report_to_csv(report: TimeSeriesReport, path: str) -> None:
    lines = ["t,avg_revenue,revenue_cost_ratio,acceptance_rate"]
    for i, t in enumerate(report.times):
        lines.append(f"{t},{report.avg_revenue[i]},{report.revenue_cost[i]},"
                     f"{report.acceptance[i]}")
    with open(path, "w", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def ledger_to_jsonl(ledger: MetricsLedger, path: str) -> None:
    import json
    with open(path, "w", newline="\n") as fh:
        for r in ledger.records:
            fh.write(json.dumps({"vnr_id": r.vnr_id, "t_start": r.t_start,
                                 "t_end": r.t_end, "accepted": r.accepted,
                                 "revenue": r.revenue, "cost": r.cost}) + "\n")
