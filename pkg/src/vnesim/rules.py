"""Interpretable antecedent-consequent rule base extracted during training.

Each successful embedding contributes one rule per substrate node it used:
the antecedent is the node's strongest linguistic label per input dimension,
the consequent labels the magnitude of the node's embedding probability, and
the rule weight stores that probability.  Repeated observations of the same
(antecedent, consequent) key merge into a running-mean weight with a support
counter.  The consequent variable is rendered as ``ned`` (node embedding
probability).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .features import normalize_column
from .fuzzy import LABELS, LABEL_LONG

# equal-width buckets over the min-max scaled probability axis
_BUCKET_CUTS = (0.2, 0.4, 0.6, 0.8)


@dataclass
class FuzzyRule:
    antecedent: tuple[str, str, str]
    consequent: str
    weight: float
    support: int = 1
    node_label: str = ""

    def __post_init__(self):
        if not self.node_label:
            self.node_label = self.consequent

    @property
    def key(self) -> tuple[tuple[str, str, str], str]:
        return (self.antecedent, self.consequent)


def consequent_label(scaled_value: float) -> str:
    """Bucket a min-max scaled probability into VL..VH."""
    idx = int(np.searchsorted(_BUCKET_CUTS, scaled_value, side="right"))
    return LABELS[idx]


def derive_rule(membership_row: np.ndarray, p_j: float,
                p_all: np.ndarray) -> FuzzyRule:
    """Rule for one substrate node given its 3x5 membership row and its
    embedding probability within the current probability vector.

    Argmax ties resolve toward the lower label.
    """
    row = np.asarray(membership_row, dtype=float)
    antecedent = tuple(LABELS[int(j)] for j in np.argmax(row, axis=1))
    scaled = normalize_column(p_all)
    # locate p_j's scaled value; fall back to scaling the scalar directly
    p_arr = np.asarray(p_all, dtype=float)
    matches = np.nonzero(p_arr == p_j)[0]
    if matches.size:
        scaled_value = float(scaled[matches[0]])
    else:
        lo, hi = p_arr.min(), p_arr.max()
        scaled_value = 0.5 if hi == lo else (p_j - lo) / (hi - lo)
    label = consequent_label(scaled_value)
    return FuzzyRule(antecedent=antecedent, consequent=label, weight=float(p_j))


class RuleBase:
    """Rules keyed by (antecedent triple, consequent label), insertion ordered."""

    def __init__(self):
        self._rules: dict[tuple, FuzzyRule] = {}

    def __len__(self) -> int:
        return len(self._rules)

    def __iter__(self):
        return iter(self._rules.values())

    def rules(self) -> list[FuzzyRule]:
        return list(self._rules.values())

    def to_json(self) -> str:
        payload = [{"antecedent": list(r.antecedent), "consequent": r.consequent,
                    "weight": r.weight, "support": r.support}
                   for r in self._rules.values()]
        return json.dumps(payload, indent=2)

    @classmethod
    def from_json(cls, text: str) -> "RuleBase":
        rb = cls()
        for item in json.loads(text):
            rule = FuzzyRule(antecedent=tuple(item["antecedent"]),
                             consequent=item["consequent"],
                             weight=float(item["weight"]),
                             support=int(item.get("support", 1)))
            rb._rules[rule.key] = rule
        return rb


def update_rulebase(rb: RuleBase, rule: FuzzyRule) -> None:
    """Insert a new rule or fold a repeat into the existing one.

    Repeats increment the support counter and keep the weight as the running
    mean of every observation.
    """
    existing = rb._rules.get(rule.key)
    if existing is None:
        rb._rules[rule.key] = rule
    else:
        existing.support += 1
        existing.weight += (rule.weight - existing.weight) / existing.support


def render_rule(rule: FuzzyRule, index: int | None = None) -> str:
    a1, a2, a3 = rule.antecedent
    parts = [f"If x1 is {LABEL_LONG[a1]} ({a1})",
             f"and x2 is {LABEL_LONG[a2]} ({a2})",
             f"and x3 is {LABEL_LONG[a3]} ({a3})"]
    head = f"R{index}: " if index is not None else ""
    body = ", ".join(parts)
    tail = f"Then ned is {LABEL_LONG[rule.consequent]} ({rule.consequent}): {rule.weight:.4f}"
    return f"{head}{body}, {tail}"


def render_rulebase(rb: RuleBase) -> str:
    return "\n".join(render_rule(r, i + 1) for i, r in enumerate(rb))


def resource_monotonicity(rb: RuleBase, dim: int = 0, hi: str = "VH",
                          lo: str = "L") -> tuple[int, int]:
    """Count rule pairs supporting "more resources -> higher weight".

    Pairs every hi-labeled rule against every lo-labeled rule that agrees on
    the other two antecedent dimensions; a pair is ordered correctly when the
    hi rule's weight is at least the lo rule's.  Returns (ordered, total).
    """
    others = [d for d in range(3) if d != dim]
    hi_rules = [r for r in rb if r.antecedent[dim] == hi]
    lo_rules = [r for r in rb if r.antecedent[dim] == lo]
    ordered = total = 0
    for rh in hi_rules:
        for rl in lo_rules:
            if all(rh.antecedent[d] == rl.antecedent[d] for d in others):
                total += 1
                if rh.weight >= rl.weight:
                    ordered += 1
    return ordered, total
