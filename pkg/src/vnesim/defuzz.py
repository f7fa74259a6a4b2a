"""Center-of-gravity defuzzification and score normalization.

The consequent axis carries five representative crisp values (one per
linguistic label); a node's crisp score is the membership-weighted average of
those values, and embedding probabilities are the scores normalized to sum 1.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .fuzzy import LABELS


@dataclass
class ConsequentScale:
    """Representative crisp values for the consequent labels, VL..VH."""
    values: tuple[float, ...] = (0.1, 0.3, 0.5, 0.7, 0.9)
    labels: tuple[str, ...] = LABELS

    def __post_init__(self):
        if len(self.values) != len(self.labels):
            raise ValueError("one representative value per label required")
        if any(b <= a for a, b in zip(self.values, self.values[1:])):
            raise ValueError("representative values must be strictly increasing")

    def as_array(self) -> np.ndarray:
        return np.asarray(self.values, dtype=float)


def defuzzify(memberships, scale: ConsequentScale) -> float | np.ndarray:
    """Weighted average of the representative values; one score per row."""
    m = np.asarray(memberships, dtype=float)
    v = scale.as_array()
    num = m @ v
    den = m.sum(axis=-1)
    out = num / den
    return float(out) if out.ndim == 0 else out


def embedding_probabilities(scores, exponential: bool = False) -> np.ndarray:
    """Normalize positive per-node scores into a probability vector.

    Default is plain sum-normalization, which preserves the ranking of the
    scores exactly.  The exponential variant (softmax) exists for ablation.
    """
    o = np.asarray(scores, dtype=float)
    if exponential:
        z = np.exp(o - o.max())
        return z / z.sum()
    return o / o.sum()
