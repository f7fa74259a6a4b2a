"""Gaussian fuzzification with linguistic labels fitted by 1-D k-means.

Each input dimension gets five membership functions labeled VL, L, M, H and
VH in ascending center order.  Centers come from seeded k-means++ clustering
of the current column values; widths are the per-cluster population standard
deviations, clamped away from zero.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

LABELS = ("VL", "L", "M", "H", "VH")
LABEL_LONG = {"VL": "very low", "L": "low", "M": "medium", "H": "high", "VH": "very high"}
SIGMA_MIN = 1e-3
# underflow floor keeps membership values strictly positive
_MEMBERSHIP_FLOOR = 1e-300


@dataclass
class MembershipFunction:
    center: float
    sigma: float
    label: str

    def __call__(self, x: float) -> float:
        return membership(self, x)


def membership(mf: MembershipFunction, x) -> float | np.ndarray:
    """Gaussian membership exp(-(x-c)^2 / (2 sigma^2)), in (0, 1]."""
    val = np.exp(-((np.asarray(x, dtype=float) - mf.center) ** 2)
                 / (2.0 * mf.sigma ** 2))
    out = np.maximum(val, _MEMBERSHIP_FLOOR)
    return float(out) if out.ndim == 0 else out


def _kmeans_pp_init(values: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    centers = np.empty(k)
    centers[0] = values[rng.integers(values.size)]
    for j in range(1, k):
        d2 = np.min((values[:, None] - centers[None, :j]) ** 2, axis=1)
        total = d2.sum()
        if total <= 0.0:
            centers[j:] = values[rng.integers(values.size, size=k - j)]
            break
        centers[j] = rng.choice(values, p=d2 / total)
    return centers


def kmeans_1d(values, k: int, seed: int, max_iter: int = 100,
              tol: float = 1e-6) -> tuple[np.ndarray, np.ndarray]:
    """Seeded 1-D Lloyd iteration with k-means++ init.

    Returns (centers, assignments); centers are not sorted here.
    """
    values = np.asarray(values, dtype=float)
    rng = np.random.default_rng(seed)
    centers = _kmeans_pp_init(values, k, rng)
    assign = np.zeros(values.size, dtype=int)
    for _ in range(max_iter):
        dist = np.abs(values[None, :] - centers[:, None])
        assign = np.argmin(dist, axis=0)
        sums = np.bincount(assign, weights=values, minlength=k)
        counts = np.bincount(assign, minlength=k)
        new_centers = np.where(counts > 0, sums / np.maximum(counts, 1), centers)
        shift = np.max(np.abs(new_centers - centers))
        centers = new_centers
        if shift < tol:
            break
    assign = np.argmin(np.abs(values[None, :] - centers[:, None]), axis=0)
    return centers, assign


def fit_partition(column_values, k: int = 5, seed: int = 0) -> list[MembershipFunction]:
    """Fit k Gaussian membership functions to one feature column.

    Degenerate columns (fewer than k distinct values) fall back to k evenly
    spaced centers over [0, 1] with sigma 0.1.
    """
    values = np.asarray(column_values, dtype=float)
    if np.unique(values).size < k:
        centers = np.linspace(0.0, 1.0, k)
        return [MembershipFunction(float(c), 0.1, LABELS[j])
                for j, c in enumerate(centers)]
    centers, assign = kmeans_1d(values, k, seed)
    order = np.argsort(centers, kind="stable")
    mfs = []
    for rank, j in enumerate(order):
        members = values[assign == j]
        sigma = float(members.std()) if members.size else 0.0
        mfs.append(MembershipFunction(float(centers[j]), max(sigma, SIGMA_MIN),
                                      LABELS[rank]))
    if any(b.center <= a.center for a, b in zip(mfs, mfs[1:])):
        # duplicate converged centers: treat as degenerate data
        centers = np.linspace(0.0, 1.0, k)
        return [MembershipFunction(float(c), 0.1, LABELS[j])
                for j, c in enumerate(centers)]
    return mfs


@dataclass
class FuzzyPartition:
    """Five membership functions per input dimension."""
    dimensions: list[list[MembershipFunction]]

    def centers(self) -> np.ndarray:
        return np.array([[mf.center for mf in dim] for dim in self.dimensions])

    def sigmas(self) -> np.ndarray:
        return np.array([[mf.sigma for mf in dim] for dim in self.dimensions])

    def to_json(self) -> str:
        payload = [[{"label": mf.label, "center": mf.center, "sigma": mf.sigma}
                    for mf in dim] for dim in self.dimensions]
        return json.dumps(payload, indent=2)


def fit_partitions(matrix: np.ndarray, k: int = 5, seed: int = 0) -> FuzzyPartition:
    return FuzzyPartition([fit_partition(matrix[:, d], k, seed)
                           for d in range(matrix.shape[1])])


@dataclass
class FuzzifiedInput:
    values: np.ndarray         # |n| x dims x labels membership tensor
    label_indices: np.ndarray  # |n| x dims argmax label index per dimension

    def labels(self, row: int) -> tuple[str, ...]:
        return tuple(LABELS[j] for j in self.label_indices[row])


def fuzzify(matrix: np.ndarray, partition: FuzzyPartition) -> FuzzifiedInput:
    """Evaluate every membership function on every node row.

    Argmax label ties resolve toward the lower label (VL side).
    """
    c = partition.centers()[None, :, :]
    s = partition.sigmas()[None, :, :]
    vals = np.exp(-((matrix[:, :, None] - c) ** 2) / (2.0 * s ** 2))
    vals = np.maximum(vals, _MEMBERSHIP_FLOOR)
    return FuzzifiedInput(values=vals, label_indices=np.argmax(vals, axis=2))
