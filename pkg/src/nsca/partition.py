"""Hypothesis-test partitioning of samples and class-conditional statistics.

An index series says how nonstationary each sample looks; this module turns
that into a labeling of the record (background vs event, or K quantile
classes) and estimates the per-class covariance structure that the
separation engines diagonalize.
"""

from dataclasses import dataclass

import numpy as np

from .errors import (
    BadClass,
    ClassTooSmall,
    DegenerateIndex,
    EmptyClass,
    ShapeMismatch,
)
from .linalg import SymMatrix
from .records import IndexSeries, Record

__all__ = [
    "Partition",
    "CovarianceSet",
    "threshold_mask",
    "quantile_partition",
    "class_covariances",
    "pooled_complement",
]


class Partition:
    """Disjoint labeling of T samples into classes ``0 .. K-1``.

    Class 0 is the background/stationary class by convention. Classes may be
    empty at this level; emptiness is rejected where it matters, at
    covariance-estimation time.
    """

    __slots__ = ("labels", "K", "class_counts")

    def __init__(self, labels, K=None):
        lab = np.array(labels, dtype=np.int64)
        if lab.ndim != 1 or lab.size < 1:
            raise ShapeMismatch("labels must be a nonempty 1-D integer array")
        if K is None:
            K = max(int(lab.max()) + 1, 2)
        K = int(K)
        if K < 2:
            raise ValueError("a partition needs at least 2 classes")
        if lab.min() < 0 or lab.max() >= K:
            raise ValueError(f"labels must lie in [0, {K})")
        lab.setflags(write=False)
        self.labels = lab
        self.K = K
        self.class_counts = np.bincount(lab, minlength=K)

    @property
    def length(self):
        return self.labels.size

    def __repr__(self):
        return f"Partition(K={self.K}, counts={self.class_counts.tolist()})"


def _erode_short_events(labels, min_event_len):
    """Zero out runs of label 1 shorter than min_event_len."""
    if min_event_len <= 1:
        return labels
    padded = np.concatenate(([0], labels, [0]))
    edges = np.flatnonzero(np.diff(padded))
    starts, ends = edges[::2], edges[1::2]
    for s, e in zip(starts, ends):
        if e - s < min_event_len:
            labels[s:e] = 0
    return labels


def threshold_mask(idx, theta_rel=0.5, min_event_len=1):
    """Two-class partition: label 1 where the index reaches a relative level.

    The threshold is ``theta_rel`` times the index maximum over its valid
    range, compared inclusively, so ``theta_rel = 1.0`` selects the argmax
    samples. Label-1 runs shorter than ``min_event_len`` are erased. Warm-up
    samples are background.

    Raises
    ------
    EmptyClass
        If either class ends up empty; the caller must adjust ``theta_rel``
        or ``min_event_len``.
    """
    if not isinstance(idx, IndexSeries):
        raise TypeError("threshold_mask expects an IndexSeries")
    if not 0.0 < theta_rel <= 1.0:
        raise ValueError("theta_rel must be in (0, 1]")
    if min_event_len < 1:
        raise ValueError("min_event_len must be >= 1")
    valid = idx.valid_values()
    thr = theta_rel * valid.max()
    labels = np.zeros(idx.length, dtype=np.int64)
    labels[idx.valid_from:] = (valid >= thr).astype(np.int64)
    labels = _erode_short_events(labels, int(min_event_len))
    ones = int(labels.sum())
    if ones == 0:
        raise EmptyClass("no samples reach the threshold after erosion")
    if ones == labels.size:
        raise EmptyClass("every sample reaches the threshold; raise theta_rel")
    return Partition(labels, K=2)


def quantile_partition(idx, K):
    """K-class partition at the empirical ``j/K`` quantiles of the index.

    Ties on a boundary fall to the lower bin. Warm-up samples are class 0.

    Raises
    ------
    DegenerateIndex
        If the valid range has fewer than K distinct values.
    """
    if not isinstance(idx, IndexSeries):
        raise TypeError("quantile_partition expects an IndexSeries")
    K = int(K)
    if K < 2:
        raise ValueError("K must be >= 2")
    valid = idx.valid_values()
    if np.unique(valid).size < K:
        raise DegenerateIndex(f"index has fewer than {K} distinct values")
    cuts = np.quantile(valid, np.arange(1, K) / K)
    labels = np.zeros(idx.length, dtype=np.int64)
    labels[idx.valid_from:] = np.searchsorted(cuts, valid, side="left")
    return Partition(labels, K=K)


@dataclass(frozen=True)
class CovarianceSet:
    """Class-conditional covariances, means and weights, plus the totals."""

    covs: tuple  # of SymMatrix, one per class
    means: np.ndarray  # (K, n)
    weights: np.ndarray  # (K,)
    counts: np.ndarray  # (K,)
    total: SymMatrix
    total_mean: np.ndarray  # (n,)

    @property
    def K(self):
        return len(self.covs)

    @property
    def dim(self):
        return self.total.dim


def class_covariances(record, part, weight_rule="cardinality"):
    """Unbiased covariance, mean and weight of each class, plus the totals.

    ``weight_rule`` is "cardinality" (``|P_i| / T``, sums to 1) or "uniform"
    (``1/K``). Every class must have at least ``n + 1`` samples so its
    covariance has full degrees of freedom.

    Raises
    ------
    ClassTooSmall
        Naming the first class with fewer than ``n + 1`` samples (empty
        classes included).
    """
    if not isinstance(record, Record):
        record = Record(record)
    if not isinstance(part, Partition):
        raise TypeError("class_covariances expects a Partition")
    if part.length != record.length:
        raise ShapeMismatch("partition length must match the record")
    if weight_rule not in ("cardinality", "uniform"):
        raise ValueError("weight_rule must be 'cardinality' or 'uniform'")
    n = record.channels
    T = record.length
    X = record.samples
    covs = []
    means = np.empty((part.K, n))
    for i in range(part.K):
        cnt = int(part.class_counts[i])
        if cnt < n + 1:
            raise ClassTooSmall(
                f"class {i} has {cnt} samples, needs at least {n + 1}",
                class_index=i,
            )
        Xi = X[:, part.labels == i]
        mi = Xi.mean(axis=1)
        centered = Xi - mi[:, None]
        covs.append(SymMatrix(centered @ centered.T / (cnt - 1)))
        means[i] = mi
    if weight_rule == "cardinality":
        weights = part.class_counts / T
    else:
        weights = np.full(part.K, 1.0 / part.K)
    mx = X.mean(axis=1)
    centered = X - mx[:, None]
    total = SymMatrix(centered @ centered.T / (T - 1))
    return CovarianceSet(
        covs=tuple(covs),
        means=means,
        weights=np.asarray(weights, dtype=np.float64),
        counts=part.class_counts.copy(),
        total=total,
        total_mean=mx,
    )


def pooled_complement(covset, j):
    """Weighted covariance of everything except class ``j``:
    ``sum_{i != j} w_i C_i``."""
    if not 0 <= j < covset.K:
        raise BadClass(f"class {j} outside [0, {covset.K})")
    n = covset.dim
    acc = np.zeros((n, n))
    for i in range(covset.K):
        if i != j:
            acc += covset.weights[i] * covset.covs[i].entries
    return SymMatrix(acc)
