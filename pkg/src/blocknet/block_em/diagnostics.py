"""Partition diagnostics."""
from dataclasses import dataclass

import numpy as np


def _labels(z):
    return np.asarray(getattr(z, "z", z))


def _pairs(counts):
    counts = counts.astype(np.float64)
    return float((counts * (counts - 1) / 2).sum())


def yule_coefficient(z1, z2):
    """Yule's Q over the dyad co-membership table of two partitions.

    ``a``: dyads together in both, ``b``: only in ``z1``, ``c``: only in
    ``z2``, ``d``: apart in both; ``Q = (ad - bc) / (ad + bc)``. Labels are
    irrelevant. When the table degenerates to ``ad + bc = 0`` the value is 1
    for identical partitions and 0 otherwise. The result is signed, in
    ``[-1, 1]``.
    """
    a1, a2 = _labels(z1), _labels(z2)
    if a1.shape != a2.shape:
        raise ValueError(f"partitions cover {a1.size} and {a2.size} nodes")
    n = a1.size
    _, i1 = np.unique(a1, return_inverse=True)
    _, i2 = np.unique(a2, return_inverse=True)
    both = np.unique(i1.astype(np.int64) * (i2.max() + 1 if n else 1) + i2, return_counts=True)[1]
    a = _pairs(both)
    t1 = _pairs(np.bincount(i1))
    t2 = _pairs(np.bincount(i2))
    b = t1 - a
    c = t2 - a
    d = n * (n - 1) / 2 - a - b - c
    den = a * d + b * c
    if den == 0:
        return 1.0 if b == 0 and c == 0 else 0.0
    return float((a * d - b * c) / den)


@dataclass(frozen=True)
class PartitionSummary:
    n_blocks: int
    sizes: np.ndarray
    median: float
    iqr: float
    largest: int


def partition_summary(z):
    labels = _labels(z)
    sizes = np.bincount(np.unique(labels, return_inverse=True)[1].ravel())
    q1, med, q3 = np.percentile(sizes, [25, 50, 75]) if sizes.size else (0.0, 0.0, 0.0)
    return PartitionSummary(int(sizes.size), np.sort(sizes), float(med), float(q3 - q1),
                            int(sizes.max()) if sizes.size else 0)
