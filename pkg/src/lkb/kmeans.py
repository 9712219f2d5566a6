"""Lloyd's k-means over float32 row data.

Used for both inverted-file partitioning and per-subspace codebook
training. Everything is deterministic for a fixed seed: initial
centroids are distinct rows sampled without replacement through a
SplitMix64 stream, assignment ties go to the lowest centroid index, and
empty clusters are reseeded to the point currently farthest from its
centroid. Distances are accumulated in float64; centroids are stored as
float32 so they serialize bit-exactly.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .rng import SplitMix64

DEFAULT_ITERS = 25


@dataclass
class KMeansResult:
    centroids: np.ndarray  # (k, dim) float32
    assignments: np.ndarray  # (n,) int64, consistent with the returned centroids
    objective_trace: list[float]  # sum of squared distances per iteration
    iterations: int
    converged: bool
    init_duplicates: bool  # k exceeded the number of distinct rows


def _init_centroids(data: np.ndarray, k: int, seed: int) -> tuple[np.ndarray, bool]:
    unique_rows = np.unique(data, axis=0)
    if len(unique_rows) >= k:
        picks = SplitMix64(seed).sample(len(unique_rows), k)
        return unique_rows[picks].copy(), False
    warnings.warn(
        f"k-means asked for {k} clusters but only {len(unique_rows)} distinct rows exist; "
        "duplicating centroids",
        stacklevel=3,
    )
    reps = -(-k // len(unique_rows))
    return np.concatenate([unique_rows] * reps)[:k].copy(), True


def kmeans(
    vectors: np.ndarray, k: int, iters: int = DEFAULT_ITERS, seed: int = 0
) -> KMeansResult:
    """Cluster rows into k groups by Euclidean distance.

    Stops after ``iters`` assignment rounds or as soon as assignments
    repeat. The returned centroids are exactly the ones the final
    assignments were computed against, so routing stays consistent.
    """
    data = np.ascontiguousarray(vectors, dtype=np.float32)
    if data.ndim != 2 or data.shape[0] < 1:
        raise ValueError("kmeans requires a non-empty 2-d array of vectors")
    if k < 1:
        raise ValueError("k must be >= 1")
    if iters < 1:
        raise ValueError("iters must be >= 1")

    n = data.shape[0]
    centroids, init_duplicates = _init_centroids(data, k, seed)
    x64 = data.astype(np.float64)
    x_sq = np.sum(x64 * x64, axis=1)

    trace: list[float] = []
    prev_assign: np.ndarray | None = None
    assignments = np.zeros(n, dtype=np.int64)
    converged = False
    rounds = 0

    for rounds in range(1, iters + 1):
        c64 = centroids.astype(np.float64)
        c_sq = np.sum(c64 * c64, axis=1)
        dist2 = -2.0 * (x64 @ c64.T)
        dist2 += x_sq[:, None]
        dist2 += c_sq[None, :]
        assignments = np.argmin(dist2, axis=1)
        # Objective from exact differences, not the expanded form, so a
        # perfect clustering reports exactly zero.
        residual = x64 - c64[assignments]
        point_dist2 = np.sum(residual * residual, axis=1)
        trace.append(float(np.sum(point_dist2)))

        if prev_assign is not None and np.array_equal(prev_assign, assignments):
            converged = True
            break
        prev_assign = assignments
        if rounds == iters:
            break

        sums = np.stack(
            [
                np.bincount(assignments, weights=x64[:, d], minlength=k)
                for d in range(data.shape[1])
            ],
            axis=1,
        )
        counts = np.bincount(assignments, minlength=k)
        occupied = counts > 0
        new_c = c64.copy()
        new_c[occupied] = sums[occupied] / counts[occupied, None]
        centroids = new_c.astype(np.float32)

        empty = np.flatnonzero(~occupied)
        if empty.size:
            # Farthest points (by current assignment distance) reseed the
            # empty clusters, one point per cluster.
            order = np.argsort(-point_dist2, kind="stable")
            for slot, cluster in enumerate(empty[: min(empty.size, n)]):
                centroids[cluster] = data[order[slot]]

    return KMeansResult(
        centroids=centroids,
        assignments=assignments,
        objective_trace=trace,
        iterations=rounds,
        converged=converged,
        init_duplicates=init_duplicates,
    )
