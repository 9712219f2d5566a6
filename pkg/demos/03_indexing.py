"""Exact vs approximate search: accuracy and speed at desk scale.

Builds flat, IVF, and IVF-PQ indexes over the same 10,000 synthetic
vectors and reports recall@10 against the exact results together with
query throughput and serialized size.

Run: python3 demos/03_indexing.py
"""

import time

import numpy as np

from lkb import FlatIndex, IvfIndex, IvfPqIndex, load_index, save_index
from lkb.rng import SplitMix64

N, DIM, N_CLUSTERS = 10_000, 64, 1000

stream = SplitMix64(929)
centers = stream.normal(N_CLUSTERS * DIM).reshape(N_CLUSTERS, DIM)
centers /= np.sqrt(np.sum(centers**2, axis=1, keepdims=True))


def draw(count):
    picks = (stream.uint64(count) % np.uint64(N_CLUSTERS)).astype(np.int64)
    data = centers[picks] + stream.normal(count * DIM).reshape(count, DIM) * 0.05
    data /= np.sqrt(np.sum(data**2, axis=1, keepdims=True))
    return data.astype(np.float32)


vectors, queries = draw(N), draw(100)
ids = [f"chunk-{i:05d}" for i in range(N)]

flat = FlatIndex.build(vectors, ids)
ivf = IvfIndex.build(vectors, ids, nlist=100, seed=7)
ivfpq = IvfPqIndex.build(vectors, ids, nlist=100, num_subspaces=8, bits=8, seed=7)

exact = [frozenset(h.id for h in flat.search(q, k=10)) for q in queries.astype(np.float64)]

print(f"{'index':8} {'params':16} {'recall@10':>9} {'q/s':>8} {'bytes':>10}")
for name, index, params in [
    ("flat", flat, {}),
    ("ivf", ivf, {"nprobe": 10}),
    ("ivfpq", ivfpq, {"nprobe": 10}),
]:
    started = time.perf_counter()
    got = [frozenset(h.id for h in index.search(q, k=10, **params))
           for q in queries.astype(np.float64)]
    elapsed = time.perf_counter() - started
    recall = sum(len(w & g) for w, g in zip(exact, got)) / (10 * len(queries))
    size = len(save_index(index))
    label = ",".join(f"{k}={v}" for k, v in params.items()) or "-"
    print(f"{name:8} {label:16} {recall:9.3f} {len(queries)/elapsed:8.0f} {size:10,}")

# nprobe trades recall for speed.
print("\nivf nprobe sweep:")
for nprobe in (1, 2, 5, 10, 25, 50, 100):
    got = [frozenset(h.id for h in ivf.search(q, k=10, nprobe=nprobe))
           for q in queries.astype(np.float64)]
    recall = sum(len(w & g) for w, g in zip(exact, got)) / (10 * len(queries))
    print(f"  nprobe={nprobe:3d}  recall@10={recall:.3f}")

# Serialization is bit-exact: a reloaded index returns identical hits.
reloaded = load_index(save_index(ivf))
q = queries[0].astype(np.float64)
assert [(h.id, h.score) for h in ivf.search(q, 10, nprobe=10)] == [
    (h.id, h.score) for h in reloaded.search(q, 10, nprobe=10)
]
print("\nreloaded index verified bit-identical on a sample query")
