"""Vector indexes: exact flat scan, inverted-file, and IVF with PQ codes.

All stored rows are unit-norm float32, so the inner product of a stored
row with a unit query equals their cosine similarity; scores are
accumulated in float64 with a fixed per-row reduction so results are
reproducible and survive serialization bit-for-bit. Every search uses
one total order: score descending, then id ascending.

Indexes allow many concurrent readers; callers serialize writers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    DimensionMismatchError,
    DuplicateIdError,
    UnknownIdError,
)
from .kmeans import DEFAULT_ITERS, kmeans
from .pq import PqCodebooks, train_pq

UNIT_NORM_TOLERANCE = 1e-6


@dataclass
class SearchHit:
    id: str
    score: float


def cosine(v: np.ndarray, w: np.ndarray) -> float:
    """Cosine similarity: the inner product over the product of L2 norms."""
    a = np.asarray(v, dtype=np.float64)
    b = np.asarray(w, dtype=np.float64)
    if a.shape != b.shape or a.ndim != 1:
        raise DimensionMismatchError(
            f"cosine needs two vectors of one shape, got {a.shape} and {b.shape}"
        )
    num = float(np.sum(a * b))
    denom = math.sqrt(float(np.sum(a * a))) * math.sqrt(float(np.sum(b * b)))
    return num / denom


def _as_query(q: np.ndarray, dim: int) -> np.ndarray:
    vec = np.asarray(q, dtype=np.float64)
    if vec.ndim != 1 or vec.shape[0] != dim:
        raise DimensionMismatchError(f"query has shape {vec.shape} but the index dim is {dim}")
    return vec

def _check_rows(vectors: np.ndarray, dim: int) -> np.ndarray:
    data = np.ascontiguousarray(vectors, dtype=np.float32)
    if data.ndim != 2 or data.shape[1] != dim:
        raise DimensionMismatchError(f"vectors have shape {data.shape}, expected (*, {dim})")
    norms = np.sqrt(np.sum(data.astype(np.float64) ** 2, axis=1))
    bad = np.flatnonzero(np.abs(norms - 1.0) > UNIT_NORM_TOLERANCE)
    if bad.size:
        raise ValueError(
            f"row {bad[0]} has norm {norms[bad[0]]:.8f}; stored vectors must be unit length"
        )
    return data


def _row_scores(rows: np.ndarray, query: np.ndarray) -> np.ndarray:
    # Elementwise product + per-row pairwise sum: deterministic for a given
    # row regardless of which sub-array it currently lives in.
    return np.sum(rows.astype(np.float64) * query[None, :], axis=1)


def _top_k(ids: np.ndarray, scores: np.ndarray, k: int) -> list[SearchHit]:
    order = np.lexsort((ids, -scores))[: min(k, len(ids))]
    return [SearchHit(id=str(ids[i]), score=float(scores[i])) for i in order]


class FlatIndex:
    """Exact exhaustive search over all stored vectors.

    Mutations build a fresh (vectors, ids, positions) snapshot and swap
    it in with one attribute assignment, so concurrent readers always
    see aligned arrays; callers still serialize the writers themselves.
    """

    kind = "flat"

    def __init__(self, dim: int):
        if dim < 1:
            raise ValueError("dim must be >= 1")
        self.dim = dim
        self._state: tuple[np.ndarray, np.ndarray, dict[str, int]] = (
            np.empty((0, dim), dtype=np.float32),
            np.empty(0, dtype="U1"),
            {},
        )

    @classmethod
    def build(cls, vectors: np.ndarray, ids: list[str]) -> "FlatIndex":
        data = np.ascontiguousarray(vectors, dtype=np.float32)
        if data.ndim != 2:
            raise DimensionMismatchError("vectors must be a 2-d array")
        index = cls(data.shape[1])
        index.add_many(data, ids)
        return index

    @property
    def vectors(self) -> np.ndarray:
        return self._state[0]

    @property
    def ids(self) -> np.ndarray:
        return self._state[1]

    @property
    def size(self) -> int:
        return len(self._state[2])

    def __contains__(self, id: str) -> bool:
        return id in self._state[2]

    def add_many(self, vectors: np.ndarray, ids: list[str]) -> None:
        data = _check_rows(vectors, self.dim)
        if data.shape[0] != len(ids):
            raise ValueError(f"{data.shape[0]} vectors but {len(ids)} ids")
        old_vectors, old_ids, old_positions = self._state
        fresh = set()
        for id in ids:
            if id in old_positions or id in fresh:
                raise DuplicateIdError(f"id already indexed: {id}")
            fresh.add(id)
        positions = dict(old_positions)
        for offset, id in enumerate(ids):
            positions[id] = len(old_ids) + offset
        new_ids = (
            np.concatenate([old_ids, np.asarray(ids, dtype="U")]) if ids else old_ids
        )
        self._state = (np.concatenate([old_vectors, data]), new_ids, positions)

    def add(self, vector: np.ndarray, id: str) -> None:
        self.add_many(np.asarray(vector, dtype=np.float32)[None, :], [id])

    def remove(self, id: str) -> None:
        old_vectors, old_ids, old_positions = self._state
        pos = old_positions.get(id)
        if pos is None:
            raise UnknownIdError(f"id not indexed: {id}")
        positions = {
            other: (p if p < pos else p - 1)
            for other, p in old_positions.items()
            if other != id
        }
        self._state = (
            np.delete(old_vectors, pos, axis=0),
            np.delete(old_ids, pos),
            positions,
        )

    def vector_for(self, id: str) -> np.ndarray:
        vectors, _, positions = self._state
        pos = positions.get(id)
        if pos is None:
            raise UnknownIdError(f"id not indexed: {id}")
        return vectors[pos].copy()

    def search(self, query: np.ndarray, k: int) -> list[SearchHit]:
        """Exact top-k by cosine, ties broken by ascending id."""
        if k < 1:
            raise ValueError("k must be >= 1")
        q = _as_query(query, self.dim)
        vectors, ids, positions = self._state
        if not positions:
            return []
        return _top_k(ids, _row_scores(vectors, q), k)


class IvfIndex:
    """Inverted-file index: k-means partitions, exact scan inside probed lists.

    Each posting list is an immutable (ids, vectors) pair; add() replaces
    one pair with a single item assignment so readers never observe a
    half-updated list. Writers are serialized by the caller.
    """

    kind = "ivf"

    def __init__(
        self,
        dim: int,
        centroids: np.ndarray,
        posting_ids: list[list[str]],
        posting_vectors: list[np.ndarray],
        trained_on: int,
        seed: int,
    ):
        self.dim = dim
        self.centroids = np.ascontiguousarray(centroids, dtype=np.float32)
        self.nlist = self.centroids.shape[0]
        self._lists: list[tuple[tuple[str, ...], np.ndarray]] = [
            (
                tuple(ids),
                np.ascontiguousarray(vecs, dtype=np.float32).reshape(-1, dim),
            )
            for ids, vecs in zip(posting_ids, posting_vectors)
        ]
        self.trained_on = trained_on
        self.seed = seed
        self.tombstones: frozenset[str] = frozenset()

    @property
    def posting_ids(self) -> list[list[str]]:
        return [list(ids) for ids, _ in self._lists]

    @property
    def posting_vectors(self) -> list[np.ndarray]:
        return [vecs for _, vecs in self._lists]

    @classmethod
    def build(
        cls,
        vectors: np.ndarray,
        ids: list[str],
        nlist: int,
        seed: int = 0,
        iters: int = DEFAULT_ITERS,
    ) -> "IvfIndex":
        data = np.ascontiguousarray(vectors, dtype=np.float32)
        data = _check_rows(data, data.shape[1])
        n = data.shape[0]
        if n != len(ids):
            raise ValueError(f"{n} vectors but {len(ids)} ids")
        if len(set(ids)) != len(ids):
            raise DuplicateIdError("ids must be unique")
        if not 1 <= nlist <= n:
            raise ValueError(f"nlist must be in [1, {n}], got {nlist}")
        result = kmeans(data, nlist, iters=iters, seed=seed)
        posting_ids: list[list[str]] = [[] for _ in range(nlist)]
        rows: list[list[int]] = [[] for _ in range(nlist)]
        for i, cluster in enumerate(result.assignments):
            posting_ids[cluster].append(ids[i])
            rows[cluster].append(i)
        posting_vectors = [data[r] if r else np.empty((0, data.shape[1])) for r in rows]
        return cls(data.shape[1], result.centroids, posting_ids, posting_vectors, n, seed)

    @property
    def size(self) -> int:
        return sum(len(ids) for ids, _ in self._lists) - len(self.tombstones)

    def _nearest_list(self, vec64: np.ndarray) -> int:
        c64 = self.centroids.astype(np.float64)
        dist2 = np.sum((c64 - vec64[None, :]) ** 2, axis=1)
        return int(np.argmin(dist2))

    def add(self, vector: np.ndarray, id: str) -> None:
        """Route a new vector to its nearest centroid's posting list."""
        data = _check_rows(np.asarray(vector, dtype=np.float32)[None, :], self.dim)
        if any(id in ids for ids, _ in self._lists):
            raise DuplicateIdError(f"id already indexed: {id}")
        target = self._nearest_list(data[0].astype(np.float64))
        ids, vecs = self._lists[target]
        self._lists[target] = (ids + (id,), np.concatenate([vecs, data]))

    def remove(self, id: str) -> None:
        """Tombstone a vector; the row is dropped for real on rebuild or save."""
        if id in self.tombstones or not any(id in ids for ids, _ in self._lists):
            raise UnknownIdError(f"id not indexed: {id}")
        self.tombstones = self.tombstones | {id}

    def probe_order(self, query: np.ndarray, nprobe: int) -> np.ndarray:
        q = _as_query(query, self.dim)
        dist2 = np.sum((self.centroids.astype(np.float64) - q[None, :]) ** 2, axis=1)
        return np.argsort(dist2, kind="stable")[:nprobe]

    def search(self, query: np.ndarray, k: int, nprobe: int = 8) -> list[SearchHit]:
        """Scan the nprobe lists with the closest centroids, exact cosine within."""
        if k < 1:
            raise ValueError("k must be >= 1")
        if not 1 <= nprobe <= self.nlist:
            raise ValueError(f"nprobe must be in [1, {self.nlist}], got {nprobe}")
        q = _as_query(query, self.dim)
        dead = self.tombstones
        id_parts: list[np.ndarray] = []
        score_parts: list[np.ndarray] = []
        for target in self.probe_order(q, nprobe):
            ids, vecs = self._lists[target]
            if not ids:
                continue
            scores = _row_scores(vecs, q)
            live = (
                np.asarray([i not in dead for i in ids])
                if dead
                else np.ones(len(ids), dtype=bool)
            )
            if not live.any():
                continue
            id_parts.append(np.asarray(ids, dtype="U")[live])
            score_parts.append(scores[live])
        if not id_parts:
            return []
        return _top_k(np.concatenate(id_parts), np.concatenate(score_parts), k)


class IvfPqIndex:
    """Inverted file whose postings hold PQ codes, scored asymmetrically.

    Codes quantize the stored vectors directly (no residuals): the score
    of a code is the table-sum of subvector/codeword inner products,
    which approximates the cosine of the query with the original vector.
    """

    kind = "ivfpq"

    def __init__(
        self,
        dim: int,
        centroids: np.ndarray,
        codebooks: PqCodebooks,
        posting_ids: list[list[str]],
        posting_codes: list[np.ndarray],
        trained_on: int,
        seed: int,
    ):
        self.dim = dim
        self.centroids = np.ascontiguousarray(centroids, dtype=np.float32)
        self.nlist = self.centroids.shape[0]
        self.codebooks = codebooks
        # Same snapshot discipline as IvfIndex: one immutable pair per list.
        self._lists: list[tuple[tuple[str, ...], np.ndarray]] = [
            (
                tuple(ids),
                np.ascontiguousarray(c, dtype=np.uint16).reshape(
                    -1, codebooks.num_subspaces
                ),
            )
            for ids, c in zip(posting_ids, posting_codes)
        ]
        self.trained_on = trained_on
        self.seed = seed
        self.tombstones: frozenset[str] = frozenset()

    @property
    def posting_ids(self) -> list[list[str]]:
        return [list(ids) for ids, _ in self._lists]

    @property
    def posting_codes(self) -> list[np.ndarray]:
        return [codes for _, codes in self._lists]

    @classmethod
    def build(
        cls,
        vectors: np.ndarray,
        ids: list[str],
        nlist: int,
        num_subspaces: int = 8,
        bits: int = 8,
        seed: int = 0,
        iters: int = DEFAULT_ITERS,
    ) -> "IvfPqIndex":
        data = np.ascontiguousarray(vectors, dtype=np.float32)
        data = _check_rows(data, data.shape[1])
        n = data.shape[0]
        if n != len(ids):
            raise ValueError(f"{n} vectors but {len(ids)} ids")
        if len(set(ids)) != len(ids):
            raise DuplicateIdError("ids must be unique")
        if not 1 <= nlist <= n:
            raise ValueError(f"nlist must be in [1, {n}], got {nlist}")
        partition = kmeans(data, nlist, iters=iters, seed=seed)
        codebooks = train_pq(data, num_subspaces, bits, seed=seed, iters=iters)
        codes = codebooks.encode_many(data)
        posting_ids: list[list[str]] = [[] for _ in range(nlist)]
        posting_codes: list[list[np.ndarray]] = [[] for _ in range(nlist)]
        for i, cluster in enumerate(partition.assignments):
            posting_ids[cluster].append(ids[i])
            posting_codes[cluster].append(codes[i])
        packed = [
            np.asarray(c, dtype=np.uint16).reshape(-1, num_subspaces) for c in posting_codes
        ]
        return cls(data.shape[1], partition.centroids, codebooks, posting_ids, packed, n, seed)

    @property
    def size(self) -> int:
        return sum(len(ids) for ids, _ in self._lists) - len(self.tombstones)

    def add(self, vector: np.ndarray, id: str) -> None:
        data = _check_rows(np.asarray(vector, dtype=np.float32)[None, :], self.dim)
        if any(id in ids for ids, _ in self._lists):
            raise DuplicateIdError(f"id already indexed: {id}")
        c64 = self.centroids.astype(np.float64)
        target = int(np.argmin(np.sum((c64 - data[0].astype(np.float64)) ** 2, axis=1)))
        code = self.codebooks.encode(data[0])
        ids, codes = self._lists[target]
        self._lists[target] = (ids + (id,), np.concatenate([codes, code[None, :]]))

    def remove(self, id: str) -> None:
        if id in self.tombstones or not any(id in ids for ids, _ in self._lists):
            raise UnknownIdError(f"id not indexed: {id}")
        self.tombstones = self.tombstones | {id}

    def search(self, query: np.ndarray, k: int, nprobe: int = 8) -> list[SearchHit]:
        if k < 1:
            raise ValueError("k must be >= 1")
        if not 1 <= nprobe <= self.nlist:
            raise ValueError(f"nprobe must be in [1, {self.nlist}], got {nprobe}")
        q = _as_query(query, self.dim)
        c64 = self.centroids.astype(np.float64)
        dist2 = np.sum((c64 - q[None, :]) ** 2, axis=1)
        probes = np.argsort(dist2, kind="stable")[:nprobe]
        table = self.codebooks.score_table(q)
        dead = self.tombstones
        id_parts: list[np.ndarray] = []
        score_parts: list[np.ndarray] = []
        for target in probes:
            ids, codes = self._lists[target]
            if not ids:
                continue
            scores = self.codebooks.scores_for_codes(table, codes)
            live = (
                np.asarray([i not in dead for i in ids])
                if dead
                else np.ones(len(ids), dtype=bool)
            )
            if not live.any():
                continue
            id_parts.append(np.asarray(ids, dtype="U")[live])
            score_parts.append(scores[live])
        if not id_parts:
            return []
        return _top_k(np.concatenate(id_parts), np.concatenate(score_parts), k)


AnyIndex = FlatIndex | IvfIndex | IvfPqIndex


def build_flat(vectors: np.ndarray, ids: list[str]) -> FlatIndex:
    return FlatIndex.build(vectors, ids)


def search_flat(index: FlatIndex, query: np.ndarray, k: int) -> list[SearchHit]:
    return index.search(query, k)


def build_ivf(vectors: np.ndarray, ids: list[str], nlist: int, seed: int = 0) -> IvfIndex:
    return IvfIndex.build(vectors, ids, nlist, seed=seed)


def search_ivf(index: IvfIndex, query: np.ndarray, k: int, nprobe: int) -> list[SearchHit]:
    return index.search(query, k, nprobe=nprobe)


def search_ivfpq(
    index: IvfPqIndex, query: np.ndarray, k: int, nprobe: int
) -> list[SearchHit]:
    return index.search(query, k, nprobe=nprobe)
