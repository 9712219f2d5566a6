"""Product quantization: subvector codebooks and asymmetric scoring.

A vector of dimension D is cut into M contiguous subvectors of D/M
entries. Each subspace gets its own k-means codebook of 2**bits
codewords, and a vector is stored as the M codeword indices nearest to
its subvectors. Scoring a query against codes goes through a per-query
table of subvector/codeword inner products, so the stored vectors never
need to be reconstructed during search.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatchError
from .kmeans import DEFAULT_ITERS, kmeans


@dataclass
class PqCodebooks:
    num_subspaces: int  # M
    bits: int
    dim: int
    seed: int
    codebooks: np.ndarray  # (M, ksub, dim // M) float32
    init_duplicates: bool = field(default=False)

    @property
    def ksub(self) -> int:
        return 1 << self.bits

    @property
    def sub_dim(self) -> int:
        return self.dim // self.num_subspaces

    def _split(self, vec: np.ndarray) -> np.ndarray:
        v = np.asarray(vec, dtype=np.float64)
        if v.ndim != 1 or v.shape[0] != self.dim:
            raise DimensionMismatchError(
                f"vector has shape {v.shape} but codebooks cover dim {self.dim}"
            )
        return v.reshape(self.num_subspaces, self.sub_dim)

    def encode(self, vec: np.ndarray) -> np.ndarray:
        """Nearest codeword index per subspace (ties to the lowest index)."""
        subs = self._split(vec)
        codes = np.empty(self.num_subspaces, dtype=np.uint16)
        for m in range(self.num_subspaces):
            table = self.codebooks[m].astype(np.float64)
            diff = table - subs[m][None, :]
            codes[m] = int(np.argmin(np.sum(diff * diff, axis=1)))
        return codes

    def encode_many(self, vectors: np.ndarray) -> np.ndarray:
        """Encode rows of an (n, dim) array to an (n, M) uint16 code matrix."""
        data = np.asarray(vectors, dtype=np.float64)
        if data.ndim != 2 or data.shape[1] != self.dim:
            raise DimensionMismatchError(
                f"vectors have shape {data.shape} but codebooks cover dim {self.dim}"
            )
        n = data.shape[0]
        codes = np.empty((n, self.num_subspaces), dtype=np.uint16)
        for m in range(self.num_subspaces):
            sub = data[:, m * self.sub_dim : (m + 1) * self.sub_dim]
            table = self.codebooks[m].astype(np.float64)
            t_sq = np.sum(table * table, axis=1)
            s_sq = np.sum(sub * sub, axis=1)
            dist2 = s_sq[:, None] - 2.0 * (sub @ table.T) + t_sq[None, :]
            codes[:, m] = np.argmin(dist2, axis=1)
        return codes

    def decode(self, codes: np.ndarray) -> np.ndarray:
        """Concatenate the codewords named by a code into a float32 vector."""
        c = np.asarray(codes)
        if c.ndim != 1 or c.shape[0] != self.num_subspaces:
            raise DimensionMismatchError(
                f"code has shape {c.shape} but {self.num_subspaces} subspaces are configured"
            )
        if np.any(c >= self.ksub):
            raise ValueError(f"code index out of range for {self.ksub} codewords")
        return np.concatenate([self.codebooks[m][int(c[m])] for m in range(self.num_subspaces)])

    def score_table(self, query: np.ndarray) -> np.ndarray:
        """(M, ksub) float64 inner products of the query's subvectors with every codeword.

        Summing table[m, code[m]] over m reproduces the inner product of
        the query with the decoded vector, up to float rounding.
        """
        subs = self._split(query)
        table = np.empty((self.num_subspaces, self.ksub), dtype=np.float64)
        for m in range(self.num_subspaces):
            table[m] = np.sum(self.codebooks[m].astype(np.float64) * subs[m][None, :], axis=1)
        return table

    def scores_for_codes(self, table: np.ndarray, codes: np.ndarray) -> np.ndarray:
        """Table-sum scores for an (n, M) code matrix, accumulated subspace by subspace."""
        out = np.zeros(codes.shape[0], dtype=np.float64)
        for m in range(self.num_subspaces):
            out += table[m, codes[:, m]]
        return out


def train_pq(
    vectors: np.ndarray,
    num_subspaces: int = 8,
    bits: int = 8,
    seed: int = 0,
    iters: int = DEFAULT_ITERS,
) -> PqCodebooks:
    """Train one k-means codebook per contiguous subspace.

    Subspace m trains with seed + m so codebooks differ but stay fully
    reproducible. A ksub larger than the training set is allowed but
    produces duplicated codewords; the condition is warned about and
    recorded on the result.
    """
    data = np.ascontiguousarray(vectors, dtype=np.float32)
    if data.ndim != 2 or data.shape[0] < 1:
        raise ValueError("train_pq requires a non-empty 2-d array of vectors")
    dim = data.shape[1]
    if num_subspaces < 1 or dim % num_subspaces != 0:
        raise DimensionMismatchError(
            f"dim {dim} is not divisible by num_subspaces {num_subspaces}"
        )
    if not 1 <= bits <= 16:
        raise ValueError("bits must be in [1, 16]")
    ksub = 1 << bits
    if ksub > data.shape[0]:
        warnings.warn(
            f"PQ codebook size {ksub} exceeds the {data.shape[0]} training vectors; "
            "codewords will repeat",
            stacklevel=2,
        )
    sub_dim = dim // num_subspaces
    codebooks = np.empty((num_subspaces, ksub, sub_dim), dtype=np.float32)
    duplicates = False
    for m in range(num_subspaces):
        result = kmeans(data[:, m * sub_dim : (m + 1) * sub_dim], ksub, iters, seed + m)
        codebooks[m] = result.centroids
        duplicates = duplicates or result.init_duplicates
    return PqCodebooks(
        num_subspaces=num_subspaces,
        bits=bits,
        dim=dim,
        seed=seed,
        codebooks=codebooks,
        init_duplicates=duplicates,
    )
