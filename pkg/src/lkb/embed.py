"""Text to L2-normalized dense vectors.

Two embedders share one contract (``embed(text) -> float64 unit vector``):

* ReferenceEmbedder: a fully deterministic local encoder. Hash-bucketed
  tokens index a seeded lookup table, one multi-head attention pass mixes
  the rows, and mean pooling plus normalization produces the vector. No
  trained weights, no network, bit-stable for a fixed seed.
* RemoteEmbedder: a thin HTTP client for an external embedding service.

Both are safe to share across threads; the reference weights are frozen
after construction.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass

import httpx
import numpy as np

from .errors import (
    DimensionMismatchError,
    EmbedderTransportError,
    MalformedResponseError,
    NonFiniteVectorError,
)
from .rng import SplitMix64

DEFAULT_DIM = 64
DEFAULT_VOCAB = 4096
DEFAULT_HEADS = 4
DEFAULT_SEED = 42

_WORD_RE = re.compile(r"[^\W_]+", re.UNICODE)

_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3
_MASK64 = (1 << 64) - 1


def _fnv1a64(data: bytes) -> int:
    """FNV-1a 64-bit hash; the fixed token-to-bucket hash."""
    h = _FNV_OFFSET
    for byte in data:
        h = ((h ^ byte) * _FNV_PRIME) & _MASK64
    return h


def tokenize_hash(text: str, vocab: int) -> list[int]:
    """Lowercase, split on non-alphanumeric runs, hash each token to a bucket.

    Buckets are FNV-1a 64 of the token's UTF-8 bytes modulo vocab, so ids
    are stable across runs and platforms. Empty text gives an empty list.
    """
    if vocab < 1:
        raise ValueError("vocab must be >= 1")
    return [_fnv1a64(tok.encode("utf-8")) % vocab for tok in _WORD_RE.findall(text.lower())]


def l2_normalize(vec: np.ndarray) -> np.ndarray:
    """Scale to unit L2 norm (float64). Raises on zero or non-finite input."""
    v = np.asarray(vec, dtype=np.float64)
    if not np.all(np.isfinite(v)):
        raise NonFiniteVectorError("vector contains non-finite entries")
    norm = math.sqrt(float(np.sum(v * v)))
    if norm == 0.0:
        raise NonFiniteVectorError("cannot normalize a zero vector")
    return v / norm


def softmax_rows(mat: np.ndarray) -> np.ndarray:
    """Row-wise softmax with max subtraction for numerical stability."""
    m = np.asarray(mat, dtype=np.float64)
    shifted = m - m.max(axis=-1, keepdims=True)
    exp = np.exp(shifted)
    return exp / exp.sum(axis=-1, keepdims=True)


def _check_2d(name: str, arr: np.ndarray) -> np.ndarray:
    a = np.asarray(arr, dtype=np.float64)
    if a.ndim != 2:
        raise DimensionMismatchError(f"{name} must be a 2-d matrix, got shape {a.shape}")
    return a


def self_attention(
    inputs: np.ndarray,
    query_proj: np.ndarray,
    key_proj: np.ndarray,
    value_proj: np.ndarray,
) -> np.ndarray:
    """Scaled dot-product attention of a sequence against itself.

    inputs is (k, dim); the three projections are (dim, width). Queries
    and keys are compared, scaled by 1/sqrt(width), softmaxed row-wise,
    and used to weight the projected values. Returns (k, width).
    """
    x = _check_2d("inputs", inputs)
    wq = _check_2d("query_proj", query_proj)
    wk = _check_2d("key_proj", key_proj)
    wv = _check_2d("value_proj", value_proj)
    dim = x.shape[1]
    for name, w in (("query_proj", wq), ("key_proj", wk), ("value_proj", wv)):
        if w.shape[0] != dim:
            raise DimensionMismatchError(
                f"inputs have {dim} features but {name} expects {w.shape[0]}"
            )
    if not (wq.shape[1] == wk.shape[1] == wv.shape[1]) or wq.shape[1] < 1:
        raise DimensionMismatchError(
            f"projection widths disagree: query {wq.shape[1]}, key {wk.shape[1]}, "
            f"value {wv.shape[1]}"
        )
    width = wq.shape[1]
    queries = x @ wq
    keys = x @ wk
    weights = softmax_rows((queries @ keys.T) / math.sqrt(width))
    return weights @ (x @ wv)


class ReferenceEmbedder:
    """Deterministic single-layer multi-head attention encoder.

    All weights are drawn uniformly from [-1/sqrt(dim), 1/sqrt(dim)) by a
    SplitMix64 stream (see rng module) seeded with ``seed``, filled
    row-major in a fixed order: token table (vocab x dim), then per head
    the query/key/value projections (dim x dim//heads each), then the
    output projection (dim x dim). Arrays are frozen after construction.
    """

    def __init__(
        self,
        dim: int = DEFAULT_DIM,
        vocab: int = DEFAULT_VOCAB,
        heads: int = DEFAULT_HEADS,
        seed: int = DEFAULT_SEED,
    ):
        if dim < 1 or vocab < 1 or heads < 1:
            raise ValueError("dim, vocab, and heads must all be >= 1")
        if dim % heads != 0:
            raise DimensionMismatchError(f"dim {dim} is not divisible by heads {heads}")
        self.dim = dim
        self.vocab = vocab
        self.heads = heads
        self.seed = seed
        self.head_width = dim // heads

        stream = SplitMix64(seed)
        bound = 1.0 / math.sqrt(dim)

        def draw(rows: int, cols: int) -> np.ndarray:
            return stream.uniform(rows * cols, -bound, bound).reshape(rows, cols)

        self.token_table = draw(vocab, dim)
        qs, ks, vs = [], [], []
        for _ in range(heads):
            qs.append(draw(dim, self.head_width))
            ks.append(draw(dim, self.head_width))
            vs.append(draw(dim, self.head_width))
        self.query_projs = tuple(qs)
        self.key_projs = tuple(ks)
        self.value_projs = tuple(vs)
        self.out_proj = draw(dim, dim)
        for arr in (
            self.token_table,
            self.out_proj,
            *self.query_projs,
            *self.key_projs,
            *self.value_projs,
        ):
            arr.flags.writeable = False

    def embed(self, text: str) -> np.ndarray:
        """Embed text as a float64 unit vector of length ``dim``.

        Empty or token-free text maps to the first basis vector, so blank
        chunks never poison an index.
        """
        ids = tokenize_hash(text, self.vocab)
        if not ids:
            return self._basis_vector()
        rows = self.token_table[ids]
        mixed = multi_head_attention(rows, self)
        pooled = mixed.mean(axis=0)
        if float(np.sum(pooled * pooled)) == 0.0:
            return self._basis_vector()
        return l2_normalize(pooled)

    def _basis_vector(self) -> np.ndarray:
        vec = np.zeros(self.dim, dtype=np.float64)
        vec[0] = 1.0
        return vec


def multi_head_attention(inputs: np.ndarray, params: ReferenceEmbedder) -> np.ndarray:
    """Run every attention head in parallel, concatenate, and project.

    Returns a (k, dim) matrix: the per-head self_attention outputs joined
    along the feature axis and multiplied by the output projection.
    """
    x = _check_2d("inputs", inputs)
    if x.shape[1] != params.dim:
        raise DimensionMismatchError(
            f"inputs have {x.shape[1]} features but the embedder expects {params.dim}"
        )
    head_outputs = [
        self_attention(x, params.query_projs[h], params.key_projs[h], params.value_projs[h])
        for h in range(params.heads)
    ]
    return np.concatenate(head_outputs, axis=1) @ params.out_proj


@dataclass
class RemoteEmbedderConfig:
    url: str
    dim: int
    timeout_ms: int = 5000

    def __post_init__(self) -> None:
        if self.dim < 1:
            raise ValueError("dim must be >= 1")
        if self.timeout_ms <= 0:
            raise ValueError("timeout_ms must be > 0")


class RemoteEmbedder:
    """Client for an external embedding service.

    Wire contract: POST {"input": "<text>"} to the configured URL, expect
    {"embedding": [floats...]} back. The vector is validated against the
    configured dimension and re-normalized locally.
    """

    def __init__(self, config: RemoteEmbedderConfig):
        self.config = config
        self.dim = config.dim

    def embed(self, text: str) -> np.ndarray:
        try:
            response = httpx.post(
                self.config.url,
                json={"input": text},
                timeout=self.config.timeout_ms / 1000.0,
            )
        except httpx.HTTPError as exc:
            raise EmbedderTransportError(
                f"embedding service unreachable at {self.config.url}: {exc}"
            ) from exc
        if response.status_code != 200:
            raise EmbedderTransportError(
                f"embedding service returned HTTP {response.status_code}"
            )
        try:
            values = response.json()["embedding"]
        except (ValueError, KeyError, TypeError) as exc:
            raise MalformedResponseError(f"embedding response not understood: {exc}") from exc
        vec = np.asarray(values, dtype=np.float64)
        if vec.ndim != 1 or vec.shape[0] != self.dim:
            raise DimensionMismatchError(
                f"embedding service returned {vec.shape} but dim {self.dim} is configured"
            )
        return l2_normalize(vec)


def embed_reference(text: str, params: ReferenceEmbedder) -> np.ndarray:
    """Functional alias for ReferenceEmbedder.embed."""
    return params.embed(text)


def embed_remote(text: str, config: RemoteEmbedderConfig) -> np.ndarray:
    """One-shot remote embedding without keeping a client around."""
    return RemoteEmbedder(config).embed(text)
