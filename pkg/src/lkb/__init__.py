"""Local knowledge base retrieval engine.

Ingests plain-text/markdown/CSV documents, splits them into addressable
chunks, embeds them with a deterministic local encoder (or a remote
service), indexes the vectors for exact or approximate cosine search,
and assembles retrieved context into a fixed prompt template for a
pluggable language model backend.
"""

from .corpus import (
    Chunk,
    Document,
    SplitterConfig,
    load_document,
    split_document,
    split_fixed,
    split_recursive,
    split_tokens,
)
from .embed import (
    ReferenceEmbedder,
    RemoteEmbedder,
    RemoteEmbedderConfig,
    l2_normalize,
    multi_head_attention,
    self_attention,
    softmax_rows,
    tokenize_hash,
)
from .index import (
    FlatIndex,
    IvfIndex,
    IvfPqIndex,
    SearchHit,
    build_flat,
    build_ivf,
    cosine,
    search_flat,
    search_ivf,
    search_ivfpq,
)
from .index_io import load_index, save_index
from .kmeans import KMeansResult, kmeans
from .llm import Answer, LlmEndpointConfig, complete, mock_complete
from .pq import PqCodebooks, train_pq
from .retrieve import (
    CANONICAL_TEMPLATE,
    PromptBundle,
    RetrievalResult,
    assemble_prompt,
    retrieve,
)
from .store import CorpusStore

__version__ = "0.1.0"

__all__ = [
    "Answer",
    "CANONICAL_TEMPLATE",
    "Chunk",
    "CorpusStore",
    "Document",
    "FlatIndex",
    "IvfIndex",
    "IvfPqIndex",
    "KMeansResult",
    "LlmEndpointConfig",
    "PqCodebooks",
    "PromptBundle",
    "ReferenceEmbedder",
    "RemoteEmbedder",
    "RemoteEmbedderConfig",
    "RetrievalResult",
    "SearchHit",
    "SplitterConfig",
    "assemble_prompt",
    "build_flat",
    "build_ivf",
    "complete",
    "cosine",
    "kmeans",
    "l2_normalize",
    "load_document",
    "load_index",
    "mock_complete",
    "multi_head_attention",
    "retrieve",
    "save_index",
    "search_flat",
    "search_ivf",
    "search_ivfpq",
    "self_attention",
    "softmax_rows",
    "split_document",
    "split_fixed",
    "split_recursive",
    "split_tokens",
    "tokenize_hash",
    "train_pq",
]
