"""Corpus store: documents, chunks, embeddings, and the active index.

Layout under the data directory:

    manifest.json   versioned listing of documents with content digests
    docs/<id>.txt   normalized document text
    chunks.jsonl    chunk spans (text is re-sliced from the parent doc)
    index.bin       the active index (flat, ivf, or ivfpq)
    vectors.bin     canonical flat vectors, written only when the active
                    index is lossy or derived (ivf/ivfpq), so rebuilds
                    never re-quantize quantized data

Writes are serialized by a lock; searches run against immutable
snapshots, and a rebuild swaps the derived index reference atomically.
"""

from __future__ import annotations

import hashlib
import json
import os
import threading
from pathlib import Path

import numpy as np

from .config import ServiceConfig, auto_nlist
from .corpus import Chunk, Document, SplitterConfig, load_document, split_document
from .embed import ReferenceEmbedder, RemoteEmbedder, RemoteEmbedderConfig
from .errors import RebuildInProgressError, StoreCorruptionError
from .index import FlatIndex, IvfIndex, IvfPqIndex
from .index_io import load_index, save_index
from .llm import LlmEndpointConfig, complete, mock_complete
from .retrieve import RetrievalResult, assemble_prompt, retrieve

MANIFEST_VERSION = 1


def _build_embedder(config: ServiceConfig):
    if config["embedder.kind"] == "remote":
        return RemoteEmbedder(
            RemoteEmbedderConfig(
                url=str(config["embedder.url"]),
                dim=int(config["embedder.dim"]),
                timeout_ms=int(config["embedder.timeout_ms"]),
            )
        )
    return ReferenceEmbedder(
        dim=int(config["embedder.dim"]),
        vocab=int(config["embedder.vocab"]),
        heads=int(config["embedder.heads"]),
        seed=int(config["embedder.seed"]),
    )


def _atomic_write(path: Path, data: bytes) -> None:
    tmp = path.with_suffix(path.suffix + ".tmp")
    tmp.write_bytes(data)
    os.replace(tmp, path)


class CorpusStore:
    """Owns persisted corpus state and the search indexes over it."""

    def __init__(self, config: ServiceConfig):
        self.config = config
        self.data_dir = Path(config.data_dir)
        self.embedder = _build_embedder(config)
        self.splitter = SplitterConfig(
            strategy=str(config["splitter.strategy"]),
            chunk_size=int(config["splitter.chunk_size"]),
            overlap=int(config["splitter.overlap"]),
        )
        self.documents: dict[str, Document] = {}
        self.chunks: dict[str, Chunk] = {}
        self.flat = FlatIndex(self.embedder.dim)
        self.derived: IvfIndex | IvfPqIndex | None = None
        self._write_lock = threading.RLock()
        self._rebuild_lock = threading.Lock()
        if (self.data_dir / "manifest.json").exists():
            self._load()

    # -- basic views ---------------------------------------------------

    @property
    def vector_count(self) -> int:
        return self.flat.size

    @property
    def active_kind(self) -> str:
        return self.derived.kind if self.derived is not None else "flat"

    def chunk(self, chunk_id: str) -> Chunk:
        return self.chunks[chunk_id]

    def health(self) -> dict:
        return {
            "status": "ok",
            "index_kind": self.active_kind,
            "vectors": self.vector_count,
            "docs": len(self.documents),
        }

    def index_stats(self) -> dict:
        derived = self.derived
        if derived is None:
            list_sizes = [self.flat.size] if self.flat.size else []
            nlist = None
        else:
            list_sizes = [
                sum(1 for i in ids if i not in derived.tombstones)
                for ids in derived.posting_ids
            ]
            nlist = derived.nlist
        return {
            "kind": self.active_kind,
            "vectors": self.vector_count,
            "docs": len(self.documents),
            "nlist": nlist,
            "list_sizes": list_sizes,
        }

    # -- ingestion -----------------------------------------------------

    def ingest(self, data: bytes, format: str, source: str) -> tuple[Document, int, bool]:
        """Load, split, embed, index, and persist one document.

        Returns (document, chunk_count, created). Re-ingesting identical
        content is a no-op: the digest-derived doc_id already exists.
        """
        doc = load_document(data, format, source)
        with self._write_lock:
            existing = self.documents.get(doc.doc_id)
            if existing is not None:
                if existing.text != doc.text:
                    raise StoreCorruptionError(
                        f"doc_id {doc.doc_id} already stored with different content"
                    )
                count = sum(1 for c in self.chunks.values() if c.doc_id == doc.doc_id)
                return existing, count, False

            chunks = split_document(doc, self.splitter)
            # Embed before touching any state so an embedder failure
            # leaves the store untouched.
            vectors = (
                np.stack([self.embedder.embed(c.text) for c in chunks])
                if chunks
                else np.empty((0, self.embedder.dim))
            )
            ids = [c.chunk_id for c in chunks]
            self.flat.add_many(vectors, ids)
            if self.derived is not None:
                for vec, chunk_id in zip(vectors, ids):
                    self.derived.add(vec, chunk_id)
            self.documents[doc.doc_id] = doc
            for c in chunks:
                self.chunks[c.chunk_id] = c
            self._persist()
            return doc, len(chunks), True

    # -- search and ask ------------------------------------------------

    def index_for_mode(self, mode: str | None, nprobe: int | None):
        """Resolve (index, mode, search params) for a query."""
        resolved = mode or self.active_kind
        if resolved == "flat":
            return self.flat, "flat", {}
        if resolved not in ("ivf", "ivfpq"):
            raise ValueError(f"unknown search mode {resolved!r}")
        derived = self.derived
        if derived is None or derived.kind != resolved:
            raise ValueError(
                f"index not built for mode {resolved!r}; rebuild the index first"
            )
        if nprobe is None:
            probe = min(int(self.config["index.nprobe"]), derived.nlist)
        else:
            if not 1 <= nprobe <= derived.nlist:
                raise ValueError(f"nprobe must be in [1, {derived.nlist}], got {nprobe}")
            probe = nprobe
        return derived, resolved, {"nprobe": probe}

    def _hit_payload(self, result: RetrievalResult) -> list[dict]:
        return [
            {
                "chunk_id": chunk.chunk_id,
                "doc_id": chunk.doc_id,
                "score": float(score),
                "text": chunk.text,
            }
            for chunk, score in result.hits
        ]

    def query_payload(
        self, query: str, k: int | None = None, mode: str | None = None,
        nprobe: int | None = None,
    ) -> dict:
        """The /v1/query response body; shared verbatim with the CLI."""
        result = retrieve(
            self, query, k=k if k is not None else int(self.config["retrieval.k"]),
            mode=mode, nprobe=nprobe,
        )
        return {"hits": self._hit_payload(result)}

    def ask_payload(
        self, query: str, k: int | None = None, budget: int | None = None,
        force_mock: bool = False,
    ) -> dict:
        """The /v1/ask response body: retrieve, assemble, complete."""
        k_used = k if k is not None else int(self.config["retrieval.k"])
        budget_used = budget if budget is not None else int(self.config["retrieval.budget"])
        if k_used == 0:
            result = RetrievalResult(
                query_text=query, hits=[], k_requested=0,
                search_mode=self.active_kind, params_used={},
            )
        else:
            result = retrieve(self, query, k=k_used)
        bundle = assemble_prompt(result, budget=budget_used)
        if force_mock or bool(self.config["llm.mock"]) or not str(self.config["llm.url"]):
            answer = mock_complete(bundle)
        else:
            answer = complete(bundle, self.llm_config())
        return {
            "answer": answer.text,
            "model_id": answer.model_id,
            "hits": self._hit_payload(result),
            "prompt_chars": answer.prompt_chars,
            "truncated": bundle.truncated,
        }

    def llm_config(self) -> LlmEndpointConfig:
        return LlmEndpointConfig(
            base_url=str(self.config["llm.url"]),
            model=str(self.config["llm.model"]),
            timeout_ms=int(self.config["llm.timeout_ms"]),
            max_retries=int(self.config["llm.max_retries"]),
            temperature=float(self.config["llm.temperature"]),
        )

    # -- rebuild -------------------------------------------------------

    def rebuild(
        self, mode: str, nlist: int | None = None,
        pq_m: int | None = None, pq_bits: int | None = None,
    ) -> dict:
        """Retrain the derived index from stored vectors and swap it in."""
        if mode not in ("flat", "ivf", "ivfpq"):
            raise ValueError(f"unknown index mode {mode!r}")
        if not self._rebuild_lock.acquire(blocking=False):
            raise RebuildInProgressError("an index rebuild is already running")
        try:
            vectors = self.flat.vectors.copy()
            ids = [str(i) for i in self.flat.ids]
            seed = int(self.config["index.seed"])
            if mode == "flat":
                new_index = None
            else:
                n = len(ids)
                if n == 0:
                    raise ValueError("cannot build an ivf index over an empty store")
                lists = nlist if nlist else int(self.config["index.nlist"]) or auto_nlist(n)
                if mode == "ivf":
                    new_index = IvfIndex.build(vectors, ids, lists, seed=seed)
                else:
                    m = pq_m if pq_m is not None else int(self.config["index.pq_m"])
                    bits = pq_bits if pq_bits is not None else int(self.config["index.pq_bits"])
                    new_index = IvfPqIndex.build(
                        vectors, ids, lists, num_subspaces=m, bits=bits, seed=seed
                    )
            with self._write_lock:
                self.derived = new_index
                self._persist()
            return self.index_stats()
        finally:
            self._rebuild_lock.release()

    # -- persistence ---------------------------------------------------

    def _persist(self) -> None:
        self.data_dir.mkdir(parents=True, exist_ok=True)
        (self.data_dir / "docs").mkdir(exist_ok=True)
        for doc_id, doc in self.documents.items():
            path = self.data_dir / "docs" / f"{doc_id}.txt"
            if not path.exists():
                _atomic_write(path, doc.text.encode("utf-8"))

        chunk_lines = [
            json.dumps(
                {
                    "chunk_id": c.chunk_id,
                    "doc_id": c.doc_id,
                    "ordinal": c.ordinal,
                    "start": c.char_span[0],
                    "end": c.char_span[1],
                },
                ensure_ascii=False,
            )
            for c in self.chunks.values()
        ]
        _atomic_write(
            self.data_dir / "chunks.jsonl", ("\n".join(chunk_lines) + "\n").encode("utf-8")
        )

        active = self.derived if self.derived is not None else self.flat
        _atomic_write(self.data_dir / "index.bin", save_index(active))
        vectors_path = self.data_dir / "vectors.bin"
        if self.derived is not None:
            _atomic_write(vectors_path, save_index(self.flat))
        elif vectors_path.exists():
            vectors_path.unlink()

        manifest = {
            "version": MANIFEST_VERSION,
            "embedder": {
                "kind": self.config["embedder.kind"],
                "dim": self.config["embedder.dim"],
                "vocab": self.config["embedder.vocab"],
                "heads": self.config["embedder.heads"],
                "seed": self.config["embedder.seed"],
            },
            "index": {"mode": self.active_kind},
            "documents": {
                doc_id: {
                    "source": doc.source,
                    "format": doc.format,
                    "digest": doc.doc_id.rsplit("-", 1)[-1],
                    "ingested_at": doc.ingested_at,
                    "chunk_count": sum(
                        1 for c in self.chunks.values() if c.doc_id == doc_id
                    ),
                }
                for doc_id, doc in self.documents.items()
            },
        }
        _atomic_write(
            self.data_dir / "manifest.json",
            json.dumps(manifest, indent=2, sort_keys=True).encode("utf-8"),
        )

    def _load(self) -> None:
        manifest_path = self.data_dir / "manifest.json"
        manifest = json.loads(manifest_path.read_text(encoding="utf-8"))
        if manifest.get("version") != MANIFEST_VERSION:
            raise StoreCorruptionError(
                f"manifest version {manifest.get('version')} is not supported"
            )
        recorded = manifest.get("embedder", {})
        current = {
            "kind": self.config["embedder.kind"],
            "dim": self.config["embedder.dim"],
            "vocab": self.config["embedder.vocab"],
            "heads": self.config["embedder.heads"],
            "seed": self.config["embedder.seed"],
        }
        if recorded != current:
            raise StoreCorruptionError(
                f"data dir {self.data_dir} was built with embedder {recorded}, "
                f"but the current config is {current}"
            )

        for doc_id, meta in manifest.get("documents", {}).items():
            path = self.data_dir / "docs" / f"{doc_id}.txt"
            if not path.exists():
                raise StoreCorruptionError(f"manifest lists {doc_id} but {path} is missing")
            text = path.read_text(encoding="utf-8")
            digest = hashlib.sha256(text.encode("utf-8")).hexdigest()[:12]
            if digest != meta["digest"]:
                raise StoreCorruptionError(
                    f"content digest mismatch for {doc_id}: "
                    f"manifest {meta['digest']}, stored {digest}"
                )
            self.documents[doc_id] = Document(
                doc_id=doc_id,
                source=meta["source"],
                format=meta["format"],
                text=text,
                ingested_at=meta["ingested_at"],
            )

        chunks_path = self.data_dir / "chunks.jsonl"
        if chunks_path.exists():
            for line in chunks_path.read_text(encoding="utf-8").splitlines():
                if not line.strip():
                    continue
                rec = json.loads(line)
                doc = self.documents.get(rec["doc_id"])
                if doc is None:
                    raise StoreCorruptionError(
                        f"chunk {rec['chunk_id']} references unknown doc {rec['doc_id']}"
                    )
                self.chunks[rec["chunk_id"]] = Chunk(
                    chunk_id=rec["chunk_id"],
                    doc_id=rec["doc_id"],
                    text=doc.text[rec["start"] : rec["end"]],
                    char_span=(rec["start"], rec["end"]),
                    ordinal=rec["ordinal"],
                )

        index_path = self.data_dir / "index.bin"
        if index_path.exists():
            loaded = load_index(index_path.read_bytes())
            if loaded.kind == "flat":
                self.flat = loaded
                self.derived = None
            else:
                self.derived = loaded
                vectors_path = self.data_dir / "vectors.bin"
                if not vectors_path.exists():
                    raise StoreCorruptionError(
                        "derived index present but vectors.bin is missing"
                    )
                flat = load_index(vectors_path.read_bytes())
                if flat.kind != "flat":
                    raise StoreCorruptionError("vectors.bin does not hold a flat index")
                self.flat = flat

        for chunk_id in (str(i) for i in self.flat.ids):
            if chunk_id not in self.chunks:
                raise StoreCorruptionError(
                    f"index holds chunk id {chunk_id!r} with no stored chunk"
                )
