"""Document loading and chunking.

Documents arrive as raw bytes, are decoded as UTF-8 (CSV content is
flattened to text first), and are split into overlapping chunks that are
always exact slices of the parent text. Offsets are in Unicode scalar
values, so span arithmetic is portable and never bisects a code point.
"""

from __future__ import annotations

import csv
import hashlib
import io
import os
import re
from dataclasses import dataclass, field
from datetime import datetime, timezone

from .errors import DocumentDecodeError, EmptyDocumentError

FORMATS = ("plain-text", "markdown", "csv")

DEFAULT_CHUNK_SIZE = 500
DEFAULT_OVERLAP = 50
DEFAULT_SEPARATORS = ("\n\n", "\n", ". ", " ", "")

CSV_CELL_SEPARATOR = " | "

_TOKEN_RE = re.compile(r"\S+")


@dataclass
class Document:
    doc_id: str
    source: str
    format: str
    text: str
    ingested_at: str


@dataclass
class Chunk:
    chunk_id: str
    doc_id: str
    text: str
    char_span: tuple[int, int]
    ordinal: int


@dataclass
class SplitterConfig:
    """Chunking parameters.

    chunk_size and overlap are measured in characters for the fixed and
    recursive strategies and in whitespace-delimited tokens for the token
    strategy. The recursive strategy tries separators in order; the final
    entry must be "" so character-level cutting remains as a fallback.
    """

    strategy: str = "recursive"
    chunk_size: int = DEFAULT_CHUNK_SIZE
    overlap: int = DEFAULT_OVERLAP
    separators: tuple[str, ...] = field(default_factory=lambda: DEFAULT_SEPARATORS)

    def __post_init__(self) -> None:
        if self.strategy not in ("fixed", "recursive", "token"):
            raise ValueError(f"unknown splitter strategy: {self.strategy!r}")
        if self.chunk_size < 1:
            raise ValueError("chunk_size must be >= 1")
        if not 0 <= self.overlap < self.chunk_size:
            raise ValueError("overlap must satisfy 0 <= overlap < chunk_size")
        self.separators = tuple(self.separators)
        if self.strategy == "recursive":
            if not self.separators or self.separators[-1] != "":
                raise ValueError('recursive separators must end with "" (character fallback)')


def _sanitize_id_component(name: str) -> str:
    return re.sub(r"[^A-Za-z0-9._-]", "_", name) or "doc"


def _flatten_csv(text: str) -> str:
    rows = csv.reader(io.StringIO(text))
    return "\n".join(CSV_CELL_SEPARATOR.join(row) for row in rows)


def load_document(data: bytes, format: str, source: str) -> Document:
    """Decode raw bytes into a Document with normalized line endings.

    The doc_id combines the source basename with the first 12 hex chars
    of a SHA-256 digest of the final text, so re-ingesting identical
    content yields the same id.

    Raises DocumentDecodeError for invalid UTF-8 (naming the byte
    offset) and EmptyDocumentError when nothing remains after decoding.
    """
    if format not in FORMATS:
        raise ValueError(f"unknown document format: {format!r}")
    try:
        text = data.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise DocumentDecodeError(
            f"invalid UTF-8 at byte {exc.start} in {source!r}: {exc.reason}"
        ) from exc
    if format == "csv":
        text = _flatten_csv(text)
    text = text.replace("\r\n", "\n")
    if not text:
        raise EmptyDocumentError(f"document {source!r} is empty")
    digest = hashlib.sha256(text.encode("utf-8")).hexdigest()[:12]
    doc_id = f"{_sanitize_id_component(os.path.basename(source))}-{digest}"
    return Document(
        doc_id=doc_id,
        source=source,
        format=format,
        text=text,
        ingested_at=datetime.now(timezone.utc).isoformat(),
    )


def chunk_id_for(doc_id: str, ordinal: int) -> str:
    # Zero-padded so lexicographic id order equals ordinal order.
    return f"{doc_id}#{ordinal:05d}"


def _spans_to_chunks(text: str, spans: list[tuple[int, int]], doc_id: str) -> list[Chunk]:
    return [
        Chunk(
            chunk_id=chunk_id_for(doc_id, i),
            doc_id=doc_id,
            text=text[lo:hi],
            char_span=(lo, hi),
            ordinal=i,
        )
        for i, (lo, hi) in enumerate(spans)
    ]


def split_fixed(text: str, cfg: SplitterConfig, doc_id: str = "") -> list[Chunk]:
    """Character windows of chunk_size advancing by chunk_size - overlap.

    Emission stops with the first window that reaches the end of the
    text, so the spans cover the text exactly once (plus overlaps).
    """
    if cfg.strategy != "fixed":
        raise ValueError("split_fixed requires strategy='fixed'")
    if not text:
        return []
    stride = cfg.chunk_size - cfg.overlap
    spans: list[tuple[int, int]] = []
    start = 0
    while True:
        end = min(start + cfg.chunk_size, len(text))
        spans.append((start, end))
        if end >= len(text):
            break
        start += stride
    return _spans_to_chunks(text, spans, doc_id)


def split_tokens(text: str, cfg: SplitterConfig, doc_id: str = "") -> list[Chunk]:
    """Windows of chunk_size whitespace-delimited tokens, overlap tokens repeated.

    A chunk's span runs from its first token's start to its last token's
    end; whitespace between chunks belongs to neither.
    """
    if cfg.strategy != "token":
        raise ValueError("split_tokens requires strategy='token'")
    tokens = [(m.start(), m.end()) for m in _TOKEN_RE.finditer(text)]
    if not tokens:
        return []
    stride = cfg.chunk_size - cfg.overlap
    spans: list[tuple[int, int]] = []
    i = 0
    while True:
        group = tokens[i : i + cfg.chunk_size]
        spans.append((group[0][0], group[-1][1]))
        if i + cfg.chunk_size >= len(tokens):
            break
        i += stride
    return _spans_to_chunks(text, spans, doc_id)


def _segment_spans(
    text: str, lo: int, hi: int, separators: tuple[str, ...], limit: int, stride: int
) -> list[tuple[int, int]]:
    """Split text[lo:hi] into segments of at most `limit` characters.

    Tries each separator in order; pieces that still exceed the limit
    recurse with the remaining separators. The "" separator (and an
    exhausted list) fall back to hard cuts of `stride` characters so the
    later overlap extension cannot push a chunk past the limit.
    """
    if hi - lo <= limit:
        return [(lo, hi)]
    for i, sep in enumerate(separators):
        if sep == "":
            break
        if text.find(sep, lo, hi) == -1:
            continue
        spans: list[tuple[int, int]] = []
        start = lo
        while start <= hi:
            idx = text.find(sep, start, hi)
            end = hi if idx == -1 else idx
            if end > start:
                if end - start <= limit:
                    spans.append((start, end))
                else:
                    spans.extend(
                        _segment_spans(text, start, end, separators[i + 1 :], limit, stride)
                    )
            if idx == -1:
                break
            start = idx + len(sep)
        return spans
    return [(j, min(j + stride, hi)) for j in range(lo, hi, stride)]


def split_recursive(text: str, cfg: SplitterConfig, doc_id: str = "") -> list[Chunk]:
    """Separator-aware splitting with greedy repacking.

    Segments are produced by splitting on the first separator present,
    recursing into oversized pieces with the remaining separators, then
    greedily merged back together while the merged slice (separators
    included, since every chunk is an exact parent slice) stays within
    chunk_size - overlap. Each chunk after the first is then extended
    `overlap` characters to the left, capped so no chunk ever exceeds
    chunk_size. Runs of pure separator text between segments survive
    only inside merges.
    """
    if cfg.strategy != "recursive":
        raise ValueError("split_recursive requires strategy='recursive'")
    if not text:
        return []
    budget = cfg.chunk_size - cfg.overlap
    segments = _segment_spans(text, 0, len(text), cfg.separators, cfg.chunk_size, budget)
    if not segments:
        return []

    packed: list[tuple[int, int]] = []
    cur_lo, cur_hi = segments[0]
    for lo, hi in segments[1:]:
        if hi - cur_lo <= budget:
            cur_hi = hi
        else:
            packed.append((cur_lo, cur_hi))
            cur_lo, cur_hi = lo, hi
    packed.append((cur_lo, cur_hi))

    spans: list[tuple[int, int]] = []
    for i, (lo, hi) in enumerate(packed):
        if i > 0 and cfg.overlap > 0:
            lo -= min(cfg.overlap, cfg.chunk_size - (hi - lo), lo)
        spans.append((lo, hi))
    return _spans_to_chunks(text, spans, doc_id)


def split_document(doc: Document, cfg: SplitterConfig) -> list[Chunk]:
    """Split a document with the strategy named in the config."""
    splitter = {
        "fixed": split_fixed,
        "recursive": split_recursive,
        "token": split_tokens,
    }[cfg.strategy]
    return splitter(doc.text, cfg, doc_id=doc.doc_id)


def reconstruct(text: str, chunks: list[Chunk]) -> str:
    """Rebuild the source from chunks by stripping each chunk's leading overlap.

    Gaps between spans (the token strategy drops inter-chunk whitespace)
    are refilled from the parent text. Used by round-trip checks.
    """
    if not chunks:
        return ""
    parts = [text[: chunks[0].char_span[0]], chunks[0].text]
    prev_end = chunks[0].char_span[1]
    for chunk in chunks[1:]:
        lo, hi = chunk.char_span
        if lo < prev_end:
            parts.append(chunk.text[prev_end - lo :])
        else:
            parts.append(text[prev_end:lo])
            parts.append(chunk.text)
        prev_end = hi
    parts.append(text[prev_end:])
    return "".join(parts)
