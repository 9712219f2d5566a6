"""Top-K retrieval and prompt assembly.

The retrieval result carries resolved chunks with scores and provenance;
the prompt assembler renders the canonical template around the retrieved
texts, enforcing a character budget by dropping the lowest-ranked chunks
first and only then trimming the tail of the last survivor.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from .corpus import Chunk
from .errors import EmptyIndexError, StoreCorruptionError, TemplateError

CANONICAL_TEMPLATE = (
    "Known Information:\n"
    "{context}\n"
    "Based on known information, please answer relevant questions concisely and "
    "professionally.\n"
    "The question is: {query}."
)
CANONICAL_TEMPLATE_ID = "known-information-v1"

CONTEXT_SEPARATOR = "\n---\n"
NO_KNOWLEDGE_SENTINEL = "(no relevant local knowledge found)"

DEFAULT_K = 4
DEFAULT_BUDGET = 2048

_PLACEHOLDER_RE = re.compile(r"(\{context\}|\{query\})")


@dataclass
class RetrievalResult:
    query_text: str
    hits: list[tuple[Chunk, float]]
    k_requested: int
    search_mode: str
    params_used: dict = field(default_factory=dict)


@dataclass
class PromptBundle:
    prompt_text: str
    template_id: str
    context_chars: int
    included_chunk_ids: list[str]
    truncated: bool


def retrieve(store, query: str, k: int = DEFAULT_K, mode: str | None = None,
             nprobe: int | None = None) -> RetrievalResult:
    """Embed the query, search the store's index, and resolve chunks.

    Exact duplicate chunk texts are collapsed to the highest-ranked copy,
    so the result can hold fewer than k hits. Mode defaults to the
    store's active index kind.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    if store.vector_count == 0:
        raise EmptyIndexError("no vectors indexed yet; ingest documents first")
    query_vector = store.embedder.embed(query)
    index, mode_used, params = store.index_for_mode(mode, nprobe)
    raw_hits = index.search(query_vector, k, **params)

    hits: list[tuple[Chunk, float]] = []
    seen_texts: set[str] = set()
    for hit in raw_hits:
        try:
            chunk = store.chunk(hit.id)
        except KeyError as exc:
            raise StoreCorruptionError(
                f"index returned chunk id {hit.id!r} that the store cannot resolve"
            ) from exc
        if chunk.text in seen_texts:
            continue
        seen_texts.add(chunk.text)
        hits.append((chunk, hit.score))
    return RetrievalResult(
        query_text=query,
        hits=hits,
        k_requested=k,
        search_mode=mode_used,
        params_used=params,
    )


def _trim_at_whitespace(text: str, budget: int) -> str:
    prefix = text[:budget]
    last_ws = None
    for m in re.finditer(r"\s", prefix):
        last_ws = m.start()
    if last_ws is not None and last_ws > 0:
        return prefix[:last_ws]
    return prefix


def assemble_prompt(
    result: RetrievalResult,
    budget: int = DEFAULT_BUDGET,
    template: str = CANONICAL_TEMPLATE,
) -> PromptBundle:
    """Render the prompt template around the retrieved texts.

    Chunk texts are joined with CONTEXT_SEPARATOR in rank order. If the
    joined context exceeds the budget, whole chunks are dropped from the
    bottom; a lone surviving chunk that still exceeds the budget is cut
    at the last whitespace inside it. No hits renders the sentinel and
    counts zero context characters.
    """
    if budget < 1:
        raise ValueError("budget must be >= 1")
    if "{context}" not in template or "{query}" not in template:
        raise TemplateError("template must contain {context} and {query} placeholders")

    chunks = [chunk for chunk, _ in result.hits]
    truncated = False
    included = list(chunks)
    while included and len(CONTEXT_SEPARATOR.join(c.text for c in included)) > budget:
        if len(included) == 1:
            break
        included.pop()
        truncated = True

    if not included:
        context = NO_KNOWLEDGE_SENTINEL
        context_chars = 0
        included_ids: list[str] = []
    else:
        texts = [c.text for c in included]
        joined = CONTEXT_SEPARATOR.join(texts)
        if len(joined) > budget:
            texts[-1] = _trim_at_whitespace(texts[-1], budget)
            joined = texts[-1]
            truncated = True
        context = joined
        context_chars = len(joined)
        included_ids = [c.chunk_id for c in included]

    rendered = "".join(
        {"{context}": context, "{query}": result.query_text}.get(part, part)
        for part in _PLACEHOLDER_RE.split(template)
    )
    template_id = CANONICAL_TEMPLATE_ID if template == CANONICAL_TEMPLATE else "custom"
    return PromptBundle(
        prompt_text=rendered,
        template_id=template_id,
        context_chars=context_chars,
        included_chunk_ids=included_ids,
        truncated=truncated,
    )
