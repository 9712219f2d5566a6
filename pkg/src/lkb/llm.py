"""Answer generation: a chat-style HTTP client and a deterministic mock.

The remote side speaks one wire format (chat-json): POST
{"model", "messages": [{"role": "user", "content": ...}], "temperature"}
and read {"choices": [{"message": {"content": ...}}]}. Transient
failures (transport errors and 5xx) are retried on a fixed backoff; the
prompt bytes sent are exactly PromptBundle.prompt_text.
"""

from __future__ import annotations

import hashlib
import time
from dataclasses import dataclass

import httpx

from .errors import LlmTransportError, MalformedResponseError
from .retrieve import PromptBundle

FINISH_COMPLETE = "complete"
FINISH_TRUNCATED = "truncated"
FINISH_ERROR = "error"

MOCK_MODEL_ID = "mock"


@dataclass
class Answer:
    text: str
    model_id: str
    latency_ms: float
    prompt_chars: int
    finish_reason: str


@dataclass
class LlmEndpointConfig:
    base_url: str
    api_style: str = "chat-json"
    model: str = "local-model"
    timeout_ms: int = 30000
    max_retries: int = 2
    temperature: float = 0.0
    retry_backoff_s: float = 0.25

    def __post_init__(self) -> None:
        if self.api_style != "chat-json":
            raise ValueError(f"unsupported api_style: {self.api_style!r}")
        if self.timeout_ms <= 0:
            raise ValueError("timeout_ms must be > 0")
        if self.max_retries < 0:
            raise ValueError("max_retries must be >= 0")


class _TransientHttpStatus(Exception):
    pass


def complete(prompt: PromptBundle, cfg: LlmEndpointConfig) -> Answer:
    """Send the prompt to the configured endpoint and return its answer.

    Transport failures and 5xx responses are retried up to max_retries
    times with a fixed backoff; 4xx responses and unparseable bodies
    raise immediately as malformed.
    """
    payload = {
        "model": cfg.model,
        "messages": [{"role": "user", "content": prompt.prompt_text}],
        "temperature": cfg.temperature,
    }
    started = time.perf_counter()
    attempts = cfg.max_retries + 1
    last_error: Exception | None = None
    for attempt in range(attempts):
        try:
            response = httpx.post(cfg.base_url, json=payload, timeout=cfg.timeout_ms / 1000.0)
            if response.status_code >= 500:
                raise _TransientHttpStatus(f"HTTP {response.status_code}")
            if response.status_code >= 400:
                raise MalformedResponseError(
                    f"LLM endpoint rejected the request with HTTP {response.status_code}"
                )
            try:
                body = response.json()
                text = body["choices"][0]["message"]["content"]
            except (ValueError, KeyError, IndexError, TypeError) as exc:
                raise MalformedResponseError(
                    f"LLM response does not match the chat-json contract: {exc}"
                ) from exc
            latency_ms = (time.perf_counter() - started) * 1000.0
            return Answer(
                text=text,
                model_id=body.get("model", cfg.model) if isinstance(body, dict) else cfg.model,
                latency_ms=latency_ms,
                prompt_chars=len(prompt.prompt_text),
                finish_reason=FINISH_COMPLETE,
            )
        except (httpx.HTTPError, _TransientHttpStatus) as exc:
            last_error = exc
            if attempt + 1 < attempts:
                time.sleep(cfg.retry_backoff_s)
    raise LlmTransportError(
        f"LLM endpoint {cfg.base_url} failed after {attempts} attempts: {last_error}"
    )


def mock_complete(prompt: PromptBundle) -> Answer:
    """Deterministic offline stand-in for complete().

    The answer encodes a digest of the prompt text and the chunk ids it
    carried, so end-to-end tests can assert on it without a network.
    """
    digest = hashlib.sha256(prompt.prompt_text.encode("utf-8")).hexdigest()[:8]
    chunk_list = ",".join(prompt.included_chunk_ids)
    return Answer(
        text=f"MOCK-ANSWER sha={digest} chunks=[{chunk_list}]",
        model_id=MOCK_MODEL_ID,
        latency_ms=0.0,
        prompt_chars=len(prompt.prompt_text),
        finish_reason=FINISH_COMPLETE,
    )
