import json
import threading
from http.server import BaseHTTPRequestHandler, HTTPServer

import pytest

from lkb.errors import LlmTransportError, MalformedResponseError
from lkb.llm import Answer, LlmEndpointConfig, complete, mock_complete
from lkb.retrieve import PromptBundle


def _bundle(text: str = "prompt body", ids: list[str] | None = None) -> PromptBundle:
    return PromptBundle(
        prompt_text=text,
        template_id="known-information-v1",
        context_chars=len(text),
        included_chunk_ids=ids or [],
        truncated=False,
    )


class _LlmStub(BaseHTTPRequestHandler):
    fail_times = 0
    status_after = 200
    reply_text = "stub reply"
    calls = 0
    bodies: list[dict] = []

    def do_POST(self):
        cls = type(self)
        cls.calls += 1
        length = int(self.headers.get("Content-Length", "0"))
        cls.bodies.append(json.loads(self.rfile.read(length)))
        if cls.calls <= cls.fail_times:
            self.send_response(500)
            self.end_headers()
            self.wfile.write(b"boom")
            return
        self.send_response(cls.status_after)
        self.send_header("Content-Type", "application/json")
        self.end_headers()
        body = {"choices": [{"message": {"content": cls.reply_text}}], "model": "stub-1"}
        self.wfile.write(json.dumps(body).encode())

    def log_message(self, *args):
        pass


@pytest.fixture
def llm_stub():
    _LlmStub.fail_times = 0
    _LlmStub.status_after = 200
    _LlmStub.reply_text = "stub reply"
    _LlmStub.calls = 0
    _LlmStub.bodies = []
    server = HTTPServer(("127.0.0.1", 0), _LlmStub)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    yield f"http://127.0.0.1:{server.server_port}/v1/chat"
    server.shutdown()


def _cfg(url: str, **kw) -> LlmEndpointConfig:
    defaults = dict(base_url=url, model="test-model", timeout_ms=2000,
                    max_retries=2, retry_backoff_s=0.01)
    defaults.update(kw)
    return LlmEndpointConfig(**defaults)


def test_complete_returns_stub_text_verbatim(llm_stub):
    _LlmStub.reply_text = "the exact words"
    answer = complete(_bundle("hello"), _cfg(llm_stub))
    assert answer.text == "the exact words"
    assert answer.model_id == "stub-1"
    assert answer.finish_reason == "complete"
    assert answer.prompt_chars == len("hello")
    assert answer.latency_ms >= 0


def test_complete_sends_exact_prompt_and_wire_shape(llm_stub):
    prompt = _bundle("precise prompt bytes: {braces} kept")
    complete(prompt, _cfg(llm_stub, temperature=0.5))
    sent = _LlmStub.bodies[0]
    assert sent == {
        "model": "test-model",
        "messages": [{"role": "user", "content": "precise prompt bytes: {braces} kept"}],
        "temperature": 0.5,
    }


def test_retries_then_succeeds(llm_stub):
    _LlmStub.fail_times = 2
    answer = complete(_bundle(), _cfg(llm_stub, max_retries=2))
    assert answer.text == "stub reply"
    assert _LlmStub.calls == 3  # two failures, one success


def test_failures_exhaust_retries(llm_stub):
    _LlmStub.fail_times = 3
    with pytest.raises(LlmTransportError):
        complete(_bundle(), _cfg(llm_stub, max_retries=2))
    assert _LlmStub.calls == 3  # min(failures, max_retries) + 1 attempts


def test_zero_retries_single_attempt(llm_stub):
    _LlmStub.fail_times = 1
    with pytest.raises(LlmTransportError):
        complete(_bundle(), _cfg(llm_stub, max_retries=0))
    assert _LlmStub.calls == 1


def test_client_error_is_malformed_not_retried(llm_stub):
    _LlmStub.status_after = 400
    with pytest.raises(MalformedResponseError):
        complete(_bundle(), _cfg(llm_stub))
    assert _LlmStub.calls == 1


def test_unreachable_endpoint():
    with pytest.raises(LlmTransportError):
        complete(_bundle(), _cfg("http://127.0.0.1:1/nope", max_retries=1,
                                 timeout_ms=200))


def test_config_validation():
    with pytest.raises(ValueError):
        LlmEndpointConfig(base_url="x", timeout_ms=0)
    with pytest.raises(ValueError):
        LlmEndpointConfig(base_url="x", max_retries=-1)
    with pytest.raises(ValueError):
        LlmEndpointConfig(base_url="x", api_style="completions")


# -- mock_complete --------------------------------------------------------------


def test_mock_is_deterministic():
    a = mock_complete(_bundle("same prompt", ["c1", "c2"]))
    b = mock_complete(_bundle("same prompt", ["c1", "c2"]))
    assert a == b
    assert isinstance(a, Answer)


def test_mock_differs_on_one_byte():
    a = mock_complete(_bundle("prompt a"))
    b = mock_complete(_bundle("prompt b"))
    assert a.text.split("sha=")[1] != b.text.split("sha=")[1]


def test_mock_encodes_chunk_ids():
    answer = mock_complete(_bundle("p", ["x", "y"]))
    assert answer.text.endswith("chunks=[x,y]")
    empty = mock_complete(_bundle("p", []))
    assert empty.text.endswith("chunks=[]")
    assert empty.model_id == "mock"
