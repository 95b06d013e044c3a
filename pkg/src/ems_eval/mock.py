"""Deterministic stand-ins for a chat/embedding endpoint.

``OfflineResponder`` answers the package's own prompts with lexical heuristics
so full LLM-mode runs work without a model.  ``MockLLMServer`` wraps any
responder in a real HTTP server (loopback, random port) with scripted replies
and failure injection, for tests.
"""

from __future__ import annotations

import hashlib
import json
import math
import re
import threading
import time
from collections import deque
from collections.abc import Callable
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from typing import Any

import httpx

from .baselines import rouge
from .extraction import extract_heuristic
from .matching import MatcherConfig, match_point_lexical
from .text import tokenize

EMBED_DIM = 64

Predicate = Callable[[str], bool]


def _last_section(prompt: str, start: str, end: str) -> str | None:
    i = prompt.rfind(start)
    if i < 0:
        return None
    rest = prompt[i + len(start) :]
    j = rest.find(end)
    return rest[:j] if j >= 0 else rest


def _unquote(s: str) -> str:
    try:
        value = json.loads(s)
    except json.JSONDecodeError:
        return s.strip('"')
    return value if isinstance(value, str) else s


def hashed_embedding(text: str, dim: int = EMBED_DIM) -> list[float]:
    """Signed feature-hashing bag of tokens, L2-normalised."""
    vec = [0.0] * dim
    for tok in tokenize(text):
        h = hashlib.sha256(tok.encode("utf-8")).digest()
        idx = int.from_bytes(h[:4], "big") % dim
        vec[idx] += 1.0 if h[4] & 1 else -1.0
    norm = math.sqrt(sum(x * x for x in vec))
    return [x / norm for x in vec] if norm else vec


class OfflineResponder:
    """Answers extraction, matching and scoring prompts without a model."""

    def chat(self, body: dict[str, Any]) -> str:
        # re-prompts append turns; the task prompt is always the first one
        prompt = body["messages"][0]["content"]
        if prompt.rstrip().endswith("Bullet Points:"):
            answer = _last_section(prompt, "Candidate Answer:\n", "\n\nBullet Points:")
            return json.dumps(list(extract_heuristic(answer or "")), ensure_ascii=False)
        if prompt.rstrip().endswith("Matched Index:"):
            ref = _last_section(prompt, "Reference Keypoint:\n", "\n\nCandidate Keypoint List:")
            listing = _last_section(prompt, "Candidate Keypoint List:\n", "\n\nMatched Index:")
            candidates = [_unquote(c) for c in re.findall(r'^\d+: (".*"),?$', listing or "", flags=re.M)]
            if not ref or not candidates:
                return "-1"
            return str(match_point_lexical(_unquote(ref.strip()), candidates, MatcherConfig()))
        if prompt.rstrip().endswith("Matching Score:"):
            kp1 = _last_section(prompt, "Keypoint 1:\n", "\n\nKeypoint 2:")
            kp2 = _last_section(prompt, "Keypoint 2:\n", "\n\nOutput:")
            m = re.search(r"assign a score between 0 and (\d+)", prompt)
            max_score = int(m.group(1)) if m else 10
            f1 = rouge(kp2 or "", kp1 or "", "rouge-l").f1
            return str(round(f1 * max_score))
        if "Answer Versions to Combine:" in prompt:
            first = _last_section(prompt, "Answer Version 1: ", "\nAnswer Version 2:")
            return (first or "").strip()
        return ""

    def embed(self, texts: list[str]) -> list[list[float]]:
        return [hashed_embedding(t) for t in texts]

    def handle(self, path: str, body: dict[str, Any]) -> tuple[int, dict[str, Any]]:
        if path.endswith("/chat/completions"):
            return 200, chat_payload(self.chat(body), body.get("model", "offline"))
        if path.endswith("/embeddings"):
            inputs = body["input"]
            inputs = [inputs] if isinstance(inputs, str) else inputs
            return 200, embedding_payload(self.embed(inputs))
        return 404, {"error": {"message": f"unknown path {path}"}}


def chat_payload(content: str, model: str = "mock") -> dict[str, Any]:
    return {
        "id": "chatcmpl-mock",
        "object": "chat.completion",
        "model": model,
        "choices": [{"index": 0, "message": {"role": "assistant", "content": content}, "finish_reason": "stop"}],
    }


def embedding_payload(vectors: list[list[float]]) -> dict[str, Any]:
    return {
        "object": "list",
        "data": [{"object": "embedding", "index": i, "embedding": v} for i, v in enumerate(vectors)],
    }


def offline_transport(responder: OfflineResponder | None = None) -> httpx.MockTransport:
    """An httpx transport answering every request in-process, no sockets."""
    responder = responder or OfflineResponder()

    def handler(request: httpx.Request) -> httpx.Response:
        status, payload = responder.handle(request.url.path, json.loads(request.content))
        return httpx.Response(status, json=payload)

    return httpx.MockTransport(handler)


class MockLLMServer:
    """Scriptable OpenAI-compatible server on 127.0.0.1.

    Chat rules are ``(predicate, reply)`` pairs checked in order against the
    whole conversation text; a ``str`` predicate means "substring of".  Unmatched
    requests fall through to the offline responder.  ``fail_next`` queues HTTP
    error statuses returned before any rule is consulted.
    """

    def __init__(self, responder: OfflineResponder | None = None, delay: float = 0.0) -> None:
        self.responder = responder or OfflineResponder()
        self.delay = delay
        self.rules: list[tuple[Predicate, str | Callable[[str], str]]] = []
        self.embed_rules: dict[str, list[float]] = {}
        self.expected_key: str | None = None
        self.requests: list[dict[str, Any]] = []
        self.max_inflight = 0
        self._inflight = 0
        self._failures: deque[int] = deque()
        self._lock = threading.Lock()
        self._server: ThreadingHTTPServer | None = None
        self._thread: threading.Thread | None = None

    @property
    def url(self) -> str:
        assert self._server is not None, "server not started"
        host, port = self._server.server_address[:2]
        return f"http://{host}:{port}"

    @property
    def request_count(self) -> int:
        return len(self.requests)

    def add_rule(self, when: str | Predicate, reply: str | Callable[[str], str]) -> None:
        pred = (lambda p, s=when: s in p) if isinstance(when, str) else when
        self.rules.append((pred, reply))

    def add_embedding(self, text: str, vector: list[float]) -> None:
        self.embed_rules[text] = vector

    def fail_next(self, status: int, times: int = 1) -> None:
        self._failures.extend([status] * times)

    def reset(self) -> None:
        with self._lock:
            self.rules.clear()
            self.embed_rules.clear()
            self.requests.clear()
            self._failures.clear()
            self.max_inflight = 0
            self.delay = 0.0
            self.expected_key = None

    def start(self) -> MockLLMServer:
        owner = self

        class Handler(BaseHTTPRequestHandler):
            def do_POST(self) -> None:  # noqa: N802
                length = int(self.headers.get("Content-Length", 0))
                body = json.loads(self.rfile.read(length) or b"{}")
                status, payload = owner._dispatch(self.path, body, self.headers.get("Authorization"))
                data = json.dumps(payload).encode("utf-8")
                try:
                    self.send_response(status)
                    self.send_header("Content-Type", "application/json")
                    self.send_header("Content-Length", str(len(data)))
                    self.end_headers()
                    self.wfile.write(data)
                except (BrokenPipeError, ConnectionResetError):
                    pass  # client gave up, e.g. a timeout test

            def log_message(self, *args: object) -> None:
                pass

        self._server = ThreadingHTTPServer(("127.0.0.1", 0), Handler)
        self._server.daemon_threads = True
        self._thread = threading.Thread(target=self._server.serve_forever, kwargs={"poll_interval": 0.02}, daemon=True)
        self._thread.start()
        return self

    def stop(self) -> None:
        if self._server is not None:
            self._server.shutdown()
            self._server.server_close()
            self._server = None

    def __enter__(self) -> MockLLMServer:
        return self.start()

    def __exit__(self, *exc: object) -> None:
        self.stop()

    def _dispatch(self, path: str, body: dict[str, Any], auth: str | None) -> tuple[int, dict[str, Any]]:
        with self._lock:
            self.requests.append({"path": path, "body": body})
            self._inflight += 1
            self.max_inflight = max(self.max_inflight, self._inflight)
            failure = self._failures.popleft() if self._failures else None
        try:
            if self.delay:
                time.sleep(self.delay)
            if self.expected_key is not None and auth != f"Bearer {self.expected_key}":
                return 401, {"error": {"message": "invalid api key"}}
            if failure is not None:
                return failure, {"error": {"message": f"injected failure {failure}"}}
            if path.endswith("/chat/completions"):
                prompt = "\n".join(m["content"] for m in body["messages"])
                for pred, reply in self.rules:
                    if pred(prompt):
                        text = reply(prompt) if callable(reply) else reply
                        return 200, chat_payload(text, body.get("model", "mock"))
            elif path.endswith("/embeddings") and self.embed_rules:
                inputs = body["input"]
                inputs = [inputs] if isinstance(inputs, str) else inputs
                if all(t in self.embed_rules for t in inputs):
                    return 200, embedding_payload([self.embed_rules[t] for t in inputs])
            return self.responder.handle(path, body)
        finally:
            with self._lock:
                self._inflight -= 1
