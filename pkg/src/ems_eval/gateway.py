"""OpenAI-compatible chat/embedding client with retries, a concurrency cap and a disk cache."""

from __future__ import annotations

import hashlib
import json
import logging
import os
import re
import tempfile
import threading
import time
from collections.abc import Callable, Sequence
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Any, TypeVar

import httpx

from .errors import AuthError, ContractError, GatewayError, ReplyParseError, RetryExhaustedError

logger = logging.getLogger(__name__)

T = TypeVar("T")

API_KEY_ENV = "EMS_API_KEY"
# request fields that never change the model's answer
VOLATILE_FIELDS = frozenset({"user", "stream", "timeout", "request_id"})


@dataclass(frozen=True)
class ChatRequest:
    model: str
    messages: tuple[tuple[str, str], ...]
    temperature: float = 0.0
    seed: int | None = None
    max_output_tokens: int = 1024

    def __post_init__(self) -> None:
        object.__setattr__(self, "messages", tuple((r, c) for r, c in self.messages))
        if not self.messages:
            raise ContractError("a chat request needs at least one message")
        if self.temperature < 0:
            raise ContractError("temperature must be >= 0")

    def body(self) -> dict[str, Any]:
        body: dict[str, Any] = {
            "model": self.model,
            "messages": [{"role": r, "content": c} for r, c in self.messages],
            "temperature": self.temperature,
            "max_tokens": self.max_output_tokens,
        }
        if self.seed is not None:
            body["seed"] = self.seed
        return body


@dataclass
class GatewayConfig:
    base_url: str = "http://localhost:8000"
    model: str = "gpt-4o-mini"
    embed_model: str = "text-embedding-3-small"
    concurrency: int = 4
    retry_max: int = 4
    cache_dir: str | None = ".ems_cache"
    timeout: float = 60.0
    backoff_base: float = 1.0
    backoff_cap: float = 30.0
    seed: int | None = 0
    max_output_tokens: int = 1024

    def __post_init__(self) -> None:
        if self.concurrency < 1:
            raise ContractError("gateway concurrency must be >= 1")
        if self.retry_max < 0:
            raise ContractError("retry_max must be >= 0")


@dataclass
class GatewayStats:
    network_calls: int = 0
    cache_hits: int = 0
    cache_misses: int = 0
    retries: int = 0
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False, compare=False)

    def bump(self, name: str, by: int = 1) -> None:
        with self._lock:
            setattr(self, name, getattr(self, name) + by)

    def as_dict(self) -> dict[str, int]:
        with self._lock:
            return {f.name: getattr(self, f.name) for f in fields(self) if not f.name.startswith("_")}


def cache_key(kind: str, model: str, body: dict[str, Any]) -> str:
    """Stable digest of a logical request; identical across processes and platforms."""
    stable = {k: v for k, v in body.items() if k not in VOLATILE_FIELDS}
    blob = json.dumps(
        {"kind": kind, "model": model, "body": stable},
        sort_keys=True,
        ensure_ascii=False,
        separators=(",", ":"),
    )
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()


class ResponseCache:
    """Content-addressed JSON files, one per request digest.

    Writes go through a temp file and ``os.replace`` so concurrent readers never
    see a partial entry.
    """

    DIGEST_FILE = "run_config.digest"

    def __init__(self, root: str | os.PathLike[str]) -> None:
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)

    def _path(self, digest: str) -> Path:
        return self.root / digest[:2] / f"{digest}.json"

    def get(self, digest: str) -> Any | None:
        path = self._path(digest)
        try:
            with path.open("r", encoding="utf-8") as fh:
                return json.load(fh)["value"]
        except FileNotFoundError:
            return None
        except (json.JSONDecodeError, KeyError):
            logger.warning("ignoring corrupt cache entry %s", path)
            return None

    def put(self, digest: str, value: Any) -> None:
        path = self._path(digest)
        path.parent.mkdir(parents=True, exist_ok=True)
        fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=".tmp-", suffix=".json")
        try:
            with os.fdopen(fd, "w", encoding="utf-8") as fh:
                json.dump({"value": value}, fh, ensure_ascii=False)
            os.replace(tmp, path)
        except BaseException:
            Path(tmp).unlink(missing_ok=True)
            raise

    def check_config_digest(self, digest: str) -> bool:
        """Record the run config digest; warn and return False if it differs from the last run."""
        path = self.root / self.DIGEST_FILE
        previous = path.read_text(encoding="utf-8").strip() if path.exists() else None
        path.write_text(digest + "\n", encoding="utf-8")
        if previous is not None and previous != digest:
            logger.warning(
                "cache at %s was filled under config %s, resuming with %s",
                self.root, previous[:12], digest[:12],
            )
            return False
        return True


class Gateway:
    """Shared handle for every model call made by a run.

    Safe to use from many threads: a bounded semaphore caps in-flight HTTP
    requests at ``config.concurrency``.
    """

    def __init__(
        self,
        config: GatewayConfig | None = None,
        *,
        api_key: str | None = None,
        transport: httpx.BaseTransport | None = None,
        require_key: bool | None = None,
        sleep: Callable[[float], None] = time.sleep,
    ) -> None:
        self.config = config or GatewayConfig()
        self.api_key = api_key if api_key is not None else os.environ.get(API_KEY_ENV)
        # injected transports (offline mode, tests) run without credentials
        self.require_key = (transport is None) if require_key is None else require_key
        self.stats = GatewayStats()
        self.cache = ResponseCache(self.config.cache_dir) if self.config.cache_dir else None
        self._sleep = sleep
        self._slots = threading.BoundedSemaphore(self.config.concurrency)
        self._client = httpx.Client(
            base_url=self.config.base_url.rstrip("/"),
            timeout=self.config.timeout,
            transport=transport,
        )

    def close(self) -> None:
        self._client.close()

    def __enter__(self) -> Gateway:
        return self

    def __exit__(self, *exc: object) -> None:
        self.close()

    def request(self, messages: Sequence[tuple[str, str]]) -> ChatRequest:
        return ChatRequest(
            model=self.config.model,
            messages=tuple(messages),
            temperature=0.0,
            seed=self.config.seed,
            max_output_tokens=self.config.max_output_tokens,
        )

    def complete(self, prompt: str, history: Sequence[tuple[str, str]] = ()) -> str:
        """Send ``history`` followed by ``prompt`` as the user turn."""
        return self.chat_complete(self.request([*history, ("user", prompt)]))

    def chat_complete(self, request: ChatRequest) -> str:
        body = request.body()
        digest = cache_key("chat", request.model, body)
        cached = self._cache_get(digest)
        if cached is not None:
            return cached
        data = self._post("/v1/chat/completions", body)
        try:
            content = data["choices"][0]["message"]["content"]
        except (KeyError, IndexError, TypeError) as exc:
            raise GatewayError(f"malformed chat completion response: {data!r:.200}") from exc
        if not isinstance(content, str):
            raise GatewayError("chat completion returned no text content")
        if self.cache is not None:
            self.cache.put(digest, content)
        return content

    def embed(self, texts: Sequence[str]) -> list[list[float]]:
        if not texts:
            raise ContractError("embed() needs at least one text")
        model = self.config.embed_model
        digests = [cache_key("embed", model, {"input": t}) for t in texts]
        found: dict[str, list[float]] = {}
        for d in dict.fromkeys(digests):
            hit = self._cache_get(d)
            if hit is not None:
                found[d] = hit
        missing = [t for t, d in dict(zip(texts, digests)).items() if d not in found]
        if missing:
            data = self._post("/v1/embeddings", {"model": model, "input": missing})
            vectors = _parse_embeddings(data, len(missing))
            for text, vec in zip(missing, vectors):
                d = cache_key("embed", model, {"input": text})
                found[d] = vec
                if self.cache is not None:
                    self.cache.put(d, vec)
        out = [found[d] for d in digests]
        if len({len(v) for v in out}) != 1:
            raise GatewayError("embedding endpoint returned vectors of differing dimension")
        return out

    def _cache_get(self, digest: str) -> Any | None:
        if self.cache is None:
            return None
        value = self.cache.get(digest)
        if value is None:
            self.stats.bump("cache_misses")
        else:
            self.stats.bump("cache_hits")
        return value

    def _post(self, path: str, body: dict[str, Any]) -> dict[str, Any]:
        headers = {"Content-Type": "application/json"}
        if self.api_key:
            headers["Authorization"] = f"Bearer {self.api_key}"
        elif self.require_key:
            raise AuthError(f"no credential: set the {API_KEY_ENV} environment variable")

        last_problem = ""
        for attempt in range(self.config.retry_max + 1):
            if attempt:
                self.stats.bump("retries")
            retry_after: float | None = None
            try:
                with self._slots:
                    self.stats.bump("network_calls")
                    resp = self._client.post(path, json=body, headers=headers)
            except (httpx.TimeoutException, httpx.TransportError) as exc:
                last_problem = f"{type(exc).__name__}: {exc}"
            else:
                status = resp.status_code
                if status < 300:
                    try:
                        return resp.json()
                    except ValueError as exc:
                        raise GatewayError(f"endpoint returned non-JSON body for {path}") from exc
                if status in (401, 403):
                    raise AuthError(f"endpoint rejected credentials ({status})", status=status)
                if status != 429 and status < 500:
                    raise GatewayError(f"permanent error {status} from {path}: {resp.text[:200]}", status=status)
                last_problem = f"HTTP {status}"
                retry_after = _retry_after(resp)
            if attempt < self.config.retry_max:
                delay = min(self.config.backoff_cap, self.config.backoff_base * 2**attempt)
                if retry_after is not None:
                    delay = max(delay, min(retry_after, self.config.backoff_cap))
                logger.info("retrying %s after %s (attempt %d), sleeping %.2fs", path, last_problem, attempt + 1, delay)
                self._sleep(delay)
        raise RetryExhaustedError(
            f"{path} failed after {self.config.retry_max + 1} attempts; last error: {last_problem}"
        )


def _retry_after(resp: httpx.Response) -> float | None:
    value = resp.headers.get("retry-after")
    try:
        return float(value) if value is not None else None
    except ValueError:
        return None


def _parse_embeddings(data: dict[str, Any], expected: int) -> list[list[float]]:
    try:
        items = sorted(data["data"], key=lambda d: d.get("index", 0))
        vectors = [[float(x) for x in item["embedding"]] for item in items]
    except (KeyError, TypeError, ValueError) as exc:
        raise GatewayError(f"malformed embedding response: {data!r:.200}") from exc
    if len(vectors) != expected:
        raise GatewayError(f"expected {expected} embeddings, endpoint returned {len(vectors)}")
    return vectors


_FENCE = re.compile(r"```[a-zA-Z]*")
_INTEGER = re.compile(r"(?<![\w.])[-+]?\d+(?![\d.]*\d)")


def parse_integer_reply(reply: str) -> int:
    """First signed integer in a model reply, e.g. ``"Matched Index:\\n-1"`` -> -1."""
    text = _FENCE.sub(" ", reply)
    m = _INTEGER.search(text)
    if m is None:
        raise ReplyParseError(f"no integer found in reply {reply!r:.120}", reply)
    return int(m.group(0))


def ask_parsed(
    session: Gateway,
    prompt: str,
    parse: Callable[[str], T],
    *,
    reprompt: str,
    max_reprompts: int = 2,
    history: Sequence[tuple[str, str]] = (),
) -> tuple[T, list[tuple[str, str]]]:
    """Send ``prompt``; on an unparseable reply, follow up with ``reprompt``.

    Returns ``(parsed_value, conversation)``.  Follow-ups extend the
    conversation so a cached bad reply is never replayed.
    """
    history = list(history)
    message = prompt
    reply = ""
    for _ in range(max_reprompts + 1):
        reply = session.complete(message, history)
        history += [("user", message), ("assistant", reply)]
        try:
            return parse(reply), history
        except ReplyParseError:
            message = reprompt
    raise ReplyParseError(f"reply still unparseable after {max_reprompts} re-prompts", reply)
