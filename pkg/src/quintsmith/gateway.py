"""Chat-completion access with live, replay, and scripted backends.

Every backend answers the same `complete(request)` call. The live
backend posts the standard chat-completions wire shape over HTTP; the
replay backend serves responses recorded to a JSON-lines transcript,
matched by an exact request digest; the scripted backend pops canned
texts, which is what unit tests and offline fixtures use.

The request digest canonicalizes role labels (whitespace only) and
never touches message content, so a transcript recorded on one machine
replays on any other as long as the prompts are byte-identical.
"""

from __future__ import annotations

import hashlib
import json
import logging
import os
import re
import threading
from collections import defaultdict, deque
from dataclasses import dataclass, replace
from datetime import datetime, timezone
from enum import Enum
from pathlib import Path
from typing import Iterable, Protocol

import httpx

from .prompting import ChatMessage, to_wire

log = logging.getLogger(__name__)

API_KEY_ENV = "QUINTSMITH_API_KEY"
REASK_INSTRUCTION = "Respond with a single fenced code block."

# fixed instant used by deterministic backends; live calls use real time
EPOCH_ISO = "1970-01-01T00:00:00+00:00"


class GatewayError(Exception):
    pass


class TransportError(GatewayError):
    pass


class ReplayMiss(GatewayError):
    def __init__(self, digest: str):
        self.digest = digest
        super().__init__(f"no recorded response for request digest {digest}")


class ScriptExhausted(GatewayError):
    pass


class NoCodeBlock(GatewayError):
    pass


class Backend(Enum):
    LIVE = "live"
    REPLAY = "replay"
    SCRIPTED = "scripted"


@dataclass(frozen=True)
class GenerationRequest:
    messages: tuple[ChatMessage, ...]
    seed: int
    model_id: str
    temperature: float = 0.6
    top_p: float = 0.7

    def __post_init__(self):
        object.__setattr__(self, "messages", tuple(self.messages))
        if not 0 <= self.temperature <= 2:
            raise ValueError(f"temperature {self.temperature} outside [0, 2]")
        if not 0 < self.top_p <= 1:
            raise ValueError(f"top_p {self.top_p} outside (0, 1]")


@dataclass(frozen=True)
class GenerationResponse:
    text: str
    system_fingerprint: str
    timestamp: str
    backend: Backend


def canonical_request(req: GenerationRequest) -> dict:
    """JSON form the digest is computed over. Role labels are stripped;
    content is hashed exactly as sent."""
    return {
        "model_id": req.model_id,
        "temperature": req.temperature,
        "top_p": req.top_p,
        "seed": req.seed,
        "messages": [{"role": m.role.strip(), "content": m.content}
                     for m in req.messages],
    }


def request_digest(req: GenerationRequest) -> str:
    blob = json.dumps(canonical_request(req), sort_keys=True,
                      ensure_ascii=False, separators=(",", ":"))
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()


class Gateway(Protocol):
    backend: Backend

    def complete(self, req: GenerationRequest) -> GenerationResponse: ...


def _now_iso() -> str:
    return datetime.now(timezone.utc).isoformat()


class LiveGateway:
    """POSTs the chat-completions wire shape and returns the first choice."""

    backend = Backend.LIVE

    def __init__(self, endpoint: str, api_key: str | None = None,
                 timeout: float = 120.0, transport=None):
        self.endpoint = endpoint
        self.api_key = api_key if api_key is not None \
            else os.environ.get(API_KEY_ENV, "")
        self.calls_made = 0
        self._client = httpx.Client(timeout=timeout, transport=transport)

    def complete(self, req: GenerationRequest) -> GenerationResponse:
        payload = {
            "model": req.model_id,
            "messages": to_wire(list(req.messages)),
            "temperature": req.temperature,
            "top_p": req.top_p,
            "seed": req.seed,
        }
        headers = {}
        if self.api_key:
            headers["Authorization"] = f"Bearer {self.api_key}"
        self.calls_made += 1
        try:
            r = self._client.post(self.endpoint, json=payload, headers=headers)
            r.raise_for_status()
            data = r.json()
            text = data["choices"][0]["message"]["content"]
        except httpx.HTTPError as e:
            raise TransportError(str(e)) from e
        except (KeyError, IndexError, TypeError, ValueError) as e:
            raise TransportError(f"malformed completion response: {e}") from e
        return GenerationResponse(
            text=text,
            system_fingerprint=str(data.get("system_fingerprint") or ""),
            timestamp=_now_iso(),
            backend=Backend.LIVE,
        )


class ReplayGateway:
    """Serves recorded responses. Identical requests recorded more than
    once replay in recording order (per-digest FIFO)."""

    backend = Backend.REPLAY

    def __init__(self, transcript_path: str | Path):
        self.calls_made = 0
        self._queues: dict[str, deque[GenerationResponse]] = defaultdict(deque)
        for n, line in enumerate(
                Path(transcript_path).read_text(encoding="utf-8").splitlines(), 1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
                resp = GenerationResponse(
                    text=rec["response"]["text"],
                    system_fingerprint=str(rec.get("fingerprint", "")),
                    timestamp=str(rec.get("timestamp", "")),
                    backend=Backend.REPLAY,
                )
                self._queues[rec["digest"]].append(resp)
            except (json.JSONDecodeError, KeyError, TypeError) as e:
                raise GatewayError(
                    f"{transcript_path}:{n}: bad transcript line: {e}") from e

    def complete(self, req: GenerationRequest) -> GenerationResponse:
        self.calls_made += 1
        digest = request_digest(req)
        queue = self._queues.get(digest)
        if not queue:
            raise ReplayMiss(digest)
        return queue.popleft()


class ScriptedGateway:
    """Pops canned response texts in order. Single-consumer: feed each
    instance to exactly one synthesis run."""

    backend = Backend.SCRIPTED

    def __init__(self, texts: Iterable[str], fingerprint: str = "scripted"):
        self._texts = deque(texts)
        self._fingerprint = fingerprint
        self.calls_made = 0

    def complete(self, req: GenerationRequest) -> GenerationResponse:
        self.calls_made += 1
        if not self._texts:
            raise ScriptExhausted("scripted gateway has no responses left")
        return GenerationResponse(
            text=self._texts.popleft(),
            system_fingerprint=self._fingerprint,
            timestamp=EPOCH_ISO,
            backend=Backend.SCRIPTED,
        )


class TranscriptRecorder:
    """Wraps a gateway and appends one JSON line per completed call:
    {digest, request, response, fingerprint, timestamp}."""

    def __init__(self, inner: Gateway, path: str | Path):
        self.inner = inner
        self.backend = inner.backend
        self.path = Path(path)
        self._lock = threading.Lock()

    @property
    def calls_made(self) -> int:
        return self.inner.calls_made

    def complete(self, req: GenerationRequest) -> GenerationResponse:
        resp = self.inner.complete(req)
        rec = {
            "digest": request_digest(req),
            "request": canonical_request(req),
            "response": {"text": resp.text},
            "fingerprint": resp.system_fingerprint,
            "timestamp": resp.timestamp,
        }
        line = json.dumps(rec, ensure_ascii=False)
        with self._lock:
            with open(self.path, "a", encoding="utf-8") as fh:
                fh.write(line + "\n")
        return resp


# ---------------------------------------------------------- code extraction

_FENCE_RE = re.compile(r"```[^\n]*\n(.*?)```", re.S)


def extract_code(text: str) -> str:
    """Body of the selected fenced block: the last one containing
    `pure def`, else the first. Fence language tags are ignored."""
    blocks = _FENCE_RE.findall(text)
    if not blocks:
        raise NoCodeBlock("response has no fenced code block")
    for body in reversed(blocks):
        if "pure def" in body:
            return body.strip("\n")
    return blocks[0].strip("\n")


def complete_code(gateway: Gateway, req: GenerationRequest
                  ) -> tuple[str, list[GenerationResponse]]:
    """One ask, plus at most one automatic format re-ask when the reply
    has no fenced block. The re-ask does not consume any repair budget;
    a second formatless reply propagates NoCodeBlock."""
    resp = gateway.complete(req)
    try:
        return extract_code(resp.text), [resp]
    except NoCodeBlock:
        log.info("response had no fenced block; re-asking once")
    followup = list(req.messages)
    if resp.text:
        followup.append(ChatMessage("assistant", resp.text))
    followup.append(ChatMessage("user", REASK_INSTRUCTION))
    retry = replace(req, messages=tuple(followup))
    resp2 = gateway.complete(retry)
    return extract_code(resp2.text), [resp, resp2]
