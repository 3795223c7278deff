"""Chat-completion gateway: HTTP backend with retries, plus the test mock.

Wire protocol is the common chat-completion JSON shape: POST to the
configured endpoint with ``{"model", "messages", "temperature"}``, response
``{"choices": [{"message": {"content": ...}}], "model": ...}``. Configure via
environment: COMET_LLM_ENDPOINT, COMET_LLM_KEY, COMET_LLM_MODEL and
COMET_LLM_BACKEND (``http`` or ``mock``).
"""

from __future__ import annotations

import os
import threading
import time
from dataclasses import dataclass, field

import httpx

from .errors import AuthFailure, Malformed, RateLimited, Timeout
from .mock import generate_mock_personas, generate_mock_track
from .persona import PersonaSet
from .prompting import GenerationConfig
from .video import VideoManifest, render_clip_descriptions, parse_clip_descriptions

ENV_ENDPOINT = "COMET_LLM_ENDPOINT"
ENV_KEY = "COMET_LLM_KEY"
ENV_MODEL = "COMET_LLM_MODEL"
ENV_BACKEND = "COMET_LLM_BACKEND"

RETRY_ATTEMPTS = 3
RETRY_BASE_S = 1.0
DEFAULT_INFLIGHT_CAP = 2


@dataclass(frozen=True)
class LmmRequest:
    system: str
    user: str
    temperature: float = 1.0
    max_output_units: int = 4096
    timeout_s: float = 120.0

    def __post_init__(self):
        if not self.system or not self.user:
            raise ValueError("system and user must be non-empty")
        if not 0 <= self.temperature <= 2:
            raise ValueError("temperature must be in [0, 2]")


@dataclass(frozen=True)
class LmmResponse:
    text: str
    model_id: str
    latency_ms: int


class HttpBackend:
    """Talks to any chat-completion-compatible endpoint with backoff retries."""

    def __init__(self, endpoint: str | None = None, api_key: str | None = None,
                 model: str | None = None, transport: httpx.BaseTransport | None = None,
                 inflight_cap: int = DEFAULT_INFLIGHT_CAP, sleep=time.sleep):
        self.endpoint = endpoint or os.environ.get(ENV_ENDPOINT, "")
        self.api_key = api_key or os.environ.get(ENV_KEY, "")
        self.model = model or os.environ.get(ENV_MODEL, "")
        self._client = httpx.Client(transport=transport)
        self._sem = threading.Semaphore(inflight_cap)
        self._sleep = sleep

    def complete(self, req: LmmRequest) -> LmmResponse:
        if not self.endpoint:
            raise ValueError(f"{ENV_ENDPOINT} not configured")
        payload = {
            "model": self.model,
            "messages": [
                {"role": "system", "content": req.system},
                {"role": "user", "content": req.user},
            ],
            "temperature": req.temperature,
            "max_tokens": req.max_output_units,
        }
        headers = {}
        if self.api_key:
            headers["Authorization"] = f"Bearer {self.api_key}"

        last_exc: Exception | None = None
        with self._sem:
            for attempt in range(RETRY_ATTEMPTS):
                start = time.monotonic()
                try:
                    resp = self._client.post(self.endpoint, json=payload,
                                             headers=headers, timeout=req.timeout_s)
                except httpx.TimeoutException as e:
                    last_exc = Timeout(str(e))
                except httpx.HTTPError as e:
                    last_exc = Timeout(f"transport failure: {e}")
                else:
                    if resp.status_code in (401, 403):
                        raise AuthFailure(f"HTTP {resp.status_code}")
                    if resp.status_code == 429:
                        retry_after = resp.headers.get("retry-after")
                        last_exc = RateLimited(
                            float(retry_after) if retry_after else None)
                    elif resp.status_code >= 500:
                        last_exc = Timeout(f"HTTP {resp.status_code}")
                    else:
                        try:
                            body = resp.json()
                            text = body["choices"][0]["message"]["content"]
                        except (ValueError, KeyError, IndexError, TypeError) as e:
                            raise Malformed(f"bad wire response: {e}") from e
                        latency = int((time.monotonic() - start) * 1000)
                        return LmmResponse(
                            text=text,
                            model_id=body.get("model", self.model),
                            latency_ms=latency,
                        )
                if attempt < RETRY_ATTEMPTS - 1:
                    self._sleep(RETRY_BASE_S * (2 ** attempt))
        raise last_exc if last_exc else Timeout("exhausted retries")


@dataclass
class MockBackend:
    """Deterministic stand-in: recognizes each pipeline prompt by content.

    The generation step needs the full manifest/persona/config context, which
    the pipeline binds before calling complete().
    """

    seed: int = 0
    manifest: VideoManifest | None = None
    personas: PersonaSet | None = None
    config: GenerationConfig = field(default_factory=GenerationConfig)
    model_id: str = "mock"
    # scripted faults: response texts to return before behaving normally
    scripted: list[str] = field(default_factory=list)

    def bind(self, manifest: VideoManifest, personas: PersonaSet | None,
             config: GenerationConfig) -> None:
        self.manifest = manifest
        self.personas = personas
        self.config = config

    def complete(self, req: LmmRequest) -> LmmResponse:
        if self.scripted:
            return LmmResponse(self.scripted.pop(0), self.model_id, 0)
        text = self._dispatch(req)
        return LmmResponse(text, self.model_id, 0)

    def _dispatch(self, req: LmmRequest) -> str:
        if "personas with different backgrounds" in req.user:
            return generate_mock_personas(self.seed)
        if "scene transitions" in req.user:
            if self.manifest is None:
                raise ValueError("mock backend not bound to a manifest")
            from .video import segment_scenes
            clips = segment_scenes(self.manifest)
            return render_clip_descriptions(clips)
        if self.manifest is None or self.personas is None:
            raise ValueError("mock backend not bound for generation")
        return generate_mock_track(self.manifest, self.personas, self.config,
                                   self.seed)


def backend_from_env(seed: int = 0):
    kind = os.environ.get(ENV_BACKEND, "mock")
    if kind == "http":
        return HttpBackend()
    return MockBackend(seed=seed)
