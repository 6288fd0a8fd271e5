"""Ranker backends.

``heuristic`` answers locally from :class:`SceneFacts`. ``external`` posts the
prompt and overlay to an HTTP endpoint taken from the environment and must
answer within the deadline; any timeout, transport error or unparseable reply
falls back to the heuristic answer.
"""

from __future__ import annotations

import base64
import concurrent.futures as cf
import json
import logging
import os
import urllib.request
from dataclasses import dataclass
from typing import Callable, Protocol

import numpy as np

from .heuristic import SceneFacts, heuristic_rank
from .prompt import PromptSpec, build_prompt
from .response import RankResponse, Unparseable, parse_response

log = logging.getLogger(__name__)

ENDPOINT_ENV = "LONGNAV_RANKER_URL"
TOKEN_ENV = "LONGNAV_RANKER_TOKEN"
DEFAULT_TIMEOUT_S = 3.0


@dataclass(frozen=True)
class RankRequest:
    spec: PromptSpec
    facts: SceneFacts
    prompt: str
    image: np.ndarray | None = None


class RankerBackend(Protocol):
    def rank(self, request: RankRequest) -> RankResponse: ...


class HeuristicBackend:
    name = "heuristic"

    def rank(self, request: RankRequest) -> RankResponse:
        return heuristic_rank(request.facts, request.spec)


def _ppm_bytes(img: np.ndarray) -> bytes:
    h, w = img.shape[:2]
    return f"P6\n{w} {h}\n255\n".encode() + np.ascontiguousarray(img, dtype=np.uint8).tobytes()


def http_post(url: str, payload: dict, token: str | None, timeout: float) -> str:
    req = urllib.request.Request(url, data=json.dumps(payload).encode(), method="POST")
    req.add_header("Content-Type", "application/json")
    if token:
        req.add_header("Authorization", f"Bearer {token}")
    with urllib.request.urlopen(req, timeout=timeout) as resp:
        body = resp.read().decode("utf-8", errors="replace")
    try:
        return json.loads(body)["text"]
    except (ValueError, KeyError, TypeError):
        return body


class ExternalBackend:
    """Remote ranker. Returns the raw reply parsed with repair."""

    name = "external"

    def __init__(self, url: str | None = None, token: str | None = None, timeout: float = DEFAULT_TIMEOUT_S,
                 post: Callable[[str, dict, str | None, float], str] = http_post):
        self.url = url or os.environ.get(ENDPOINT_ENV)
        self.token = token or os.environ.get(TOKEN_ENV)
        self.timeout = timeout
        self.post = post

    def rank(self, request: RankRequest) -> RankResponse:
        if not self.url:
            raise ConnectionError(f"{ENDPOINT_ENV} is not set")
        payload = {"prompt": request.prompt}
        if request.image is not None:
            payload["image_ppm_b64"] = base64.b64encode(_ppm_bytes(request.image)).decode()
        text = self.post(self.url, payload, self.token, self.timeout)
        return parse_response(text, request.spec.n)


class RankingService:
    """Runs a backend under a completion deadline, one request in flight."""

    def __init__(self, backend: RankerBackend, deadline_s: float = DEFAULT_TIMEOUT_S):
        self.backend = backend
        self.deadline_s = deadline_s
        self.fallback = HeuristicBackend()
        self._pool = cf.ThreadPoolExecutor(max_workers=1) if not isinstance(backend, HeuristicBackend) else None
        self._inflight: cf.Future | None = None
        self.fallbacks = 0

    def rank(self, spec: PromptSpec, facts: SceneFacts, image: np.ndarray | None = None) -> tuple[RankResponse, str]:
        """(response, source) where source is ``backend`` or ``fallback:<why>``."""
        request = RankRequest(spec, facts, build_prompt(spec), image)
        if self._pool is None:
            return self.backend.rank(request), "backend"
        if self._inflight is not None and not self._inflight.done():
            self.fallbacks += 1
            return self.fallback.rank(request), "fallback:busy"
        self._inflight = self._pool.submit(self.backend.rank, request)
        try:
            return self._inflight.result(timeout=self.deadline_s), "backend"
        except cf.TimeoutError:
            why = "timeout"
        except Unparseable:
            why = "unparseable"
        except Exception as exc:  # transport failures of any kind
            why = f"error:{type(exc).__name__}"
        log.warning("ranker backend failed (%s); using heuristic", why)
        self.fallbacks += 1
        return self.fallback.rank(request), f"fallback:{why}"

    def close(self) -> None:
        if self._pool is not None:
            self._pool.shutdown(wait=False, cancel_futures=True)


def make_backend(name: str, timeout: float = DEFAULT_TIMEOUT_S) -> RankerBackend:
    if name == "heuristic":
        return HeuristicBackend()
    if name == "external":
        return ExternalBackend(timeout=timeout)
    raise ValueError(f"unknown ranker backend {name!r}")
