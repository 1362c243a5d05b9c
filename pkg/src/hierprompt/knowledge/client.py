"""Chat-completion client with bounded retries and an on-disk answer cache."""

from __future__ import annotations

import hashlib
import logging
import os
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Protocol

import requests

from ..errors import ClientError, ConfigError

log = logging.getLogger(__name__)

RETRYABLE_STATUS = {429, 500, 502, 503, 504}


class LlmClient(Protocol):
    def ask(self, question: str) -> str: ...

    def ask_many(self, questions: list[str]) -> list[str]: ...


class LiveLlmClient:
    """POSTs OpenAI-style chat completions to `endpoint`.

    Transient failures are retried with exponential backoff; answers are
    cached on disk keyed by (model, sha256(question)) so reruns are free.
    """

    def __init__(self, endpoint: str, model: str, api_key: str | None = None,
                 timeout: float = 60.0, attempts: int = 3,
                 cache_dir: str | Path | None = None,
                 max_concurrency: int = 4,
                 session: requests.Session | None = None,
                 backoff_base: float = 1.0):
        if not endpoint:
            raise ConfigError("live client requires an endpoint URL")
        self.endpoint = endpoint
        self.model = model
        self.api_key = api_key
        self.timeout = timeout
        self.attempts = attempts
        self.cache_dir = Path(cache_dir) if cache_dir else None
        self.max_concurrency = max(1, max_concurrency)
        self.session = session or requests.Session()
        self.backoff_base = backoff_base

    # -- cache ---------------------------------------------------------------

    def _cache_path(self, question: str) -> Path | None:
        if self.cache_dir is None:
            return None
        key = hashlib.sha256(question.encode("utf-8")).hexdigest()
        safe_model = self.model.replace("/", "_")
        return self.cache_dir / safe_model / f"{key}.txt"

    # -- request -------------------------------------------------------------

    def ask(self, question: str) -> str:
        cache = self._cache_path(question)
        if cache is not None and cache.exists():
            return cache.read_text(encoding="utf-8")
        answer = self._request(question)
        if cache is not None:
            cache.parent.mkdir(parents=True, exist_ok=True)
            cache.write_text(answer, encoding="utf-8")
        return answer

    def ask_many(self, questions: list[str]) -> list[str]:
        """Concurrent asks; results come back in question order."""
        if len(questions) <= 1 or self.max_concurrency == 1:
            return [self.ask(q) for q in questions]
        with ThreadPoolExecutor(max_workers=self.max_concurrency) as pool:
            return list(pool.map(self.ask, questions))

    def _request(self, question: str) -> str:
        headers = {"Content-Type": "application/json"}
        if self.api_key:
            headers["Authorization"] = f"Bearer {self.api_key}"
        body = {
            "model": self.model,
            "messages": [{"role": "user", "content": question}],
        }
        last_error: Exception | None = None
        for attempt in range(self.attempts):
            if attempt:
                time.sleep(self.backoff_base * 2 ** (attempt - 1))
            try:
                resp = self.session.post(self.endpoint, json=body,
                                         headers=headers, timeout=self.timeout)
            except requests.RequestException as e:
                last_error = e
                log.warning("request failed (attempt %d/%d): %s",
                            attempt + 1, self.attempts, e)
                continue
            if resp.status_code in RETRYABLE_STATUS:
                last_error = ClientError(f"HTTP {resp.status_code}")
                log.warning("retryable status %d (attempt %d/%d)",
                            resp.status_code, attempt + 1, self.attempts)
                continue
            if resp.status_code != 200:
                raise ClientError(
                    f"HTTP {resp.status_code} from {self.endpoint}: "
                    f"{resp.text[:200]}")
            try:
                return resp.json()["choices"][0]["message"]["content"]
            except (KeyError, IndexError, TypeError, ValueError) as e:
                raise ClientError(f"malformed completion response: {e}") from e
        raise ClientError(
            f"request failed after {self.attempts} attempts: {last_error}")


def client_from_env(cache_dir: str | Path | None = None,
                    max_concurrency: int = 4) -> LiveLlmClient:
    """Build a live client from LLM_ENDPOINT / LLM_MODEL / LLM_API_KEY."""
    endpoint = os.environ.get("LLM_ENDPOINT", "")
    if not endpoint:
        raise ConfigError("LLM_ENDPOINT is not set; use --mock or export it")
    return LiveLlmClient(
        endpoint=endpoint,
        model=os.environ.get("LLM_MODEL", "chatglm"),
        api_key=os.environ.get("LLM_API_KEY"),
        cache_dir=cache_dir,
        max_concurrency=max_concurrency,
    )
