"""HTTP backend speaking the familiar chat-completions wire shape.

Frames travel as data-URI PNG image parts so any hosted vision model can be
dropped in. Transient failures (timeouts, 429, 5xx) retry with exponential
backoff; the reply's usage carries the attempt count so callers can see how
many requests an answer actually cost.
"""
from __future__ import annotations

import base64
import os
import time

import httpx

from ..arena.render import frame_to_text, render_png
from .schemas import system_prompt
from .types import BackendConfig, GatewayError, ModelReply, PromptBundle, Usage

RETRYABLE_STATUS = {429} | set(range(500, 600))


def env_api_base() -> str:
    return os.environ.get("VARP_API_BASE", "http://127.0.0.1:8787/v1")


def env_api_key() -> str:
    return os.environ.get("VARP_API_KEY", "")


def build_messages(bundle: PromptBundle, include_images: bool = True) -> list:
    content = []
    for frame in bundle.frames:
        content.append({"type": "text", "text": frame_to_text(frame)})
        if include_images:
            b64 = base64.b64encode(render_png(frame)).decode("ascii")
            content.append({
                "type": "image_url",
                "image_url": {"url": f"data:image/png;base64,{b64}"},
            })
    for seg in bundle.user_segments:
        content.append({"type": "text", "text": seg})
    return [
        {"role": "system", "content": bundle.system_text or system_prompt(bundle.schema_id)},
        {"role": "user", "content": content},
    ]


class RemoteBackend:
    def __init__(self, config: BackendConfig | None = None, client: httpx.Client | None = None):
        self.config = config or BackendConfig(kind="remote")
        base = self.config.api_base or env_api_base()
        key = self.config.api_key or env_api_key()
        headers = {"Authorization": f"Bearer {key}"} if key else {}
        self._client = client or httpx.Client(
            base_url=base, headers=headers, timeout=self.config.timeout
        )
        self._sleep = time.sleep

    def close(self):
        self._client.close()

    def _post_with_retry(self, path: str, payload: dict) -> tuple[dict, int]:
        attempts = 0
        last_err = None
        while attempts < self.config.max_attempts:
            attempts += 1
            try:
                resp = self._client.post(path, json=payload)
            except (httpx.TimeoutException, httpx.TransportError) as err:
                last_err = err
                if attempts < self.config.max_attempts:
                    self._sleep(self.config.backoff_base * 2 ** (attempts - 1))
                continue
            if resp.status_code in RETRYABLE_STATUS:
                last_err = GatewayError(f"status {resp.status_code}")
                if attempts < self.config.max_attempts:
                    self._sleep(self.config.backoff_base * 2 ** (attempts - 1))
                continue
            if resp.status_code != 200:
                raise GatewayError(f"backend returned status {resp.status_code}")
            return resp.json(), attempts
        raise GatewayError(f"backend unreachable after {attempts} attempts: {last_err}")

    def complete(self, bundle: PromptBundle) -> ModelReply:
        payload = {
            "model": self.config.model,
            "messages": build_messages(bundle),
            "temperature": bundle.temperature,
        }
        doc, attempts = self._post_with_retry("/chat/completions", payload)
        try:
            text = doc["choices"][0]["message"]["content"]
        except (KeyError, IndexError, TypeError) as err:
            raise GatewayError(f"malformed completion payload: {err}")
        return ModelReply(raw_text=text, usage=Usage(request_count=attempts))

    def embed(self, texts: list) -> list:
        payload = {"model": self.config.model, "input": list(texts)}
        doc, _ = self._post_with_retry("/embeddings", payload)
        try:
            rows = sorted(doc["data"], key=lambda r: r["index"])
            return [row["embedding"] for row in rows]
        except (KeyError, TypeError) as err:
            raise GatewayError(f"malformed embeddings payload: {err}")
