"""Gateway value types and errors."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Protocol

from ..arena.types import Frame
from ..config import OracleConfig


class GatewayError(Exception):
    """Transport-level failure (after retries) or transcript exhaustion."""


class BadReplyFormat(GatewayError):
    """Reply text did not contain a schema-valid structured object."""


@dataclass(frozen=True)
class PromptBundle:
    schema_id: str
    system_text: str
    user_segments: tuple[str, ...]
    frames: tuple[Frame, ...] = ()
    temperature: float = 0.0


@dataclass(frozen=True)
class Usage:
    request_count: int = 1


@dataclass(frozen=True)
class ModelReply:
    raw_text: str
    usage: Usage = field(default_factory=Usage)


class Backend(Protocol):
    def complete(self, bundle: PromptBundle) -> ModelReply: ...


@dataclass(frozen=True)
class BackendConfig:
    kind: str = "scripted_oracle"  # scripted_oracle | remote | replay
    model: str = "desk-vlm"
    api_base: Optional[str] = None
    api_key: Optional[str] = None
    timeout: float = 30.0
    max_attempts: int = 4
    backoff_base: float = 0.5
    transcript_path: Optional[str] = None
    oracle: OracleConfig = field(default_factory=OracleConfig)

    def __post_init__(self):
        if self.kind not in ("scripted_oracle", "remote", "replay"):
            raise ValueError(f"unknown backend kind: {self.kind}")
