"""Model gateway: prompt bundles, structured replies, backends."""
from .embedding import EMBED_DIM, cosine, embed_text
from .oracle import ScriptedOracle
from .remote import RemoteBackend, env_api_base, env_api_key
from .replay import RecordingBackend, ReplayBackend
from .schemas import (
    SCHEMAS,
    parse_structured,
    serialize_structured,
    system_prompt,
)
from .types import (
    Backend,
    BackendConfig,
    BadReplyFormat,
    GatewayError,
    ModelReply,
    PromptBundle,
    Usage,
)


def make_backend(config: BackendConfig) -> Backend:
    """Build the backend named by the config; recording wrap is optional."""
    if config.kind == "scripted_oracle":
        backend: Backend = ScriptedOracle(config.oracle)
    elif config.kind == "remote":
        backend = RemoteBackend(config)
    elif config.kind == "replay":
        if not config.transcript_path:
            raise GatewayError("replay backend needs transcript_path")
        backend = ReplayBackend(config.transcript_path)
    else:
        raise GatewayError(f"unknown backend kind {config.kind!r}")
    if config.transcript_path and config.kind != "replay":
        from .replay import RecordingBackend

        backend = RecordingBackend(backend, config.transcript_path)
    return backend


__all__ = [
    "Backend",
    "BackendConfig",
    "BadReplyFormat",
    "EMBED_DIM",
    "GatewayError",
    "ModelReply",
    "PromptBundle",
    "RecordingBackend",
    "RemoteBackend",
    "ReplayBackend",
    "SCHEMAS",
    "ScriptedOracle",
    "Usage",
    "cosine",
    "embed_text",
    "env_api_base",
    "env_api_key",
    "make_backend",
    "parse_structured",
    "serialize_structured",
    "system_prompt",
]
