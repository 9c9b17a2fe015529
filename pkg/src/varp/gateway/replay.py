"""Record-and-replay wrappers around any backend.

A recording wraps a live backend and appends one JSON line per call; a replay
serves those lines back in order, verifying that each request matches the one
originally answered. Useful both for debugging a run offline and for pinning
tests to a known conversation.
"""
from __future__ import annotations

import hashlib
import json

from .types import Backend, GatewayError, ModelReply, PromptBundle, Usage

TRANSCRIPT_FORMAT = "varp-transcript"
TRANSCRIPT_VERSION = 1


def bundle_digest(bundle: PromptBundle) -> str:
    doc = {
        "schema_id": bundle.schema_id,
        "user_segments": list(bundle.user_segments),
        "frames": [f.to_dict() for f in bundle.frames],
    }
    blob = json.dumps(doc, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


class RecordingBackend:
    """Pass-through that logs every exchange to a transcript file."""

    def __init__(self, inner: Backend, path):
        self.inner = inner
        self.path = path
        header = {"format": TRANSCRIPT_FORMAT, "version": TRANSCRIPT_VERSION}
        with open(path, "w") as fh:
            fh.write(json.dumps(header) + "\n")

    def complete(self, bundle: PromptBundle) -> ModelReply:
        reply = self.inner.complete(bundle)
        entry = {
            "schema_id": bundle.schema_id,
            "digest": bundle_digest(bundle),
            "raw_text": reply.raw_text,
            "request_count": reply.usage.request_count,
        }
        with open(self.path, "a") as fh:
            fh.write(json.dumps(entry) + "\n")
        return reply


class ReplayBackend:
    """Serves a recorded transcript back, call for call."""

    def __init__(self, path, strict: bool = True):
        self.path = path
        self.strict = strict
        with open(path) as fh:
            lines = [line for line in fh.read().splitlines() if line.strip()]
        if not lines:
            raise GatewayError(f"empty transcript: {path}")
        header = json.loads(lines[0])
        if header.get("format") != TRANSCRIPT_FORMAT:
            raise GatewayError(f"not a transcript file: {path}")
        if header.get("version") != TRANSCRIPT_VERSION:
            raise GatewayError(f"unsupported transcript version {header.get('version')}")
        self.entries = [json.loads(line) for line in lines[1:]]
        self.cursor = 0

    def complete(self, bundle: PromptBundle) -> ModelReply:
        if self.cursor >= len(self.entries):
            raise GatewayError(
                f"transcript exhausted after {len(self.entries)} calls"
            )
        entry = self.entries[self.cursor]
        self.cursor += 1
        if entry["schema_id"] != bundle.schema_id:
            raise GatewayError(
                f"transcript mismatch at call {self.cursor}: recorded "
                f"{entry['schema_id']!r}, requested {bundle.schema_id!r}"
            )
        if self.strict and entry.get("digest") not in (None, bundle_digest(bundle)):
            raise GatewayError(
                f"transcript mismatch at call {self.cursor}: request diverged "
                f"from the recorded one"
            )
        return ModelReply(
            raw_text=entry["raw_text"],
            usage=Usage(request_count=entry.get("request_count", 1)),
        )
