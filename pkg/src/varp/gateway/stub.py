"""In-process HTTP stub that mimics the hosted backend.

Validates every request against the bundled wire schema, can be scripted to
fail with specific status codes before succeeding, and keeps the payloads it
saw so tests can assert on them. Embeddings are served from the local hashed
trigram embedder, so retrieval behaves the same against the stub as offline.
"""
from __future__ import annotations

import json
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from importlib import resources as importlib_resources

import jsonschema

from .embedding import embed_text

with importlib_resources.files("varp.gateway.resources").joinpath(
    "wire_schema.json"
).open() as _fh:
    WIRE_SCHEMA = json.load(_fh)


def validate_wire(kind: str, payload: dict):
    jsonschema.validate(payload, WIRE_SCHEMA[kind])


def _default_responder(payload: dict) -> str:
    return json.dumps({"echo": True})


class StubBackendServer:
    """chat/completions + embeddings over loopback, scriptable failures."""

    def __init__(self, responder=None, fail_statuses=()):
        self.responder = responder or _default_responder
        self.fail_statuses = list(fail_statuses)
        self.requests = []
        self._lock = threading.Lock()
        stub = self

        class Handler(BaseHTTPRequestHandler):
            def log_message(self, *args):
                pass

            def do_POST(self):
                length = int(self.headers.get("Content-Length", 0))
                try:
                    payload = json.loads(self.rfile.read(length))
                except json.JSONDecodeError:
                    self._send(400, {"error": "invalid json"})
                    return
                with stub._lock:
                    stub.requests.append({
                        "path": self.path,
                        "payload": payload,
                        "authorization": self.headers.get("Authorization"),
                    })
                    scripted = stub.fail_statuses.pop(0) if stub.fail_statuses else None
                if scripted is not None:
                    self._send(scripted, {"error": f"scripted {scripted}"})
                    return
                if self.path.endswith("/chat/completions"):
                    try:
                        validate_wire("chat_completions", payload)
                    except jsonschema.ValidationError as err:
                        self._send(400, {"error": str(err).splitlines()[0]})
                        return
                    text = stub.responder(payload)
                    self._send(200, {
                        "id": "stub-1",
                        "object": "chat.completion",
                        "choices": [{
                            "index": 0,
                            "message": {"role": "assistant", "content": text},
                        }],
                    })
                elif self.path.endswith("/embeddings"):
                    try:
                        validate_wire("embeddings", payload)
                    except jsonschema.ValidationError as err:
                        self._send(400, {"error": str(err).splitlines()[0]})
                        return
                    data = [
                        {"index": i, "embedding": list(embed_text(text))}
                        for i, text in enumerate(payload["input"])
                    ]
                    self._send(200, {"object": "list", "data": data})
                else:
                    self._send(404, {"error": "unknown path"})

            def _send(self, status: int, doc: dict):
                body = json.dumps(doc).encode()
                self.send_response(status)
                self.send_header("Content-Type", "application/json")
                self.send_header("Content-Length", str(len(body)))
                self.end_headers()
                self.wfile.write(body)

        self._server = ThreadingHTTPServer(("127.0.0.1", 0), Handler)
        self._thread = threading.Thread(target=self._server.serve_forever, daemon=True)

    @property
    def base_url(self) -> str:
        host, port = self._server.server_address
        return f"http://{host}:{port}/v1"

    def __enter__(self):
        self._thread.start()
        return self

    def __exit__(self, *exc):
        self._server.shutdown()
        self._server.server_close()
        return False
