"""Structured-reply schema registry and parsing.

Replies are free text containing one JSON object; parse_structured extracts
the first balanced object and validates it against the registered schema.
Schemas ship as a versioned resource file.
"""
from __future__ import annotations

import json
import pathlib

from .types import BadReplyFormat

_RES = pathlib.Path(__file__).parent / "resources"

_REGISTRY = json.loads((_RES / "schemas.json").read_text())
SCHEMAS_VERSION = _REGISTRY["version"]
SCHEMAS: dict[str, dict] = _REGISTRY["schemas"]

_PROMPTS = json.loads((_RES / "prompts.json").read_text())
PROMPTS_VERSION = _PROMPTS["version"]


def system_prompt(schema_id: str) -> str:
    try:
        return _PROMPTS["system"][schema_id]
    except KeyError:
        raise KeyError(f"no prompt template for schema {schema_id!r}") from None


_TYPE_CHECKS = {
    "bool": lambda v: isinstance(v, bool),
    "str": lambda v: isinstance(v, str),
    "int": lambda v: isinstance(v, int) and not isinstance(v, bool),
    "list": lambda v: isinstance(v, list),
    "object": lambda v: isinstance(v, dict),
}


def _first_json_object(text: str) -> dict:
    start = text.find("{")
    while start != -1:
        depth = 0
        in_str = False
        esc = False
        for i in range(start, len(text)):
            ch = text[i]
            if in_str:
                if esc:
                    esc = False
                elif ch == "\\":
                    esc = True
                elif ch == '"':
                    in_str = False
                continue
            if ch == '"':
                in_str = True
            elif ch == "{":
                depth += 1
            elif ch == "}":
                depth -= 1
                if depth == 0:
                    candidate = text[start : i + 1]
                    try:
                        doc = json.loads(candidate)
                    except json.JSONDecodeError:
                        break
                    if isinstance(doc, dict):
                        return doc
                    break
        start = text.find("{", start + 1)
    raise BadReplyFormat("no JSON object found in reply")


def parse_structured(schema_id: str, raw_text: str) -> dict:
    """Extract and validate the structured payload of a reply."""
    if schema_id not in SCHEMAS:
        raise KeyError(f"unknown schema {schema_id!r}")
    doc = _first_json_object(raw_text)
    schema = SCHEMAS[schema_id]
    for key in schema["required"]:
        if key not in doc:
            raise BadReplyFormat(f"{schema_id}: missing field {key!r}")
    for key, tname in schema.get("types", {}).items():
        if key in doc and not _TYPE_CHECKS[tname](doc[key]):
            raise BadReplyFormat(f"{schema_id}: field {key!r} is not {tname}")
    for key, allowed in schema.get("enums", {}).items():
        if key in doc and doc[key] not in allowed:
            raise BadReplyFormat(f"{schema_id}: field {key!r} must be one of {allowed}")
    return doc


def serialize_structured(doc: dict) -> str:
    """Canonical text form; parse_structured round-trips it."""
    return json.dumps(doc, sort_keys=True, separators=(",", ":"))
