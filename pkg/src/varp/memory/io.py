"""Shared line-delimited store format: one header line, one JSON doc per line.

Floats are written as decimal text by the JSON encoder, so files round-trip
identically across platforms.
"""
from __future__ import annotations

import json


class LibraryError(Exception):
    pass


def dump_doc(doc: dict) -> str:
    return json.dumps(doc, sort_keys=True, separators=(",", ":"))


def write_store(path, fmt: str, version: int, docs):
    with open(path, "w") as fh:
        fh.write(dump_doc({"format": fmt, "version": version}) + "\n")
        for doc in docs:
            fh.write(dump_doc(doc) + "\n")


def read_store(path, fmt: str, version: int) -> list:
    try:
        with open(path) as fh:
            lines = fh.read().splitlines()
    except OSError as err:
        raise LibraryError(f"cannot read {path}: {err}")
    if not lines:
        raise LibraryError(f"empty store file: {path}")
    try:
        header = json.loads(lines[0])
    except json.JSONDecodeError:
        raise LibraryError(f"corrupt store header: {path}")
    if header.get("format") != fmt:
        raise LibraryError(
            f"wrong store format in {path}: {header.get('format')!r}, wanted {fmt!r}"
        )
    if header.get("version") != version:
        raise LibraryError(
            f"unsupported {fmt} version {header.get('version')!r} in {path}"
        )
    docs = []
    for i, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        try:
            docs.append(json.loads(line))
        except json.JSONDecodeError:
            raise LibraryError(f"corrupt store line {i} in {path}")
    return docs
