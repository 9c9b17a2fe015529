"""Deterministic local text embeddings: hashed character trigrams.

The same text embeds to the same unit vector on any platform; similar wording
shares trigram buckets, which is all skill retrieval needs at desk scale.
"""
from __future__ import annotations

import hashlib

import numpy as np

EMBED_DIM = 256


def embed_text(text: str, dim: int = EMBED_DIM) -> np.ndarray:
    if not text or not text.strip():
        raise ValueError("cannot embed empty text")
    s = " ".join(text.lower().split())
    grams = [s[i : i + 3] for i in range(len(s) - 2)] if len(s) >= 3 else [s]
    vec = np.zeros(dim, dtype=np.float64)
    for g in grams:
        h = hashlib.sha256(g.encode()).digest()
        bucket = int.from_bytes(h[:4], "big") % dim
        sign = 1.0 if h[4] % 2 == 0 else -1.0
        vec[bucket] += sign
    norm = float(np.linalg.norm(vec))
    if norm == 0.0:
        # pathological all-cancelling input; fall back to a single bucket
        h = hashlib.sha256(s.encode()).digest()
        vec[int.from_bytes(h[:4], "big") % dim] = 1.0
        norm = 1.0
    return vec / norm


def cosine(a, b) -> float:
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    na = float(np.linalg.norm(a))
    nb = float(np.linalg.norm(b))
    if na == 0.0 or nb == 0.0:
        return 0.0
    return float(np.dot(a, b) / (na * nb))
