"""Action library: named command sequences retrieved by annotation similarity."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..arena.types import AtomicCommand
from ..gateway.embedding import EMBED_DIM, embed_text
from .io import LibraryError, read_store, write_store

ACTIONS_FORMAT = "varp-actions"
ACTIONS_VERSION = 1

PROVENANCES = ("predefined", "soag", "human_guided")


@dataclass
class ActionStats:
    uses: int = 0
    successes: int = 0
    total_damage_dealt: float = 0.0
    total_hp_lost: float = 0.0

    def to_dict(self):
        return {
            "uses": self.uses,
            "successes": self.successes,
            "total_damage_dealt": self.total_damage_dealt,
            "total_hp_lost": self.total_hp_lost,
        }


@dataclass
class ActionEntry:
    name: str
    annotation: str
    body: tuple
    provenance: str
    annotation_embedding: np.ndarray = field(repr=False, compare=False)
    # (archetype, action label) for counter entries, else None
    key: tuple | None = None
    stats: ActionStats = field(default_factory=ActionStats)
    score_history: list = field(default_factory=list)

    def __post_init__(self):
        if not self.annotation.strip():
            raise LibraryError(f"action {self.name!r} has an empty annotation")
        if self.provenance not in PROVENANCES:
            raise LibraryError(f"unknown provenance {self.provenance!r}")
        if len(self.annotation_embedding) != EMBED_DIM:
            raise LibraryError(
                f"embedding dimension {len(self.annotation_embedding)} != {EMBED_DIM}"
            )
        self.body = tuple(self.body)

    def to_dict(self):
        return {
            "name": self.name,
            "annotation": self.annotation,
            "body": [cmd.encode() for cmd in self.body],
            "provenance": self.provenance,
            "key": list(self.key) if self.key else None,
            "embedding": [float(x) for x in self.annotation_embedding],
            "stats": self.stats.to_dict(),
            "score_history": [float(s) for s in self.score_history],
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "ActionEntry":
        return cls(
            name=doc["name"],
            annotation=doc["annotation"],
            body=tuple(AtomicCommand.decode(s) for s in doc["body"]),
            provenance=doc["provenance"],
            annotation_embedding=np.array(doc["embedding"], dtype=np.float64),
            key=tuple(doc["key"]) if doc.get("key") else None,
            stats=ActionStats(**doc.get("stats", {})),
            score_history=list(doc.get("score_history", [])),
        )


def build_entry(name, body, annotation, provenance="predefined", key=None) -> ActionEntry:
    return ActionEntry(
        name=name,
        annotation=annotation,
        body=tuple(body),
        provenance=provenance,
        annotation_embedding=embed_text(annotation),
        key=key,
    )


class ActionLibrary:
    def __init__(self):
        self._entries: dict[str, ActionEntry] = {}

    def __len__(self):
        return len(self._entries)

    def __contains__(self, name):
        return name in self._entries

    def get(self, name: str) -> ActionEntry:
        try:
            return self._entries[name]
        except KeyError:
            raise LibraryError(f"no action named {name!r}")

    def entries(self) -> list:
        return list(self._entries.values())

    def names(self) -> list:
        return list(self._entries)

    def counter_for(self, archetype: str, label: str) -> ActionEntry | None:
        for entry in self._entries.values():
            if entry.key == (archetype, label):
                return entry
        return None

    def add_action(self, entry: ActionEntry):
        if entry.name in self._entries:
            raise LibraryError(f"duplicate action name {entry.name!r}")
        self._entries[entry.name] = entry

    def update_action(self, name, new_body=None, new_annotation=None,
                      stats_delta=None, score=None):
        entry = self.get(name)
        if new_body is not None:
            entry.body = tuple(new_body)
        if new_annotation is not None and new_annotation != entry.annotation:
            if not new_annotation.strip():
                raise LibraryError(f"action {name!r} given an empty annotation")
            entry.annotation = new_annotation
            entry.annotation_embedding = embed_text(new_annotation)
        if stats_delta:
            entry.stats.uses += stats_delta.get("uses", 0)
            entry.stats.successes += stats_delta.get("successes", 0)
            entry.stats.total_damage_dealt += stats_delta.get("total_damage_dealt", 0.0)
            entry.stats.total_hp_lost += stats_delta.get("total_hp_lost", 0.0)
        if score is not None:
            entry.score_history.append(float(score))

    def curate_skills(self, query_embedding, k: int = 5) -> list:
        """Top-k entries by cosine similarity; ties broken by ascending name."""
        if k < 1:
            raise ValueError("k must be >= 1")
        if not self._entries:
            return []
        q = np.asarray(query_embedding, dtype=np.float64)
        entries = list(self._entries.values())
        mat = np.stack([e.annotation_embedding for e in entries])
        # not mat @ q: BLAS gemv may accumulate identical rows differently
        # depending on their block position, and unequal sims for equal
        # annotations would turn the name tie-break into noise
        sims = (mat * q).sum(axis=1)
        order = sorted(range(len(entries)), key=lambda i: (-sims[i], entries[i].name))
        return [(entries[i], float(sims[i])) for i in order[:k]]

    def persist(self, path):
        write_store(path, ACTIONS_FORMAT, ACTIONS_VERSION,
                    (e.to_dict() for e in self._entries.values()))

    @classmethod
    def load(cls, path) -> "ActionLibrary":
        lib = cls()
        for doc in read_store(path, ACTIONS_FORMAT, ACTIONS_VERSION):
            lib.add_action(ActionEntry.from_dict(doc))
        return lib
