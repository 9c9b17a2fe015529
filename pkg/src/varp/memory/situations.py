"""Situation library: per-step records of what the agent saw, judged, and did."""
from __future__ import annotations

from dataclasses import dataclass, field

from ..arena.types import ExecOutcome, Frame
from .io import LibraryError, read_store, write_store

SITUATIONS_FORMAT = "varp-situations"
SITUATIONS_VERSION = 1


@dataclass(frozen=True)
class GatheredInfo:
    """Everything read off the newest frame: notices, entities, hud gauges."""

    notices: tuple = ()
    entities: tuple = ()
    hud_reading: dict = field(default_factory=dict)

    def to_dict(self):
        return {
            "notices": list(self.notices),
            "entities": [dict(e) for e in self.entities],
            "hud_reading": dict(self.hud_reading),
        }

    @classmethod
    def from_dict(cls, doc):
        return cls(
            notices=tuple(doc.get("notices", ())),
            entities=tuple(doc.get("entities", ())),
            hud_reading=dict(doc.get("hud_reading", {})),
        )


@dataclass(frozen=True)
class ReflectionVerdict:
    last_action_succeeded: bool
    task_complete: bool
    failure_reason: str = ""

    def __post_init__(self):
        # a failed action must say why; a successful one must not
        if self.last_action_succeeded and self.failure_reason:
            raise ValueError("failure_reason set on a successful action")
        if not self.last_action_succeeded and not self.failure_reason:
            raise ValueError("failed action needs a failure_reason")

    def to_dict(self):
        return {
            "last_action_succeeded": self.last_action_succeeded,
            "task_complete": self.task_complete,
            "failure_reason": self.failure_reason,
        }

    @classmethod
    def from_dict(cls, doc):
        return cls(
            last_action_succeeded=doc["last_action_succeeded"],
            task_complete=doc["task_complete"],
            failure_reason=doc.get("failure_reason", ""),
        )


@dataclass
class SituationRecord:
    step_index: int
    task_id: int
    keyframes: tuple
    gathered: GatheredInfo
    reflection: ReflectionVerdict
    task_description: str
    chosen_action: str
    outcome: ExecOutcome

    def to_dict(self):
        return {
            "step_index": self.step_index,
            "task_id": self.task_id,
            "keyframes": [f.to_dict() for f in self.keyframes],
            "gathered": self.gathered.to_dict(),
            "reflection": self.reflection.to_dict(),
            "task_description": self.task_description,
            "chosen_action": self.chosen_action,
            "outcome": self.outcome.to_dict(),
        }

    @classmethod
    def from_dict(cls, doc):
        return cls(
            step_index=doc["step_index"],
            task_id=doc["task_id"],
            keyframes=tuple(Frame.from_dict(f) for f in doc["keyframes"]),
            gathered=GatheredInfo.from_dict(doc["gathered"]),
            reflection=ReflectionVerdict.from_dict(doc["reflection"]),
            task_description=doc["task_description"],
            chosen_action=doc["chosen_action"],
            outcome=ExecOutcome.from_dict(doc["outcome"]),
        )


class SituationLibrary:
    def __init__(self):
        self._records: list[SituationRecord] = []

    def __len__(self):
        return len(self._records)

    def records(self) -> list:
        return list(self._records)

    def append_situation(self, record: SituationRecord):
        if self._records and record.step_index <= self._records[-1].step_index:
            raise LibraryError(
                f"step_index {record.step_index} not after "
                f"{self._records[-1].step_index}"
            )
        self._records.append(record)

    def recent_frames(self, m: int = 4) -> list:
        """Last m keyframes across all records, oldest first."""
        if m <= 0:
            return []
        frames = []
        for rec in self._records:
            frames.extend(rec.keyframes)
        return frames[-m:]

    def persist(self, path):
        write_store(path, SITUATIONS_FORMAT, SITUATIONS_VERSION,
                    (r.to_dict() for r in self._records))

    @classmethod
    def load(cls, path) -> "SituationLibrary":
        lib = cls()
        for doc in read_store(path, SITUATIONS_FORMAT, SITUATIONS_VERSION):
            lib.append_situation(SituationRecord.from_dict(doc))
        return lib
