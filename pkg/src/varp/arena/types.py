"""Value types shared across the simulator and the agent."""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Optional


class Direction(enum.Enum):
    N = "N"
    S = "S"
    E = "E"
    W = "W"

    @property
    def delta(self) -> tuple[int, int]:
        return _DELTAS[self]


_DELTAS = {
    Direction.N: (0, -1),
    Direction.S: (0, 1),
    Direction.E: (1, 0),
    Direction.W: (-1, 0),
}


class CommandKind(enum.Enum):
    LIGHT_ATTACK = "LightAttack"
    HEAVY_ATTACK = "HeavyAttack"
    DODGE = "Dodge"
    RESTORE_HEALTH = "RestoreHealth"
    CAST_IMMOBILIZE = "CastImmobilize"
    MOVE = "Move"
    INTERACT = "Interact"


@dataclass(frozen=True)
class AtomicCommand:
    kind: CommandKind
    direction: Optional[Direction] = None

    def __post_init__(self):
        if self.kind is CommandKind.MOVE and self.direction is None:
            raise ValueError("Move requires a direction")
        if self.kind is not CommandKind.MOVE and self.direction is not None:
            raise ValueError(f"{self.kind.value} takes no direction")

    def encode(self) -> str:
        if self.kind is CommandKind.MOVE:
            return f"Move:{self.direction.value}"
        return self.kind.value

    @staticmethod
    def decode(text: str) -> "AtomicCommand":
        if text.startswith("Move:"):
            return AtomicCommand(CommandKind.MOVE, Direction(text[5:]))
        return AtomicCommand(CommandKind(text))


MAX_SEQUENCE_LEN = 32


def validate_sequence(commands) -> tuple[AtomicCommand, ...]:
    """Normalize to a tuple and enforce the length cap."""
    seq = tuple(commands)
    if len(seq) > MAX_SEQUENCE_LEN:
        raise ValueError(f"sequence too long: {len(seq)} > {MAX_SEQUENCE_LEN}")
    for c in seq:
        if not isinstance(c, AtomicCommand):
            raise TypeError(f"not an AtomicCommand: {c!r}")
    return seq


# -- commonly used commands -------------------------------------------------

LIGHT = AtomicCommand(CommandKind.LIGHT_ATTACK)
HEAVY = AtomicCommand(CommandKind.HEAVY_ATTACK)
DODGE = AtomicCommand(CommandKind.DODGE)
HEAL = AtomicCommand(CommandKind.RESTORE_HEALTH)
CAST = AtomicCommand(CommandKind.CAST_IMMOBILIZE)
INTERACT = AtomicCommand(CommandKind.INTERACT)


def move(direction: Direction) -> AtomicCommand:
    return AtomicCommand(CommandKind.MOVE, direction)


# -- attack patterns ---------------------------------------------------------


@dataclass(frozen=True)
class HitWindow:
    offset: int  # ticks after the telegraph ends
    damage: int
    reach: int  # Chebyshev cells


@dataclass(frozen=True)
class AttackPattern:
    label: str
    telegraph_ticks: int
    hit_windows: tuple[HitWindow, ...]
    recovery_ticks: int
    glyph: str  # single viewport character shown while telegraphing
    cue: str  # natural-language windup description

    def __post_init__(self):
        if self.telegraph_ticks < 1:
            raise ValueError("telegraph_ticks must be >= 1")
        if not self.hit_windows:
            raise ValueError("pattern needs at least one hit window")
        offsets = [w.offset for w in self.hit_windows]
        if offsets != sorted(offsets) or len(set(offsets)) != len(offsets):
            raise ValueError("hit window offsets must be strictly increasing")
        if len(self.glyph) != 1:
            raise ValueError("glyph must be one character")

    @property
    def last_offset(self) -> int:
        return self.hit_windows[-1].offset

    @property
    def total_ticks(self) -> int:
        return self.telegraph_ticks + self.last_offset + self.recovery_ticks

    def hit_tick(self, window: HitWindow) -> int:
        """Phase tick at which this window lands."""
        return self.telegraph_ticks + window.offset


# -- entity state ------------------------------------------------------------


@dataclass
class PlayerState:
    pos: tuple[int, int]
    hp: int
    heal_charges: int
    heavy_charge: int
    focus_progress: int
    facing: Direction
    invulnerable_until: int  # hits landing at tick <= this are evaded
    immobilize_ready_at: int


@dataclass
class EnemyState:
    archetype: str
    pos: tuple[int, int]
    hp: int
    max_hp: int
    active_label: Optional[str] = None
    phase_tick: int = 0
    frozen_until: int = -1
    next_ready_at: int = 0
    locked_label: Optional[str] = None  # when set, re-engages with only this move

    @property
    def alive(self) -> bool:
        return self.hp > 0


class Difficulty(enum.Enum):
    EASY = "Easy"
    MIDDLE = "Middle"
    HARD = "Hard"
    VERY_HARD = "VeryHard"


class TaskKind(enum.Enum):
    COMBAT = "combat"
    GATHER = "gather"
    OPEN = "open"
    NAVIGATE = "navigate"


@dataclass(frozen=True)
class TaskSpec:
    task_id: int
    name: str
    difficulty: Difficulty
    kind: TaskKind
    tick_budget: int

    def __post_init__(self):
        if not 1 <= self.task_id <= 12:
            raise ValueError("task_id must be in 1..12")


class StatusKind(enum.Enum):
    ONGOING = "Ongoing"
    SUCCESS = "Success"
    FAILURE = "Failure"


@dataclass(frozen=True)
class TaskStatus:
    kind: StatusKind
    reason: str = ""

    @property
    def ongoing(self) -> bool:
        return self.kind is StatusKind.ONGOING


ONGOING = TaskStatus(StatusKind.ONGOING)


# -- frames ------------------------------------------------------------------


@dataclass(frozen=True)
class Hud:
    hp_fraction: float
    heal_charges: int
    heavy_charge: int
    spell_ready: bool


@dataclass(frozen=True)
class Frame:
    """What the agent sees: character viewport, player hud, event notices."""

    viewport: tuple[str, ...]
    hud: Hud
    notices: tuple[str, ...]
    tick: int

    def to_dict(self) -> dict:
        return {
            "viewport": list(self.viewport),
            "hud": {
                "hp_fraction": self.hud.hp_fraction,
                "heal_charges": self.hud.heal_charges,
                "heavy_charge": self.hud.heavy_charge,
                "spell_ready": self.hud.spell_ready,
            },
            "notices": list(self.notices),
            "tick": self.tick,
        }

    @staticmethod
    def from_dict(d: dict) -> "Frame":
        hud = d["hud"]
        return Frame(
            viewport=tuple(d["viewport"]),
            hud=Hud(
                hp_fraction=hud["hp_fraction"],
                heal_charges=hud["heal_charges"],
                heavy_charge=hud["heavy_charge"],
                spell_ready=hud["spell_ready"],
            ),
            notices=tuple(d["notices"]),
            tick=d["tick"],
        )


# -- execution outcomes ------------------------------------------------------


@dataclass
class ExecOutcome:
    """Aggregate effects of executing commands against the live world."""

    ticks_elapsed: int = 0
    hp_lost: int = 0
    damage_dealt: int = 0
    hits_landed: int = 0
    hits_evaded: int = 0
    hits_taken: int = 0
    commands_run: int = 0
    events: list = field(default_factory=list)  # ordered dicts: {tag, tick, ...}

    def merge(self, other: "ExecOutcome") -> None:
        self.ticks_elapsed += other.ticks_elapsed
        self.hp_lost += other.hp_lost
        self.damage_dealt += other.damage_dealt
        self.hits_landed += other.hits_landed
        self.hits_evaded += other.hits_evaded
        self.hits_taken += other.hits_taken
        self.commands_run += other.commands_run
        self.events.extend(other.events)

    def to_dict(self) -> dict:
        return {
            "ticks_elapsed": self.ticks_elapsed,
            "hp_lost": self.hp_lost,
            "damage_dealt": self.damage_dealt,
            "hits_landed": self.hits_landed,
            "hits_evaded": self.hits_evaded,
            "hits_taken": self.hits_taken,
            "commands_run": self.commands_run,
            "events": [dict(e) for e in self.events],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ExecOutcome":
        return cls(
            ticks_elapsed=d.get("ticks_elapsed", 0),
            hp_lost=d.get("hp_lost", 0),
            damage_dealt=d.get("damage_dealt", 0),
            hits_landed=d.get("hits_landed", 0),
            hits_evaded=d.get("hits_evaded", 0),
            hits_taken=d.get("hits_taken", 0),
            commands_run=d.get("commands_run", 0),
            events=[dict(e) for e in d.get("events", [])],
        )


# canonical alias: execute_atomic returns the same shape
AtomicOutcome = ExecOutcome
