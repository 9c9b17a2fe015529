"""Raw input events and their translation to atomic commands.

Recorded play is a stream of device events. Only key_down and mouse_button
events begin commands; key_up tracks hold state and mouse_move is ignored.
A key_down repeating within the collapse window while the key is still held
is OS auto-repeat, not a second command. Mouse clicks nearly back to back
collapse the same way.
"""
from __future__ import annotations

from dataclasses import dataclass

from ..arena.types import (
    CAST,
    DODGE,
    HEAL,
    HEAVY,
    INTERACT,
    LIGHT,
    Direction,
    move,
)

EVENT_KINDS = ("key_down", "key_up", "mouse_button", "mouse_move")

COLLAPSE_WINDOW = 2


@dataclass(frozen=True)
class InputEvent:
    tick: int
    kind: str
    code: str

    def __post_init__(self):
        if self.kind not in EVENT_KINDS:
            raise ValueError(f"unknown event kind {self.kind!r}")

    def to_dict(self):
        return {"tick": self.tick, "kind": self.kind, "code": self.code}

    @classmethod
    def from_dict(cls, doc):
        return cls(tick=doc["tick"], kind=doc["kind"], code=doc["code"])


KEYMAP = {
    "W": move(Direction.N),
    "A": move(Direction.W),
    "S": move(Direction.S),
    "D": move(Direction.E),
    "mouse_left": LIGHT,
    "K": HEAVY,
    "Space": DODGE,
    "R": HEAL,
    "1": CAST,
    "E": INTERACT,
}


def _as_event(ev) -> InputEvent:
    if isinstance(ev, InputEvent):
        return ev
    return InputEvent.from_dict(ev)


class EventCollapser:
    """Incremental collapse: feed events one at a time, get commands back.

    Live sessions and file replay share this so they agree on which events
    initiate commands. dropped counts command-initiating events whose code
    has no mapping.
    """

    def __init__(self, keymap=KEYMAP):
        self._keymap = keymap
        self._held: dict[str, int] = {}  # code -> last key_down tick while held
        self._last_click: dict[str, int] = {}
        self.dropped = 0

    def feed(self, ev: InputEvent):
        if ev.kind == "key_up":
            self._held.pop(ev.code, None)
            return None
        if ev.kind == "mouse_move":
            return None
        cmd = self._keymap.get(ev.code)
        if ev.kind == "key_down":
            repeat = (
                ev.code in self._held
                and ev.tick - self._held[ev.code] <= COLLAPSE_WINDOW
            )
            self._held[ev.code] = ev.tick
            if repeat:
                return None
        else:  # mouse_button
            prev = self._last_click.get(ev.code)
            self._last_click[ev.code] = ev.tick
            if prev is not None and ev.tick - prev <= COLLAPSE_WINDOW:
                return None
        if cmd is None:
            self.dropped += 1
            return None
        return cmd


def collapse_events(events, keymap=KEYMAP):
    """Collapse a full stream; returns (pairs, dropped_count) where each pair
    is (initiating_event, command)."""
    collapser = EventCollapser(keymap)
    pairs = []
    for raw in events:
        ev = _as_event(raw)
        cmd = collapser.feed(ev)
        if cmd is not None:
            pairs.append((ev, cmd))
    return pairs, collapser.dropped


def events_to_atomics(events, keymap=KEYMAP):
    """Translate an event stream to commands; returns (sequence, dropped_count)."""
    pairs, dropped = collapse_events(events, keymap)
    return [cmd for _, cmd in pairs], dropped
