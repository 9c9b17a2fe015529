"""Recorded play sessions: line-delimited files that replay deterministically.

A session file is a store header, one session-header line, then event and
frame lines in tick order, closed by an end line carrying the terminal status.
Frames double as integrity checkpoints: replaying the events must reproduce
every recorded frame and the recorded terminal status, or the file has been
tampered with (or the simulator changed under it).
"""
from __future__ import annotations

from dataclasses import dataclass

from ..arena.render import render_frame
from ..arena.types import Frame, StatusKind, TaskStatus
from ..arena.world import execute_atomic, new_world, task_status
from ..config import DEFAULT_TUNING
from ..memory.guided import HumanGuidedLibrary, HumanGuidedRecord
from ..memory.io import read_store, write_store
from .events import KEYMAP, InputEvent, collapse_events

SESSION_FORMAT = "varp-session"
SESSION_VERSION = 1

COMMAND_EVENT_KINDS = ("key_down", "mouse_button")


class SessionError(Exception):
    pass


class IntegrityError(SessionError):
    def __init__(self, message: str, tick: int):
        super().__init__(message)
        self.tick = tick


@dataclass(frozen=True)
class SessionHeader:
    session_id: str
    task_id: int
    seed: int
    player_tag: str
    clean: bool
    created_at: str

    def to_dict(self):
        return {
            "session_id": self.session_id,
            "task_id": self.task_id,
            "seed": self.seed,
            "player_tag": self.player_tag,
            "clean": self.clean,
            "created_at": self.created_at,
        }

    @classmethod
    def from_dict(cls, doc):
        return cls(
            session_id=doc["session_id"],
            task_id=doc["task_id"],
            seed=doc["seed"],
            player_tag=doc["player_tag"],
            clean=doc["clean"],
            created_at=doc["created_at"],
        )


class SessionRecorder:
    """Accumulates one session in tick order and writes it on finish."""

    def __init__(self, header: SessionHeader):
        self.header = header
        self._lines = [{"kind": "header", **header.to_dict()}]
        self._last_tick = -1
        self._last_event_tick = -1

    def add_event(self, event: InputEvent):
        if event.tick < self._last_tick:
            raise SessionError(
                f"event at tick {event.tick} after line at tick {self._last_tick}"
            )
        if event.kind in COMMAND_EVENT_KINDS and event.tick <= self._last_event_tick:
            raise SessionError(
                f"command events must have increasing ticks (tick {event.tick})"
            )
        if event.kind in COMMAND_EVENT_KINDS:
            self._last_event_tick = event.tick
        self._last_tick = event.tick
        self._lines.append({"kind": "event", "tick": event.tick,
                            "event": event.to_dict()})

    def add_frame(self, frame: Frame):
        if frame.tick < self._last_tick:
            raise SessionError(
                f"frame at tick {frame.tick} after line at tick {self._last_tick}"
            )
        self._last_tick = frame.tick
        self._lines.append({"kind": "frame", "tick": frame.tick,
                            "frame": frame.to_dict()})

    def finish(self, status: TaskStatus, tick: int, path):
        self._lines.append({
            "kind": "end", "tick": tick,
            "status": status.kind.value, "reason": status.reason,
        })
        write_store(path, SESSION_FORMAT, SESSION_VERSION, self._lines)
        return path


def record_session(events, frames, header: SessionHeader, status: TaskStatus,
                   final_tick: int, path):
    """Convenience wrapper: interleave pre-collected streams by tick."""
    rec = SessionRecorder(header)
    lines = [("event", ev.tick, ev) for ev in events]
    lines += [("frame", f.tick, f) for f in frames]
    # frames precede events at the same tick: the player saw it, then acted
    lines.sort(key=lambda x: (x[1], x[0] == "event"))
    for kind, _, payload in lines:
        if kind == "event":
            rec.add_event(payload)
        else:
            rec.add_frame(payload)
    return rec.finish(status, final_tick, path)


def load_session(path):
    docs = read_store(path, SESSION_FORMAT, SESSION_VERSION)
    if not docs or docs[0].get("kind") != "header":
        raise SessionError(f"session {path} is missing its header line")
    header = SessionHeader.from_dict(docs[0])
    body = docs[1:]
    end = None
    if body and body[-1].get("kind") == "end":
        end = body.pop()
    return header, body, end


@dataclass
class ReplayResult:
    status: TaskStatus
    ticks: int
    commands_run: int


def replay_session(path, tuning=DEFAULT_TUNING) -> ReplayResult:
    """Re-execute a session and verify it reproduces its own recording.

    Frames at tick t were rendered before the command recorded at tick t, so
    each checkpoint compares the world after all commands strictly before it.
    """
    header, body, end = load_session(path)
    world = new_world(header.task_id, header.seed, tuning)
    events = [InputEvent.from_dict(d["event"]) for d in body
              if d["kind"] == "event"]
    pairs, _ = collapse_events(events, KEYMAP)
    index = 0
    commands = 0

    def run_before(limit_tick):
        nonlocal index, commands
        while index < len(pairs) and pairs[index][0].tick < limit_tick:
            ev, cmd = pairs[index]
            if world.tick != ev.tick:
                raise IntegrityError(
                    f"command at recorded tick {ev.tick} arrived at world tick "
                    f"{world.tick}", tick=ev.tick,
                )
            execute_atomic(world, cmd)
            commands += 1
            index += 1

    for doc in body:
        if doc["kind"] != "frame":
            continue
        run_before(doc["tick"])
        got = render_frame(world)
        if got != Frame.from_dict(doc["frame"]):
            raise IntegrityError(
                f"frame mismatch at tick {doc['tick']}", tick=doc["tick"]
            )
    run_before(10**9)

    status = task_status(world)
    if end is not None:
        if status.kind.value != end["status"] or status.reason != end.get("reason"):
            raise IntegrityError(
                f"terminal status {status.kind.value}({status.reason}) does not "
                f"match recorded {end['status']}({end.get('reason')})",
                tick=end.get("tick", world.tick),
            )
    if status.ongoing:
        status = TaskStatus(StatusKind.FAILURE, "timeout")
    return ReplayResult(status=status, ticks=world.tick, commands_run=commands)


def build_guided_library(paths, clean_only: bool = True) -> HumanGuidedLibrary:
    """One guided record per command-initiating event, paired with the frame
    the player was looking at when the input happened.

    Initiation is judged on the full event stream (auto-repeats and unmapped
    codes never become records), so every record stands for exactly one
    executed command.
    """
    lib = HumanGuidedLibrary()
    for path in paths:
        header, body, _ = load_session(path)
        if clean_only and not header.clean:
            continue
        last_frame = None
        events = []
        frame_for = {}
        for doc in body:
            if doc["kind"] == "frame":
                last_frame = Frame.from_dict(doc["frame"])
            elif doc["kind"] == "event":
                ev = InputEvent.from_dict(doc["event"])
                events.append(ev)
                if ev.kind in COMMAND_EVENT_KINDS:
                    if last_frame is None:
                        raise SessionError(
                            f"event before any frame in {path} at tick {ev.tick}"
                        )
                    frame_for[ev] = last_frame
        pairs, _ = collapse_events(events, KEYMAP)
        for ev, _cmd in pairs:
            lib.add_record(HumanGuidedRecord(
                session_id=header.session_id,
                tick=ev.tick,
                frame_snapshot=frame_for[ev],
                operation=ev.to_dict(),
                clean=header.clean,
            ))
    return lib
