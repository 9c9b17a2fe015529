"""Turn a retrieved guidance window into a reusable library action.

The command body comes straight from translating the window's recorded
operations; the model only writes the annotation. That keeps demonstrations
executable verbatim even when the summary text is loose.
"""
from __future__ import annotations

from ..gateway.schemas import parse_structured, system_prompt
from ..gateway.types import PromptBundle
from ..memory.actions import ActionEntry, ActionLibrary, build_entry
from ..memory.guided import GuidanceWindow
from ..memory.io import LibraryError
from .events import events_to_atomics


def window_action_name(window: GuidanceWindow) -> str:
    a = window.anchor
    return f"human_guided_{a.session_id}_{a.tick}"


def summarize_to_action(window: GuidanceWindow, backend,
                        library: ActionLibrary) -> ActionEntry:
    body, _ = events_to_atomics(window.operations)
    if not body:
        raise LibraryError("guidance window translates to no commands")

    ops_line = "ops: " + " ".join(c.encode() for c in body)
    bundle = PromptBundle(
        schema_id="guidance_summary",
        system_text=system_prompt("guidance_summary"),
        user_segments=(ops_line,),
        frames=(window.anchor.frame_snapshot,),
    )
    reply = backend.complete(bundle)
    doc = parse_structured("guidance_summary", reply.raw_text)

    name = window_action_name(window)
    candidate, suffix = name, 2
    while candidate in library:
        candidate = f"{name}_{suffix}"
        suffix += 1

    entry = build_entry(
        name=candidate,
        body=body,
        annotation=doc["annotation"],
        provenance="human_guided",
    )
    library.add_action(entry)
    return entry
