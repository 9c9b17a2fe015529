"""Human demonstration recording, replay, and the guided-action pipeline."""
from importlib import resources

from .demonstrator import DemoOptions, choose_command, play_session
from .events import (
    COLLAPSE_WINDOW,
    EVENT_KINDS,
    KEYMAP,
    InputEvent,
    collapse_events,
    events_to_atomics,
)
from .sessions import (
    SESSION_FORMAT,
    SESSION_VERSION,
    IntegrityError,
    ReplayResult,
    SessionError,
    SessionHeader,
    SessionRecorder,
    build_guided_library,
    load_session,
    record_session,
    replay_session,
)
from .stats import (
    REFERENCE_SHARE,
    DatasetStats,
    compute_stats,
    format_stats,
    session_paths,
)
from .summarize import summarize_to_action, window_action_name


def bundled_sessions_dir():
    return resources.files(__package__) / "data" / "sessions"


__all__ = [
    "COLLAPSE_WINDOW",
    "EVENT_KINDS",
    "KEYMAP",
    "SESSION_FORMAT",
    "SESSION_VERSION",
    "REFERENCE_SHARE",
    "DatasetStats",
    "DemoOptions",
    "InputEvent",
    "IntegrityError",
    "ReplayResult",
    "SessionError",
    "SessionHeader",
    "SessionRecorder",
    "build_guided_library",
    "bundled_sessions_dir",
    "choose_command",
    "collapse_events",
    "compute_stats",
    "events_to_atomics",
    "format_stats",
    "load_session",
    "play_session",
    "record_session",
    "replay_session",
    "session_paths",
    "summarize_to_action",
    "window_action_name",
]
