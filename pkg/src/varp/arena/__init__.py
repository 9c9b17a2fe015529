"""Deterministic tick-based arena: world state, tasks, patterns, rendering."""

from .patterns import ARCHETYPES, pattern_for
from .render import extract_entities, frame_to_text, parse_frame_text, render_frame, render_png
from .tasks import all_task_specs, bfs_path, map_def, task_spec
from .types import (
    CAST,
    DODGE,
    HEAL,
    HEAVY,
    INTERACT,
    LIGHT,
    MAX_SEQUENCE_LEN,
    AtomicCommand,
    AttackPattern,
    CommandKind,
    Difficulty,
    Direction,
    ExecOutcome,
    Frame,
    HitWindow,
    StatusKind,
    TaskKind,
    TaskSpec,
    TaskStatus,
    move,
    validate_sequence,
)
from .world import (
    WorldState,
    chebyshev,
    command_cost,
    execute_atomic,
    execute_sequence,
    new_world,
    task_status,
)
