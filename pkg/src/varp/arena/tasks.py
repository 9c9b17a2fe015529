"""Task table and map loading.

Maps live in a versioned plain-text config (arena/data/maps.txt). Wall cells
('#') are invisible: they block movement but render as floor. Every grid is
exactly viewport-sized, so frames show the whole map.
"""
from __future__ import annotations

import pathlib
from collections import deque
from dataclasses import dataclass

from .patterns import LETTER_TO_ARCHETYPE
from .types import Difficulty, TaskKind, TaskSpec

MAPS_VERSION = "varp-maps v1"
_DATA = pathlib.Path(__file__).parent / "data" / "maps.txt"


@dataclass(frozen=True)
class MapDef:
    spec: TaskSpec
    width: int
    height: int
    player_spawn: tuple[int, int]
    walls: frozenset[tuple[int, int]]  # blocked cells (rendered as floor)
    enemies: tuple[tuple[str, tuple[int, int]], ...]  # (archetype, cell)
    items: tuple[tuple[str, tuple[int, int]], ...]  # ("gatherable"|"chest", cell)
    goal: tuple[int, int] | None  # navigation target cell


class MapFormatError(ValueError):
    pass


def _parse_grid(rows: list[str], task_id: int):
    width = len(rows[0])
    for r in rows:
        if len(r) != width:
            raise MapFormatError(f"task {task_id}: ragged grid row")
    player = None
    walls = set()
    enemies = []
    items = []
    for y, row in enumerate(rows):
        for x, ch in enumerate(row):
            if ch == ".":
                continue
            if ch == "#":
                walls.add((x, y))
            elif ch == "@":
                if player is not None:
                    raise MapFormatError(f"task {task_id}: two player spawns")
                player = (x, y)
            elif ch == "%":
                items.append(("gatherable", (x, y)))
            elif ch == "=":
                items.append(("chest", (x, y)))
            elif ch in LETTER_TO_ARCHETYPE:
                enemies.append((LETTER_TO_ARCHETYPE[ch], (x, y)))
            else:
                raise MapFormatError(f"task {task_id}: unknown glyph {ch!r}")
    if player is None:
        raise MapFormatError(f"task {task_id}: no player spawn")
    return width, len(rows), player, frozenset(walls), tuple(enemies), tuple(items)


def load_maps(path: pathlib.Path | None = None) -> dict[int, MapDef]:
    path = path or _DATA
    lines = path.read_text().splitlines()
    if not lines or lines[0].strip() != f"# {MAPS_VERSION}":
        raise MapFormatError(f"expected header '# {MAPS_VERSION}'")
    defs: dict[int, MapDef] = {}
    i = 1
    while i < len(lines):
        line = lines[i].strip()
        if not line:
            i += 1
            continue
        if not (line.startswith("[task ") and line.endswith("]")):
            raise MapFormatError(f"line {i + 1}: expected [task N], got {line!r}")
        task_id = int(line[6:-1])
        i += 1
        fields = {}
        while i < len(lines) and "=" in lines[i] and not lines[i].startswith("grid"):
            k, _, v = lines[i].partition("=")
            fields[k.strip()] = v.strip()
            i += 1
        if i >= len(lines) or lines[i].strip() != "grid:":
            raise MapFormatError(f"task {task_id}: missing grid")
        i += 1
        rows = []
        while i < len(lines) and lines[i] and not lines[i].startswith("["):
            rows.append(lines[i])
            i += 1
        width, height, player, walls, enemies, items = _parse_grid(rows, task_id)
        kind = TaskKind(fields["kind"])
        goal = None
        if kind is TaskKind.NAVIGATE:
            bulls = [pos for arch, pos in enemies if arch == "Bullguard"]
            if len(bulls) != 1:
                raise MapFormatError(f"task {task_id}: navigation needs one Bullguard goal")
            goal = bulls[0]
        spec = TaskSpec(
            task_id=task_id,
            name=fields["name"],
            difficulty=Difficulty(fields["difficulty"]),
            kind=kind,
            tick_budget=int(fields["budget"]),
        )
        defs[task_id] = MapDef(
            spec=spec, width=width, height=height, player_spawn=player,
            walls=walls, enemies=enemies, items=items, goal=goal,
        )
    if sorted(defs) != list(range(1, 13)):
        raise MapFormatError(f"expected tasks 1..12, got {sorted(defs)}")
    return defs


_CACHE: dict[int, MapDef] | None = None


def map_def(task_id: int) -> MapDef:
    global _CACHE
    if _CACHE is None:
        _CACHE = load_maps()
    return _CACHE[task_id]


def task_spec(task_id: int) -> TaskSpec:
    return map_def(task_id).spec


def all_task_specs() -> list[TaskSpec]:
    return [task_spec(i) for i in range(1, 13)]


def bfs_path(mapdef: MapDef, start: tuple[int, int], goal: tuple[int, int]):
    """Shortest 4-connected path avoiding walls; goal adjacency counts as arrival.

    Used for map-authoring checks and by the scripted demonstrator.
    """
    def arrived(c):
        return max(abs(c[0] - goal[0]), abs(c[1] - goal[1])) <= 1

    blocked = set(mapdef.walls) | {pos for _, pos in mapdef.enemies} | {
        pos for _, pos in mapdef.items
    }
    prev: dict[tuple[int, int], tuple[int, int] | None] = {start: None}
    q = deque([start])
    while q:
        cur = q.popleft()
        if arrived(cur):
            path = [cur]
            while prev[path[-1]] is not None:
                path.append(prev[path[-1]])
            return list(reversed(path))
        x, y = cur
        for nxt in ((x, y - 1), (x + 1, y), (x, y + 1), (x - 1, y)):
            if (
                0 <= nxt[0] < mapdef.width
                and 0 <= nxt[1] < mapdef.height
                and nxt not in blocked
                and nxt not in prev
            ):
                prev[nxt] = cur
                q.append(nxt)
    return None
