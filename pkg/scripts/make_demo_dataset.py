"""Regenerate the bundled demonstration sessions (src/varp/guidance/data/sessions).

25 scripted-demonstrator sessions across the 12 tasks, mirroring the source
corpus shares for tasks 1 and 2 (4% and 12%). Two sessions carry redundant
opening inputs and ship with clean=False so the cleaning flag has teeth.
Everything here is deterministic; rerunning must write identical bytes.
"""
from __future__ import annotations

import pathlib
import sys

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parent.parent / "src"))

from varp.guidance.demonstrator import DemoOptions, play_session
from varp.guidance.stats import compute_stats, format_stats

OUT = pathlib.Path(__file__).resolve().parent.parent / "src/varp/guidance/data/sessions"

# (task_id, seed, player_tag, clean, waste_dodges)
PLAN = [
    (1, 0, "p1", True, 0),
    (2, 0, "p1", True, 0),
    (2, 1, "p2", True, 0),
    (2, 2, "p3", False, 3),
    (3, 0, "p1", True, 0),
    (3, 1, "p2", True, 0),
    (4, 0, "p2", True, 0),
    (4, 1, "p3", True, 0),
    (5, 0, "p1", True, 0),
    (5, 1, "p2", True, 0),
    (6, 0, "p3", True, 0),
    (6, 1, "p1", True, 0),
    (7, 0, "p2", True, 0),
    (7, 1, "p1", True, 0),
    (8, 0, "p3", True, 0),
    (8, 1, "p2", True, 0),
    (9, 0, "p1", True, 0),
    (9, 1, "p3", True, 0),
    (10, 0, "p1", True, 0),
    (10, 1, "p2", True, 0),
    (11, 0, "p1", True, 0),
    (11, 1, "p3", True, 0),
    (12, 0, "p1", True, 0),
    (12, 1, "p2", True, 0),
    (12, 2, "p3", False, 6),
]


def main():
    OUT.mkdir(parents=True, exist_ok=True)
    for old in OUT.glob("*.jsonl"):
        old.unlink()
    counters: dict[int, int] = {}
    for minute, (task, seed, tag, clean, waste) in enumerate(PLAN):
        counters[task] = counters.get(task, 0) + 1
        sid = f"demo-t{task:02d}-{chr(ord('a') + counters[task] - 1)}"
        status = play_session(
            task, seed, sid, OUT / f"{sid}.jsonl",
            player_tag=tag, clean=clean,
            created_at=f"2026-05-02T09:{minute:02d}:00Z",
            options=DemoOptions(waste_dodges=waste),
        )
        print(f"{sid}: task {task} seed {seed} -> {status.kind.value}")
    print()
    print(format_stats(compute_stats(OUT)))


if __name__ == "__main__":
    main()
