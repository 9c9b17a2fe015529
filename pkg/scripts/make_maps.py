"""Regenerate the bundled map/task config (src/varp/arena/data/maps.txt).

Grids are 48x24. Legend: '.' floor, '#' wall cell (invisible in frames),
'@' player spawn, '%' gatherable item, '=' chest, bestiary letters are enemy
spawns. Task 12's Bullguard doubles as the navigation goal cell.
"""
from __future__ import annotations

import pathlib

W, H = 48, 24


def blank():
    return [["."] * W for _ in range(H)]


def render(grid):
    return "\n".join("".join(row) for row in grid)


def combat(letter, player=(22, 12), enemy=(23, 12)):
    g = blank()
    g[player[1]][player[0]] = "@"
    g[enemy[1]][enemy[0]] = letter
    return g


def gather_map():
    g = blank()
    g[12][22] = "@"
    g[12][27] = "%"
    return g


def open_map():
    g = blank()
    g[12][22] = "@"
    g[12][28] = "="
    return g


def maze_map():
    g = blank()
    # serpentine bands; gaps alternate between x=44 and x=3 so a greedy
    # walker with 8-cell strides never stops on a gap column
    for y, gap in [(4, 44), (8, 3), (12, 44), (16, 3), (20, 44)]:
        for x in range(W):
            if x != gap:
                g[y][x] = "#"
    g[2][2] = "@"
    g[22][45] = "B"
    return g


TASKS = [
    (1, "Guidance: Erlang", "Easy", "combat", 1000, combat("E", enemy=(26, 12))),
    (2, "Combat 1: WolfScout", "Easy", "combat", 1000, combat("S")),
    (3, "Gather", "Easy", "gather", 1000, gather_map()),
    (4, "Combat 2: WolfStalwart", "Easy", "combat", 1000, combat("T")),
    (5, "Combat 3: WolfSwornsword", "Easy", "combat", 1000, combat("W")),
    (6, "Open", "Easy", "open", 1000, open_map()),
    (7, "Combat 4: WolfSoldier", "Easy", "combat", 1000, combat("L")),
    (8, "Combat 5: Croaky", "Easy", "combat", 1000, combat("C")),
    (9, "Combat 6: CrowDiviner", "Middle", "combat", 1000, combat("D")),
    (10, "Combat 7: Bullguard", "Hard", "combat", 1000, combat("B")),
    (11, "Combat 8: WanderingWight", "VeryHard", "combat", 1000, combat("G")),
    (12, "Autonomous Navigation", "VeryHard", "navigate", 1500, maze_map()),
]


def main():
    out = pathlib.Path(__file__).resolve().parents[1] / "src/varp/arena/data/maps.txt"
    out.parent.mkdir(parents=True, exist_ok=True)
    lines = ["# varp-maps v1"]
    for tid, name, diff, kind, budget, grid in TASKS:
        lines.append("")
        lines.append(f"[task {tid}]")
        lines.append(f"name = {name}")
        lines.append(f"difficulty = {diff}")
        lines.append(f"kind = {kind}")
        lines.append(f"budget = {budget}")
        lines.append("grid:")
        lines.append(render(grid))
    out.write_text("\n".join(lines) + "\n")
    print(f"wrote {out}")


if __name__ == "__main__":
    main()
