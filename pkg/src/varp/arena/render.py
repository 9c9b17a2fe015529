"""Frame rendering: the character viewport, hud readout, and PNG raster.

Viewport legend (documented contract; the guidance feature vectors and the
scripted oracle both parse it):

  '.'  floor (wall cells render as floor: walls are invisible)
  '@'  player
  A-Z  enemy archetype letter (lowercase once below half health):
       E Erlang, S WolfScout, T WolfStalwart, W WolfSwornsword,
       L WolfSoldier, C Croaky, D CrowDiviner, B Bullguard, G WanderingWight
  '%'  gatherable item, '=' closed chest, '/' opened chest
  '*'  frozen marker next to an immobilized enemy
  other single glyphs next to an enemy: its telegraph (see the bestiary table)

The raster is a color-block PNG (no font rasterization, so bytes are stable
across platforms for a given format version).
"""
from __future__ import annotations

import io
from typing import TYPE_CHECKING

from .patterns import ARCHETYPES, FROZEN_GLYPH, LETTER_TO_ARCHETYPE, pattern_for
from .types import Frame, Hud

if TYPE_CHECKING:
    from .world import WorldState

FRAME_VERSION = 1

GATHERABLE_GLYPH = "%"
CHEST_GLYPH = "="
OPENED_CHEST_GLYPH = "/"
PLAYER_GLYPH = "@"
FLOOR_GLYPH = "."

TELEGRAPH_GLYPHS = {
    p.glyph for a in ARCHETYPES.values() for p, _ in a.patterns
}


def _marker_cell(grid, enemy_pos, player_pos, width, height):
    """Free cell adjacent to the enemy, preferring the side facing the player."""
    ex, ey = enemy_pos
    dx = player_pos[0] - ex
    dy = player_pos[1] - ey
    prefs = []
    if abs(dx) >= abs(dy) and dx != 0:
        prefs.append((ex + (1 if dx > 0 else -1), ey))
    if dy != 0:
        prefs.append((ex, ey + (1 if dy > 0 else -1)))
    prefs += [(ex, ey - 1), (ex + 1, ey), (ex, ey + 1), (ex - 1, ey)]
    for cx, cy in prefs:
        if 0 <= cx < width and 0 <= cy < height and grid[cy][cx] == FLOOR_GLYPH:
            return cx, cy
    return None


def render_frame(world: "WorldState") -> Frame:
    grid = [[FLOOR_GLYPH] * world.width for _ in range(world.height)]
    for pos, it in world.items.items():
        if it.kind == "gatherable":
            glyph = GATHERABLE_GLYPH
        else:
            glyph = OPENED_CHEST_GLYPH if it.opened else CHEST_GLYPH
        grid[pos[1]][pos[0]] = glyph
    for e in world.enemies:
        if not e.alive:
            continue
        letter = ARCHETYPES[e.archetype].letter
        if e.hp * 2 < e.max_hp:
            letter = letter.lower()
        grid[e.pos[1]][e.pos[0]] = letter
    px, py = world.player.pos
    grid[py][px] = PLAYER_GLYPH
    # markers go on top of floor only, after all entities are placed
    for e in world.enemies:
        if not e.alive:
            continue
        marker = None
        if world.tick <= e.frozen_until:
            marker = FROZEN_GLYPH
        elif e.active_label is not None:
            pattern = pattern_for(e.archetype, e.active_label)
            if e.phase_tick < pattern.telegraph_ticks:
                marker = pattern.glyph
        if marker:
            cell = _marker_cell(grid, e.pos, world.player.pos, world.width, world.height)
            if cell:
                grid[cell[1]][cell[0]] = marker

    t = world.tuning
    hud = Hud(
        hp_fraction=world.player.hp / t.player_max_hp,
        heal_charges=world.player.heal_charges,
        heavy_charge=world.player.heavy_charge,
        spell_ready=world.tick >= world.player.immobilize_ready_at,
    )
    notices = tuple(
        text for tick, text in world.notices if world.tick - tick <= t.notice_ttl
    )
    return Frame(
        viewport=tuple("".join(row) for row in grid),
        hud=hud,
        notices=notices,
        tick=world.tick,
    )


# -- canonical textual form ----------------------------------------------------


def frame_to_text(frame: Frame) -> str:
    hud = frame.hud
    spell = "ready" if hud.spell_ready else "cooldown"
    lines = [
        f"=== frame v{FRAME_VERSION} tick={frame.tick} ===",
        f"hp={hud.hp_fraction!r} heals={hud.heal_charges} heavy={hud.heavy_charge} spell={spell}",
        "notices: " + (" | ".join(frame.notices) if frame.notices else "-"),
    ]
    lines.extend(frame.viewport)
    return "\n".join(lines)


def parse_frame_text(text: str) -> Frame:
    lines = text.splitlines()
    head = lines[0]
    if not head.startswith(f"=== frame v{FRAME_VERSION} tick="):
        raise ValueError(f"bad frame header: {head!r}")
    tick = int(head.split("tick=")[1].split(" ")[0])
    fields = dict(part.split("=", 1) for part in lines[1].split(" "))
    hud = Hud(
        hp_fraction=float(fields["hp"]),
        heal_charges=int(fields["heals"]),
        heavy_charge=int(fields["heavy"]),
        spell_ready=fields["spell"] == "ready",
    )
    notice_body = lines[2][len("notices: "):]
    notices = tuple() if notice_body == "-" else tuple(notice_body.split(" | "))
    return Frame(viewport=tuple(lines[3:]), hud=hud, notices=notices, tick=tick)


# -- viewport entity extraction -------------------------------------------------


def extract_entities(frame: Frame) -> list[dict]:
    """Detect enemies, items, and telegraph markers in the viewport.

    Each entity: {kind, label, cell, box, ...}. Telegraph markers attach to the
    adjacent enemy as a 'cue' (natural-language windup text from the bestiary);
    a marker with no known reading yields cue 'unknown'.
    """
    enemies = []
    items = []
    markers = []
    player_cell = None
    for y, row in enumerate(frame.viewport):
        for x, ch in enumerate(row):
            if ch == FLOOR_GLYPH or ch == " ":
                continue
            cell = (x, y)
            if ch == PLAYER_GLYPH:
                player_cell = cell
            elif ch.upper() in LETTER_TO_ARCHETYPE and ch.upper() == ch:
                enemies.append({"kind": "enemy", "label": LETTER_TO_ARCHETYPE[ch],
                                "cell": cell, "wounded": False})
            elif ch.upper() in LETTER_TO_ARCHETYPE:
                enemies.append({"kind": "enemy", "label": LETTER_TO_ARCHETYPE[ch.upper()],
                                "cell": cell, "wounded": True})
            elif ch == GATHERABLE_GLYPH:
                items.append({"kind": "item", "label": "gatherable", "cell": cell})
            elif ch == CHEST_GLYPH:
                items.append({"kind": "item", "label": "chest", "cell": cell})
            elif ch == OPENED_CHEST_GLYPH:
                items.append({"kind": "item", "label": "opened_chest", "cell": cell})
            else:
                markers.append((ch, cell))
    for glyph, cell in markers:
        best = None
        best_d = None
        for e in enemies:
            d = max(abs(e["cell"][0] - cell[0]), abs(e["cell"][1] - cell[1]))
            if d <= 1 and (best_d is None or d < best_d):
                best, best_d = e, d
        if best is None:
            continue
        if glyph == FROZEN_GLYPH:
            best["frozen"] = True
        else:
            arch = ARCHETYPES[best["label"]]
            cue = "unknown"
            for p, _ in arch.patterns:
                if p.glyph == glyph:
                    cue = p.cue
                    break
            best["telegraph"] = True
            best["cue"] = cue
    out = enemies + items
    for ent in out:
        x, y = ent["cell"]
        ent["box"] = (x, y, x + 1, y + 1)
    if player_cell is not None:
        for ent in out:
            ent["player_cell"] = player_cell
    return out


# -- raster ---------------------------------------------------------------------

_CELL_W, _CELL_H = 6, 10
_HUD_H = 12

_PALETTE = {
    FLOOR_GLYPH: (28, 28, 32),
    PLAYER_GLYPH: (235, 235, 235),
    GATHERABLE_GLYPH: (90, 200, 90),
    CHEST_GLYPH: (200, 170, 60),
    OPENED_CHEST_GLYPH: (120, 100, 50),
    FROZEN_GLYPH: (80, 200, 230),
}
_ENEMY_COLOR = (210, 70, 70)
_WOUNDED_COLOR = (130, 40, 40)
_TELEGRAPH_COLOR = (240, 150, 40)


def render_png(frame: Frame) -> bytes:
    from PIL import Image, ImageDraw

    h = len(frame.viewport)
    w = len(frame.viewport[0]) if h else 0
    img = Image.new("RGB", (w * _CELL_W, h * _CELL_H + _HUD_H), _PALETTE[FLOOR_GLYPH])
    draw = ImageDraw.Draw(img)
    for y, row in enumerate(frame.viewport):
        for x, ch in enumerate(row):
            if ch == FLOOR_GLYPH:
                continue
            if ch in _PALETTE:
                color = _PALETTE[ch]
            elif ch.upper() in LETTER_TO_ARCHETYPE:
                color = _ENEMY_COLOR if ch.isupper() else _WOUNDED_COLOR
            else:
                color = _TELEGRAPH_COLOR
            x0, y0 = x * _CELL_W, y * _CELL_H
            draw.rectangle([x0, y0, x0 + _CELL_W - 1, y0 + _CELL_H - 1], fill=color)
    bar_y = h * _CELL_H
    hp_w = int(round(frame.hud.hp_fraction * (w * _CELL_W - 60)))
    draw.rectangle([0, bar_y, max(hp_w - 1, 0), bar_y + _HUD_H - 1], fill=(200, 40, 40))
    x = w * _CELL_W - 58
    for i in range(frame.hud.heal_charges):
        draw.rectangle([x + i * 8, bar_y + 2, x + i * 8 + 5, bar_y + 9], fill=(90, 200, 90))
    x = w * _CELL_W - 14
    for i in range(frame.hud.heavy_charge):
        draw.rectangle([x - i * 8, bar_y + 2, x - i * 8 + 5, bar_y + 9], fill=(70, 120, 230))
    if frame.hud.spell_ready:
        draw.rectangle([x + 8, bar_y + 2, x + 13, bar_y + 9], fill=(80, 200, 230))
    buf = io.BytesIO()
    img.save(buf, format="PNG")
    return buf.getvalue()
