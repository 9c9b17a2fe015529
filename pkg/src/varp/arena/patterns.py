"""The bestiary: enemy archetypes, their attack patterns, and glyph tables.

This table is shared knowledge between the simulator and the agent: the
viewport legend documents archetype letters and telegraph glyphs, and counter
synthesis rolls candidate bodies against the stored pattern timings.

Phase timeline for a pattern starting at phase 0 (telegraph onset):
  phase in [0, telegraph_ticks)            telegraph glyph visible
  phase == telegraph_ticks + window.offset hit window lands
  pattern ends when phase reaches telegraph + last offset + recovery
"""
from __future__ import annotations

from dataclasses import dataclass

from .types import AttackPattern, HitWindow


@dataclass(frozen=True)
class Archetype:
    name: str
    letter: str  # viewport glyph; rendered lowercase below 50% hp
    max_hp: int
    idle_gap: int  # ticks between recovery end and next pattern start
    patterns: tuple[tuple[AttackPattern, int], ...]  # (pattern, weight)

    def pattern(self, label: str) -> AttackPattern:
        for p, _ in self.patterns:
            if p.label == label:
                return p
        raise KeyError(f"{self.name} has no pattern {label!r}")


def _pat(label, telegraph, windows, recovery, glyph, cue):
    return AttackPattern(
        label=label,
        telegraph_ticks=telegraph,
        hit_windows=tuple(HitWindow(*w) for w in windows),
        recovery_ticks=recovery,
        glyph=glyph,
        cue=cue,
    )


ARCHETYPES: dict[str, Archetype] = {
    a.name: a
    for a in [
        Archetype(
            name="Erlang",
            letter="E",
            max_hp=48,
            idle_gap=10,
            patterns=(
                (_pat("slow_sweep", 8, [(0, 10, 1)], 10, "^",
                      "winding up a slow sweeping strike"), 1),
            ),
        ),
        Archetype(
            name="WolfScout",
            letter="S",
            max_hp=64,
            idle_gap=8,
            patterns=(
                (_pat("lunge", 5, [(0, 12, 1)], 8, "!",
                      "crouching low for a lunge"), 1),
            ),
        ),
        Archetype(
            name="WolfStalwart",
            letter="T",
            max_hp=72,
            idle_gap=8,
            patterns=(
                (_pat("slash_combo", 5, [(0, 9, 1), (3, 9, 1)], 8, "2",
                      "raising its blade for a double slash"), 1),
            ),
        ),
        Archetype(
            name="WolfSwornsword",
            letter="W",
            max_hp=72,
            idle_gap=8,
            patterns=(
                (_pat("sword_arc", 5, [(0, 13, 1)], 8, "|",
                      "drawing back for a wide arc"), 1),
            ),
        ),
        Archetype(
            name="WolfSoldier",
            letter="L",
            max_hp=80,
            idle_gap=8,
            patterns=(
                (_pat("spear_poke", 4, [(0, 12, 2)], 8, "-",
                      "leveling its spear"), 1),
            ),
        ),
        Archetype(
            name="Croaky",
            letter="C",
            max_hp=96,
            idle_gap=4,
            patterns=(
                (_pat("tongue_lash", 5, [(0, 14, 2)], 6, "~",
                      "inflating its cheeks"), 2),
                (_pat("belly_slam", 4, [(0, 10, 1), (2, 10, 1)], 11, "o",
                      "rearing up on its hind legs"), 1),
            ),
        ),
        Archetype(
            name="CrowDiviner",
            letter="D",
            max_hp=150,
            idle_gap=4,
            patterns=(
                (_pat("peck_flurry", 4, [(0, 17, 1), (2, 17, 1), (4, 17, 1)], 8, "2",
                      "spreading its wings for a flurry"), 2),
                (_pat("wing_gust", 5, [(0, 22, 2)], 12, "v",
                      "drawing in a rising gust"), 1),
            ),
        ),
        Archetype(
            name="Bullguard",
            letter="B",
            max_hp=190,
            idle_gap=5,
            patterns=(
                (_pat("triple_chop", 4, [(0, 15, 2), (2, 15, 2), (4, 15, 2)], 7, "3",
                      "raising up his weapon"), 2),
                (_pat("charge_forward", 5, [(0, 20, 2)], 6, ">",
                      "charging forward with the axe"), 1),
            ),
        ),
        Archetype(
            name="WanderingWight",
            letter="G",
            max_hp=320,
            idle_gap=3,
            patterns=(
                (_pat("grave_grasp", 2, [(0, 12, 2), (2, 12, 2)], 4, "+",
                      "reaching out with grasping hands"), 1),
                (_pat("soul_burst", 2, [(0, 18, 3)], 4, "x",
                      "gathering pale souls"), 1),
            ),
        ),
    ]
}

FROZEN_GLYPH = "*"

LETTER_TO_ARCHETYPE = {a.letter: a.name for a in ARCHETYPES.values()}


def glyph_to_label(archetype: str, glyph: str) -> str:
    """Resolve a telegraph glyph next to an enemy; unknown glyphs stay opaque."""
    arch = ARCHETYPES.get(archetype)
    if arch is None:
        return "unknown"
    for p, _ in arch.patterns:
        if p.glyph == glyph:
            return p.label
    return "unknown"


def cue_to_label(archetype: str, cue: str) -> str:
    arch = ARCHETYPES.get(archetype)
    if arch is None:
        return "unknown"
    for p, _ in arch.patterns:
        if p.cue == cue:
            return p.label
    return "unknown"


def pattern_for(archetype: str, label: str) -> AttackPattern:
    return ARCHETYPES[archetype].pattern(label)
