"""The hand-written starter skills every fresh action library begins with."""
from __future__ import annotations

from ..arena.types import CAST, DODGE, HEAL, HEAVY, INTERACT, LIGHT, Direction, move
from ..config import DEFAULT_TUNING
from ..memory.actions import ActionLibrary, build_entry

FALLBACK_ACTION = "basic_light_combo"
HEAL_ACTION = "recover_health"
SPELL_ACTION = "fight_immobilization_spell_skill"

_DIR_WORDS = {
    Direction.E: "east",
    Direction.W: "west",
    Direction.N: "north",
    Direction.S: "south",
}


def predefined_entries(tuning=DEFAULT_TUNING) -> list:
    stride = tuning.move_stride
    entries = []
    for d, word in _DIR_WORDS.items():
        entries.append(build_entry(
            f"move_step_{word}",
            tuple(move(d) for _ in range(stride)),
            f"approach by walking {word}: a short stride of steps to the {word}, "
            f"stopping at obstacles",
        ))
    entries.append(build_entry(
        FALLBACK_ACTION, (LIGHT, LIGHT, LIGHT),
        "strike with three quick light attacks at the enemy in front",
    ))
    entries.append(build_entry(
        "heavy_strike", (HEAVY,),
        "spend banked focus on one heavy attack for heavy damage",
    ))
    entries.append(build_entry(
        "dodge_once", (DODGE,),
        "dodge once: brief invulnerability to evade an incoming attack",
    ))
    entries.append(build_entry(
        HEAL_ACTION, (HEAL,),
        "recover health: drink one charge when the health bar is low",
    ))
    entries.append(build_entry(
        SPELL_ACTION, (CAST,),
        "cast the immobilization spell skill to freeze the enemy in place",
    ))
    entries.append(build_entry(
        "interact_here", (INTERACT,),
        "interact with the adjacent square: gather the item or open the chest",
    ))
    return entries


def new_action_library(tuning=DEFAULT_TUNING) -> ActionLibrary:
    lib = ActionLibrary()
    for entry in predefined_entries(tuning):
        lib.add_action(entry)
    return lib
