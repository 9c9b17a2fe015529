"""Counter-action synthesis and self-optimization.

When the agent watches an enemy wind up an attack it names the move, seeds a
counter (dodges sized to the hit count, then light attacks), and thereafter
refines the counter by hill-climbing over dodge/attack strings. Candidate
bodies are scored in a private rollout: a throwaway arena where the stored
pattern plays on its live cadence against the candidate. Score is damage
dealt minus weighted hp lost, so evasion and aggression trade off explicitly.
"""
from __future__ import annotations

from dataclasses import dataclass

from .arena.patterns import ARCHETYPES, pattern_for
from .arena.types import (
    DODGE,
    LIGHT,
    CommandKind,
    Difficulty,
    Direction,
    EnemyState,
    ExecOutcome,
    PlayerState,
    TaskKind,
    TaskSpec,
)
from .arena.world import WorldState, execute_sequence
from .config import DEFAULT_TUNING, OptimizeConfig
from .gateway.types import Backend, PromptBundle
from .gateway.schemas import parse_structured
from .memory.actions import ActionEntry, ActionLibrary, build_entry


class SoagError(Exception):
    pass


@dataclass(frozen=True)
class EnemyActionLabel:
    archetype: str
    label: str
    hits: int


COUNTER_COMMANDS = (CommandKind.DODGE, CommandKind.LIGHT_ATTACK)

# crude stemmer for cue verbs; anything else just drops the -ing
_IRREGULAR_STEMS = {"raising": "raise", "charging": "charge", "inflating": "inflate"}


def _stem(word: str) -> str:
    if word in _IRREGULAR_STEMS:
        return _IRREGULAR_STEMS[word]
    if word.endswith("ing") and len(word) > 5:
        return word[:-3]
    return word


def counter_name(archetype: str, label: str) -> str:
    cue = pattern_for(archetype, label).cue
    words = cue.lower().split()
    slug = f"{_stem(words[0])}_{words[-1]}" if words else label
    return f"fight_new_action_{archetype.lower()}_{slug}"


def _body_summary(body) -> str:
    parts = []
    run_kind, run_len = None, 0
    for cmd in tuple(body) + (None,):
        kind = cmd.kind if cmd is not None else None
        if kind == run_kind:
            run_len += 1
            continue
        if run_kind is CommandKind.DODGE:
            parts.append(f"dodge {run_len} times" if run_len > 1 else "dodge once")
        elif run_kind is CommandKind.LIGHT_ATTACK:
            parts.append(
                f"{run_len} light attacks" if run_len > 1 else "one light attack"
            )
        run_kind, run_len = kind, 1
    return ", then ".join(parts)


def counter_annotation(archetype: str, label: str, body) -> str:
    return f"counter for {archetype} {label}: {_body_summary(body)}"


def recognize_enemy_action(gathered, reflection, current_frame, last_frame,
                           backend: Backend, step: int = 0) -> EnemyActionLabel:
    """Ask the backend to name the enemy's current move from the two frames."""
    if not any(e.get("kind") == "enemy" for e in gathered.entities):
        raise SoagError("no enemy present to recognize")
    frames = tuple(f for f in (last_frame, current_frame) if f is not None)
    bundle = PromptBundle(
        schema_id="enemy_action",
        system_text="",
        user_segments=(f'ctx: {{"step": {step}}}',),
        frames=frames,
    )
    doc = parse_structured("enemy_action", backend.complete(bundle).raw_text)
    return EnemyActionLabel(
        archetype=doc["archetype"], label=doc["label"], hits=int(doc["hits"])
    )


def synthesize_counter(label: EnemyActionLabel,
                       cfg: OptimizeConfig = OptimizeConfig()) -> tuple:
    """Seed counter: one dodge per expected hit plus a spare, then attacks."""
    if label.label == "unknown":
        raise SoagError("cannot synthesize a counter for an unknown action")
    h = max(1, label.hits)
    dodges = 1 if h == 1 else h + 1
    body = (DODGE,) * dodges + (LIGHT,) * 5
    return body[: cfg.max_len]


def score(outcome: ExecOutcome, cfg: OptimizeConfig = OptimizeConfig()) -> float:
    return outcome.damage_dealt - cfg.hp_weight * outcome.hp_lost


def rollout(body, archetype: str, label: str, tuning=DEFAULT_TUNING) -> ExecOutcome:
    """Play the stored pattern against the body, from the pattern's onset.

    The enemy re-engages with the same move on its live cadence, so commands
    that spill past the first cycle pay the same price they would in a real
    fight. No rng is consumed; equal bodies always score equal.
    """
    spec = TaskSpec(task_id=10, name="rollout", difficulty=Difficulty.HARD,
                    kind=TaskKind.COMBAT, tick_budget=10**6)
    player = PlayerState(
        pos=(2, 2), hp=tuning.player_max_hp,
        heal_charges=tuning.heal_charges_start, heavy_charge=0,
        focus_progress=0, facing=Direction.E,
        invulnerable_until=-1, immobilize_ready_at=0,
    )
    enemy = EnemyState(
        archetype=archetype, pos=(3, 2), hp=10**6, max_hp=10**6,
        active_label=label, phase_tick=0, locked_label=label,
    )
    world = WorldState(
        spec=spec, seed=0, width=8, height=5, walls=frozenset(), goal=None,
        tick=0, player=player, enemies=[enemy], items={}, notices=[],
        rng_draws=0, tuning=tuning,
    )
    _, out = execute_sequence(world, body)
    return out


def rollout_score(body, archetype: str, label: str,
                  cfg: OptimizeConfig = OptimizeConfig(),
                  tuning=DEFAULT_TUNING) -> float:
    return score(rollout(body, archetype, label, tuning), cfg)


def _neighbors(body, max_len: int) -> list:
    """All one-edit variants, in a fixed canonical order, deduplicated."""
    body = tuple(body)
    seen = {body}
    out = []

    def emit(cand):
        if len(cand) <= max_len and cand and cand not in seen:
            seen.add(cand)
            out.append(cand)

    for i in range(len(body) - 1):
        if body[i] != body[i + 1]:
            emit(body[:i] + (body[i + 1], body[i]) + body[i + 2 :])
    for i in range(len(body) + 1):
        for cmd in (DODGE, LIGHT):
            emit(body[:i] + (cmd,) + body[i:])
    if len(body) > 1:
        for i in range(len(body)):
            emit(body[:i] + body[i + 1 :])
    for i in range(len(body) - 1):
        if body[i].kind is CommandKind.DODGE and body[i + 1].kind is CommandKind.DODGE:
            emit(body[: i + 1] + (LIGHT,) + body[i + 1 :])
    return out


def _body_sort_key(body) -> tuple:
    return (len(body), tuple(cmd.encode() for cmd in body))


def optimize_counter(entry: ActionEntry, cfg: OptimizeConfig = OptimizeConfig(),
                     tuning=DEFAULT_TUNING, round_index: int | None = None) -> tuple:
    """One hill-climb round: try up to neighbor_budget one-edit variants.

    Keeps the best of {current body, tried variants} by score, breaking ties
    toward the shorter then lexicographically smaller body, so repeated calls
    never lower the rollout score. Successive rounds rotate through the
    neighbor list so the whole neighborhood gets coverage over time.
    """
    if entry.key is None:
        raise SoagError(f"{entry.name} is not a counter entry")
    if cfg.neighbor_budget <= 0:
        return tuple(entry.body)
    archetype, label = entry.key
    current = tuple(entry.body)
    cands = _neighbors(current, cfg.max_len)
    if not cands:
        return current
    if round_index is None:
        round_index = len(entry.score_history)
    start = (round_index * cfg.neighbor_budget) % len(cands)
    picked = [cands[(start + j) % len(cands)] for j in range(min(cfg.neighbor_budget, len(cands)))]

    best = current
    best_key = (-rollout_score(current, archetype, label, cfg, tuning),
                *_body_sort_key(current))
    for cand in picked:
        key = (-rollout_score(cand, archetype, label, cfg, tuning),
               *_body_sort_key(cand))
        if key < best_key:
            best, best_key = cand, key
    return best


def soag_update(library: ActionLibrary, archetype: str, label: str,
                executed_body, outcome: ExecOutcome,
                cfg: OptimizeConfig = OptimizeConfig(),
                tuning=DEFAULT_TUNING, credit_stats: bool = True) -> ActionEntry:
    """Fold one observed combat exchange into the counter for (archetype, label).

    First sighting synthesizes and stores the seed counter; later sightings
    run an optimization round. Returns the (possibly new) entry.
    """
    entry = library.counter_for(archetype, label)
    live = score(outcome, cfg)
    if entry is None:
        hits = len(pattern_for(archetype, label).hit_windows)
        body = synthesize_counter(EnemyActionLabel(archetype, label, hits), cfg)
        entry = build_entry(
            name=counter_name(archetype, label),
            body=body,
            annotation=counter_annotation(archetype, label, body),
            provenance="soag",
            key=(archetype, label),
        )
        library.add_action(entry)
        library.update_action(entry.name, score=live)
    else:
        library.update_action(entry.name, score=live)
        new_body = optimize_counter(entry, cfg, tuning)
        if new_body != tuple(entry.body):
            library.update_action(
                entry.name, new_body=new_body,
                new_annotation=counter_annotation(archetype, label, new_body),
            )
    if credit_stats:
        library.update_action(entry.name, stats_delta={
            "uses": 1,
            "successes": 1 if outcome.hits_taken == 0 else 0,
            "total_damage_dealt": float(outcome.damage_dealt),
            "total_hp_lost": float(outcome.hp_lost),
        })
    return entry
