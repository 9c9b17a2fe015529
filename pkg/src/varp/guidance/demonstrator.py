"""Scripted player used to generate the bundled demonstration sessions.

Unlike the agent, the demonstrator reads exact world internals (enemy phase
counters, cooldowns) and plays near-perfectly. That is the point: it stands in
for the human expert whose recordings seed the guided library, and fixtures
must be deterministic. Every command is emitted through the same input events
a person at a keyboard would produce.
"""
from __future__ import annotations

from dataclasses import dataclass

from ..arena.patterns import ARCHETYPES, pattern_for
from ..arena.render import render_frame
from ..arena.tasks import bfs_path, map_def
from ..arena.types import (
    CAST,
    DODGE,
    HEAL,
    HEAVY,
    INTERACT,
    LIGHT,
    Direction,
    TaskKind,
    move,
)
from ..arena.world import chebyshev, execute_atomic, new_world, task_status
from ..config import DEFAULT_TUNING
from .events import KEYMAP, InputEvent
from .sessions import SessionHeader, SessionRecorder

_CODE_FOR = {cmd: code for code, cmd in KEYMAP.items()}

FAR_OFF = 10**9


@dataclass(frozen=True)
class DemoOptions:
    heal_at: float = 0.5
    use_spell: bool = True
    use_heavy: bool = True
    spell_hp_floor: int = 50  # do not waste the freeze on near-dead enemies
    command_cap: int = 4000
    # redundant opening dodges, for sessions meant to fail the cleaning pass
    waste_dodges: int = 0


DEFAULT_OPTIONS = DemoOptions()


def _hits_for(world, enemy, dist: int) -> list:
    """World ticks of hits that could land on a player standing at dist.

    Includes the earliest hit of the pattern the enemy could start next
    (after the current one ends, or straight from idle); which pattern that
    is, is random, so the minimum over patterns bounds it.
    """
    out = []
    arch = ARCHETYPES[enemy.archetype]
    if enemy.active_label is not None:
        pat = pattern_for(enemy.archetype, enemy.active_label)
        base = max(world.tick, enemy.frozen_until)
        for w in pat.hit_windows:
            ht = pat.hit_tick(w)
            if ht > enemy.phase_tick and w.reach >= dist:
                out.append(base + ht - enemy.phase_tick)
        next_onset = base + (pat.total_ticks - enemy.phase_tick) + arch.idle_gap
    else:
        next_onset = max(world.tick + 1, enemy.next_ready_at,
                         enemy.frozen_until + 1)
    for pat, _ in arch.patterns:
        for w in pat.hit_windows:
            if w.reach >= dist:
                out.append(next_onset + pat.hit_tick(w))
                break
    return sorted(out)


def _step_toward(world, goal):
    path = bfs_path(map_def(world.spec.task_id), world.player.pos, goal)
    if path is None or len(path) < 2:
        return None
    dx = path[1][0] - path[0][0]
    dy = path[1][1] - path[0][1]
    for d in Direction:
        if d.delta == (dx, dy):
            return move(d)
    return None


def _approach(world, goal):
    """Move toward goal, dodging if the next cell is hit on arrival."""
    p = world.player
    for e in world.enemies:
        if not e.alive:
            continue
        d = chebyshev(e.pos, p.pos)
        hits = _hits_for(world, e, max(1, d - 1))
        if hits and hits[0] - world.tick <= 1:
            return DODGE
    return _step_toward(world, goal)


def _choose_combat(world, opts: DemoOptions):
    p, t = world.player, world.tuning
    living = [e for e in world.enemies if e.alive]
    if not living:
        return None
    enemy = min(living, key=lambda e: (chebyshev(e.pos, p.pos), e.pos[1], e.pos[0]))
    d = chebyshev(enemy.pos, p.pos)
    hits = _hits_for(world, enemy, d)
    window = hits[0] - world.tick if hits else FAR_OFF

    if (
        p.heal_charges > 0
        and p.hp <= opts.heal_at * t.player_max_hp
        and window >= t.cost_heal + 1
    ):
        return HEAL
    if d > 1:
        return _approach(world, enemy.pos)
    if window <= t.cost_light:
        return DODGE
    if (
        opts.use_spell
        and enemy.hp >= opts.spell_hp_floor
        and world.tick >= p.immobilize_ready_at
        and enemy.frozen_until <= world.tick
        and window >= t.cost_cast + 1
    ):
        return CAST
    if opts.use_heavy and p.heavy_charge >= 1 and window >= t.cost_heavy + 1:
        return HEAVY
    if window >= t.cost_light + 1:
        return LIGHT
    return DODGE


def _choose_acquire(world):
    p = world.player
    targets = [
        pos for pos, it in world.items.items()
        if it.kind == "gatherable" or (it.kind == "chest" and not it.opened)
    ]
    if not targets:
        return None
    target = min(targets, key=lambda c: (chebyshev(c, p.pos), c[1], c[0]))
    if chebyshev(target, p.pos) <= 1:
        return INTERACT
    return _approach(world, target)


def choose_command(world, opts: DemoOptions = DEFAULT_OPTIONS):
    kind = world.spec.kind
    if kind is TaskKind.COMBAT:
        return _choose_combat(world, opts)
    if kind in (TaskKind.GATHER, TaskKind.OPEN):
        return _choose_acquire(world)
    return _approach(world, world.goal)


def play_session(task_id: int, seed: int, session_id: str, path,
                 player_tag: str = "demo", clean: bool = True,
                 created_at: str = "2026-05-02T09:00:00Z",
                 tuning=DEFAULT_TUNING, options: DemoOptions = DEFAULT_OPTIONS):
    """Play one task to completion, recording the session file at path."""
    world = new_world(task_id, seed, tuning)
    rec = SessionRecorder(SessionHeader(
        session_id=session_id, task_id=task_id, seed=seed,
        player_tag=player_tag, clean=clean, created_at=created_at,
    ))
    rec.add_frame(render_frame(world))
    wasted = 0
    for _ in range(options.command_cap):
        if not task_status(world).ongoing:
            break
        if wasted < options.waste_dodges:
            cmd, wasted = DODGE, wasted + 1
        else:
            cmd = choose_command(world, options)
        if cmd is None:
            break
        code = _CODE_FOR[cmd]
        kind = "mouse_button" if code.startswith("mouse") else "key_down"
        rec.add_event(InputEvent(tick=world.tick, kind=kind, code=code))
        execute_atomic(world, cmd)
        if kind == "key_down":
            rec.add_event(InputEvent(tick=world.tick, kind="key_up", code=code))
        rec.add_frame(render_frame(world))
    status = task_status(world)
    rec.finish(status, world.tick, path)
    return status
