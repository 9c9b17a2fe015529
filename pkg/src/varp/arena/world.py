"""Turn-gated world simulation.

The world advances only while a player command executes: a command with tick
cost c advances exactly c ticks (illegal-in-context commands are no-ops that
still pay their cost). Within one tick the order is fixed: enemies act first
(pattern phase advance, hit resolution, pattern starts), then the player's
scheduled command effect resolves. All randomness flows through a counted
sha256 draw, so a world is fully determined by (task_id, seed, command
history).
"""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field

from ..config import DEFAULT_TUNING, Tuning
from .patterns import ARCHETYPES, pattern_for
from .tasks import MapDef, map_def
from .types import (
    ONGOING,
    AtomicCommand,
    CommandKind,
    Direction,
    EnemyState,
    ExecOutcome,
    PlayerState,
    StatusKind,
    TaskKind,
    TaskSpec,
    TaskStatus,
    validate_sequence,
)


@dataclass
class ItemState:
    kind: str  # "gatherable" | "chest"
    opened: bool = False


@dataclass
class WorldState:
    spec: TaskSpec
    seed: int
    width: int
    height: int
    walls: frozenset
    goal: tuple[int, int] | None
    tick: int
    player: PlayerState
    enemies: list[EnemyState]
    items: dict[tuple[int, int], ItemState]
    notices: list  # (tick, text), bounded
    rng_draws: int
    tuning: Tuning = field(default=DEFAULT_TUNING, repr=False, compare=False)

    def state_digest(self) -> str:
        """Stable content hash; rendering-independent identity for tests."""
        payload = json.dumps(_state_doc(self), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(payload.encode()).hexdigest()


def _state_doc(w: WorldState) -> dict:
    return {
        "task": w.spec.task_id,
        "seed": w.seed,
        "tick": w.tick,
        "player": [
            list(w.player.pos), w.player.hp, w.player.heal_charges,
            w.player.heavy_charge, w.player.focus_progress, w.player.facing.value,
            w.player.invulnerable_until, w.player.immobilize_ready_at,
        ],
        "enemies": [
            [e.archetype, list(e.pos), e.hp, e.active_label, e.phase_tick,
             e.frozen_until, e.next_ready_at]
            for e in w.enemies
        ],
        "items": sorted(
            [list(pos), it.kind, it.opened] for pos, it in w.items.items()
        ),
        "notices": [[t, s] for t, s in w.notices],
        "rng_draws": w.rng_draws,
    }


def new_world(task_id: int, seed: int, tuning: Tuning = DEFAULT_TUNING) -> WorldState:
    md: MapDef = map_def(task_id)
    t = tuning
    player = PlayerState(
        pos=md.player_spawn,
        hp=t.player_max_hp,
        heal_charges=t.heal_charges_start,
        heavy_charge=0,
        focus_progress=0,
        facing=Direction.E,
        invulnerable_until=-1,
        immobilize_ready_at=0,
    )
    enemies = [
        EnemyState(archetype=arch, pos=pos, hp=ARCHETYPES[arch].max_hp,
                   max_hp=ARCHETYPES[arch].max_hp)
        for arch, pos in md.enemies
    ]
    return WorldState(
        spec=md.spec, seed=seed, width=md.width, height=md.height,
        walls=md.walls, goal=md.goal, tick=0, player=player, enemies=enemies,
        items={pos: ItemState(kind=kind) for kind, pos in md.items},
        notices=[], rng_draws=0, tuning=t,
    )


def chebyshev(a: tuple[int, int], b: tuple[int, int]) -> int:
    return max(abs(a[0] - b[0]), abs(a[1] - b[1]))


def _draw(world: WorldState, bound: int) -> int:
    h = hashlib.sha256(f"{world.seed}:{world.rng_draws}".encode()).digest()
    world.rng_draws += 1
    return int.from_bytes(h[:8], "big") % bound


def _notice(world: WorldState, text: str) -> None:
    world.notices.append((world.tick, text))
    if len(world.notices) > 32:
        del world.notices[: len(world.notices) - 32]


def task_status(world: WorldState) -> TaskStatus:
    if world.player.hp <= 0:
        return TaskStatus(StatusKind.FAILURE, "defeated")
    kind = world.spec.kind
    if kind is TaskKind.COMBAT:
        if all(not e.alive for e in world.enemies):
            return TaskStatus(StatusKind.SUCCESS, "enemies defeated")
    elif kind is TaskKind.GATHER:
        if not any(it.kind == "gatherable" for it in world.items.values()):
            return TaskStatus(StatusKind.SUCCESS, "items gathered")
    elif kind is TaskKind.OPEN:
        if all(it.opened for it in world.items.values() if it.kind == "chest"):
            return TaskStatus(StatusKind.SUCCESS, "chest opened")
    elif kind is TaskKind.NAVIGATE:
        if world.goal is not None and chebyshev(world.player.pos, world.goal) <= 1:
            return TaskStatus(StatusKind.SUCCESS, "goal reached")
    if world.tick > world.spec.tick_budget:
        return TaskStatus(StatusKind.FAILURE, "timeout")
    return ONGOING


def _cell_blocked(world: WorldState, cell: tuple[int, int]) -> bool:
    x, y = cell
    if not (0 <= x < world.width and 0 <= y < world.height):
        return True
    if cell in world.walls:
        return True
    if cell in world.items:
        return True
    return any(e.alive and e.pos == cell for e in world.enemies)


def _advance_one_tick(world: WorldState, out: ExecOutcome) -> list[dict]:
    """Advance the clock one tick; returns telegraph-onset events born this tick."""
    world.tick += 1
    t = world.tuning
    player = world.player
    onsets = []
    for idx, enemy in enumerate(world.enemies):
        if not enemy.alive:
            continue
        if world.tick <= enemy.frozen_until:
            continue
        if enemy.active_label is not None:
            pattern = pattern_for(enemy.archetype, enemy.active_label)
            enemy.phase_tick += 1
            for w in pattern.hit_windows:
                if enemy.phase_tick != pattern.hit_tick(w):
                    continue
                if chebyshev(enemy.pos, player.pos) > w.reach:
                    continue
                if player.hp <= 0:
                    continue
                if world.tick <= player.invulnerable_until:
                    out.hits_evaded += 1
                    out.events.append({
                        "tag": "hit_evaded", "tick": world.tick,
                        "enemy": enemy.archetype, "label": pattern.label,
                        "damage": w.damage,
                    })
                else:
                    player.hp = max(0, player.hp - w.damage)
                    out.hits_taken += 1
                    out.hp_lost += w.damage
                    out.events.append({
                        "tag": "hit_taken", "tick": world.tick,
                        "enemy": enemy.archetype, "label": pattern.label,
                        "damage": w.damage,
                    })
                    if player.hp <= 0:
                        _notice(world, "Player defeated")
            if enemy.phase_tick >= pattern.total_ticks:
                enemy.active_label = None
                enemy.phase_tick = 0
                enemy.next_ready_at = world.tick + ARCHETYPES[enemy.archetype].idle_gap
        else:
            if (
                world.tick >= enemy.next_ready_at
                and player.hp > 0
                and chebyshev(enemy.pos, player.pos) <= t.aggro_range
            ):
                if enemy.locked_label is not None:
                    pattern = pattern_for(enemy.archetype, enemy.locked_label)
                else:
                    arch = ARCHETYPES[enemy.archetype]
                    total = sum(wt for _, wt in arch.patterns)
                    r = _draw(world, total)
                    for pattern, wt in arch.patterns:
                        if r < wt:
                            break
                        r -= wt
                enemy.active_label = pattern.label
                enemy.phase_tick = 0
                ev = {
                    "tag": "telegraph_onset", "tick": world.tick,
                    "enemy": enemy.archetype, "label": pattern.label,
                    "cue": pattern.cue,
                }
                out.events.append(ev)
                onsets.append(ev)
    return onsets


def _nearest_enemy(world: WorldState, reach: int) -> EnemyState | None:
    player = world.player
    best = None
    best_key = None
    fdx, fdy = player.facing.delta
    faced = (player.pos[0] + fdx, player.pos[1] + fdy)
    for e in world.enemies:
        if not e.alive:
            continue
        d = chebyshev(e.pos, player.pos)
        if d > reach:
            continue
        key = (d, e.pos != faced, e.pos[1], e.pos[0])
        if best_key is None or key < best_key:
            best, best_key = e, key
    return best


def _strike(world: WorldState, damage: int, out: ExecOutcome, heavy: bool) -> None:
    t = world.tuning
    enemy = _nearest_enemy(world, t.attack_reach)
    if enemy is None:
        out.events.append({"tag": "whiff", "tick": world.tick})
        return
    dx = enemy.pos[0] - world.player.pos[0]
    dy = enemy.pos[1] - world.player.pos[1]
    if abs(dx) >= abs(dy) and dx != 0:
        world.player.facing = Direction.E if dx > 0 else Direction.W
    elif dy != 0:
        world.player.facing = Direction.S if dy > 0 else Direction.N
    enemy.hp = max(0, enemy.hp - damage)
    out.hits_landed += 1
    out.damage_dealt += damage
    out.events.append({
        "tag": "strike", "tick": world.tick, "enemy": enemy.archetype,
        "damage": damage, "heavy": heavy,
    })
    if not heavy:
        world.player.focus_progress += 1
        if world.player.focus_progress >= t.focus_per_light_hits:
            world.player.focus_progress = 0
            if world.player.heavy_charge < t.heavy_charge_max:
                world.player.heavy_charge += 1
    if not enemy.alive:
        _notice(world, f"{enemy.archetype} defeated")


def _resolve_effect(world: WorldState, cmd: AtomicCommand, out: ExecOutcome) -> None:
    t = world.tuning
    player = world.player
    kind = cmd.kind
    if kind is CommandKind.LIGHT_ATTACK:
        _strike(world, t.light_damage, out, heavy=False)
    elif kind is CommandKind.HEAVY_ATTACK:
        if player.heavy_charge >= 1:
            player.heavy_charge -= 1
            _strike(world, t.heavy_damage, out, heavy=True)
        else:
            out.events.append({"tag": "no_focus", "tick": world.tick})
    elif kind is CommandKind.RESTORE_HEALTH:
        if player.heal_charges >= 1 and player.hp < t.player_max_hp:
            player.heal_charges -= 1
            player.hp = min(t.player_max_hp, player.hp + t.heal_amount)
            out.events.append({"tag": "healed", "tick": world.tick, "hp": player.hp})
        else:
            out.events.append({"tag": "heal_noop", "tick": world.tick})
    elif kind is CommandKind.CAST_IMMOBILIZE:
        target = None
        best = None
        for e in world.enemies:
            if not e.alive:
                continue
            d = chebyshev(e.pos, player.pos)
            if d <= t.immobilize_range and (best is None or (d, e.pos[1], e.pos[0]) < best):
                target, best = e, (d, e.pos[1], e.pos[0])
        if world.tick >= player.immobilize_ready_at and target is not None:
            target.frozen_until = world.tick + t.freeze_ticks
            # freezing interrupts any windup; the move restarts fresh after thawing
            target.active_label = None
            target.phase_tick = 0
            target.next_ready_at = target.frozen_until + 1
            player.immobilize_ready_at = world.tick + t.immobilize_cooldown
            out.events.append({
                "tag": "frozen", "tick": world.tick, "enemy": target.archetype,
            })
            _notice(world, f"{target.archetype} frozen")
        else:
            out.events.append({"tag": "cast_noop", "tick": world.tick})
    elif kind is CommandKind.INTERACT:
        target_pos = None
        best = None
        for pos, it in world.items.items():
            if it.kind == "chest" and it.opened:
                continue
            d = chebyshev(pos, player.pos)
            if d <= 1 and (best is None or (d, pos[1], pos[0]) < best):
                target_pos, best = pos, (d, pos[1], pos[0])
        if target_pos is None:
            out.events.append({"tag": "interact_noop", "tick": world.tick})
        elif world.items[target_pos].kind == "gatherable":
            del world.items[target_pos]
            out.events.append({"tag": "gathered", "tick": world.tick})
            _notice(world, "Item gathered")
        else:
            world.items[target_pos].opened = True
            out.events.append({"tag": "chest_opened", "tick": world.tick})
            _notice(world, "Chest opened")


_COST_ATTR = {
    CommandKind.LIGHT_ATTACK: "cost_light",
    CommandKind.HEAVY_ATTACK: "cost_heavy",
    CommandKind.DODGE: "cost_dodge",
    CommandKind.RESTORE_HEALTH: "cost_heal",
    CommandKind.CAST_IMMOBILIZE: "cost_cast",
    CommandKind.MOVE: "cost_move",
    CommandKind.INTERACT: "cost_interact",
}


def command_cost(kind: CommandKind, tuning: Tuning = DEFAULT_TUNING) -> int:
    return getattr(tuning, _COST_ATTR[kind])


def execute_atomic(world: WorldState, cmd: AtomicCommand):
    """Run one command to completion; returns (world, AtomicOutcome)."""
    out = ExecOutcome()
    if not task_status(world).ongoing:
        return world, out
    out.commands_run = 1
    t = world.tuning
    cost = command_cost(cmd.kind, t)

    # start-of-command effects
    if cmd.kind is CommandKind.DODGE:
        world.player.invulnerable_until = world.tick + t.dodge_iframes
    elif cmd.kind is CommandKind.MOVE:
        world.player.facing = cmd.direction
        dx, dy = cmd.direction.delta
        target = (world.player.pos[0] + dx, world.player.pos[1] + dy)
        if _cell_blocked(world, target):
            out.events.append({"tag": "move_blocked", "tick": world.tick})
        else:
            world.player.pos = target
            out.events.append({"tag": "moved", "tick": world.tick, "to": list(target)})

    # effects of non-instant commands land on their final tick
    resolve_at = cost if cmd.kind not in (CommandKind.DODGE, CommandKind.MOVE) else None

    for k in range(1, cost + 1):
        onsets = _advance_one_tick(world, out)
        out.ticks_elapsed += 1
        if resolve_at == k and world.player.hp > 0:
            _resolve_effect(world, cmd, out)
        if onsets:
            from .render import render_frame  # local import avoids a cycle

            frame = render_frame(world)
            for ev in onsets:
                ev["frame"] = frame.to_dict()
        if not task_status(world).ongoing:
            break
    return world, out


def execute_sequence(world: WorldState, commands):
    """Run commands in order, stopping early once the task resolves."""
    seq = validate_sequence(commands)
    total = ExecOutcome()
    for cmd in seq:
        if not task_status(world).ongoing:
            break
        _, out = execute_atomic(world, cmd)
        total.merge(out)
    return world, total
