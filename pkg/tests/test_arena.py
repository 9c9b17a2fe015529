"""Tick mechanics of the simulator: timing boundaries, command effects,
seeded enemy behavior, and the rendered frame contract."""
import pytest

from varp.arena.patterns import ARCHETYPES, pattern_for
from varp.arena.render import (
    FROZEN_GLYPH,
    PLAYER_GLYPH,
    render_frame,
    render_png,
)
from varp.arena.tasks import all_task_specs, bfs_path, map_def
from varp.arena.types import (
    CAST,
    DODGE,
    HEAL,
    HEAVY,
    INTERACT,
    LIGHT,
    Difficulty,
    Direction,
    EnemyState,
    PlayerState,
    StatusKind,
    TaskKind,
    TaskSpec,
    move,
)
from varp.arena.world import (
    ItemState,
    WorldState,
    chebyshev,
    execute_atomic,
    execute_sequence,
    new_world,
    task_status,
)
from varp.config import DEFAULT_TUNING


def duel_world(archetype="WolfScout", engaged_label=None, locked_label=None,
               enemy_pos=(3, 2), enemy_hp=None, seed=0, kind=TaskKind.COMBAT,
               goal=None, items=None, walls=frozenset(), budget=10**6,
               width=8, height=5, inert=False):
    """Small hand-built arena: player at (2,2), one enemy, no map file."""
    t = DEFAULT_TUNING
    spec = TaskSpec(task_id=10, name="duel", difficulty=Difficulty.HARD,
                    kind=kind, tick_budget=budget)
    player = PlayerState(
        pos=(2, 2), hp=t.player_max_hp, heal_charges=t.heal_charges_start,
        heavy_charge=0, focus_progress=0, facing=Direction.E,
        invulnerable_until=-1, immobilize_ready_at=0,
    )
    hp = enemy_hp if enemy_hp is not None else ARCHETYPES[archetype].max_hp
    enemy = EnemyState(
        archetype=archetype, pos=enemy_pos, hp=hp, max_hp=hp,
        active_label=engaged_label, phase_tick=0, locked_label=locked_label,
        frozen_until=10**9 if inert else -1,
    )
    return WorldState(
        spec=spec, seed=seed, width=width, height=height, walls=walls,
        goal=goal, tick=0, player=player,
        enemies=[enemy], items=dict(items or {}), notices=[],
        rng_draws=0, tuning=t,
    )


def hit_ticks(outcome, tag):
    return [e["tick"] for e in outcome.events if e["tag"] == tag]


def test_all_twelve_maps_load_with_reachable_objectives():
    specs = all_task_specs()
    assert [s.task_id for s in specs] == list(range(1, 13))
    for spec in specs:
        md = map_def(spec.task_id)
        assert md.spec == spec
        px, py = md.player_spawn
        assert 0 <= px < md.width and 0 <= py < md.height
        assert md.player_spawn not in md.walls
        if spec.kind is TaskKind.NAVIGATE:
            assert md.goal is not None
            assert bfs_path(md, md.player_spawn, md.goal) is not None
        if spec.kind is TaskKind.COMBAT:
            assert md.enemies
            for _, pos in md.enemies:
                assert bfs_path(md, md.player_spawn, pos) is not None
        if spec.kind in (TaskKind.GATHER, TaskKind.OPEN):
            assert md.items
            for _, pos in md.items:
                assert bfs_path(md, md.player_spawn, pos) is not None
    with pytest.raises(KeyError):
        map_def(13)


# WolfScout lunge: telegraph 5, single 12-damage window, so with the enemy
# engaged at tick 0 the hit lands exactly at tick 5.


def test_hit_on_the_last_iframe_tick_is_evaded():
    world = duel_world(engaged_label="lunge", enemy_hp=10**6)
    # light occupies ticks 1..3, dodge starts at tick 3: iframes through 5
    _, out = execute_sequence(world, [LIGHT, DODGE, LIGHT])
    assert hit_ticks(out, "hit_evaded") == [5]
    assert out.hits_taken == 0 and out.hp_lost == 0


def test_hit_one_tick_after_the_iframes_lapse_lands():
    world = duel_world(engaged_label="lunge", enemy_hp=10**6)
    # dodges start at ticks 0 and 2: iframes through 4, hit at 5 connects
    _, out = execute_sequence(world, [DODGE, DODGE, LIGHT])
    assert hit_ticks(out, "hit_taken") == [5]
    assert out.hp_lost == 12 and out.hits_evaded == 0


def test_undefended_hit_lands_at_the_telegraphed_tick():
    world = duel_world(engaged_label="lunge", enemy_hp=10**6)
    _, out = execute_sequence(world, [LIGHT, LIGHT])
    assert hit_ticks(out, "hit_taken") == [5]
    assert world.player.hp == 100 - 12


def test_multi_window_pattern_lands_each_listed_offset():
    pattern = pattern_for("Bullguard", "triple_chop")
    expect = [pattern.hit_tick(w) for w in pattern.hit_windows]
    world = duel_world("Bullguard", engaged_label="triple_chop", enemy_hp=10**6)
    _, out = execute_sequence(world, [LIGHT] * 4)
    assert hit_ticks(out, "hit_taken") == expect == [4, 6, 8]
    assert out.hp_lost == sum(w.damage for w in pattern.hit_windows)


def test_seeded_seed_counter_dodges_every_chop():
    world = duel_world("Bullguard", engaged_label="triple_chop", enemy_hp=10**6)
    _, out = execute_sequence(world, [DODGE] * 4 + [LIGHT] * 5)
    assert out.hits_taken == 0
    assert out.hits_evaded == 3
    assert out.damage_dealt == 5 * DEFAULT_TUNING.light_damage


def test_telegraph_glyph_shows_during_windup_then_clears():
    world = duel_world("Bullguard", engaged_label="triple_chop", enemy_hp=10**6)
    glyph = pattern_for("Bullguard", "triple_chop").glyph
    execute_atomic(world, DODGE)  # tick 2, phase 2 of a 4-tick telegraph
    frame = render_frame(world)
    cells = [(x, y) for y, row in enumerate(frame.viewport)
             for x, ch in enumerate(row) if ch == glyph]
    assert len(cells) == 1
    assert chebyshev(cells[0], (3, 2)) == 1
    execute_atomic(world, DODGE)  # tick 4: telegraph over, swings begin
    assert all(glyph not in row for row in render_frame(world).viewport)


def test_freeze_interrupts_the_windup_and_postpones_reengagement():
    t = DEFAULT_TUNING
    world = duel_world(engaged_label="lunge", enemy_hp=10**6)
    _, out = execute_atomic(world, CAST)  # resolves on tick 2
    assert hit_ticks(out, "frozen") == [2]
    enemy = world.enemies[0]
    assert enemy.active_label is None and enemy.phase_tick == 0
    assert enemy.frozen_until == 2 + t.freeze_ticks
    assert enemy.next_ready_at == enemy.frozen_until + 1
    assert world.player.immobilize_ready_at == 2 + t.immobilize_cooldown
    assert render_frame(world).hud.spell_ready is False
    frozen_frame = render_frame(world)
    assert any(FROZEN_GLYPH in row for row in frozen_frame.viewport)

    # no window from the interrupted lunge ever lands; the enemy re-telegraphs
    # on the first tick after thawing
    _, out2 = execute_sequence(world, [LIGHT] * 5)  # ticks 3..17
    assert out2.hits_taken == 0 and out2.hits_evaded == 0
    assert hit_ticks(out2, "telegraph_onset") == [enemy.frozen_until + 1]


def test_cast_reports_a_noop_on_cooldown_or_out_of_range():
    world = duel_world(engaged_label="lunge", enemy_hp=10**6)
    execute_atomic(world, CAST)
    _, again = execute_atomic(world, CAST)
    assert hit_ticks(again, "cast_noop")
    far = duel_world(enemy_pos=(7, 2), width=12)  # chebyshev 5 > range 4
    _, out = execute_atomic(far, CAST)
    assert hit_ticks(out, "cast_noop")


def test_four_landed_lights_bank_one_heavy_charge():
    world = duel_world(enemy_hp=10**6, inert=True)
    execute_sequence(world, [LIGHT] * 3)
    assert world.player.heavy_charge == 0
    assert world.player.focus_progress == 3
    execute_atomic(world, LIGHT)
    assert world.player.heavy_charge == 1
    assert world.player.focus_progress == 0
    _, heavy_out = execute_atomic(world, HEAVY)
    assert heavy_out.damage_dealt == DEFAULT_TUNING.heavy_damage
    assert world.player.heavy_charge == 0
    _, broke = execute_atomic(world, HEAVY)
    assert hit_ticks(broke, "no_focus")
    assert broke.damage_dealt == 0


def test_whiffed_lights_build_no_focus():
    world = duel_world(enemy_pos=(6, 2), inert=True)  # out of reach
    _, out = execute_sequence(world, [LIGHT] * 4)
    assert out.damage_dealt == 0
    assert len(hit_ticks(out, "whiff")) == 4
    assert world.player.heavy_charge == 0


def test_heal_restores_capped_health_and_spends_charges():
    world = duel_world(inert=True)
    world.player.hp = 30
    execute_atomic(world, HEAL)
    assert world.player.hp == 60 and world.player.heal_charges == 2
    world.player.hp = 90
    execute_atomic(world, HEAL)
    assert world.player.hp == 100 and world.player.heal_charges == 1
    _, full = execute_atomic(world, HEAL)
    assert hit_ticks(full, "heal_noop")
    assert world.player.heal_charges == 1
    world.player.hp = 40
    world.player.heal_charges = 0
    _, dry = execute_atomic(world, HEAL)
    assert hit_ticks(dry, "heal_noop") and world.player.hp == 40


def test_movement_blocks_on_walls_items_enemies_and_edges():
    world = duel_world(walls=frozenset({(2, 1)}),
                       items={(1, 2): ItemState(kind="gatherable")},
                       inert=True)
    for direction in (Direction.N, Direction.W, Direction.E):
        _, out = execute_atomic(world, move(direction))
        assert hit_ticks(out, "move_blocked"), direction
        assert world.player.pos == (2, 2)
        assert out.ticks_elapsed == 1  # a bump still spends the tick
    _, out = execute_atomic(world, move(Direction.S))
    assert hit_ticks(out, "moved") and world.player.pos == (2, 3)
    execute_atomic(world, move(Direction.S))
    _, out = execute_atomic(world, move(Direction.S))  # y=4 is the last row
    assert hit_ticks(out, "move_blocked") and world.player.pos == (2, 4)


def test_interact_gathers_items_and_opens_chests():
    world = duel_world(kind=TaskKind.GATHER,
                       items={(3, 3): ItemState(kind="gatherable")}, inert=True)
    _, out = execute_atomic(world, INTERACT)
    assert hit_ticks(out, "gathered")
    assert world.items == {}
    status = task_status(world)
    assert status.kind is StatusKind.SUCCESS and status.reason == "items gathered"

    chest = duel_world(kind=TaskKind.OPEN,
                       items={(2, 3): ItemState(kind="chest")}, inert=True)
    _, out = execute_atomic(chest, INTERACT)
    assert hit_ticks(out, "chest_opened")
    status = task_status(chest)
    assert status.kind is StatusKind.SUCCESS and status.reason == "chest opened"

    # an already-opened chest no longer takes interactions; combat kind keeps
    # the task ongoing so the command actually runs
    busy = duel_world(items={(2, 3): ItemState(kind="chest")}, inert=True)
    execute_atomic(busy, INTERACT)
    _, again = execute_atomic(busy, INTERACT)
    assert hit_ticks(again, "interact_noop")

    nothing = duel_world(inert=True)
    _, out = execute_atomic(nothing, INTERACT)
    assert hit_ticks(out, "interact_noop")


def test_navigation_succeeds_within_one_cell_of_the_goal():
    world = duel_world(kind=TaskKind.NAVIGATE, goal=(5, 2), enemy_pos=(6, 4),
                       inert=True)
    assert task_status(world).ongoing
    execute_atomic(world, move(Direction.E))
    assert task_status(world).ongoing  # chebyshev 2
    execute_atomic(world, move(Direction.E))
    status = task_status(world)
    assert status.kind is StatusKind.SUCCESS and status.reason == "goal reached"


def test_timeout_is_strict_and_success_outranks_it():
    world = duel_world(kind=TaskKind.NAVIGATE, goal=(7, 0), budget=3, inert=True)
    execute_sequence(world, [move(Direction.S)] * 3)
    assert world.tick == 3
    assert task_status(world).ongoing  # at the budget, not past it
    execute_atomic(world, move(Direction.N))
    assert task_status(world) == task_status(world)
    assert task_status(world).kind is StatusKind.FAILURE
    assert task_status(world).reason == "timeout"

    late = duel_world(kind=TaskKind.NAVIGATE, goal=(2, 3), budget=3, inert=True)
    late.tick = 99  # long past the budget but standing at the goal
    assert task_status(late).kind is StatusKind.SUCCESS


def test_commands_against_a_resolved_task_do_nothing():
    world = duel_world(kind=TaskKind.NAVIGATE, goal=(2, 3), inert=True)
    assert task_status(world).kind is StatusKind.SUCCESS
    _, out = execute_atomic(world, LIGHT)
    assert out.commands_run == 0 and out.ticks_elapsed == 0
    assert world.tick == 0


def test_player_defeat_fails_the_task_and_stops_execution():
    world = duel_world("Bullguard", engaged_label="triple_chop", enemy_hp=10**6)
    world.player.hp = 20  # two chops are lethal
    _, out = execute_sequence(world, [LIGHT] * 8)
    status = task_status(world)
    assert status.kind is StatusKind.FAILURE and status.reason == "defeated"
    assert world.player.hp == 0
    # the sequence stopped early instead of running all 8 lights
    assert out.commands_run < 8


def test_sequences_are_capped_at_thirty_two_commands():
    world = duel_world(inert=True)
    with pytest.raises(ValueError):
        execute_sequence(world, [LIGHT] * 33)
    with pytest.raises(TypeError):
        execute_sequence(world, [LIGHT, "Dodge"])
    _, out = execute_sequence(duel_world(inert=True), [DODGE] * 32)
    assert out.commands_run == 32


def first_onset_label(seed):
    world = duel_world("Croaky", seed=seed, enemy_hp=10**6)
    _, out = execute_sequence(world, [DODGE] * 3)
    onsets = [e for e in out.events if e["tag"] == "telegraph_onset"]
    assert onsets and onsets[0]["tick"] == 1
    return onsets[0]["label"], world.rng_draws


def test_pattern_choice_is_a_seeded_weighted_draw():
    labels = {}
    for seed in range(16):
        label, draws = first_onset_label(seed)
        assert draws == 1
        assert label == first_onset_label(seed)[0]  # same seed, same draw
        labels.setdefault(label, 0)
        labels[label] += 1
    assert set(labels) == {"tongue_lash", "belly_slam"}
    assert labels["tongue_lash"] > labels["belly_slam"]  # 2:1 weighting


def test_locked_enemies_reengage_without_consuming_rng():
    world = duel_world("Croaky", locked_label="belly_slam", enemy_hp=10**6)
    _, out = execute_sequence(world, [DODGE] * 3)
    onsets = [e for e in out.events if e["tag"] == "telegraph_onset"]
    assert onsets[0]["label"] == "belly_slam"
    assert world.rng_draws == 0


def test_same_seed_trajectories_are_identical():
    script = [LIGHT, DODGE, LIGHT, LIGHT, DODGE, HEAL, LIGHT, LIGHT]
    runs = []
    for _ in range(2):
        world = new_world(9, seed=4)
        _, out = execute_sequence(world, script)
        runs.append((out, render_frame(world).to_dict(), world.rng_draws))
    assert runs[0] == runs[1]


def test_telegraph_onset_events_carry_the_cue_and_a_frame():
    world = duel_world("Bullguard", enemy_hp=10**6, seed=3)
    _, out = execute_sequence(world, [DODGE] * 3)
    onset = [e for e in out.events if e["tag"] == "telegraph_onset"][0]
    assert onset["cue"] == pattern_for("Bullguard", onset["label"]).cue
    assert onset["frame"]["tick"] == onset["tick"]
    glyph = pattern_for("Bullguard", onset["label"]).glyph
    assert any(glyph in row for row in onset["frame"]["viewport"])


def test_rendered_frame_legend_and_notice_expiry():
    world = duel_world("Bullguard", enemy_hp=ARCHETYPES["Bullguard"].max_hp)
    frame = render_frame(world)
    assert frame.viewport[2][2] == PLAYER_GLYPH
    assert frame.viewport[2][3] == "B"
    world.enemies[0].hp = world.enemies[0].max_hp // 2 - 1
    assert render_frame(world).viewport[2][3] == "b"

    world.notices.append((0, "Chest opened"))
    world.tick = DEFAULT_TUNING.notice_ttl
    assert "Chest opened" in render_frame(world).notices
    world.tick = DEFAULT_TUNING.notice_ttl + 1
    assert "Chest opened" not in render_frame(world).notices


def test_png_raster_is_byte_stable():
    frame = render_frame(duel_world())
    a, b = render_png(frame), render_png(frame)
    assert a == b
    assert a[:8] == b"\x89PNG\r\n\x1a\n"
