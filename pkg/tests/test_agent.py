"""The step pipeline: reflection, task inference, skill curation, the
decomposed/monolithic decision split with its overrides, guidance injection,
and per-step bookkeeping."""
import json
from dataclasses import replace

import pytest

from varp.agent import (
    FALLBACK_ACTION,
    HEAL_ACTION,
    SPELL_ACTION,
    AgentLibraries,
    EpisodeState,
    TaskEnv,
    curate,
    decide,
    gather_information,
    infer_task,
    new_action_library,
    run_episode,
    run_step,
    self_reflect,
)
from varp.arena.patterns import pattern_for
from varp.arena.types import DODGE, ExecOutcome, Frame, StatusKind
from varp.arena.world import execute_sequence, new_world
from varp.bench import guided_for_task
from varp.config import AgentConfig
from varp.gateway.oracle import ScriptedOracle
from varp.gateway.types import GatewayError, ModelReply, PromptBundle
from varp.memory.actions import build_entry
from varp.memory.situations import GatheredInfo, ReflectionVerdict, SituationRecord


def fresh(task_id, seed, guided=None):
    env = TaskEnv(task_id, seed)
    libs = AgentLibraries.fresh(guided=guided)
    return env, libs, ScriptedOracle(), EpisodeState()


class SchemaBackend:
    """Canned replies per schema id; records every bundle it sees."""

    def __init__(self, replies):
        self.replies = dict(replies)
        self.bundles = []

    def complete(self, bundle: PromptBundle) -> ModelReply:
        self.bundles.append(bundle)
        doc = self.replies[bundle.schema_id]
        if callable(doc):
            doc = doc(bundle)
        return ModelReply(raw_text=json.dumps(doc))


BASE_REPLIES = {
    "enemy_report": {"archetype": "WolfScout", "hp_estimate": "healthy",
                     "position": [3, 2], "action_description": "idle"},
    "combat_mode": {"mode": "light"},
    "health_report": {"heal_now": False},
    "spell_report": {"cast_spell_now": False},
    "decision_integration": {"chosen": "basic_light_combo", "rationale": "hit it"},
}


def combat_inputs(task_id=2, heavy_charge=0):
    env = TaskEnv(task_id, 0)
    frame = env.frame()
    gathered = gather_information((frame,))
    gathered.hud_reading["heavy_charge"] = heavy_charge
    actions = new_action_library()
    candidates = actions.curate_skills(
        actions.get(FALLBACK_ACTION).annotation_embedding, 5)
    ctx = {"step": 0, "task_id": task_id, "task_kind": "combat",
           "failed_streak": 0}
    return frame, gathered, actions, candidates, ctx


def test_task_three_needs_at_most_three_decisions():
    result = run_episode(3, 0, AgentLibraries.fresh(), ScriptedOracle())
    assert result.status.kind is StatusKind.SUCCESS
    assert result.inference_count <= 3
    assert result.inference_count == result.steps
    assert result.atomic_ops_count > 0


def test_one_situation_record_per_step_with_all_fields():
    env, libs, oracle, state = fresh(1, 0)
    config = AgentConfig()
    results = []
    for _ in range(3):
        res = run_step(env, libs, oracle, config, state)
        if res.task_complete:
            break
        results.append(res)
    assert len(libs.situations) == len(results) == state.step
    for i, res in enumerate(results):
        rec = res.record
        assert isinstance(rec, SituationRecord)
        assert rec.step_index == i and rec.task_id == 1
        assert rec.keyframes and rec.keyframes[-1].tick >= 0
        assert isinstance(rec.gathered, GatheredInfo)
        assert isinstance(rec.reflection, ReflectionVerdict)
        assert rec.task_description
        assert rec.chosen_action in libs.actions
        assert isinstance(rec.outcome, ExecOutcome)
        assert rec.chosen_action == res.decision.chosen


def test_inference_and_atomic_counters_track_decisions_and_commands():
    env, libs, oracle, state = fresh(2, 0)
    config = AgentConfig()
    executed = 0
    while env.status().ongoing and state.step < 30:
        run_step(env, libs, oracle, config, state)
    for rec in libs.situations.records():
        executed += rec.outcome.commands_run
    assert state.inference_count == state.step == len(libs.situations)
    assert state.atomic_ops_count == executed


def test_stepping_a_finished_task_is_a_noop():
    env, libs, oracle, state = fresh(3, 0)
    while env.status().ongoing:
        run_step(env, libs, oracle, AgentConfig(), state)
    before = (state.step, len(libs.situations))
    res = run_step(env, libs, oracle, AgentConfig(), state)
    assert res.task_complete and res.record is None
    assert (state.step, len(libs.situations)) == before


def test_identical_runs_are_identical():
    a = run_episode(2, 5, AgentLibraries.fresh(), ScriptedOracle())
    b = run_episode(2, 5, AgentLibraries.fresh(), ScriptedOracle())
    assert a == b


def test_backend_outage_fails_the_episode_as_a_backend_loss():
    class Down:
        def complete(self, bundle):
            raise GatewayError("socket closed")

    result = run_episode(2, 0, AgentLibraries.fresh(), Down())
    assert result.status.kind is StatusKind.FAILURE
    assert result.status.reason == "backend"


def test_step_cap_fails_the_episode():
    result = run_episode(11, 0, AgentLibraries.fresh(), ScriptedOracle(),
                         config=AgentConfig(step_cap=2, human_guidance_enabled=False))
    assert result.status.kind is StatusKind.FAILURE
    assert result.status.reason in ("step_cap", "timeout")
    assert result.steps <= 2


# ------------------------------------------------------------- decide ----


def test_decide_with_no_candidates_falls_back():
    frame, gathered, actions, _, ctx = combat_inputs()
    backend = SchemaBackend(BASE_REPLIES)
    decision = decide([], gathered, backend, AgentConfig(), ctx, frame, actions)
    assert decision.chosen == FALLBACK_ACTION
    assert backend.bundles == []  # nothing to ask about


def test_decide_rejects_answers_outside_the_slate():
    frame, gathered, actions, candidates, ctx = combat_inputs()
    replies = dict(BASE_REPLIES)
    replies["decision_integration"] = {"chosen": "made_up_skill", "rationale": "?"}
    backend = SchemaBackend(replies)
    decision = decide(candidates, gathered, backend, AgentConfig(), ctx, frame,
                      actions)
    assert decision.chosen == FALLBACK_ACTION
    # the integration question was re-asked before giving up
    asks = [b.schema_id for b in backend.bundles]
    assert asks.count("decision_integration") == 3


def test_decide_accepts_a_member_of_the_slate():
    frame, gathered, actions, candidates, ctx = combat_inputs()
    backend = SchemaBackend(BASE_REPLIES)
    decision = decide(candidates, gathered, backend, AgentConfig(), ctx, frame,
                      actions)
    assert decision.chosen == "basic_light_combo"
    assert decision.rationale == "hit it"
    assert decision.overrides == ()


def test_heal_override_outranks_spell_and_the_integrated_choice():
    frame, gathered, actions, candidates, ctx = combat_inputs()
    replies = dict(BASE_REPLIES)
    replies["health_report"] = {"heal_now": True}
    replies["spell_report"] = {"cast_spell_now": True}
    backend = SchemaBackend(replies)
    decision = decide(candidates, gathered, backend, AgentConfig(), ctx, frame,
                      actions)
    assert decision.chosen == HEAL_ACTION
    assert decision.overrides == ("heal",)
    # heal decided the step, so integration was never consulted
    assert all(b.schema_id != "decision_integration" for b in backend.bundles)


def test_spell_override_applies_when_health_is_fine():
    frame, gathered, actions, candidates, ctx = combat_inputs()
    replies = dict(BASE_REPLIES)
    replies["spell_report"] = {"cast_spell_now": True}
    backend = SchemaBackend(replies)
    decision = decide(candidates, gathered, backend, AgentConfig(), ctx, frame,
                      actions)
    assert decision.chosen == SPELL_ACTION
    assert decision.overrides == ("spell",)


def test_an_empty_focus_gauge_forces_light_mode_into_the_reports():
    frame, gathered, actions, candidates, ctx = combat_inputs(heavy_charge=0)
    replies = dict(BASE_REPLIES)
    replies["combat_mode"] = {"mode": "heavy"}
    backend = SchemaBackend(replies)
    decide(candidates, gathered, backend, AgentConfig(), ctx, frame, actions)
    integration = [b for b in backend.bundles
                   if b.schema_id == "decision_integration"][0]
    reports = json.loads(
        next(s for s in integration.user_segments if s.startswith("reports: "))[9:])
    assert reports["mode"] == "light"


def test_monolithic_mode_asks_one_question_and_keeps_the_overrides():
    frame, gathered, actions, candidates, ctx = combat_inputs()
    cfg = AgentConfig(dtsa_enabled=False)
    backend = SchemaBackend({
        "monolithic_decision": {
            "enemy": {}, "mode": "light", "heal_now": True,
            "cast_spell_now": False, "chosen": "basic_light_combo",
            "rationale": "x",
        },
    })
    decision = decide(candidates, gathered, backend, cfg, ctx, frame, actions)
    assert decision.chosen == HEAL_ACTION
    assert [b.schema_id for b in backend.bundles] == ["monolithic_decision"]


# ----------------------------------------------------- oracle templates ----


def test_oracle_reports_the_telegraph_cue_verbatim():
    world = new_world(10, 0)  # Bullguard duel, spawn already in reach
    _, out = execute_sequence(world, [DODGE] * 4)
    onset = next(e for e in out.events if e["tag"] == "telegraph_onset")
    frame = Frame.from_dict(onset["frame"])
    bundle = PromptBundle(
        schema_id="enemy_report", system_text="",
        user_segments=('ctx: {"step": 0}',), frames=(frame,),
    )
    doc = json.loads(ScriptedOracle().complete(bundle).raw_text)
    assert doc["archetype"] == "Bullguard"
    assert doc["action_description"] == pattern_for("Bullguard", onset["label"]).cue
    assert doc["action_description"] == onset["cue"]


def test_reflection_judges_progress_from_the_outcome():
    oracle = ScriptedOracle()
    env = TaskEnv(2, 0)
    frame = env.frame()
    ctx = {"step": 1, "task_id": 2, "task_kind": "combat", "failed_streak": 0}

    first = self_reflect([frame], None, None, oracle, ctx)
    assert first == ReflectionVerdict(True, False, "")

    hit = self_reflect([frame], "basic_light_combo",
                       ExecOutcome(damage_dealt=8, commands_run=3), oracle, ctx)
    assert hit.last_action_succeeded and not hit.task_complete

    stuck = self_reflect([frame], "move_step_east",
                         ExecOutcome(commands_run=8), oracle, ctx,
                         net_moved=False)
    assert not stuck.last_action_succeeded
    assert stuck.failure_reason


def test_task_inference_names_the_combat_target():
    env = TaskEnv(2, 0)
    frame = env.frame()
    gathered = gather_information((frame,))
    ctx = {"step": 0, "task_id": 2, "task_kind": "combat", "failed_streak": 0}
    description = infer_task(gathered, ReflectionVerdict(True, False, ""),
                             ScriptedOracle(), ctx, frame)
    assert "WolfScout" in description
    assert "defeat" in description


# ----------------------------------------------------------- curation ----


def test_curate_drops_stale_guided_entries_and_seats_the_live_one():
    actions = new_action_library()
    stale = build_entry("human_guided_old_3", (actions.get(FALLBACK_ACTION).body),
                        "walk the first stretch of the route",
                        provenance="human_guided")
    live = build_entry("human_guided_live_9", (actions.get(FALLBACK_ACTION).body),
                       "walk the next stretch of the route",
                       provenance="human_guided")
    actions.add_action(stale)
    actions.add_action(live)
    picked = curate(actions, "walk the route to the goal", 5, guided_entry=live)
    names = [e.name for e, _ in picked]
    assert "human_guided_live_9" in names
    assert "human_guided_old_3" not in names
    assert len(names) == 5
    assert len(set(names)) == 5

    plain = curate(actions, "walk the route to the goal", 5)
    assert len(plain) == 5  # no filtering without a live window


def test_guidance_injection_summarizes_a_window_into_the_library():
    guided = guided_for_task(12)
    assert guided is not None and len(guided) > 0
    env, libs, oracle, state = fresh(12, 0, guided=guided)
    run_step(env, libs, oracle, AgentConfig(), state)
    guided_names = [n for n in libs.actions.names()
                    if libs.actions.get(n).provenance == "human_guided"]
    assert len(guided_names) == 1
    assert guided_names[0].startswith("human_guided_")
    assert libs.actions.get(guided_names[0]).body


def test_guided_demonstrations_gate_the_route_task():
    win = run_episode(12, 0, AgentLibraries.fresh(guided=guided_for_task(12)),
                      ScriptedOracle())
    assert win.status.kind is StatusKind.SUCCESS

    alone = run_episode(12, 0, AgentLibraries.fresh(),
                        ScriptedOracle(),
                        config=AgentConfig(human_guidance_enabled=False))
    assert alone.status.kind is StatusKind.FAILURE


def test_decomposition_survives_an_unreliable_judge_where_monolith_spirals():
    ok = run_episode(4, 0, AgentLibraries.fresh(), ScriptedOracle())
    assert ok.status.kind is StatusKind.SUCCESS
    mono = run_episode(4, 0, AgentLibraries.fresh(), ScriptedOracle(),
                       config=AgentConfig(dtsa_enabled=False))
    assert mono.status.kind is StatusKind.FAILURE
