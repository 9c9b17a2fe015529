"""The agent loop: gather, reflect, infer, curate, decide, execute, record.

The agent sees the world only through rendered frames and acts only through
command sequences; nothing in here touches simulator internals. Model queries
go through a Backend; with the scripted oracle the whole loop is deterministic
for a given (task, seed, config).
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field

from ..arena.render import extract_entities, render_frame
from ..arena.types import Frame, StatusKind, TaskStatus
from ..arena.world import execute_sequence, new_world, task_status
from ..config import DEFAULT_TUNING, AgentConfig, OptimizeConfig
from ..gateway.schemas import BadReplyFormat, parse_structured, system_prompt
from ..gateway.types import Backend, GatewayError, PromptBundle
from ..guidance.summarize import summarize_to_action, window_action_name
from ..memory.actions import ActionLibrary
from ..memory.guided import HumanGuidedLibrary
from ..memory.io import LibraryError
from ..memory.situations import (
    GatheredInfo,
    ReflectionVerdict,
    SituationLibrary,
    SituationRecord,
)
from ..gateway.embedding import embed_text
from ..soag import SoagError, recognize_enemy_action, soag_update
from .predefined import FALLBACK_ACTION, HEAL_ACTION, SPELL_ACTION, new_action_library

RE_ASKS = 2  # extra attempts after a malformed reply before falling back


class TaskEnv:
    """World handle narrowed to what an agent may touch: frames, execution,
    task status. Everything else stays private to the simulator."""

    def __init__(self, task_id: int, seed: int, tuning=DEFAULT_TUNING):
        self._world = new_world(task_id, seed, tuning)
        self.task_id = task_id
        self.task_kind = self._world.spec.kind.value
        self.tuning = tuning

    def frame(self) -> Frame:
        return render_frame(self._world)

    def status(self) -> TaskStatus:
        return task_status(self._world)

    def execute(self, commands):
        _, out = execute_sequence(self._world, commands)
        return out


@dataclass
class AgentLibraries:
    actions: ActionLibrary
    situations: SituationLibrary
    guided: HumanGuidedLibrary | None = None

    @classmethod
    def fresh(cls, tuning=DEFAULT_TUNING, guided=None):
        return cls(actions=new_action_library(tuning),
                   situations=SituationLibrary(), guided=guided)


@dataclass(frozen=True)
class Decision:
    chosen: str
    rationale: str
    overrides: tuple = ()


@dataclass(frozen=True)
class StepResult:
    task_complete: bool
    decision: Decision | None = None
    record: SituationRecord | None = None
    status: TaskStatus | None = None


@dataclass(frozen=True)
class EpisodeResult:
    status: TaskStatus
    ticks: int
    steps: int
    inference_count: int
    atomic_ops_count: int


@dataclass
class EpisodeState:
    """Mutable bookkeeping threaded through run_step; one per episode."""

    step: int = 0
    failed_streak: int = 0
    last_action: str | None = None
    last_outcome: object = None
    last_cell: tuple | None = None
    inference_count: int = 0
    atomic_ops_count: int = 0


# -- backend plumbing ---------------------------------------------------------


def _ask(backend: Backend, schema_id: str, segments, frames, valid=None):
    """Query with up to RE_ASKS retries on malformed replies; None if all fail."""
    bundle = PromptBundle(
        schema_id=schema_id,
        system_text=system_prompt(schema_id),
        user_segments=tuple(segments),
        frames=tuple(frames),
    )
    for _ in range(1 + RE_ASKS):
        reply = backend.complete(bundle)
        try:
            doc = parse_structured(schema_id, reply.raw_text)
        except BadReplyFormat:
            continue
        if valid is not None and not valid(doc):
            continue
        return doc
    return None


def _ctx_segment(ctx: dict) -> str:
    return "ctx: " + json.dumps(ctx, sort_keys=True)


def _candidates_segment(candidates) -> str:
    lines = ["candidates:"]
    for entry, _sim in candidates:
        key = f"{entry.key[0]}/{entry.key[1]}" if entry.key else "-"
        lines.append(
            f"- {entry.name} :: {entry.provenance} :: {key} :: {entry.annotation}"
        )
    return "\n".join(lines)


def _outcome_doc(outcome) -> dict:
    tags = {e.get("tag") for e in outcome.events}
    return {
        "damage_dealt": outcome.damage_dealt,
        "hits_landed": outcome.hits_landed,
        "hits_evaded": outcome.hits_evaded,
        "hits_taken": outcome.hits_taken,
        "hp_lost": outcome.hp_lost,
        "hp_gained": "healed" in tags,
        "moved": "moved" in tags,
        "interacted": "gathered" in tags or "chest_opened" in tags,
    }


def _player_cell(frame: Frame):
    for y, row in enumerate(frame.viewport):
        x = row.find("@")
        if x >= 0:
            return (x, y)
    return None


# -- pipeline stages ----------------------------------------------------------


def gather_information(frames) -> GatheredInfo:
    """Read the newest frame: notices verbatim, entities with cells, hud gauges."""
    frame = frames[-1]
    return GatheredInfo(
        notices=tuple(frame.notices),
        entities=tuple(extract_entities(frame)),
        hud_reading={
            "hp_fraction": frame.hud.hp_fraction,
            "heal_charges": frame.hud.heal_charges,
            "heavy_charge": frame.hud.heavy_charge,
            "spell_ready": frame.hud.spell_ready,
        },
    )


def self_reflect(recent_frames, last_action, last_outcome, backend: Backend,
                 ctx: dict, net_moved=None) -> ReflectionVerdict:
    """Judge the previous action. The first step has nothing to judge.

    net_moved, when known, replaces the per-command moved flag: a walk that
    bounced off walls and returned to its start should not read as progress.
    """
    if last_action is None:
        return ReflectionVerdict(True, False, "")
    doc = _outcome_doc(last_outcome)
    if net_moved is not None:
        doc["moved"] = net_moved
    segments = (
        _ctx_segment(ctx),
        "outcome: " + json.dumps(doc, sort_keys=True),
    )
    doc = _ask(backend, "reflection", segments, recent_frames)
    if doc is None:
        return ReflectionVerdict(True, False, "")
    succeeded = bool(doc["last_action_succeeded"])
    reason = doc.get("failure_reason", "")
    if succeeded:
        reason = ""
    elif not reason:
        reason = "the action had no effect"
    return ReflectionVerdict(succeeded, bool(doc["task_complete"]), reason)


def infer_task(gathered: GatheredInfo, reflection: ReflectionVerdict,
               backend: Backend, ctx: dict, frame: Frame) -> str:
    doc = _ask(backend, "task_inference", (_ctx_segment(ctx),), (frame,))
    if doc is None:
        return "continue the current task"
    return doc["description"]


def curate(actions: ActionLibrary, description: str, k: int,
           guided_entry=None):
    """Top-k retrieval. With a live demonstration window, older summarized
    windows are dropped from the slate (they describe stretches already
    walked) and the live one is guaranteed a seat."""
    query = embed_text(description)
    if guided_entry is None:
        return actions.curate_skills(query, k)
    n_guided = sum(
        1 for name in actions.names()
        if actions.get(name).provenance == "human_guided"
    )
    ranked = actions.curate_skills(query, k + n_guided)
    kept = [(e, s) for e, s in ranked
            if e.provenance != "human_guided" or e.name == guided_entry.name]
    kept = kept[:k]
    if all(e.name != guided_entry.name for e, _ in kept):
        sim = float(query @ guided_entry.annotation_embedding)
        kept = kept[: k - 1] + [(guided_entry, sim)]
    return kept


def decide(candidates, gathered: GatheredInfo, backend: Backend,
           config: AgentConfig, ctx: dict, frame: Frame,
           actions: ActionLibrary) -> Decision:
    """Pick the next action. Decomposed mode asks the four status questions
    separately and integrates; monolithic mode bundles everything into one
    query. Overrides rank heal above spell above the integrated choice."""
    if not candidates:
        return Decision(FALLBACK_ACTION, "no candidates retrieved", ())
    names = {entry.name for entry, _ in candidates}
    ctx_seg = _ctx_segment(ctx)
    cand_seg = _candidates_segment(candidates)

    def member(doc):
        return doc["chosen"] in names or doc["chosen"] == FALLBACK_ACTION

    if config.dtsa_enabled:
        enemy = _ask(backend, "enemy_report", (ctx_seg,), (frame,)) or {
            "archetype": "none", "hp_estimate": "none",
            "position": [-1, -1], "action_description": "no enemy",
        }
        mode_doc = _ask(backend, "combat_mode", (ctx_seg,), (frame,))
        mode = mode_doc["mode"] if mode_doc else "light"
        heal_doc = _ask(backend, "health_report", (ctx_seg,), (frame,))
        heal_now = bool(heal_doc["heal_now"]) if heal_doc else False
        spell_doc = _ask(backend, "spell_report", (ctx_seg,), (frame,))
        cast_now = bool(spell_doc["cast_spell_now"]) if spell_doc else False
        # the focus gauge cannot be read into charge that is not there
        if gathered.hud_reading.get("heavy_charge", 0) < 1:
            mode = "light"
        if heal_now and HEAL_ACTION in actions:
            return Decision(HEAL_ACTION, "health is low; restore it first",
                            ("heal",))
        if cast_now and SPELL_ACTION in actions:
            return Decision(SPELL_ACTION, "spell ready against a telegraphed "
                            "attack", ("spell",))
        reports = {
            "enemy": enemy, "mode": mode,
            "heal_now": heal_now, "cast_spell_now": cast_now,
        }
        doc = _ask(
            backend, "decision_integration",
            (ctx_seg, cand_seg, "reports: " + json.dumps(reports, sort_keys=True)),
            (frame,), valid=member,
        )
        if doc is None:
            return Decision(FALLBACK_ACTION, "integration reply unusable", ())
        return Decision(doc["chosen"], doc["rationale"], ())

    doc = _ask(backend, "monolithic_decision", (ctx_seg, cand_seg), (frame,),
               valid=member)
    if doc is None:
        return Decision(FALLBACK_ACTION, "decision reply unusable", ())
    if doc["heal_now"] and HEAL_ACTION in actions:
        return Decision(HEAL_ACTION, "health is low; restore it first", ("heal",))
    if doc["cast_spell_now"] and SPELL_ACTION in actions:
        return Decision(SPELL_ACTION, "spell ready against a telegraphed attack",
                        ("spell",))
    return Decision(doc["chosen"], doc["rationale"], ())


def _inject_guidance(frame: Frame, libraries: AgentLibraries, backend: Backend,
                     config: AgentConfig):
    """Summarize at most one demonstration window per step into the action
    library and return its entry; a window already summarized (by anchor
    identity) is returned without a second backend call."""
    guided = libraries.guided
    if guided is None or len(guided) == 0:
        return None
    window = guided.query_guidance(frame, config.guidance_n)
    name = window_action_name(window)
    if name in libraries.actions:
        return libraries.actions.get(name)
    try:
        return summarize_to_action(window, backend, libraries.actions)
    except LibraryError:
        return None


def _soag_hook(onsets, frame: Frame, gathered: GatheredInfo,
               reflection: ReflectionVerdict, body, outcome,
               libraries: AgentLibraries, backend: Backend, step: int,
               optimize: OptimizeConfig, tuning) -> None:
    """Learn from the newest telegraph seen while the last action ran."""
    onset_frame = Frame.from_dict(onsets[-1]["frame"])
    try:
        label = recognize_enemy_action(
            gathered, reflection, onset_frame, frame, backend, step=step)
        if label.label == "unknown":
            return
        soag_update(
            libraries.actions, label.archetype, label.label, body, outcome,
            cfg=optimize, tuning=tuning, credit_stats=False,
        )
    except (SoagError, BadReplyFormat, KeyError):
        return


def run_step(env: TaskEnv, libraries: AgentLibraries, backend: Backend,
             config: AgentConfig, state: EpisodeState,
             optimize: OptimizeConfig = OptimizeConfig()) -> StepResult:
    status = env.status()
    if not status.ongoing:
        return StepResult(task_complete=True, status=status)

    frame = env.frame()
    gathered = gather_information((frame,))
    ctx = {
        "step": state.step,
        "task_id": env.task_id,
        "task_kind": env.task_kind,
        "failed_streak": state.failed_streak,
    }
    cell = _player_cell(frame)
    net_moved = None
    if cell is not None and state.last_cell is not None:
        net_moved = cell != state.last_cell
    state.last_cell = cell
    recent = libraries.situations.recent_frames(config.reflect_m) + [frame]
    reflection = self_reflect(recent, state.last_action, state.last_outcome,
                              backend, ctx, net_moved=net_moved)
    if state.last_action is not None:
        state.failed_streak = (
            0 if reflection.last_action_succeeded else state.failed_streak + 1
        )
        ctx["failed_streak"] = state.failed_streak

    description = infer_task(gathered, reflection, backend, ctx, frame)
    guided_entry = None
    if config.human_guidance_enabled:
        guided_entry = _inject_guidance(frame, libraries, backend, config)
    candidates = curate(libraries.actions, description, config.curate_k,
                        guided_entry=guided_entry)
    decision = decide(candidates, gathered, backend, config, ctx, frame,
                      libraries.actions)
    state.inference_count += 1

    body = libraries.actions.get(decision.chosen).body
    outcome = env.execute(body)
    state.atomic_ops_count += outcome.commands_run
    libraries.actions.update_action(decision.chosen, stats_delta={
        "uses": 1,
        "successes": 1 if outcome.hits_taken == 0 else 0,
        "total_damage_dealt": float(outcome.damage_dealt),
        "total_hp_lost": float(outcome.hp_lost),
    })

    onsets = [e for e in outcome.events
              if e.get("tag") == "telegraph_onset" and "frame" in e]
    if config.soag_enabled and onsets:
        _soag_hook(onsets, frame, gathered, reflection, body, outcome,
                   libraries, backend, state.step, optimize, env.tuning)

    keyframes = ()
    if config.keyframe_mode == "per_action_plus_telegraph":
        keyframes = tuple(Frame.from_dict(e["frame"]) for e in onsets)
    keyframes += (env.frame(),)

    record = SituationRecord(
        step_index=state.step,
        task_id=env.task_id,
        keyframes=keyframes,
        gathered=gathered,
        reflection=reflection,
        task_description=description,
        chosen_action=decision.chosen,
        outcome=outcome,
    )
    libraries.situations.append_situation(record)

    state.last_action = decision.chosen
    state.last_outcome = outcome
    state.step += 1
    return StepResult(task_complete=False, decision=decision, record=record,
                      status=env.status())


def run_episode(task_id: int, seed: int, libraries: AgentLibraries,
                backend: Backend, config: AgentConfig = AgentConfig(),
                tuning=DEFAULT_TUNING,
                optimize: OptimizeConfig = OptimizeConfig()) -> EpisodeResult:
    env = TaskEnv(task_id, seed, tuning)
    state = EpisodeState()
    status = env.status()
    try:
        while status.ongoing:
            if state.step >= config.step_cap:
                status = TaskStatus(StatusKind.FAILURE, "step_cap")
                break
            result = run_step(env, libraries, backend, config, state, optimize)
            status = result.status
    except GatewayError:
        status = TaskStatus(StatusKind.FAILURE, "backend")
    return EpisodeResult(
        status=status,
        ticks=env.frame().tick,
        steps=state.step,
        inference_count=state.inference_count,
        atomic_ops_count=state.atomic_ops_count,
    )
