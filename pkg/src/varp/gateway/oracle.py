"""Scripted stand-in for a vision-language backend.

Answers every registered schema by parsing the textual frame in the bundle,
exactly like a perfectly attentive player would. Fallibility is injected only
into the five decision-stage questions: when the questions arrive decomposed
(one per query) each answer is wrong with a small probability; when they
arrive bundled in one monolithic query each is wrong with a much larger one.
Error draws are seeded by (oracle seed, step index, schema, question), so runs
replay bit-for-bit.
"""
from __future__ import annotations

import hashlib
import json

from ..arena.patterns import ARCHETYPES, cue_to_label
from ..arena.render import extract_entities, frame_to_text, parse_frame_text
from ..arena.types import Frame
from ..config import OracleConfig
from .schemas import serialize_structured
from .types import ModelReply, PromptBundle

MOVE_NAMES = {
    "E": "move_step_east",
    "W": "move_step_west",
    "N": "move_step_north",
    "S": "move_step_south",
}


def _chance(seed: int, step: int, schema_id: str, question: str) -> float:
    h = hashlib.sha256(f"{seed}:{step}:{schema_id}:{question}".encode()).digest()
    return int.from_bytes(h[:8], "big") / 2**64


def _segments(bundle: PromptBundle) -> dict:
    out = {"ctx": {}, "candidates": [], "reports": None, "outcome": None, "ops": None}
    for seg in bundle.user_segments:
        if seg.startswith("ctx: "):
            out["ctx"] = json.loads(seg[5:])
        elif seg.startswith("candidates:"):
            for line in seg.splitlines()[1:]:
                if not line.startswith("- "):
                    continue
                parts = [p.strip() for p in line[2:].split(" :: ")]
                if len(parts) == 4:
                    out["candidates"].append(
                        {"name": parts[0], "provenance": parts[1],
                         "key": parts[2], "annotation": parts[3]}
                    )
        elif seg.startswith("reports: "):
            out["reports"] = json.loads(seg[9:])
        elif seg.startswith("outcome: "):
            out["outcome"] = json.loads(seg[9:])
        elif seg.startswith("ops: "):
            out["ops"] = seg[5:].split()
    return out


def _view(frame: Frame) -> dict:
    """Re-read the frame through its canonical textual form."""
    parsed = parse_frame_text(frame_to_text(frame))
    entities = extract_entities(parsed)
    enemies = [e for e in entities if e["kind"] == "enemy"]
    items = [e for e in entities if e["kind"] == "item"]
    player = entities[0]["player_cell"] if entities else None
    if player is None:
        for y, row in enumerate(parsed.viewport):
            x = row.find("@")
            if x >= 0:
                player = (x, y)
                break
    return {"hud": parsed.hud, "enemies": enemies, "items": items, "player": player}


def _nearest(player, entities):
    if not entities or player is None:
        return None
    return min(
        entities,
        key=lambda e: (max(abs(e["cell"][0] - player[0]), abs(e["cell"][1] - player[1])),
                       e["cell"][1], e["cell"][0]),
    )


def _direction_prefs(src, dst):
    dx = dst[0] - src[0]
    dy = dst[1] - src[1]
    horiz = ("E" if dx >= 0 else "W")
    vert = ("S" if dy >= 0 else "N")
    if abs(dx) >= abs(dy):
        order = [horiz, vert, _opp(vert), _opp(horiz)]
    else:
        order = [vert, horiz, _opp(horiz), _opp(vert)]
    return order


def _opp(d):
    return {"E": "W", "W": "E", "N": "S", "S": "N"}[d]


class ScriptedOracle:
    """Deterministic rule-table backend; see module docstring."""

    def __init__(self, config: OracleConfig | None = None):
        self.config = config or OracleConfig()

    # -- error draws -----------------------------------------------------

    def _wrong(self, ctx: dict, schema_id: str, question: str, monolithic: bool) -> bool:
        eps = (
            self.config.epsilon_monolithic if monolithic
            else self.config.epsilon_decomposed
        )
        step = ctx.get("step", 0)
        return _chance(self.config.seed, step, schema_id, question) < eps

    # -- question answers --------------------------------------------------

    def _enemy_answer(self, view, wrong: bool):
        enemies = view["enemies"]
        telegraphing = [e for e in enemies if e.get("telegraph")]
        target = _nearest(view["player"], telegraphing or enemies)
        if target is None:
            return {"archetype": "none", "hp_estimate": "none",
                    "position": [-1, -1], "action_description": "no enemy"}
        if target.get("frozen"):
            action = "frozen"
        elif target.get("telegraph"):
            action = target.get("cue", "unknown")
        else:
            action = "idle"
        if wrong:
            action = "unclear"
        return {
            "archetype": target["label"],
            "hp_estimate": "wounded" if target.get("wounded") else "healthy",
            "position": list(target["cell"]),
            "action_description": action,
        }

    def _mode_answer(self, view, wrong: bool):
        heavy = view["hud"].heavy_charge >= 1
        if wrong:
            heavy = not heavy
        # the gauge cannot be misread into focus that is not there
        if view["hud"].heavy_charge < 1:
            heavy = False
        return {"mode": "heavy" if heavy else "light"}

    def _heal_answer(self, view, wrong: bool):
        heal = (
            view["hud"].hp_fraction <= self.config.heal_threshold
            and view["hud"].heal_charges > 0
        )
        if wrong:
            heal = not heal
        return {"heal_now": heal}

    def _spell_answer(self, view, wrong: bool):
        cast = view["hud"].spell_ready and any(
            e.get("telegraph") for e in view["enemies"]
        )
        if wrong:
            cast = not cast
        return {"cast_spell_now": cast}

    def _choice_answer(self, view, ctx, candidates, enemy_report, mode, wrong: bool):
        names = [c["name"] for c in candidates]
        prefs = self._choice_prefs(view, ctx, candidates, enemy_report, mode)
        chosen = None
        for name in prefs:
            if name in names:
                chosen = name
                break
        if chosen is None:
            chosen = "basic_light_combo"
        if wrong and len(names) > 1:
            step = ctx.get("step", 0)
            others = [n for n in names if n != chosen]
            pick = int(
                _chance(self.config.seed, step, "choice_error", chosen) * len(others)
            )
            chosen = others[min(pick, len(others) - 1)]
        rationale = f"preferred {chosen} given the current frame"
        return {"chosen": chosen, "rationale": rationale}

    def _choice_prefs(self, view, ctx, candidates, enemy_report, mode):
        kind = ctx.get("task_kind", "combat")
        player = view["player"]
        if kind in ("gather", "open"):
            wanted = "gatherable" if kind == "gather" else "chest"
            targets = [i for i in view["items"] if i["label"] == wanted]
            target = _nearest(player, targets)
            if target is None:
                return ["basic_light_combo"]
            d = max(abs(target["cell"][0] - player[0]), abs(target["cell"][1] - player[1]))
            if d <= 1:
                return ["interact_here"]
            return [MOVE_NAMES[x] for x in _direction_prefs(player, target["cell"])]
        if kind == "navigate":
            streak = ctx.get("failed_streak", 0)
            guided = [c["name"] for c in candidates if c["provenance"] == "human_guided"]
            if streak == 0 and guided:
                return guided[:1]
            goal = None
            for e in view["enemies"]:
                if e["label"] == "Bullguard":
                    goal = e["cell"]
                    break
            if goal is None or player is None:
                return ["basic_light_combo"]
            prefs = _direction_prefs(player, goal)
            rotated = prefs[streak % 4 :] + prefs[: streak % 4]
            return [MOVE_NAMES[rotated[0]]]
        # combat
        enemies = view["enemies"]
        if not enemies or player is None:
            return ["basic_light_combo"]
        target = _nearest(player, [e for e in enemies if e.get("telegraph")] or enemies)
        arch = enemy_report.get("archetype") if enemy_report else None
        cue = enemy_report.get("action_description") if enemy_report else None
        prefs = []
        if cue and arch in ARCHETYPES:
            label = cue_to_label(arch, cue)
            if label != "unknown":
                key = f"{arch}/{label}"
                for c in candidates:
                    if c["key"] == key:
                        prefs.append(c["name"])
                        break
        d = max(abs(target["cell"][0] - player[0]), abs(target["cell"][1] - player[1]))
        if d > 1:
            prefs += [MOVE_NAMES[x] for x in _direction_prefs(player, target["cell"])]
        elif mode == "heavy":
            prefs += ["heavy_strike", "basic_light_combo"]
        else:
            prefs += ["basic_light_combo"]
        return prefs

    # -- schema dispatch ---------------------------------------------------

    def complete(self, bundle: PromptBundle) -> ModelReply:
        segs = _segments(bundle)
        ctx = segs["ctx"]
        sid = bundle.schema_id
        view = _view(bundle.frames[-1]) if bundle.frames else None

        if sid == "enemy_report":
            doc = self._enemy_answer(view, self._wrong(ctx, sid, "enemy", False))
        elif sid == "combat_mode":
            doc = self._mode_answer(view, self._wrong(ctx, sid, "mode", False))
        elif sid == "health_report":
            doc = self._heal_answer(view, self._wrong(ctx, sid, "heal", False))
        elif sid == "spell_report":
            doc = self._spell_answer(view, self._wrong(ctx, sid, "spell", False))
        elif sid == "decision_integration":
            reports = segs["reports"] or {}
            doc = self._choice_answer(
                view, ctx, segs["candidates"], reports.get("enemy"),
                reports.get("mode", "light"),
                self._wrong(ctx, sid, "choice", False),
            )
        elif sid == "monolithic_decision":
            enemy = self._enemy_answer(view, self._wrong(ctx, sid, "enemy", True))
            mode = self._mode_answer(view, self._wrong(ctx, sid, "mode", True))
            heal = self._heal_answer(view, self._wrong(ctx, sid, "heal", True))
            spell = self._spell_answer(view, self._wrong(ctx, sid, "spell", True))
            choice = self._choice_answer(
                view, ctx, segs["candidates"], enemy, mode["mode"],
                self._wrong(ctx, sid, "choice", True),
            )
            doc = {
                "enemy": enemy, "mode": mode["mode"], "heal_now": heal["heal_now"],
                "cast_spell_now": spell["cast_spell_now"],
                "chosen": choice["chosen"], "rationale": choice["rationale"],
            }
        elif sid == "reflection":
            doc = self._reflection_answer(view, ctx, segs["outcome"] or {})
        elif sid == "task_inference":
            doc = self._task_answer(view, ctx)
        elif sid == "enemy_action":
            doc = self._recognition_answer(view)
        elif sid == "guidance_summary":
            doc = self._summary_answer(segs["ops"] or [])
        else:
            raise KeyError(f"scripted oracle cannot answer schema {sid!r}")
        return ModelReply(raw_text=serialize_structured(doc))

    def _reflection_answer(self, view, ctx, outcome):
        complete = self._looks_complete(view, ctx)
        succeeded = bool(
            complete
            or outcome.get("damage_dealt", 0) > 0
            or (outcome.get("hits_evaded", 0) > 0 and outcome.get("hits_taken", 0) == 0)
            or outcome.get("hp_gained", False)
            or outcome.get("moved", False)
            or outcome.get("interacted", False)
        )
        if succeeded:
            reason = ""
        elif outcome.get("hits_taken", 0) > 0:
            reason = "took hits without making progress"
        else:
            reason = "the action had no effect"
        return {
            "last_action_succeeded": succeeded,
            "task_complete": complete,
            "failure_reason": reason,
        }

    def _looks_complete(self, view, ctx) -> bool:
        kind = ctx.get("task_kind", "combat")
        if view is None:
            return False
        if kind == "combat":
            return not view["enemies"]
        if kind == "gather":
            return not any(i["label"] == "gatherable" for i in view["items"])
        if kind == "open":
            chests = [i for i in view["items"] if i["label"] in ("chest", "opened_chest")]
            return bool(chests) and all(i["label"] == "opened_chest" for i in chests)
        if kind == "navigate":
            player = view["player"]
            for e in view["enemies"]:
                if e["label"] == "Bullguard" and player is not None:
                    d = max(abs(e["cell"][0] - player[0]), abs(e["cell"][1] - player[1]))
                    return d <= 1
            return False
        return False

    def _task_answer(self, view, ctx):
        kind = ctx.get("task_kind", "combat")
        if self._looks_complete(view, ctx):
            return {"description": "task complete; stand by"}
        names = {"E": "east", "W": "west", "N": "north", "S": "south"}
        player = view["player"]

        def approach(target_cell):
            if player is None or target_cell is None:
                return ""
            d = max(abs(target_cell[0] - player[0]), abs(target_cell[1] - player[1]))
            if d <= 1:
                return ""
            word = names[_direction_prefs(player, target_cell)[0]]
            return f"; approach by walking {word} toward it"

        if kind == "combat":
            target = _nearest(player, view["enemies"])
            arch = target["label"] if target else "enemy"
            desc = (
                f"defeat the {arch}: strike with light and heavy attacks "
                f"and dodge its attacks"
            )
            if view["hud"].hp_fraction <= self.config.heal_threshold:
                desc += "; the health bar is low"
            desc += approach(target["cell"] if target else None)
        elif kind == "gather":
            targets = [i for i in view["items"] if i["label"] == "gatherable"]
            target = _nearest(player, targets)
            desc = "move to the item and gather it: walk over and interact"
            desc += approach(target["cell"] if target else None)
        elif kind == "open":
            targets = [i for i in view["items"] if i["label"] == "chest"]
            target = _nearest(player, targets)
            desc = "move to the chest and open it: walk over and interact"
            desc += approach(target["cell"] if target else None)
        else:
            desc = "navigate to the goal: walk the route along the path to the marked spot"
        return {"description": desc}

    def _recognition_answer(self, view):
        telegraphing = [e for e in view["enemies"] if e.get("telegraph")]
        target = _nearest(view["player"], telegraphing)
        if target is None:
            near = _nearest(view["player"], view["enemies"])
            return {
                "archetype": near["label"] if near else "none",
                "label": "unknown", "hits": 0,
            }
        arch = target["label"]
        label = cue_to_label(arch, target.get("cue", ""))
        hits = 0
        if label != "unknown":
            hits = len(ARCHETYPES[arch].pattern(label).hit_windows)
        return {"archetype": arch, "label": label, "hits": hits}

    def _summary_answer(self, ops):
        moves = {"E": 0, "W": 0, "N": 0, "S": 0}
        attacks = dodges = other = 0
        for op in ops:
            if op.startswith("Move:"):
                moves[op[5:]] += 1
            elif op in ("LightAttack", "HeavyAttack"):
                attacks += 1
            elif op == "Dodge":
                dodges += 1
            else:
                other += 1
        total_moves = sum(moves.values())
        if total_moves >= max(attacks, dodges, 1):
            dominant = max(moves, key=lambda k: (moves[k], k))
            names = {"E": "east", "W": "west", "N": "north", "S": "south"}
            text = (
                f"guided path: walk the demonstrated route, {total_moves} steps "
                f"mostly {names[dominant]}; navigate along this path"
            )
        elif dodges and attacks:
            text = (
                f"guided combat: dodge {dodges} times and strike {attacks} times "
                f"as demonstrated"
            )
        elif attacks:
            text = f"guided combat: press the attack, {attacks} strikes as demonstrated"
        else:
            text = "guided play: repeat the demonstrated inputs"
        return {"annotation": text}
