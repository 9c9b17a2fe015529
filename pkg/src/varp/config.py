"""Tuning constants for the arena and agent.

Everything numeric that shapes play balance lives here so calibration touches a
single file. Tests freeze behaviour against these defaults; change with care.
"""
from __future__ import annotations

from dataclasses import dataclass, field


@dataclass(frozen=True)
class Tuning:
    # player
    player_max_hp: int = 100
    heal_amount: int = 30
    heal_charges_start: int = 3
    heal_charges_max: int = 5
    heavy_charge_max: int = 3
    # landed light hits needed to bank one focus point
    focus_per_light_hits: int = 4
    light_damage: int = 8
    heavy_damage: int = 20
    attack_reach: int = 1

    # immobilization spell
    freeze_ticks: int = 12
    immobilize_cooldown: int = 60
    immobilize_range: int = 4

    # per-command tick costs
    cost_light: int = 3
    cost_heavy: int = 6
    cost_dodge: int = 2
    cost_heal: int = 4
    cost_cast: int = 2
    cost_move: int = 1
    cost_interact: int = 2

    dodge_iframes: int = 2
    aggro_range: int = 6

    # frames
    viewport_w: int = 48
    viewport_h: int = 24
    notice_ttl: int = 12

    # predefined walking action: repeated single-cell moves, stopping at obstacles
    move_stride: int = 8


DEFAULT_TUNING = Tuning()


@dataclass(frozen=True)
class AgentConfig:
    """Feature switches and loop bounds for the decision pipeline."""

    soag_enabled: bool = True
    dtsa_enabled: bool = True
    human_guidance_enabled: bool = True
    # one keyframe per completed action, plus one at every telegraph onset
    keyframe_mode: str = "per_action_plus_telegraph"
    curate_k: int = 5
    reflect_m: int = 4
    guidance_n: int = 16
    step_cap: int = 200

    def __post_init__(self):
        if self.step_cap < 1:
            raise ValueError("step_cap must be >= 1")
        if self.keyframe_mode not in ("per_action", "per_action_plus_telegraph"):
            raise ValueError(f"unknown keyframe_mode: {self.keyframe_mode}")


@dataclass(frozen=True)
class OptimizeConfig:
    """Counter local-search knobs."""

    neighbor_budget: int = 8
    max_len: int = 16
    # score = damage_dealt - hp_weight * hp_lost; hp is the scarce resource,
    # so a counter that trades health for damage must score below one that
    # keeps the exchange clean
    hp_weight: float = 2.0

    def __post_init__(self):
        if self.hp_weight <= 0:
            raise ValueError("hp_weight must be positive")
        if self.max_len < 1:
            raise ValueError("max_len must be >= 1")


@dataclass(frozen=True)
class OracleConfig:
    """Scripted backend: seeded per-question fallibility."""

    seed: int = 0
    epsilon_decomposed: float = 0.02
    epsilon_monolithic: float = 0.2
    heal_threshold: float = 0.35
