from .pipeline import (
    AgentLibraries,
    Decision,
    EpisodeResult,
    EpisodeState,
    StepResult,
    TaskEnv,
    curate,
    decide,
    gather_information,
    infer_task,
    run_episode,
    run_step,
    self_reflect,
)
from .predefined import (
    FALLBACK_ACTION,
    HEAL_ACTION,
    SPELL_ACTION,
    new_action_library,
)

__all__ = [
    "AgentLibraries",
    "Decision",
    "EpisodeResult",
    "EpisodeState",
    "StepResult",
    "TaskEnv",
    "curate",
    "decide",
    "gather_information",
    "infer_task",
    "run_episode",
    "run_step",
    "self_reflect",
    "FALLBACK_ACTION",
    "HEAL_ACTION",
    "SPELL_ACTION",
    "new_action_library",
]
