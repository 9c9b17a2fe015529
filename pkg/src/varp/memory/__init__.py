"""Three libraries: actions (skills), situations (episode log), guided (demos)."""
from .actions import (
    PROVENANCES,
    ActionEntry,
    ActionLibrary,
    ActionStats,
    build_entry,
)
from .guided import (
    FEATURE_DIM,
    GuidanceWindow,
    HumanGuidedLibrary,
    HumanGuidedRecord,
    frame_features,
)
from .io import LibraryError
from .situations import (
    GatheredInfo,
    ReflectionVerdict,
    SituationLibrary,
    SituationRecord,
)

__all__ = [
    "ActionEntry",
    "ActionLibrary",
    "ActionStats",
    "FEATURE_DIM",
    "GatheredInfo",
    "GuidanceWindow",
    "HumanGuidedLibrary",
    "HumanGuidedRecord",
    "LibraryError",
    "PROVENANCES",
    "ReflectionVerdict",
    "SituationLibrary",
    "SituationRecord",
    "build_entry",
    "frame_features",
]
