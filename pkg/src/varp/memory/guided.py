"""Human-guided library: demonstration (frame, input) pairs queried by frame
similarity.

Frames are compared through a fixed 128-dim feature vector rather than pixels:
hud gauges, a smooth positional bump per viewport axis for the player glyph
(so an exact position match outranks a near miss, and near misses outrank far
ones), coarse occupancy maps for enemy/item glyphs over a 4x4 partition, and
telegraph-glyph indicator bits. The tick counter is deliberately excluded so
the same scene matches regardless of when it occurs.
"""
from __future__ import annotations

import hashlib
from dataclasses import dataclass, field

import numpy as np

from ..arena.patterns import FROZEN_GLYPH, LETTER_TO_ARCHETYPE
from ..arena.render import (
    CHEST_GLYPH,
    GATHERABLE_GLYPH,
    OPENED_CHEST_GLYPH,
    PLAYER_GLYPH,
    TELEGRAPH_GLYPHS,
)
from ..arena.types import Frame
from .io import LibraryError, read_store, write_store

GUIDED_FORMAT = "varp-guided"
GUIDED_VERSION = 1

FEATURE_DIM = 128
_GRID = 4  # partition per axis for enemy/item occupancy
_XBINS = 48
_YBINS = 24
_BUMP_SIGMA = 1.2  # cells; similarity decays fast but smoothly with offset
_ITEM_GLYPHS = {GATHERABLE_GLYPH, CHEST_GLYPH, OPENED_CHEST_GLYPH}

# layout: 0..3 hud | 4..51 player x bump | 52..75 player y bump
# | 76..91 enemy 4x4 | 92..107 item 4x4 | 108..115 telegraph bits
_X0, _Y0, _E0, _I0, _T0 = 4, 52, 76, 92, 108

_TELEGRAPH_BIT = {
    g: int.from_bytes(hashlib.sha256(g.encode()).digest()[:2], "big") % 8
    for g in sorted(TELEGRAPH_GLYPHS | {FROZEN_GLYPH})
}


def _bump(vec, base, bins, center, scale):
    lo = max(0, int(center) - 4)
    hi = min(bins - 1, int(center) + 4)
    for i in range(lo, hi + 1):
        vec[base + i] += np.exp(-((i - center) / _BUMP_SIGMA) ** 2) * scale


def frame_features(frame: Frame) -> np.ndarray:
    vec = np.zeros(FEATURE_DIM, dtype=np.float64)
    hud = frame.hud
    vec[0] = hud.hp_fraction
    vec[1] = hud.heal_charges / 5.0
    vec[2] = hud.heavy_charge / 3.0
    vec[3] = 1.0 if hud.spell_ready else 0.0
    height = len(frame.viewport)
    width = len(frame.viewport[0]) if height else 0
    for y, row in enumerate(frame.viewport):
        for x, ch in enumerate(row):
            if ch == PLAYER_GLYPH:
                bx = x * _XBINS / max(width, 1)
                by = y * _YBINS / max(height, 1)
                _bump(vec, _X0, _XBINS, bx, 2.0)
                _bump(vec, _Y0, _YBINS, by, 2.0)
                continue
            rx = min(x * _GRID // max(width, 1), _GRID - 1)
            ry = min(y * _GRID // max(height, 1), _GRID - 1)
            region = ry * _GRID + rx
            if ch.upper() in LETTER_TO_ARCHETYPE:
                vec[_E0 + region] += 1.0
            elif ch in _ITEM_GLYPHS:
                vec[_I0 + region] += 1.0
            elif ch in _TELEGRAPH_BIT:
                vec[_T0 + _TELEGRAPH_BIT[ch]] = 1.0
    norm = float(np.linalg.norm(vec))
    return vec / norm if norm > 0 else vec


@dataclass
class HumanGuidedRecord:
    session_id: str
    tick: int
    frame_snapshot: Frame
    # raw input event as recorded: {"tick", "kind", "code"}
    operation: dict
    clean: bool = True
    features: np.ndarray = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if self.features is None:
            self.features = frame_features(self.frame_snapshot)

    def to_dict(self):
        return {
            "session_id": self.session_id,
            "tick": self.tick,
            "frame": self.frame_snapshot.to_dict(),
            "operation": dict(self.operation),
            "clean": self.clean,
        }

    @classmethod
    def from_dict(cls, doc):
        return cls(
            session_id=doc["session_id"],
            tick=doc["tick"],
            frame_snapshot=Frame.from_dict(doc["frame"]),
            operation=dict(doc["operation"]),
            clean=doc.get("clean", True),
        )


@dataclass(frozen=True)
class GuidanceWindow:
    anchor: HumanGuidedRecord
    following: tuple

    @property
    def records(self) -> tuple:
        return (self.anchor,) + tuple(self.following)

    @property
    def operations(self) -> list:
        """Stored operations expanded to taps (press + release).

        Records hold command-initiating presses only; replaying them without
        releases would look like one long key hold, so each key_down gets its
        release back before translation.
        """
        ops = []
        for r in self.records:
            ops.append(dict(r.operation))
            if r.operation.get("kind") == "key_down":
                ops.append({
                    "tick": r.operation["tick"], "kind": "key_up",
                    "code": r.operation["code"],
                })
        return ops


class HumanGuidedLibrary:
    def __init__(self):
        self._records: list[HumanGuidedRecord] = []
        self._seen: set = set()

    def __len__(self):
        return len(self._records)

    def records(self) -> list:
        return list(self._records)

    def add_record(self, record: HumanGuidedRecord):
        stamp = (record.session_id, record.tick)
        if stamp in self._seen:
            raise LibraryError(f"duplicate guided record stamp {stamp}")
        for prev in reversed(self._records):
            if prev.session_id == record.session_id:
                if record.tick <= prev.tick:
                    raise LibraryError(
                        f"guided ticks must increase within session "
                        f"{record.session_id!r}"
                    )
                break
        self._seen.add(stamp)
        self._records.append(record)

    def query_guidance(self, frame: Frame, n: int = 16) -> GuidanceWindow:
        """Best-matching record plus the next n records of the same session.

        Ties go to the earliest (session_id, tick).
        """
        if not self._records:
            raise LibraryError("guided library is empty")
        q = frame_features(frame)
        mat = np.stack([r.features for r in self._records])
        # row-wise reduction, not gemv: identical frames must tie exactly
        sims = (mat * q).sum(axis=1)
        best = min(
            range(len(self._records)),
            key=lambda i: (-sims[i], self._records[i].session_id,
                           self._records[i].tick),
        )
        anchor = self._records[best]
        following = []
        for rec in self._records[best + 1 :]:
            if len(following) >= n:
                break
            if rec.session_id != anchor.session_id:
                continue
            following.append(rec)
        return GuidanceWindow(anchor=anchor, following=tuple(following))

    def persist(self, path):
        write_store(path, GUIDED_FORMAT, GUIDED_VERSION,
                    (r.to_dict() for r in self._records))

    @classmethod
    def load(cls, path) -> "HumanGuidedLibrary":
        lib = cls()
        for doc in read_store(path, GUIDED_FORMAT, GUIDED_VERSION):
            lib.add_record(HumanGuidedRecord.from_dict(doc))
        return lib
