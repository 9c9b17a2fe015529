"""Dataset composition reporting for directories of recorded sessions."""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

from .sessions import SessionError, load_session

# Stated per-task share (percent) of the source demonstration corpus this
# sample mirrors; tasks without a stated figure are omitted.
REFERENCE_SHARE = {1: 4.0, 2: 12.5}


@dataclass(frozen=True)
class DatasetStats:
    total_sessions: int
    task_counts: dict
    task_percentages: dict
    clean_fraction: float

    def __post_init__(self):
        if self.total_sessions > 0:
            total = sum(self.task_percentages.values())
            if abs(total - 100.0) > 0.1:
                raise ValueError(f"task percentages sum to {total}, not 100")


def session_paths(directory) -> list:
    return sorted(Path(directory).glob("*.jsonl"))


def compute_stats(directory) -> DatasetStats:
    counts: dict[int, int] = {}
    clean = 0
    total = 0
    seen_ids = set()
    for path in session_paths(directory):
        header, _, _ = load_session(path)
        if header.session_id in seen_ids:
            raise SessionError(f"duplicate session_id {header.session_id!r}")
        seen_ids.add(header.session_id)
        counts[header.task_id] = counts.get(header.task_id, 0) + 1
        clean += header.clean
        total += 1
    percentages = {
        task: 100.0 * n / total for task, n in sorted(counts.items())
    } if total else {}
    return DatasetStats(
        total_sessions=total,
        task_counts=dict(sorted(counts.items())),
        task_percentages=percentages,
        clean_fraction=clean / total if total else 0.0,
    )


def format_stats(stats: DatasetStats) -> str:
    lines = [f"{'task':>5}  {'sessions':>8}  {'share%':>7}  {'reference%':>10}"]
    for task, n in stats.task_counts.items():
        ref = REFERENCE_SHARE.get(task)
        ref_text = f"{ref:10.1f}" if ref is not None else f"{'-':>10}"
        lines.append(
            f"{task:>5}  {n:>8}  {stats.task_percentages[task]:7.1f}  {ref_text}"
        )
    lines.append(f"{'total':>5}  {stats.total_sessions:>8}")
    lines.append(f"clean fraction: {stats.clean_fraction:.2f}")
    return "\n".join(lines)
