"""12-task benchmark: trials, ablations, and report emission.

A unit is one (agent config, task) pair: its trials run in order against a
shared action library, so a counter learned in trial 0 is available in trial
1, while each trial gets a fresh situation library and seed base_seed + index.
Units are independent, so they may be spread over a thread pool; reports fold
results in (task, trial) order and come out identical at any parallelism.
"""
from __future__ import annotations

import io
import json
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from importlib import resources

from .agent import AgentLibraries, run_episode
from .arena.tasks import all_task_specs, task_spec
from .arena.types import TaskKind, TaskStatus
from .config import AgentConfig
from .gateway.oracle import ScriptedOracle
from .gateway.remote import RemoteBackend
from .gateway.replay import ReplayBackend
from .guidance import build_guided_library, bundled_sessions_dir, load_session
from .guidance.stats import session_paths
from .memory.situations import SituationLibrary

ABLATIONS = ("full", "no_soag", "no_dtsa", "no_guidance")


@dataclass
class BenchConfig:
    tasks: tuple = ()  # empty means every known task
    trials: int = 5
    base_seed: int = 0
    agent: AgentConfig = field(default_factory=AgentConfig)
    backend: str = "scripted"
    backend_arg: str | None = None  # transcript path for backend="replay"
    parallelism: int | None = None

    def resolved_tasks(self) -> tuple:
        return tuple(self.tasks) or tuple(s.task_id for s in all_task_specs())

    def workers(self) -> int:
        if self.parallelism is not None:
            return max(1, self.parallelism)
        return min(4, len(self.resolved_tasks()) * self.trials)


@dataclass(frozen=True)
class TrialResult:
    task_id: int
    trial_index: int
    seed: int
    status: TaskStatus
    ticks: int
    inference_count: int
    atomic_ops_count: int
    wall_seconds: float


@dataclass
class TaskSummary:
    task_id: int
    trials: int
    successes: int
    success_rate: float
    mean_ticks: float
    mean_inference_count: float
    mean_atomic_ops: float
    atomic_ops_per_inference: float


@dataclass
class BenchReport:
    config: dict
    trials: list  # TrialResult, ordered by (task_id, trial_index)
    per_task: list  # TaskSummary, ordered by task_id
    atomic_ops_per_inference: float
    wall_seconds: float


def make_backend(name: str, arg: str | None = None):
    if name == "scripted":
        return ScriptedOracle()
    if name == "remote":
        return RemoteBackend()
    if name == "replay":
        if not arg:
            raise ValueError("replay backend needs a transcript path")
        return ReplayBackend(arg)
    raise ValueError(f"unknown backend {name!r}")


def guided_for_task(task_id: int):
    """Demonstrations stand in for a human taking over on tasks the agent
    cannot do autonomously (navigation); combat tasks run unassisted."""
    if task_spec(task_id).kind is not TaskKind.NAVIGATE:
        return None
    paths = [p for p in session_paths(bundled_sessions_dir())
             if load_session(p)[0].task_id == task_id]
    if not paths:
        return None
    lib = build_guided_library(paths, clean_only=True)
    return lib if len(lib) else None


def _run_unit(cfg: BenchConfig, task_id: int) -> list:
    """Five-ish trials of one task under one config, learning across trials."""
    libs = AgentLibraries.fresh()
    if cfg.agent.human_guidance_enabled:
        libs.guided = guided_for_task(task_id)
    backend = make_backend(cfg.backend, cfg.backend_arg)
    out = []
    for trial in range(cfg.trials):
        libs.situations = SituationLibrary()
        seed = cfg.base_seed + trial
        t0 = time.perf_counter()
        ep = run_episode(task_id, seed=seed, libraries=libs, backend=backend,
                         config=cfg.agent)
        out.append(TrialResult(
            task_id=task_id, trial_index=trial, seed=seed, status=ep.status,
            ticks=ep.ticks, inference_count=ep.inference_count,
            atomic_ops_count=ep.atomic_ops_count,
            wall_seconds=time.perf_counter() - t0,
        ))
    return out


def _summarize(task_id: int, rows: list) -> TaskSummary:
    n = len(rows)
    wins = sum(1 for r in rows if r.status.kind.value == "Success")
    ticks = sum(r.ticks for r in rows) / n
    inf = sum(r.inference_count for r in rows) / n
    ops = sum(r.atomic_ops_count for r in rows) / n
    return TaskSummary(
        task_id=task_id, trials=n, successes=wins, success_rate=wins / n,
        mean_ticks=round(ticks, 4), mean_inference_count=round(inf, 4),
        mean_atomic_ops=round(ops, 4),
        atomic_ops_per_inference=round(ops / inf, 4) if inf else 0.0,
    )


def _config_echo(cfg: BenchConfig) -> dict:
    a = cfg.agent
    return {
        "tasks": list(cfg.resolved_tasks()),
        "trials": cfg.trials,
        "base_seed": cfg.base_seed,
        "backend": cfg.backend,
        "agent": {
            "soag_enabled": a.soag_enabled,
            "dtsa_enabled": a.dtsa_enabled,
            "human_guidance_enabled": a.human_guidance_enabled,
            "curate_k": a.curate_k,
            "reflect_m": a.reflect_m,
            "guidance_n": a.guidance_n,
            "step_cap": a.step_cap,
        },
    }


def run_benchmark(cfg: BenchConfig) -> BenchReport:
    tasks = cfg.resolved_tasks()
    t0 = time.perf_counter()
    with ThreadPoolExecutor(max_workers=cfg.workers()) as pool:
        futures = {t: pool.submit(_run_unit, cfg, t) for t in tasks}
        by_task = {t: f.result() for t, f in futures.items()}
    trials = [r for t in sorted(by_task) for r in by_task[t]]
    per_task = [_summarize(t, by_task[t]) for t in sorted(by_task)]
    total_ops = sum(r.atomic_ops_count for r in trials)
    total_inf = sum(r.inference_count for r in trials)
    return BenchReport(
        config=_config_echo(cfg),
        trials=trials,
        per_task=per_task,
        atomic_ops_per_inference=round(total_ops / total_inf, 4) if total_inf else 0.0,
        wall_seconds=time.perf_counter() - t0,
    )


def ablation_config(base: BenchConfig, name: str) -> BenchConfig:
    flags = {
        "full": {},
        "no_soag": {"soag_enabled": False},
        "no_dtsa": {"dtsa_enabled": False},
        "no_guidance": {"human_guidance_enabled": False},
    }[name]
    return replace(base, agent=replace(base.agent, **flags))


def run_ablation_suite(base: BenchConfig) -> dict:
    """Four benchmark runs sharing seeds, plus per-task success-rate deltas."""
    reports = {name: run_benchmark(ablation_config(base, name))
               for name in ABLATIONS}
    full_rates = {s.task_id: s.success_rate for s in reports["full"].per_task}
    deltas = {
        name: {s.task_id: round(s.success_rate - full_rates[s.task_id], 4)
               for s in rep.per_task}
        for name, rep in reports.items() if name != "full"
    }
    return {"reports": reports, "deltas": deltas}


# -- emission ---------------------------------------------------------------------

def report_to_dict(report: BenchReport) -> dict:
    return {
        "config": report.config,
        "per_task": [vars(s) for s in report.per_task],
        "trials": [
            {
                "task_id": r.task_id,
                "trial_index": r.trial_index,
                "seed": r.seed,
                "status": r.status.kind.value,
                "reason": r.status.reason,
                "ticks": r.ticks,
                "inference_count": r.inference_count,
                "atomic_ops_count": r.atomic_ops_count,
                "wall_seconds": round(r.wall_seconds, 6),
            }
            for r in report.trials
        ],
        "atomic_ops_per_inference": report.atomic_ops_per_inference,
        "wall_seconds": round(report.wall_seconds, 6),
    }


def report_schema() -> dict:
    ref = resources.files("varp") / "resources" / "report_schema.json"
    return json.loads(ref.read_text())


def emit_report(report: BenchReport, fmt: str = "structured") -> str:
    if fmt == "structured":
        return json.dumps(report_to_dict(report), indent=2, sort_keys=True) + "\n"
    if fmt == "table":
        return _emit_table(report)
    if fmt == "csv":
        return _emit_csv(report)
    raise ValueError(f"unknown report format {fmt!r}")


def _emit_table(report: BenchReport) -> str:
    header = f"{'task':>4} {'succ':>6} {'rate':>6} {'ticks':>8} {'infer':>7} {'atomic':>8} {'ops/inf':>8}"
    lines = [header, "-" * len(header)]
    for s in report.per_task:
        lines.append(
            f"{s.task_id:>4} {s.successes:>4}/{s.trials} {s.success_rate:>6.2f} "
            f"{s.mean_ticks:>8.1f} {s.mean_inference_count:>7.1f} "
            f"{s.mean_atomic_ops:>8.1f} {s.atomic_ops_per_inference:>8.2f}"
        )
    lines.append(f"overall atomic ops per inference: {report.atomic_ops_per_inference:.2f}")
    return "\n".join(lines) + "\n"


def _emit_csv(report: BenchReport) -> str:
    import csv

    buf = io.StringIO()
    w = csv.writer(buf)
    w.writerow(["task_id", "trial_index", "seed", "status", "reason", "ticks",
                "inference_count", "atomic_ops_count", "wall_seconds"])
    for r in report.trials:
        w.writerow([r.task_id, r.trial_index, r.seed, r.status.kind.value,
                    r.status.reason or "", r.ticks, r.inference_count,
                    r.atomic_ops_count, f"{r.wall_seconds:.6f}"])
    return buf.getvalue()
