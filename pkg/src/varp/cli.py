"""Command line front door: episodes, benchmarks, dataset tools, live service.

Exit codes: 0 success, 1 the episode or check failed, 2 configuration error
(argparse uses 2 for bad flags as well).
"""
from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

from .agent import AgentLibraries, new_action_library, run_episode
from .bench import (
    BenchConfig,
    emit_report,
    guided_for_task,
    make_backend,
    report_to_dict,
    run_ablation_suite,
    run_benchmark,
)
from .config import AgentConfig
from .gateway.replay import RecordingBackend
from .guidance import bundled_sessions_dir
from .guidance.sessions import IntegrityError, SessionError, replay_session
from .guidance.stats import compute_stats, format_stats
from .memory.actions import ActionLibrary
from .memory.io import LibraryError

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_CONFIG = 2


def _add_agent_flags(p: argparse.ArgumentParser):
    p.add_argument("--no-soag", action="store_true",
                   help="disable counter-action synthesis")
    p.add_argument("--no-dtsa", action="store_true",
                   help="use one monolithic decision query instead of sub-queries")
    p.add_argument("--no-guidance", action="store_true",
                   help="never consult human demonstrations")


def _add_backend_flags(p: argparse.ArgumentParser):
    p.add_argument("--backend", choices=("scripted", "remote", "replay"),
                   default="scripted")
    p.add_argument("--backend-arg", default=None,
                   help="backend parameter (transcript path for replay)")


def _agent_config(args) -> AgentConfig:
    return AgentConfig(
        soag_enabled=not args.no_soag,
        dtsa_enabled=not args.no_dtsa,
        human_guidance_enabled=not args.no_guidance,
    )


def _fail_config(msg: str) -> int:
    print(f"error: {msg}", file=sys.stderr)
    return EXIT_CONFIG


def cmd_run(args) -> int:
    if not 1 <= args.task <= 12:
        return _fail_config(f"no task {args.task}; tasks are 1..12")
    cfg = _agent_config(args)
    try:
        backend = make_backend(args.backend, args.backend_arg)
    except (ValueError, OSError) as exc:
        return _fail_config(str(exc))
    if args.record_transcript:
        backend = RecordingBackend(backend, args.record_transcript)
    libs = AgentLibraries.fresh()
    if cfg.human_guidance_enabled:
        libs.guided = guided_for_task(args.task)
    t0 = time.perf_counter()
    ep = run_episode(args.task, seed=args.seed, libraries=libs,
                     backend=backend, config=cfg)
    summary = {
        "task_id": args.task,
        "trial_index": 0,
        "seed": args.seed,
        "status": ep.status.kind.value,
        "reason": ep.status.reason,
        "ticks": ep.ticks,
        "inference_count": ep.inference_count,
        "atomic_ops_count": ep.atomic_ops_count,
        "wall_seconds": round(time.perf_counter() - t0, 6),
    }
    print(json.dumps(summary, sort_keys=True))
    return EXIT_OK if ep.status.kind.value == "Success" else EXIT_FAILED


def _parse_tasks(text):
    if not text:
        return ()
    try:
        tasks = tuple(int(t) for t in text.split(",") if t.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad task list {text!r}")
    return tasks


def cmd_bench(args) -> int:
    tasks = args.tasks or ()
    if any(not 1 <= t <= 12 for t in tasks):
        return _fail_config(f"tasks must be within 1..12, got {tasks}")
    cfg = BenchConfig(
        tasks=tasks,
        trials=args.trials,
        base_seed=args.base_seed,
        agent=_agent_config(args),
        backend=args.backend,
        backend_arg=args.backend_arg,
        parallelism=args.parallelism,
    )
    if args.trials < 1:
        return _fail_config("trials must be >= 1")
    if args.ablations:
        suite = run_ablation_suite(cfg)
        doc = {
            "reports": {k: report_to_dict(r) for k, r in suite["reports"].items()},
            "deltas": suite["deltas"],
        }
        text = json.dumps(doc, indent=2, sort_keys=True) + "\n"
    else:
        text = emit_report(run_benchmark(cfg), args.format)
    if args.out:
        Path(args.out).write_text(text)
        print(f"wrote {args.out}")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_dataset_stats(args) -> int:
    directory = args.dir or bundled_sessions_dir()
    try:
        stats = compute_stats(directory)
    except (SessionError, LibraryError, OSError) as exc:
        return _fail_config(str(exc))
    print(format_stats(stats))
    return EXIT_OK


def cmd_library_show(args) -> int:
    if args.file:
        try:
            lib = ActionLibrary.load(args.file)
        except (LibraryError, OSError) as exc:
            return _fail_config(str(exc))
    else:
        lib = new_action_library()
    for entry in lib.entries():
        body = " ".join(c.encode() for c in entry.body)
        print(f"{entry.name}  [{entry.provenance}]")
        print(f"    body: {body}")
        print(f"    note: {entry.annotation}")
    print(f"{len(lib)} actions")
    return EXIT_OK


def cmd_replay(args) -> int:
    try:
        result = replay_session(args.session)
    except IntegrityError as exc:
        print(f"diverged at tick {exc.tick}: {exc}", file=sys.stderr)
        return EXIT_FAILED
    except (SessionError, LibraryError, OSError) as exc:
        return _fail_config(str(exc))
    print(json.dumps({
        "status": result.status.kind.value,
        "reason": result.status.reason,
        "ticks": result.ticks,
        "commands_run": result.commands_run,
    }, sort_keys=True))
    return EXIT_OK


def cmd_serve(args) -> int:
    from .service import serve

    serve(port=args.port, host=args.host, ui_dir=args.ui_dir,
          sessions_dir=args.sessions_dir)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="varp")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run one episode")
    p.add_argument("--task", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    _add_backend_flags(p)
    _add_agent_flags(p)
    p.add_argument("--record-transcript", default=None,
                   help="record backend traffic for later replay")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("bench", help="run the benchmark")
    p.add_argument("--tasks", type=_parse_tasks, default=(),
                   help="comma separated task ids (default: all)")
    p.add_argument("--trials", type=int, default=5)
    p.add_argument("--base-seed", type=int, default=0)
    p.add_argument("--parallelism", type=int, default=None)
    p.add_argument("--format", choices=("structured", "table", "csv"),
                   default="structured")
    p.add_argument("--out", default=None, help="write the report here")
    p.add_argument("--ablations", action="store_true",
                   help="run the four-config suite and report deltas")
    _add_backend_flags(p)
    _add_agent_flags(p)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("dataset", help="dataset tools")
    dsub = p.add_subparsers(dest="dataset_command", required=True)
    ps = dsub.add_parser("stats", help="composition of a session directory")
    ps.add_argument("--dir", default=None,
                    help="session directory (default: bundled demonstrations)")
    ps.set_defaults(func=cmd_dataset_stats)

    p = sub.add_parser("library", help="action library tools")
    lsub = p.add_subparsers(dest="library_command", required=True)
    pl = lsub.add_parser("show", help="list actions")
    pl.add_argument("--file", default=None,
                    help="persisted library (default: the predefined actions)")
    pl.set_defaults(func=cmd_library_show)

    p = sub.add_parser("replay", help="re-run a recorded session and verify it")
    p.add_argument("session", help="path to a session file")
    p.set_defaults(func=cmd_replay)

    p = sub.add_parser("serve", help="host the live play service")
    p.add_argument("--port", type=int, default=None,
                   help="default: VARP_PORT or 8787")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--ui-dir", default=None)
    p.add_argument("--sessions-dir", default="sessions")
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
