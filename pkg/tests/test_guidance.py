"""Recorded play: event collapse, session replay integrity, dataset stats,
and turning retrieved guidance windows into library actions."""
import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from varp.arena.types import DODGE, HEAVY, LIGHT, StatusKind, TaskStatus
from varp.arena.world import execute_atomic, new_world, task_status
from varp.arena.render import render_frame
from varp.gateway.types import ModelReply
from varp.guidance import (
    COLLAPSE_WINDOW,
    REFERENCE_SHARE,
    InputEvent,
    IntegrityError,
    SessionError,
    SessionHeader,
    SessionRecorder,
    build_guided_library,
    bundled_sessions_dir,
    collapse_events,
    compute_stats,
    events_to_atomics,
    format_stats,
    record_session,
    replay_session,
    session_paths,
    summarize_to_action,
    window_action_name,
)
from varp.guidance.demonstrator import play_session
from varp.guidance.events import EventCollapser
from varp.memory.actions import ActionLibrary
from varp.memory.guided import GuidanceWindow, HumanGuidedRecord
from varp.memory.io import LibraryError, read_store, write_store


def ev(tick, kind, code):
    return InputEvent(tick=tick, kind=kind, code=code)


def header(session_id="s0", task_id=2, seed=0, clean=True):
    return SessionHeader(
        session_id=session_id, task_id=task_id, seed=seed,
        player_tag="test", clean=clean, created_at="2026-05-02T09:00:00Z",
    )


def some_frame():
    return render_frame(new_world(2, 0))


class _CannedBackend:
    def __init__(self, text):
        self.text = text
        self.bundles = []

    def complete(self, bundle):
        self.bundles.append(bundle)
        return ModelReply(raw_text=self.text)


# ---------------------------------------------------------------- events


def test_auto_repeat_while_held_collapses_to_one_command():
    events = [
        ev(0, "key_down", "Space"),
        ev(COLLAPSE_WINDOW, "key_down", "Space"),  # OS repeat, still held
    ]
    cmds, dropped = events_to_atomics(events)
    assert cmds == [DODGE]
    assert dropped == 0


def test_presses_spaced_past_the_window_stay_separate_commands():
    gap = COLLAPSE_WINDOW + 1
    events = [ev(i * gap, "mouse_button", "mouse_left") for i in range(3)]
    cmds, _ = events_to_atomics(events)
    assert cmds == [LIGHT, LIGHT, LIGHT]


def test_back_to_back_clicks_collapse():
    events = [
        ev(0, "mouse_button", "mouse_left"),
        ev(1, "mouse_button", "mouse_left"),
    ]
    cmds, _ = events_to_atomics(events)
    assert cmds == [LIGHT]


def test_key_up_ends_the_hold_so_the_next_press_is_a_new_command():
    events = [
        ev(0, "key_down", "Space"),
        ev(1, "key_up", "Space"),
        ev(2, "key_down", "Space"),
    ]
    cmds, _ = events_to_atomics(events)
    assert cmds == [DODGE, DODGE]
    # without the release, the same timing is one command
    held = [e for e in events if e.kind != "key_up"]
    assert events_to_atomics(held)[0] == [DODGE]


def test_unmapped_command_events_are_dropped_and_counted():
    events = [
        ev(0, "key_down", "Q"),
        ev(3, "mouse_move", "Q"),   # never a command, never dropped
        ev(5, "key_up", "Q"),
        ev(9, "key_down", "K"),
    ]
    cmds, dropped = events_to_atomics(events)
    assert cmds == [HEAVY]
    assert dropped == 1


def test_collapse_pairs_carry_the_initiating_event():
    events = [
        ev(0, "key_down", "W"),
        ev(1, "key_down", "W"),  # repeat
        ev(2, "key_up", "W"),
        ev(9, "key_down", "W"),
    ]
    pairs, _ = collapse_events(events)
    assert [p[0].tick for p in pairs] == [0, 9]
    assert [p[1].encode() for p in pairs] == ["Move:N", "Move:N"]


event_streams = st.lists(
    st.builds(
        ev,
        st.integers(min_value=0, max_value=30),
        st.sampled_from(["key_down", "key_up", "mouse_button", "mouse_move"]),
        st.sampled_from(["W", "A", "Space", "K", "Q", "mouse_left"]),
    ),
    max_size=40,
).map(lambda evs: sorted(evs, key=lambda e: e.tick))


@settings(max_examples=200, deadline=None)
@given(event_streams)
def test_incremental_collapser_matches_the_batch_function(events):
    collapser = EventCollapser()
    incremental = [c for c in map(collapser.feed, events) if c is not None]
    cmds, dropped = events_to_atomics(events)
    assert incremental == cmds
    assert collapser.dropped == dropped


# -------------------------------------------------------------- sessions


def test_recorder_rejects_out_of_order_lines():
    rec = SessionRecorder(header())
    rec.add_event(ev(5, "key_down", "W"))
    with pytest.raises(SessionError):
        rec.add_event(ev(3, "key_up", "W"))
    with pytest.raises(SessionError):
        rec.add_frame(some_frame())  # rendered at tick 0, already past it


def test_recorder_rejects_two_command_events_on_one_tick():
    rec = SessionRecorder(header())
    rec.add_event(ev(0, "key_down", "W"))
    rec.add_event(ev(0, "key_up", "W"))  # releases may share the tick
    with pytest.raises(SessionError):
        rec.add_event(ev(0, "key_down", "A"))


def test_record_session_puts_frames_before_events_on_the_same_tick(tmp_path):
    world = new_world(2, 0)
    f0 = render_frame(world)
    down = ev(0, "mouse_button", "mouse_left")
    execute_atomic(world, LIGHT)
    f1 = render_frame(world)
    path = record_session(
        [down], [f0, f1], header(), task_status(world), world.tick,
        tmp_path / "s.jsonl",
    )
    docs = read_store(path, "varp-session", 1)
    kinds = [d["kind"] for d in docs]
    assert kinds == ["header", "frame", "event", "frame", "end"]
    # the same file survives its own integrity check
    result = replay_session(path)
    assert result.commands_run == 1
    assert result.ticks == world.tick


def test_bundled_sessions_all_replay_to_their_recorded_status():
    paths = session_paths(bundled_sessions_dir())
    assert len(paths) == 25
    for path in paths:
        result = replay_session(path)
        assert result.status.kind in (StatusKind.SUCCESS, StatusKind.FAILURE)
        assert result.commands_run > 0


def test_tampered_frame_is_reported_at_its_tick(tmp_path):
    src = session_paths(bundled_sessions_dir())[0]
    docs = read_store(src, "varp-session", 1)
    frames = [d for d in docs if d["kind"] == "frame"]
    victim = frames[len(frames) // 2]
    victim["frame"]["hud"]["heal_charges"] += 1
    path = tmp_path / "tampered.jsonl"
    write_store(path, "varp-session", 1, docs)
    with pytest.raises(IntegrityError) as err:
        replay_session(path)
    assert err.value.tick == victim["tick"]


def test_dropped_event_breaks_tick_alignment(tmp_path):
    src = session_paths(bundled_sessions_dir())[0]
    docs = read_store(src, "varp-session", 1)
    first_cmd = next(
        i for i, d in enumerate(docs)
        if d["kind"] == "event" and d["event"]["kind"] != "key_up"
    )
    del docs[first_cmd]
    path = tmp_path / "cut.jsonl"
    write_store(path, "varp-session", 1, docs)
    with pytest.raises(IntegrityError):
        replay_session(path)


def test_tampered_terminal_status_is_rejected(tmp_path):
    src = session_paths(bundled_sessions_dir())[0]
    docs = read_store(src, "varp-session", 1)
    assert docs[-1]["kind"] == "end"
    docs[-1]["status"] = "failure"
    docs[-1]["reason"] = "defeated"
    path = tmp_path / "flipped.jsonl"
    write_store(path, "varp-session", 1, docs)
    with pytest.raises(IntegrityError):
        replay_session(path)


def test_header_only_session_is_valid_and_times_out(tmp_path):
    path = tmp_path / "bare.jsonl"
    write_store(path, "varp-session", 1,
                [{"kind": "header", **header().to_dict()}])
    result = replay_session(path)
    assert result.status == TaskStatus(StatusKind.FAILURE, "timeout")
    assert result.ticks == 0
    assert result.commands_run == 0


def test_demonstrator_session_round_trips(tmp_path):
    path = tmp_path / "demo.jsonl"
    status = play_session(3, 0, "t3-demo", path)
    assert status.kind is StatusKind.SUCCESS
    result = replay_session(path)
    assert result.status == status
    stats = compute_stats(tmp_path)
    assert stats.task_counts == {3: 1}


# ----------------------------------------------------------------- stats


def test_dataset_stats_match_hand_counts(tmp_path):
    done = TaskStatus(StatusKind.SUCCESS, None)
    specs = [("a", 1, True), ("b", 2, True), ("c", 2, False), ("d", 3, True)]
    for sid, task, clean in specs:
        record_session([], [], header(sid, task_id=task, clean=clean),
                       done, 0, tmp_path / f"{sid}.jsonl")
    stats = compute_stats(tmp_path)
    assert stats.total_sessions == 4
    assert stats.task_counts == {1: 1, 2: 2, 3: 1}
    assert stats.task_percentages == {1: 25.0, 2: 50.0, 3: 25.0}
    assert stats.clean_fraction == 0.75


def test_bundled_dataset_composition():
    stats = compute_stats(bundled_sessions_dir())
    assert stats.total_sessions == 25
    assert stats.clean_fraction == pytest.approx(0.92)
    assert sum(stats.task_percentages.values()) == pytest.approx(100.0)
    assert REFERENCE_SHARE == {1: 4.0, 2: 12.5}
    text = format_stats(stats)
    assert "4.0" in text and "12.5" in text
    assert "-" in text  # tasks without a stated reference share
    assert "clean fraction: 0.92" in text


def test_duplicate_session_id_across_files_is_rejected(tmp_path):
    done = TaskStatus(StatusKind.SUCCESS, None)
    record_session([], [], header("same"), done, 0, tmp_path / "a.jsonl")
    record_session([], [], header("same"), done, 0, tmp_path / "b.jsonl")
    with pytest.raises(SessionError, match="same"):
        compute_stats(tmp_path)


def test_empty_directory_has_zero_stats(tmp_path):
    stats = compute_stats(tmp_path)
    assert stats.total_sessions == 0
    assert stats.task_counts == {}
    assert stats.clean_fraction == 0.0
    assert "total" in format_stats(stats)


# --------------------------------------------------------- guided library


def test_build_guided_library_one_record_per_initiating_event():
    path = session_paths(bundled_sessions_dir())[0]
    docs = read_store(path, "varp-session", 1)
    events = [InputEvent.from_dict(d["event"]) for d in docs
              if d.get("kind") == "event"]
    pairs, _ = collapse_events(events)

    lib = build_guided_library([path])
    records = lib.records()
    assert len(records) == len(pairs)
    assert [r.tick for r in records] == [p[0].tick for p in pairs]

    # each record holds the frame the player saw when the input happened
    last = None
    expect = {}
    for d in docs:
        if d.get("kind") == "frame":
            last = d["frame"]
        elif d.get("kind") == "event" and d["event"]["kind"] != "key_up":
            expect[d["event"]["tick"]] = last
    for r in records:
        assert r.frame_snapshot.to_dict() == expect[r.tick]
        assert r.operation["tick"] == r.tick


def test_build_guided_library_skips_auto_repeats(tmp_path):
    frame = some_frame()
    events = [
        ev(0, "key_down", "Space"),
        ev(1, "key_down", "Space"),  # repeat while held
        ev(2, "key_up", "Space"),
    ]
    path = record_session(events, [frame], header(),
                          TaskStatus(StatusKind.SUCCESS, None), 2,
                          tmp_path / "rep.jsonl")
    lib = build_guided_library([path], clean_only=False)
    assert len(lib) == 1
    assert lib.records()[0].tick == 0


def test_clean_only_filtering(tmp_path):
    done = TaskStatus(StatusKind.SUCCESS, None)
    frame = some_frame()
    press = [ev(0, "mouse_button", "mouse_left")]
    clean = record_session(press, [frame], header("good"), done, 0,
                           tmp_path / "good.jsonl")
    messy = record_session(press, [frame], header("bad", clean=False), done, 0,
                           tmp_path / "bad.jsonl")
    assert [r.session_id for r in build_guided_library([clean, messy]).records()] \
        == ["good"]
    both = build_guided_library([clean, messy], clean_only=False)
    assert sorted(r.session_id for r in both.records()) == ["bad", "good"]


# ------------------------------------------------------- window to action


def guided_record(tick, code, kind="key_down", session_id="s0"):
    return HumanGuidedRecord(
        session_id=session_id, tick=tick, frame_snapshot=some_frame(),
        operation={"tick": tick, "kind": kind, "code": code},
    )


def demo_window():
    return GuidanceWindow(
        anchor=guided_record(3, "W"),
        following=(
            guided_record(5, "mouse_left", kind="mouse_button"),
            guided_record(9, "Space"),
        ),
    )


def test_summarized_action_body_is_the_translated_window():
    window = demo_window()
    backend = _CannedBackend('{"annotation": "walk in and poke, then dodge"}')
    lib = ActionLibrary()
    entry = summarize_to_action(window, backend, lib)

    expected_body, dropped = events_to_atomics(window.operations)
    assert dropped == 0
    assert list(entry.body) == expected_body
    assert [c.encode() for c in entry.body] == ["Move:N", "LightAttack", "Dodge"]
    assert entry.name == window_action_name(window) == "human_guided_s0_3"
    assert entry.provenance == "human_guided"
    assert entry.annotation == "walk in and poke, then dodge"
    assert entry.name in lib

    bundle = backend.bundles[0]
    assert bundle.schema_id == "guidance_summary"
    assert bundle.frames == (window.anchor.frame_snapshot,)
    assert bundle.user_segments[0].startswith("ops: ")


def test_same_window_twice_gets_a_suffixed_name():
    backend = _CannedBackend('{"annotation": "again"}')
    lib = ActionLibrary()
    first = summarize_to_action(demo_window(), backend, lib)
    second = summarize_to_action(demo_window(), backend, lib)
    assert first.name == "human_guided_s0_3"
    assert second.name == "human_guided_s0_3_2"
    assert list(first.body) == list(second.body)


def test_window_with_no_mapped_commands_raises_before_the_backend():
    window = GuidanceWindow(anchor=guided_record(3, "Q"), following=())
    backend = _CannedBackend('{"annotation": "never used"}')
    with pytest.raises(LibraryError):
        summarize_to_action(window, backend, ActionLibrary())
    assert backend.bundles == []


def test_window_operations_restore_key_releases():
    window = demo_window()
    ops = window.operations
    assert [(o["kind"], o["code"]) for o in ops] == [
        ("key_down", "W"), ("key_up", "W"),
        ("mouse_button", "mouse_left"),
        ("key_down", "Space"), ("key_up", "Space"),
    ]
    # serializes cleanly for the wire
    json.dumps(ops)
