"""Live play service: WebSocket sessions bridging humans and the agent.

One world per connection, turn-gated: the world advances only while a command
executes, so human sessions stay deterministic and replayable. Messages are
structured-text objects, one per websocket text frame, each carrying the
protocol version and a per-direction strictly increasing sequence number.

Client -> server:
    {"v": 1, "seq": n, "type": "input", "event": {"kind": ..., "code": ...}}
    {"v": 1, "seq": n, "type": "control", "op": "start",
     "task_id": 2, "seed": 0, "record": true, "player_tag": "me"}
    {"v": 1, "seq": n, "type": "control", "op": "mode", "mode": "agent"}
    {"v": 1, "seq": n, "type": "control", "op": "pause" | "resume" | "save"}

Server -> client:
    {"v": 1, "seq": n, "type": "frame_update", "frame": ..., "mode": ...,
     "tick": t, "status": {"kind": ..., "reason": ...}}
    {"v": 1, "seq": n, "type": "session_saved", "path": ...}
    {"v": 1, "seq": n, "type": "error", "code": ..., "message": ...}

Event ticks are stamped server side at the current world tick; whatever the
client puts in "tick" is ignored. Inputs that initiate no command (key_up,
mouse_move, auto-repeats, unmapped codes) produce no frame_update, so clients
must not block on one reply per input. Recording covers human play only:
agent episodes are reproducible from (task, seed, config), so a session file
is a pure human input stream and always replays. A version mismatch closes
the connection; malformed messages are ignored and counted.
"""
from __future__ import annotations

import asyncio
import json
import os
import uuid
from datetime import datetime, timezone
from pathlib import Path

from fastapi import FastAPI, WebSocket, WebSocketDisconnect
from fastapi.responses import HTMLResponse, JSONResponse
from fastapi.staticfiles import StaticFiles

from .agent import AgentLibraries, EpisodeState, TaskEnv, run_step
from .config import AgentConfig
from .gateway.oracle import ScriptedOracle
from .guidance.events import EVENT_KINDS, KEYMAP, EventCollapser, InputEvent
from .guidance.sessions import COMMAND_EVENT_KINDS, SessionHeader, SessionRecorder

PROTOCOL_VERSION = 1
DEFAULT_PORT = 8787
CLOSE_VERSION_MISMATCH = 4400
CLOSE_DUPLICATE_SESSION = 4409

MODES = ("human", "agent", "takeover")


def default_port() -> int:
    return int(os.environ.get("VARP_PORT", DEFAULT_PORT))


def _now() -> str:
    return datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


class LiveSession:
    """Server-side state for one connection: world, mode, recorder, log."""

    def __init__(self, sid: str, ws: WebSocket, sessions_dir: Path,
                 agent_config: AgentConfig | None = None):
        self.sid = sid
        self.ws = ws
        self.sessions_dir = sessions_dir
        self.mode = "human"
        self.paused = False
        self.env: TaskEnv | None = None
        self.recorder: SessionRecorder | None = None
        self.collapser = EventCollapser()
        self.agent_config = agent_config or AgentConfig()
        self.agent_state: EpisodeState | None = None
        self.agent_libs: AgentLibraries | None = None
        self.agent_backend = None
        self.agent_task: asyncio.Task | None = None
        self.world_lock = asyncio.Lock()
        self.out_seq = 0
        self.last_in_seq = 0
        self.malformed = 0
        self.dropped_inputs = 0
        self.log: list[dict] = []

    # -- outbound ------------------------------------------------------------

    async def send(self, type_: str, **fields):
        self.out_seq += 1
        msg = {"v": PROTOCOL_VERSION, "seq": self.out_seq, "type": type_}
        msg.update(fields)
        self.log.append({"dir": "out", "type": type_, "seq": self.out_seq,
                         **{k: v for k, v in fields.items()
                            if k in ("mode", "tick", "path", "code")}})
        await self.ws.send_text(json.dumps(msg))

    async def send_error(self, code: str, message: str):
        await self.send("error", code=code, message=message)

    async def push_frame(self):
        frame = self.env.frame()
        status = self.env.status()
        await self.send(
            "frame_update", frame=frame.to_dict(), mode=self.mode,
            tick=frame.tick,
            status={"kind": status.kind.value, "reason": status.reason},
        )

    # -- inbound -------------------------------------------------------------

    async def handle(self, raw: str) -> bool:
        """Handle one client message; False means the connection must close."""
        try:
            doc = json.loads(raw)
        except (json.JSONDecodeError, UnicodeDecodeError):
            doc = None
        if not isinstance(doc, dict):
            self.malformed += 1
            await self.send_error("malformed", "message is not a structured object")
            return True
        if doc.get("v") != PROTOCOL_VERSION:
            await self.send_error(
                "version_mismatch",
                f"server speaks protocol {PROTOCOL_VERSION}, got {doc.get('v')!r}",
            )
            return False
        seq = doc.get("seq")
        if not isinstance(seq, int) or seq <= self.last_in_seq:
            self.malformed += 1
            await self.send_error(
                "bad_sequence", "sequence numbers must strictly increase")
            return True
        self.last_in_seq = seq
        kind = doc.get("type")
        self.log.append({"dir": "in", "type": kind, "seq": seq,
                         "op": doc.get("op")})
        if kind == "input":
            await self._on_input(doc)
        elif kind == "control":
            await self._on_control(doc)
        else:
            self.malformed += 1
            await self.send_error("malformed", f"unknown message type {kind!r}")
        return True

    async def _on_control(self, doc: dict):
        op = doc.get("op")
        if op == "start":
            await self._op_start(doc)
        elif op == "mode":
            await self._op_mode(doc)
        elif op == "pause":
            self.paused = True
        elif op == "resume":
            self.paused = False
            self._kick_agent()
        elif op == "save":
            await self._op_save()
        else:
            self.malformed += 1
            await self.send_error("malformed", f"unknown control op {op!r}")

    async def _op_start(self, doc: dict):
        task_id, seed = doc.get("task_id"), doc.get("seed", 0)
        if not isinstance(task_id, int) or not isinstance(seed, int):
            self.malformed += 1
            await self.send_error("malformed", "start needs integer task_id and seed")
            return
        try:
            env = TaskEnv(task_id, seed)
        except KeyError:
            await self.send_error("bad_task", f"no task {task_id}")
            return
        await self._stop_agent()
        self.env = env
        self.mode = "human"
        self.paused = False
        self.collapser = EventCollapser()
        self.agent_state = None
        self.agent_libs = None
        self.recorder = None
        if doc.get("record"):
            self.recorder = SessionRecorder(SessionHeader(
                session_id=self.sid,
                task_id=task_id,
                seed=seed,
                player_tag=str(doc.get("player_tag", "live")),
                clean=bool(doc.get("clean", False)),
                created_at=_now(),
            ))
            self.recorder.add_frame(env.frame())
        await self.push_frame()

    async def _op_mode(self, doc: dict):
        mode = doc.get("mode")
        if mode not in MODES:
            self.malformed += 1
            await self.send_error("malformed", f"unknown mode {mode!r}")
            return
        if self.env is None:
            await self.send_error("not_started", "start a task first")
            return
        if mode == "takeover" and self.agent_state is None:
            await self.send_error(
                "no_agent_episode", "takeover requires a running agent episode")
            return
        if mode == "agent" and self.recorder is not None:
            await self.send_error(
                "recording_is_human_only",
                "save or restart before handing control to the agent")
            return
        self.mode = mode
        if mode == "agent":
            if self.agent_state is None:
                self.agent_state = EpisodeState()
                self.agent_libs = AgentLibraries.fresh(tuning=self.env.tuning)
                self.agent_backend = ScriptedOracle()
            self._kick_agent()
        await self.push_frame()

    async def _op_save(self):
        if self.recorder is None:
            await self.send_error("not_recording", "nothing is being recorded")
            return
        status = self.env.status()
        tick = self.env.frame().tick
        self.sessions_dir.mkdir(parents=True, exist_ok=True)
        path = self.sessions_dir / f"{self.sid}.jsonl"
        self.recorder.finish(status, tick, path)
        self.recorder = None
        await self.send("session_saved", path=str(path))

    async def _on_input(self, doc: dict):
        event = doc.get("event")
        if (not isinstance(event, dict) or event.get("kind") not in EVENT_KINDS
                or not isinstance(event.get("code"), str)):
            self.malformed += 1
            await self.send_error("malformed", "input needs an event with kind/code")
            return
        if self.env is None:
            await self.send_error("not_started", "start a task first")
            return
        if self.mode == "agent":
            await self.send_error("agent_has_control", "toggle takeover to play")
            return
        if self.paused:
            await self.send_error("paused", "resume before sending input")
            return
        if not self.env.status().ongoing:
            await self.send_error("task_over", "the task has ended; start again")
            return
        async with self.world_lock:
            ev = InputEvent(tick=self.env.frame().tick, kind=event["kind"],
                            code=event["code"])
            cmd = self.collapser.feed(ev)
            if ev.kind not in COMMAND_EVENT_KINDS:
                if self.recorder is not None:
                    self.recorder.add_event(ev)
                return
            if cmd is None:
                # auto-repeat or unmapped: no command, kept out of the file
                # so recordings collapse identically on replay
                self.dropped_inputs += 1
                return
            if self.recorder is not None:
                self.recorder.add_event(ev)
            outcome = self.env.execute([cmd])
            if self.recorder is not None:
                self.recorder.add_frame(self.env.frame())
            self.log.append({"dir": "world", "origin": "human",
                             "command": cmd.encode(), "tick": ev.tick,
                             "commands_run": outcome.commands_run})
        await self.push_frame()

    # -- agent driving -------------------------------------------------------

    def _kick_agent(self):
        if (self.mode == "agent" and not self.paused and self.env is not None
                and (self.agent_task is None or self.agent_task.done())):
            self.agent_task = asyncio.create_task(self._agent_loop())

    async def _stop_agent(self):
        task, self.agent_task = self.agent_task, None
        if task is not None and not task.done():
            task.cancel()
            try:
                await task
            except asyncio.CancelledError:
                pass

    async def _agent_loop(self):
        """Run agent steps until the task ends, pause, or a mode switch."""
        cfg = self.agent_config
        while self.mode == "agent" and not self.paused:
            if not self.env.status().ongoing:
                break
            if self.agent_state.step >= cfg.step_cap:
                break
            async with self.world_lock:
                result = await asyncio.to_thread(
                    run_step, self.env, self.agent_libs, self.agent_backend,
                    cfg, self.agent_state)
            chosen = result.decision.chosen if result.decision else None
            self.log.append({"dir": "world", "origin": "agent",
                             "command": chosen, "step": self.agent_state.step})
            await self.push_frame()
            await asyncio.sleep(0)

    def log_view(self) -> dict:
        status = None
        if self.env is not None:
            s = self.env.status()
            status = {"kind": s.kind.value, "reason": s.reason}
        return {
            "session_id": self.sid,
            "mode": self.mode,
            "recording": self.recorder is not None,
            "status": status,
            "malformed": self.malformed,
            "dropped_inputs": self.dropped_inputs,
            "entries": list(self.log),
        }


_PLACEHOLDER = """<!doctype html>
<title>varp</title>
<p>The play UI bundle is not built. Point VARP_UI_DIR at a built bundle or
run the service from a checkout with frontend/dist present.</p>
"""


def _find_ui_dir(explicit) -> Path | None:
    candidates = []
    if explicit:
        candidates.append(Path(explicit))
    if os.environ.get("VARP_UI_DIR"):
        candidates.append(Path(os.environ["VARP_UI_DIR"]))
    candidates.append(Path("frontend/dist"))
    for cand in candidates:
        if cand.is_dir() and (cand / "index.html").exists():
            return cand
    return None


def create_app(ui_dir=None, sessions_dir="sessions",
               agent_config: AgentConfig | None = None) -> FastAPI:
    app = FastAPI(title="varp session service")
    sessions: dict[str, LiveSession] = {}
    app.state.sessions = sessions
    sdir = Path(sessions_dir)

    @app.websocket("/ws")
    async def ws_endpoint(ws: WebSocket):
        sid = ws.query_params.get("session") or f"live-{uuid.uuid4().hex[:12]}"
        live = sessions.get(sid)
        if live is not None and live.ws.client_state.name == "CONNECTED":
            await ws.close(code=CLOSE_DUPLICATE_SESSION)
            return
        await ws.accept()
        session = LiveSession(sid, ws, sdir, agent_config)
        sessions[sid] = session
        try:
            while True:
                raw = await ws.receive_text()
                if not await session.handle(raw):
                    await ws.close(code=CLOSE_VERSION_MISMATCH)
                    break
        except WebSocketDisconnect:
            pass
        finally:
            await session._stop_agent()

    @app.get("/sessions")
    async def list_sessions():
        return JSONResponse(sorted(sessions))

    @app.get("/sessions/{sid}/log")
    async def session_log(sid: str):
        live = sessions.get(sid)
        if live is None:
            return JSONResponse({"error": f"no session {sid!r}"}, status_code=404)
        return JSONResponse(live.log_view())

    ui = _find_ui_dir(ui_dir)
    if ui is not None:
        app.mount("/", StaticFiles(directory=ui, html=True), name="ui")
    else:
        @app.get("/")
        async def placeholder():
            return HTMLResponse(_PLACEHOLDER)

    return app


def serve(port=None, host: str = "127.0.0.1", ui_dir=None,
          sessions_dir="sessions"):
    import uvicorn

    uvicorn.run(create_app(ui_dir=ui_dir, sessions_dir=sessions_dir),
                host=host, port=port if port is not None else default_port())
