"""HTTP session service for agents and browser clients.

JSON over HTTP; frames travel as row-major 64x64 arrays of ints 0-15.
One engine session lives behind each opaque token and is stepped under
a per-session lock (sessions are single-threaded by contract; distinct
sessions run in parallel). Reads never mutate: fetching frames or the
scorecard any number of times leaves digests untouched.

Endpoints:
    GET  /games                         registry listing
    POST /sessions                      {game_id, seed?} -> token + frames
    POST /sessions/{token}/actions      {kind, x?, y?} -> transition payload
    GET  /sessions/{token}/frames       current frames
    GET  /sessions/{token}/scorecard    counts, plus live scores when a
                                        baseline is loaded
    POST /replays                       {content} -> replay token (for the
                                        step-through viewer)
    GET  /replays/{id}                  metadata + level boundaries
    GET  /replays/{id}/frames?index=k   frames after the k-th action

Sessions idle for 60 minutes are reclaimed. Malformed action payloads
return 400, unknown tokens 404, finished sessions 409, and session
exhaustion 429.
"""

from __future__ import annotations

import threading
import time
import uuid
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .engine import (
    Action,
    ActionKind,
    Session,
    SessionStatus,
    UnknownGameId,
    UnsupportedAction,
    get_environment,
    registered_game_ids,
)
from .hashing import digest_hex
from .recording import (
    OUTCOME_INCOMPLETE,
    RecordedAction,
    Recording,
    RecordingFormatError,
    frames_at,
    loads_recording,
)
from .scoring import HumanBaseline, Scorecard, score_level_counts

SESSION_IDLE_SECONDS = 60 * 60


class ApiError(Exception):
    def __init__(self, status: int, message: str) -> None:
        super().__init__(message)
        self.status = status
        self.message = message


@dataclass
class _Entry:
    session: Session
    recording: Recording
    lock: threading.Lock = field(default_factory=threading.Lock)
    last_used: float = field(default_factory=time.monotonic)
    opened_ms: float = field(default_factory=lambda: time.monotonic() * 1000)


def _frames_payload(frames) -> list[list[list[int]]]:
    return [np.asarray(f).tolist() for f in frames]


def _parse_action(body: object) -> Action:
    if not isinstance(body, dict):
        raise ApiError(400, "action payload must be a JSON object")
    kind_name = body.get("kind")
    if not isinstance(kind_name, str):
        raise ApiError(400, "missing action kind")
    try:
        kind = ActionKind(kind_name.lower())
    except ValueError:
        raise ApiError(400, f"unknown action kind {kind_name!r}") from None
    x, y = body.get("x"), body.get("y")
    try:
        if kind is ActionKind.SELECT:
            if not isinstance(x, int) or not isinstance(y, int):
                raise ApiError(400, "select requires integer x and y")
            return Action(kind, x, y)
        if x is not None or y is not None:
            raise ApiError(400, f"{kind.value} takes no coordinates")
        return Action(kind)
    except ValueError as exc:
        raise ApiError(400, str(exc)) from None


def make_app(
    baselines: Optional[dict[str, HumanBaseline]] = None,
    max_sessions: int = 256,
) -> FastAPI:
    app = FastAPI(title="gridbench session service")
    sessions: dict[str, _Entry] = {}
    replays: dict[str, Recording] = {}
    table_lock = threading.Lock()
    baselines = baselines or {}

    @app.exception_handler(ApiError)
    async def _api_error(_request: Request, exc: ApiError):
        return JSONResponse(status_code=exc.status, content={"error": exc.message})

    def _reap() -> None:
        now = time.monotonic()
        with table_lock:
            dead = [t for t, e in sessions.items() if now - e.last_used > SESSION_IDLE_SECONDS]
            for t in dead:
                del sessions[t]

    def _entry(token: str) -> _Entry:
        with table_lock:
            entry = sessions.get(token)
        if entry is None:
            raise ApiError(404, "unknown or expired session token")
        entry.last_used = time.monotonic()
        return entry

    # -- environments -------------------------------------------------

    @app.get("/games")
    def games():
        out = []
        for gid in registered_game_ids():
            spec = get_environment(gid).spec
            out.append(
                {
                    "game_id": gid,
                    "level_count": spec.level_count,
                    "action_set": sorted(k.value for k in spec.action_set),
                    "tutorial_level": spec.tutorial_level_index,
                    "benchmark": spec.benchmark,
                }
            )
        return out

    # -- sessions ------------------------------------------------------

    @app.post("/sessions", status_code=201)
    async def open_session_endpoint(request: Request):
        _reap()
        body = await request.json()
        if not isinstance(body, dict) or not isinstance(body.get("game_id"), str):
            raise ApiError(400, "body must be {game_id, seed?}")
        game_id = body["game_id"]
        seed = body.get("seed")
        if seed is None:
            seed = uuid.uuid4().int & 0xFFFFFFFFFFFFFFFF
        if not isinstance(seed, int) or seed < 0:
            raise ApiError(400, "seed must be a non-negative integer")
        try:
            session = Session.open(game_id, seed)
        except UnknownGameId as exc:
            raise ApiError(404, str(exc)) from None
        with table_lock:
            if len(sessions) >= max_sessions:
                raise ApiError(429, "session quota exhausted")
            token = uuid.uuid4().hex
            recording = Recording(
                game_id=game_id, seed=seed, source="human", participant="ui"
            )
            sessions[token] = _Entry(session=session, recording=recording)
        return {
            "token": token,
            "game_id": game_id,
            "seed": seed,
            "level": session.current_level,
            "status": session.status.value,
            "action_set": sorted(k.value for k in session.spec.action_set),
            "state_hash": digest_hex(session.state_digest()),
            "frames": _frames_payload(session.frames()),
        }

    @app.post("/sessions/{token}/actions")
    async def act(token: str, request: Request):
        entry = _entry(token)
        action = _parse_action(await request.json())
        with entry.lock:
            session = entry.session
            if session.status in (
                SessionStatus.ENVIRONMENT_COMPLETE,
                SessionStatus.GAME_OVER,
            ):
                raise ApiError(409, f"session is {session.status.value}")
            pre_level = session.current_level
            try:
                transition = session.step(action)
            except UnsupportedAction as exc:
                raise ApiError(400, str(exc)) from None
            t_ms = int(time.monotonic() * 1000 - entry.opened_ms)
            entry.recording.actions.append(
                RecordedAction(action, pre_level, transition.state_hash, t_ms)
            )
            return {
                "level": session.current_level,
                "status": session.status.value,
                "action_was_valid": transition.action_was_valid,
                "level_completed": transition.level_completed,
                "environment_completed": transition.environment_completed,
                "game_over": transition.game_over,
                "state_hash": digest_hex(transition.state_hash),
                "action_counts": list(session.action_counts),
                "frames": _frames_payload(transition.frames),
            }

    @app.get("/sessions/{token}/frames")
    def frames(token: str):
        entry = _entry(token)
        with entry.lock:
            return {
                "level": entry.session.current_level,
                "status": entry.session.status.value,
                "state_hash": digest_hex(entry.session.state_digest()),
                "frames": _frames_payload(entry.session.frames()),
            }

    @app.get("/sessions/{token}/scorecard")
    def scorecard(token: str):
        entry = _entry(token)
        with entry.lock:
            session = entry.session
            counts = {
                level: session.action_counts[i]
                for i, level in enumerate(session.levels_entered())
            }
            payload = {
                "game_id": session.spec.game_id,
                "status": session.status.value,
                "level": session.current_level,
                "action_counts": {str(k): v for k, v in counts.items()},
                "total_actions": sum(counts.values()),
            }
            baseline = baselines.get(session.spec.game_id)
            if baseline is not None:
                solved = _solved_levels(session)
                card: Scorecard = score_level_counts(
                    {level: counts[level] for level in solved if level in counts},
                    baseline,
                )
                payload["scores"] = {
                    str(r.level): {
                        "actions": r.actions,
                        "score": r.score,
                        "solved": r.level in solved,
                    }
                    for r in card.levels
                }
                payload["environment_score"] = card.environment
                payload["baseline_fingerprint"] = card.baseline_fingerprint
            return payload

    def _solved_levels(session: Session) -> set[int]:
        first = session.first_level
        entered = session.levels_entered()
        solved = set(entered[:-1])  # advancing past a level means it was won
        if session.status is SessionStatus.ENVIRONMENT_COMPLETE:
            solved.add(entered[-1])
        return solved

    @app.get("/sessions/{token}/recording")
    def session_recording(token: str):
        """The session's trace so far, in the recording file format."""
        from .recording import dumps_recording

        entry = _entry(token)
        with entry.lock:
            session = entry.session
            rec = entry.recording
            if session.status is SessionStatus.ENVIRONMENT_COMPLETE:
                rec.outcome = "win"
            elif session.status is SessionStatus.GAME_OVER:
                rec.outcome = "loss"
            else:
                rec.outcome = OUTCOME_INCOMPLETE
            return {"content": dumps_recording(rec)}

    # -- replay viewing -------------------------------------------------

    @app.post("/replays", status_code=201)
    async def upload_replay(request: Request):
        body = await request.json()
        if not isinstance(body, dict) or not isinstance(body.get("content"), str):
            raise ApiError(400, "body must be {content: <recording file text>}")
        try:
            recording = loads_recording(body["content"])
        except (RecordingFormatError, ValueError) as exc:
            raise ApiError(400, f"unparseable recording: {exc}") from None
        try:
            get_environment(recording.game_id)
        except UnknownGameId as exc:
            raise ApiError(404, str(exc)) from None
        replay_id = uuid.uuid4().hex[:12]
        with table_lock:
            replays[replay_id] = recording
        boundaries = []
        prev_level = 1
        for i, entry in enumerate(recording.actions):
            if entry.pre_level != prev_level:
                boundaries.append({"index": i, "level": entry.pre_level})
                prev_level = entry.pre_level
        return {
            "replay_id": replay_id,
            "game_id": recording.game_id,
            "length": len(recording.actions),
            "outcome": recording.outcome,
            "level_boundaries": boundaries,
        }

    @app.get("/replays/{replay_id}/frames")
    def replay_frames(replay_id: str, index: int = 0):
        with table_lock:
            recording = replays.get(replay_id)
        if recording is None:
            raise ApiError(404, "unknown replay id")
        if not 0 <= index <= len(recording.actions):
            raise ApiError(400, f"index {index} outside [0, {len(recording.actions)}]")
        return {
            "index": index,
            "level": recording.actions[index - 1].pre_level if index else 1,
            "frames": _frames_payload(frames_at(recording, index)),
        }

    return app
