"""Playback service: catalog, posting, generation jobs and timed delivery.

The client owns the clock: it posts position heartbeats and the session
window delivers each danmaku once, no earlier than ``time_s - lookahead``.
Backward seeks reset the window; redelivered records carry a replay flag.
"""

from __future__ import annotations

import json
import threading
import time
import uuid
from dataclasses import dataclass, field

from fastapi import FastAPI, HTTPException, Query
from fastapi.responses import StreamingResponse
from pydantic import BaseModel

from .errors import NotFound, SessionExpired
from .pipeline import GenerationJob, run_job
from .prompting import GenerationConfig
from .store import Catalog
from .track import (Danmaku, DanmakuTrack, DanmakuType, Position,
                    track_to_json, with_appended)

DEFAULT_LOOKAHEAD_S = 10.0
SEEK_BACK_THRESHOLD_S = 2.0
SESSION_TTL_S = 30.0
MAX_POST_UNITS = 200


def danmaku_to_dict(d: Danmaku) -> dict:
    return {
        "id": d.id,
        "persona": d.persona_label,
        "time_s": d.time_s,
        "type": d.dtype.value,
        "category": d.category.value,
        "text": d.text,
        "color": f"#{d.color:06x}",
        "position": d.position.value,
        "reply_to": d.reply_to,
    }


@dataclass
class DeliverySession:
    """Per-client cursor over one video's track."""

    session_id: str
    video_id: str
    lookahead_s: float = DEFAULT_LOOKAHEAD_S
    position_s: float = 0.0
    delivered: set[str] = field(default_factory=set)
    last_heartbeat: float = field(default_factory=time.monotonic)
    _pending_reset: float | None = None
    _replay_ids: set[str] = field(default_factory=set)

    def heartbeat(self, position_s: float, now: float | None = None) -> None:
        now = time.monotonic() if now is None else now
        if now - self.last_heartbeat > SESSION_TTL_S:
            raise SessionExpired(self.session_id)
        if position_s < self.position_s - SEEK_BACK_THRESHOLD_S:
            # backward seek: reopen the window from position - lookahead
            self._pending_reset = max(position_s - self.lookahead_s, 0.0)
        self.position_s = position_s
        self.last_heartbeat = now

    def due(self, track: DanmakuTrack) -> list[tuple[Danmaku, bool]]:
        """Records newly inside [0, position + lookahead], ordered by time."""
        if self._pending_reset is not None:
            start = self._pending_reset
            times = {d.id: d.time_s for d in track.danmaku}
            reset = {i for i in self.delivered if times.get(i, -1.0) >= start}
            self.delivered -= reset
            self._replay_ids |= reset
            self._pending_reset = None
        horizon = self.position_s + self.lookahead_s
        out: list[tuple[Danmaku, bool]] = []
        for d in track.danmaku:
            if d.time_s > horizon:
                break
            if d.id in self.delivered:
                continue
            replay = d.id in self._replay_ids
            self.delivered.add(d.id)
            self._replay_ids.discard(d.id)
            out.append((d, replay))
        return out

    def expired(self, now: float | None = None) -> bool:
        now = time.monotonic() if now is None else now
        return now - self.last_heartbeat > SESSION_TTL_S


class PostDanmakuRequest(BaseModel):
    time_s: float
    text: str
    color: str = "#ffffff"
    position: str = "scroll"


class CursorUpdate(BaseModel):
    session: str
    position_s: float


class GenerateRequest(BaseModel):
    seed: int = 0


class ServiceState:
    def __init__(self, catalog: Catalog, lookahead_s: float = DEFAULT_LOOKAHEAD_S):
        self.catalog = catalog
        self.lookahead_s = lookahead_s
        self.sessions: dict[str, DeliverySession] = {}
        self.tracks: dict[str, DanmakuTrack] = {}
        self.jobs: dict[str, GenerationJob] = {}
        self.lock = threading.Lock()
        self._post_seq = 0

    def get_track(self, video_id: str) -> DanmakuTrack:
        with self.lock:
            if video_id in self.tracks:
                return self.tracks[video_id]
        track = self.catalog.load_track(video_id)
        with self.lock:
            self.tracks[video_id] = track
        return track

    def append_post(self, video_id: str, req: PostDanmakuRequest) -> Danmaku:
        with self.lock:
            self._post_seq += 1
            seq = self._post_seq
        record = Danmaku(
            id=f"u{seq:06d}",
            persona_label=None,
            time_s=req.time_s,
            dtype=DanmakuType.USER_POSTED,
            text=req.text,
            color=int(req.color.lstrip("#"), 16),
            position=Position(req.position),
        )
        with self.catalog.lock(video_id):
            track = self.get_track(video_id)
            track = with_appended(track, record)
            self.catalog.save_track(track)
            with self.lock:
                self.tracks[video_id] = track
        return record


def create_app(catalog: Catalog, lookahead_s: float = DEFAULT_LOOKAHEAD_S,
               ) -> FastAPI:
    app = FastAPI(title="comet danmaku service")
    state = ServiceState(catalog, lookahead_s)
    app.state.comet = state

    def _manifest_or_404(video_id: str):
        try:
            return catalog.load_manifest(video_id)
        except NotFound:
            raise HTTPException(status_code=404, detail="video not found")

    @app.get("/videos")
    def list_videos():
        out = []
        for vid in catalog.list_videos():
            m = catalog.load_manifest(vid)
            out.append({"id": m.id, "title": m.title, "course": m.course,
                        "duration_s": m.duration_s})
        return out

    @app.get("/videos/{video_id}/track")
    def get_track(video_id: str):
        _manifest_or_404(video_id)
        try:
            track = state.get_track(video_id)
        except NotFound:
            raise HTTPException(status_code=404, detail="no track for video")
        return json.loads(track_to_json(track))

    @app.get("/videos/{video_id}/danmaku")
    def get_danmaku(video_id: str,
                    from_: float = Query(0.0, alias="from"),
                    to: float = Query(1e12)):
        _manifest_or_404(video_id)
        track = state.get_track(video_id)
        return [danmaku_to_dict(d) for d in track.danmaku
                if from_ <= d.time_s <= to]

    @app.post("/videos/{video_id}/danmaku")
    def post_danmaku(video_id: str, req: PostDanmakuRequest):
        manifest = _manifest_or_404(video_id)
        if not req.text.strip():
            raise HTTPException(status_code=422, detail="empty text")
        if len(req.text) > MAX_POST_UNITS:
            raise HTTPException(status_code=422, detail="text too long")
        if not 0 <= req.time_s <= manifest.duration_s:
            raise HTTPException(status_code=422, detail="time outside video")
        record = state.append_post(video_id, req)
        return danmaku_to_dict(record)

    @app.post("/videos/{video_id}/generate")
    def generate(video_id: str, req: GenerateRequest):
        manifest = _manifest_or_404(video_id)
        job = GenerationJob(job_id=uuid.uuid4().hex[:12], video_id=video_id)
        state.jobs[job.job_id] = job

        def work():
            try:
                track, _report, _assignments = run_job(
                    manifest, GenerationConfig(), catalog=catalog,
                    seed=req.seed, job=job)
                with state.lock:
                    state.tracks[video_id] = track
            except Exception:
                pass  # job carries the error

        threading.Thread(target=work, daemon=True).start()
        return {"job_id": job.job_id}

    @app.get("/jobs/{job_id}")
    def get_job(job_id: str):
        job = state.jobs.get(job_id)
        if job is None:
            try:
                return json.loads(catalog.load_job(job_id))
            except NotFound:
                raise HTTPException(status_code=404, detail="job not found")
        return json.loads(job.to_json())

    @app.post("/videos/{video_id}/cursor")
    def cursor(video_id: str, update: CursorUpdate):
        _manifest_or_404(video_id)
        sess = state.sessions.get(update.session)
        if sess is None:
            sess = DeliverySession(update.session, video_id,
                                   lookahead_s=state.lookahead_s)
            state.sessions[update.session] = sess
        try:
            sess.heartbeat(update.position_s)
        except SessionExpired:
            del state.sessions[update.session]
            raise HTTPException(status_code=410, detail="session expired")
        return {"position_s": sess.position_s}

    @app.get("/videos/{video_id}/stream")
    def stream(video_id: str, session: str):
        manifest = _manifest_or_404(video_id)
        sess = state.sessions.get(session)
        if sess is None:
            sess = DeliverySession(session, video_id,
                                   lookahead_s=state.lookahead_s)
            state.sessions[session] = sess

        def gen():
            while True:
                if sess.expired():
                    yield "event: expired\ndata: {}\n\n"
                    return
                track = state.get_track(video_id)
                for d, replay in sess.due(track):
                    payload = danmaku_to_dict(d)
                    payload["replay"] = replay
                    yield ("event: danmaku\ndata: "
                           + json.dumps(payload, ensure_ascii=False) + "\n\n")
                if sess.position_s >= manifest.duration_s:
                    yield "event: end\ndata: {}\n\n"
                    return
                time.sleep(0.05)

        return StreamingResponse(gen(), media_type="text/event-stream")

    return app
