"""File-per-video catalog plus the interop XML timed-comment format."""

from __future__ import annotations

import os
import re
import tempfile
import threading
import xml.etree.ElementTree as ET
from pathlib import Path
from xml.sax.saxutils import escape

from filelock import FileLock

from .errors import Corrupt, MalformedXml, NotFound
from .track import (WHITE, Danmaku, DanmakuTrack, DanmakuType, Position,
                    track_from_json, track_to_json)
from .video import VideoManifest, manifest_from_json, manifest_to_json
from .persona import PersonaSet, parse_personas, render_personas

_MODE_BY_POSITION = {Position.SCROLL: 1, Position.BOTTOM: 4, Position.TOP: 5}
_POSITION_BY_MODE = {v: k for k, v in _MODE_BY_POSITION.items()}
_XML_DECL = '<?xml version="1.0" encoding="UTF-8"?>'


def export_interop_xml(track: DanmakuTrack) -> bytes:
    """Render the ``<d p="time,mode,size,color,pool,source,rowid">`` format."""
    parts = [_XML_DECL, "<i>"]
    for rowid, d in enumerate(track.danmaku, start=1):
        mode = _MODE_BY_POSITION[d.position]
        source = d.persona_label if d.persona_label else "user"
        p = f"{d.time_s:.2f},{mode},25,{d.color},0,{source},{rowid}"
        parts.append(f'<d p="{p}">{escape(d.text)}</d>')
    parts.append("</i>")
    if len(parts) == 3:
        return (_XML_DECL + "<i></i>").encode("utf-8")
    return "".join(parts).encode("utf-8")


def import_interop_xml(data: bytes, video_id: str, duration_s: float,
                       ) -> DanmakuTrack:
    """Inverse mapping; imported records become user-posted comments."""
    try:
        root = ET.fromstring(data)
    except ET.ParseError as e:
        raise MalformedXml(str(e)) from e
    if root.tag != "i":
        raise MalformedXml(f"expected <i> root, got <{root.tag}>")
    records = []
    for el in root.iter("d"):
        attrs = (el.get("p") or "").split(",")
        if len(attrs) < 7:
            raise MalformedXml(f"bad p attribute: {el.get('p')!r}")
        try:
            time_s = float(attrs[0])
            mode = int(attrs[1])
            color = int(attrs[3])
        except ValueError as e:
            raise MalformedXml(str(e)) from e
        time_s = min(max(time_s, 0.0), duration_s)
        records.append(Danmaku(
            id=f"x{len(records) + 1:04d}",
            persona_label=None,
            time_s=time_s,
            dtype=DanmakuType.USER_POSTED,
            text=el.text or "",
            color=color,
            position=_POSITION_BY_MODE.get(mode, Position.SCROLL),
        ))
    records.sort(key=lambda d: d.time_s)
    return DanmakuTrack(video_id=video_id, danmaku=tuple(records))


class Catalog:
    """Disk layout: ``videos/<id>/{manifest,personas,track,schedule}.json``."""

    def __init__(self, root_dir: str | Path):
        self.root = Path(root_dir)
        (self.root / "videos").mkdir(parents=True, exist_ok=True)
        (self.root / "jobs").mkdir(parents=True, exist_ok=True)
        self._locks: dict[str, FileLock] = {}
        self._locks_guard = threading.Lock()

    def video_dir(self, video_id: str) -> Path:
        safe = re.sub(r"[^A-Za-z0-9._-]", "_", video_id)
        return self.root / "videos" / safe

    def lock(self, video_id: str) -> FileLock:
        d = self.video_dir(video_id)
        d.mkdir(parents=True, exist_ok=True)
        path = str(d / ".lock")
        # one shared instance per file: FileLock is only reentrant within
        # an instance, and nested acquisition happens (post -> save_track)
        with self._locks_guard:
            if path not in self._locks:
                self._locks[path] = FileLock(path)
            return self._locks[path]

    def list_videos(self) -> list[str]:
        out = []
        for d in sorted((self.root / "videos").iterdir()):
            if (d / "manifest.json").exists():
                out.append(d.name)
        return out

    def _write_atomic(self, path: Path, data: str) -> None:
        path.parent.mkdir(parents=True, exist_ok=True)
        fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=".tmp-")
        try:
            with os.fdopen(fd, "w", encoding="utf-8") as f:
                f.write(data)
            os.replace(tmp, path)
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise

    def _read(self, path: Path, what: str) -> str:
        if not path.exists():
            raise NotFound(f"{what}: {path}")
        return path.read_text(encoding="utf-8")

    # manifests

    def save_manifest(self, manifest: VideoManifest) -> None:
        self._write_atomic(self.video_dir(manifest.id) / "manifest.json",
                           manifest_to_json(manifest))

    def load_manifest(self, video_id: str) -> VideoManifest:
        text = self._read(self.video_dir(video_id) / "manifest.json", "manifest")
        try:
            return manifest_from_json(text)
        except (ValueError, KeyError) as e:
            raise Corrupt(f"manifest {video_id}: {e}") from e

    # personas

    def save_personas(self, video_id: str, personas: PersonaSet) -> None:
        self._write_atomic(self.video_dir(video_id) / "personas.json",
                           render_personas(personas))

    def load_personas(self, video_id: str) -> PersonaSet:
        text = self._read(self.video_dir(video_id) / "personas.json", "personas")
        try:
            return parse_personas(text, video_id=video_id)
        except Exception as e:
            raise Corrupt(f"personas {video_id}: {e}") from e

    # tracks

    def save_track(self, track: DanmakuTrack) -> None:
        with self.lock(track.video_id):
            self._write_atomic(self.video_dir(track.video_id) / "track.json",
                               track_to_json(track))

    def load_track(self, video_id: str) -> DanmakuTrack:
        text = self._read(self.video_dir(video_id) / "track.json", "track")
        try:
            return track_from_json(text)
        except (ValueError, KeyError) as e:
            raise Corrupt(f"track {video_id}: {e}") from e

    # schedules / reports / jobs: opaque JSON strings

    def save_text(self, video_id: str, name: str, data: str) -> None:
        self._write_atomic(self.video_dir(video_id) / name, data)

    def load_text(self, video_id: str, name: str) -> str:
        return self._read(self.video_dir(video_id) / name, name)

    def save_job(self, job_id: str, data: str) -> None:
        self._write_atomic(self.root / "jobs" / f"{job_id}.json", data)

    def load_job(self, job_id: str) -> str:
        return self._read(self.root / "jobs" / f"{job_id}.json", "job")
