"""Video manifest handling, scene segmentation and clip descriptions."""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass, field

from .errors import EmptyManifest, MalformedHints, NoScenesFound, ZeroLengthClip
from .timecode import format_timestamp, parse_timestamp


@dataclass(frozen=True)
class TranscriptSegment:
    start_s: float
    end_s: float
    text: str

    def __post_init__(self):
        if not self.start_s < self.end_s:
            raise ValueError(f"transcript segment start {self.start_s} >= end {self.end_s}")
        if not self.text.strip():
            raise ValueError("transcript segment text is empty")


@dataclass(frozen=True)
class VideoManifest:
    """The pipeline's sole input: metadata, transcript and optional frame data."""

    id: str
    title: str
    abstract: str
    course: str
    duration_s: float
    transcript: tuple[TranscriptSegment, ...] = ()
    frame_captions: tuple[tuple[float, str], ...] | None = None
    frame_scores: tuple[tuple[float, float], ...] | None = None
    scene_hints: tuple[tuple[float, float, str], ...] | None = None

    def __post_init__(self):
        if self.duration_s <= 0:
            raise EmptyManifest(f"duration_s must be > 0, got {self.duration_s}")
        prev_end = 0.0
        prev_start = -1.0
        for seg in self.transcript:
            if seg.start_s < prev_start:
                raise ValueError("transcript segments out of order")
            if seg.start_s < prev_end - 1e-9:
                raise ValueError("transcript segments overlap")
            if seg.start_s < 0 or seg.end_s > self.duration_s + 1e-9:
                raise ValueError("transcript segment outside [0, duration]")
            prev_start, prev_end = seg.start_s, seg.end_s
        if self.frame_scores:
            prev_t = -math.inf
            for t, score in self.frame_scores:
                if t <= prev_t:
                    raise ValueError("frame_scores times must be strictly increasing")
                if t < 0 or t > self.duration_s:
                    raise ValueError("frame_scores time outside [0, duration]")
                if score < 0:
                    raise ValueError("frame_scores score must be >= 0")
                prev_t = t


_MANIFEST_KEYS = {
    "id", "title", "abstract", "course", "duration_s",
    "transcript", "frame_captions", "frame_scores", "scene_hints",
}


def manifest_from_json(text: str) -> VideoManifest:
    """Load a manifest from its canonical JSON form; unknown keys are rejected."""
    data = json.loads(text)
    if not isinstance(data, dict):
        raise ValueError("manifest must be a JSON object")
    unknown = set(data) - _MANIFEST_KEYS
    if unknown:
        raise ValueError(f"unknown manifest keys: {sorted(unknown)}")
    missing = {"id", "title", "abstract", "course", "duration_s"} - set(data)
    if missing:
        raise ValueError(f"missing manifest keys: {sorted(missing)}")
    transcript = tuple(
        TranscriptSegment(seg["start_s"], seg["end_s"], seg["text"])
        for seg in data.get("transcript", [])
    )
    captions = data.get("frame_captions")
    scores = data.get("frame_scores")
    hints = data.get("scene_hints")
    return VideoManifest(
        id=data["id"],
        title=data["title"],
        abstract=data["abstract"],
        course=data["course"],
        duration_s=float(data["duration_s"]),
        transcript=transcript,
        frame_captions=tuple((c["t"], c["caption"]) for c in captions) if captions else None,
        frame_scores=tuple((s["t"], s["score"]) for s in scores) if scores else None,
        scene_hints=tuple((h["start_s"], h["end_s"], h["label"]) for h in hints) if hints else None,
    )


def manifest_to_json(manifest: VideoManifest) -> str:
    data: dict = {
        "id": manifest.id,
        "title": manifest.title,
        "abstract": manifest.abstract,
        "course": manifest.course,
        "duration_s": manifest.duration_s,
        "transcript": [
            {"start_s": s.start_s, "end_s": s.end_s, "text": s.text}
            for s in manifest.transcript
        ],
    }
    if manifest.frame_captions is not None:
        data["frame_captions"] = [{"t": t, "caption": c} for t, c in manifest.frame_captions]
    if manifest.frame_scores is not None:
        data["frame_scores"] = [{"t": t, "score": s} for t, s in manifest.frame_scores]
    if manifest.scene_hints is not None:
        data["scene_hints"] = [
            {"start_s": a, "end_s": b, "label": lab} for a, b, lab in manifest.scene_hints
        ]
    return json.dumps(data, ensure_ascii=False, indent=2) + "\n"


@dataclass(frozen=True)
class SceneClip:
    index: int  # 1-based
    start_s: float
    end_s: float
    title: str | None = None
    description: str | None = None

    @property
    def length_s(self) -> float:
        return self.end_s - self.start_s


@dataclass(frozen=True)
class TextLevelDescription:
    """Video metadata plus the timestamped transcript, JSON-serializable."""

    title: str
    abstract: str
    course: str
    transcript: tuple[tuple[float, float, str], ...]

    @classmethod
    def from_manifest(cls, manifest: VideoManifest) -> "TextLevelDescription":
        return cls(
            title=manifest.title,
            abstract=manifest.abstract,
            course=manifest.course,
            transcript=tuple((s.start_s, s.end_s, s.text) for s in manifest.transcript),
        )

    def to_json(self) -> str:
        """Canonical serialization: identical input yields identical bytes."""
        data = {
            "meta": {"title": self.title, "abstract": self.abstract, "course": self.course},
            "transcript": [
                {"start_s": a, "end_s": b, "text": t} for a, b, t in self.transcript
            ],
        }
        return json.dumps(data, ensure_ascii=False, separators=(",", ":"))


@dataclass(frozen=True)
class SegmentationParams:
    threshold: float = 27.0  # conventional content-detector default
    min_len_s: float = 10.0
    pause_s: float = 3.0


def _clips_from_boundaries(boundaries: list[float], duration_s: float) -> list[SceneClip]:
    cuts = [0.0] + sorted(b for b in boundaries if 0.0 < b < duration_s) + [duration_s]
    clips = []
    for i in range(len(cuts) - 1):
        clips.append(SceneClip(index=i + 1, start_s=cuts[i], end_s=cuts[i + 1]))
    return clips


def segment_scenes(manifest: VideoManifest,
                   params: SegmentationParams = SegmentationParams()) -> list[SceneClip]:
    """Partition [0, duration] into scene clips.

    Preference order for boundary evidence: explicit scene hints, then
    frame-difference scores above the threshold, then transcript silences.
    """
    duration = manifest.duration_s
    if duration <= 0:
        raise EmptyManifest("zero-duration manifest")

    if manifest.scene_hints:
        hints = sorted(manifest.scene_hints, key=lambda h: h[0])
        prev_end = None
        for start, end, _ in hints:
            if prev_end is not None and start < prev_end - 1e-9:
                raise MalformedHints(f"hint starting at {start} overlaps previous")
            prev_end = end
        clips: list[SceneClip] = []
        cursor = 0.0
        for i, (start, end, label) in enumerate(hints):
            start = max(min(start, duration), 0.0)
            end = max(min(end, duration), 0.0)
            # fill gaps by extending each clip back to the previous end
            start = cursor
            if i == len(hints) - 1:
                end = duration
            if end <= start:
                continue
            clips.append(SceneClip(index=len(clips) + 1, start_s=start, end_s=end,
                                   title=label or None))
            cursor = end
        if not clips:
            clips = [SceneClip(index=1, start_s=0.0, end_s=duration)]
        return clips

    if manifest.frame_scores:
        boundaries = []
        last_cut = 0.0
        for t, score in manifest.frame_scores:
            if score > params.threshold and t - last_cut >= params.min_len_s:
                boundaries.append(t)
                last_cut = t
        return _clips_from_boundaries(boundaries, duration)

    boundaries = []
    prev_end = None
    for seg in manifest.transcript:
        if prev_end is not None and seg.start_s - prev_end >= params.pause_s:
            boundaries.append((prev_end + seg.start_s) / 2)
        prev_end = seg.end_s
    return _clips_from_boundaries(boundaries, duration)


def round_half_up(x: float) -> int:
    return math.floor(x + 0.5)


def sample_frame_times(clip: SceneClip) -> list[float]:
    """Uniform midpoint sampling at a rate of 5 frames per minute."""
    length = clip.end_s - clip.start_s
    if length <= 0:
        raise ZeroLengthClip(f"clip {clip.index} has zero length")
    k = max(1, round_half_up(5 * length / 60))
    return [clip.start_s + (i + 0.5) * length / k for i in range(k)]


CLIP_DESCRIPTION_INSTRUCTIONS = (
    "- You are an expert in understanding scene transitions based on visual "
    "features and transcripts in a video.\n"
    "- For the given sequence of images per timestamp, the input format is "
    "timestamp: image, identify different scenes in the video.\n"
    "- Generate descriptions for each scene with time ranges.\n"
)


def build_clip_description_prompt(clip: SceneClip, frame_refs: list[str],
                                  transcript_slice: list[TranscriptSegment]) -> str:
    """Assemble the clip-description prompt: instructions, frames, transcript."""
    if not frame_refs:
        raise ValueError("frame_refs must be non-empty")
    times = sample_frame_times(clip)
    lines = [CLIP_DESCRIPTION_INSTRUCTIONS]
    lines.append("Frames:")
    for t, ref in zip(times, frame_refs):
        lines.append(f"{format_timestamp(t)}: {ref}")
    if transcript_slice:
        lines.append("")
        lines.append("Transcript:")
        for seg in transcript_slice:
            lines.append(
                f"{format_timestamp(seg.start_s)} - {format_timestamp(seg.end_s)}: {seg.text}"
            )
    return "\n".join(lines) + "\n"


_SCENE_RE = re.compile(r"^###\s*Scene\s+(\d+)\s*:\s*(.+?)\s*$", re.MULTILINE)
_RANGE_RE = re.compile(r"\*\*Time Range:\*\*\s*([0-9:.]+)\s*-\s*([0-9:.]+)")
_DESC_RE = re.compile(r"\*\*Description:\*\*\s*(.+?)\s*(?=$|\n\s*\n|\n\s*###)", re.DOTALL)


def parse_clip_descriptions(markdown: str, duration_s: float) -> list[SceneClip]:
    """Parse ``### Scene N: title`` blocks back into scene clips.

    Total over arbitrary input; raises NoScenesFound only when no block
    parses at all.
    """
    matches = list(_SCENE_RE.finditer(markdown))
    clips: list[SceneClip] = []
    for i, m in enumerate(matches):
        block_end = matches[i + 1].start() if i + 1 < len(matches) else len(markdown)
        block = markdown[m.end():block_end]
        rng = _RANGE_RE.search(block)
        if not rng:
            continue
        try:
            start = parse_timestamp(rng.group(1))
            end = parse_timestamp(rng.group(2))
        except ValueError:
            continue
        start = min(max(start, 0.0), duration_s)
        end = min(max(end, 0.0), duration_s)
        if end < start:
            continue
        desc = _DESC_RE.search(block)
        clips.append(SceneClip(
            index=int(m.group(1)),
            start_s=start,
            end_s=end,
            title=m.group(2),
            description=desc.group(1).strip() if desc else None,
        ))
    if not clips:
        raise NoScenesFound("no scene blocks parsed")
    clips.sort(key=lambda c: c.start_s)
    return [SceneClip(index=i + 1, start_s=c.start_s, end_s=c.end_s,
                      title=c.title, description=c.description)
            for i, c in enumerate(clips)]


def render_clip_descriptions(clips: list[SceneClip]) -> str:
    """Inverse of parse_clip_descriptions for caching and the mock backend."""
    parts = ["Based on the provided images and transcript, the video can be "
             "divided into the following scenes:\n"]
    for clip in clips:
        parts.append(f"### Scene {clip.index}: {clip.title or f'Clip {clip.index}'}")
        parts.append(f"**Time Range:** {format_timestamp(clip.start_s)} - "
                     f"{format_timestamp(clip.end_s)}  ")
        parts.append(f"**Description:** {clip.description or 'No description available.'}")
        parts.append("")
    return "\n".join(parts)
