"""End-to-end generation jobs: segment, describe, personas, generate, validate."""

from __future__ import annotations

import hashlib
import json
import uuid
from dataclasses import dataclass, field, replace

from .errors import (CometError, JobFailed, NoItemsParsed, NoScenesFound,
                     PersonaError)
from .llm import LmmRequest, MockBackend
from .persona import PersonaSet, build_persona_prompt, parse_personas
from .prompting import GenerationConfig, build_prompt_bundle
from .scheduler import LaneAssignment, ScreenConfig, layout, schedule_to_json
from .store import Catalog
from .track import Category, DanmakuTrack, parse_track
from .validator import ValidationReport, repair, validate
from .video import (SceneClip, TextLevelDescription, VideoManifest,
                    build_clip_description_prompt, parse_clip_descriptions,
                    sample_frame_times, segment_scenes)

MAX_ATTEMPTS = 3

JOB_STATES = ("Queued", "DescribingClips", "CreatingPersonas", "Generating",
              "Validating", "Done", "Failed")


@dataclass
class GenerationJob:
    job_id: str
    video_id: str
    state: str = "Queued"
    attempts: int = 0
    error: str | None = None
    report: ValidationReport | None = None

    def advance(self, state: str) -> None:
        order = JOB_STATES.index
        # the Generating <-> Validating retry loop is the only backward edge
        if order(state) < order(self.state) and not (
                self.state == "Validating" and state == "Generating"):
            raise ValueError(f"illegal transition {self.state} -> {state}")
        self.state = state

    def to_json(self) -> str:
        data = {
            "job_id": self.job_id,
            "video_id": self.video_id,
            "state": self.state,
            "attempts": self.attempts,
            "error": self.error,
            "report": json.loads(self.report.to_json()) if self.report else None,
        }
        return json.dumps(data, ensure_ascii=False, indent=2) + "\n"


def _manifest_hash(manifest: VideoManifest) -> str:
    from .video import manifest_to_json
    return hashlib.sha256(manifest_to_json(manifest).encode()).hexdigest()[:16]


def describe_clips(manifest: VideoManifest, backend, catalog: Catalog | None = None,
                   ) -> list[SceneClip]:
    """Segment and attach clip-level descriptions, cached by manifest hash."""
    clips = segment_scenes(manifest)
    cache_key = _manifest_hash(manifest)
    if catalog is not None:
        try:
            cached = json.loads(catalog.load_text(manifest.id, "clips.json"))
            if cached.get("manifest_hash") == cache_key:
                return [SceneClip(**c) for c in cached["clips"]]
        except CometError:
            pass

    described: list[SceneClip] = []
    for clip in clips:
        frames = [f"frame@{t:.2f}" for t in sample_frame_times(clip)]
        transcript_slice = [s for s in manifest.transcript
                            if s.end_s > clip.start_s and s.start_s < clip.end_s]
        prompt = build_clip_description_prompt(clip, frames, transcript_slice)
        resp = backend.complete(LmmRequest(
            system="You describe educational video scenes.", user=prompt))
        try:
            parsed = parse_clip_descriptions(resp.text, manifest.duration_s)
        except NoScenesFound:
            described.append(clip)
            continue
        # keep our clip boundaries; adopt the description text
        best = min(parsed, key=lambda p: abs(p.start_s - clip.start_s))
        described.append(replace(clip, title=best.title,
                                 description=best.description))

    if catalog is not None:
        catalog.save_text(manifest.id, "clips.json", json.dumps({
            "manifest_hash": cache_key,
            "clips": [c.__dict__ for c in described],
        }, ensure_ascii=False, indent=2) + "\n")
    return described


def create_personas(manifest: VideoManifest, backend) -> PersonaSet:
    last: Exception | None = None
    for _ in range(MAX_ATTEMPTS):
        resp = backend.complete(LmmRequest(
            system="You create viewer personas for educational videos.",
            user=build_persona_prompt(manifest.title)))
        try:
            return parse_personas(resp.text, video_id=manifest.id)
        except PersonaError as e:
            last = e
    raise JobFailed(f"persona creation failed after {MAX_ATTEMPTS} attempts: {last}")


def _hard_violation(track: DanmakuTrack) -> str | None:
    if not any(d.category is Category.CONTENT for d in track.danmaku):
        return "no content-related danmaku generated"
    if not any(d.category is Category.EMOTION for d in track.danmaku):
        return "no emotion-related danmaku generated"
    return None


def run_job(manifest: VideoManifest, config: GenerationConfig = GenerationConfig(),
            backend=None, catalog: Catalog | None = None,
            screen: ScreenConfig = ScreenConfig(), seed: int = 0,
            job: GenerationJob | None = None,
            ) -> tuple[DanmakuTrack, ValidationReport, list[LaneAssignment]]:
    """Run the four pipeline stages and persist the artifacts.

    Regenerates (up to 3 attempts, violations appended as corrective
    feedback) on hard failures; soft violations go through repair.
    """
    if backend is None:
        backend = MockBackend(seed=seed)
    if job is None:
        job = GenerationJob(job_id=uuid.uuid4().hex[:12], video_id=manifest.id)

    def persist_job():
        if catalog is not None:
            catalog.save_job(job.job_id, job.to_json())

    try:
        job.advance("DescribingClips")
        persist_job()
        if isinstance(backend, MockBackend):
            backend.bind(manifest, None, config)
        clips = describe_clips(manifest, backend, catalog)

        job.advance("CreatingPersonas")
        persist_job()
        personas = create_personas(manifest, backend)
        if isinstance(backend, MockBackend):
            backend.bind(manifest, personas, config)

        text_desc = TextLevelDescription.from_manifest(manifest)
        bundle = build_prompt_bundle(config, personas, clips, text_desc)

        track = None
        feedback = ""
        last_error = "no attempts made"
        while job.attempts < MAX_ATTEMPTS:
            job.attempts += 1
            job.advance("Generating")
            persist_job()
            resp = backend.complete(LmmRequest(
                system=bundle.system_text, user=bundle.user_text + feedback))
            job.advance("Validating")
            persist_job()
            try:
                candidate, _warnings = parse_track(resp.text, personas,
                                                   manifest.duration_s)
            except NoItemsParsed as e:
                last_error = str(e)
                feedback = ("\nYour previous response could not be parsed: "
                            f"{e}. Follow the response format exactly.")
                continue
            hard = _hard_violation(candidate)
            if hard:
                last_error = hard
                feedback = f"\nYour previous response was rejected: {hard}."
                continue
            track = replace(candidate,
                            generated_at=_generated_at(backend, seed),
                            model_id=resp.model_id,
                            config_snapshot=config.to_dict())
            break
        if track is None:
            raise JobFailed(f"generation failed after {job.attempts} attempts: "
                            f"{last_error}")

        report = validate(track, manifest.duration_s, config)
        track, report = repair(track, report, config,
                               duration_s=manifest.duration_s)
        assignments = layout(track, screen)

        if catalog is not None:
            catalog.save_manifest(manifest)
            catalog.save_personas(manifest.id, personas)
            catalog.save_track(track)
            catalog.save_text(manifest.id, "schedule.json",
                              schedule_to_json(assignments))
            catalog.save_text(manifest.id, "report.json", report.to_json())
        job.report = report
        job.advance("Done")
        persist_job()
        return track, report, assignments
    except JobFailed as e:
        job.state = "Failed"
        job.error = str(e)
        job.report = e.report
        persist_job()
        raise
    except CometError as e:
        job.state = "Failed"
        job.error = str(e)
        persist_job()
        raise JobFailed(str(e)) from e


def _generated_at(backend, seed: int) -> str:
    # mock runs must be byte-reproducible; real runs carry wall-clock time
    if isinstance(backend, MockBackend):
        return f"2000-01-01T00:00:{seed % 60:02d}Z"
    import datetime
    return datetime.datetime.now(datetime.timezone.utc).strftime(
        "%Y-%m-%dT%H:%M:%SZ")
