"""Shared fixtures: a synthetic 300 s manifest and the golden sample files."""

from __future__ import annotations

import random
from dataclasses import replace
from pathlib import Path

import pytest

from comet.persona import DEFAULT_PERSONAS, PersonaSet
from comet.track import (BLUE, RED, WHITE, Danmaku, DanmakuTrack, DanmakuType,
                         Position)
from comet.video import TranscriptSegment, VideoManifest

FIXTURES = Path(__file__).parent / "fixtures"

_TOPICS = [
    "gradient descent updates model weights step by step",
    "learning rates control convergence speed during training",
    "overfitting appears when models memorize training noise",
    "validation curves reveal generalization behaviour clearly",
    "regularization penalties shrink large parameter values",
    "feature scaling keeps optimization surfaces well conditioned",
]


def make_manifest(duration_s: float = 300.0, video_id: str = "vid-300",
                  **overrides) -> VideoManifest:
    segments = []
    t = 0.0
    i = 0
    while t < duration_s - 1e-9:
        end = min(t + 10.0, duration_s)
        segments.append(TranscriptSegment(t, end, _TOPICS[i % len(_TOPICS)]))
        t = end
        i += 1
    fields = dict(
        id=video_id,
        title="Foundations of Machine Learning",
        abstract="An introductory lecture on optimization and generalization.",
        course="ML 101",
        duration_s=duration_s,
        transcript=tuple(segments),
    )
    fields.update(overrides)
    return VideoManifest(**fields)


@pytest.fixture
def manifest300() -> VideoManifest:
    return make_manifest()


@pytest.fixture
def personas() -> PersonaSet:
    return replace(DEFAULT_PERSONAS, video_id="vid-300")


@pytest.fixture
def golden_response() -> str:
    return (FIXTURES / "latin_response.md").read_text(encoding="utf-8")


@pytest.fixture
def golden_clips() -> str:
    return (FIXTURES / "brain_clips.md").read_text(encoding="utf-8")


_SAFE_CHARS = "abcdefghijklmnopqrstuvwxyz ABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789 .,!?'"


def random_text(rng: random.Random, max_len: int = 40) -> str:
    n = rng.randint(1, max_len)
    text = "".join(rng.choice(_SAFE_CHARS) for _ in range(n)).strip()
    return text or "ok"


def random_track(rng: random.Random, n: int, duration_s: float,
                 video_id: str = "rand", user_posted_only: bool = False,
                 scroll_only: bool = False) -> DanmakuTrack:
    """A valid random track: sorted times, no reply links, safe texts."""
    types = ([DanmakuType.USER_POSTED] if user_posted_only
             else [t for t in DanmakuType])
    times = sorted(round(rng.uniform(0, duration_s), 2) for _ in range(n))
    records = []
    for i, t in enumerate(times):
        dtype = rng.choice(types)
        persona = None if dtype is DanmakuType.USER_POSTED else rng.choice("ABCDEF")
        color = rng.choice([WHITE, RED, BLUE, rng.randrange(0x1000000)])
        if dtype is DanmakuType.HIGHLIGHT:
            position = Position.TOP
        elif scroll_only:
            position = Position.SCROLL
        else:
            position = rng.choice([Position.SCROLL, Position.SCROLL,
                                   Position.TOP, Position.BOTTOM])
        records.append(Danmaku(
            id=f"r{i + 1:04d}",
            persona_label=persona,
            time_s=t,
            dtype=dtype,
            text=random_text(rng),
            color=color,
            position=position,
        ))
    return DanmakuTrack(video_id=video_id, danmaku=tuple(records))
