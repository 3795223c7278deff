"""Deterministic mock generation: tracks that satisfy every constraint.

Used as the test backend; output is valid Appendix-style response Markdown,
reproducible from (manifest.id, seed).
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass

from .persona import DEFAULT_PERSONAS, PersonaSet, render_personas
from .prompting import GenerationConfig
from .track import (RED, BLUE, WHITE, Danmaku, DanmakuTrack, DanmakuType,
                    Position, render_track)
from .video import VideoManifest

_HIGHLIGHT_TEXTS = [
    "Key term: {w}", "Remember: {w}", "Core idea: {w}", "Note: {w} matters",
    "Focus on {w}", "{w} is the key",
]
_QUESTION_TEXTS = [
    "Why does {w} work?", "What is {w} exactly?", "Is {w} always true?",
    "How does {w} apply here?",
]
_ANSWER_TEXTS = [
    "it follows from {w}", "check the {w} part", "yes, see {w}",
    "the video explains {w} next",
]
_DISCUSSION_TEXTS = [
    "I think {w} links both ideas", "Maybe {w} is an example",
    "This recalls {w} from before", "{w} seems central here",
]
_SUMMARY_TEXTS = [
    "Section recap: {w}", "So far: {w}", "This part covered {w}",
]
_PEE_TEXTS = [
    "😊 loving this part!", "lol this is neat 😂", "so clear 👍", "wow, nice!",
    "😮 did not expect that", "hhh good one",
]
_COMPLIMENT_TEXTS = [
    "Great point on {w}!", "Nice note about {w}!", "Good catch on {w}!",
]
_NEGATIVE_TEXTS = [
    "oh, I'm lost here...", "this bit is tough...", "ugh, I'm drifting off...",
]
_ENCOURAGE_TEXTS = [
    "hang in there, almost done!", "you got this 💪", "don't worry, it clears up",
]


def generate_mock_personas(seed: int = 0) -> str:
    return render_personas(DEFAULT_PERSONAS)


@dataclass
class _PlanItem:
    dtype: DanmakuType
    text: str
    persona: str
    color: int = WHITE
    reply_offset: bool = False  # second half of a pair


def _topic_words(manifest: VideoManifest, rng: random.Random) -> list[str]:
    words = set()
    for seg in manifest.transcript:
        for w in seg.text.split():
            w = w.strip(".,;:!?\"'()").lower()
            if len(w) >= 5:
                words.add(w)
    if not words:
        words = {"this", "topic"}
    out = sorted(words)
    rng.shuffle(out)
    return out


class _Texts:
    def __init__(self, words: list[str], rng: random.Random):
        self.words = words
        self.rng = rng
        self.i = 0

    def word(self) -> str:
        w = self.words[self.i % len(self.words)]
        self.i += 1
        return w

    def pick(self, bank: list[str]) -> str:
        tpl = bank[self.rng.randrange(len(bank))]
        return tpl.format(w=self.word()) if "{w}" in tpl else tpl


def _window_units(f: float, config: GenerationConfig, texts: _Texts,
                  labels: list[str], rng: random.Random,
                  ) -> list[list[_PlanItem]]:
    """Plan one window as a list of units (singletons or linked pairs)."""
    c_lo, c_hi = config.content_per_min
    e_lo, e_hi = config.emotion_per_min
    h_min = config.highlights_per_min_min

    def smin(base):
        return base if f >= 1.0 else math.floor(base * f)

    def smax(base):
        return base if f >= 1.0 else math.ceil(base * f)

    h = smin(h_min)
    c = min(max(round((h_min + 7) * f), smin(c_lo), h), smax(c_hi))
    h = min(h, c)
    e = min(max(round(7 * f), smin(e_lo)), smax(e_hi))

    rem = c - h
    summary = 1 if rem >= 1 else 0
    qa_pairs = min(2, (rem - summary) // 2)
    discussion = rem - summary - 2 * qa_pairs

    enc_pairs = 1 if e >= 2 else 0
    compl = 1 if e - 2 * enc_pairs >= 1 else 0
    pee = e - 2 * enc_pairs - compl

    def label() -> str:
        return labels[rng.randrange(len(labels))]

    def other(lab: str) -> str:
        choices = [l for l in labels if l != lab]
        return choices[rng.randrange(len(choices))]

    content_units: list[list[_PlanItem]] = []
    for i in range(h):
        color = RED if i % 2 == 0 else BLUE
        content_units.append([_PlanItem(DanmakuType.HIGHLIGHT,
                                        texts.pick(_HIGHLIGHT_TEXTS), label(), color)])
    for _ in range(qa_pairs):
        q_lab = label()
        a_lab = other(q_lab)
        content_units.append([
            _PlanItem(DanmakuType.QA, texts.pick(_QUESTION_TEXTS), q_lab),
            _PlanItem(DanmakuType.QA, f"@{q_lab} " + texts.pick(_ANSWER_TEXTS),
                      a_lab, reply_offset=True),
        ])
    for _ in range(discussion):
        content_units.append([_PlanItem(DanmakuType.DISCUSSION,
                                        texts.pick(_DISCUSSION_TEXTS), label())])
    for _ in range(summary):
        content_units.append([_PlanItem(DanmakuType.SUMMARY,
                                        texts.pick(_SUMMARY_TEXTS), label())])

    emotion_units: list[list[_PlanItem]] = []
    for _ in range(enc_pairs):
        n_lab = label()
        e_lab = other(n_lab)
        emotion_units.append([
            _PlanItem(DanmakuType.ENCOURAGEMENT, texts.pick(_NEGATIVE_TEXTS), n_lab),
            _PlanItem(DanmakuType.ENCOURAGEMENT,
                      f"@{n_lab} " + texts.pick(_ENCOURAGE_TEXTS), e_lab,
                      reply_offset=True),
        ])
    for _ in range(compl):
        emotion_units.append([_PlanItem(DanmakuType.COMPLIMENT,
                                        texts.pick(_COMPLIMENT_TEXTS), label())])
    for _ in range(pee):
        emotion_units.append([_PlanItem(DanmakuType.EMOTION_EXPRESSION,
                                        texts.pick(_PEE_TEXTS), label())])

    # interleave so both categories spread across the window
    merged: list[list[_PlanItem]] = []
    nc, ne = len(content_units), len(emotion_units)
    ci = ei = 0
    while ci < nc or ei < ne:
        if ei >= ne or (ci < nc and ci * ne <= ei * nc):
            merged.append(content_units[ci])
            ci += 1
        else:
            merged.append(emotion_units[ei])
            ei += 1
    return merged


def generate_mock_track(manifest: VideoManifest, personas: PersonaSet,
                        config: GenerationConfig = GenerationConfig(),
                        seed: int = 0) -> str:
    """Emit response Markdown whose parsed track validates with no violations."""
    rng = random.Random(f"{manifest.id}:{seed}")
    texts = _Texts(_topic_words(manifest, rng), rng)
    labels = personas.labels
    duration = manifest.duration_s

    windows: list[tuple[float, float]] = []
    full = int(duration // 60)
    for k in range(full):
        windows.append((k * 60.0, 60.0))
    rem = duration - full * 60
    if rem > 1e-9:
        windows.append((full * 60.0, rem))

    records: list[Danmaku] = []
    for start, length in windows:
        f = length / 60.0
        units = _window_units(f, config, texts, labels, rng)
        n = sum(len(u) for u in units)
        if n == 0:
            continue
        slots = [start + (i + 0.5) * length / n for i in range(n)]
        i = 0
        for unit in units:
            first_time = slots[i]
            for j, item in enumerate(unit):
                t = slots[i]
                if item.reply_offset:
                    t = min(t, first_time + config.qa_answer_delay_s)
                records.append(Danmaku(
                    id=f"m{len(records) + 1:04d}",
                    persona_label=item.persona,
                    time_s=round(t, 2),
                    dtype=item.dtype,
                    text=item.text,
                    color=item.color,
                    position=(Position.TOP if item.dtype is DanmakuType.HIGHLIGHT
                              else Position.SCROLL),
                ))
                i += 1

    if not records:
        records.append(Danmaku(
            id="m0001", persona_label=labels[0], time_s=round(duration / 2, 2),
            dtype=DanmakuType.SUMMARY, text="Short clip recap",
        ))

    track = DanmakuTrack(video_id=manifest.id, danmaku=tuple(records))
    return render_track(track)
