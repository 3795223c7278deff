"""Rule checks, deterministic repair, and distribution statistics for tracks."""

from __future__ import annotations

import enum
import json
import math
import re
import unicodedata
from dataclasses import dataclass, replace

from .prompting import GenerationConfig
from .track import Category, Danmaku, DanmakuTrack, DanmakuType

_FONT_TAG_RE = re.compile(r"</?font[^>]*>")


def strip_tags(text: str) -> str:
    return _FONT_TAG_RE.sub("", text)


def grapheme_count(text: str) -> int:
    """Extended grapheme cluster count (combining marks fold into their base)."""
    count = 0
    for ch in text:
        if unicodedata.combining(ch) or ch in ("‍", "️"):
            continue
        count += 1
    return count


def danmaku_length(text: str, unit: str) -> int:
    plain = strip_tags(text).strip()
    if unit == "words":
        return len(plain.split())
    return grapheme_count(plain)


class Rule(str, enum.Enum):
    R1_LENGTH = "R1_Length"
    R2_MAX_GAP = "R2_MaxGap"
    R3_CONTENT_RATE = "R3_ContentRate"
    R4_EMOTION_RATE = "R4_EmotionRate"
    R5_HIGHLIGHT_MIN = "R5_HighlightMin"
    R6_QA_DELAY = "R6_QaDelay"
    R7_COVERAGE = "R7_Coverage"
    R8_REPLY_INTEGRITY = "R8_ReplyIntegrity"
    R9_TIME_BOUNDS = "R9_TimeBounds"


class RepairAction(str, enum.Enum):
    DROPPED = "Dropped"
    MOVED = "Moved"
    KEPT_WITH_WARNING = "KeptWithWarning"


@dataclass(frozen=True)
class Violation:
    rule: Rule
    window: tuple[float, float]
    detail: str
    offending_ids: tuple[str, ...] = ()


@dataclass(frozen=True)
class MinuteStats:
    minute: int
    content: int
    emotion: int
    highlight: int


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple[Violation, ...]
    per_minute_stats: tuple[MinuteStats, ...]
    max_gap_s: float
    repaired: tuple[tuple[RepairAction, str], ...] = ()

    @property
    def clean(self) -> bool:
        return not self.violations

    def to_json(self) -> str:
        data = {
            "violations": [
                {
                    "rule": v.rule.value,
                    "window": [v.window[0], v.window[1]],
                    "detail": v.detail,
                    "offending_ids": list(v.offending_ids),
                }
                for v in self.violations
            ],
            "per_minute_stats": [
                {"minute": s.minute, "content": s.content, "emotion": s.emotion,
                 "highlight": s.highlight}
                for s in self.per_minute_stats
            ],
            "max_gap_s": self.max_gap_s,
            "repaired": [[a.value, i] for a, i in self.repaired],
        }
        return json.dumps(data, ensure_ascii=False, indent=2) + "\n"


def _windows(duration_s: float) -> list[tuple[float, float, float]]:
    """Minute windows anchored at 0: (start, end, fraction-of-a-minute)."""
    out = []
    full = int(duration_s // 60)
    for k in range(full):
        out.append((k * 60.0, (k + 1) * 60.0, 1.0))
    rem = duration_s - full * 60
    if rem > 1e-9:
        out.append((full * 60.0, duration_s, rem / 60.0))
    return out


def _scaled_min(base: int, f: float) -> int:
    return base if f >= 1.0 else math.floor(base * f)


def _scaled_max(base: int, f: float) -> int:
    return base if f >= 1.0 else math.ceil(base * f)


def _window_index(time_s: float, windows) -> int:
    idx = int(time_s // 60)
    return min(idx, len(windows) - 1)


def validate(track: DanmakuTrack, duration_s: float,
             config: GenerationConfig = GenerationConfig()) -> ValidationReport:
    """Evaluate every rule; reports violations, never raises."""
    violations: list[Violation] = []
    windows = _windows(duration_s)
    per_window: list[list[Danmaku]] = [[] for _ in windows]
    for d in track.danmaku:
        if windows:
            per_window[_window_index(min(d.time_s, duration_s), windows)].append(d)

    # R1: length under the configured unit limit
    for d in track.danmaku:
        n = danmaku_length(d.text, config.length_unit)
        if n >= config.max_len_units:
            violations.append(Violation(
                Rule.R1_LENGTH, (d.time_s, d.time_s),
                f"length {n} {config.length_unit} >= {config.max_len_units}",
                (d.id,)))

    # R2: no gap longer than max_gap_s, ends included
    times = [min(max(d.time_s, 0.0), duration_s) for d in track.danmaku]
    edges = [0.0] + times + [duration_s]
    max_gap = 0.0
    for a, b in zip(edges, edges[1:]):
        gap = b - a
        if gap > max_gap:
            max_gap = gap
        if gap > config.max_gap_s + 1e-9:
            violations.append(Violation(
                Rule.R2_MAX_GAP, (a, b),
                f"gap {gap:.2f}s > {config.max_gap_s:g}s"))

    # R3/R4/R5: per-minute rate bands, partial final window scaled
    stats = []
    for (start, end, f), members in zip(windows, per_window):
        content = sum(1 for d in members if d.category is Category.CONTENT)
        emotion = sum(1 for d in members if d.category is Category.EMOTION)
        highlight = sum(1 for d in members if d.dtype is DanmakuType.HIGHLIGHT)
        stats.append(MinuteStats(int(start // 60), content, emotion, highlight))

        c_lo = _scaled_min(config.content_per_min[0], f)
        c_hi = _scaled_max(config.content_per_min[1], f)
        e_lo = _scaled_min(config.emotion_per_min[0], f)
        e_hi = _scaled_max(config.emotion_per_min[1], f)
        h_lo = _scaled_min(config.highlights_per_min_min, f)
        ids = tuple(d.id for d in members)
        if not c_lo <= content <= c_hi:
            violations.append(Violation(
                Rule.R3_CONTENT_RATE, (start, end),
                f"content count {content} outside [{c_lo}, {c_hi}]", ids))
        if not e_lo <= emotion <= e_hi:
            violations.append(Violation(
                Rule.R4_EMOTION_RATE, (start, end),
                f"emotion count {emotion} outside [{e_lo}, {e_hi}]", ids))
        if highlight < h_lo:
            violations.append(Violation(
                Rule.R5_HIGHLIGHT_MIN, (start, end),
                f"highlight count {highlight} < {h_lo}", ids))

    # R6: Q&A answers arrive within the configured delay
    by_id = {d.id: d for d in track.danmaku}
    for d in track.danmaku:
        if d.dtype is DanmakuType.QA and d.reply_to:
            target = by_id.get(d.reply_to)
            if target is None:
                continue  # R8 reports it
            delay = d.time_s - target.time_s
            if delay > config.qa_answer_delay_s + 1e-9:
                violations.append(Violation(
                    Rule.R6_QA_DELAY, (target.time_s, d.time_s),
                    f"answer delay {delay:.2f}s > {config.qa_answer_delay_s:g}s",
                    (d.id,)))

    # R7: every full minute holds at least one record of each category
    for (start, end, f), members in zip(windows, per_window):
        if f < 1.0:
            continue
        has_content = any(d.category is Category.CONTENT for d in members)
        has_emotion = any(d.category is Category.EMOTION for d in members)
        if not (has_content and has_emotion):
            missing = []
            if not has_content:
                missing.append("content")
            if not has_emotion:
                missing.append("emotion")
            violations.append(Violation(
                Rule.R7_COVERAGE, (start, end),
                f"minute lacks {' and '.join(missing)} danmaku"))

    # R8: reply targets exist and precede
    seen: set[str] = set()
    for d in track.danmaku:
        if d.reply_to is not None and d.reply_to not in seen:
            violations.append(Violation(
                Rule.R8_REPLY_INTEGRITY, (d.time_s, d.time_s),
                f"reply target {d.reply_to!r} missing or later", (d.id,)))
        seen.add(d.id)

    # R9: time bounds
    for d in track.danmaku:
        if d.time_s < 0 or d.time_s > duration_s + 1e-9:
            violations.append(Violation(
                Rule.R9_TIME_BOUNDS, (d.time_s, d.time_s),
                f"time {d.time_s:.2f}s outside [0, {duration_s:g}]", (d.id,)))

    return ValidationReport(
        violations=tuple(violations),
        per_minute_stats=tuple(stats),
        max_gap_s=max_gap,
    )


# Drop order under rate-maximum overflow: keep the left end of this list.
_DROP_PRIORITY = [
    DanmakuType.HIGHLIGHT,
    DanmakuType.QA,
    DanmakuType.SUMMARY,
    DanmakuType.USER_POSTED,
    DanmakuType.DISCUSSION,
    DanmakuType.COMPLIMENT,
    DanmakuType.ENCOURAGEMENT,
    DanmakuType.EMOTION_EXPRESSION,
]


def _truncate(text: str, limit: int, unit: str) -> str:
    if unit == "words":
        words = strip_tags(text).strip().split()
        return " ".join(words[: limit - 1]) + "…"
    plain = strip_tags(text).strip()
    kept = []
    for ch in plain:
        if danmaku_length("".join(kept) + ch, unit) >= limit:
            break
        kept.append(ch)
    return "".join(kept) + "…"


def repair(track: DanmakuTrack, report: ValidationReport,
           config: GenerationConfig = GenerationConfig(),
           pool: list[Danmaku] | None = None,
           duration_s: float | None = None,
           ) -> tuple[DanmakuTrack, ValidationReport]:
    """One deterministic repair pass followed by a single re-validation.

    Truncates over-long texts, clamps out-of-range times, drops the
    lowest-priority overflow in over-full windows, and fills deficits from
    the pool when one is supplied; anything else is kept with a warning.
    """
    if duration_s is None:
        duration_s = max([d.time_s for d in track.danmaku], default=0.0)
        for v in report.violations:
            duration_s = max(duration_s, v.window[1])
    actions: list[tuple[RepairAction, str]] = []
    records = {d.id: d for d in track.danmaku}
    dropped: set[str] = set()

    for v in report.violations:
        if v.rule is Rule.R1_LENGTH:
            for i in v.offending_ids:
                d = records[i]
                records[i] = replace(d, text=_truncate(d.text, config.max_len_units,
                                                       config.length_unit))
                actions.append((RepairAction.KEPT_WITH_WARNING, i))
        elif v.rule is Rule.R9_TIME_BOUNDS:
            for i in v.offending_ids:
                d = records[i]
                records[i] = replace(d, time_s=min(max(d.time_s, 0.0), duration_s))
                actions.append((RepairAction.MOVED, i))

    # rate maxima: drop overflow per window
    windows = _windows(duration_s)
    for v in report.violations:
        if v.rule not in (Rule.R3_CONTENT_RATE, Rule.R4_EMOTION_RATE):
            continue
        category = (Category.CONTENT if v.rule is Rule.R3_CONTENT_RATE
                    else Category.EMOTION)
        base = (config.content_per_min if category is Category.CONTENT
                else config.emotion_per_min)
        start, end = v.window
        f = min((end - start) / 60.0, 1.0)
        limit = _scaled_max(base[1], f)
        members = [records[i] for i in v.offending_ids
                   if i not in dropped and records[i].category is category]
        if len(members) <= limit:
            continue
        overflow = len(members) - limit
        members.sort(key=lambda d: (_DROP_PRIORITY.index(d.dtype), -d.time_s))
        for d in members[len(members) - overflow:]:
            dropped.add(d.id)
            actions.append((RepairAction.DROPPED, d.id))

    # deficits, gaps and coverage: fill from pool or keep with warning
    pool_left = list(pool or [])
    for v in report.violations:
        deficit_rules = (Rule.R3_CONTENT_RATE, Rule.R4_EMOTION_RATE,
                         Rule.R5_HIGHLIGHT_MIN, Rule.R2_MAX_GAP, Rule.R7_COVERAGE)
        if v.rule not in deficit_rules:
            continue
        start, end = v.window
        have = sum(1 for i in v.offending_ids if i not in dropped)
        if v.rule in (Rule.R3_CONTENT_RATE, Rule.R4_EMOTION_RATE):
            category = (Category.CONTENT if v.rule is Rule.R3_CONTENT_RATE
                        else Category.EMOTION)
            base_lo = (config.content_per_min[0] if category is Category.CONTENT
                       else config.emotion_per_min[0])
            f = min((end - start) / 60.0, 1.0)
            need = _scaled_min(base_lo, f) - have
            if need <= 0:
                continue
        else:
            need = 1
        filled = 0
        for cand in list(pool_left):
            if filled >= need:
                break
            if start <= cand.time_s <= end and cand.id not in records:
                records[cand.id] = cand
                pool_left.remove(cand)
                actions.append((RepairAction.MOVED, cand.id))
                filled += 1
        if filled < need:
            marked = v.offending_ids or ()
            if marked:
                for i in marked:
                    if i not in dropped:
                        actions.append((RepairAction.KEPT_WITH_WARNING, i))
            else:
                actions.append((RepairAction.KEPT_WITH_WARNING, ""))

    survivors = sorted(
        (d for i, d in records.items() if i not in dropped),
        key=lambda d: d.time_s)
    # drop reply links pointing at dropped records
    cleaned = []
    alive = {d.id for d in survivors}
    for d in survivors:
        if d.reply_to is not None and d.reply_to not in alive:
            d = replace(d, reply_to=None)
        cleaned.append(d)
    new_track = replace(track, danmaku=tuple(cleaned))

    # deduplicate actions, preserving first occurrence
    seen_actions = set()
    unique_actions = []
    for a in actions:
        if a not in seen_actions:
            seen_actions.add(a)
            unique_actions.append(a)

    new_report = validate(new_track, duration_s, config)
    new_report = replace(new_report, repaired=tuple(unique_actions))
    return new_track, new_report


@dataclass(frozen=True)
class TrackStats:
    total: int
    per_type: dict[str, int]
    content_fraction: float
    mean_len_units: float
    rate_per_min: float


def track_stats(track: DanmakuTrack, duration_s: float,
                length_unit: str = "words") -> TrackStats:
    total = len(track.danmaku)
    per_type = {t.value: 0 for t in DanmakuType}
    for d in track.danmaku:
        per_type[d.dtype.value] += 1
    content = sum(1 for d in track.danmaku if d.category is Category.CONTENT)
    lengths = [danmaku_length(d.text, length_unit) for d in track.danmaku]
    return TrackStats(
        total=total,
        per_type=per_type,
        content_fraction=content / total if total else 0.0,
        mean_len_units=sum(lengths) / total if total else 0.0,
        rate_per_min=total / (duration_s / 60.0) if duration_s > 0 else 0.0,
    )
