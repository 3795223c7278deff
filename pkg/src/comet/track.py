"""Danmaku records, the Markdown track grammar, and track JSON."""

from __future__ import annotations

import enum
import json
import re
from dataclasses import dataclass, field, replace

from .errors import NoItemsParsed
from .persona import PersonaSet
from .timecode import format_timestamp, parse_timestamp

WHITE = 0xFFFFFF
RED = 0xFF0000
BLUE = 0x0000FF

REPLY_WINDOW_S = 30.0


class Category(str, enum.Enum):
    CONTENT = "content"
    EMOTION = "emotion"


class Position(str, enum.Enum):
    SCROLL = "scroll"
    TOP = "top"
    BOTTOM = "bottom"


class DanmakuType(str, enum.Enum):
    QA = "qa"
    DISCUSSION = "discussion"
    HIGHLIGHT = "highlight"
    SUMMARY = "summary"
    EMOTION_EXPRESSION = "emotion_expression"
    COMPLIMENT = "compliment"
    ENCOURAGEMENT = "encouragement"
    USER_POSTED = "user_posted"

    @property
    def category(self) -> Category:
        if self in (DanmakuType.QA, DanmakuType.DISCUSSION, DanmakuType.HIGHLIGHT,
                    DanmakuType.SUMMARY, DanmakuType.USER_POSTED):
            return Category.CONTENT
        return Category.EMOTION


# Canonical section headings and the aliases the parser accepts.
TYPE_HEADINGS: dict[DanmakuType, str] = {
    DanmakuType.EMOTION_EXPRESSION: "Personal Emotion Expression",
    DanmakuType.COMPLIMENT: "Brief Compliment",
    DanmakuType.ENCOURAGEMENT: "Encouragement",
    DanmakuType.DISCUSSION: "Discussion",
    DanmakuType.HIGHLIGHT: "Highlights",
    DanmakuType.QA: "Q&A",
    DanmakuType.SUMMARY: "Summary",
    DanmakuType.USER_POSTED: "User Posted",
}

_TYPE_ALIASES: dict[str, DanmakuType] = {}
for _dtype, _name in TYPE_HEADINGS.items():
    _TYPE_ALIASES[_name.lower()] = _dtype
_TYPE_ALIASES.update({
    "question-and-answer": DanmakuType.QA,
    "question and answer": DanmakuType.QA,
    "qa": DanmakuType.QA,
    "highlight": DanmakuType.HIGHLIGHT,
    "compliment": DanmakuType.COMPLIMENT,
    "personal emotional expression": DanmakuType.EMOTION_EXPRESSION,
    "emotion expression": DanmakuType.EMOTION_EXPRESSION,
    "user-posted": DanmakuType.USER_POSTED,
})


@dataclass(frozen=True)
class Danmaku:
    id: str
    persona_label: str | None
    time_s: float
    dtype: DanmakuType
    text: str
    color: int = WHITE
    position: Position = Position.SCROLL
    reply_to: str | None = None

    def __post_init__(self):
        if self.time_s < 0:
            raise ValueError("time_s must be >= 0")
        if not self.text.strip():
            raise ValueError("danmaku text is empty")
        if self.dtype is DanmakuType.HIGHLIGHT and self.position is not Position.TOP:
            raise ValueError("highlight danmaku must be top-pinned")

    @property
    def category(self) -> Category:
        return self.dtype.category


@dataclass(frozen=True)
class DanmakuTrack:
    video_id: str
    danmaku: tuple[Danmaku, ...]
    generated_at: str = ""
    model_id: str = ""
    config_snapshot: dict = field(default_factory=dict)

    def __post_init__(self):
        ids = {}
        prev_t = -1.0
        for i, d in enumerate(self.danmaku):
            if d.time_s < prev_t - 1e-9:
                raise ValueError("track not sorted by time")
            prev_t = max(prev_t, d.time_s)
            ids[d.id] = i
        for i, d in enumerate(self.danmaku):
            if d.reply_to is not None:
                j = ids.get(d.reply_to)
                if j is None or j >= i:
                    raise ValueError(f"reply target {d.reply_to!r} missing or later")

    def by_id(self, danmaku_id: str) -> Danmaku | None:
        for d in self.danmaku:
            if d.id == danmaku_id:
                return d
        return None


class WarningKind(str, enum.Enum):
    BAD_TIMESTAMP = "bad_timestamp"
    UNKNOWN_PERSONA = "unknown_persona"
    UNKNOWN_SECTION = "unknown_section"
    BAD_FONT_TAG = "bad_font_tag"
    ORPHAN = "orphan"


@dataclass(frozen=True)
class ParseWarning:
    line_no: int
    kind: WarningKind
    raw: str


_ITEM_RE = re.compile(r"^\s*-\s*(?P<role>[A-Za-z]|user)\s*\|\s*(?P<ts>[\d:.]+)\s*:\s*(?P<text>.+?)\s*$")
_FONT_RE = re.compile(r'^<font\s+color="(?P<color>[^"]*)"\s*>(?P<inner>.*)</font>$', re.DOTALL)
_REPLY_RE = re.compile(r"^@([A-Za-z])\b")

_NAMED_COLORS = {"red": RED, "blue": BLUE, "white": WHITE}


def _parse_color(text: str) -> int | None:
    name = text.strip().lower()
    if name in _NAMED_COLORS:
        return _NAMED_COLORS[name]
    m = re.fullmatch(r"#?([0-9a-fA-F]{6})", name)
    if m:
        return int(m.group(1), 16)
    return None


def parse_track(markdown: str, personas: PersonaSet, duration_s: float,
                ) -> tuple[DanmakuTrack, list[ParseWarning]]:
    """Parse the Markdown response grammar into a sorted danmaku track.

    Total over arbitrary UTF-8 input: malformed lines become warnings,
    never exceptions; only a fully empty result raises NoItemsParsed.
    """
    warnings: list[ParseWarning] = []
    known_labels = set(personas.labels)
    current_type: DanmakuType | None = None
    in_unknown_section = False

    raw_items: list[tuple[int, float, DanmakuType, str | None, str, int, int]] = []
    for line_no, line in enumerate(markdown.splitlines(), start=1):
        stripped = line.strip()
        if stripped.startswith("##"):
            name = stripped.lstrip("#").strip().rstrip(":").strip()
            dtype = _TYPE_ALIASES.get(name.lower())
            if dtype is None:
                warnings.append(ParseWarning(line_no, WarningKind.UNKNOWN_SECTION, line))
                in_unknown_section = True
                current_type = None
            else:
                current_type = dtype
                in_unknown_section = False
            continue
        if stripped.startswith("#"):
            # category heading: informational only, dtype implies category
            continue
        m = _ITEM_RE.match(line)
        if not m:
            if stripped.startswith("-") and "|" in stripped:
                warnings.append(ParseWarning(line_no, WarningKind.BAD_TIMESTAMP, line))
            continue
        if current_type is None:
            if not in_unknown_section:
                warnings.append(ParseWarning(line_no, WarningKind.UNKNOWN_SECTION, line))
            continue
        try:
            time_s = parse_timestamp(m.group("ts"))
        except ValueError:
            warnings.append(ParseWarning(line_no, WarningKind.BAD_TIMESTAMP, line))
            continue
        if time_s > duration_s:
            warnings.append(ParseWarning(line_no, WarningKind.BAD_TIMESTAMP, line))
            time_s = duration_s

        role = m.group("role")
        if role == "user":
            label = None
        else:
            label = role.upper()
            if label not in known_labels:
                warnings.append(ParseWarning(line_no, WarningKind.UNKNOWN_PERSONA, line))

        text = m.group("text")
        color = WHITE
        fm = _FONT_RE.match(text)
        if fm:
            parsed = _parse_color(fm.group("color"))
            inner = fm.group("inner").strip()
            if parsed is None or not inner:
                warnings.append(ParseWarning(line_no, WarningKind.BAD_FONT_TAG, line))
            else:
                color = parsed
                text = inner
        elif "<font" in text:
            warnings.append(ParseWarning(line_no, WarningKind.BAD_FONT_TAG, line))

        raw_items.append((line_no, time_s, current_type, label, text, color,
                          len(raw_items)))

    if not raw_items:
        raise NoItemsParsed("no danmaku lines recognized")

    raw_items.sort(key=lambda it: (it[1], it[6]))

    records: list[Danmaku] = []
    for order, (line_no, time_s, dtype, label, text, color, _) in enumerate(raw_items):
        danmaku_id = f"d{order + 1:04d}"
        position = Position.TOP if dtype is DanmakuType.HIGHLIGHT else Position.SCROLL
        reply_to = None
        rm = _REPLY_RE.match(text)
        if rm:
            target_label = rm.group(1).upper()
            for j in range(order - 1, -1, -1):
                cand = records[j]
                if cand.persona_label == target_label:
                    if time_s - cand.time_s <= REPLY_WINDOW_S:
                        reply_to = cand.id
                    break
            if reply_to is None:
                warnings.append(ParseWarning(line_no, WarningKind.ORPHAN, text))
        records.append(Danmaku(
            id=danmaku_id, persona_label=label, time_s=time_s, dtype=dtype,
            text=text, color=color, position=position, reply_to=reply_to,
        ))

    track = DanmakuTrack(video_id=personas.video_id, danmaku=tuple(records))
    return track, warnings


_CATEGORY_ORDER = (
    (Category.EMOTION, "Emotion-related danmaku",
     (DanmakuType.EMOTION_EXPRESSION, DanmakuType.COMPLIMENT, DanmakuType.ENCOURAGEMENT)),
    (Category.CONTENT, "Content-related danmaku",
     (DanmakuType.DISCUSSION, DanmakuType.HIGHLIGHT, DanmakuType.QA,
      DanmakuType.SUMMARY, DanmakuType.USER_POSTED)),
)


def _render_color(color: int) -> str:
    for name, value in _NAMED_COLORS.items():
        if value == color and name != "white":
            return name
    return f"#{color:06x}"


def render_track(track: DanmakuTrack) -> str:
    """Emit the canonical Markdown grammar; inverse of parse_track up to ids."""
    lines: list[str] = []
    for category, cat_heading, dtypes in _CATEGORY_ORDER:
        typed = {dt: [d for d in track.danmaku if d.dtype is dt] for dt in dtypes}
        if not any(typed.values()):
            continue
        lines.append(f"# {cat_heading}")
        for dt in dtypes:
            items = typed[dt]
            if not items:
                continue
            lines.append(f"## {TYPE_HEADINGS[dt]}")
            for d in items:
                role = d.persona_label if d.persona_label else "user"
                text = d.text
                if d.color != WHITE:
                    text = f'<font color="{_render_color(d.color)}">{text}</font>'
                lines.append(f"- {role} | {format_timestamp(d.time_s)}: {text}")
            lines.append("")
    return "\n".join(lines).rstrip("\n") + "\n"


def track_to_json(track: DanmakuTrack) -> str:
    data = {
        "video_id": track.video_id,
        "generated_at": track.generated_at,
        "model_id": track.model_id,
        "config_snapshot": track.config_snapshot,
        "danmaku": [
            {
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
            for d in track.danmaku
        ],
    }
    return json.dumps(data, ensure_ascii=False, indent=2) + "\n"


def track_from_json(text: str) -> DanmakuTrack:
    data = json.loads(text)
    records = []
    for item in data["danmaku"]:
        dtype = DanmakuType(item["type"])
        records.append(Danmaku(
            id=item["id"],
            persona_label=item["persona"],
            time_s=float(item["time_s"]),
            dtype=dtype,
            text=item["text"],
            color=int(item["color"].lstrip("#"), 16),
            position=Position(item["position"]),
            reply_to=item.get("reply_to"),
        ))
    return DanmakuTrack(
        video_id=data["video_id"],
        danmaku=tuple(records),
        generated_at=data.get("generated_at", ""),
        model_id=data.get("model_id", ""),
        config_snapshot=data.get("config_snapshot", {}),
    )


def with_appended(track: DanmakuTrack, record: Danmaku) -> DanmakuTrack:
    """Insert a record keeping time order (stable: new record goes last on ties)."""
    idx = len(track.danmaku)
    for i, d in enumerate(track.danmaku):
        if d.time_s > record.time_s:
            idx = i
            break
    new_list = track.danmaku[:idx] + (record,) + track.danmaku[idx:]
    return replace(track, danmaku=new_list)
