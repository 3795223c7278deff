"""Virtual viewers: the six personas whose voices drive danmaku style."""

from __future__ import annotations

import json
from dataclasses import dataclass

from .errors import MalformedJson, MissingField, WrongCount

PERSONA_FIELDS = (
    "age",
    "region",
    "personality",
    "danmaku_sending_style",
    "learning_habits",
    "reasons_for_watching",
)

PERSONA_COUNT = 6


@dataclass(frozen=True)
class Persona:
    label: str
    age: int
    region: str
    personality: str
    danmaku_sending_style: str
    learning_habits: str
    reasons_for_watching: str

    def __post_init__(self):
        if not (len(self.label) == 1 and "A" <= self.label <= "Z"):
            raise ValueError(f"bad persona label {self.label!r}")
        if not 10 <= self.age <= 100:
            raise ValueError(f"persona {self.label}: age {self.age} out of [10, 100]")
        for name in PERSONA_FIELDS[1:]:
            if not str(getattr(self, name)).strip():
                raise MissingField(self.label, name)


@dataclass(frozen=True)
class PersonaSet:
    personas: tuple[Persona, ...]
    video_id: str = ""

    def __post_init__(self):
        labels = [p.label for p in self.personas]
        if len(set(labels)) != len(labels):
            raise ValueError("duplicate persona labels")
        if len(self.personas) != PERSONA_COUNT:
            raise WrongCount(len(self.personas))
        expected = [chr(ord("A") + i) for i in range(PERSONA_COUNT)]
        if sorted(labels) != expected:
            raise ValueError(f"labels must be A..F, got {sorted(labels)}")

    def by_label(self, label: str) -> Persona | None:
        for p in self.personas:
            if p.label == label:
                return p
        return None

    @property
    def labels(self) -> list[str]:
        return [p.label for p in self.personas]


PERSONA_PROMPT_TEMPLATE = (
    '- Your task is to create {n} distinct personas with different backgrounds '
    'and personalities. They are interested in watching the online educational '
    'video "{title}". Each persona should have the habit of sending danmaku '
    'while watching the video. Use "A", "B", "C", "D", etc., as persona labels.\n'
    "- For each persona, please provide the following details in JSON format, "
    "including age, region, personality, danmaku sending style, learning "
    "habits, and reasons for watching the video.\n"
)


def build_persona_prompt(title: str, n: int = PERSONA_COUNT) -> str:
    if not title.strip():
        raise ValueError("title must be non-empty")
    return PERSONA_PROMPT_TEMPLATE.format(title=title, n=n)


def _normalize_key(key: str) -> str:
    return key.strip().lower().replace(" ", "_").replace("-", "_")


def parse_personas(json_text: str, video_id: str = "",
                   expected_count: int = PERSONA_COUNT) -> PersonaSet:
    """Parse the object-of-objects persona layout.

    Field keys are matched with spaces or underscores interchangeably.
    """
    try:
        data = json.loads(json_text)
    except json.JSONDecodeError as e:
        raise MalformedJson(str(e)) from e
    if not isinstance(data, dict):
        raise MalformedJson("top level must be an object keyed by label")
    if len(data) != expected_count:
        raise WrongCount(len(data), expected_count)
    personas = []
    for label in sorted(data):
        body = data[label]
        if not isinstance(body, dict):
            raise MalformedJson(f"persona {label!r} must be an object")
        fields = {_normalize_key(k): v for k, v in body.items()}
        kwargs = {}
        for name in PERSONA_FIELDS:
            if name not in fields:
                raise MissingField(label, name)
            kwargs[name] = fields[name]
        try:
            kwargs["age"] = int(kwargs["age"])
        except (TypeError, ValueError):
            raise MissingField(label, "age")
        personas.append(Persona(label=label.strip(), **kwargs))
    return PersonaSet(personas=tuple(personas), video_id=video_id)


def render_personas(personas: PersonaSet) -> str:
    """Serialize to the canonical object-of-objects JSON layout."""
    data = {
        p.label: {
            "age": p.age,
            "region": p.region,
            "personality": p.personality,
            "danmaku_sending_style": p.danmaku_sending_style,
            "learning_habits": p.learning_habits,
            "reasons_for_watching": p.reasons_for_watching,
        }
        for p in sorted(personas.personas, key=lambda p: p.label)
    }
    return json.dumps(data, ensure_ascii=False, indent=2) + "\n"


DEFAULT_PERSONAS = PersonaSet(personas=(
    Persona("A", 22, "North America", "extroverted, curious",
            "shares thoughts, sends emojis", "discusses with others, takes notes",
            "personal interest"),
    Persona("B", 35, "Europe", "introverted, analytical",
            "asks questions, shares insights", "takes notes, asks questions",
            "career goals"),
    Persona("C", 19, "East Asia", "playful, energetic",
            "sends short reactions and emojis", "rewatches key sections",
            "academic requirements"),
    Persona("D", 27, "South America", "easygoing, humorous",
            "jokes, shares quick takes", "learns by example, skims ahead",
            "personal interest"),
    Persona("E", 31, "Africa", "supportive, patient",
            "encourages others, answers questions", "pauses to reflect, summarizes",
            "teaching preparation"),
    Persona("F", 24, "South Asia", "diligent, detail-oriented",
            "highlights key terms, asks follow-ups", "takes structured notes",
            "exam preparation"),
))
