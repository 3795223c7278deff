"""Exception types shared across the engine."""


class CometError(Exception):
    """Base class for all engine errors."""


# --- video / segmentation ---

class EmptyManifest(CometError):
    """Manifest has no usable duration."""


class MalformedHints(CometError):
    """Scene hints overlap or are otherwise unusable."""


class ZeroLengthClip(CometError):
    pass


class NoScenesFound(CometError):
    """Warning-level: a clip-description response contained no scene blocks."""


# --- personas ---

class PersonaError(CometError):
    pass


class WrongCount(PersonaError):
    def __init__(self, got: int, expected: int = 6):
        super().__init__(f"expected {expected} personas, got {got}")
        self.got = got
        self.expected = expected


class MissingField(PersonaError):
    def __init__(self, label: str, field: str):
        super().__init__(f"persona {label!r} is missing {field!r}")
        self.label = label
        self.field = field


class MalformedJson(PersonaError):
    pass


# --- track parsing ---

class NoItemsParsed(CometError):
    """The generation response contained no danmaku lines at all."""


# --- LMM client ---

class LmmError(CometError):
    pass


class Timeout(LmmError):
    pass


class RateLimited(LmmError):
    def __init__(self, retry_after_s: float | None = None):
        super().__init__(f"rate limited (retry after {retry_after_s}s)")
        self.retry_after_s = retry_after_s


class Malformed(LmmError):
    """Wire response did not match the chat-completion shape."""


class AuthFailure(LmmError):
    pass


# --- store ---

class NotFound(CometError):
    pass


class Corrupt(CometError):
    """An on-disk artifact failed its invariants on load."""


class MalformedXml(CometError):
    pass


# --- pipeline / service ---

class JobFailed(CometError):
    def __init__(self, message: str, report=None):
        super().__init__(message)
        self.report = report


class VideoNotFound(CometError):
    pass


class InvalidTime(CometError):
    pass


class EmptyText(CometError):
    pass


class SessionExpired(CometError):
    pass
