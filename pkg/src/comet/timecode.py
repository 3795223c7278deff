"""Timestamp parsing/formatting helpers.

Accepted input forms: ``H:MM:SS.ss``, ``HH:MM:SS``, ``M:SS``, ``MM:SS``,
each with an optional fractional-second part.
"""

from __future__ import annotations

import re

_TS_RE = re.compile(r"^(?:(\d{1,2}):)?(\d{1,2}):(\d{1,2}(?:\.\d+)?)$")


def parse_timestamp(text: str) -> float:
    """Convert a clock-style timestamp into seconds.

    Raises ValueError when the text is not a timestamp.
    """
    m = _TS_RE.match(text.strip())
    if not m:
        raise ValueError(f"bad timestamp: {text!r}")
    hours = int(m.group(1)) if m.group(1) else 0
    minutes = int(m.group(2))
    seconds = float(m.group(3))
    if minutes >= 60 or seconds >= 60:
        raise ValueError(f"bad timestamp: {text!r}")
    return hours * 3600 + minutes * 60 + seconds


def format_timestamp(seconds: float) -> str:
    """Render seconds as HH:MM:SS, keeping a 2-digit fraction when needed."""
    if seconds < 0:
        raise ValueError("negative timestamp")
    whole, hundredths = divmod(round(seconds * 100), 100)
    h, rem = divmod(whole, 3600)
    m, s = divmod(rem, 60)
    base = f"{h:02d}:{m:02d}:{s:02d}"
    if hundredths:
        base += f".{hundredths:02d}"
    return base
