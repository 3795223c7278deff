"""comet: danmaku generation engine and serving platform for educational videos."""

__version__ = "0.1.0"
