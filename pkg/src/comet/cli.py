"""Command-line entry points.

Exit codes: 0 clean, 2 when violations remain, 1 on failure.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from .errors import CometError
from .llm import HttpBackend, MockBackend
from .pipeline import run_job
from .prompting import GenerationConfig
from .store import Catalog, export_interop_xml, import_interop_xml
from .track import render_track, track_from_json, track_to_json, parse_track
from .persona import DEFAULT_PERSONAS
from .validator import track_stats, validate
from .video import manifest_from_json


@click.group()
def main():
    """Danmaku generation engine for educational videos."""


def _load_config(path: str | None) -> GenerationConfig:
    if not path:
        return GenerationConfig()
    return GenerationConfig.from_dict(json.loads(Path(path).read_text()))


@main.command()
@click.option("--manifest", "manifest_path", required=True, type=click.Path(exists=True))
@click.option("--config", "config_path", type=click.Path(exists=True))
@click.option("--backend", "backend_kind", type=click.Choice(["mock", "http"]),
              default="mock")
@click.option("--seed", type=int, default=0)
@click.option("--out-dir", "out_dir", type=click.Path(), default="comet-out")
def generate(manifest_path, config_path, backend_kind, seed, out_dir):
    """Generate a danmaku track for a video manifest."""
    try:
        manifest = manifest_from_json(Path(manifest_path).read_text(encoding="utf-8"))
        config = _load_config(config_path)
        backend = HttpBackend() if backend_kind == "http" else MockBackend(seed=seed)
        catalog = Catalog(out_dir)
        track, report, assignments = run_job(
            manifest, config, backend=backend, catalog=catalog, seed=seed)
    except (CometError, ValueError, OSError) as e:
        click.echo(f"error: {e}", err=True)
        sys.exit(1)
    click.echo(f"track: {len(track.danmaku)} danmaku, "
               f"{len(assignments)} scheduled, "
               f"{len(report.violations)} violations")
    sys.exit(0 if report.clean else 2)


@main.command("validate")
@click.option("--track", "track_path", required=True, type=click.Path(exists=True))
@click.option("--duration", required=True, type=float)
@click.option("--config", "config_path", type=click.Path(exists=True))
def validate_cmd(track_path, duration, config_path):
    """Validate an existing track file."""
    try:
        track = track_from_json(Path(track_path).read_text(encoding="utf-8"))
        config = _load_config(config_path)
        report = validate(track, duration, config)
    except (CometError, ValueError, OSError) as e:
        click.echo(f"error: {e}", err=True)
        sys.exit(1)
    click.echo(report.to_json(), nl=False)
    sys.exit(0 if report.clean else 2)


@main.command()
@click.option("--in", "in_path", required=True, type=click.Path(exists=True))
@click.option("--to", "target", required=True,
              type=click.Choice(["json", "xml", "markdown"]))
@click.option("--duration", type=float, default=0.0,
              help="Required when importing XML.")
@click.option("--video-id", default="imported")
def convert(in_path, target, duration, video_id):
    """Convert a track between JSON, interop XML and the Markdown grammar."""
    try:
        raw = Path(in_path).read_bytes()
        if raw.lstrip().startswith(b"<"):
            track = import_interop_xml(raw, video_id, duration or 1e12)
        elif raw.lstrip().startswith(b"{"):
            track = track_from_json(raw.decode("utf-8"))
        else:
            track, _ = parse_track(raw.decode("utf-8"), DEFAULT_PERSONAS,
                                   duration or 1e12)
        if target == "json":
            sys.stdout.write(track_to_json(track))
        elif target == "xml":
            sys.stdout.buffer.write(export_interop_xml(track) + b"\n")
        else:
            sys.stdout.write(render_track(track))
    except (CometError, ValueError, OSError) as e:
        click.echo(f"error: {e}", err=True)
        sys.exit(1)


@main.command()
@click.option("--track", "track_path", required=True, type=click.Path(exists=True))
@click.option("--duration", type=float, default=0.0)
def stats(track_path, duration):
    """Print distribution statistics for a track."""
    try:
        track = track_from_json(Path(track_path).read_text(encoding="utf-8"))
        if not duration:
            duration = max((d.time_s for d in track.danmaku), default=0.0)
        s = track_stats(track, duration)
    except (CometError, ValueError, OSError) as e:
        click.echo(f"error: {e}", err=True)
        sys.exit(1)
    click.echo(json.dumps({
        "total": s.total,
        "per_type": s.per_type,
        "content_fraction": s.content_fraction,
        "mean_len_units": s.mean_len_units,
        "rate_per_min": s.rate_per_min,
    }, indent=2))


@main.command()
@click.option("--catalog", "catalog_dir", default="comet-out", type=click.Path())
@click.option("--bind", default=None, help="host:port, default from COMET_BIND_ADDR")
def serve(catalog_dir, bind):
    """Serve the catalog and playback API over HTTP."""
    import os
    import uvicorn
    from .service import create_app

    addr = bind or os.environ.get("COMET_BIND_ADDR", "127.0.0.1:8000")
    host, _, port = addr.partition(":")
    app = create_app(Catalog(catalog_dir))
    uvicorn.run(app, host=host or "127.0.0.1", port=int(port or 8000))
