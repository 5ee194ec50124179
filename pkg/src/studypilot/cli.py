"""Command-line twin of the HTTP API for desk-scale use."""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from .config import load_config
from .model import canonical_json
from .service import CoreApp


def _root(ctx: click.Context) -> click.Context:
    while ctx.parent is not None:
        ctx = ctx.parent
    return ctx


def _core(ctx: click.Context) -> CoreApp:
    root = _root(ctx)
    if root.obj is None:
        root.obj = CoreApp(load_config(root.params.get("config")))
    return root.obj


def _emit(doc) -> None:
    click.echo(canonical_json(doc), nl=False)


@click.group()
@click.option(
    "--config",
    type=click.Path(exists=True, dir_okay=False, path_type=Path),
    default=None,
    help="Path to the JSON config file.",
)
@click.pass_context
def main(ctx: click.Context, config: Path | None):
    """Personalized study scheduling and tutoring."""
    ctx.obj = None


@main.command()
@click.option("--host", default=None)
@click.option("--port", type=int, default=None)
@click.pass_context
def serve(ctx: click.Context, host: str | None, port: int | None):
    """Run the HTTP API."""
    import uvicorn

    from .service import create_app

    config = load_config(_root(ctx).params.get("config"))
    app = create_app(config)
    uvicorn.run(app, host=host or config.host, port=port or config.port, log_level="info")


@main.command()
@click.option("-o", "--output", type=click.Path(dir_okay=False), default=None)
@click.pass_context
def openapi(ctx: click.Context, output: str | None):
    """Print the HTTP API's OpenAPI document."""
    from .service import create_app

    config = load_config(_root(ctx).params.get("config"))
    text = canonical_json(create_app(config).openapi())
    if output:
        Path(output).write_text(text, encoding="utf-8")
    else:
        click.echo(text, nl=False)


@main.command()
@click.option("--topic", default=None)
@click.pass_context
def courses(ctx: click.Context, topic: str | None):
    """List course cards, optionally filtered by topic."""
    _emit(_core(ctx).courses(topic))


@main.command()
@click.argument("goal_text")
@click.option("-k", type=int, default=5, show_default=True)
@click.pass_context
def recommend(ctx: click.Context, goal_text: str, k: int):
    """Rank courses against a free-text learning goal."""
    _emit(_core(ctx).recommend(goal_text, k))


@main.command()
@click.pass_context
def topics(ctx: click.Context):
    """List catalog topics."""
    _emit(_core(ctx).topics())


@main.command()
@click.argument("course_id")
@click.pass_context
def syllabus(ctx: click.Context, course_id: str):
    """Print a course syllabus."""
    _emit(_core(ctx).syllabus_doc(course_id))


@main.group()
def plan():
    """Create, inspect, and edit plans."""


@plan.command("generate")
@click.argument("course_id")
@click.option("--time", "time_text", default=None, help="Time-availability answer.")
@click.option("--pace", "pace_text", default=None, help="Pace answer.")
@click.option("--path", "path_text", default=None, help="Content-preference answer.")
@click.option("--goals", "goals_text", default="", help="Goals answer.")
@click.option("--profile", "profile_file", type=click.Path(exists=True, dir_okay=False))
@click.option("--start-date", default=None, help="ISO start date override.")
@click.option("--use-llm", is_flag=True, default=False)
@click.pass_context
def plan_generate(
    ctx: click.Context,
    course_id: str,
    time_text: str | None,
    pace_text: str | None,
    path_text: str | None,
    goals_text: str,
    profile_file: str | None,
    start_date: str | None,
    use_llm: bool,
):
    """Generate and store a plan from dimension answers or a profile file."""
    profile_doc = None
    answers = None
    if profile_file:
        profile_doc = json.loads(Path(profile_file).read_text(encoding="utf-8"))
    else:
        answers = {
            "time": time_text or "",
            "pace": pace_text or "",
            "path": path_text or "",
            "goals": goals_text,
        }
    _emit(
        _core(ctx).create_plan(
            course_id,
            dimension_answers=answers,
            profile_doc=profile_doc,
            use_llm=use_llm,
            start_date=start_date,
        )
    )


@plan.command("show")
@click.argument("plan_id")
@click.pass_context
def plan_show(ctx: click.Context, plan_id: str):
    """Print a stored plan with its calendar events."""
    _emit(_core(ctx).plan_response(plan_id))


@plan.command("edit")
@click.argument("plan_id")
@click.argument("edits")
@click.pass_context
def plan_edit(ctx: click.Context, plan_id: str, edits: str):
    """Apply EDITS (a JSON list, or @file.json) to a plan's events."""
    if edits.startswith("@"):
        edits = Path(edits[1:]).read_text(encoding="utf-8")
    edit_docs = json.loads(edits)
    _emit(_core(ctx).edit_events(plan_id, edit_docs))


@plan.command("ical")
@click.argument("plan_id")
@click.option("-o", "--output", type=click.Path(dir_okay=False), default=None)
@click.pass_context
def plan_ical(ctx: click.Context, plan_id: str, output: str | None):
    """Export a plan's study sessions as iCalendar text."""
    text = _core(ctx).ical(plan_id)
    if output:
        Path(output).write_bytes(text.encode("utf-8"))
    else:
        sys.stdout.write(text)


@main.group()
def tutor():
    """Ask questions about covered material."""


@tutor.command("ask")
@click.argument("plan_id")
@click.argument("query")
@click.pass_context
def tutor_ask(ctx: click.Context, plan_id: str, query: str):
    """Ask a question; the answer cites transcript timestamps."""
    _emit(_core(ctx).ask(plan_id, query))


@main.command()
@click.argument("plan_id")
@click.argument("session_id")
@click.option("--current-lesson", default=None)
@click.pass_context
def progress(ctx: click.Context, plan_id: str, session_id: str, current_lesson: str | None):
    """Mark a session complete and advance the current lesson."""
    _emit(_core(ctx).progress(plan_id, session_id, current_lesson))


@main.command()
@click.option("--course", "course_id", default=None)
@click.option("--lesson", "lesson_id", default=None)
@click.option("--file", "file_path", type=click.Path(exists=True, dir_okay=False), default=None)
@click.option("--video-id", default=None)
@click.option("--format", "fmt", default=None, type=click.Choice(["vtt", "srt", "json"]))
@click.pass_context
def ingest(
    ctx: click.Context,
    course_id: str | None,
    lesson_id: str | None,
    file_path: str | None,
    video_id: str | None,
    fmt: str | None,
):
    """Ingest transcripts and rebuild the course search index."""
    core = _core(ctx)
    if course_id:
        _emit(core.ingest_course(course_id))
        return
    if not lesson_id:
        raise click.UsageError("pass --course or --lesson")
    content = None
    if file_path:
        content = Path(file_path).read_text(encoding="utf-8")
    _emit(core.ingest(lesson_id, content=content, video_id=video_id, fmt=fmt, filename=file_path))


if __name__ == "__main__":
    main()
