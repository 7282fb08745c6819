"""Command line entry points: offline pipeline runs, dataset work, serving."""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from .chart.model import ChartSpec, initial_state, load_chart_spec, spec_to_json
from .chart.svg import render_svg
from .errors import ChartQueryError
from .manip import apply_all, plan as plan_task, plan_to_json
from .taskir import serialize_task, task_to_json
from .translate import translate_query


def _load_spec(source: str) -> ChartSpec:
    """A chart document path, or the name of a bundled demo chart."""
    path = Path(source)
    if path.exists():
        return load_chart_spec(json.loads(path.read_text()))
    if source in ("covid", "energy"):
        from . import demo

        return getattr(demo, f"{source}_spec")()
    raise click.ClickException(
        f"{source!r} is neither a file nor a bundled demo chart (covid, energy)"
    )


def _fail(exc: ChartQueryError, stage: str) -> "click.ClickException":
    return click.ClickException(f"{stage}: {type(exc).__name__}: {exc}")


@click.group()
def main() -> None:
    """Ask questions about charts; the chart itself answers."""


@main.command()
@click.argument("spec_source")
@click.argument("query")
@click.option("--backend", default="rules", show_default=True)
@click.option("--tree", is_flag=True, help="print the task as JSON instead of text")
def translate(spec_source: str, query: str, backend: str, tree: bool) -> None:
    """Parse QUERY against a chart and print the structured task."""
    spec = _load_spec(spec_source)
    try:
        result = translate_query(query, spec, backend=backend)
    except ChartQueryError as exc:
        raise _fail(exc, "translate")
    if tree:
        click.echo(json.dumps(task_to_json(result.task), indent=2))
    else:
        click.echo(serialize_task(result.task))


@main.command(name="plan")
@click.argument("spec_source")
@click.argument("query")
@click.option("--backend", default="rules", show_default=True)
def plan_cmd(spec_source: str, query: str, backend: str) -> None:
    """Print the ordered manipulation steps for QUERY as JSON."""
    spec = _load_spec(spec_source)
    state = initial_state(spec)
    try:
        result = translate_query(query, spec, backend=backend)
    except ChartQueryError as exc:
        raise _fail(exc, "translate")
    try:
        steps = plan_task(result.task, state)
    except ChartQueryError as exc:
        raise _fail(exc, "plan")
    click.echo(
        json.dumps(
            {"task": serialize_task(result.task), "plan": plan_to_json(steps)},
            indent=2,
        )
    )


@main.command()
@click.argument("spec_source")
@click.argument("query")
@click.option(
    "--out",
    "-o",
    type=click.Path(file_okay=False, path_type=Path),
    default="frames",
    show_default=True,
)
@click.option("--backend", default="rules", show_default=True)
def render(spec_source: str, query: str, out: Path, backend: str) -> None:
    """Run the full pipeline and write one SVG file per keyframe."""
    spec = _load_spec(spec_source)
    state = initial_state(spec)
    try:
        result = translate_query(query, spec, backend=backend)
    except ChartQueryError as exc:
        raise _fail(exc, "translate")
    try:
        steps = plan_task(result.task, state)
        frames = apply_all(steps, state)
    except ChartQueryError as exc:
        raise _fail(exc, "plan")
    out.mkdir(parents=True, exist_ok=True)
    for frame in frames:
        (out / f"frame-{frame.index:03d}.svg").write_text(frame.svg)
    (out / "plan.json").write_text(
        json.dumps(
            {"task": serialize_task(result.task), "plan": plan_to_json(steps)},
            indent=2,
        )
    )
    click.echo(f"wrote {len(frames)} keyframes to {out}/")


@main.command(name="gen-dataset")
@click.option("-n", "--count", default=5867, show_default=True)
@click.option("--seed", default=7, show_default=True)
@click.option(
    "--out",
    "-o",
    type=click.Path(dir_okay=False, path_type=Path),
    default="dataset.jsonl",
    show_default=True,
)
@click.option("--stats", is_flag=True, help="print corpus statistics as JSON")
def gen_dataset(count: int, seed: int, out: Path, stats: bool) -> None:
    """Generate the query-to-task training corpus as JSON lines."""
    from .datagen import generate_dataset
    from .datagen.generate import dataset_stats, write_jsonl

    records = generate_dataset(n=count, seed=seed)
    write_jsonl(records, str(out))
    click.echo(f"wrote {len(records)} records to {out}")
    if stats:
        click.echo(json.dumps(dataset_stats(records), indent=2))


@main.command(name="evaluate")
@click.option(
    "--dataset",
    type=click.Path(exists=True, dir_okay=False, path_type=Path),
    required=True,
)
@click.option("--backend", default="rules", show_default=True)
@click.option(
    "--report",
    "report_format",
    type=click.Choice(["markdown", "json"]),
    default="markdown",
    show_default=True,
)
@click.option(
    "--seed",
    default=7,
    show_default=True,
    help="chart-context seed the dataset was generated with",
)
@click.option("--out", "-o", type=click.Path(dir_okay=False, path_type=Path))
def evaluate_cmd(
    dataset: Path, backend: str, report_format: str, seed: int, out: Path | None
) -> None:
    """Score a translation backend against a generated dataset."""
    from .datagen.generate import build_context_map, read_jsonl
    from .evaluation import evaluate, report_markdown, report_to_json, rules_backend

    records = read_jsonl(str(dataset))
    specs = {cid: ctx.spec for cid, ctx in build_context_map(seed=seed).items()}
    if backend == "rules":
        runner = rules_backend()
    else:

        def runner(query: str, spec: ChartSpec) -> str:
            return serialize_task(
                translate_query(query, spec, backend=backend).task
            )

    report = evaluate(records, runner, specs)
    text = (
        report_markdown(report)
        if report_format == "markdown"
        else json.dumps(report_to_json(report), indent=2)
    )
    if out is not None:
        out.write_text(text + "\n")
        click.echo(f"wrote report to {out}")
    else:
        click.echo(text)


@main.command(name="demo-spec")
@click.argument("name", type=click.Choice(["covid", "energy"]))
def demo_spec(name: str) -> None:
    """Print a bundled demo chart document, ready to upload."""
    click.echo(json.dumps(spec_to_json(_load_spec(name)), indent=2))


@main.command()
@click.argument("spec_source")
def show(spec_source: str) -> None:
    """Render a chart's initial view as SVG on stdout."""
    spec = _load_spec(spec_source)
    sys.stdout.write(render_svg(initial_state(spec)))


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8000, show_default=True)
@click.option("--capacity", default=64, show_default=True, help="max live sessions")
@click.option(
    "--snapshot",
    type=click.Path(dir_okay=False, path_type=Path),
    help="JSON file for session persistence across restarts",
)
@click.option("--backend", default="rules", show_default=True)
def serve(
    host: str, port: int, capacity: int, snapshot: Path | None, backend: str
) -> None:
    """Run the HTTP service."""
    import uvicorn

    from .service import create_app

    app = create_app(capacity=capacity, snapshot_path=snapshot, backend=backend)
    uvicorn.run(app, host=host, port=port)


if __name__ == "__main__":
    main()
