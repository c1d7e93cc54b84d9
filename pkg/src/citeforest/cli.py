"""Batch driver: ingest, validate, simplify, layer, export, stats, serve, curate.

Subcommands chain in one invocation and share a pipeline, e.g.::

    citeforest ingest corpus.csv simplify --selector tfidf \\
        levels --mode fixed --width 5 \\
        export --view simplified --format json --out view.json

Identical command lines on identical inputs produce byte-identical outputs;
the random selector therefore refuses to run without a seed.
"""

from __future__ import annotations

import json
import sys
from dataclasses import dataclass, field as dc_field
from pathlib import Path

import click

from .corpus import CorpusParseError, parse_csv, record_from_dict, validate_corpus
from .graph import CitationGraph, GraphBuildError, roots
from .layering import LevelAssignment, LayeringError
from .service import (
    DEFAULT_LEVEL_WIDTH,
    CitationService,
    ServiceError,
    Snapshot,
    build_levels,
    build_selector,
)
from .simplify import (
    CitationCategory,
    CurationError,
    ReferenceSuggestion,
    SelectionError,
    SimplifiedForest,
    simplify_graph,
)
from .store import EventLog, LogError, load_state
from .visual import export_view_dot, export_view_json, make_view


@dataclass
class Pipeline:
    log_path: Path | None = None
    service: CitationService | None = None
    forest: SimplifiedForest | None = None
    levels: LevelAssignment | None = None
    level_params: dict = dc_field(default_factory=dict)

    def require_service(self) -> CitationService:
        if self.service is None:
            raise click.UsageError("no corpus loaded; run 'ingest <csv>' first")
        return self.service

    def snapshot(self) -> Snapshot:
        return self.require_service().snapshot

    def effective_levels(self) -> LevelAssignment:
        if self.levels is not None:
            return self.levels
        return build_levels(self.snapshot(), "fixed", width=DEFAULT_LEVEL_WIDTH)


@click.group(chain=True)
@click.option("--log", "log_path", type=click.Path(path_type=Path), default=None,
              help="Curation event log (line-delimited JSON).")
@click.pass_context
def main(ctx: click.Context, log_path: Path | None) -> None:
    """Citation-graph engine: build, simplify, layer, export, and serve."""
    ctx.obj = Pipeline(log_path=log_path)


@main.command()
@click.argument("csv_path", type=click.Path(exists=True, path_type=Path))
@click.pass_obj
def ingest(pipeline: Pipeline, csv_path: Path) -> None:
    """Load a corpus CSV (and replay the event log, when given)."""
    try:
        state = load_state(csv_path, pipeline.log_path)
    except (LogError, GraphBuildError) as exc:
        raise click.ClickException(str(exc)) from exc
    log = None
    if pipeline.log_path is not None:
        log = EventLog(pipeline.log_path)
    pipeline.service = CitationService(records=state.records, cases=state.cases, log=log)
    report = validate_corpus(state.records)
    click.echo(
        f"loaded {len(state.records)} records, {state.graph.edge_count} citation edges, "
        f"{len(state.cases)} curation cases ({len(report.warnings)} warnings)"
    )


@main.command()
@click.argument("csv_path", type=click.Path(exists=True, path_type=Path))
@click.pass_obj
def validate(pipeline: Pipeline, csv_path: Path) -> None:
    """Validate a corpus CSV and print the report."""
    try:
        records = parse_csv(csv_path.read_text(encoding="utf-8"))
    except CorpusParseError as exc:
        raise click.ClickException(f"{csv_path}: {exc}") from exc
    report = validate_corpus(records)
    click.echo(report.summary())
    for issue in report.errors:
        click.echo(f"error [{issue.code}] record {issue.record_id}: {issue.message}")
    for issue in report.warnings:
        click.echo(f"warning [{issue.code}] record {issue.record_id}: {issue.message}")
    if not report.ok:
        raise SystemExit(1)


@main.command()
@click.option("--selector", type=click.Choice(["curated", "random", "tfidf"]), required=True)
@click.option("--seed", type=int, default=None, help="Required with --selector random.")
@click.pass_obj
def simplify(pipeline: Pipeline, selector: str, seed: int | None) -> None:
    """Reduce the graph to one main reference per citing paper."""
    snap = pipeline.snapshot()
    if selector == "random" and seed is None:
        raise click.UsageError("--selector random needs --seed N so runs are reproducible")
    try:
        chooser = build_selector(snap, selector, seed=seed)  # type: ignore[arg-type]
        pipeline.forest = simplify_graph(snap.graph, chooser)
    except (ServiceError, SelectionError) as exc:
        raise click.ClickException(str(exc)) from exc
    click.echo(f"simplified: {pipeline.forest.edge_count} main edges ({selector})")


@main.command()
@click.option("--mode", type=click.Choice(["fixed", "balanced"]), required=True)
@click.option("--width", type=int, default=None, help="Years per level (fixed mode).")
@click.option("--count", type=int, default=None, help="Number of levels (balanced mode).")
@click.pass_obj
def levels(pipeline: Pipeline, mode: str, width: int | None, count: int | None) -> None:
    """Assign chronological levels."""
    snap = pipeline.snapshot()
    if mode == "fixed" and count is not None:
        raise click.UsageError("--count applies to balanced mode only")
    if mode == "balanced" and width is not None:
        raise click.UsageError("--width applies to fixed mode only")
    if mode == "balanced" and count is None:
        raise click.UsageError("balanced mode needs --count K")
    try:
        pipeline.levels = build_levels(snap, mode, width=width, count=count)  # type: ignore[arg-type]
    except (ServiceError, LayeringError) as exc:
        raise click.ClickException(str(exc)) from exc
    pipeline.level_params = {"mode": mode, "width": width, "count": count}
    bands = ", ".join(f"{lo}-{hi}" for lo, hi in pipeline.levels.bounds)
    click.echo(f"{pipeline.levels.level_count} levels: {bands}")


@main.command()
@click.option("--view", "view_kind", type=click.Choice(["full", "simplified"]), required=True)
@click.option("--format", "fmt", type=click.Choice(["json", "dot"]), required=True)
@click.option("--out", type=click.Path(path_type=Path), default=None,
              help="Output file; stdout when omitted.")
@click.pass_obj
def export(pipeline: Pipeline, view_kind: str, fmt: str, out: Path | None) -> None:
    """Write a view document (JSON schema or Graphviz text)."""
    snap = pipeline.snapshot()
    if view_kind == "simplified" and pipeline.forest is None:
        raise click.UsageError("run 'simplify' before exporting the simplified view")
    assignment = pipeline.effective_levels()
    graph_view = make_view(
        list(snap.records), snap.graph, assignment, view_kind, forest=pipeline.forest  # type: ignore[arg-type]
    )
    text = (
        export_view_json(graph_view, assignment)
        if fmt == "json"
        else export_view_dot(graph_view, assignment)
    )
    if out is None:
        click.echo(text, nl=False)
    else:
        out.write_text(text, encoding="utf-8")
        click.echo(f"wrote {out}", err=True)


@main.command()
@click.pass_obj
def stats(pipeline: Pipeline) -> None:
    """Print node/edge/level/root counts."""
    service = pipeline.require_service()
    for key, value in service.stats().items():
        click.echo(f"{key}: {value}")


@main.command()
@click.option("--record-json", type=click.Path(path_type=Path, allow_dash=True), required=True,
              help="Paper record as JSON ('-' reads stdin).")
@click.option("--suggest", "suggest_specs", multiple=True, required=True,
              help="REF:RANK:CATEGORY, repeatable (1-3 times).")
@click.pass_obj
def submit(pipeline: Pipeline, record_json: Path, suggest_specs: tuple[str, ...]) -> None:
    """Submit a paper with the author's ranked main-reference suggestions."""
    service = pipeline.require_service()
    raw = sys.stdin.read() if str(record_json) == "-" else Path(record_json).read_text(encoding="utf-8")
    try:
        record = record_from_dict(json.loads(raw))
    except (json.JSONDecodeError, ValueError) as exc:
        raise click.ClickException(f"bad record JSON: {exc}") from exc
    suggestions = []
    for spec in suggest_specs:
        parts = spec.split(":")
        if len(parts) != 3:
            raise click.UsageError(f"--suggest expects REF:RANK:CATEGORY, got {spec!r}")
        try:
            suggestions.append(
                ReferenceSuggestion(
                    ref_id=int(parts[0]), rank=int(parts[1]), category=CitationCategory(parts[2])
                )
            )
        except ValueError as exc:
            raise click.UsageError(f"bad suggestion {spec!r}: {exc}") from exc
    try:
        case = service.submit_paper(record, suggestions)
    except (CurationError, ServiceError, LogError) as exc:
        raise click.ClickException(str(exc)) from exc
    click.echo(f"case opened for paper {case.paper_id} ({len(case.suggestions)} suggestions)")


@main.command()
@click.option("--paper", "paper_id", type=int, required=True)
@click.option("--reviewer", type=str, required=True)
@click.option("--choose", "chosen", type=int, required=True,
              help="The reference the reviewer deems most relevant.")
@click.pass_obj
def review(pipeline: Pipeline, paper_id: int, reviewer: str, chosen: int) -> None:
    """Record a designated researcher's review of a case."""
    service = pipeline.require_service()
    try:
        case = service.review_case(paper_id, reviewer=reviewer, chosen=chosen)
    except (CurationError, KeyError, LogError) as exc:
        raise click.ClickException(str(exc)) from exc
    click.echo(f"review recorded for paper {paper_id} ({len(case.reviews)} reviews)")


@main.command()
@click.option("--paper", "paper_id", type=int, required=True)
@click.pass_obj
def resolve(pipeline: Pipeline, paper_id: int) -> None:
    """Resolve a case to its final main reference."""
    service = pipeline.require_service()
    try:
        case = service.resolve(paper_id)
    except (CurationError, KeyError, LogError) as exc:
        raise click.ClickException(str(exc)) from exc
    click.echo(f"paper {paper_id} resolved: main reference {case.final_ref}")


@main.command()
@click.option("--port", type=int, default=8000)
@click.option("--host", type=str, default="127.0.0.1")
@click.option("--cors-origin", "cors_origins", multiple=True, default=("*",),
              help="Allowed UI origins.")
@click.pass_obj
def serve(pipeline: Pipeline, port: int, host: str, cors_origins: tuple[str, ...]) -> None:
    """Serve the HTTP API over the loaded corpus."""
    import uvicorn

    from .api import create_app

    service = pipeline.require_service()
    app = create_app(service, cors_origins=cors_origins)
    uvicorn.run(app, host=host, port=port)


if __name__ == "__main__":
    main()
