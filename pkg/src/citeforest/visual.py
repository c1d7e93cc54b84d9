"""Per-node visual attributes and renderer-neutral view exports.

Encodings: circle size grows with in-degree (sub-linear, so heavily cited
hubs do not dominate the canvas), border width grows with author count,
and every band of years gets one colour from an evenly spaced hue wheel.

    node_size    = 10 + 6 * sqrt(in_degree)
    border_width = 1 + (author_count - 1)

Both are rounded to 2 decimals.
"""

from __future__ import annotations

import colorsys
import json
from dataclasses import dataclass
from math import sqrt
from typing import Iterable, Literal, Mapping

from .corpus import PaperRecord
from .graph import CitationGraph, in_degree
from .layering import LevelAssignment
from .simplify import SimplifiedForest

SIZE_BASE = 10.0
SIZE_SCALE = 6.0
BORDER_BASE = 1.0
BORDER_SCALE = 1.0


class VisualError(ValueError):
    pass


@dataclass(frozen=True)
class VisualAttributes:
    node_size: float
    border_width: float
    color: int  # level colour index
    level: int


@dataclass(frozen=True)
class ViewNode:
    record: PaperRecord
    attrs: VisualAttributes


@dataclass(frozen=True)
class GraphView:
    view_kind: Literal["full", "simplified"]
    nodes: tuple[ViewNode, ...]  # ascending id
    edges: tuple[tuple[int, int], ...]  # ascending (from, to)


def level_palette(count: int) -> list[str]:
    """One hex colour per level: hues evenly spaced, fixed pastel sat/value."""
    colors = []
    for k in range(count):
        r, g, b = colorsys.hsv_to_rgb(k / max(count, 1), 0.45, 0.93)
        colors.append(f"#{round(r * 255):02x}{round(g * 255):02x}{round(b * 255):02x}")
    return colors


def compute_visual_attrs(
    node_ids: Iterable[int],
    in_degrees: Mapping[int, int],
    author_counts: Mapping[int, int],
    levels: Mapping[int, int],
) -> dict[int, VisualAttributes]:
    attrs: dict[int, VisualAttributes] = {}
    for node_id in node_ids:
        for name, mapping in (("in-degree", in_degrees), ("author-count", author_counts), ("level", levels)):
            if node_id not in mapping:
                raise VisualError(f"node {node_id} missing from the {name} map")
        level = levels[node_id]
        attrs[node_id] = VisualAttributes(
            node_size=round(SIZE_BASE + SIZE_SCALE * sqrt(in_degrees[node_id]), 2),
            border_width=round(BORDER_BASE + BORDER_SCALE * (author_counts[node_id] - 1), 2),
            color=level,
            level=level,
        )
    return attrs


def _view_in_degrees(
    graph: CitationGraph, forest: SimplifiedForest | None, kind: str, basis: str
) -> dict[int, int]:
    if basis == "full" or kind == "full":
        return {n: in_degree(graph, n) for n in graph.nodes}
    assert forest is not None
    degrees = {n: 0 for n in forest.nodes}
    for cited in forest.main_edge.values():
        degrees[cited] += 1
    return degrees


def make_view(
    records: list[PaperRecord],
    graph: CitationGraph,
    levels: LevelAssignment,
    kind: Literal["full", "simplified"],
    forest: SimplifiedForest | None = None,
    degree_basis: Literal["view", "full"] = "view",
) -> GraphView:
    """Assemble a view: metadata plus visual attributes per node, plus edges.

    ``degree_basis`` controls which edge set drives circle sizes; the default
    sizes each view by its own edges.
    """
    if kind == "simplified" and forest is None:
        raise VisualError("a simplified view needs the simplified forest")
    by_id = {r.id: r for r in records}
    degrees = _view_in_degrees(graph, forest, kind, degree_basis)
    author_counts = {r.id: len(r.authors) for r in records}
    attrs = compute_visual_attrs(sorted(graph.nodes), degrees, author_counts, levels.level_of)
    nodes = tuple(ViewNode(record=by_id[n], attrs=attrs[n]) for n in sorted(graph.nodes))
    if kind == "full":
        edges = tuple(sorted(graph.edges))
    else:
        assert forest is not None
        edges = tuple(forest.edges())
    return GraphView(view_kind=kind, nodes=nodes, edges=edges)


def view_document(view: GraphView, levels: LevelAssignment) -> dict:
    """The export schema as a dict with stable key order."""
    palette = level_palette(levels.level_count)
    return {
        "view_kind": view.view_kind,
        "levels": [
            {"index": i, "lo": lo, "hi": hi, "color": palette[i]}
            for i, (lo, hi) in enumerate(levels.bounds)
        ],
        "nodes": [
            {
                "id": vn.record.id,
                "doi": vn.record.doi,
                "title": vn.record.title,
                "authors": list(vn.record.authors),
                "year": vn.record.year,
                "level": vn.attrs.level,
                "size": vn.attrs.node_size,
                "border": vn.attrs.border_width,
                "url": vn.record.url,
            }
            for vn in view.nodes
        ],
        "edges": [{"from": u, "to": v} for u, v in view.edges],
    }


def export_view_json(view: GraphView, levels: LevelAssignment) -> str:
    """Deterministic JSON text: identical input, byte-identical output."""
    return json.dumps(view_document(view, levels), indent=2, ensure_ascii=False) + "\n"


def _dot_escape(text: str) -> str:
    return text.replace("\\", "\\\\").replace('"', '\\"')


def export_view_dot(view: GraphView, levels: LevelAssignment) -> str:
    """Graphviz text with one rank group per level, nodes labelled by title.

    rankdir=BT keeps the oldest band at the top when edges point from newer
    papers to the older works they cite.
    """
    lines = [f"digraph citations_{view.view_kind} {{", "  rankdir=BT;", "  node [shape=circle];"]
    per_level: dict[int, list[ViewNode]] = {}
    for vn in view.nodes:
        per_level.setdefault(vn.attrs.level, []).append(vn)
    for index in range(levels.level_count):
        members = per_level.get(index, [])
        if not members:
            continue
        lo, hi = levels.bounds[index]
        lines.append(f"  subgraph level_{index} {{")
        lines.append(f'    rank=same; // years {lo}-{hi}')
        for vn in members:
            lines.append(f'    n{vn.record.id} [label="{_dot_escape(vn.record.title)}"];')
        lines.append("  }")
    for u, v in view.edges:
        lines.append(f"  n{u} -> n{v};")
    lines.append("}")
    return "\n".join(lines) + "\n"
