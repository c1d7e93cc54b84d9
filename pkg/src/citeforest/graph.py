"""Full citation DAG over a validated corpus.

Edges run citing -> cited, so every edge points at a record of equal or
older year. Dangling refs are dropped here; everything else about the
corpus must already be clean (see :func:`citeforest.corpus.validate_corpus`).
"""

from __future__ import annotations

from dataclasses import dataclass

from .corpus import PaperRecord, validate_corpus


class GraphBuildError(ValueError):
    pass


class CycleError(GraphBuildError):
    """Raised when same-year records form a citation cycle."""

    def __init__(self, witness: list[int]) -> None:
        self.witness = witness
        super().__init__("citation cycle: " + " -> ".join(str(n) for n in witness + witness[:1]))


@dataclass(frozen=True)
class CitationGraph:
    nodes: frozenset[int]
    edges: frozenset[tuple[int, int]]
    out_adj: dict[int, tuple[int, ...]]  # citing -> cited, ascending
    in_adj: dict[int, tuple[int, ...]]   # cited -> citing, ascending
    year_of: dict[int, int]

    @property
    def node_count(self) -> int:
        return len(self.nodes)

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    def out_refs(self, node_id: int) -> tuple[int, ...]:
        """In-corpus references of ``node_id``, ascending."""
        if node_id not in self.nodes:
            raise KeyError(f"unknown node {node_id}")
        return self.out_adj.get(node_id, ())


def build_full_graph(records: list[PaperRecord]) -> CitationGraph:
    """Build the citation DAG: one node per record, one edge per in-corpus ref.

    Rejects corpora whose validation report has errors, and corpora where
    same-year records cite each other in a cycle (cross-year cycles are
    impossible because edges never point at younger records).
    """
    report = validate_corpus(records)
    if not report.ok:
        details = "; ".join(f"[{e.code}] record {e.record_id}: {e.message}" for e in report.errors)
        raise GraphBuildError(f"corpus has validation errors: {details}")

    ids = {r.id for r in records}
    out_adj: dict[int, tuple[int, ...]] = {}
    in_lists: dict[int, list[int]] = {r.id: [] for r in records}
    edges: set[tuple[int, int]] = set()
    for r in records:
        kept = tuple(sorted(ref for ref in r.refs if ref in ids))
        out_adj[r.id] = kept
        for ref in kept:
            edges.add((r.id, ref))
            in_lists[ref].append(r.id)

    graph = CitationGraph(
        nodes=frozenset(ids),
        edges=frozenset(edges),
        out_adj=out_adj,
        in_adj={k: tuple(sorted(v)) for k, v in in_lists.items()},
        year_of={r.id: r.year for r in records},
    )
    witness = check_acyclic(graph)
    if witness is not None:
        raise CycleError(witness)
    return graph


def in_degree(graph: CitationGraph, node_id: int) -> int:
    """Number of records citing ``node_id``."""
    if node_id not in graph.nodes:
        raise KeyError(f"unknown node {node_id}")
    return len(graph.in_adj.get(node_id, ()))


def check_acyclic(graph: CitationGraph) -> list[int] | None:
    """Return None if the graph is acyclic, else one witness cycle.

    The witness is the node sequence of the cycle without repeating the
    first node, e.g. ``[a, b]`` for a <-> b.
    """
    WHITE, GRAY, BLACK = 0, 1, 2
    color = {n: WHITE for n in graph.nodes}
    # Iterative DFS with an explicit stack so deep chains cannot overflow.
    for start in sorted(graph.nodes):
        if color[start] != WHITE:
            continue
        stack: list[tuple[int, int]] = [(start, 0)]
        path: list[int] = []
        color[start] = GRAY
        path.append(start)
        while stack:
            node, idx = stack[-1]
            succs = graph.out_adj.get(node, ())
            if idx < len(succs):
                stack[-1] = (node, idx + 1)
                nxt = succs[idx]
                if color[nxt] == GRAY:
                    return path[path.index(nxt):]
                if color[nxt] == WHITE:
                    color[nxt] = GRAY
                    path.append(nxt)
                    stack.append((nxt, 0))
            else:
                color[node] = BLACK
                path.pop()
                stack.pop()
    return None


def roots(graph: CitationGraph) -> set[int]:
    """Nodes with no in-corpus references (out-degree 0)."""
    return {n for n in graph.nodes if not graph.out_adj.get(n)}


def weak_components(graph: CitationGraph) -> list[set[int]]:
    """Weakly connected components (edge direction ignored), each a node set.

    Components are ordered by their smallest member for determinism.
    """
    neighbours: dict[int, set[int]] = {n: set() for n in graph.nodes}
    for u, v in graph.edges:
        neighbours[u].add(v)
        neighbours[v].add(u)
    seen: set[int] = set()
    components: list[set[int]] = []
    for start in sorted(graph.nodes):
        if start in seen:
            continue
        comp = {start}
        frontier = [start]
        while frontier:
            node = frontier.pop()
            for other in neighbours[node]:
                if other not in comp:
                    comp.add(other)
                    frontier.append(other)
        seen |= comp
        components.append(comp)
    return components
