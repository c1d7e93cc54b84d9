"""Search and path operations over the corpus and the simplified forest."""

from __future__ import annotations

from .corpus import PaperRecord
from .simplify import SimplifiedForest

SEARCH_FIELDS = ("doi", "title", "author")


def find_by_doi(corpus: list[PaperRecord], doi: str) -> PaperRecord | None:
    """Case-insensitive exact DOI lookup; None when absent."""
    needle = doi.lower()
    for r in corpus:
        if r.doi.lower() == needle:
            return r
    return None


def search(corpus: list[PaperRecord], field: str, needle: str) -> list[PaperRecord]:
    """Case-insensitive substring match on doi, title, or any author name.

    Results are ordered by (year, id) ascending.
    """
    if field not in SEARCH_FIELDS:
        raise ValueError(f"field must be one of {SEARCH_FIELDS}, got {field!r}")
    if not needle:
        raise ValueError("search needle must be nonempty")
    low = needle.lower()
    if field == "doi":
        hits = [r for r in corpus if low in r.doi.lower()]
    elif field == "title":
        hits = [r for r in corpus if low in r.title.lower()]
    else:
        hits = [r for r in corpus if any(low in a.lower() for a in r.authors)]
    return sorted(hits, key=lambda r: (r.year, r.id))


def main_path(forest: SimplifiedForest, start: int) -> list[int]:
    """Follow main references from ``start`` down to a reference-less root."""
    if start not in forest.nodes:
        raise KeyError(f"unknown node {start}")
    path = [start]
    node = start
    while node in forest.main_edge:
        node = forest.main_edge[node]
        path.append(node)
        if len(path) > len(forest.nodes):
            raise RuntimeError("main-edge cycle detected")  # forest invariant broken
    return path


def descendants(forest: SimplifiedForest, root: int) -> set[int]:
    """All nodes whose main path passes through ``root`` (root included)."""
    if root not in forest.nodes:
        raise KeyError(f"unknown node {root}")
    children: dict[int, list[int]] = {}
    for citing, cited in forest.main_edge.items():
        children.setdefault(cited, []).append(citing)
    result = {root}
    frontier = [root]
    while frontier:
        node = frontier.pop()
        for child in children.get(node, ()):
            if child not in result:
                result.add(child)
                frontier.append(child)
    return result
