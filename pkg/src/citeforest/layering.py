"""Chronological levels: band papers into year intervals, oldest band first.

Two strategies: fixed-width intervals anchored at the minimum year, and a
count-balanced partition that minimises the fullest band.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass

from .corpus import PaperRecord
from .graph import CitationGraph


class LayeringError(ValueError):
    pass


@dataclass(frozen=True)
class LevelAssignment:
    """Level 0 is the oldest band; ``bounds[k]`` is the inclusive year range of level k."""

    level_of: dict[int, int]
    bounds: tuple[tuple[int, int], ...]

    @property
    def level_count(self) -> int:
        return len(self.bounds)


def assign_levels_fixed(records: list[PaperRecord], width_years: int) -> LevelAssignment:
    """Band level k covers years [min_year + k*width, min_year + (k+1)*width - 1].

    Bands with no papers in the middle of the span are kept so the ranges
    stay contiguous; nothing extends past the band holding the newest paper.
    """
    if not records:
        raise LayeringError("empty corpus")
    if width_years < 1:
        raise LayeringError(f"width must be >= 1, got {width_years}")
    min_year = min(r.year for r in records)
    max_year = max(r.year for r in records)
    count = (max_year - min_year) // width_years + 1
    bounds = tuple(
        (min_year + k * width_years, min_year + (k + 1) * width_years - 1) for k in range(count)
    )
    level_of = {r.id: (r.year - min_year) // width_years for r in records}
    return LevelAssignment(level_of=level_of, bounds=bounds)


def assign_levels_balanced(records: list[PaperRecord], level_count: int) -> LevelAssignment:
    """Partition the year span into ``level_count`` contiguous bands minimising
    the maximum papers-per-band.

    Papers of one year never split across bands. The optimum is found by
    dynamic programming over all boundary placements between distinct years;
    ties are resolved deterministically (first optimum in scan order). Band k
    runs from its first distinct year to the year before band k+1 starts, so
    the ranges tile the span.
    """
    if not records:
        raise LayeringError("empty corpus")
    years = sorted({r.year for r in records})
    if level_count < 1:
        raise LayeringError(f"level count must be >= 1, got {level_count}")
    if level_count > len(years):
        raise LayeringError(
            f"level count {level_count} exceeds the {len(years)} distinct publication years"
        )
    per_year = Counter(r.year for r in records)
    counts = [per_year[y] for y in years]
    m = len(years)

    # best[i][k]: minimal max band load covering the first i distinct years with k bands
    INF = float("inf")
    best = [[INF] * (level_count + 1) for _ in range(m + 1)]
    cut = [[0] * (level_count + 1) for _ in range(m + 1)]
    best[0][0] = 0
    prefix = [0]
    for c in counts:
        prefix.append(prefix[-1] + c)
    for i in range(1, m + 1):
        for k in range(1, min(i, level_count) + 1):
            for j in range(k - 1, i):  # last band covers years j..i-1
                load = max(best[j][k - 1], prefix[i] - prefix[j])
                if load < best[i][k]:
                    best[i][k] = load
                    cut[i][k] = j

    boundaries: list[int] = []  # start indices of each band, ascending
    i, k = m, level_count
    while k > 0:
        j = cut[i][k]
        boundaries.append(j)
        i, k = j, k - 1
    boundaries.reverse()

    max_year = max(r.year for r in records)
    bounds: list[tuple[int, int]] = []
    for b, start_idx in enumerate(boundaries):
        lo = years[start_idx]
        hi = years[boundaries[b + 1]] - 1 if b + 1 < len(boundaries) else max_year
        bounds.append((lo, hi))

    level_of: dict[int, int] = {}
    for r in records:
        for b, (lo, hi) in enumerate(bounds):
            if lo <= r.year <= hi:
                level_of[r.id] = b
                break
    return LevelAssignment(level_of=level_of, bounds=tuple(bounds))


def check_edge_monotone(levels: LevelAssignment, graph: CitationGraph) -> list[tuple[int, int]]:
    """Edges must point at the same or an older band: level(cited) <= level(citing).

    Returns the violating edges; empty list means the assignment is consistent.
    """
    violations = []
    for u, v in sorted(graph.edges):
        if levels.level_of[v] > levels.level_of[u]:
            violations.append((u, v))
    return violations
