"""Choose one main reference per citing paper and emit the simplified forest.

Three routes pick the main reference: the curation workflow (author
suggestions reviewed by designated researchers, then resolved), a seeded
random baseline, and a TF-IDF text-similarity selector. Whatever the route,
the result keeps exactly one outgoing edge per paper that cites anything,
so the reduced structure is a forest of in-trees rooted at reference-less
papers.
"""

from __future__ import annotations

import math
import random
import re
from dataclasses import dataclass, replace
from datetime import datetime, timezone
from enum import Enum
from typing import Callable, Iterable, Mapping

from .corpus import PaperRecord
from .graph import CitationGraph


class CitationCategory(str, Enum):
    """Why a work was cited; only the first three qualify as main references."""

    PBAS = "PBas"    # cited work is the starting point
    PMODI = "PModi"  # algorithms or tools adapted/modified
    PUSE = "PUse"    # algorithms or data used directly
    NEUT = "Neut"    # neutral mention
    WEAK = "Weak"    # irrelevant

    @property
    def main_eligible(self) -> bool:
        return self in (CitationCategory.PBAS, CitationCategory.PMODI, CitationCategory.PUSE)


class CaseStatus(str, Enum):
    SUBMITTED = "submitted"
    UNDER_REVIEW = "under_review"
    RESOLVED = "resolved"


class CurationError(ValueError):
    def __init__(self, code: str, message: str) -> None:
        self.code = code
        super().__init__(message)


class SelectionError(ValueError):
    pass


@dataclass(frozen=True)
class ReferenceSuggestion:
    ref_id: int
    rank: int  # 1..3, 1 = most relevant
    category: CitationCategory


@dataclass(frozen=True)
class Review:
    reviewer: str
    chosen: int
    timestamp: str


@dataclass(frozen=True)
class CurationCase:
    """Lifecycle of choosing one paper's main reference.

    ``candidate_refs`` are the paper's in-corpus references, the only valid
    choices for suggestions, reviews, and the final resolution.
    """

    paper_id: int
    suggestions: tuple[ReferenceSuggestion, ...]
    candidate_refs: tuple[int, ...]
    reviews: tuple[Review, ...] = ()
    status: CaseStatus = CaseStatus.SUBMITTED
    final_ref: int | None = None


@dataclass(frozen=True)
class SimplifiedForest:
    """Same node set as the source graph, at most one outgoing edge per node."""

    nodes: frozenset[int]
    main_edge: dict[int, int]  # citing -> its single retained reference

    @property
    def edge_count(self) -> int:
        return len(self.main_edge)

    def edges(self) -> list[tuple[int, int]]:
        return sorted(self.main_edge.items())


def _now_iso() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def submit_suggestions(
    paper: PaperRecord,
    corpus: list[PaperRecord],
    suggestions: list[ReferenceSuggestion],
) -> CurationCase:
    """Open a curation case from an author's 1-3 ranked reference suggestions.

    Rejected when: the count is outside 1..3 (SUGGESTION_COUNT), ranks are
    not 1..n (BAD_RANKS), a suggested id is not one of the paper's in-corpus
    references (UNKNOWN_REF / DANGLING_REF), a category is not main-eligible
    (BAD_CATEGORY), a ref is suggested twice (DUP_SUGGESTION), or every
    suggested reference shares an author with the paper (ALL_SELF_CITED).
    """
    by_id = {r.id: r for r in corpus}
    if paper.id not in by_id:
        raise CurationError("UNKNOWN_PAPER", f"paper {paper.id} is not in the corpus")
    if not 1 <= len(suggestions) <= 3:
        raise CurationError(
            "SUGGESTION_COUNT", f"expected 1-3 suggestions, got {len(suggestions)}"
        )
    if sorted(s.rank for s in suggestions) != list(range(1, len(suggestions) + 1)):
        raise CurationError("BAD_RANKS", "ranks must be distinct and contiguous from 1")
    if len({s.ref_id for s in suggestions}) != len(suggestions):
        raise CurationError("DUP_SUGGESTION", "a reference may be suggested only once")

    candidate_refs = tuple(sorted(ref for ref in paper.refs if ref in by_id))
    paper_authors = set(paper.authors)
    any_disjoint = False
    for s in suggestions:
        if s.ref_id not in paper.refs:
            raise CurationError(
                "UNKNOWN_REF", f"suggested ref {s.ref_id} is not a reference of paper {paper.id}"
            )
        if s.ref_id not in by_id:
            raise CurationError(
                "DANGLING_REF", f"suggested ref {s.ref_id} is not in the corpus"
            )
        if not s.category.main_eligible:
            raise CurationError(
                "BAD_CATEGORY", f"category {s.category.value} cannot mark a main reference"
            )
        if paper_authors.isdisjoint(by_id[s.ref_id].authors):
            any_disjoint = True
    if not any_disjoint:
        raise CurationError(
            "ALL_SELF_CITED", "every suggested reference shares an author with the paper"
        )
    ordered = tuple(sorted(suggestions, key=lambda s: s.rank))
    return CurationCase(paper_id=paper.id, suggestions=ordered, candidate_refs=candidate_refs)


def record_review(
    case: CurationCase, reviewer: str, chosen: int, timestamp: str | None = None
) -> CurationCase:
    """Record one reviewer's pick; they may choose any reference of the paper.

    A reviewer's resubmission replaces their earlier pick. Resolved cases
    take no further reviews.
    """
    if case.status is CaseStatus.RESOLVED:
        raise CurationError("CASE_RESOLVED", f"case for paper {case.paper_id} is already resolved")
    if chosen not in case.candidate_refs:
        raise CurationError(
            "UNKNOWN_REF", f"ref {chosen} is not an in-corpus reference of paper {case.paper_id}"
        )
    stamp = timestamp if timestamp is not None else _now_iso()
    kept = tuple(r for r in case.reviews if r.reviewer != reviewer)
    return replace(
        case,
        reviews=kept + (Review(reviewer=reviewer, chosen=chosen, timestamp=stamp),),
        status=CaseStatus.UNDER_REVIEW,
    )


def resolve_case(case: CurationCase) -> CurationCase:
    """Settle the case on the plurality of reviews.

    Vote ties fall back to the author's ranking: a lower-ranked suggestion
    wins, and any suggested reference beats a tied non-suggested one. A tie
    between two non-suggested references goes to the smaller id. With no
    reviews at all the author's rank-1 suggestion stands.
    """
    if case.status is CaseStatus.RESOLVED:
        raise CurationError("CASE_RESOLVED", f"case for paper {case.paper_id} is already resolved")
    if not case.reviews:
        winner = case.suggestions[0].ref_id
    else:
        votes: dict[int, int] = {}
        for review in case.reviews:
            votes[review.chosen] = votes.get(review.chosen, 0) + 1
        rank_of = {s.ref_id: s.rank for s in case.suggestions}
        unranked = len(case.suggestions) + 1  # worse than any suggested rank
        winner = min(
            votes,
            key=lambda ref: (-votes[ref], rank_of.get(ref, unranked), ref),
        )
    return replace(case, status=CaseStatus.RESOLVED, final_ref=winner)


def select_main_random(paper: PaperRecord, graph: CitationGraph, seed: int) -> int:
    """Pick one in-corpus reference uniformly under a documented seeded draw.

    Procedure (stable across runs and platforms under CPython):
    seed the Mersenne Twister with ``seed XOR paper.id``, take one 64-bit
    draw, and index the paper's in-corpus references sorted ascending with
    ``draw mod ref_count``.
    """
    refs = graph.out_refs(paper.id)
    if not refs:
        raise SelectionError(f"paper {paper.id} has no in-corpus references")
    draw = random.Random(seed ^ paper.id).getrandbits(64)
    return refs[draw % len(refs)]


_TOKEN_RE = re.compile(r"[^0-9a-z]+")


def tokenize(text: str) -> list[str]:
    """Lowercase, split on non-alphanumerics, drop tokens shorter than 2."""
    return [t for t in _TOKEN_RE.split(text.lower()) if len(t) >= 2]


def _document_tokens(record: PaperRecord) -> list[str]:
    return tokenize(" ".join([record.title, record.abstract, " ".join(record.keywords)]))


def _tfidf_vector(tokens: list[str], idf: Mapping[str, float]) -> dict[str, float]:
    counts: dict[str, int] = {}
    for t in tokens:
        counts[t] = counts.get(t, 0) + 1
    return {t: c * idf[t] for t, c in counts.items() if idf.get(t)}


def _cosine(u: Mapping[str, float], v: Mapping[str, float]) -> float:
    if not u or not v:
        return 0.0
    dot = sum(w * v[t] for t, w in u.items() if t in v)
    nu = math.sqrt(sum(w * w for w in u.values()))
    nv = math.sqrt(sum(w * w for w in v.values()))
    if nu == 0.0 or nv == 0.0:
        return 0.0
    return dot / (nu * nv)


def corpus_idf(corpus: list[PaperRecord]) -> dict[str, float]:
    """ln(N / df) over the whole corpus; document text is title + abstract + keywords."""
    n = len(corpus)
    df: dict[str, int] = {}
    for r in corpus:
        for t in set(_document_tokens(r)):
            df[t] = df.get(t, 0) + 1
    return {t: math.log(n / d) for t, d in df.items()}


def select_main_tfidf(paper: PaperRecord, corpus: list[PaperRecord]) -> int:
    """Pick the in-corpus reference most textually similar to the paper.

    Raw term counts weighted by ln(N/df) and compared by cosine similarity;
    ties (including the all-zero-vector case) go to the smallest ref id.
    """
    by_id = {r.id: r for r in corpus}
    candidates = sorted(ref for ref in paper.refs if ref in by_id)
    if not candidates:
        raise SelectionError(f"paper {paper.id} has no in-corpus references")
    idf = corpus_idf(corpus)
    paper_vec = _tfidf_vector(_document_tokens(paper), idf)
    best_id, best_score = candidates[0], -1.0
    for ref in candidates:
        score = _cosine(paper_vec, _tfidf_vector(_document_tokens(by_id[ref]), idf))
        if score > best_score:
            best_id, best_score = ref, score
    return best_id


Selector = Callable[[int], int]
"""Maps a citing node id to the id of its chosen main reference."""


def first_ref_selector(graph: CitationGraph) -> Selector:
    """Deterministic baseline: the smallest in-corpus reference id."""

    def choose(node_id: int) -> int:
        refs = graph.out_refs(node_id)
        if not refs:
            raise SelectionError(f"paper {node_id} has no in-corpus references")
        return refs[0]

    return choose


def random_selector(graph: CitationGraph, records: list[PaperRecord], seed: int) -> Selector:
    by_id = {r.id: r for r in records}
    return lambda node_id: select_main_random(by_id[node_id], graph, seed)


def tfidf_selector(records: list[PaperRecord]) -> Selector:
    by_id = {r.id: r for r in records}
    return lambda node_id: select_main_tfidf(by_id[node_id], records)


def curated_selector(
    cases: Mapping[int, CurationCase] | Iterable[CurationCase],
    fallback: Selector,
) -> Selector:
    """Resolved cases win; open cases fall back to the author's rank-1
    suggestion; papers without a case defer to ``fallback``."""
    if not isinstance(cases, Mapping):
        cases = {c.paper_id: c for c in cases}
    case_map: Mapping[int, CurationCase] = cases

    def choose(node_id: int) -> int:
        case = case_map.get(node_id)
        if case is None:
            return fallback(node_id)
        if case.status is CaseStatus.RESOLVED and case.final_ref is not None:
            return case.final_ref
        return case.suggestions[0].ref_id

    return choose


def simplify_graph(graph: CitationGraph, selector: Selector) -> SimplifiedForest:
    """Keep exactly one outgoing edge for every node that cites anything.

    The chosen edge must exist in the full graph; a selector answer outside
    the node's references is rejected. Reference-less roots keep no edge, so
    the edge count equals the number of nodes with at least one in-corpus
    reference.
    """
    main_edge: dict[int, int] = {}
    for node_id in sorted(graph.nodes):
        refs = graph.out_refs(node_id)
        if not refs:
            continue
        chosen = selector(node_id)
        if (node_id, chosen) not in graph.edges:
            raise SelectionError(
                f"selector chose {chosen} for node {node_id}, which is not one of its references"
            )
        main_edge[node_id] = chosen
    return SimplifiedForest(nodes=graph.nodes, main_edge=main_edge)
