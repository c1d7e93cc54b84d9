"""Shared engine state: immutable snapshots, single-writer mutations.

Readers grab the current snapshot once and work on it; mutations rebuild a
fresh snapshot under a lock, append the curation event durably, and only
then publish the new snapshot. In-flight reads keep the old one.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import Literal

from .corpus import PaperRecord, validate_corpus
from .graph import CitationGraph, build_full_graph, roots
from .layering import LevelAssignment, assign_levels_balanced, assign_levels_fixed
from .simplify import (
    CurationCase,
    ReferenceSuggestion,
    Selector,
    SimplifiedForest,
    curated_selector,
    first_ref_selector,
    random_selector,
    simplify_graph,
    tfidf_selector,
    record_review,
    resolve_case,
    submit_suggestions,
)
from .store import (
    CurationEvent,
    EventLog,
    load_state,
    submitted_payload,
)

DEFAULT_LEVEL_WIDTH = 5


class ServiceError(ValueError):
    pass


@dataclass(frozen=True)
class Snapshot:
    records: tuple[PaperRecord, ...]
    graph: CitationGraph
    cases: dict[int, CurationCase]

    def record_by_id(self, paper_id: int) -> PaperRecord | None:
        for r in self.records:
            if r.id == paper_id:
                return r
        return None


def build_selector(
    snapshot: Snapshot,
    kind: Literal["curated", "random", "tfidf"],
    seed: int | None = None,
) -> Selector:
    """Selector factory for one snapshot.

    ``curated`` prefers resolved cases, then an open case's rank-1
    suggestion, then the smallest reference id; ``random`` needs a seed.
    """
    records = list(snapshot.records)
    if kind == "random":
        if seed is None:
            raise ServiceError("the random selector requires a seed")
        return random_selector(snapshot.graph, records, seed)
    if kind == "tfidf":
        return tfidf_selector(records)
    if kind == "curated":
        return curated_selector(snapshot.cases, first_ref_selector(snapshot.graph))
    raise ServiceError(f"unknown selector {kind!r}")


def build_levels(
    snapshot: Snapshot,
    mode: Literal["fixed", "balanced"] = "fixed",
    width: int | None = None,
    count: int | None = None,
) -> LevelAssignment:
    records = list(snapshot.records)
    if mode == "fixed":
        return assign_levels_fixed(records, width if width is not None else DEFAULT_LEVEL_WIDTH)
    if mode == "balanced":
        if count is None:
            raise ServiceError("balanced layering requires a level count")
        return assign_levels_balanced(records, count)
    raise ServiceError(f"unknown layering mode {mode!r}")


class CitationService:
    """Holds the live snapshot and serialises curation mutations."""

    def __init__(self, records: list[PaperRecord], cases: dict[int, CurationCase] | None = None,
                 log: EventLog | None = None) -> None:
        self._lock = threading.Lock()
        self._log = log
        self._snapshot = Snapshot(
            records=tuple(records),
            graph=build_full_graph(records),
            cases=dict(cases or {}),
        )

    @classmethod
    def from_files(cls, corpus_file: str | Path, log_file: str | Path | None = None) -> "CitationService":
        state = load_state(corpus_file, log_file)
        log = EventLog(log_file) if log_file is not None else None
        return cls(records=state.records, cases=state.cases, log=log)

    @property
    def snapshot(self) -> Snapshot:
        return self._snapshot

    def default_forest(self, snapshot: Snapshot | None = None) -> SimplifiedForest:
        snap = snapshot or self._snapshot
        return simplify_graph(snap.graph, build_selector(snap, "curated"))

    def stats(self) -> dict:
        snap = self._snapshot
        if not snap.records:
            return {
                "node_count": 0,
                "full_edge_count": 0,
                "simplified_edge_count": 0,
                "level_count": 0,
                "root_count": 0,
            }
        levels = build_levels(snap)
        return {
            "node_count": snap.graph.node_count,
            "full_edge_count": snap.graph.edge_count,
            # One retained edge per node that cites anything, whatever the selector.
            "simplified_edge_count": sum(1 for n in snap.graph.nodes if snap.graph.out_refs(n)),
            "level_count": levels.level_count,
            "root_count": len(roots(snap.graph)),
        }

    def _now(self) -> str:
        return datetime.now(timezone.utc).isoformat(timespec="seconds")

    def _append(self, kind: str, payload: dict, timestamp: str | None = None) -> None:
        if self._log is None:
            return
        stamp = timestamp if timestamp is not None else self._now()
        self._log.append_event(
            CurationEvent(seq=self._log.next_seq, kind=kind, timestamp=stamp, payload=payload)
        )

    def submit_paper(
        self, record: PaperRecord, suggestions: list[ReferenceSuggestion]
    ) -> CurationCase:
        """Add a (possibly new) paper with its author suggestions.

        The record must either be brand new to the corpus or identical to the
        stored one; a case may exist only once per paper.
        """
        with self._lock:
            snap = self._snapshot
            existing = snap.record_by_id(record.id)
            is_new = existing is None
            if existing is not None and existing != record:
                raise ServiceError(f"record {record.id} conflicts with the stored record")
            if record.id in snap.cases:
                raise ServiceError(f"paper {record.id} already has a curation case")
            records = list(snap.records) + ([record] if is_new else [])
            if is_new:
                report = validate_corpus(records)
                if not report.ok:
                    detail = "; ".join(f"[{e.code}] {e.message}" for e in report.errors)
                    raise ServiceError(f"record {record.id} breaks corpus validation: {detail}")
            case = submit_suggestions(record if is_new else existing, records, suggestions)
            self._append("submitted", submitted_payload(record, case.suggestions, include_record=is_new))
            cases = dict(snap.cases)
            cases[record.id] = case
            self._snapshot = Snapshot(
                records=tuple(records), graph=build_full_graph(records), cases=cases
            )
            return case

    def review_case(self, paper_id: int, reviewer: str, chosen: int) -> CurationCase:
        with self._lock:
            snap = self._snapshot
            case = snap.cases.get(paper_id)
            if case is None:
                raise KeyError(f"no curation case for paper {paper_id}")
            # The event timestamp doubles as the review timestamp so a log
            # replay reproduces the live case exactly.
            stamp = self._now()
            updated = record_review(case, reviewer=reviewer, chosen=chosen, timestamp=stamp)
            self._append(
                "reviewed",
                {"paper_id": paper_id, "reviewer": reviewer, "chosen": chosen},
                timestamp=stamp,
            )
            cases = dict(snap.cases)
            cases[paper_id] = updated
            self._snapshot = Snapshot(records=snap.records, graph=snap.graph, cases=cases)
            return updated

    def resolve(self, paper_id: int) -> CurationCase:
        with self._lock:
            snap = self._snapshot
            case = snap.cases.get(paper_id)
            if case is None:
                raise KeyError(f"no curation case for paper {paper_id}")
            resolved = resolve_case(case)
            self._append("resolved", {"paper_id": paper_id, "final_ref": resolved.final_ref})
            cases = dict(snap.cases)
            cases[paper_id] = resolved
            self._snapshot = Snapshot(records=snap.records, graph=snap.graph, cases=cases)
            return resolved
