"""Persistence: corpus snapshots plus an append-only curation event log.

The log is line-delimited JSON, one self-contained event per line:

    {"seq": 3, "kind": "reviewed", "timestamp": "...", "payload": {...}}

Sequence numbers are strictly increasing and each paper's events arrive in
lifecycle order (submitted, then reviews, then resolved). Replaying the
same corpus file and log always rebuilds the identical state. A torn final
line (crash mid-write) is dropped with a warning; a corrupt line anywhere
else is an error naming the line.
"""

from __future__ import annotations

import json
import logging
import os
from dataclasses import dataclass, field
from pathlib import Path

from .corpus import (
    PaperRecord,
    record_from_dict,
    record_to_dict,
    parse_csv,
    validate_corpus,
)
from .graph import CitationGraph, build_full_graph
from .simplify import (
    CitationCategory,
    CurationCase,
    ReferenceSuggestion,
    record_review,
    resolve_case,
    submit_suggestions,
)

logger = logging.getLogger(__name__)

EVENT_KINDS = ("submitted", "reviewed", "resolved")


class LogError(ValueError):
    pass


class LogCorruptionError(LogError):
    def __init__(self, line: int, message: str) -> None:
        self.line = line
        super().__init__(f"log line {line}: {message}")


class LogOrderError(LogError):
    """Sequence regression or an event out of lifecycle order."""


@dataclass(frozen=True)
class CurationEvent:
    seq: int
    kind: str  # submitted | reviewed | resolved
    timestamp: str  # ISO-8601
    payload: dict

    def to_json(self) -> str:
        return json.dumps(
            {"seq": self.seq, "kind": self.kind, "timestamp": self.timestamp, "payload": self.payload},
            ensure_ascii=False,
        )


def _event_from_obj(obj: dict) -> CurationEvent:
    try:
        seq = int(obj["seq"])
        kind = str(obj["kind"])
        timestamp = str(obj["timestamp"])
        payload = obj["payload"]
    except (KeyError, TypeError, ValueError) as exc:
        raise ValueError(f"malformed event object: {exc}") from exc
    if kind not in EVENT_KINDS:
        raise ValueError(f"unknown event kind {kind!r}")
    if not isinstance(payload, dict) or "paper_id" not in payload:
        raise ValueError("payload must be an object with a paper_id")
    return CurationEvent(seq=seq, kind=kind, timestamp=timestamp, payload=payload)


class _Lifecycle:
    """Tracks per-paper progress so appends and replays reject out-of-order events."""

    def __init__(self) -> None:
        self.last_seq = 0
        self.status: dict[int, str] = {}

    def admit(self, event: CurationEvent) -> None:
        if event.seq <= self.last_seq:
            raise LogOrderError(
                f"sequence regression: event seq {event.seq} after {self.last_seq}"
            )
        paper_id = int(event.payload["paper_id"])
        current = self.status.get(paper_id)
        if event.kind == "submitted":
            if current is not None:
                raise LogOrderError(f"paper {paper_id} already has a case (status {current})")
        elif current is None:
            raise LogOrderError(f"{event.kind} event for paper {paper_id} before submitted")
        elif current == "resolved":
            raise LogOrderError(f"{event.kind} event for paper {paper_id} after resolved")
        self.last_seq = event.seq
        self.status[paper_id] = {
            "submitted": "submitted",
            "reviewed": "under_review",
            "resolved": "resolved",
        }[event.kind]


def read_events(path: str | Path) -> list[CurationEvent]:
    """Read and order-check a log file. Missing file means no events."""
    path = Path(path)
    if not path.exists():
        return []
    raw = path.read_text(encoding="utf-8")
    lines = raw.split("\n")
    while lines and not lines[-1].strip():
        lines.pop()
    last_complete = len(lines) if raw.endswith("\n") else len(lines) - 1

    events: list[CurationEvent] = []
    lifecycle = _Lifecycle()
    for i, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        try:
            event = _event_from_obj(json.loads(line))
            lifecycle.admit(event)
        except (json.JSONDecodeError, ValueError) as exc:
            # A complete line that fails to parse is corruption; an
            # incomplete final line is the expected crash tail and is dropped.
            if i > last_complete and not isinstance(exc, LogOrderError):
                logger.warning("%s: dropping torn trailing line %d (%s)", path, i, exc)
                break
            raise LogCorruptionError(i, str(exc)) from exc
        events.append(event)
    return events


class EventLog:
    """Single-writer append-only log bound to one file."""

    def __init__(self, path: str | Path) -> None:
        self.path = Path(path)
        self._lifecycle = _Lifecycle()
        for event in read_events(self.path):
            self._lifecycle.admit(event)

    @property
    def next_seq(self) -> int:
        return self._lifecycle.last_seq + 1

    def append_event(self, event: CurationEvent) -> None:
        """Durably append one event; rejects lifecycle/sequence violations."""
        self._lifecycle.admit(event)
        self.path.parent.mkdir(parents=True, exist_ok=True)
        with open(self.path, "a", encoding="utf-8") as handle:
            handle.write(event.to_json() + "\n")
            handle.flush()
            os.fsync(handle.fileno())


def suggestions_from_payload(items: list[dict]) -> list[ReferenceSuggestion]:
    return [
        ReferenceSuggestion(
            ref_id=int(s["ref_id"]), rank=int(s["rank"]), category=CitationCategory(s["category"])
        )
        for s in items
    ]


def suggestions_to_payload(suggestions: tuple[ReferenceSuggestion, ...]) -> list[dict]:
    return [
        {"ref_id": s.ref_id, "rank": s.rank, "category": s.category.value} for s in suggestions
    ]


def replay_cases(
    records: list[PaperRecord], events: list[CurationEvent]
) -> tuple[list[PaperRecord], dict[int, CurationCase]]:
    """Re-apply curation events on top of a corpus.

    Submitted events may carry the full record of a paper that is new to the
    corpus; those records are appended (and must keep the corpus valid).
    Returns the possibly-extended corpus and the cases keyed by paper id.
    """
    corpus = list(records)
    by_id = {r.id: r for r in corpus}
    cases: dict[int, CurationCase] = {}
    for event in events:
        paper_id = int(event.payload["paper_id"])
        try:
            if event.kind == "submitted":
                record_obj = event.payload.get("record")
                if record_obj is not None:
                    record = record_from_dict(record_obj)
                    existing = by_id.get(record.id)
                    if existing is None:
                        corpus.append(record)
                        by_id[record.id] = record
                        report = validate_corpus(corpus)
                        if not report.ok:
                            raise LogError(
                                f"event seq {event.seq}: record {record.id} breaks corpus validation: "
                                + "; ".join(e.message for e in report.errors)
                            )
                    elif existing != record:
                        raise LogError(
                            f"event seq {event.seq}: record {record.id} conflicts with the corpus"
                        )
                if paper_id not in by_id:
                    raise LogError(f"event seq {event.seq}: paper {paper_id} not in corpus")
                suggestions = suggestions_from_payload(event.payload["suggestions"])
                cases[paper_id] = submit_suggestions(by_id[paper_id], corpus, suggestions)
            elif event.kind == "reviewed":
                cases[paper_id] = record_review(
                    cases[paper_id],
                    reviewer=str(event.payload["reviewer"]),
                    chosen=int(event.payload["chosen"]),
                    timestamp=event.timestamp,
                )
            else:  # resolved
                cases[paper_id] = resolve_case(cases[paper_id])
        except LogError:
            raise
        except (KeyError, ValueError) as exc:
            raise LogError(f"event seq {event.seq}: {exc}") from exc
    return corpus, cases


@dataclass
class LoadedState:
    records: list[PaperRecord]
    graph: CitationGraph
    cases: dict[int, CurationCase] = field(default_factory=dict)


def load_state(corpus_file: str | Path, log_file: str | Path | None = None) -> LoadedState:
    """Deterministic state from flat files: corpus CSV plus optional event log."""
    corpus_path = Path(corpus_file)
    try:
        records = parse_csv(corpus_path.read_text(encoding="utf-8"))
    except ValueError as exc:
        raise LogError(f"{corpus_path}: {exc}") from exc
    report = validate_corpus(records)
    if not report.ok:
        detail = "; ".join(f"record {e.record_id}: {e.message}" for e in report.errors)
        raise LogError(f"{corpus_path}: corpus validation failed: {detail}")
    events = read_events(log_file) if log_file is not None else []
    records, cases = replay_cases(records, events)
    graph = build_full_graph(records)
    return LoadedState(records=records, graph=graph, cases=cases)


def make_event(kind: str, payload: dict, seq: int, timestamp: str) -> CurationEvent:
    return CurationEvent(seq=seq, kind=kind, timestamp=timestamp, payload=payload)


def submitted_payload(
    paper: PaperRecord, suggestions: tuple[ReferenceSuggestion, ...], include_record: bool
) -> dict:
    payload = {
        "paper_id": paper.id,
        "record": record_to_dict(paper) if include_record else None,
        "suggestions": suggestions_to_payload(suggestions),
    }
    return payload
