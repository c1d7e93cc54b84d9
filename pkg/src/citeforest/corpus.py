"""Bibliographic corpus: record schema, CSV parsing, and validation.

The corpus is a flat CSV table with the header row

    id,title,DOI,authors,year,abstract,keywords,url,ref

Multi-value cells use ";" for authors and refs and "," for keywords.
The ";" convention for multiple refs mirrors the authors column (","
is already taken by keywords).
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from typing import NamedTuple

CSV_HEADER = ["id", "title", "DOI", "authors", "year", "abstract", "keywords", "url", "ref"]

AUTHOR_SEP = ";"
KEYWORD_SEP = ","
REF_SEP = ";"


class CorpusParseError(ValueError):
    """Structural CSV problem. ``row`` is 1-based counting the header as row 1."""

    def __init__(self, row: int, message: str) -> None:
        self.row = row
        super().__init__(f"row {row}: {message}")


@dataclass(frozen=True)
class PaperRecord:
    """One scientific document of the corpus."""

    id: int
    doi: str
    title: str
    authors: tuple[str, ...]
    year: int
    abstract: str = ""
    keywords: tuple[str, ...] = ()
    url: str = ""
    refs: tuple[int, ...] = ()


class ValidationIssue(NamedTuple):
    record_id: int
    code: str
    message: str


@dataclass
class ValidationReport:
    """Outcome of :func:`validate_corpus`; a corpus is loadable iff ``errors`` is empty."""

    errors: list[ValidationIssue] = field(default_factory=list)
    warnings: list[ValidationIssue] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.errors

    def summary(self) -> str:
        return f"{len(self.errors)} errors, {len(self.warnings)} warnings"


def _split_multi(cell: str, sep: str) -> tuple[str, ...]:
    return tuple(part.strip() for part in cell.split(sep) if part.strip())


def parse_csv(raw_text: str) -> list[PaperRecord]:
    """Parse corpus CSV text into records.

    Cells are stripped of surrounding whitespace; empty cells map to empty
    text or empty lists. Raises :class:`CorpusParseError` on a missing or
    wrong header, a row with the wrong column count, non-integer id/year/ref
    values, or a duplicate id.
    """
    reader = csv.reader(io.StringIO(raw_text))
    rows = list(reader)
    if not rows:
        raise CorpusParseError(1, "missing header row")
    header = [cell.strip() for cell in rows[0]]
    if header != CSV_HEADER:
        raise CorpusParseError(1, f"header must be {','.join(CSV_HEADER)!r}, got {','.join(header)!r}")

    records: list[PaperRecord] = []
    seen_ids: set[int] = set()
    for i, raw_row in enumerate(rows[1:], start=2):
        if not raw_row or all(not cell.strip() for cell in raw_row):
            continue  # blank line
        if len(raw_row) != len(CSV_HEADER):
            raise CorpusParseError(i, f"expected {len(CSV_HEADER)} columns, got {len(raw_row)}")
        cells = [cell.strip() for cell in raw_row]
        id_cell, title, doi, authors_cell, year_cell, abstract, kw_cell, url, ref_cell = (
            cells[0], cells[1], cells[2], cells[3], cells[4], cells[5], cells[6], cells[7], cells[8],
        )
        try:
            record_id = int(id_cell)
        except ValueError:
            raise CorpusParseError(i, f"id is not an integer: {id_cell!r}") from None
        if record_id in seen_ids:
            raise CorpusParseError(i, f"duplicate id {record_id}")
        seen_ids.add(record_id)
        try:
            year = int(year_cell)
        except ValueError:
            raise CorpusParseError(i, f"year is not an integer: {year_cell!r}") from None
        refs: list[int] = []
        for token in _split_multi(ref_cell, REF_SEP):
            try:
                refs.append(int(token))
            except ValueError:
                raise CorpusParseError(i, f"ref is not an integer: {token!r}") from None
        records.append(
            PaperRecord(
                id=record_id,
                doi=doi,
                title=title,
                authors=_split_multi(authors_cell, AUTHOR_SEP),
                year=year,
                abstract=abstract,
                keywords=_split_multi(kw_cell, KEYWORD_SEP),
                url=url,
                refs=tuple(refs),
            )
        )
    return records


def serialize_csv(records: list[PaperRecord]) -> str:
    """Inverse of :func:`parse_csv`: parse(serialize(records)) == records."""
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for r in records:
        writer.writerow(
            [
                r.id,
                r.title,
                r.doi,
                AUTHOR_SEP.join(r.authors),
                r.year,
                r.abstract,
                KEYWORD_SEP.join(r.keywords),
                r.url,
                REF_SEP.join(str(x) for x in r.refs),
            ]
        )
    return out.getvalue()


def record_to_dict(record: PaperRecord) -> dict:
    """JSON-friendly dict mirroring the CSV schema (lists stay lists)."""
    return {
        "id": record.id,
        "doi": record.doi,
        "title": record.title,
        "authors": list(record.authors),
        "year": record.year,
        "abstract": record.abstract,
        "keywords": list(record.keywords),
        "url": record.url,
        "refs": list(record.refs),
    }


def record_from_dict(data: dict) -> PaperRecord:
    try:
        return PaperRecord(
            id=int(data["id"]),
            doi=str(data["doi"]),
            title=str(data["title"]),
            authors=tuple(str(a) for a in data["authors"]),
            year=int(data["year"]),
            abstract=str(data.get("abstract", "")),
            keywords=tuple(str(k) for k in data.get("keywords", ())),
            url=str(data.get("url", "")),
            refs=tuple(int(x) for x in data.get("refs", ())),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ValueError(f"malformed record object: {exc}") from exc


def validate_corpus(records: list[PaperRecord]) -> ValidationReport:
    """Check corpus-level invariants.

    Errors (corpus not loadable): empty id/doi/title, missing authors,
    duplicate DOI (case-insensitive), duplicate refs within one record,
    self-reference, and a reference to a strictly younger record.
    Warnings: refs to ids absent from the corpus (dangling, dropped at graph
    build) and same-year references (permitted: the cited work can already
    exist within the same year).
    """
    report = ValidationReport()
    by_id = {r.id: r for r in records}
    dois_seen: dict[str, int] = {}

    for r in records:
        if r.id <= 0:
            report.errors.append(ValidationIssue(r.id, "BAD_ID", f"id must be positive, got {r.id}"))
        if not r.doi:
            report.errors.append(ValidationIssue(r.id, "NO_DOI", "doi is empty"))
        if not r.title:
            report.errors.append(ValidationIssue(r.id, "NO_TITLE", "title is empty"))
        if not r.authors:
            report.errors.append(ValidationIssue(r.id, "NO_AUTHORS", "authors list is empty"))
        doi_key = r.doi.lower()
        if doi_key and doi_key in dois_seen:
            report.errors.append(
                ValidationIssue(r.id, "DUP_DOI", f"doi {r.doi!r} already used by record {dois_seen[doi_key]}")
            )
        elif doi_key:
            dois_seen[doi_key] = r.id

        seen_refs: set[int] = set()
        for ref in r.refs:
            if ref in seen_refs:
                report.errors.append(ValidationIssue(r.id, "DUP_REF", f"duplicate ref {ref}"))
                continue
            seen_refs.add(ref)
            if ref == r.id:
                report.errors.append(ValidationIssue(r.id, "SELF_REF", "record references itself"))
                continue
            cited = by_id.get(ref)
            if cited is None:
                report.warnings.append(
                    ValidationIssue(r.id, "DANGLING", f"ref {ref} is not in the corpus")
                )
            elif cited.year > r.year:
                report.errors.append(
                    ValidationIssue(
                        r.id,
                        "TIME_ORDER",
                        f"ref {ref} ({cited.year}) is younger than the citing record ({r.year})",
                    )
                )
            elif cited.year == r.year:
                report.warnings.append(
                    ValidationIssue(r.id, "SAME_YEAR", f"ref {ref} shares publication year {r.year}")
                )
    return report
