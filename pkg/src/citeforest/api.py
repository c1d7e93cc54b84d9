"""HTTP+JSON surface over the engine.

Read endpoints are pure functions of the current snapshot; curation
mutations are durably logged before the response goes out. DOIs in paths
are percent-encoded; id-based addressing is offered as a convenience under
``/papers/id/{n}``.
"""

from __future__ import annotations

from typing import Literal

from fastapi import FastAPI, HTTPException, Query
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from . import query
from .corpus import PaperRecord, record_from_dict
from .service import CitationService, ServiceError, Snapshot, build_levels, build_selector
from .simplify import (
    CitationCategory,
    CurationCase,
    CurationError,
    ReferenceSuggestion,
    SelectionError,
    simplify_graph,
)
from .store import LogError, suggestions_to_payload
from .visual import make_view, view_document


class SuggestionBody(BaseModel):
    ref_id: int
    rank: int = Field(ge=1, le=3)
    category: str


class SubmissionBody(BaseModel):
    record: dict
    suggestions: list[SuggestionBody]


class ReviewBody(BaseModel):
    reviewer: str
    chosen: int


def paper_info(record: PaperRecord) -> dict:
    """Info-panel fields: authors joined with ";", keywords with ","."""
    return {
        "id": record.id,
        "doi": record.doi,
        "title": record.title,
        "year": record.year,
        "authors": ";".join(record.authors),
        "keywords": ",".join(record.keywords),
        "url": record.url,
        "refs": list(record.refs),
    }


def case_info(case: CurationCase) -> dict:
    return {
        "paper_id": case.paper_id,
        "status": case.status.value,
        "suggestions": suggestions_to_payload(case.suggestions),
        "candidate_refs": list(case.candidate_refs),
        "reviews": [
            {"reviewer": r.reviewer, "chosen": r.chosen, "timestamp": r.timestamp}
            for r in case.reviews
        ],
        "final_ref": case.final_ref,
    }


def _bad_request(message: str) -> HTTPException:
    return HTTPException(status_code=400, detail={"message": message})


def _curation_http_error(exc: CurationError) -> HTTPException:
    status = 409 if exc.code == "CASE_RESOLVED" else 422
    return HTTPException(status_code=status, detail={"code": exc.code, "message": str(exc)})


def create_app(service: CitationService, cors_origins: tuple[str, ...] = ("*",)) -> FastAPI:
    app = FastAPI(title="citeforest", docs_url=None, redoc_url=None)
    app.add_middleware(
        CORSMiddleware,
        allow_origins=list(cors_origins),
        allow_methods=["*"],
        allow_headers=["*"],
    )

    def _find_record(snap: Snapshot, doi: str) -> PaperRecord:
        record = query.find_by_doi(list(snap.records), doi)
        if record is None:
            raise HTTPException(status_code=404, detail={"message": f"no paper with DOI {doi!r}"})
        return record

    def _record_by_id(snap: Snapshot, paper_id: int) -> PaperRecord:
        record = snap.record_by_id(paper_id)
        if record is None:
            raise HTTPException(status_code=404, detail={"message": f"no paper with id {paper_id}"})
        return record

    def _main_path_payload(snap: Snapshot, record: PaperRecord) -> dict:
        forest = service.default_forest(snap)
        path = query.main_path(forest, record.id)
        by_id = {r.id: r for r in snap.records}
        return {"doi": record.doi, "path": [paper_info(by_id[n]) for n in path]}

    @app.get("/graph")
    def get_graph(
        view: Literal["full", "simplified"] = Query("full"),
        levels: Literal["fixed", "balanced"] = Query("fixed"),
        width: int | None = Query(None),
        count: int | None = Query(None),
        selector: Literal["curated", "random", "tfidf"] = Query("curated"),
        seed: int | None = Query(None),
    ) -> JSONResponse:
        snap = service.snapshot
        if not snap.records:
            raise _bad_request("the corpus is empty")
        if levels == "fixed" and width is not None and width < 1:
            raise _bad_request(f"width must be >= 1, got {width}")
        if levels == "balanced" and count is None:
            raise _bad_request("balanced layering requires count")
        if view == "simplified" and selector == "random" and seed is None:
            raise _bad_request("selector=random requires seed for a reproducible view")
        try:
            assignment = build_levels(snap, levels, width=width, count=count)
        except (ServiceError, ValueError) as exc:
            raise _bad_request(str(exc)) from exc

        forest = None
        if view == "simplified":
            try:
                forest = simplify_graph(snap.graph, build_selector(snap, selector, seed=seed))
            except (ServiceError, SelectionError) as exc:
                raise _bad_request(str(exc)) from exc
        graph_view = make_view(list(snap.records), snap.graph, assignment, view, forest=forest)
        document = view_document(graph_view, assignment)
        effective_width = width if width is not None else (5 if levels == "fixed" else None)
        params = {
            "view": view,
            "levels": levels,
            "width": effective_width if levels == "fixed" else None,
            "count": count if levels == "balanced" else None,
            "selector": selector if view == "simplified" else None,
            "seed": seed if (view == "simplified" and selector == "random") else None,
        }
        ordered = {"view_kind": document["view_kind"], "params": params}
        ordered.update({k: document[k] for k in ("levels", "nodes", "edges")})
        return JSONResponse(ordered)

    @app.get("/stats")
    def get_stats() -> dict:
        return service.stats()

    @app.get("/search")
    def get_search(field: str = Query(...), q: str = Query(...)) -> dict:
        snap = service.snapshot
        try:
            hits = query.search(list(snap.records), field, q)
        except ValueError as exc:
            raise _bad_request(str(exc)) from exc
        return {"results": [paper_info(r) for r in hits]}

    @app.get("/cases")
    def get_cases() -> dict:
        snap = service.snapshot
        ordered = sorted(snap.cases.values(), key=lambda c: c.paper_id)
        return {"cases": [case_info(c) for c in ordered]}

    @app.post("/papers", status_code=201)
    def post_paper(body: SubmissionBody) -> dict:
        try:
            record = record_from_dict(body.record)
        except ValueError as exc:
            raise HTTPException(status_code=422, detail={"message": str(exc)}) from exc
        try:
            suggestions = [
                ReferenceSuggestion(
                    ref_id=s.ref_id, rank=s.rank, category=CitationCategory(s.category)
                )
                for s in body.suggestions
            ]
        except ValueError as exc:
            raise HTTPException(
                status_code=422, detail={"message": f"unknown citation category: {exc}"}
            ) from exc
        try:
            case = service.submit_paper(record, suggestions)
        except CurationError as exc:
            raise _curation_http_error(exc) from exc
        except ServiceError as exc:
            status = 409 if "already has" in str(exc) or "conflicts" in str(exc) else 422
            raise HTTPException(status_code=status, detail={"message": str(exc)}) from exc
        except LogError as exc:
            raise HTTPException(status_code=409, detail={"message": str(exc)}) from exc
        return case_info(case)

    # id-based convenience addressing; registered before the DOI catch-alls.
    @app.get("/papers/id/{paper_id}/main-path")
    def get_main_path_by_id(paper_id: int) -> dict:
        snap = service.snapshot
        return _main_path_payload(snap, _record_by_id(snap, paper_id))

    @app.get("/papers/id/{paper_id}")
    def get_paper_by_id(paper_id: int) -> dict:
        return paper_info(_record_by_id(service.snapshot, paper_id))

    @app.get("/papers/{doi:path}/main-path")
    def get_main_path(doi: str) -> dict:
        snap = service.snapshot
        return _main_path_payload(snap, _find_record(snap, doi))

    @app.get("/papers/{doi:path}/case")
    def get_case(doi: str) -> dict:
        snap = service.snapshot
        record = _find_record(snap, doi)
        case = snap.cases.get(record.id)
        if case is None:
            raise HTTPException(
                status_code=404, detail={"message": f"no curation case for paper {record.id}"}
            )
        return case_info(case)

    @app.post("/papers/{doi:path}/review")
    def post_review(doi: str, body: ReviewBody) -> dict:
        snap = service.snapshot
        record = _find_record(snap, doi)
        try:
            case = service.review_case(record.id, reviewer=body.reviewer, chosen=body.chosen)
        except CurationError as exc:
            raise _curation_http_error(exc) from exc
        except KeyError as exc:
            raise HTTPException(status_code=404, detail={"message": str(exc)}) from exc
        return case_info(case)

    @app.post("/papers/{doi:path}/resolve")
    def post_resolve(doi: str) -> dict:
        snap = service.snapshot
        record = _find_record(snap, doi)
        try:
            case = service.resolve(record.id)
        except CurationError as exc:
            raise _curation_http_error(exc) from exc
        except KeyError as exc:
            raise HTTPException(status_code=404, detail={"message": str(exc)}) from exc
        return case_info(case)

    @app.get("/papers/{doi:path}")
    def get_paper(doi: str) -> dict:
        return paper_info(_find_record(service.snapshot, doi))

    return app
