"""HTTP service over a workspace: browse, search, edit, link, curate.

One writer, many readers; every mutation is appended to the audit log
before the response is acknowledged, and every response carries the
current audit sequence in `X-Store-Version` so clients can detect
staleness cheaply.
"""

from __future__ import annotations

from datetime import datetime, timezone
from pathlib import Path

from fastapi import FastAPI, Header, Query, Request
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from . import errors
from .browse import neighborhood, search
from .coverage import DEFAULT_BANDS, DEFAULT_MIN_RATE, coverage_report
from .curation import Proposal
from .formats import import_corpus
from .linking import link
from .metrics import compute_metrics
from .workspace import Workspace

_NOT_FOUND = (errors.UnknownConcept, errors.UnknownAtom, errors.UnknownTask,
              errors.UnknownScopeRoot, errors.UnknownParent)
_CONFLICT = (errors.CycleError, errors.HierarchyConflict, errors.HasChildren,
             errors.PreferredAtomDeletion, errors.DuplicateRootLabel,
             errors.AlreadyVoted, errors.TaskClosed, errors.VotesPending,
             errors.NotResolved, errors.NotAssigned, errors.AmbiguousTerm)


def _now() -> str:
    return datetime.now(timezone.utc).isoformat()


class ConceptCreate(BaseModel):
    label: str
    language: str = "en"
    parent: str | None = None
    source: str = "MANUAL"


class ConceptPatch(BaseModel):
    parent: str | None = None
    preferred_aui: str | None = None


class TermCreate(BaseModel):
    text: str
    language: str = "en"
    source: str = "MANUAL"
    source_code: str | None = None


class LinkRequest(BaseModel):
    terms: list[str]
    threshold: float = 0.5
    k: int = 5


class CoverageRequest(BaseModel):
    corpus_tsv: str
    name: str = "upload"
    min_rate: float = DEFAULT_MIN_RATE
    bands: list[list[float]] | None = None


class BatchCreate(BaseModel):
    terms: list[str]
    annotators: list[str]
    group_count: int = 5
    per_term: int = 3
    seed: int = 0


class VoteCreate(BaseModel):
    annotator: str | None = None
    proposal: dict


class ResolveRequest(BaseModel):
    force: bool = False


class FinalizeRequest(BaseModel):
    reviewer: str | None = None
    override: dict | None = None


def _summary(ws: Workspace, cui: str) -> dict:
    concept = ws.store.concepts[cui]
    term = ws.store.preferred_term(cui)
    return {
        "cui": cui,
        "code": concept.code,
        "label": term.text_raw if term else cui,
        "language": term.language if term else None,
        "leaf": not ws.store.children_of(cui),
        "parent": concept.parent,
    }


def _resource(ws: Workspace, cui: str) -> dict:
    store = ws.store
    concept = store.get_concept(cui)
    out = _summary(ws, concept.cui)
    out.update({
        "status": concept.status,
        "preferred_aui": concept.preferred_aui,
        "atoms": [{
            "aui": a.aui, "sui": a.sui,
            "text": store.terms[a.sui].text_raw,
            "language": store.terms[a.sui].language,
            "source": a.source, "source_code": a.source_code,
            "preferred": a.aui == concept.preferred_aui,
        } for a in store.atoms_of(concept.cui)],
        "contexts": [{"id": c.id, "kind": c.kind, "text": c.text,
                      "source": c.source} for c in store.contexts_of(concept.cui)],
        "children": [_summary(ws, child) for child in store.children_of(concept.cui)],
    })
    if concept.cui != cui:
        out["forwarded_from"] = cui
    return out


def create_app(ws: Workspace, rules=(), generator=None,
               static_dir: str | Path | None = None) -> FastAPI:
    app = FastAPI(title="ispo", version="0.1.0")

    @app.middleware("http")
    async def stamp_version(request: Request, call_next):
        response = await call_next(request)
        response.headers["X-Store-Version"] = str(ws.seq)
        return response

    @app.exception_handler(errors.IspoError)
    async def domain_error(_request: Request, exc: errors.IspoError):
        if isinstance(exc, _NOT_FOUND):
            status = 404
        elif isinstance(exc, _CONFLICT):
            status = 409
        else:
            status = 400
        return JSONResponse(status_code=status, content={
            "error": {"code": type(exc).__name__, "message": str(exc)}})

    # --- browse -----------------------------------------------------------

    @app.get("/api/roots")
    def get_roots():
        with ws.lock:
            return {"roots": [_summary(ws, cui) for cui in ws.store.roots()]}

    @app.get("/api/concepts/{cui}")
    def get_concept(cui: str):
        with ws.lock:
            return _resource(ws, cui)

    @app.get("/api/concepts/{cui}/children")
    def get_children(cui: str):
        with ws.lock:
            resolved = ws.store.get_concept(cui).cui
            return {"children": [_summary(ws, c)
                                 for c in ws.store.children_of(resolved)]}

    @app.get("/api/concepts/{cui}/neighborhood")
    def get_neighborhood(cui: str, radius: int = Query(default=1, ge=0)):
        with ws.lock:
            graph = neighborhood(ws.store, cui, radius)
            return {
                "center": graph.center,
                "radius": radius,
                "nodes": [_summary(ws, n) for n in graph.nodes],
                "edges": [list(e) for e in graph.edges],
            }

    @app.get("/api/search")
    def get_search(q: str, scope: str = "global", root: str | None = None):
        with ws.lock:
            results = search(ws.store, q, scope=scope, root=root)
            out = []
            for r in results:
                row = r.as_dict()
                row["label"] = _summary(ws, r.concept)["label"]
                row["code"] = ws.store.concepts[r.concept].code
                out.append(row)
            return {"results": out, "count": len(out)}

    # --- editing ----------------------------------------------------------

    @app.post("/api/concepts", status_code=201)
    def post_concept(body: ConceptCreate,
                     x_annotator: str | None = Header(default=None)):
        actor = x_annotator or "anonymous"
        cui = ws.create_concept(body.label, body.language, body.parent,
                                body.source, actor=actor, at=_now())
        with ws.lock:
            return _resource(ws, cui)

    @app.patch("/api/concepts/{cui}")
    def patch_concept(cui: str, body: ConceptPatch,
                      x_annotator: str | None = Header(default=None)):
        actor = x_annotator or "anonymous"
        if body.parent is None and body.preferred_aui is None:
            raise errors.IspoError("nothing to update")
        if body.parent is not None:
            ws.reparent(cui, body.parent, actor=actor, at=_now())
        if body.preferred_aui is not None:
            ws.set_preferred(cui, body.preferred_aui, actor=actor, at=_now())
        with ws.lock:
            return _resource(ws, cui)

    @app.delete("/api/concepts/{cui}")
    def delete_concept(cui: str, x_annotator: str | None = Header(default=None)):
        ws.delete_concept(cui, actor=x_annotator or "anonymous", at=_now())
        return {"deleted": cui}

    @app.post("/api/concepts/{cui}/terms")
    def post_term(cui: str, body: TermCreate,
                  x_annotator: str | None = Header(default=None)):
        atom = ws.add_term(cui, body.text, body.language, body.source,
                           body.source_code, actor=x_annotator or "anonymous",
                           at=_now())
        with ws.lock:
            out = _resource(ws, atom.cui)
            out["atom"] = atom.aui
            return out

    @app.delete("/api/terms/{aui}")
    def delete_term(aui: str, x_annotator: str | None = Header(default=None)):
        with ws.lock:
            atom = ws.store.atoms.get(aui)
            if atom is None:
                raise errors.UnknownAtom(aui)
            cui = atom.cui
            ws.delete_atom(aui, actor=x_annotator or "anonymous", at=_now())
            return _resource(ws, cui)

    # --- analytics ----------------------------------------------------------

    @app.post("/api/link")
    def post_link(body: LinkRequest):
        with ws.lock:
            results = []
            for term in body.terms:
                r = link(term, ws.store, rules, generator=generator,
                         threshold=body.threshold, k=body.k)
                results.append({
                    "term": r.source_term, "status": r.status,
                    "targets": r.targets,
                    "candidates": [{"cui": c.cui, "score": c.score}
                                   for c in r.candidates],
                })
            return {"results": results}

    @app.get("/api/metrics")
    def get_metrics():
        with ws.lock:
            return compute_metrics(ws.store).as_dict()

    @app.post("/api/coverage")
    def post_coverage(body: CoverageRequest):
        corpus = import_corpus(body.corpus_tsv, name=body.name)
        bands = tuple(tuple(b) for b in body.bands) if body.bands else DEFAULT_BANDS
        with ws.lock:
            return coverage_report(corpus, ws.store, min_rate=body.min_rate,
                                   bands=bands).as_dict()

    # --- curation ---------------------------------------------------------------

    @app.get("/api/tasks")
    def get_tasks(state: str | None = None, assignee: str | None = None):
        with ws.lock:
            tasks = list(ws.board.tasks.values())
            if state:
                tasks = [t for t in tasks if t.state == state]
            if assignee:
                tasks = [t for t in tasks if assignee in t.assignees]
            return {"tasks": [t.as_dict() for t in tasks]}

    @app.get("/api/tasks/{task_id}")
    def get_task(task_id: str):
        with ws.lock:
            return ws.board.get(task_id).as_dict()

    @app.post("/api/tasks", status_code=201)
    def post_tasks(body: BatchCreate,
                   x_annotator: str | None = Header(default=None)):
        tasks = ws.create_batch(body.terms, body.annotators, body.group_count,
                                body.per_term, body.seed,
                                actor=x_annotator or "anonymous", at=_now())
        return {"tasks": [t.as_dict() for t in tasks]}

    @app.post("/api/tasks/{task_id}/votes")
    def post_vote(task_id: str, body: VoteCreate,
                  x_annotator: str | None = Header(default=None)):
        annotator = body.annotator or x_annotator
        if not annotator:
            raise errors.NotAssigned("no annotator id supplied")
        task = ws.submit_vote(task_id, annotator,
                              Proposal.from_dict(body.proposal), at=_now())
        return task.as_dict()

    @app.post("/api/tasks/{task_id}/resolve")
    def post_resolve(task_id: str, body: ResolveRequest | None = None,
                     x_annotator: str | None = Header(default=None)):
        force = body.force if body else False
        task = ws.resolve_task(task_id, force=force,
                               actor=x_annotator or "anonymous", at=_now())
        return task.as_dict()

    @app.post("/api/tasks/{task_id}/finalize")
    def post_finalize(task_id: str, body: FinalizeRequest | None = None,
                      x_annotator: str | None = Header(default=None)):
        reviewer = (body.reviewer if body else None) or x_annotator
        if not reviewer:
            raise errors.UnknownReviewer("no reviewer id supplied")
        override = Proposal.from_dict(body.override) if body and body.override else None
        task = ws.finalize_task(task_id, reviewer, override, at=_now())
        return task.as_dict()

    @app.get("/api/audit")
    def get_audit(since: int = 0):
        with ws.lock:
            return {"events": [e.as_dict() for e in ws.audit_since(since)],
                    "version": ws.seq}

    if static_dir is not None and Path(static_dir).is_dir():
        from fastapi.staticfiles import StaticFiles
        app.mount("/", StaticFiles(directory=str(static_dir), html=True),
                  name="ui")

    return app


def serve(store_path: str | Path, address: str = "127.0.0.1:8642",
          rules=(), static_dir=None):
    """Open the workspace at `store_path` and serve it until interrupted."""
    import uvicorn

    ws = Workspace.open(store_path)
    app = create_app(ws, rules=rules, static_dir=static_dir)
    host, _, port = address.partition(":")
    uvicorn.run(app, host=host or "127.0.0.1", port=int(port or 8642),
                log_level="info")
