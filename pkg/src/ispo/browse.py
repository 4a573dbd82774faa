"""Synonym-expanded search and local hierarchy views."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

from . import errors
from .model import OntologyStore
from .text import normalize


@dataclass
class SearchResult:
    concept: str
    matched_term: str
    match_kind: str            # preferred | synonym
    exact: bool
    snippet: str | None = None
    synonyms: list[dict] | None = None   # full ring, exact matches only
    contexts: list[dict] | None = None

    def as_dict(self) -> dict:
        return {
            "concept": self.concept, "matched_term": self.matched_term,
            "match_kind": self.match_kind, "exact": self.exact,
            "snippet": self.snippet, "synonyms": self.synonyms,
            "contexts": self.contexts,
        }


def search(store: OntologyStore, query: str, scope: str = "global",
           root: str | None = None) -> list[SearchResult]:
    """Substring search over synonym rings.

    Exact synonym hits rank first and surface the whole ring plus the
    concept's context texts; remaining hits order by matched-term length
    then concept id. Subtree scope restricts hits to descendants of the
    given root (inclusive).
    """
    norm = normalize(query)
    if not norm:
        raise errors.EmptyQuery(query)
    if scope not in ("global", "subtree"):
        raise errors.IspoError(f"unknown scope {scope!r}")
    allowed: set[str] | None = None
    if scope == "subtree":
        if root is None or root not in store.concepts \
                or store.concepts[root].status != "active":
            raise errors.UnknownScopeRoot(str(root))
        allowed = set(store.subtree(root))

    hits: list[tuple[tuple, SearchResult]] = []
    for concept in store.active_concepts():
        if allowed is not None and concept.cui not in allowed:
            continue
        best = None  # (not exact, len, text, not preferred, aui, atom)
        for atom in store.atoms_of(concept.cui):
            term = store.terms[atom.sui]
            if norm not in term.text_normalized:
                continue
            key = (term.text_normalized != norm, len(term.text_normalized),
                   term.text_normalized, atom.aui != concept.preferred_aui,
                   atom.aui)
            if best is None or key < best[0]:
                best = (key, atom, term)
        if best is None:
            continue
        key, atom, term = best
        exact = not key[0]
        result = SearchResult(
            concept=concept.cui,
            matched_term=term.text_raw,
            match_kind="preferred" if atom.aui == concept.preferred_aui else "synonym",
            exact=exact,
        )
        if exact:
            result.synonyms = [
                {"aui": a.aui, "text": store.terms[a.sui].text_raw,
                 "language": store.terms[a.sui].language, "source": a.source,
                 "preferred": a.aui == concept.preferred_aui}
                for a in store.atoms_of(concept.cui)]
            contexts = store.contexts_of(concept.cui)
            result.contexts = [{"kind": c.kind, "text": c.text, "source": c.source}
                               for c in contexts]
            for ctx in contexts:
                if ctx.kind == "definition":
                    result.snippet = ctx.text[:160]
                    break
            else:
                if contexts:
                    result.snippet = contexts[0].text[:160]
        hits.append(((key[0], key[1], concept.cui), result))

    hits.sort(key=lambda pair: pair[0])
    return [result for _, result in hits]


@dataclass
class NeighborhoodGraph:
    center: str
    nodes: list[str] = field(default_factory=list)
    edges: list[tuple[str, str]] = field(default_factory=list)  # (parent, child)

    def as_dict(self) -> dict:
        return {"center": self.center, "nodes": list(self.nodes),
                "edges": [list(e) for e in self.edges]}


def neighborhood(store: OntologyStore, cui: str, radius: int = 1) -> NeighborhoodGraph:
    """Concepts within `radius` parent/child hops of a center, with the
    parent edges among them."""
    if radius < 0:
        raise errors.IspoError("radius must be >= 0")
    center = store.get_concept(cui).cui
    seen = {center}
    order = [center]
    queue = deque([(center, 0)])
    while queue:
        node, dist = queue.popleft()
        if dist == radius:
            continue
        concept = store.concepts[node]
        neighbors = []
        if concept.parent is not None:
            neighbors.append(concept.parent)
        neighbors.extend(store.children_of(node))
        for nxt in neighbors:
            if nxt not in seen:
                seen.add(nxt)
                order.append(nxt)
                queue.append((nxt, dist + 1))
    edges = sorted((store.concepts[n].parent, n) for n in order
                   if store.concepts[n].parent in seen)
    return NeighborhoodGraph(center=center, nodes=order, edges=edges)
