"""In-memory symptom-concept store.

Organizes synonyms the way cross-vocabulary metathesauri do: a concept
(CUI) owns a ring of atoms (AUI), each atom tying one normalized term
string (SUI) to the concept with a source-vocabulary attribution. The
hierarchy is a single-parent forest; every concept carries a dotted
classification code that encodes its ancestry path.
"""

from __future__ import annotations

import bisect
from dataclasses import dataclass

from . import errors
from .text import LANGUAGES, normalize

# Source vocabularies recognized in atom attributions: hospital EMR
# collections, contemporary and ancient TCM books, public vocabularies,
# plus MANUAL for curator-entered terms.
KNOWN_SOURCES = frozenset({
    "SDTC", "SXTC", "HBTC-LIVER", "HBTC-COVID",
    "DDTCMS", "SCM", "SSTTCM", "TCMT", "CP", "CTTCM", "CPTCM",
    "MYHC", "LZZC", "LZZN", "YFK", "WRJW", "TFD", "WBTB", "LYTB",
    "YJBY", "BCCY", "BCDQ", "BHYJ", "ZBYHL", "RMSQ",
    "UMLS", "HPO", "SO", "ICD-11", "MeSH",
    "MANUAL",
})

# The twelve top-level categories: eleven anatomical-system groups plus
# the TCM tongue-and-pulse signs group.
TOP_CATEGORIES = (
    "Nervous system symptoms",
    "Respiratory system symptoms",
    "Circulatory system symptoms",
    "Digestive system symptoms",
    "Musculoskeletal system symptoms",
    "Urinary system symptoms",
    "Mental and behavioral symptoms",
    "Skin and integumentary system symptoms",
    "Reproductive system symptoms",
    "General symptoms",
    "Nutrition, metabolism, and development symptoms",
    "TCM tongue and pulse signs",
)

CONTEXT_KINDS = ("definition", "ancient_reference", "chief_complaint")

ACTIVE = "active"
RETIRED = "retired"


@dataclass
class TermString:
    """One unique normalized surface string in one language."""

    sui: str
    text_raw: str
    text_normalized: str
    language: str


@dataclass
class Atom:
    """A term attached to a concept from a specific source vocabulary."""

    aui: str
    cui: str
    sui: str
    source: str
    source_code: str | None = None


@dataclass
class Concept:
    cui: str
    preferred_aui: str | None
    parent: str | None
    code: str
    status: str = ACTIVE
    forward: str | None = None   # merge target, set when retired
    child_counter: int = 1       # next child code ordinal, never decremented


@dataclass
class ContextText:
    id: str
    cui: str
    kind: str
    text: str
    source: str


@dataclass(frozen=True)
class Violation:
    kind: str
    subject: str
    message: str

    def __str__(self):
        return f"{self.kind}[{self.subject}]: {self.message}"


def _seg(ordinal: int, width: int) -> str:
    return str(ordinal).zfill(width)


class OntologyStore:
    """Mutable concept store with incremental synonym-ring indexes.

    Identifier counters are monotone and never reused, so identifiers
    stay stable across deletions and the store replays deterministically
    from an operation log.
    """

    def __init__(self):
        self.concepts: dict[str, Concept] = {}
        self.terms: dict[str, TermString] = {}
        self.atoms: dict[str, Atom] = {}
        self.contexts: dict[str, ContextText] = {}
        self._next = {"cui": 1, "sui": 1, "aui": 1, "ctx": 1}
        self.root_counter = 1
        # derived indexes
        self._children: dict[str, list[str]] = {}
        self._roots: list[str] = []
        self._sui_by_key: dict[tuple[str, str], str] = {}
        self._atom_by_key: dict[tuple[str, str, str], str] = {}
        self._atoms_by_cui: dict[str, list[str]] = {}
        self._contexts_by_cui: dict[str, list[str]] = {}
        self._ring: dict[str, dict[str, int]] = {}  # norm -> cui -> atom count

    # --- identifier allocation -------------------------------------------

    def _alloc(self, kind: str, prefix: str) -> str:
        n = self._next[kind]
        self._next[kind] = n + 1
        return f"{prefix}{n:08d}"

    def __eq__(self, other):
        if not isinstance(other, OntologyStore):
            return NotImplemented
        return (
            self.concepts == other.concepts
            and self.terms == other.terms
            and self.atoms == other.atoms
            and self.contexts == other.contexts
            and self._next == other._next
            and self.root_counter == other.root_counter
        )

    # --- lookups -----------------------------------------------------------

    def get_concept(self, cui: str, follow_forward: bool = True) -> Concept:
        """Fetch a concept; reads resolve retired ids through merge forwarding."""
        seen = set()
        while True:
            concept = self.concepts.get(cui)
            if concept is None:
                raise errors.UnknownConcept(cui)
            if concept.status == ACTIVE or not follow_forward or not concept.forward:
                return concept
            if cui in seen:
                raise errors.CorruptStore(f"forwarding cycle at {cui}")
            seen.add(cui)
            cui = concept.forward

    def _require_active(self, cui: str) -> Concept:
        concept = self.concepts.get(cui)
        if concept is None or concept.status != ACTIVE:
            raise errors.UnknownConcept(cui)
        return concept

    def roots(self) -> list[str]:
        return list(self._roots)

    def children_of(self, cui: str) -> list[str]:
        self._require_active(cui)
        return list(self._children.get(cui, []))

    def atoms_of(self, cui: str) -> list[Atom]:
        return [self.atoms[a] for a in self._atoms_by_cui.get(cui, [])]

    def contexts_of(self, cui: str) -> list[ContextText]:
        return [self.contexts[c] for c in self._contexts_by_cui.get(cui, [])]

    def active_concepts(self) -> list[Concept]:
        return [c for c in self.concepts.values() if c.status == ACTIVE]

    def lookup_by_text(self, text: str, language: str | None = None) -> set[str]:
        """Active concepts whose synonym ring contains the normalized text.

        With a language, restricts to atoms of that language; without,
        matches across languages (clinical input has no language tag).
        """
        norm = normalize(text)
        hits = self._ring.get(norm, {})
        if language is None:
            return set(hits)
        out = set()
        for cui in hits:
            for atom in self.atoms_of(cui):
                term = self.terms[atom.sui]
                if term.text_normalized == norm and term.language == language:
                    out.add(cui)
                    break
        return out

    def depth(self, cui: str) -> int:
        """Distance to the root, with roots at depth 1."""
        concept = self._require_active(cui)
        d = 1
        while concept.parent is not None:
            concept = self.concepts[concept.parent]
            d += 1
        return d

    def top_category_of(self, cui: str) -> Concept:
        """Root ancestor of an active concept."""
        concept = self._require_active(cui)
        while concept.parent is not None:
            concept = self.concepts[concept.parent]
        return concept

    def subtree(self, cui: str) -> list[str]:
        """The concept and all active descendants, preorder."""
        self._require_active(cui)
        out = []
        stack = [cui]
        while stack:
            node = stack.pop()
            out.append(node)
            stack.extend(reversed(self._children.get(node, [])))
        return out

    def is_ancestor(self, ancestor: str, descendant: str) -> bool:
        node = self.concepts.get(descendant)
        while node is not None and node.parent is not None:
            if node.parent == ancestor:
                return True
            node = self.concepts.get(node.parent)
        return False

    def preferred_term(self, cui: str) -> TermString | None:
        concept = self.get_concept(cui)
        if concept.preferred_aui is None:
            return None
        return self.terms[self.atoms[concept.preferred_aui].sui]

    def code_map(self) -> dict[str, str]:
        return {c.cui: c.code for c in self.active_concepts()}

    def counts(self) -> dict[str, int]:
        return {
            "concepts": len(self.active_concepts()),
            "terms": len(self.terms),
            "atoms": len(self.atoms),
            "contexts": len(self.contexts),
        }

    # --- internal index maintenance -----------------------------------------

    def _intern_term(self, text: str, language: str) -> TermString:
        norm = normalize(text)
        key = (norm, language)
        sui = self._sui_by_key.get(key)
        if sui is not None:
            return self.terms[sui]
        sui = self._alloc("sui", "S")
        term = TermString(sui=sui, text_raw=text, text_normalized=norm, language=language)
        self.terms[sui] = term
        self._sui_by_key[key] = term.sui
        return term

    def _ring_add(self, norm: str, cui: str):
        bucket = self._ring.setdefault(norm, {})
        bucket[cui] = bucket.get(cui, 0) + 1

    def _ring_remove(self, norm: str, cui: str):
        bucket = self._ring[norm]
        bucket[cui] -= 1
        if bucket[cui] == 0:
            del bucket[cui]
        if not bucket:
            del self._ring[norm]

    def _attach_atom(self, cui: str, sui: str, source: str, source_code: str | None) -> Atom:
        aui = self._alloc("aui", "A")
        atom = Atom(aui=aui, cui=cui, sui=sui, source=source, source_code=source_code)
        self.atoms[aui] = atom
        self._atom_by_key[(cui, sui, source)] = aui
        self._atoms_by_cui.setdefault(cui, []).append(aui)
        self._ring_add(self.terms[sui].text_normalized, cui)
        return atom

    def _detach_atom(self, aui: str):
        atom = self.atoms.pop(aui)
        del self._atom_by_key[(atom.cui, atom.sui, atom.source)]
        self._atoms_by_cui[atom.cui].remove(aui)
        self._ring_remove(self.terms[atom.sui].text_normalized, atom.cui)
        self._gc_term(atom.sui)

    def _gc_term(self, sui: str):
        if any(a.sui == sui for a in self.atoms.values()):
            return
        term = self.terms.pop(sui)
        del self._sui_by_key[(term.text_normalized, term.language)]

    @staticmethod
    def _check_language(language: str):
        if language not in LANGUAGES:
            raise errors.IspoError(f"unknown language: {language!r}")

    @staticmethod
    def _check_source(source: str):
        if source not in KNOWN_SOURCES:
            raise errors.UnknownSource(source)

    # --- mutations ------------------------------------------------------------

    def create_concept(self, label: str, language: str, parent: str | None = None,
                       source: str = "MANUAL") -> str:
        """New concept with one atom (its preferred term); returns the CUI."""
        self._check_language(language)
        self._check_source(source)
        norm = normalize(label)
        if not norm:
            raise errors.EmptyLabel(label)
        if parent is not None:
            parent_concept = self.concepts.get(parent)
            if parent_concept is None or parent_concept.status != ACTIVE:
                raise errors.UnknownParent(parent)
            code = f"{parent_concept.code}.{_seg(parent_concept.child_counter, 3)}"
            parent_concept.child_counter += 1
        else:
            for root in self._roots:
                if self._ring.get(norm, {}).get(root):
                    raise errors.DuplicateRootLabel(label)
            code = _seg(self.root_counter, 2)
            self.root_counter += 1

        cui = self._alloc("cui", "C")
        term = self._intern_term(label, language)
        concept = Concept(cui=cui, preferred_aui=None, parent=parent, code=code)
        self.concepts[cui] = concept
        atom = self._attach_atom(cui, term.sui, source, None)
        concept.preferred_aui = atom.aui
        if parent is None:
            self._roots.append(cui)
        else:
            self._children.setdefault(parent, []).append(cui)
        return cui

    def add_term(self, cui: str, text: str, language: str, source: str,
                 source_code: str | None = None) -> Atom:
        """Attach a synonym; idempotent for an identical attribution."""
        concept = self._require_active(cui)
        self._check_language(language)
        self._check_source(source)
        if not normalize(text):
            raise errors.EmptyText(text)
        term = self._intern_term(text, language)
        existing = self._atom_by_key.get((concept.cui, term.sui, source))
        if existing is not None:
            return self.atoms[existing]
        return self._attach_atom(concept.cui, term.sui, source, source_code)

    def add_context(self, cui: str, kind: str, text: str, source: str) -> ContextText:
        concept = self._require_active(cui)
        if kind not in CONTEXT_KINDS:
            raise errors.IspoError(f"unknown context kind: {kind!r}")
        self._check_source(source)
        ctx = ContextText(id=self._alloc("ctx", "X"), cui=concept.cui,
                          kind=kind, text=text, source=source)
        self.contexts[ctx.id] = ctx
        self._contexts_by_cui.setdefault(concept.cui, []).append(ctx.id)
        return ctx

    def _recode_subtree(self, cui: str):
        for node in self.subtree(cui):
            concept = self.concepts[node]
            if node == cui:
                continue
            parent = self.concepts[concept.parent]
            concept.code = f"{parent.code}.{concept.code.rsplit('.', 1)[-1]}"

    def reparent(self, cui: str, new_parent: str) -> dict[str, str]:
        """Move a subtree; returns the updated active code map."""
        concept = self._require_active(cui)
        target = self._require_active(new_parent)
        if new_parent == cui or self.is_ancestor(cui, new_parent):
            raise errors.CycleError(f"{new_parent} is within the subtree of {cui}")
        if concept.parent == new_parent:
            return self.code_map()
        if concept.parent is None:
            self._roots.remove(cui)
        else:
            self._children[concept.parent].remove(cui)
        concept.parent = new_parent
        concept.code = f"{target.code}.{_seg(target.child_counter, 3)}"
        target.child_counter += 1
        self._children.setdefault(new_parent, []).append(cui)
        self._recode_subtree(cui)
        return self.code_map()

    def merge_concepts(self, keep: str, retire: str) -> str:
        """Fold one concept into another; the retired id forwards reads."""
        keep_concept = self._require_active(keep)
        retire_concept = self._require_active(retire)
        if keep == retire or self.is_ancestor(keep, retire) or self.is_ancestor(retire, keep):
            raise errors.HierarchyConflict(f"{keep} and {retire} overlap in the hierarchy")

        for aui in list(self._atoms_by_cui.get(retire, [])):
            atom = self.atoms[aui]
            if (keep, atom.sui, atom.source) in self._atom_by_key:
                self._detach_atom(aui)
                continue
            del self._atom_by_key[(retire, atom.sui, atom.source)]
            self._atoms_by_cui[retire].remove(aui)
            self._ring_remove(self.terms[atom.sui].text_normalized, retire)
            atom.cui = keep
            self._atom_by_key[(keep, atom.sui, atom.source)] = aui
            # keep per-concept atom lists in aui order so behavior does not
            # depend on whether the store was built live or reloaded
            bisect.insort(self._atoms_by_cui.setdefault(keep, []), aui)
            self._ring_add(self.terms[atom.sui].text_normalized, keep)

        for ctx_id in self._contexts_by_cui.pop(retire, []):
            self.contexts[ctx_id].cui = keep
            bisect.insort(self._contexts_by_cui.setdefault(keep, []), ctx_id)

        for child in list(self._children.get(retire, [])):
            self.reparent(child, keep)

        if retire_concept.parent is None:
            self._roots.remove(retire)
        else:
            self._children[retire_concept.parent].remove(retire)
        retire_concept.parent = None
        retire_concept.status = RETIRED
        retire_concept.forward = keep
        retire_concept.preferred_aui = None
        self._children.pop(retire, None)
        return keep_concept.cui

    def set_preferred(self, cui: str, aui: str):
        concept = self._require_active(cui)
        atom = self.atoms.get(aui)
        if atom is None or atom.cui != concept.cui:
            raise errors.UnknownAtom(f"{aui} does not belong to {cui}")
        concept.preferred_aui = aui

    def preferred_updates(self, counts: dict[str, int]) -> list[tuple[str, str]]:
        """(cui, aui) pairs where corpus frequency picks a new preferred term.

        Highest entity count wins; ties break Chinese over English, then
        smallest normalized text. Concepts with no counted synonym are
        left alone.
        """
        updates = []
        for concept in self.active_concepts():
            best = None
            best_key = None
            for atom in self.atoms_of(concept.cui):
                term = self.terms[atom.sui]
                n = counts.get(term.text_normalized, 0)
                if n <= 0:
                    continue
                key = (-n, 0 if term.language == "zh" else 1,
                       term.text_normalized, atom.aui)
                if best_key is None or key < best_key:
                    best, best_key = atom, key
            if best is not None and concept.preferred_aui != best.aui:
                updates.append((concept.cui, best.aui))
        return updates

    def set_preferred_terms(self, corpus) -> int:
        """Re-point preferred terms at the highest-frequency corpus synonym;
        returns the number of concepts updated."""
        updates = self.preferred_updates(corpus.count_by_surface())
        for cui, aui in updates:
            self.concepts[cui].preferred_aui = aui
        return len(updates)

    def delete_concept(self, cui: str):
        """Hard-delete a leaf concept; its code ordinal is never reused."""
        concept = self._require_active(cui)
        if self._children.get(cui):
            raise errors.HasChildren(cui)
        if any(c.forward == cui for c in self.concepts.values()):
            raise errors.HierarchyConflict(f"{cui} is a merge-forward target")
        for aui in list(self._atoms_by_cui.get(cui, [])):
            self._detach_atom(aui)
        for ctx_id in self._contexts_by_cui.pop(cui, []):
            del self.contexts[ctx_id]
        if concept.parent is None:
            self._roots.remove(cui)
        else:
            self._children[concept.parent].remove(cui)
        self._atoms_by_cui.pop(cui, None)
        self._children.pop(cui, None)
        del self.concepts[cui]

    def delete_atom(self, aui: str):
        atom = self.atoms.get(aui)
        if atom is None:
            raise errors.UnknownAtom(aui)
        concept = self.concepts[atom.cui]
        if concept.preferred_aui == aui:
            raise errors.PreferredAtomDeletion(
                f"{aui} is the preferred term of {atom.cui}; set another first")
        self._detach_atom(aui)

    # --- validation -----------------------------------------------------------

    def validate(self) -> list[Violation]:
        """Recompute every structural invariant from scratch.

        Indexes are not trusted: checks walk the raw concept/term/atom
        tables so hand-corrupted state surfaces even when the incremental
        indexes are stale.
        """
        out: list[Violation] = []
        active = {c.cui: c for c in self.concepts.values() if c.status == ACTIVE}

        for concept in self.concepts.values():
            if concept.status not in (ACTIVE, RETIRED):
                out.append(Violation("BadStatus", concept.cui, concept.status))
            if concept.status == RETIRED:
                if concept.forward is not None and concept.forward not in self.concepts:
                    out.append(Violation("DanglingReference", concept.cui,
                                         f"forward target {concept.forward} missing"))
                continue
            if concept.parent is not None and concept.parent not in active:
                out.append(Violation("DanglingReference", concept.cui,
                                     f"parent {concept.parent} missing or retired"))

        # acyclicity via parent walks
        for cui in active:
            seen = set()
            node = cui
            while node is not None:
                if node in seen:
                    out.append(Violation("CycleViolation", cui, "parent chain loops"))
                    break
                seen.add(node)
                parent = active.get(node)
                node = parent.parent if parent else None

        # code shape, prefixing, uniqueness
        codes: dict[str, str] = {}
        for concept in self.concepts.values():
            if concept.code in codes:
                out.append(Violation("DuplicateCode", concept.cui,
                                     f"code {concept.code} also on {codes[concept.code]}"))
            else:
                codes[concept.code] = concept.cui
        for concept in active.values():
            if concept.parent is None:
                if "." in concept.code:
                    out.append(Violation("CodePrefixViolation", concept.cui,
                                         f"root carries dotted code {concept.code}"))
            elif concept.parent in active:
                parent_code = active[concept.parent].code
                head, _, tail = concept.code.rpartition(".")
                if head != parent_code or not tail.isdigit():
                    out.append(Violation("CodePrefixViolation", concept.cui,
                                         f"code {concept.code} not under {parent_code}"))

        term_keys: dict[tuple[str, str], str] = {}
        for term in self.terms.values():
            if term.language not in LANGUAGES:
                out.append(Violation("BadLanguage", term.sui, term.language))
            if term.text_normalized != normalize(term.text_raw):
                out.append(Violation("BadNormalization", term.sui, term.text_raw))
            key = (term.text_normalized, term.language)
            if key in term_keys:
                out.append(Violation("DuplicateTerm", term.sui,
                                     f"same normalized text as {term_keys[key]}"))
            else:
                term_keys[key] = term.sui

        atom_keys: dict[tuple[str, str, str], str] = {}
        for atom in self.atoms.values():
            if atom.sui not in self.terms:
                out.append(Violation("DanglingReference", atom.aui,
                                     f"term {atom.sui} missing"))
            if atom.cui not in active:
                out.append(Violation("DanglingReference", atom.aui,
                                     f"concept {atom.cui} missing or retired"))
            if atom.source not in KNOWN_SOURCES:
                out.append(Violation("UnknownSource", atom.aui, atom.source))
            key = (atom.cui, atom.sui, atom.source)
            if key in atom_keys:
                out.append(Violation("DuplicateAtom", atom.aui,
                                     f"same attribution as {atom_keys[key]}"))
            else:
                atom_keys[key] = atom.aui

        for concept in active.values():
            preferred = self.atoms.get(concept.preferred_aui or "")
            if preferred is None or preferred.cui != concept.cui:
                out.append(Violation("PreferredAtomViolation", concept.cui,
                                     f"preferred atom {concept.preferred_aui} not on concept"))

        for ctx in self.contexts.values():
            if ctx.cui not in active:
                out.append(Violation("DanglingReference", ctx.id,
                                     f"concept {ctx.cui} missing or retired"))
            if ctx.kind not in CONTEXT_KINDS:
                out.append(Violation("BadKind", ctx.id, ctx.kind))
        return out
