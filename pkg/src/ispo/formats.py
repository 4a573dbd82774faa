"""Serialization: canonical store format and external-file ingestion.

The canonical format is line-delimited JSON (UTF-8, LF): a header line
carrying the identifier counters, then concepts sorted by CUI, term
strings by SUI, atoms by AUI, and context texts by id. Equal stores
export byte-identical streams, so snapshots diff cleanly.

Ingestion covers an OBO 1.2 subset for external vocabularies, corpus
TSV with entity counts and optional patient ids, curated mapping-rule
TSV, and cross-reference TSV.
"""

from __future__ import annotations

import io
import json
import re
from dataclasses import dataclass, field

from . import errors
from .model import (ACTIVE, RETIRED, Atom, Concept, ContextText, OntologyStore,
                    TermString)
from .text import normalize

FORMAT_NAME = "ispo-canonical"
FORMAT_VERSION = 1

_CUI_RE = re.compile(r"^C\d{8}$")
_SUI_RE = re.compile(r"^S\d{8}$")
_AUI_RE = re.compile(r"^A\d{8}$")
_CTX_RE = re.compile(r"^X\d{8}$")

TYPE_LABELS = (
    "Symptom", "SymptomCategory", "Syndrome", "Disease",
    "PathologyPhysiology", "LaboratoryTest", "OtherDescription",
)

_SUBSET_TO_TYPE = {re.sub(r"[^a-z]", "", t.lower()): t for t in TYPE_LABELS}


def _dump(obj) -> str:
    return json.dumps(obj, ensure_ascii=False, sort_keys=True,
                      separators=(",", ":")) + "\n"


def _lines(stream) -> list[str]:
    if isinstance(stream, bytes):
        stream = stream.decode("utf-8")
    if isinstance(stream, str):
        return stream.splitlines()
    data = stream.read()
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    return data.splitlines()


# --- canonical store format ---------------------------------------------------

def export_canonical(store: OntologyStore) -> bytes:
    """Serialize a valid store; deterministic down to the byte."""
    violations = store.validate()
    if violations:
        raise errors.InvalidStore("; ".join(str(v) for v in violations))

    out = io.StringIO()
    out.write(_dump({
        "type": "header",
        "format": FORMAT_NAME,
        "version": FORMAT_VERSION,
        "counters": dict(store._next),
        "root_counter": store.root_counter,
    }))
    for cui in sorted(store.concepts):
        c = store.concepts[cui]
        out.write(_dump({
            "type": "concept", "cui": c.cui, "parent": c.parent, "code": c.code,
            "preferred_aui": c.preferred_aui, "status": c.status,
            "forward": c.forward, "child_counter": c.child_counter,
        }))
    for sui in sorted(store.terms):
        t = store.terms[sui]
        out.write(_dump({
            "type": "term", "sui": t.sui, "text": t.text_raw,
            "language": t.language,
        }))
    for aui in sorted(store.atoms):
        a = store.atoms[aui]
        out.write(_dump({
            "type": "atom", "aui": a.aui, "cui": a.cui, "sui": a.sui,
            "source": a.source, "source_code": a.source_code,
        }))
    for ctx_id in sorted(store.contexts):
        x = store.contexts[ctx_id]
        out.write(_dump({
            "type": "context", "id": x.id, "cui": x.cui, "kind": x.kind,
            "text": x.text, "source": x.source,
        }))
    return out.getvalue().encode("utf-8")


def _expect(record: dict, lineno: int, *fields: str):
    for f in fields:
        if f not in record:
            raise errors.ParseError(lineno, f"missing field {f!r}")


def import_canonical(stream) -> OntologyStore:
    """Rebuild a store from its canonical serialization."""
    lines = _lines(stream)
    if not lines:
        raise errors.ParseError(1, "empty stream")

    try:
        header = json.loads(lines[0])
    except json.JSONDecodeError as exc:
        raise errors.ParseError(1, f"bad JSON: {exc}") from None
    if not isinstance(header, dict) or header.get("type") != "header":
        raise errors.ParseError(1, "first record must be the header")
    if header.get("format") != FORMAT_NAME or header.get("version") != FORMAT_VERSION:
        raise errors.ParseError(1, "unsupported format or version")
    _expect(header, 1, "counters", "root_counter")

    store = OntologyStore()
    for lineno, raw in enumerate(lines[1:], start=2):
        if not raw.strip():
            raise errors.ParseError(lineno, "blank line")
        try:
            rec = json.loads(raw)
        except json.JSONDecodeError as exc:
            raise errors.ParseError(lineno, f"bad JSON: {exc}") from None
        kind = rec.get("type")
        if kind == "concept":
            _expect(rec, lineno, "cui", "parent", "code", "preferred_aui",
                    "status", "forward", "child_counter")
            if not _CUI_RE.match(rec["cui"]):
                raise errors.ParseError(lineno, f"bad cui {rec['cui']!r}")
            if rec["cui"] in store.concepts:
                raise errors.ParseError(lineno, f"duplicate concept {rec['cui']}")
            store.concepts[rec["cui"]] = Concept(
                cui=rec["cui"], preferred_aui=rec["preferred_aui"],
                parent=rec["parent"], code=rec["code"], status=rec["status"],
                forward=rec["forward"], child_counter=int(rec["child_counter"]))
        elif kind == "term":
            _expect(rec, lineno, "sui", "text", "language")
            if not _SUI_RE.match(rec["sui"]):
                raise errors.ParseError(lineno, f"bad sui {rec['sui']!r}")
            if rec["sui"] in store.terms:
                raise errors.ParseError(lineno, f"duplicate term {rec['sui']}")
            store.terms[rec["sui"]] = TermString(
                sui=rec["sui"], text_raw=rec["text"],
                text_normalized=normalize(rec["text"]), language=rec["language"])
        elif kind == "atom":
            _expect(rec, lineno, "aui", "cui", "sui", "source", "source_code")
            if not _AUI_RE.match(rec["aui"]):
                raise errors.ParseError(lineno, f"bad aui {rec['aui']!r}")
            if rec["aui"] in store.atoms:
                raise errors.ParseError(lineno, f"duplicate atom {rec['aui']}")
            store.atoms[rec["aui"]] = Atom(
                aui=rec["aui"], cui=rec["cui"], sui=rec["sui"],
                source=rec["source"], source_code=rec["source_code"])
        elif kind == "context":
            _expect(rec, lineno, "id", "cui", "kind", "text", "source")
            if not _CTX_RE.match(rec["id"]):
                raise errors.ParseError(lineno, f"bad context id {rec['id']!r}")
            if rec["id"] in store.contexts:
                raise errors.ParseError(lineno, f"duplicate context {rec['id']}")
            store.contexts[rec["id"]] = ContextText(
                id=rec["id"], cui=rec["cui"], kind=rec["kind"],
                text=rec["text"], source=rec["source"])
        elif kind == "header":
            raise errors.ParseError(lineno, "second header record")
        else:
            raise errors.ParseError(lineno, f"unknown record type {kind!r}")

    store._next = {k: int(v) for k, v in header["counters"].items()}
    store.root_counter = int(header["root_counter"])
    _rebuild_indexes(store)

    violations = store.validate()
    for prefix, table, counter in (("C", store.concepts, "cui"),
                                   ("S", store.terms, "sui"),
                                   ("A", store.atoms, "aui"),
                                   ("X", store.contexts, "ctx")):
        used = max((int(k[1:]) for k in table), default=0)
        if store._next.get(counter, 0) <= used:
            violations.append(
                f"counter {counter}={store._next.get(counter)} not past {prefix}{used:08d}")
    if violations:
        raise errors.InvariantViolation(violations)
    return store


def _rebuild_indexes(store: OntologyStore):
    store._children = {}
    store._roots = []
    store._sui_by_key = {}
    store._atom_by_key = {}
    store._atoms_by_cui = {}
    store._contexts_by_cui = {}
    store._ring = {}

    def last_ordinal(code: str) -> int:
        tail = code.rsplit(".", 1)[-1]
        return int(tail) if tail.isdigit() else 0

    actives = [c for c in store.concepts.values() if c.status == ACTIVE]
    store._roots = [c.cui for c in sorted(
        (c for c in actives if c.parent is None), key=lambda c: last_ordinal(c.code))]
    by_parent: dict[str, list[Concept]] = {}
    for c in actives:
        if c.parent is not None:
            by_parent.setdefault(c.parent, []).append(c)
    for parent, kids in by_parent.items():
        store._children[parent] = [
            k.cui for k in sorted(kids, key=lambda c: last_ordinal(c.code))]
    for term in store.terms.values():
        store._sui_by_key[(term.text_normalized, term.language)] = term.sui
    for aui in sorted(store.atoms):
        atom = store.atoms[aui]
        store._atom_by_key[(atom.cui, atom.sui, atom.source)] = aui
        store._atoms_by_cui.setdefault(atom.cui, []).append(aui)
        term = store.terms.get(atom.sui)
        if term is not None:
            store._ring_add(term.text_normalized, atom.cui)
    for ctx_id in sorted(store.contexts):
        ctx = store.contexts[ctx_id]
        store._contexts_by_cui.setdefault(ctx.cui, []).append(ctx_id)


# --- external vocabularies (OBO subset) ---------------------------------------

@dataclass
class ExternalConcept:
    id: str
    label: str
    synonyms: list[str] = field(default_factory=list)
    parents: list[str] = field(default_factory=list)
    type_label: str | None = None
    category: str | None = None


@dataclass
class ExternalVocabulary:
    name: str
    concepts: dict[str, ExternalConcept] = field(default_factory=dict)

    def __len__(self):
        return len(self.concepts)

    def dangling_parents(self) -> set[str]:
        return {p for c in self.concepts.values() for p in c.parents
                if p not in self.concepts}

    def top_category(self, concept_id: str) -> str | None:
        """Label of the top-level ancestor, following first parents.

        Roots and concepts whose parent chain dangles have no category
        unless one was assigned explicitly.
        """
        concept = self.concepts[concept_id]
        if concept.category is not None:
            return concept.category
        if not concept.parents:
            return None
        seen = {concept_id}
        node = concept
        while node.parents:
            parent_id = node.parents[0]
            if parent_id in seen or parent_id not in self.concepts:
                return None
            seen.add(parent_id)
            node = self.concepts[parent_id]
        return node.label

    def labeled(self) -> list[ExternalConcept]:
        return [c for c in self.concepts.values() if c.type_label is not None]


_SYNONYM_RE = re.compile(r'^\s*"(.*?)(?<!\\)"')


def import_obo_subset(stream, name: str = "obo") -> ExternalVocabulary:
    """Parse `[Term]` stanzas: id, name, synonyms, is_a parents.

    Obsolete stanzas are skipped, unknown tags ignored; a `subset:` tag
    naming one of the concept-type labels becomes the type annotation.
    Insensitive to tag order and to CRLF line endings.
    """
    vocab = ExternalVocabulary(name=name)
    stanza: dict | None = None
    stanza_line = 0
    in_term = False

    def finish():
        nonlocal stanza
        if stanza is None or stanza.get("obsolete"):
            stanza = None
            return
        if "id" not in stanza:
            raise errors.ParseError(stanza_line, "[Term] stanza without id")
        if "name" not in stanza:
            raise errors.ParseError(stanza_line, f"term {stanza['id']} without name")
        if stanza["id"] in vocab.concepts:
            raise errors.DuplicateId(stanza["id"])
        vocab.concepts[stanza["id"]] = ExternalConcept(
            id=stanza["id"], label=stanza["name"],
            synonyms=stanza.get("synonyms", []),
            parents=stanza.get("parents", []),
            type_label=stanza.get("type_label"))
        stanza = None

    for lineno, raw in enumerate(_lines(stream), start=1):
        line = raw.rstrip("\r").strip()
        if not line or line.startswith("!"):
            continue
        if line.startswith("["):
            finish()
            in_term = line == "[Term]"
            if in_term:
                stanza = {}
                stanza_line = lineno
            continue
        if not in_term or stanza is None:
            continue
        tag, sep, value = line.partition(":")
        if not sep:
            raise errors.ParseError(lineno, f"tag line without colon: {line!r}")
        tag = tag.strip()
        value = value.strip()
        if tag == "id":
            stanza["id"] = value
        elif tag == "name":
            stanza["name"] = value
        elif tag == "synonym":
            m = _SYNONYM_RE.match(value)
            if not m:
                raise errors.ParseError(lineno, f"unquoted synonym: {value!r}")
            stanza.setdefault("synonyms", []).append(m.group(1))
        elif tag == "is_a":
            target = value.split("!", 1)[0].strip()
            if target:
                stanza.setdefault("parents", []).append(target)
        elif tag == "is_obsolete":
            if value.split()[0].lower() == "true":
                stanza["obsolete"] = True
        elif tag == "subset":
            key = re.sub(r"[^a-z]", "", value.lower())
            if key in _SUBSET_TO_TYPE:
                stanza["type_label"] = _SUBSET_TO_TYPE[key]
        # anything else: ignored
    finish()
    return vocab


# --- annotated corpora ---------------------------------------------------------

@dataclass
class CorpusRecord:
    surface: str
    entity_count: int
    patient_ids: list[str] | None = None


@dataclass
class AnnotatedCorpus:
    name: str
    sample_size: int
    records: list[CorpusRecord] = field(default_factory=list)

    def count_by_surface(self) -> dict[str, int]:
        return {r.surface: r.entity_count for r in self.records}

    def record_by_surface(self) -> dict[str, CorpusRecord]:
        return {r.surface: r for r in self.records}

    def total_entities(self) -> int:
        return sum(r.entity_count for r in self.records)

    def has_patient_ids(self) -> bool:
        return any(r.patient_ids is not None for r in self.records)


_CORPUS_HEADER = ("surface", "entity_count")


def import_corpus(stream, name: str = "corpus") -> AnnotatedCorpus:
    """Read corpus TSV: `surface<TAB>entity_count[<TAB>patient_ids]`.

    Needs a `#sample_size=N` comment line. Surfaces are normalized;
    duplicate surfaces merge by summing counts and unioning patient ids,
    so concatenated files import to summed counts. Repeated header and
    sample-size lines are tolerated for the same reason.
    """
    sample_size: int | None = None
    merged: dict[str, CorpusRecord] = {}
    saw_header = False

    for lineno, raw in enumerate(_lines(stream), start=1):
        line = raw.rstrip("\r")
        if not line.strip():
            continue
        if line.startswith("#"):
            m = re.match(r"#\s*sample_size\s*=\s*(\d+)\s*$", line)
            if m:
                value = int(m.group(1))
                if value <= 0:
                    raise errors.ParseError(lineno, "sample_size must be positive")
                if sample_size is not None and sample_size != value:
                    raise errors.ParseError(lineno, "conflicting sample_size")
                sample_size = value
            continue
        cells = line.split("\t")
        if tuple(c.strip() for c in cells[:2]) == _CORPUS_HEADER:
            saw_header = True
            continue
        if not saw_header:
            raise errors.ParseError(lineno, "data before header row")
        if len(cells) not in (2, 3):
            raise errors.ParseError(lineno, f"expected 2 or 3 columns, got {len(cells)}")
        surface = normalize(cells[0])
        if not surface:
            raise errors.ParseError(lineno, "empty surface")
        try:
            count = int(cells[1])
        except ValueError:
            raise errors.ParseError(lineno, f"bad entity_count {cells[1]!r}") from None
        if count < 0:
            raise errors.NegativeCount(f"line {lineno}: {cells[0]!r}")
        patient_ids = None
        if len(cells) == 3 and cells[2].strip():
            patient_ids = [p for p in cells[2].strip().split("|") if p]

        record = merged.get(surface)
        if record is None:
            merged[surface] = CorpusRecord(surface, count,
                                           sorted(set(patient_ids)) if patient_ids else patient_ids)
        else:
            record.entity_count += count
            if patient_ids:
                record.patient_ids = sorted(set(record.patient_ids or []) | set(patient_ids))

    if sample_size is None:
        raise errors.MissingSampleSize(name)
    for record in merged.values():
        if record.patient_ids is not None and len(set(record.patient_ids)) > sample_size:
            raise errors.ParseError(0, f"{record.surface!r} has more patients than sample_size")
    return AnnotatedCorpus(name=name, sample_size=sample_size,
                           records=list(merged.values()))


# --- cross references -----------------------------------------------------------

@dataclass(frozen=True)
class XrefPair:
    external_id: str
    cui: str


@dataclass
class XrefSet:
    pairs: list[XrefPair] = field(default_factory=list)

    def mapping(self) -> dict[str, str]:
        return {p.external_id: p.cui for p in self.pairs}


def import_xrefs(stream) -> XrefSet:
    """Read xref TSV: `external_id<TAB>cui`; one cui per external id."""
    seen: dict[str, str] = {}
    pairs: list[XrefPair] = []
    for lineno, raw in enumerate(_lines(stream), start=1):
        line = raw.rstrip("\r")
        if not line.strip() or line.startswith("#"):
            continue
        cells = line.split("\t")
        if len(cells) != 2:
            raise errors.ParseError(lineno, f"expected 2 columns, got {len(cells)}")
        external_id, cui = cells[0].strip(), cells[1].strip()
        if not _CUI_RE.match(cui):
            raise errors.ParseError(lineno, f"bad cui {cui!r}")
        if external_id in seen:
            if seen[external_id] != cui:
                raise errors.ParseError(lineno, f"{external_id} mapped to two cuis")
            continue
        seen[external_id] = cui
        pairs.append(XrefPair(external_id, cui))
    return XrefSet(pairs)


def load_rules(stream, store: OntologyStore):
    """Read rule TSV: `source<TAB>target1|target2|...`.

    Targets may be concept ids or term strings; strings resolve through
    exact lookup against the store at load time.
    """
    from .linking import MappingRule, link_exact

    rules: list[MappingRule] = []
    seen: set[str] = set()
    for lineno, raw in enumerate(_lines(stream), start=1):
        line = raw.rstrip("\r")
        if not line.strip() or line.startswith("#"):
            continue
        cells = line.split("\t")
        if len(cells) != 2:
            raise errors.ParseError(lineno, f"expected 2 columns, got {len(cells)}")
        source = normalize(cells[0])
        if not source:
            raise errors.ParseError(lineno, "empty rule source")
        if source in seen:
            raise errors.DuplicateRuleSource(cells[0])
        seen.add(source)
        targets: list[str] = []
        for part in cells[1].split("|"):
            part = part.strip()
            if not part:
                continue
            if _CUI_RE.match(part):
                if part not in store.concepts:
                    raise errors.UnknownRuleTarget(part)
                targets.append(store.get_concept(part).cui)
            else:
                cui = link_exact(part, store)
                if cui is None:
                    raise errors.UnknownRuleTarget(part)
                targets.append(cui)
        if not targets:
            raise errors.ParseError(lineno, "rule without targets")
        rules.append(MappingRule(source=source, targets=targets))
    return rules
