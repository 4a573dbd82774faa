"""Small built-in fixture ontologies.

The real terminology content is not distributable, so demos, tests and
the service ship with compact stand-ins: the twelve-category taxonomy
seeded with the tongue/pulse subtree, and a cross-language synonym
fixture around the cough concept.
"""

from __future__ import annotations

from .formats import import_canonical
from .model import TOP_CATEGORIES, OntologyStore

_PULSE_CLASSES = ("Floating", "Deep", "Slow", "Rapid", "Feeble", "Excess", "Unusual")


def taxonomy_store() -> OntologyStore:
    """Twelve top-level categories with the TCM tongue/pulse subtree and a
    few anatomical sub-categories and symptoms."""
    store = OntologyStore()
    roots = {name: store.create_concept(name, "en") for name in TOP_CATEGORIES}

    tcm = roots["TCM tongue and pulse signs"]
    tongue = store.create_concept("Tongue manifestation", "en", tcm)
    quality = store.create_concept("Tongue quality", "en", tongue)
    for name in ("Tongue color", "Tongue shape", "Tongue condition"):
        store.create_concept(name, "en", quality)
    fur = store.create_concept("Tongue fur", "en", tongue)
    for name in ("Fur character", "Fur color"):
        store.create_concept(name, "en", fur)
    store.create_concept("Sublingual vessel", "en", tongue)
    pulse = store.create_concept("Pulse manifestation", "en", tcm)
    for name in _PULSE_CLASSES:
        store.create_concept(f"{name} pulse class", "en", pulse)

    resp = roots["Respiratory system symptoms"]
    cough = store.create_concept("cough", "en", resp, source="UMLS")
    store.add_term(cough, "咳嗽", "zh", "SCM")
    store.add_term(cough, "Cough", "en", "MeSH", "MeSH_D003371")
    store.create_concept("wheezing", "en", resp, source="UMLS")

    nervous = roots["Nervous system symptoms"]
    store.create_concept("headache", "en", nervous, source="UMLS")
    store.create_concept("dizziness", "en", nervous, source="UMLS")

    general = roots["General symptoms"]
    fever = store.create_concept("fever", "en", general, source="UMLS")
    store.add_term(fever, "发热", "zh", "SCM")
    fatigue = store.create_concept("fatigue", "en", general, source="UMLS")
    store.add_term(fatigue, "tiredness", "en", "UMLS")
    store.add_term(fatigue, "乏力", "zh", "SCM")
    return store


def _rec(**fields) -> dict:
    return fields


_FIG2_RECORDS = [
    _rec(type="header", format="ispo-canonical", version=1,
         counters={"cui": 401, "sui": 12, "aui": 13, "ctx": 3}, root_counter=4),
    _rec(type="concept", cui="C00000001", parent=None, code="01",
         preferred_aui="A00000001", status="active", forward=None, child_counter=2),
    _rec(type="concept", cui="C00000002", parent=None, code="02",
         preferred_aui="A00000002", status="active", forward=None, child_counter=2),
    _rec(type="concept", cui="C00000003", parent=None, code="03",
         preferred_aui="A00000003", status="active", forward=None, child_counter=2),
    _rec(type="concept", cui="C00000397", parent="C00000001", code="01.001",
         preferred_aui="A00000004", status="active", forward=None, child_counter=2),
    _rec(type="concept", cui="C00000398", parent="C00000397", code="01.001.001",
         preferred_aui="A00000007", status="active", forward=None, child_counter=1),
    _rec(type="concept", cui="C00000399", parent="C00000002", code="02.001",
         preferred_aui="A00000009", status="active", forward=None, child_counter=1),
    _rec(type="concept", cui="C00000400", parent="C00000003", code="03.001",
         preferred_aui="A00000011", status="active", forward=None, child_counter=1),
    _rec(type="term", sui="S00000001", text="Respiratory system symptoms", language="en"),
    _rec(type="term", sui="S00000002", text="Nervous system symptoms", language="en"),
    _rec(type="term", sui="S00000003", text="Skin and integumentary system symptoms",
         language="en"),
    _rec(type="term", sui="S00000004", text="咳嗽", language="zh"),
    _rec(type="term", sui="S00000005", text="Cough", language="en"),
    _rec(type="term", sui="S00000006", text="干咳", language="zh"),
    _rec(type="term", sui="S00000007", text="dry cough", language="en"),
    _rec(type="term", sui="S00000008", text="Headache", language="en"),
    _rec(type="term", sui="S00000009", text="头痛", language="zh"),
    _rec(type="term", sui="S00000010", text="facial skin pain", language="en"),
    _rec(type="term", sui="S00000011", text="面部皮肤疼痛", language="zh"),
    _rec(type="atom", aui="A00000001", cui="C00000001", sui="S00000001",
         source="MANUAL", source_code=None),
    _rec(type="atom", aui="A00000002", cui="C00000002", sui="S00000002",
         source="MANUAL", source_code=None),
    _rec(type="atom", aui="A00000003", cui="C00000003", sui="S00000003",
         source="MANUAL", source_code=None),
    _rec(type="atom", aui="A00000004", cui="C00000397", sui="S00000004",
         source="SCM", source_code=None),
    _rec(type="atom", aui="A00000005", cui="C00000397", sui="S00000005",
         source="MeSH", source_code="MeSH_D003371"),
    _rec(type="atom", aui="A00000006", cui="C00000397", sui="S00000005",
         source="UMLS", source_code="UMLS_C0010200"),
    _rec(type="atom", aui="A00000007", cui="C00000398", sui="S00000006",
         source="SCM", source_code=None),
    _rec(type="atom", aui="A00000008", cui="C00000398", sui="S00000007",
         source="UMLS", source_code=None),
    _rec(type="atom", aui="A00000009", cui="C00000399", sui="S00000008",
         source="UMLS", source_code=None),
    _rec(type="atom", aui="A00000010", cui="C00000399", sui="S00000009",
         source="SCM", source_code=None),
    _rec(type="atom", aui="A00000011", cui="C00000400", sui="S00000010",
         source="MANUAL", source_code=None),
    _rec(type="atom", aui="A00000012", cui="C00000400", sui="S00000011",
         source="SCM", source_code=None),
    _rec(type="context", id="X00000001", cui="C00000397", kind="definition",
         text="A sudden, forceful expulsion of air from the lungs.", source="UMLS"),
    _rec(type="context", id="X00000002", cui="C00000397", kind="ancient_reference",
         text="咳而上气，喉中水鸡声。", source="TFD"),
]

COUGH_CUI = "C00000397"
DRY_COUGH_CUI = "C00000398"
HEADACHE_CUI = "C00000399"
FACIAL_SKIN_PAIN_CUI = "C00000400"


def cough_canonical() -> bytes:
    """Canonical serialization of the cross-language cough fixture."""
    import json

    lines = [json.dumps(r, ensure_ascii=False, sort_keys=True,
                        separators=(",", ":")) for r in _FIG2_RECORDS]
    return ("\n".join(lines) + "\n").encode("utf-8")


def cough_store() -> OntologyStore:
    """Cough with Chinese and English synonyms across sources, plus the
    headache / facial-skin-pain targets used by compound-term rules."""
    return import_canonical(cough_canonical())
