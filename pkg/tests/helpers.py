"""Constructed fixtures with pinned arithmetic for the evaluation tests."""

from __future__ import annotations

from ispo.formats import AnnotatedCorpus, CorpusRecord, ExternalConcept, ExternalVocabulary
from ispo.model import OntologyStore


def distribute(total: int, n: int) -> list[int]:
    """Split `total` into n positive-ish integers differing by at most 1."""
    base, rem = divmod(total, n)
    return [base + 1] * rem + [base] * (n - rem)


def build_tree(classes: int, max_depth: int) -> OntologyStore:
    """A tree with exactly `classes` active concepts and the given maximum
    depth: one chain pins the depth, everything else hangs off the root."""
    assert 1 <= max_depth <= classes
    store = OntologyStore()
    root = store.create_concept("root", "en")
    node = root
    for i in range(max_depth - 1):
        node = store.create_concept(f"chain{i:04d}", "en", node)
    for i in range(classes - max_depth):
        store.create_concept(f"bulk{i:05d}", "en", root)
    return store


def coverage_fixture(sample_size: int, total_terms: int, covered_terms: int,
                     total_entities: int, covered_entities: int,
                     min_rate: float = 0.0001):
    """Corpus and ontology whose coverage aggregates hit the given totals."""
    covered_counts = distribute(covered_entities, covered_terms)
    uncovered_terms = total_terms - covered_terms
    uncovered_counts = distribute(total_entities - covered_entities,
                                  uncovered_terms) if uncovered_terms else []
    floor = max(1, int(min_rate * sample_size) + 1)
    assert all(c >= floor for c in covered_counts + uncovered_counts), \
        "fixture counts would drop below the rate floor"

    store = OntologyStore()
    root = store.create_concept("General symptoms", "en")
    records = []
    for i, count in enumerate(covered_counts):
        surface = f"cov{i:05d}"
        store.create_concept(surface, "en", root)
        records.append(CorpusRecord(surface=surface, entity_count=count))
    for i, count in enumerate(uncovered_counts):
        records.append(CorpusRecord(surface=f"unk{i:05d}", entity_count=count))
    corpus = AnnotatedCorpus(name="fixture", sample_size=sample_size,
                             records=records)
    return corpus, store


def external_vocabulary(name: str, type_counts: dict[str, int]) -> ExternalVocabulary:
    """Flat external vocabulary with the given per-type concept counts."""
    vocab = ExternalVocabulary(name=name)
    i = 0
    for type_label, count in type_counts.items():
        for _ in range(count):
            cid = f"{name}:{i:06d}"
            vocab.concepts[cid] = ExternalConcept(id=cid, label=f"{name} concept {i}",
                                                  type_label=type_label)
            i += 1
    return vocab


def impact_fixture(n_terms: int, n_concepts: int):
    """Corpus and store where `n_terms` distinct surfaces link onto exactly
    `n_concepts` concepts, every record carrying one distinct patient id."""
    assert n_terms >= n_concepts >= 1
    store = OntologyStore()
    root = store.create_concept("General symptoms", "en")
    surfaces_per_concept = distribute(n_terms, n_concepts)
    term_list = []
    records = []
    serial = 0
    for c, n_surfaces in enumerate(surfaces_per_concept):
        cui = store.create_concept(f"concept{c:05d}", "en", root)
        for s in range(n_surfaces):
            surface = f"variant{c:05d}x{s}"
            store.add_term(cui, surface, "en", "MANUAL")
            term_list.append(surface)
            records.append(CorpusRecord(surface=surface, entity_count=1,
                                        patient_ids=[f"q{serial:06d}"]))
            serial += 1
    corpus = AnnotatedCorpus(name="impact", sample_size=max(n_terms, 1) * 2,
                             records=records)
    return corpus, term_list, store


def fever_fixture():
    """Fever with five variant terms; the patient-set union reaches 1,276
    from a pre-standardization count of 1,130."""
    base = [f"p{i:04d}" for i in range(1, 1131)]        # fever itself
    variants = {
        "intermittent fever": base[0:50] + [f"p{i}" for i in range(1131, 1171)],
        "recurrent fever": base[50:80] + [f"p{i}" for i in range(1171, 1201)],
        "low-grade fever": base[100:120] + [f"p{i}" for i in range(1201, 1251)],
        "subjective fever": base[200:210] + [f"p{i}" for i in range(1251, 1271)],
        "intermittent low-grade fever": base[300:302] + [f"p{i}" for i in range(1271, 1277)],
    }
    store = OntologyStore()
    root = store.create_concept("General symptoms", "en")
    fever = store.create_concept("fever", "en", root)
    for surface in ("intermittent fever", "recurrent fever", "subjective fever"):
        store.add_term(fever, surface, "en", "MANUAL")
    # subordinate concepts: expansion must pull in descendants too
    low = store.create_concept("low-grade fever", "en", fever)
    store.create_concept("intermittent low-grade fever", "en", low)

    records = [CorpusRecord(surface="fever", entity_count=len(base),
                            patient_ids=list(base))]
    for surface, ids in variants.items():
        records.append(CorpusRecord(surface=surface, entity_count=len(ids),
                                    patient_ids=list(ids)))
    corpus = AnnotatedCorpus(name="fever", sample_size=1788, records=records)
    return corpus, store
