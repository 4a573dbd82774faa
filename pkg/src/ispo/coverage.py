"""Clinical coverage and term-standardization impact over annotated corpora.

Coverage matching is exact on normalized strings: a corpus term counts
as covered when any synonym ring contains it. Entity coverage weights
terms by their entity counts; the banded breakdown groups terms by
occurrence rate (entity count over corpus sample size).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from decimal import Decimal

from . import errors
from .formats import AnnotatedCorpus
from .linking import link_exact
from .metrics import percent, top_category_label
from .model import OntologyStore
from .text import normalize

DEFAULT_MIN_RATE = 0.0001

# occurrence-rate bands: 0.01%-0.1%, 0.1%-0.5%, 0.5%-1%, 1%-5%, 5%-100%
DEFAULT_BANDS = (
    (0.0001, 0.001),
    (0.001, 0.005),
    (0.005, 0.01),
    (0.01, 0.05),
    (0.05, 1.0),
)


@dataclass
class CoverageBand:
    low: float
    high: float
    terms: int
    covered: int
    coverage_pct: Decimal

    def as_dict(self) -> dict:
        return {"low": self.low, "high": self.high, "terms": self.terms,
                "covered": self.covered, "coverage_pct": float(self.coverage_pct)}


@dataclass
class CoverageReport:
    total_terms: int
    covered_terms: int
    total_entities: int
    covered_entities: int
    term_coverage: Decimal    # percent, 2dp
    entity_coverage: Decimal  # percent, 2dp
    per_band: list[CoverageBand] = field(default_factory=list)
    per_category: dict[str, int] = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {
            "total_terms": self.total_terms,
            "covered_terms": self.covered_terms,
            "total_entities": self.total_entities,
            "covered_entities": self.covered_entities,
            "term_coverage_pct": float(self.term_coverage),
            "entity_coverage_pct": float(self.entity_coverage),
            "per_band": [b.as_dict() for b in self.per_band],
            "per_category": dict(self.per_category),
        }


def _normalize_bands(bands, min_rate: float) -> list[tuple[float, float]]:
    """Clip away bands below the rate floor and check the rest partition
    [min_rate, 1] contiguously."""
    kept = [(lo, hi) for lo, hi in bands if hi > min_rate]
    if not kept:
        raise errors.IspoError("no bands at or above min_rate")
    kept[0] = (max(kept[0][0], min_rate), kept[0][1])
    if kept[0][0] != min_rate:
        raise errors.IspoError("bands do not start at min_rate")
    for (lo1, hi1), (lo2, _) in zip(kept, kept[1:]):
        if hi1 != lo2 or hi1 <= lo1:
            raise errors.IspoError("bands must be ascending and contiguous")
    if kept[-1][1] != 1.0 or kept[-1][1] <= kept[-1][0]:
        raise errors.IspoError("last band must end at 1.0")
    return kept


def _band_index(bands, rate: float) -> int:
    for i, (lo, hi) in enumerate(bands):
        if lo <= rate < hi:
            return i
    return len(bands) - 1  # rate at or past the top edge


def coverage_report(corpus: AnnotatedCorpus, store: OntologyStore,
                    min_rate: float = DEFAULT_MIN_RATE,
                    bands=DEFAULT_BANDS) -> CoverageReport:
    """How much of a corpus the synonym rings cover, overall and by band."""
    if corpus.sample_size <= 0 or not corpus.records:
        raise errors.EmptyCorpus(corpus.name)
    band_edges = _normalize_bands(bands, min_rate)

    band_rows = [[0, 0] for _ in band_edges]  # [terms, covered]
    total_terms = covered_terms = 0
    total_entities = covered_entities = 0
    per_category: dict[str, int] = {}

    for record in corpus.records:
        rate = record.entity_count / corpus.sample_size
        if rate < min_rate:
            continue
        total_terms += 1
        total_entities += record.entity_count
        idx = _band_index(band_edges, rate)
        band_rows[idx][0] += 1
        hits = store.lookup_by_text(record.surface)
        if not hits:
            continue
        covered_terms += 1
        covered_entities += record.entity_count
        band_rows[idx][1] += 1
        label = top_category_label(store, min(hits))
        per_category[label] = per_category.get(label, 0) + 1

    if total_terms == 0:
        raise errors.EmptyCorpus(f"{corpus.name}: nothing at or above min_rate")

    per_band = [CoverageBand(low=lo, high=hi, terms=t, covered=c,
                             coverage_pct=percent(c, t) if t else Decimal("0.00"))
                for (lo, hi), (t, c) in zip(band_edges, band_rows)]
    return CoverageReport(
        total_terms=total_terms,
        covered_terms=covered_terms,
        total_entities=total_entities,
        covered_entities=covered_entities,
        term_coverage=percent(covered_terms, total_terms),
        entity_coverage=percent(covered_entities, total_entities),
        per_band=per_band,
        per_category=dict(sorted(per_category.items(), key=lambda kv: (-kv[1], kv[0]))),
    )


@dataclass
class ImpactRow:
    source_term: str
    concept: str
    expanded_terms: list[str]
    pre_count: int
    post_count: int

    def as_dict(self) -> dict:
        return {"source_term": self.source_term, "concept": self.concept,
                "expanded_terms": list(self.expanded_terms),
                "pre_count": self.pre_count, "post_count": self.post_count}


@dataclass
class ImpactReport:
    rows: list[ImpactRow]
    distinct_input_terms: int
    mapped_concepts: int
    dimension_reduction: Decimal  # percent, 2dp
    unmapped: list[str] = field(default_factory=list)
    approximate: bool = False     # counts summed instead of patient sets

    def as_dict(self) -> dict:
        return {
            "rows": [r.as_dict() for r in self.rows],
            "distinct_input_terms": self.distinct_input_terms,
            "mapped_concepts": self.mapped_concepts,
            "dimension_reduction_pct": float(self.dimension_reduction),
            "unmapped": list(self.unmapped),
            "approximate": self.approximate,
        }


def standardization_impact(corpus: AnnotatedCorpus, term_list,
                           store: OntologyStore) -> ImpactReport:
    """Patient reach of terms before and after concept standardization.

    Each input term links exactly to a concept; its expansion is every
    corpus surface resolving to that concept or a descendant. Post
    counts union the expanded terms' patient sets; without patient ids
    anywhere in the corpus, counts are summed instead and the report is
    flagged approximate.
    """
    records = corpus.record_by_surface()
    approximate = not corpus.has_patient_ids()

    inputs: list[str] = []
    seen: set[str] = set()
    for term in term_list:
        norm = normalize(term)
        if norm and norm not in seen:
            seen.add(norm)
            inputs.append(norm)

    rows: list[ImpactRow] = []
    unmapped: list[str] = []
    concepts: set[str] = set()
    for term in inputs:
        cui = link_exact(term, store)
        if cui is None:
            unmapped.append(term)
            continue
        concepts.add(cui)
        subtree = set(store.subtree(cui))
        expanded = [r.surface for r in corpus.records
                    if store.lookup_by_text(r.surface) & subtree]

        base = records.get(term)
        if approximate:
            pre = base.entity_count if base else 0
            post = sum(records[s].entity_count for s in expanded)
        else:
            def patients(surface: str) -> set[str]:
                ids = records[surface].patient_ids
                if ids is None:
                    raise errors.MissingPatientIds(surface)
                return set(ids)

            pre = len(patients(term)) if base else 0
            union: set[str] = set()
            for surface in expanded:
                union |= patients(surface)
            post = len(union)
        rows.append(ImpactRow(source_term=term, concept=cui,
                              expanded_terms=expanded, pre_count=pre,
                              post_count=post))

    distinct = len(inputs)
    reduction = (percent(distinct - len(concepts), distinct)
                 if distinct else Decimal("0.00"))
    return ImpactReport(rows=rows, distinct_input_terms=distinct,
                        mapped_concepts=len(concepts),
                        dimension_reduction=reduction, unmapped=unmapped,
                        approximate=approximate)
