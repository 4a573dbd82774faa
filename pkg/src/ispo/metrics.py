"""Structural quality metrics and cross-ontology comparisons.

Depth counts roots as level 1. Average depth is taken over leaf nodes
only; average width is the class count divided by the maximum depth.
Printed figures round half-up to two decimals for depths and percents,
one for width.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from decimal import ROUND_HALF_UP, Decimal

from . import errors
from .formats import ExternalVocabulary, XrefSet
from .model import OntologyStore

UNCATEGORIZED = "uncategorized"


def half_up(value, places: int) -> Decimal:
    q = Decimal(1).scaleb(-places)
    return Decimal(value).quantize(q, rounding=ROUND_HALF_UP)


def ratio_half_up(numerator: int, denominator: int, places: int) -> Decimal:
    return half_up(Decimal(numerator) / Decimal(denominator), places)


def percent(numerator: int, denominator: int, places: int = 2) -> Decimal:
    """Half-up percentage at the printed precision."""
    return half_up(Decimal(numerator) * 100 / Decimal(denominator), places)


@dataclass
class StructuralMetrics:
    root_count: int
    class_count: int
    synonym_count: int
    leaf_count: int
    max_depth: int
    avg_depth: Decimal  # over leaves, 2dp
    avg_width: Decimal  # class_count / max_depth, 1dp

    def as_dict(self) -> dict:
        return {
            "root_count": self.root_count,
            "class_count": self.class_count,
            "synonym_count": self.synonym_count,
            "leaf_count": self.leaf_count,
            "max_depth": self.max_depth,
            "avg_depth": float(self.avg_depth),
            "avg_width": float(self.avg_width),
        }

    def as_text(self) -> str:
        rows = [
            ("Root count", self.root_count),
            ("Class count", self.class_count),
            ("Synonym count", self.synonym_count),
            ("Leaf node count", self.leaf_count),
            ("Maximum depth", self.max_depth),
            ("Average depth", self.avg_depth),
            ("Average width", self.avg_width),
        ]
        width = max(len(label) for label, _ in rows)
        return "\n".join(f"{label.ljust(width)}  {value}" for label, value in rows)


def _depths(store: OntologyStore) -> dict[str, int]:
    depths: dict[str, int] = {}
    queue = deque((cui, 1) for cui in store.roots())
    while queue:
        cui, d = queue.popleft()
        depths[cui] = d
        for child in store.children_of(cui):
            queue.append((child, d + 1))
    return depths


def compute_metrics(store: OntologyStore) -> StructuralMetrics:
    actives = store.active_concepts()
    if not actives:
        raise errors.EmptyOntology("no active concepts")
    depths = _depths(store)
    leaves = [c.cui for c in actives if not store.children_of(c.cui)]
    max_depth = max(depths.values())
    return StructuralMetrics(
        root_count=len(store.roots()),
        class_count=len(actives),
        synonym_count=len(store.atoms),
        leaf_count=len(leaves),
        max_depth=max_depth,
        avg_depth=ratio_half_up(sum(depths[c] for c in leaves), len(leaves), 2),
        avg_width=ratio_half_up(len(actives), max_depth, 1),
    )


@dataclass
class CategoryRow:
    count: int
    share: float  # fraction of the distribution total


@dataclass
class CategoryDistribution:
    group_by: str
    total: int
    rows: dict[str, CategoryRow] = field(default_factory=dict)
    source: str | None = None

    def as_dict(self) -> dict:
        return {
            "group_by": self.group_by,
            "source": self.source,
            "total": self.total,
            "rows": {k: {"count": r.count,
                         "share_pct": float(percent(r.count, self.total)) if self.total else 0.0}
                     for k, r in self.rows.items()},
        }


def top_category_label(store: OntologyStore, cui: str) -> str:
    root = store.top_category_of(cui)
    term = store.preferred_term(root.cui)
    return term.text_raw if term else root.cui


def category_distribution(store: OntologyStore, group_by: str = "concept",
                          source: str | None = None) -> CategoryDistribution:
    """Concept counts per top-level category.

    `concept` mode distributes every active concept; `atom_source` mode
    distributes the concepts carrying at least one atom from the given
    source vocabulary.
    """
    if group_by == "concept":
        members = [c.cui for c in store.active_concepts()]
    elif group_by == "atom_source":
        if source is None:
            raise errors.IspoError("atom_source mode needs a source")
        members = [c.cui for c in store.active_concepts()
                   if any(a.source == source for a in store.atoms_of(c.cui))]
    else:
        raise errors.IspoError(f"unknown group_by {group_by!r}")

    counts: dict[str, int] = {}
    for cui in members:
        label = top_category_label(store, cui)
        counts[label] = counts.get(label, 0) + 1
    total = len(members)
    rows = {label: CategoryRow(count=n, share=(n / total if total else 0.0))
            for label, n in sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))}
    return CategoryDistribution(group_by=group_by, total=total, rows=rows, source=source)


@dataclass
class CrossmapReport:
    external_total: int
    mapped: int
    eligible_total: int
    mapped_eligible: int
    external_coverage: float  # fraction in [0, 1]
    eligible_coverage: float
    confusion: dict[str, dict[str, int]] = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {
            "external_total": self.external_total,
            "mapped": self.mapped,
            "eligible_total": self.eligible_total,
            "mapped_eligible": self.mapped_eligible,
            "external_coverage_pct": float(percent(self.mapped, self.external_total))
            if self.external_total else 0.0,
            "eligible_coverage_pct": float(percent(self.mapped_eligible, self.eligible_total))
            if self.eligible_total else 0.0,
            "confusion": self.confusion,
        }


def crossmap_report(store: OntologyStore, external: ExternalVocabulary,
                    xrefs: XrefSet, eligible_types: set[str] | None = None) -> CrossmapReport:
    """Coverage of an external vocabulary plus the category confusion
    matrix over the mapped pairs.

    Eligibility narrows the denominator to concepts of the given type
    labels; an unlabeled vocabulary treats every concept as eligible.
    """
    mapping = xrefs.mapping()
    for external_id in mapping:
        if external_id not in external.concepts:
            raise errors.DanglingXref(external_id)

    labeled = external.labeled()
    if eligible_types is None or not labeled:
        eligible_ids = set(external.concepts)
    else:
        eligible_ids = {c.id for c in labeled if c.type_label in eligible_types}

    confusion: dict[str, dict[str, int]] = {}
    for external_id, cui in mapping.items():
        if cui not in store.concepts:
            raise errors.DanglingXref(f"{external_id} -> {cui}")
        resolved = store.get_concept(cui).cui
        ext_cat = external.top_category(external_id) or UNCATEGORIZED
        ispo_cat = top_category_label(store, resolved)
        confusion.setdefault(ext_cat, {})
        confusion[ext_cat][ispo_cat] = confusion[ext_cat].get(ispo_cat, 0) + 1

    total = len(external.concepts)
    mapped = len(mapping)
    mapped_eligible = len(eligible_ids & set(mapping))
    return CrossmapReport(
        external_total=total,
        mapped=mapped,
        eligible_total=len(eligible_ids),
        mapped_eligible=mapped_eligible,
        external_coverage=(mapped / total if total else 0.0),
        eligible_coverage=(mapped_eligible / len(eligible_ids) if eligible_ids else 0.0),
        confusion=confusion,
    )


@dataclass
class TypeShare:
    count: int
    share: Decimal  # percent of labeled concepts, 2dp


def type_distribution(external: ExternalVocabulary) -> dict[str, TypeShare]:
    """Concept-type audit of an external vocabulary, over labeled concepts."""
    labeled = external.labeled()
    if not labeled:
        raise errors.NoLabels(external.name)
    counts: dict[str, int] = {}
    for concept in labeled:
        counts[concept.type_label] = counts.get(concept.type_label, 0) + 1
    total = len(labeled)
    return {label: TypeShare(count=n, share=percent(n, total))
            for label, n in sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))}
