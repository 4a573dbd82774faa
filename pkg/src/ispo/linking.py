"""Three-stage mapping of free-text clinical terms to concept codes.

Stage 1 matches the normalized term exactly against the synonym rings.
Stage 2 scores ranked concept candidates for manual review; the default
scorer is a character-bigram Dice coefficient and is replaceable by any
generator honoring the same interface. Stage 3 applies curated mapping
rules, which also split compound terms into several target concepts and
outrank heuristic candidates in the final result.
"""

from __future__ import annotations

import random
from collections import Counter
from dataclasses import dataclass, field
from typing import Protocol

from . import errors
from .model import OntologyStore
from .text import detect_language, normalize

EXACT = "Exact"
RULE_MAPPED = "RuleMapped"
CANDIDATES = "Candidates"
UNMAPPED = "Unmapped"

# Pads length-1 strings so single-character CJK terms still yield bigrams.
_BOUNDARY = ""


@dataclass(frozen=True)
class MappingRule:
    source: str               # normalized
    targets: tuple[str, ...]  # concept ids, order preserved

    def __init__(self, source: str, targets):
        object.__setattr__(self, "source", source)
        object.__setattr__(self, "targets", tuple(targets))


@dataclass(frozen=True)
class Candidate:
    cui: str
    score: float


@dataclass
class LinkResult:
    source_term: str
    status: str
    targets: list[str] = field(default_factory=list)
    candidates: list[Candidate] = field(default_factory=list)


class CandidateGenerator(Protocol):
    def generate(self, term: str, store: OntologyStore, k: int) -> list[Candidate]:
        ...


def bigrams(s: str) -> Counter:
    """Character-bigram multiset; length-1 strings get boundary pads."""
    if not s:
        return Counter()
    if len(s) == 1:
        s = _BOUNDARY + s + _BOUNDARY
    return Counter(s[i:i + 2] for i in range(len(s) - 1))


def dice(a: str, b: str) -> float:
    """Multiset Dice coefficient over character bigrams, in [0, 1]."""
    ca, cb = bigrams(a), bigrams(b)
    total = sum(ca.values()) + sum(cb.values())
    if total == 0:
        return 0.0
    common = sum((ca & cb).values())
    return 2.0 * common / total


class DiceCandidateGenerator:
    """Deterministic lexical scorer: best bigram-Dice against the
    concept's synonyms in the input term's language."""

    def generate(self, term: str, store: OntologyStore, k: int) -> list[Candidate]:
        norm = normalize(term)
        if not norm:
            return []
        language = detect_language(norm)
        query = bigrams(norm)
        query_total = sum(query.values())
        scored: list[Candidate] = []
        for concept in store.active_concepts():
            best = 0.0
            for atom in store.atoms_of(concept.cui):
                ts = store.terms[atom.sui]
                if ts.language != language:
                    continue
                other = bigrams(ts.text_normalized)
                total = query_total + sum(other.values())
                if total == 0:
                    continue
                score = 2.0 * sum((query & other).values()) / total
                if score > best:
                    best = score
            if best > 0.0:
                scored.append(Candidate(concept.cui, best))
        scored.sort(key=lambda c: (-c.score, c.cui))
        return scored[:k]


def link_exact(term: str, store: OntologyStore) -> str | None:
    """The unique concept whose ring holds the normalized term, if any.

    Two active concepts sharing the string is a data error and raises
    rather than guessing.
    """
    hits = store.lookup_by_text(term)
    if not hits:
        return None
    if len(hits) > 1:
        raise errors.AmbiguousTerm(f"{term!r} names {len(hits)} concepts: "
                                   + ", ".join(sorted(hits)))
    return next(iter(hits))


def generate_candidates(term: str, store: OntologyStore, k: int = 5,
                        generator: CandidateGenerator | None = None) -> list[Candidate]:
    if k < 1:
        raise errors.IspoError("k must be >= 1")
    gen = generator or DiceCandidateGenerator()
    return gen.generate(term, store, k)


def apply_rules(term: str, rules) -> list[str] | None:
    norm = normalize(term)
    for rule in rules:
        if rule.source == norm:
            return list(rule.targets)
    return None


def link(term: str, store: OntologyStore, rules=(), generator=None,
         threshold: float = 0.5, k: int = 5) -> LinkResult:
    """Run the full pipeline on one term.

    Exact matches short-circuit. Otherwise candidates are generated for
    audit; a curated rule, when present, decides the mapping over the
    heuristic scores. Candidates alone never commit targets, they are
    queued for manual review.
    """
    exact = link_exact(term, store)
    if exact is not None:
        return LinkResult(source_term=term, status=EXACT, targets=[exact])

    candidates = generate_candidates(term, store, k=k, generator=generator)

    ruled = apply_rules(term, rules)
    if ruled is not None:
        return LinkResult(source_term=term, status=RULE_MAPPED,
                          targets=ruled, candidates=candidates)
    if candidates and candidates[0].score >= threshold:
        return LinkResult(source_term=term, status=CANDIDATES,
                          candidates=candidates)
    return LinkResult(source_term=term, status=UNMAPPED, candidates=candidates)


@dataclass
class LinkingEvaluation:
    accuracy: float
    train_size: int
    test_size: int
    by_stage: dict[str, dict[str, int]]


def evaluate_linking(gold, store: OntologyStore, split_ratio: float = 0.8,
                     seed: int = 0, generator=None, threshold: float = 0.5,
                     k: int = 5) -> LinkingEvaluation:
    """Hold-out evaluation of the pipeline against gold mappings.

    Shuffles gold deterministically, builds rules from the training
    share, then scores exact + rule + top-candidate predictions on the
    rest by exact set match of the target lists.
    """
    gold = list(gold)
    if not gold:
        raise errors.EmptyGold("no gold mappings")
    rng = random.Random(seed)
    rng.shuffle(gold)
    n_train = int(len(gold) * split_ratio)
    train, test = gold[:n_train], gold[n_train:]

    rules = []
    seen = set()
    for term, targets in train:
        norm = normalize(term)
        if norm in seen:
            continue
        seen.add(norm)
        rules.append(MappingRule(source=norm, targets=list(targets)))

    by_stage = {s: {"total": 0, "correct": 0}
                for s in (EXACT, RULE_MAPPED, CANDIDATES, UNMAPPED)}
    correct = 0
    for term, targets in test:
        result = link(term, store, rules, generator=generator,
                      threshold=threshold, k=k)
        if result.status == CANDIDATES:
            predicted = [result.candidates[0].cui]
        else:
            predicted = result.targets
        ok = set(predicted) == set(targets)
        by_stage[result.status]["total"] += 1
        by_stage[result.status]["correct"] += int(ok)
        correct += int(ok)
    accuracy = correct / len(test) if test else 1.0
    return LinkingEvaluation(accuracy=accuracy, train_size=len(train),
                             test_size=len(test), by_stage=by_stage)
