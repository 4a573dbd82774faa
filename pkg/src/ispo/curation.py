"""Multi-annotator mapping workflow.

Terms are dealt into groups and to annotators from a seeded shuffle, so
batches are reproducible and annotator workloads stay balanced. A task
reaches consensus when at least two assignees submit equal proposals;
disagreement escalates to a reviewer, whose override finalizes it.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

from . import errors
from .model import OntologyStore
from .text import detect_language, normalize

OPEN = "Open"
CONSENSUS = "Consensus"
ESCALATED = "Escalated"
FINALIZED = "Finalized"

EXISTING_CONCEPT = "existing_concept"
NEW_CONCEPT = "new_concept"
NOT_A_SYMPTOM = "not_a_symptom"


@dataclass(frozen=True)
class Proposal:
    kind: str
    cui: str | None = None
    label: str | None = None
    parent: str | None = None

    @classmethod
    def existing(cls, cui: str) -> "Proposal":
        return cls(kind=EXISTING_CONCEPT, cui=cui)

    @classmethod
    def new_concept(cls, label: str, parent: str | None) -> "Proposal":
        return cls(kind=NEW_CONCEPT, label=label, parent=parent)

    @classmethod
    def not_a_symptom(cls) -> "Proposal":
        return cls(kind=NOT_A_SYMPTOM)

    def agreement_key(self) -> tuple:
        """Two proposals agree when these keys are equal: concept ids for
        existing concepts, normalized label plus parent for new ones."""
        if self.kind == EXISTING_CONCEPT:
            return (EXISTING_CONCEPT, self.cui or "")
        if self.kind == NEW_CONCEPT:
            return (NEW_CONCEPT, normalize(self.label or ""), self.parent or "")
        return (NOT_A_SYMPTOM,)

    def as_dict(self) -> dict:
        return {"kind": self.kind, "cui": self.cui, "label": self.label,
                "parent": self.parent}

    @classmethod
    def from_dict(cls, data: dict) -> "Proposal":
        kind = data.get("kind")
        if kind not in (EXISTING_CONCEPT, NEW_CONCEPT, NOT_A_SYMPTOM):
            raise errors.IspoError(f"unknown proposal kind {kind!r}")
        return cls(kind=kind, cui=data.get("cui"), label=data.get("label"),
                   parent=data.get("parent"))

    def validate(self, store: OntologyStore):
        if self.kind == EXISTING_CONCEPT:
            if self.cui is None or self.cui not in store.concepts \
                    or store.concepts[self.cui].status != "active":
                raise errors.UnknownConcept(str(self.cui))
        elif self.kind == NEW_CONCEPT:
            if not normalize(self.label or ""):
                raise errors.EmptyLabel(str(self.label))
            if self.parent is not None and (
                    self.parent not in store.concepts
                    or store.concepts[self.parent].status != "active"):
                raise errors.UnknownParent(str(self.parent))


@dataclass
class Vote:
    task_id: str
    annotator: str
    proposal: Proposal
    at: str | None = None

    def as_dict(self) -> dict:
        return {"task_id": self.task_id, "annotator": self.annotator,
                "proposal": self.proposal.as_dict(), "at": self.at}


@dataclass
class MappingTask:
    id: str
    term: str
    group: int
    assignees: list[str]
    votes: list[Vote] = field(default_factory=list)
    state: str = OPEN
    resolved: Proposal | None = None
    applied: dict | None = None

    def as_dict(self) -> dict:
        return {
            "id": self.id, "term": self.term, "group": self.group,
            "assignees": list(self.assignees),
            "votes": [v.as_dict() for v in self.votes],
            "state": self.state,
            "resolved": self.resolved.as_dict() if self.resolved else None,
            "applied": self.applied,
        }


@dataclass
class AuditEvent:
    seq: int
    actor: str
    action: str
    payload: dict
    at: str | None = None

    def as_dict(self) -> dict:
        return {"seq": self.seq, "actor": self.actor, "action": self.action,
                "payload": self.payload, "at": self.at}


class TaskBoard:
    """Holds mapping tasks; mutations go through the owning workspace so
    they land in the audit log."""

    def __init__(self):
        self.tasks: dict[str, MappingTask] = {}
        self._next_task = 1

    def __eq__(self, other):
        if not isinstance(other, TaskBoard):
            return NotImplemented
        return self.tasks == other.tasks and self._next_task == other._next_task

    def get(self, task_id: str) -> MappingTask:
        task = self.tasks.get(task_id)
        if task is None:
            raise errors.UnknownTask(task_id)
        return task

    def create_batch(self, terms, annotators, group_count: int = 5,
                     per_term: int = 3, seed: int = 0) -> list[MappingTask]:
        """Shuffle terms into near-equal groups and deal annotators from a
        seeded cycle, keeping per-annotator workloads within one task."""
        cleaned = [t for t in terms if normalize(t)]
        if not cleaned:
            raise errors.EmptyTerms("no terms to assign")
        pool = list(dict.fromkeys(annotators))
        if per_term < 1 or len(pool) < per_term:
            raise errors.TooFewAnnotators(
                f"need at least {per_term} annotators, have {len(pool)}")
        if group_count < 1:
            raise errors.IspoError("group_count must be >= 1")

        rng = random.Random(seed)
        shuffled = list(cleaned)
        rng.shuffle(shuffled)
        order = rng.sample(pool, len(pool))

        base, extra = divmod(len(shuffled), group_count)
        sizes = [base + 1 if i < extra else base for i in range(group_count)]

        tasks: list[MappingTask] = []
        cursor = 0
        pointer = 0
        for group_index, size in enumerate(sizes, start=1):
            for term in shuffled[cursor:cursor + size]:
                assignees = [order[(pointer + i) % len(order)]
                             for i in range(per_term)]
                pointer = (pointer + per_term) % len(order)
                task = MappingTask(id=f"T{self._next_task:08d}", term=term,
                                   group=group_index, assignees=assignees)
                self._next_task += 1
                self.tasks[task.id] = task
                tasks.append(task)
            cursor += size
        return tasks

    def submit_vote(self, store: OntologyStore, task_id: str, annotator: str,
                    proposal: Proposal, at: str | None = None) -> MappingTask:
        task = self.get(task_id)
        if task.state != OPEN:
            raise errors.TaskClosed(task_id)
        if annotator not in task.assignees:
            raise errors.NotAssigned(f"{annotator} not assigned to {task_id}")
        if any(v.annotator == annotator for v in task.votes):
            raise errors.AlreadyVoted(f"{annotator} already voted on {task_id}")
        proposal.validate(store)
        task.votes.append(Vote(task_id=task_id, annotator=annotator,
                               proposal=proposal, at=at))
        return task

    def resolve(self, task_id: str, force: bool = False) -> MappingTask:
        """Close voting: two or more equal proposals reach consensus,
        otherwise the task escalates for senior review.

        `force` lets an early pair agreement resolve before all votes
        are in; escalation always waits for the full panel.
        """
        task = self.get(task_id)
        if task.state != OPEN:
            raise errors.TaskClosed(task_id)
        tallies: dict[tuple, list[Proposal]] = {}
        for vote in task.votes:
            tallies.setdefault(vote.proposal.agreement_key(), []).append(vote.proposal)
        winner = None
        if tallies:
            key = max(tallies, key=lambda k: (len(tallies[k]), k))
            if len(tallies[key]) >= 2:
                # canonical pick keeps the outcome independent of vote order
                winner = min(tallies[key],
                             key=lambda p: (p.label or "", p.cui or "", p.parent or ""))

        if len(task.votes) < len(task.assignees):
            if force and winner is not None:
                task.state = CONSENSUS
                task.resolved = winner
                return task
            raise errors.VotesPending(
                f"{len(task.votes)}/{len(task.assignees)} votes on {task_id}")

        if winner is not None:
            task.state = CONSENSUS
            task.resolved = winner
        else:
            task.state = ESCALATED
        return task

    def finalize(self, store: OntologyStore, task_id: str, reviewer: str,
                 override: Proposal | None = None) -> MappingTask:
        """Apply the ratified proposal to the store and close the task."""
        task = self.get(task_id)
        if task.state == FINALIZED:
            raise errors.TaskClosed(task_id)
        if task.state == OPEN:
            raise errors.NotResolved(task_id)
        if not isinstance(reviewer, str) or not reviewer.strip():
            raise errors.UnknownReviewer(str(reviewer))
        if task.state == ESCALATED and override is None:
            raise errors.NotResolved(f"{task_id} is escalated; override required")

        proposal = override if override is not None else task.resolved
        proposal.validate(store)
        if proposal.kind == EXISTING_CONCEPT:
            atom = store.add_term(proposal.cui, task.term,
                                  detect_language(task.term), "MANUAL")
            applied = {"action": "add_term", "cui": atom.cui, "aui": atom.aui}
        elif proposal.kind == NEW_CONCEPT:
            cui = store.create_concept(proposal.label,
                                       detect_language(proposal.label),
                                       proposal.parent, "MANUAL")
            atom = store.add_term(cui, task.term, detect_language(task.term),
                                  "MANUAL")
            applied = {"action": "create_concept", "cui": cui, "aui": atom.aui}
        else:
            applied = {"action": "none"}
        task.state = FINALIZED
        task.resolved = proposal
        task.applied = applied
        return task
