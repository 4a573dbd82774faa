"""Exception types raised across the toolkit.

Every domain failure derives from :class:`IspoError` so callers (CLI,
HTTP service) can map them to exit codes / status codes uniformly.
"""


class IspoError(Exception):
    """Base class for all domain errors."""


# --- concept store ---------------------------------------------------------

class EmptyLabel(IspoError):
    pass


class EmptyText(IspoError):
    pass


class UnknownConcept(IspoError):
    pass


class UnknownParent(IspoError):
    pass


class DuplicateRootLabel(IspoError):
    pass


class CycleError(IspoError):
    pass


class HierarchyConflict(IspoError):
    pass


class UnknownSource(IspoError):
    pass


class UnknownAtom(IspoError):
    pass


class HasChildren(IspoError):
    pass


class PreferredAtomDeletion(IspoError):
    pass


# --- serialization / ingestion ---------------------------------------------

class ParseError(IspoError):
    def __init__(self, line: int, reason: str):
        super().__init__(f"line {line}: {reason}")
        self.line = line
        self.reason = reason


class InvariantViolation(IspoError):
    def __init__(self, violations):
        super().__init__("; ".join(str(v) for v in violations))
        self.violations = list(violations)


class InvalidStore(IspoError):
    pass


class CorruptStore(IspoError):
    pass


class DuplicateId(IspoError):
    pass


class MissingSampleSize(IspoError):
    pass


class NegativeCount(IspoError):
    pass


class DanglingXref(IspoError):
    pass


class DuplicateRuleSource(IspoError):
    pass


class UnknownRuleTarget(IspoError):
    pass


# --- evaluation -------------------------------------------------------------

class EmptyOntology(IspoError):
    pass


class NoLabels(IspoError):
    pass


class EmptyCorpus(IspoError):
    pass


class MissingPatientIds(IspoError):
    pass


# --- entity linking ---------------------------------------------------------

class AmbiguousTerm(IspoError):
    pass


class EmptyGold(IspoError):
    pass


# --- curation ----------------------------------------------------------------

class TooFewAnnotators(IspoError):
    pass


class EmptyTerms(IspoError):
    pass


class UnknownTask(IspoError):
    pass


class NotAssigned(IspoError):
    pass


class AlreadyVoted(IspoError):
    pass


class TaskClosed(IspoError):
    pass


class VotesPending(IspoError):
    pass


class NotResolved(IspoError):
    pass


class UnknownReviewer(IspoError):
    pass


class GapInLog(IspoError):
    pass


class ReplayMismatch(IspoError):
    pass


# --- search / service --------------------------------------------------------

class EmptyQuery(IspoError):
    pass


class UnknownScopeRoot(IspoError):
    pass
