"""Single-writer workspace: store + task board + append-only audit log.

Every mutation is dispatched through one applier and recorded as an
audit event whose payload carries all inputs, so replaying the log from
the snapshot reconstructs the exact live state, identifiers included.
Mutations serialize through one lock; readers see committed state only.
"""

from __future__ import annotations

import json
import os
import threading
from pathlib import Path

from . import errors
from .curation import AuditEvent, Proposal, TaskBoard
from .formats import export_canonical, import_canonical
from .model import OntologyStore

SNAPSHOT_FILE = "snapshot.ispo.jsonl"
STATE_FILE = "state.json"
AUDIT_FILE = "audit.jsonl"


class Workspace:
    def __init__(self, store: OntologyStore | None = None,
                 board: TaskBoard | None = None, path: str | Path | None = None):
        self.store = store or OntologyStore()
        self.board = board or TaskBoard()
        self.path = Path(path) if path is not None else None
        self.snapshot_seq = 0
        self.seq = 0
        self.events: list[AuditEvent] = []
        self.lock = threading.RLock()
        self._audit_handle = None

    # --- persistence -----------------------------------------------------------

    @classmethod
    def init(cls, path: str | Path, store: OntologyStore | None = None) -> "Workspace":
        """Create a store directory: snapshot, state marker, empty log."""
        path = Path(path)
        path.mkdir(parents=True, exist_ok=True)
        ws = cls(store=store, path=path)
        (path / SNAPSHOT_FILE).write_bytes(export_canonical(ws.store))
        (path / STATE_FILE).write_text(
            json.dumps({"snapshot_seq": 0}) + "\n", encoding="utf-8")
        (path / AUDIT_FILE).write_text("", encoding="utf-8")
        return ws

    @classmethod
    def open(cls, path: str | Path) -> "Workspace":
        """Load snapshot then replay the audit log on top of it."""
        path = Path(path)
        snapshot = path / SNAPSHOT_FILE
        state_file = path / STATE_FILE
        audit = path / AUDIT_FILE
        if not snapshot.exists() or not state_file.exists():
            raise errors.CorruptStore(f"{path} is not a store directory")
        try:
            state = json.loads(state_file.read_text(encoding="utf-8"))
            store = import_canonical(snapshot.read_bytes())
        except (json.JSONDecodeError, errors.ParseError, errors.InvariantViolation) as exc:
            raise errors.CorruptStore(str(exc)) from exc

        ws = cls(store=store, path=path)
        ws.snapshot_seq = int(state.get("snapshot_seq", 0))
        ws.seq = ws.snapshot_seq
        if audit.exists():
            events = []
            for lineno, line in enumerate(audit.read_text(encoding="utf-8").splitlines(), 1):
                if not line.strip():
                    continue
                try:
                    rec = json.loads(line)
                except json.JSONDecodeError as exc:
                    raise errors.CorruptStore(f"audit line {lineno}: {exc}") from exc
                events.append(AuditEvent(seq=int(rec["seq"]), actor=rec["actor"],
                                         action=rec["action"], payload=rec["payload"],
                                         at=rec.get("at")))
            ws.replay_into(events)
        return ws

    def close(self):
        if self._audit_handle is not None:
            self._audit_handle.close()
            self._audit_handle = None

    def _persist(self, event: AuditEvent):
        if self.path is None:
            return
        if self._audit_handle is None:
            self._audit_handle = (self.path / AUDIT_FILE).open("a", encoding="utf-8")
        self._audit_handle.write(json.dumps(event.as_dict(), ensure_ascii=False) + "\n")
        self._audit_handle.flush()
        os.fsync(self._audit_handle.fileno())

    # --- event dispatch ----------------------------------------------------------

    def _apply(self, action: str, payload: dict):
        store, board = self.store, self.board
        if action == "create_concept":
            return store.create_concept(payload["label"], payload["language"],
                                        payload.get("parent"),
                                        payload.get("source", "MANUAL"))
        if action == "add_term":
            return store.add_term(payload["cui"], payload["text"],
                                  payload["language"], payload["source"],
                                  payload.get("source_code"))
        if action == "add_context":
            return store.add_context(payload["cui"], payload["kind"],
                                     payload["text"], payload["source"])
        if action == "reparent":
            return store.reparent(payload["cui"], payload["new_parent"])
        if action == "merge_concepts":
            return store.merge_concepts(payload["keep"], payload["retire"])
        if action == "delete_concept":
            return store.delete_concept(payload["cui"])
        if action == "delete_atom":
            return store.delete_atom(payload["aui"])
        if action == "set_preferred":
            return store.set_preferred(payload["cui"], payload["aui"])
        if action == "create_batch":
            return board.create_batch(payload["terms"], payload["annotators"],
                                      payload.get("group_count", 5),
                                      payload.get("per_term", 3),
                                      payload.get("seed", 0))
        if action == "vote":
            return board.submit_vote(store, payload["task_id"],
                                     payload["annotator"],
                                     Proposal.from_dict(payload["proposal"]),
                                     payload.get("at"))
        if action == "resolve":
            return board.resolve(payload["task_id"], payload.get("force", False))
        if action == "finalize":
            override = payload.get("override")
            return board.finalize(store, payload["task_id"], payload["reviewer"],
                                  Proposal.from_dict(override) if override else None)
        raise errors.ReplayMismatch(f"unknown action {action!r}")

    def _mutate(self, actor: str, action: str, payload: dict, at: str | None = None):
        with self.lock:
            result = self._apply(action, payload)
            event = AuditEvent(seq=self.seq + 1, actor=actor, action=action,
                               payload=payload, at=at)
            self.seq = event.seq
            self.events.append(event)
            self._persist(event)
            return result

    def replay_into(self, events):
        """Apply a gapless event list on top of the current state."""
        expected = self.seq + 1
        for event in events:
            if event.seq != expected:
                raise errors.GapInLog(f"expected seq {expected}, got {event.seq}")
            try:
                self._apply(event.action, event.payload)
            except errors.IspoError as exc:
                raise errors.ReplayMismatch(
                    f"event {event.seq} ({event.action}): {exc}") from exc
            self.seq = event.seq
            self.events.append(event)
            expected += 1

    @classmethod
    def replay(cls, events, base: "Workspace | None" = None) -> "Workspace":
        ws = base or cls()
        ws.replay_into(events)
        return ws

    def state_equal(self, other: "Workspace") -> bool:
        return self.store == other.store and self.board == other.board

    # --- audited mutations ----------------------------------------------------------

    def create_concept(self, label, language, parent=None, source="MANUAL",
                       actor="system", at=None):
        return self._mutate(actor, "create_concept",
                            {"label": label, "language": language,
                             "parent": parent, "source": source}, at)

    def add_term(self, cui, text, language, source, source_code=None,
                 actor="system", at=None):
        return self._mutate(actor, "add_term",
                            {"cui": cui, "text": text, "language": language,
                             "source": source, "source_code": source_code}, at)

    def add_context(self, cui, kind, text, source, actor="system", at=None):
        return self._mutate(actor, "add_context",
                            {"cui": cui, "kind": kind, "text": text,
                             "source": source}, at)

    def reparent(self, cui, new_parent, actor="system", at=None):
        return self._mutate(actor, "reparent",
                            {"cui": cui, "new_parent": new_parent}, at)

    def merge_concepts(self, keep, retire, actor="system", at=None):
        return self._mutate(actor, "merge_concepts",
                            {"keep": keep, "retire": retire}, at)

    def delete_concept(self, cui, actor="system", at=None):
        return self._mutate(actor, "delete_concept", {"cui": cui}, at)

    def delete_atom(self, aui, actor="system", at=None):
        return self._mutate(actor, "delete_atom", {"aui": aui}, at)

    def set_preferred(self, cui, aui, actor="system", at=None):
        return self._mutate(actor, "set_preferred", {"cui": cui, "aui": aui}, at)

    def set_preferred_terms(self, corpus, actor="system", at=None) -> int:
        """Bulk preferred-term refresh; logged as one event per change."""
        with self.lock:
            updates = self.store.preferred_updates(corpus.count_by_surface())
            for cui, aui in updates:
                self.set_preferred(cui, aui, actor=actor, at=at)
            return len(updates)

    def create_batch(self, terms, annotators, group_count=5, per_term=3,
                     seed=0, actor="system", at=None):
        return self._mutate(actor, "create_batch",
                            {"terms": list(terms), "annotators": list(annotators),
                             "group_count": group_count, "per_term": per_term,
                             "seed": seed}, at)

    def submit_vote(self, task_id, annotator, proposal: Proposal, at=None):
        return self._mutate(annotator, "vote",
                            {"task_id": task_id, "annotator": annotator,
                             "proposal": proposal.as_dict(), "at": at}, at)

    def resolve_task(self, task_id, force=False, actor="system", at=None):
        return self._mutate(actor, "resolve",
                            {"task_id": task_id, "force": force}, at)

    def finalize_task(self, task_id, reviewer, override: Proposal | None = None,
                      at=None):
        return self._mutate(reviewer, "finalize",
                            {"task_id": task_id, "reviewer": reviewer,
                             "override": override.as_dict() if override else None},
                            at)

    def audit_since(self, since: int) -> list[AuditEvent]:
        return [e for e in self.events if e.seq > since]
