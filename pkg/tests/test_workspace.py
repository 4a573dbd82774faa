import random

import pytest

from ispo import errors
from ispo.curation import AuditEvent, Proposal
from ispo.fixtures import taxonomy_store
from ispo.workspace import Workspace
from oracles import NaiveStore


def scripted_workspace():
    ws = Workspace()
    root = ws.create_concept("General symptoms", "en", actor="alice")
    fever = ws.create_concept("fever", "en", root, actor="alice")
    ws.add_term(fever, "发热", "zh", "SCM", actor="alice", at="2024-01-01T00:00:00Z")
    ws.add_context(fever, "definition", "raised body temperature", "UMLS")
    chills = ws.create_concept("chills", "en", root)
    ws.reparent(chills, fever)
    tasks = ws.create_batch(["night sweats", "hot flush"], ["a", "b", "c"],
                            per_term=3, seed=5)
    for annotator in tasks[0].assignees:
        ws.submit_vote(tasks[0].id, annotator, Proposal.existing(fever),
                       at="2024-01-02T00:00:00Z")
    ws.resolve_task(tasks[0].id)
    ws.finalize_task(tasks[0].id, "senior")
    return ws


class TestAudit:
    def test_every_mutation_emits_one_event(self):
        ws = Workspace()
        root = ws.create_concept("General symptoms", "en")
        assert ws.seq == 1
        ws.add_term(root, "general", "en", "MANUAL")
        assert ws.seq == 2
        assert [e.action for e in ws.events] == ["create_concept", "add_term"]

    def test_actor_recorded(self):
        ws = Workspace()
        ws.create_concept("General symptoms", "en", actor="alice")
        assert ws.events[0].actor == "alice"

    def test_failed_mutation_emits_nothing(self):
        ws = Workspace()
        with pytest.raises(errors.EmptyLabel):
            ws.create_concept("", "en")
        assert ws.seq == 0 and ws.events == []

    def test_audit_since(self):
        ws = scripted_workspace()
        tail = ws.audit_since(ws.seq - 2)
        assert [e.seq for e in tail] == [ws.seq - 1, ws.seq]


class TestReplay:
    def test_replay_reconstructs_state(self):
        live = scripted_workspace()
        replayed = Workspace.replay(live.events)
        assert replayed.state_equal(live)
        assert replayed.seq == live.seq

    def test_fresh_log_gives_empty_store(self):
        ws = Workspace.replay([])
        assert ws.store.counts()["concepts"] == 0

    def test_gap_detected(self):
        live = scripted_workspace()
        broken = live.events[:2] + live.events[3:]
        with pytest.raises(errors.GapInLog):
            Workspace.replay(broken)

    def test_mismatch_detected(self):
        live = scripted_workspace()
        events = [AuditEvent(seq=1, actor="x", action="add_term",
                             payload={"cui": "C99999999", "text": "x",
                                      "language": "en", "source": "UMLS"})]
        with pytest.raises(errors.ReplayMismatch):
            Workspace.replay(events)

    def test_set_preferred_terms_logged_per_change(self):
        from ispo.formats import AnnotatedCorpus, CorpusRecord
        ws = Workspace()
        root = ws.create_concept("General symptoms", "en")
        cui = ws.create_concept("tiredness", "en", root)
        ws.add_term(cui, "fatigue", "en", "UMLS")
        corpus = AnnotatedCorpus(name="c", sample_size=1000, records=[
            CorpusRecord(surface="fatigue", entity_count=139),
            CorpusRecord(surface="tiredness", entity_count=7)])
        updated = ws.set_preferred_terms(corpus)
        assert updated == 1
        assert ws.events[-1].action == "set_preferred"
        assert Workspace.replay(ws.events).state_equal(ws)


class TestPersistence:
    def test_init_open_roundtrip(self, tmp_path):
        ws = Workspace.init(tmp_path / "store", taxonomy_store())
        again = Workspace.open(tmp_path / "store")
        assert again.state_equal(ws)

    def test_mutations_survive_reopen(self, tmp_path):
        ws = Workspace.init(tmp_path / "store", taxonomy_store())
        root = ws.store.roots()[0]
        cui = ws.create_concept("brand new", "en", root, actor="alice")
        ws.add_term(cui, "newer still", "en", "MANUAL")
        ws.close()

        again = Workspace.open(tmp_path / "store")
        assert again.state_equal(ws)
        assert again.store.lookup_by_text("brand new") == {cui}
        assert again.seq == 2

    def test_open_missing_directory(self, tmp_path):
        with pytest.raises(errors.CorruptStore):
            Workspace.open(tmp_path / "nope")

    def test_corrupt_audit_line(self, tmp_path):
        Workspace.init(tmp_path / "store", taxonomy_store()).close()
        (tmp_path / "store" / "audit.jsonl").write_text("not json\n")
        with pytest.raises(errors.CorruptStore):
            Workspace.open(tmp_path / "store")

    def test_tasks_survive_reopen(self, tmp_path):
        ws = Workspace.init(tmp_path / "store", taxonomy_store())
        tasks = ws.create_batch(["night sweats"], ["a", "b", "c"], seed=3)
        fever = next(iter(ws.store.lookup_by_text("fever")))
        for annotator in tasks[0].assignees:
            ws.submit_vote(tasks[0].id, annotator, Proposal.existing(fever))
        ws.close()
        again = Workspace.open(tmp_path / "store")
        assert again.board.tasks[tasks[0].id].votes == tasks[0].votes


# --- randomized fuzzing against the naive oracle -------------------------------

SOURCES = ["UMLS", "MeSH", "SCM", "MANUAL", "SO"]
WORDS = ["fever", "cough", "咳嗽", "发热", "pain", "ache", "night sweats",
         "乏力", "dizzy", "rash"]


def run_fuzz(seed: int, n_ops: int, ws: Workspace, oracle: NaiveStore) -> int:
    """Drive identical random edits into both stores; returns ops applied."""
    rng = random.Random(seed)
    root = ws.create_concept(f"root-{seed}", "en")
    oracle.create_concept(f"root-{seed}", "en")
    actives = [root]
    applied = 1

    for step in range(n_ops):
        op = rng.choices(
            ["create", "add_term", "reparent", "merge", "delete", "context"],
            weights=[30, 30, 15, 8, 10, 7])[0]
        if op == "create":
            parent = rng.choice(actives)
            label = f"{rng.choice(WORDS)} {seed}-{step}"
            lang = rng.choice(["en", "zh"])
            cui = ws.create_concept(label, lang, parent, rng.choice(SOURCES))
            assert oracle.create_concept(label, lang, parent) == cui
            actives.append(cui)
            applied += 1
        elif op == "add_term":
            cui = rng.choice(actives)
            text = rng.choice(WORDS) + rng.choice(["", " x", "-y"])
            lang = rng.choice(["en", "zh"])
            source = rng.choice(SOURCES)
            atom = ws.add_term(cui, text, lang, source)
            assert oracle.add_term(cui, text, lang, source) == atom.aui
            applied += 1
        elif op == "reparent":
            cui = rng.choice(actives)
            target = rng.choice(actives)
            if cui == target or cui == root or ws.store.is_ancestor(cui, target):
                continue
            ws.reparent(cui, target)
            oracle.reparent(cui, target)
            applied += 1
        elif op == "merge":
            if len(actives) < 3:
                continue
            keep, retire = rng.sample(actives[1:], 2)
            if ws.store.is_ancestor(keep, retire) or ws.store.is_ancestor(retire, keep):
                continue
            ws.merge_concepts(keep, retire)
            oracle.merge(keep, retire)
            actives.remove(retire)
            applied += 1
        elif op == "delete":
            forward_targets = {c.forward for c in ws.store.concepts.values()
                               if c.forward}
            leaves = [c for c in actives if c != root
                      and not ws.store.children_of(c)
                      and c not in forward_targets]
            if not leaves:
                continue
            cui = rng.choice(leaves)
            ws.delete_concept(cui)
            oracle.delete_concept(cui)
            actives.remove(cui)
            applied += 1
        elif op == "context":
            cui = rng.choice(actives)
            ws.add_context(cui, "definition", f"text {step}", "UMLS")
            oracle.add_context(cui, "definition", f"text {step}", "UMLS")
            applied += 1

    assert ws.store.counts() == oracle.counts()
    assert ws.store.code_map() == oracle.code_map()
    for word in WORDS:
        assert ws.store.lookup_by_text(word) == oracle.lookup(word)
    assert ws.store.validate() == []
    return applied


def test_fuzz_against_oracle_small():
    ws = Workspace()
    oracle = NaiveStore()
    for seed in range(5):
        run_fuzz(seed, 80, ws, oracle)
    assert Workspace.replay(ws.events).state_equal(ws)
