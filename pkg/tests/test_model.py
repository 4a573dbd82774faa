import pytest

from ispo import errors
from ispo.model import OntologyStore
from ispo.text import normalize
from oracles import code_walk_oracle

from ispo.fixtures import COUGH_CUI


@pytest.fixture
def store():
    s = OntologyStore()
    s.create_concept("Respiratory system symptoms", "en")
    return s


def resp(s):
    return s.roots()[0]


class TestCreateConcept:
    def test_child_code_extends_parent(self, store):
        cui = store.create_concept("cough", "en", resp(store), source="UMLS")
        parent_code = store.concepts[resp(store)].code
        assert store.concepts[cui].code.startswith(parent_code + ".")

    def test_cross_language_synonyms_share_concept(self, store):
        cui = store.create_concept("咳嗽", "zh", resp(store), source="DDTCMS")
        store.add_term(cui, "cough", "en", "UMLS")
        assert store.lookup_by_text("cough") == {cui}
        assert store.lookup_by_text("咳嗽") == {cui}
        assert len(store.atoms_of(cui)) == 2

    def test_empty_label(self, store):
        with pytest.raises(errors.EmptyLabel):
            store.create_concept("", "en", None)
        with pytest.raises(errors.EmptyLabel):
            store.create_concept("   ", "en", None)

    def test_unknown_parent(self, store):
        with pytest.raises(errors.UnknownParent):
            store.create_concept("x", "en", "C99999999")

    def test_duplicate_root_label(self, store):
        with pytest.raises(errors.DuplicateRootLabel):
            store.create_concept("respiratory  SYSTEM symptoms", "en")

    def test_root_codes_are_two_digit_ordinals(self):
        s = OntologyStore()
        a = s.create_concept("one", "en")
        b = s.create_concept("two", "en")
        assert s.concepts[a].code == "01"
        assert s.concepts[b].code == "02"

    def test_new_concept_is_its_own_preferred(self, store):
        cui = store.create_concept("fever", "en", resp(store))
        preferred = store.preferred_term(cui)
        assert preferred.text_raw == "fever"


class TestAddTerm:
    def test_source_code_kept(self, store):
        cui = store.create_concept("cough", "en", resp(store))
        atom = store.add_term(cui, "Cough", "en", "MeSH", "MeSH_D003371")
        assert atom.source_code == "MeSH_D003371"

    def test_idempotent(self, store):
        cui = store.create_concept("cough", "en", resp(store))
        before = store.counts()
        a1 = store.add_term(cui, "Cough", "en", "MeSH", "MeSH_D003371")
        mid = store.counts()
        a2 = store.add_term(cui, "Cough", "en", "MeSH", "MeSH_D003371")
        assert a1.aui == a2.aui
        assert store.counts() == mid
        assert mid["atoms"] == before["atoms"] + 1

    def test_whitespace_collapse_matches_normalizer(self, store):
        # the stored normalized text must equal what normalize() yields
        cui = store.create_concept("cough", "en", resp(store))
        atom = store.add_term(cui, "咳 嗽", "zh", "SCM")
        stored = store.terms[atom.sui].text_normalized
        assert stored == normalize("咳 嗽") == "咳嗽"

    def test_same_text_two_sources_share_sui(self, store):
        cui = store.create_concept("cough", "en", resp(store))
        a1 = store.add_term(cui, "Cough", "en", "MeSH")
        a2 = store.add_term(cui, "cough ", "en", "UMLS")
        assert a1.sui == a2.sui
        assert a1.aui != a2.aui

    def test_errors(self, store):
        cui = store.create_concept("cough", "en", resp(store))
        with pytest.raises(errors.UnknownConcept):
            store.add_term("C99999999", "x", "en", "UMLS")
        with pytest.raises(errors.EmptyText):
            store.add_term(cui, "  ", "en", "UMLS")
        with pytest.raises(errors.UnknownSource):
            store.add_term(cui, "x", "en", "NOT-A-SOURCE")


class TestReparent:
    def setup_tree(self, store):
        a = store.create_concept("a", "en", resp(store))
        b = store.create_concept("b", "en", resp(store))
        x = store.create_concept("x", "en", a)
        return a, b, x

    def test_moved_leaf_gets_new_prefix(self, store):
        a, b, x = self.setup_tree(store)
        store.reparent(x, b)
        assert store.concepts[x].code.startswith(store.concepts[b].code + ".")
        assert store.concepts[x].parent == b

    def test_cycle_guard(self, store):
        a, b, x = self.setup_tree(store)
        with pytest.raises(errors.CycleError):
            store.reparent(a, x)
        with pytest.raises(errors.CycleError):
            store.reparent(a, a)

    def test_subtree_of_three_changes_exactly_three_codes(self, store):
        a, b, x = self.setup_tree(store)
        y = store.create_concept("y", "en", x)
        z = store.create_concept("z", "en", x)
        before = code_walk_oracle(store)
        store.reparent(x, b)
        after = code_walk_oracle(store)
        changed = {cui for cui in before if before[cui] != after[cui]}
        assert changed == {x, y, z}

    def test_codes_match_parent_walk_after_moves(self, store):
        a, b, x = self.setup_tree(store)
        store.create_concept("y", "en", x)
        store.reparent(x, b)
        store.reparent(b, a)
        assert store.code_map() == code_walk_oracle(store)
        assert store.validate() == []

    def test_unknown(self, store):
        with pytest.raises(errors.UnknownConcept):
            store.reparent("C99999999", resp(store))


class TestMerge:
    def test_disjoint_atom_union(self, store):
        keep = store.create_concept("fever", "en", resp(store))
        retire = store.create_concept("pyrexia", "en", resp(store))
        store.add_term(retire, "发热", "zh", "SCM")
        store.merge_concepts(keep, retire)
        texts = {store.terms[a.sui].text_normalized for a in store.atoms_of(keep)}
        assert texts == {"fever", "pyrexia", "发热"}

    def test_duplicate_attribution_collapses(self, store):
        keep = store.create_concept("fever", "en", resp(store))
        retire = store.create_concept("pyrexia", "en", resp(store))
        store.add_term(keep, "febrile", "en", "UMLS")
        store.add_term(retire, "febrile", "en", "UMLS")
        n_before = len(store.atoms)
        store.merge_concepts(keep, retire)
        assert len(store.atoms) == n_before - 1

    def test_forwarding_reads(self, store):
        keep = store.create_concept("fever", "en", resp(store))
        retire = store.create_concept("pyrexia", "en", resp(store))
        store.merge_concepts(keep, retire)
        assert store.get_concept(retire).cui == keep

    def test_mutating_retired_id_fails(self, store):
        keep = store.create_concept("fever", "en", resp(store))
        retire = store.create_concept("pyrexia", "en", resp(store))
        store.merge_concepts(keep, retire)
        with pytest.raises(errors.UnknownConcept):
            store.add_term(retire, "x", "en", "UMLS")
        with pytest.raises(errors.UnknownConcept):
            store.merge_concepts(keep, retire)

    def test_children_rehomed_and_valid(self, store):
        keep = store.create_concept("fever", "en", resp(store))
        retire = store.create_concept("pyrexia", "en", resp(store))
        child = store.create_concept("low fever", "en", retire)
        store.add_context(retire, "definition", "raised body temperature", "UMLS")
        store.merge_concepts(keep, retire)
        assert store.concepts[child].parent == keep
        assert [c.cui for c in store.contexts_of(keep)]
        assert store.validate() == []

    def test_hierarchy_conflict(self, store):
        a = store.create_concept("a", "en", resp(store))
        b = store.create_concept("b", "en", a)
        for keep, retire in ((a, b), (b, a), (a, a)):
            with pytest.raises(errors.HierarchyConflict):
                store.merge_concepts(keep, retire)


class TestPreferredTerms:
    def _corpus(self, counts):
        from ispo.formats import AnnotatedCorpus, CorpusRecord
        return AnnotatedCorpus(name="c", sample_size=10000, records=[
            CorpusRecord(surface=normalize(s), entity_count=n)
            for s, n in counts.items()])

    def test_highest_frequency_wins(self, store):
        cui = store.create_concept("tiredness", "en", resp(store))
        fat = store.add_term(cui, "fatigue", "en", "UMLS")
        updated = store.set_preferred_terms(
            self._corpus({"fatigue": 139, "tiredness": 7}))
        assert updated == 1
        assert store.concepts[cui].preferred_aui == fat.aui

    def test_no_hits_is_noop(self, store):
        cui = store.create_concept("tiredness", "en", resp(store))
        before = store.concepts[cui].preferred_aui
        assert store.set_preferred_terms(self._corpus({"cough": 5})) == 0
        assert store.concepts[cui].preferred_aui == before

    def test_tie_prefers_smaller_text(self, store):
        cui = store.create_concept("zz-sym", "en", resp(store))
        aa = store.add_term(cui, "aa-sym", "en", "UMLS")
        store.set_preferred_terms(self._corpus({"zz-sym": 5, "aa-sym": 5}))
        assert store.concepts[cui].preferred_aui == aa.aui

    def test_tie_prefers_chinese(self, store):
        cui = store.create_concept("zfever", "en", resp(store))
        zh = store.add_term(cui, "发热", "zh", "SCM")
        store.set_preferred_terms(self._corpus({"zfever": 5, "发热": 5}))
        assert store.concepts[cui].preferred_aui == zh.aui


class TestDelete:
    def test_delete_leaf(self, store):
        cui = store.create_concept("temp", "en", resp(store))
        store.delete_concept(cui)
        assert cui not in store.concepts
        assert store.lookup_by_text("temp") == set()
        assert store.validate() == []

    def test_delete_with_children_blocked(self, store):
        a = store.create_concept("a", "en", resp(store))
        store.create_concept("b", "en", a)
        with pytest.raises(errors.HasChildren):
            store.delete_concept(a)

    def test_code_ordinal_not_reused(self, store):
        a = store.create_concept("a", "en", resp(store))
        code_a = store.concepts[a].code
        store.delete_concept(a)
        b = store.create_concept("b", "en", resp(store))
        assert store.concepts[b].code != code_a

    def test_delete_preferred_atom_blocked(self, store):
        cui = store.create_concept("cough", "en", resp(store))
        store.add_term(cui, "tussis", "en", "UMLS")
        with pytest.raises(errors.PreferredAtomDeletion):
            store.delete_atom(store.concepts[cui].preferred_aui)

    def test_delete_secondary_atom(self, store):
        cui = store.create_concept("cough", "en", resp(store))
        atom = store.add_term(cui, "tussis", "en", "UMLS")
        store.delete_atom(atom.aui)
        assert store.lookup_by_text("tussis") == set()
        assert store.validate() == []


class TestValidate:
    def test_fresh_fixtures_clean(self, taxonomy, cough):
        assert taxonomy.validate() == []
        assert cough.validate() == []

    def test_code_prefix_violation(self, store):
        cui = store.create_concept("cough", "en", resp(store))
        store.concepts[cui].code = "05.001"
        kinds = {v.kind for v in store.validate()}
        assert "CodePrefixViolation" in kinds

    def test_dangling_sui(self, store):
        cui = store.create_concept("cough", "en", resp(store))
        atom = store.atoms_of(cui)[0]
        del store.terms[atom.sui]
        kinds = {v.kind for v in store.validate()}
        assert "DanglingReference" in kinds

    def test_cycle_detected(self, store):
        a = store.create_concept("a", "en", resp(store))
        b = store.create_concept("b", "en", a)
        store.concepts[a].parent = b  # corrupt directly
        kinds = {v.kind for v in store.validate()}
        assert "CycleViolation" in kinds

    def test_preferred_atom_must_belong(self, store):
        a = store.create_concept("a", "en", resp(store))
        b = store.create_concept("b", "en", resp(store))
        store.concepts[a].preferred_aui = store.concepts[b].preferred_aui
        kinds = {v.kind for v in store.validate()}
        assert "PreferredAtomViolation" in kinds


class TestRingClosure:
    def test_every_atom_resolvable_by_text(self, cough):
        for atom in cough.atoms.values():
            term = cough.terms[atom.sui]
            hits = cough.lookup_by_text(term.text_normalized, term.language)
            assert atom.cui in hits


def test_depth_convention(taxonomy):
    root = taxonomy.roots()[0]
    assert taxonomy.depth(root) == 1
    child = taxonomy.children_of(taxonomy.roots()[-1])[0]
    assert taxonomy.depth(child) == 2


def test_cough_fixture_identifier(cough):
    assert cough.lookup_by_text("cough") == {COUGH_CUI}
