import pytest

from ispo import errors
from ispo.browse import neighborhood, search
from ispo.fixtures import COUGH_CUI, DRY_COUGH_CUI
from oracles import neighborhood_oracle, search_oracle


class TestSearch:
    def test_exact_match_first_with_full_ring(self, cough):
        results = search(cough, "cough")
        assert results[0].concept == COUGH_CUI
        assert results[0].exact is True
        texts = {s["text"] for s in results[0].synonyms}
        assert texts == {"咳嗽", "Cough"}
        assert results[0].snippet.startswith("A sudden")
        # substring hit on "dry cough" follows
        assert DRY_COUGH_CUI in [r.concept for r in results]

    def test_chinese_query_reaches_same_concept(self, cough):
        en = {r.concept for r in search(cough, "Cough") if r.exact}
        zh = {r.concept for r in search(cough, "咳嗽") if r.exact}
        assert en == zh == {COUGH_CUI}

    def test_miss_is_empty(self, cough):
        assert search(cough, "zzqx") == []

    def test_empty_query(self, cough):
        with pytest.raises(errors.EmptyQuery):
            search(cough, "   ")

    def test_subtree_scope(self, cough):
        resp_root = cough.concepts[COUGH_CUI].parent
        scoped = search(cough, "pain", scope="subtree", root=resp_root)
        assert scoped == []
        global_hits = search(cough, "pain")
        assert global_hits

    def test_unknown_scope_root(self, cough):
        with pytest.raises(errors.UnknownScopeRoot):
            search(cough, "cough", scope="subtree", root="C99999999")
        with pytest.raises(errors.UnknownScopeRoot):
            search(cough, "cough", scope="subtree", root=None)

    def test_match_kind_reflects_preferred(self, cough):
        results = {r.concept: r for r in search(cough, "咳嗽")}
        assert results[COUGH_CUI].match_kind == "preferred"
        results = {r.concept: r for r in search(cough, "Cough")}
        assert results[COUGH_CUI].match_kind == "synonym"

    @pytest.mark.parametrize("query", ["cough", "咳", "pain", "symptoms", "a"])
    def test_matches_brute_force_scan(self, cough, taxonomy, query):
        for store in (cough, taxonomy):
            got = [r.concept for r in search(store, query)]
            assert got == search_oracle(store, query)

    def test_scoped_matches_brute_force_scan(self, taxonomy):
        root = taxonomy.roots()[-1]  # tongue and pulse subtree
        allowed = set(taxonomy.subtree(root))
        got = [r.concept for r in search(taxonomy, "pulse", scope="subtree",
                                         root=root)]
        assert got == search_oracle(taxonomy, "pulse", allowed=allowed)


class TestNeighborhood:
    def test_radius_zero(self, cough):
        graph = neighborhood(cough, COUGH_CUI, radius=0)
        assert graph.nodes == [COUGH_CUI]
        assert graph.edges == []

    def test_parent_plus_children(self, taxonomy):
        tcm = taxonomy.roots()[-1]
        tongue = taxonomy.children_of(tcm)[0]
        graph = neighborhood(taxonomy, tongue, radius=1)
        # parent + self + 3 children (quality, fur, sublingual vessel)
        assert len(graph.nodes) == 5
        assert set(graph.edges) >= {(tcm, tongue)}

    def test_radius_beyond_diameter_covers_component(self, taxonomy):
        tcm = taxonomy.roots()[-1]
        graph = neighborhood(taxonomy, tcm, radius=50)
        assert set(graph.nodes) == neighborhood_oracle(taxonomy, tcm, 50)
        assert set(graph.nodes) == set(taxonomy.subtree(tcm))

    def test_nodes_match_oracle_at_each_radius(self, taxonomy):
        tcm = taxonomy.roots()[-1]
        tongue = taxonomy.children_of(tcm)[0]
        for radius in range(4):
            graph = neighborhood(taxonomy, tongue, radius=radius)
            assert set(graph.nodes) == neighborhood_oracle(taxonomy, tongue,
                                                           radius)

    def test_unknown_concept(self, cough):
        with pytest.raises(errors.UnknownConcept):
            neighborhood(cough, "C99999999")

    def test_negative_radius(self, cough):
        with pytest.raises(errors.IspoError):
            neighborhood(cough, COUGH_CUI, radius=-1)
