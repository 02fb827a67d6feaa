import pytest

from matchlab import (
    Matching,
    assortative_market,
    blocking_pairs,
    check_fragment_closure,
    check_trivial_fragment_removal,
    enumerate_matchings,
    find_fragments,
    has_nontrivial_fragment,
    inducing_matchings,
    is_unique_stable,
    nested_fragment_chain,
    random_market,
)
from matchlab.errors import (
    CapExceeded,
    FullSizeSubset,
    ImbalancedMarket,
    PremiseViolated,
    SizeMismatch,
)


class TestInducingMatchings:
    def test_trap3_subset_is_a_fragment(self, trap3):
        got = inducing_matchings(trap3, [0, 1], [0, 1])
        assert len(got) == 1
        assert got[0].pairs() == [(0, 0), (1, 1)]

    def test_cycle2_singleton_is_not(self, cycle2):
        # w0 prefers f1 to f0, so {f0}x{w0} fails the outsider condition
        assert inducing_matchings(cycle2, [0], [0]) == []

    def test_assortative_top_top(self):
        m = assortative_market(3)
        got = inducing_matchings(m, [0], [0])
        assert len(got) == 1 and got[0].pairs() == [(0, 0)]

    def test_errors(self, trap3):
        with pytest.raises(SizeMismatch):
            inducing_matchings(trap3, [0, 1], [0])
        with pytest.raises(SizeMismatch):
            inducing_matchings(trap3, [], [])
        with pytest.raises(FullSizeSubset):
            inducing_matchings(trap3, [0, 1, 2], [0, 1, 2])
        with pytest.raises(ImbalancedMarket):
            inducing_matchings(random_market(2, 3, seed=0), [0], [0])


class TestFindFragments:
    def test_trap3_brute(self, trap3):
        frags = find_fragments(trap3, "brute")
        assert [(f.firms, f.workers, f.trivial) for f in frags] == [((0, 1), (0, 1), False)]

    def test_cycle2_has_none(self, cycle2):
        assert find_fragments(cycle2, "brute") == []

    def test_assortative_nested_all_trivial(self):
        m = assortative_market(3)
        frags = find_fragments(m, "brute")
        assert [(f.firms, f.workers) for f in frags] == [((0,), (0,)), ((0, 1), (0, 1))]
        assert all(f.trivial for f in frags)

    def test_guard(self):
        with pytest.raises(CapExceeded):
            find_fragments(random_market(11, 11, seed=0), "brute")

    def test_closure_equals_brute(self):
        for seed in range(60):
            for n in (4, 5):
                m = random_market(n, n, seed)
                brute = {(f.firms, f.workers, f.trivial) for f in find_fragments(m, "brute")}
                closure = {(f.firms, f.workers, f.trivial) for f in find_fragments(m, "closure")}
                assert brute == closure, (seed, n)

    def test_closure_equals_brute_six(self):
        for seed in range(12):
            m = random_market(6, 6, seed)
            brute = {(f.firms, f.workers, f.trivial) for f in find_fragments(m, "brute")}
            closure = {(f.firms, f.workers, f.trivial) for f in find_fragments(m, "closure")}
            assert brute == closure


class TestNonTrivialFlag:
    def test_examples(self, cycle2, trap3):
        assert has_nontrivial_fragment(trap3)
        assert not has_nontrivial_fragment(cycle2)

    def test_unique_stable_markets_never_have_one(self):
        for seed in range(50):
            m = random_market(4, 4, seed)
            if is_unique_stable(m):
                assert not has_nontrivial_fragment(m)

    def test_against_brute_force(self):
        for seed in range(80):
            m = random_market(4, 4, seed)
            brute = any(not f.trivial for f in find_fragments(m, "brute"))
            assert has_nontrivial_fragment(m) == brute


class TestSizeOneFragments:
    def test_size_one_iff_top_top(self):
        for seed in range(40):
            m = random_market(4, 4, seed)
            frag_singletons = {(f.firms[0], f.workers[0])
                               for f in find_fragments(m, "brute") if f.size == 1}
            top_top = {(f, w) for f in range(4) for w in range(4)
                       if m.firm_prefs[f][0] == w and m.worker_prefs[w][0] == f}
            assert frag_singletons == top_top


class TestFragmentTrap:
    def test_inside_agents_never_block(self, trap3):
        # apply the inducing matching inside arbitrary matchings of the rest
        frag = find_fragments(trap3, "brute")[0]
        inside_f = set(frag.firms)
        inside_w = set(frag.workers)
        inducing = frag.inducing_matchings[0]
        for rest in enumerate_matchings(1, 1):
            fp = list(inducing.firm_partner)
            fp[2] = 2 if rest.firm_partner[0] == 0 else -1
            state = Matching.from_firm_partners(fp, 3)
            for bp in blocking_pairs(trap3, state):
                assert bp.firm not in inside_f
                assert bp.worker not in inside_w


class TestNestedChain:
    def test_assortative_full_chain(self):
        for n in (2, 4, 6):
            chain = nested_fragment_chain(assortative_market(n))
            assert chain == [(i, i) for i in range(n)]

    def test_cycle2_not_nested(self, cycle2):
        assert nested_fragment_chain(cycle2) is None

    def test_full_chain_implies_unique_stable(self):
        hits = 0
        for seed in range(200):
            m = random_market(5, 5, seed)
            chain = nested_fragment_chain(m)
            if chain is not None and len(chain) == 5:
                hits += 1
                assert is_unique_stable(m)
        assert hits > 0  # the property was actually exercised


class TestClosureChecks:
    def test_trap3_fragment_preserved_by_both_stable_matchings(self, trap3):
        report = check_fragment_closure(trap3, "brute")
        assert report.ok and report.fragments_checked == 1 and report.stable_count == 2

    def test_vacuous_when_no_fragments(self, cycle2):
        report = check_fragment_closure(cycle2, "brute")
        assert report.ok and report.fragments_checked == 0

    def test_zero_violations_on_random_markets(self):
        for seed in range(60):
            for n in (4, 5):
                assert check_fragment_closure(random_market(n, n, seed), "brute").ok


class TestTrivialRemoval:
    def test_assortative(self):
        report = check_trivial_fragment_removal(assortative_market(4), "brute")
        assert report.ok and report.fragments_checked >= 1

    def test_premise_violated_on_trap(self, trap3):
        with pytest.raises(PremiseViolated):
            check_trivial_fragment_removal(trap3, "brute")

    def test_zero_violations_on_filtered_random_markets(self):
        checked = 0
        seed = 0
        while checked < 25 and seed < 400:
            m = random_market(4, 4, seed)
            seed += 1
            frags = find_fragments(m, "brute")
            if frags and all(f.trivial for f in frags):
                assert check_trivial_fragment_removal(m, "brute").ok
                checked += 1
        assert checked == 25
