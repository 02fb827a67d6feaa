import pytest

from matchlab import (
    assortative_market,
    breakmarriage,
    breakmarriage_path,
    deferred_acceptance,
    enumerate_stable,
    is_stable,
    is_unique_stable,
    random_market,
    satisfy,
)
from matchlab.errors import BreakmarriageUnsuccessful, FirmUnmatched, InputNotStable
from matchlab.stable import BreakStatus

from .conftest import matching


class TestDeferredAcceptance:
    def test_trap3_extremes(self, trap3):
        mu_f = deferred_acceptance(trap3, "firm")
        mu_w = deferred_acceptance(trap3, "worker")
        assert mu_f.pairs() == [(0, 0), (1, 1), (2, 2)]
        assert mu_w.pairs() == [(0, 1), (1, 0), (2, 2)]

    def test_assortative_identity_both_sides(self):
        m = assortative_market(5)
        for side in ("firm", "worker"):
            assert deferred_acceptance(m, side).pairs() == [(i, i) for i in range(5)]

    def test_imbalanced_all_firms_matched(self):
        m = random_market(4, 7, seed=2)
        mu = deferred_acceptance(m, "firm")
        assert mu.n_matched == 4
        assert is_stable(m, mu)

    def test_result_is_stable_on_random_markets(self):
        for seed in range(30):
            m = random_market(5, 5, seed)
            assert is_stable(m, deferred_acceptance(m, "firm"))
            assert is_stable(m, deferred_acceptance(m, "worker"))


class TestUniqueness:
    def test_examples(self, cycle2, trap3):
        assert not is_unique_stable(cycle2)
        assert not is_unique_stable(trap3)
        assert is_unique_stable(assortative_market(4))


class TestBreakmarriage:
    def test_trap3_success_lands_on_worker_optimal(self, trap3):
        mu_f = deferred_acceptance(trap3, "firm")
        out = breakmarriage(trap3, mu_f, 0)
        assert out.status is BreakStatus.SUCCESS
        assert out.result.pairs() == [(0, 1), (1, 0), (2, 2)]
        assert is_stable(trap3, out.result)

    def test_trap3_exhausts_on_last_choice(self, trap3):
        # f2's partner w2 is last on her list: nothing left to propose to
        mu_f = deferred_acceptance(trap3, "firm")
        out = breakmarriage(trap3, mu_f, 2)
        assert out.status is BreakStatus.FIRM_EXHAUSTED
        assert out.result is None

    def test_assortative_rejection_cascade_exhausts(self):
        m = assortative_market(3)
        mu = deferred_acceptance(m, "firm")
        out = breakmarriage(m, mu, 0)
        assert out.status is BreakStatus.FIRM_EXHAUSTED
        # cascade: f0 takes w1 from f1, f1 takes w2 from f2, f2 runs out
        accepted = [(f, w) for f, w, ok in out.proposal_log if ok]
        assert accepted == [(0, 1), (1, 2)]

    def test_unmatched_worker_termination(self):
        # one extra worker nobody holds: first proposal to him ends the run
        m = random_market(3, 4, seed=11)
        mu = deferred_acceptance(m, "firm")
        statuses = {breakmarriage(m, mu, f).status for f in mu.matched_firms()}
        assert statuses <= {BreakStatus.UNMATCHED_WORKER_PROPOSED,
                            BreakStatus.FIRM_EXHAUSTED, BreakStatus.SUCCESS}

    def test_preconditions(self, cycle2):
        with pytest.raises(InputNotStable):
            breakmarriage(cycle2, matching([(0, 1)], 2, 2), 0)
        from matchlab import Market
        m = Market([(0,), (0,)], [(0, 1)])  # 2x1: firm 1 unmatched when stable
        mu = deferred_acceptance(m, "firm")
        with pytest.raises(FirmUnmatched):
            breakmarriage(m, mu, 1)

    def test_success_makes_firms_weakly_worse(self):
        for seed in range(40):
            m = random_market(4, 4, seed)
            for mu in enumerate_stable(m).matchings:
                for f in mu.matched_firms():
                    out = breakmarriage(m, mu, f)
                    if out.status is BreakStatus.SUCCESS:
                        assert out.result.firm_partner != mu.firm_partner
                        assert is_stable(m, out.result)
                        for g in range(4):
                            old = mu.firm_partner[g]
                            new = out.result.firm_partner[g]
                            assert m.firm_rank[g][new] >= m.firm_rank[g][old]


class TestBreakmarriagePath:
    def test_trap3_path(self, trap3):
        mu_f = deferred_acceptance(trap3, "firm")
        path = breakmarriage_path(trap3, mu_f, 0)
        assert [(p.firm, p.worker) for p in path] == [(0, 1), (1, 0)]
        assert all(p.best_for_worker for p in path)

    def test_replay_reaches_result(self, trap3):
        mu_f = deferred_acceptance(trap3, "firm")
        out = breakmarriage(trap3, mu_f, 0)
        path = breakmarriage_path(trap3, mu_f, 0)
        cur = matching([(0, 0), (1, 1), (2, 2)], 3, 3)
        cur.firm_partner[0] = -1
        cur.worker_partner[0] = -1
        for p in path:
            cur = satisfy(trap3, cur, p)
        assert cur.firm_partner == out.result.firm_partner

    def test_paths_are_best_for_worker_on_random_markets(self):
        for seed in range(40):
            m = random_market(5, 5, seed)
            sset = enumerate_stable(m)
            for mu in sset.matchings:
                for f in mu.matched_firms():
                    out = breakmarriage(m, mu, f)
                    if out.status is BreakStatus.SUCCESS:
                        path = breakmarriage_path(m, mu, f)
                        assert all(p.best_for_worker for p in path)

    def test_unsuccessful_raises(self, trap3):
        mu_f = deferred_acceptance(trap3, "firm")
        with pytest.raises(BreakmarriageUnsuccessful):
            breakmarriage_path(trap3, mu_f, 2)


class TestEnumerateStable:
    def test_cycle2(self, cycle2):
        sset = enumerate_stable(cycle2)
        assert len(sset) == 2
        keys = {tuple(mt.firm_partner) for mt in sset.matchings}
        assert keys == {(0, 1), (1, 0)}

    def test_trap3(self, trap3):
        keys = {tuple(mt.firm_partner) for mt in enumerate_stable(trap3).matchings}
        assert keys == {(0, 1, 2), (1, 0, 2)}

    def test_brute_equals_breakmarriage_small(self):
        for seed in range(60):
            m = random_market(5, 5, seed)
            a = {mt.key() for mt in enumerate_stable(m, "breakmarriage").matchings}
            b = {mt.key() for mt in enumerate_stable(m, "brute").matchings}
            assert a == b

    def test_brute_equals_breakmarriage_imbalanced(self):
        for seed in range(60):
            for n, m in ((4, 6), (5, 7)):
                mk = random_market(n, m, seed)
                a = {mt.key() for mt in enumerate_stable(mk, "breakmarriage").matchings}
                b = {mt.key() for mt in enumerate_stable(mk, "brute").matchings}
                assert a == b

    def test_brute_respects_cap(self):
        from matchlab.errors import CapExceeded
        with pytest.raises(CapExceeded):
            enumerate_stable(random_market(8, 8, seed=0), "brute", cap=10**5)

    def test_extremal_indices(self):
        for seed in range(20):
            m = random_market(4, 4, seed)
            sset = enumerate_stable(m)
            mu_f = deferred_acceptance(m, "firm")
            mu_w = deferred_acceptance(m, "worker")
            assert sset.matchings[sset.firm_optimal].firm_partner == mu_f.firm_partner
            assert sset.matchings[sset.worker_optimal].firm_partner == mu_w.firm_partner
            assert sset.firm_optimal == 0


class TestStructuralProperties:
    def test_firm_optimality(self):
        for seed in range(30):
            m = random_market(5, 5, seed)
            sset = enumerate_stable(m)
            mu_f = sset.matchings[sset.firm_optimal]
            for mu in sset.matchings:
                for f in range(5):
                    assert m.firm_rank[f][mu_f.firm_partner[f]] <= m.firm_rank[f][mu.firm_partner[f]]

    def test_opposition_of_interests(self):
        for seed in range(30):
            m = random_market(5, 5, seed)
            sset = enumerate_stable(m).matchings
            for a in sset:
                for b in sset:
                    firms_prefer_a = all(
                        m.firm_rank[f][a.firm_partner[f]] <= m.firm_rank[f][b.firm_partner[f]]
                        for f in range(5))
                    if firms_prefer_a:
                        assert all(
                            m.worker_rank[w][b.worker_partner[w]] <= m.worker_rank[w][a.worker_partner[w]]
                            for w in range(5))

    def test_rural_hospital_on_imbalanced(self):
        for seed in range(30):
            m = random_market(5, 7, seed)
            sset = enumerate_stable(m, "brute")
            unmatched = {tuple(w for w, f in enumerate(mt.worker_partner) if f == -1)
                         for mt in sset.matchings}
            assert len(unmatched) == 1
