import pytest

from matchlab import random_market
from matchlab.cli import main
from matchlab.errors import ConfigError
from matchlab.experiments import (
    ExperimentConfig,
    exact_2x2_nontrivial_fraction,
    run_fragments_freq,
    run_multi_stable,
    run_timing_study,
    run_unique_stable,
    run_verify_equivalence,
    run_walk,
)
from matchlab.textio import market_to_text


def cfg_for(tmp_path, experiment, **kw):
    cfg = ExperimentConfig(experiment=experiment, output_path=str(tmp_path / "out.csv"))
    for k, v in kw.items():
        setattr(cfg, k, v)
    return cfg


class TestConfig:
    def test_unknown_experiment(self, tmp_path):
        with pytest.raises(ConfigError):
            cfg_for(tmp_path, "nope").validate()

    def test_bad_rule(self, tmp_path):
        cfg = cfg_for(tmp_path, "walk", rule="nope")
        with pytest.raises(ConfigError):
            cfg.validate()

    def test_counts_positive(self, tmp_path):
        cfg = cfg_for(tmp_path, "walk", paths_per_start=0)
        with pytest.raises(ConfigError):
            cfg.validate()


class TestFragmentsFreq:
    def test_two_by_two_matches_exhaustive_oracle(self, tmp_path):
        exact = exact_2x2_nontrivial_fraction()
        cfg = cfg_for(tmp_path, "fragments-freq", sizes=[(2, 2)], markets_per_size=300)
        rows = run_fragments_freq(cfg)
        assert rows[0][2] == exact == 0.0

    def test_csv_is_reproducible_byte_for_byte(self, tmp_path):
        cfg = cfg_for(tmp_path, "fragments-freq", sizes=[(3, 3)], markets_per_size=40,
                      master_seed=11)
        run_fragments_freq(cfg)
        first = open(cfg.output_path, "rb").read()
        run_fragments_freq(cfg)
        assert open(cfg.output_path, "rb").read() == first
        assert first.splitlines()[0].startswith(b"# matchlab")


class TestMultiStable:
    @pytest.mark.slow
    def test_desk_scale_fragility_direction(self, tmp_path):
        # at the largest size: both perturbed stable matchings return with
        # probability strictly inside (0,1), leave a positive share of agents
        # ultimately mismatched, and the extremal matching is the more fragile
        cfg = cfg_for(tmp_path, "multi-stable", sizes=[(6, 6), (10, 10)],
                      markets_per_size=200, paths_per_start=100,
                      max_steps=10**7, master_seed=777)
        rows = run_multi_stable(cfg)
        top = {r[1]: r for r in rows if r[0] == 10}
        for r in top.values():
            assert 0.0 < r[2] < 1.0
            assert r[3] > 0.0
        assert top["extremal"][2] <= top["random"][2]

    def test_schema_and_sanity(self, tmp_path):
        cfg = cfg_for(tmp_path, "multi-stable", sizes=[(4, 4)], markets_per_size=12,
                      paths_per_start=40, max_steps=10**5, master_seed=5)
        rows = run_multi_stable(cfg)
        header = open(cfg.output_path).read().splitlines()[1]
        assert header == "n,start_type,return_prob,ult_mismatch,mean_steps,mean_ln_steps,onpath_mismatch,censored_frac"
        kinds = {r[1] for r in rows}
        assert kinds == {"extremal", "random"}
        for r in rows:
            assert 0.0 <= r[2] <= 1.0
            assert r[4] >= 1.0


class TestUniqueStable:
    def test_imbalanced_sizes_and_schema(self, tmp_path):
        cfg = cfg_for(tmp_path, "unique-stable", sizes=[(4, 4), (4, 6)],
                      markets_per_size=10, paths_per_start=20, max_steps=10**5)
        rows = run_unique_stable(cfg)
        assert [(r[0], r[1]) for r in rows] == [(4, 4), (4, 6)]
        header = open(cfg.output_path).read().splitlines()[1]
        assert "onpath_mismatch_workers" in header and "censored_frac" in header


class TestTimingStudy:
    def test_small_run(self, tmp_path):
        cfg = cfg_for(tmp_path, "timing-study", sizes=[(6, 6), (8, 8)],
                      paths_per_start=3, max_steps=10**5, sizes_b=[8])
        rows = run_timing_study(cfg)
        arms = {(r[0], r[1]) for r in rows}
        assert ("a", "assortative") in arms
        assert ("b", "eta") in arms
        assert ("b", "delta-augmented") in arms
        for r in rows:
            if r[0] == "a":
                assert r[9] == 1  # all_absorbed

    def test_deterministic_csv(self, tmp_path):
        cfg = cfg_for(tmp_path, "timing-study", sizes=[(6, 6)], paths_per_start=2,
                      max_steps=10**4, sizes_b=[8], master_seed=3)
        run_timing_study(cfg)
        first = open(cfg.output_path, "rb").read()
        run_timing_study(cfg)
        assert open(cfg.output_path, "rb").read() == first


class TestEtaConstruct:
    def test_writes_verified_market_files(self, tmp_path):
        rc = main(["eta-construct", "--sizes", "6,8", "--eta", "0.2",
                   "--out", str(tmp_path / "eta.csv")])
        assert rc == 0
        from matchlab import check_eta_conditions
        from matchlab.textio import market_from_text
        for n in (6, 8):
            path = tmp_path / f"eta.csv.n{n}.market"
            text = path.read_text()
            assert "#provenance" in text
            market = market_from_text(text)
            assert check_eta_conditions(market, 0.2).passes
        rows = (tmp_path / "eta.csv").read_text().splitlines()
        assert rows[1].startswith("n,eta,threshold,passes")


class TestSurplusSimulation:
    def test_surplus_rules_run_end_to_end(self):
        from matchlab import Matching, simulate
        from matchlab.dynamics import WeightRule
        market = random_market(4, 4, seed=31, with_cardinal=True)
        from matchlab.stable import deferred_acceptance
        ref = deferred_acceptance(market, "firm")
        for kind in ("surplus-total", "surplus-gain"):
            rule = WeightRule.named(kind)
            traj = simulate(market, Matching.empty(4, 4), rule, ref, 10**5, seed=9)
            assert not traj.hit_max_steps
            assert traj.absorbed is not None


class TestWalkRunner:
    def test_rows(self, tmp_path):
        cfg = cfg_for(tmp_path, "walk", paths_per_start=100, max_steps=10**4)
        rows = run_walk(cfg)
        assert [r[0] for r in rows] == [4, 8, 12, 16]
        assert all(0 <= r[5] <= 1 for r in rows)


class TestEquivalenceRunner:
    def test_all_equivalent_small(self, tmp_path):
        cfg = cfg_for(tmp_path, "verify-equivalence", sizes=[(3, 3)], markets_per_size=25)
        rows = run_verify_equivalence(cfg)
        assert rows[0][2] == 1.0


class TestCli:
    def test_walk_subcommand(self, tmp_path):
        out = tmp_path / "walk.csv"
        rc = main(["walk", "--paths", "50", "--max-steps", "5000", "--out", str(out)])
        assert rc == 0 and out.exists()

    def test_config_error_exit_code(self, tmp_path):
        rc = main(["fragments-freq", "--sizes", "3x5", "--out", str(tmp_path / "x.csv")])
        assert rc == 2

    def test_absorption_subcommand(self, tmp_path):
        market_path = tmp_path / "m.market"
        market_path.write_text(market_to_text(random_market(3, 3, seed=4)))
        out = tmp_path / "abs.csv"
        rc = main(["absorption", "--market-file", str(market_path), "--out", str(out)])
        assert rc == 0
        lines = out.read_text().splitlines()
        assert lines[1] == "state_index,stable_index,probability,expected_steps"
        assert len(lines) > 34  # 34 states x at least one stable matching

    def test_absorption_missing_file_flag(self, tmp_path):
        rc = main(["absorption", "--out", str(tmp_path / "abs.csv")])
        assert rc == 2

    def test_config_file_overrides_flags(self, tmp_path):
        conf = tmp_path / "run.conf"
        conf.write_text("paths_per_start=60\nmax_steps=4000\n")
        out = tmp_path / "walk.csv"
        rc = main(["walk", "--paths", "10", "--out", str(out), "--config", str(conf)])
        assert rc == 0
        data = out.read_text().splitlines()[2]
        assert data.split(",")[2] == "60"  # runs column reflects the config file

    def test_config_file_unknown_key(self, tmp_path):
        conf = tmp_path / "run.conf"
        conf.write_text("not_a_key=1\n")
        rc = main(["walk", "--config", str(conf), "--out", str(tmp_path / "w.csv")])
        assert rc == 2

    def test_trace_mode_emits_tsv(self, tmp_path):
        market_path = tmp_path / "m.market"
        market_path.write_text(market_to_text(random_market(4, 4, seed=6)))
        out = tmp_path / "trace.tsv"
        rc = main(["trace", "--market-file", str(market_path), "--max-steps", "50",
                   "--seed", "3", "--out", str(out)])
        assert rc == 0
        lines = out.read_text().splitlines()
        assert lines[0] == "step\tfirm\tworker\tstable_pairs\tblocking_pairs"
        assert len(lines) > 1
        assert all(len(ln.split("\t")) == 5 for ln in lines[1:])

    def test_trace_missing_market_file(self, tmp_path):
        rc = main(["trace", "--market-file", str(tmp_path / "nope.market")])
        assert rc == 2
