"""Seeded experiment runners emitting reproducible CSV datasets.

Every runner derives all randomness from the config's master seed through
the counter RNG (disjoint streams per purpose via seed folding), writes one
CSV with a provenance header comment (version, experiment, seed, config
hash), and is deterministic byte-for-byte across reruns.
"""

from __future__ import annotations

import hashlib
import math
import statistics
from dataclasses import dataclass, field, fields

from . import __version__
from .constructions import (
    WalkConfig,
    biased_walk,
    check_eta_conditions,
    delta_augment,
    search_eta_market,
)
from .dynamics import (
    SURPLUS_GAIN,
    SURPLUS_TOTAL,
    UNIFORM_AGENT_BEST,
    UNIFORM_PAIR,
    WeightRule,
    batch_run,
    simulate,
)
from .errors import ConfigError, DomainError, EtaMarketNotFound
from .exact import RULE_BEST, RULE_ALL, absorption, absorption_csv, build_graph, check_reachability_equivalence
from .fragments import has_nontrivial_fragment
from .market import (
    Market,
    Matching,
    almost_stable,
    assortative_market,
    perturb_epsilon,
    random_market,
)
from .rng import SplitMix64, derive_seed
from .stable import deferred_acceptance, enumerate_stable, is_unique_stable
from .textio import market_from_text, market_to_text

RULE_NAMES = {
    "uniform": UNIFORM_PAIR,
    "agent-best": UNIFORM_AGENT_BEST,
    "surplus-total": SURPLUS_TOTAL,
    "surplus-gain": SURPLUS_GAIN,
}

EXPERIMENTS = (
    "fragments-freq", "multi-stable", "unique-stable", "timing-study",
    "eta-construct", "walk", "absorption", "verify-equivalence",
)


def stream_seed(master: int, *parts: int) -> int:
    """Fold path components into an independent derived seed."""
    s = master
    for p in parts:
        s = derive_seed(s, p)
    return s


@dataclass
class ExperimentConfig:
    experiment: str
    sizes: list[tuple[int, int]] = field(default_factory=list)
    markets_per_size: int = 200
    paths_per_start: int = 100
    max_steps: int = 10**6
    rule: str = "uniform"
    kappa: float | None = None
    master_seed: int = 0
    output_path: str = "out.csv"
    full_scale: bool = False
    eta: float = 0.25
    epsilon: float = 0.1
    p_destab: float = 0.95
    gaps: list[int] = field(default_factory=lambda: [4, 8, 12, 16])
    sizes_b: list[int] = field(default_factory=lambda: [8, 12, 16, 20])
    search_budget: int = 10**5
    market_file: str | None = None

    def validate(self):
        if self.experiment not in EXPERIMENTS:
            raise ConfigError(f"unknown experiment {self.experiment!r}; choose from {EXPERIMENTS}")
        if self.rule not in RULE_NAMES:
            raise ConfigError(f"unknown rule {self.rule!r}; choose from {sorted(RULE_NAMES)}")
        for name in ("markets_per_size", "paths_per_start", "max_steps", "search_budget"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be positive")
        for n, m in self.sizes:
            if n < 1 or m < 1:
                raise ConfigError(f"bad size ({n},{m})")
        if self.kappa is not None and self.kappa < 1:
            raise ConfigError("kappa must be >= 1")
        if not (0 < self.epsilon <= 1):
            raise ConfigError("epsilon must lie in (0, 1]")
        if self.experiment == "absorption" and not self.market_file:
            raise ConfigError("absorption requires a market file")

    def weight_rule(self) -> WeightRule:
        return WeightRule.named(RULE_NAMES[self.rule], self.kappa)

    def config_hash(self) -> str:
        blob = ";".join(f"{f.name}={getattr(self, f.name)!r}" for f in fields(self))
        return hashlib.sha256(blob.encode()).hexdigest()[:12]


def _fmt(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_csv(cfg: ExperimentConfig, columns: list[str], rows: list[tuple]) -> str:
    header = (f"# matchlab {__version__} experiment={cfg.experiment}"
              f" seed={cfg.master_seed} config={cfg.config_hash()}")
    lines = [header, ",".join(columns)]
    for row in rows:
        lines.append(",".join(_fmt(v) for v in row))
    text = "\n".join(lines) + "\n"
    with open(cfg.output_path, "w") as fh:
        fh.write(text)
    return text


def exact_2x2_nontrivial_fraction() -> float:
    """Classify all (2!)^4 preference profiles of the 2x2 market exhaustively."""
    perms = [(0, 1), (1, 0)]
    hits = 0
    total = 0
    for f0 in perms:
        for f1 in perms:
            for w0 in perms:
                for w1 in perms:
                    market = Market((f0, f1), (w0, w1), validate=False)
                    total += 1
                    hits += has_nontrivial_fragment(market)
    return hits / total


def run_fragments_freq(cfg: ExperimentConfig) -> list[tuple]:
    """Frequency of markets with a non-trivial fragment, by size."""
    cfg.validate()
    rows = []
    for si, (n, m) in enumerate(cfg.sizes):
        if n != m:
            raise ConfigError("fragments-freq needs balanced sizes")
        hits = 0
        for i in range(cfg.markets_per_size):
            market = random_market(n, n, stream_seed(cfg.master_seed, 0, si, i))
            hits += has_nontrivial_fragment(market)
        freq = hits / cfg.markets_per_size
        se = math.sqrt(freq * (1 - freq) / cfg.markets_per_size)
        rows.append((n, cfg.markets_per_size, freq, se))
    write_csv(cfg, ["n", "samples", "freq", "se"], rows)
    return rows


def _sample_markets(cfg: ExperimentConfig, category: int, si: int, n: int, m: int,
                    predicate, max_attempts_per: int = 5000) -> list[Market]:
    """Rejection-sample seeded random markets satisfying a predicate."""
    found: list[Market] = []
    attempt = 0
    while len(found) < cfg.markets_per_size:
        if attempt > max_attempts_per * cfg.markets_per_size:
            raise ConfigError(f"could not sample {cfg.markets_per_size} qualifying {n}x{m} markets")
        market = random_market(n, m, stream_seed(cfg.master_seed, category, si, attempt))
        attempt += 1
        if predicate(market):
            found.append(market)
    return found


def run_multi_stable(cfg: ExperimentConfig) -> list[tuple]:
    """Perturb an extremal and a random stable matching minimally; track both."""
    cfg.validate()
    rule = cfg.weight_rule()
    rows = []
    for si, (n, m) in enumerate(cfg.sizes):
        if n != m:
            raise ConfigError("multi-stable needs balanced sizes")
        markets = _sample_markets(cfg, 1, si, n, n, lambda mk: not is_unique_stable(mk))
        agg: dict[str, list] = {"extremal": [], "random": []}
        for mi, market in enumerate(markets):
            sset = enumerate_stable(market)
            rng = SplitMix64(stream_seed(cfg.master_seed, 2, si, mi))
            targets = {
                "extremal": sset.matchings[sset.firm_optimal],
                "random": sset.matchings[rng.randbelow(len(sset.matchings))],
            }
            for ti, (start_type, mu) in enumerate(targets.items()):
                firm = mu.matched_firms()[rng.randbelow(mu.n_matched)]
                start = almost_stable(market, mu, firm)
                res = batch_run(market, [start], rule, mu, cfg.paths_per_start,
                                cfg.max_steps, stream_seed(cfg.master_seed, 3, si, mi, ti))
                agg[start_type].append(res[0])
        for start_type in ("extremal", "random"):
            rs = agg[start_type]
            k = len(rs)
            rows.append((
                n, start_type,
                sum(r.return_prob for r in rs) / k,
                sum(r.ultimate_mismatch for r in rs) / k,
                sum(r.mean_steps for r in rs) / k,
                sum(r.mean_ln_steps for r in rs) / k,
                sum(r.on_path_mismatch for r in rs) / k,
                sum(r.censored_frac for r in rs) / k,
            ))
    write_csv(cfg, ["n", "start_type", "return_prob", "ult_mismatch", "mean_steps",
                    "mean_ln_steps", "onpath_mismatch", "censored_frac"], rows)
    return rows


def run_unique_stable(cfg: ExperimentConfig) -> list[tuple]:
    """Unique-stable markets (balanced or imbalanced), minimally perturbed."""
    cfg.validate()
    rule = cfg.weight_rule()
    rows = []
    for si, (n, m) in enumerate(cfg.sizes):
        markets = _sample_markets(cfg, 4, si, n, m, is_unique_stable)
        results = []
        for mi, market in enumerate(markets):
            mu = deferred_acceptance(market, "firm")
            rng = SplitMix64(stream_seed(cfg.master_seed, 5, si, mi))
            firm = mu.matched_firms()[rng.randbelow(mu.n_matched)]
            start = almost_stable(market, mu, firm)
            res = batch_run(market, [start], rule, mu, cfg.paths_per_start,
                            cfg.max_steps, stream_seed(cfg.master_seed, 6, si, mi))
            results.append(res[0])
        k = len(results)
        rows.append((
            n, m, k,
            sum(r.mean_steps for r in results) / k,
            sum(r.mean_ln_steps for r in results) / k,
            sum(r.on_path_mismatch for r in results) / k,
            sum(r.on_path_mismatch_workers for r in results) / k,
            sum(r.censored_frac for r in results) / k,
        ))
    write_csv(cfg, ["n_firms", "n_workers", "samples", "mean_steps", "mean_ln_steps",
                    "onpath_mismatch_firms", "onpath_mismatch_workers", "censored_frac"], rows)
    return rows


def _random_perfect_matching(n: int, m: int, rng: SplitMix64) -> Matching:
    if m < n:
        raise ConfigError("random perfect start needs n_workers >= n_firms")
    workers = rng.sample_indices(m, n)
    return Matching.from_pairs(list(zip(range(n), workers)), n, m)


def _steps_row(arm: str, family: str, n: int, outcomes: list[tuple[int, bool]],
               max_steps: int) -> tuple:
    # censored paths contribute max_steps to the step statistics
    capped = [max_steps if hit else min(s, max_steps) for s, hit in outcomes]
    med = float(statistics.median(capped))
    qs = statistics.quantiles(capped, n=4) if len(capped) > 1 else [float(capped[0])] * 3
    censored = sum(1 for _, hit in outcomes if hit)
    return (arm, family, n, len(outcomes), sum(capped) / len(capped), med,
            float(qs[0]), float(qs[2]), censored / len(outcomes), int(censored == 0))


def run_timing_study(cfg: ExperimentConfig) -> list[tuple]:
    """Arm a: nested-fragment (assortative) markets from random perfect starts.
    Arm b: admirer-condition markets and their block augmentations from
    epsilon-unstable starts, with censoring at max_steps."""
    cfg.validate()
    rule = cfg.weight_rule()
    rows = []
    for n, m in cfg.sizes:
        if n != m:
            raise ConfigError("timing-study arm (a) needs balanced sizes")
        market = assortative_market(n)
        reference = deferred_acceptance(market, "firm")
        outcomes = []
        for j in range(cfg.paths_per_start):
            start = _random_perfect_matching(n, n, SplitMix64(stream_seed(cfg.master_seed, 7, n, j)))
            traj = simulate(market, start, rule, reference, cfg.max_steps,
                            stream_seed(cfg.master_seed, 8, n, j))
            outcomes.append((traj.steps, traj.hit_max_steps))
        rows.append(_steps_row("a", "assortative", n, outcomes, cfg.max_steps))
    for n in cfg.sizes_b:
        eta_mkt = search_eta_market(n, cfg.eta, stream_seed(cfg.master_seed, 9, n),
                                    cfg.search_budget)
        half = n // 2
        try:
            # deepest feasible admiration block so the augmented swamp
            # strengthens with every size increment
            eta_delta = ((half - 1) // 2) / half
            delta_mkt = delta_augment(
                assortative_market(n - half),
                search_eta_market(half, eta_delta, stream_seed(cfg.master_seed, 10, n),
                                  cfg.search_budget))
        except (EtaMarketNotFound, DomainError):
            delta_mkt = None
        for fi, (family, market) in enumerate((("eta", eta_mkt), ("delta-augmented", delta_mkt))):
            if market is None:
                continue
            reference = deferred_acceptance(market, "firm")
            outcomes = []
            for j in range(cfg.paths_per_start):
                start_seed = stream_seed(cfg.master_seed, 11, fi, n, j)
                start = perturb_epsilon(market, reference, cfg.epsilon, start_seed)
                traj = simulate(market, start, rule, reference, cfg.max_steps,
                                stream_seed(cfg.master_seed, 12, fi, n, j))
                outcomes.append((traj.steps, traj.hit_max_steps))
            rows.append(_steps_row("b", family, market.n_firms, outcomes, cfg.max_steps))
    write_csv(cfg, ["arm", "family", "n", "paths", "mean_steps", "median_steps",
                    "q25_steps", "q75_steps", "censored_frac", "all_absorbed"], rows)
    return rows


def run_eta_construct(cfg: ExperimentConfig) -> list[tuple]:
    """Search and verify admirer-condition markets; write market files."""
    cfg.validate()
    rows = []
    for n, m in cfg.sizes:
        if n != m:
            raise ConfigError("eta-construct needs balanced sizes")
        seed = stream_seed(cfg.master_seed, 13, n)
        market = search_eta_market(n, cfg.eta, seed, cfg.search_budget)
        report = check_eta_conditions(market, cfg.eta)
        path = f"{cfg.output_path}.n{n}.market"
        with open(path, "w") as fh:
            fh.write(market_to_text(
                market, provenance=f"seed={seed} budget={cfg.search_budget} eta={cfg.eta}"))
        non_exc = sorted(report.per_worker_admirers)[1:] + sorted(report.per_firm_admirers)[1:]
        rows.append((n, cfg.eta, report.threshold, int(report.passes),
                     report.exception_firm, report.exception_worker, min(non_exc), path))
    write_csv(cfg, ["n", "eta", "threshold", "passes", "exception_firm",
                    "exception_worker", "min_nonexception_admirers", "market_file"], rows)
    return rows


def run_walk(cfg: ExperimentConfig) -> list[tuple]:
    """Reference biased-walk hitting times across gaps."""
    cfg.validate()
    rows = []
    for gi, gap in enumerate(cfg.gaps):
        config = WalkConfig(start_level=0, target=gap, p_destab=cfg.p_destab)
        hits = []
        censored = 0
        for j in range(cfg.paths_per_start):
            r = biased_walk(config, cfg.max_steps, stream_seed(cfg.master_seed, 14, gi, j))
            if r is None:
                censored += 1
                hits.append(cfg.max_steps)
            else:
                hits.append(r)
        rows.append((gap, cfg.p_destab, cfg.paths_per_start, cfg.max_steps,
                     float(statistics.median(hits)), censored / cfg.paths_per_start))
    write_csv(cfg, ["gap", "p_destab", "runs", "max_steps", "median_steps", "censored_frac"], rows)
    return rows


def run_absorption(cfg: ExperimentConfig) -> str:
    """Exact absorption table for one market file."""
    cfg.validate()
    with open(cfg.market_file) as fh:
        market = market_from_text(fh.read())
    rule = cfg.weight_rule()
    graph = build_graph(market, RULE_BEST if rule.uses_best_pairs else RULE_ALL)
    text = absorption_csv(absorption(graph, rule))
    header = (f"# matchlab {__version__} experiment={cfg.experiment}"
              f" seed={cfg.master_seed} config={cfg.config_hash()}\n")
    with open(cfg.output_path, "w") as fh:
        fh.write(header + text)
    return header + text


def run_verify_equivalence(cfg: ExperimentConfig) -> list[tuple]:
    """Reachability-equivalence sweep over random markets."""
    cfg.validate()
    rows = []
    for si, (n, m) in enumerate(cfg.sizes):
        if n != m:
            raise ConfigError("verify-equivalence needs balanced sizes")
        ok = 0
        for i in range(cfg.markets_per_size):
            market = random_market(n, n, stream_seed(cfg.master_seed, 15, si, i))
            ok += check_reachability_equivalence(market).equivalent
        rows.append((n, cfg.markets_per_size, ok / cfg.markets_per_size))
    write_csv(cfg, ["n", "samples", "equivalent_frac"], rows)
    return rows


RUNNERS = {
    "fragments-freq": run_fragments_freq,
    "multi-stable": run_multi_stable,
    "unique-stable": run_unique_stable,
    "timing-study": run_timing_study,
    "eta-construct": run_eta_construct,
    "walk": run_walk,
    "absorption": run_absorption,
    "verify-equivalence": run_verify_equivalence,
}
