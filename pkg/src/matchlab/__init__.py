"""matchlab: a laboratory for decentralized blocking-pair dynamics in
two-sided matching markets."""

__version__ = "0.1.0"

from .market import (
    UNMATCHED,
    BlockingPair,
    Market,
    Matching,
    almost_stable,
    assortative_market,
    blocking_pairs,
    count_matchings,
    enumerate_matchings,
    is_stable,
    mismatch_proportion,
    perturb_epsilon,
    random_market,
    satisfy,
    stable_pair_count,
    worker_mismatch_proportion,
)
from .stable import (
    BreakmarriageOutcome,
    BreakStatus,
    StableSet,
    breakmarriage,
    breakmarriage_path,
    deferred_acceptance,
    enumerate_stable,
    is_unique_stable,
)
from .fragments import (
    Fragment,
    check_fragment_closure,
    check_trivial_fragment_removal,
    find_fragments,
    has_nontrivial_fragment,
    inducing_matchings,
    nested_fragment_chain,
)
from .exact import (
    RULE_ALL,
    RULE_BEST,
    AbsorptionResult,
    MatchingGraph,
    absorption,
    build_graph,
    build_graphs,
    check_reachability_equivalence,
    reachable_stable_set,
)
from .dynamics import (
    SURPLUS_GAIN,
    SURPLUS_TOTAL,
    UNIFORM_AGENT_BEST,
    UNIFORM_PAIR,
    Trajectory,
    WeightRule,
    batch_run,
    simulate,
    step,
)
from .constructions import (
    EtaReport,
    PairClassification,
    WalkConfig,
    admirer_counts,
    biased_walk,
    check_eta_conditions,
    classify_blocking_pairs,
    delta_augment,
    destabilizing_probability_bound,
    has_spare_unmatched,
    search_eta_market,
)
from .rng import SplitMix64, derive_seed, mix64
