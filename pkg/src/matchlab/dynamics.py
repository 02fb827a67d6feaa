"""Sequential random blocking-pair dynamics with streaming statistics.

At each step one admissible pair is satisfied, sampled with probability
proportional to its weight.  Pair rules draw from all blocking pairs; the
agent-best rule draws a uniformly random agent among those with a blocking
partner, who then matches with their most preferred blocking partner.  Every
rule keeps the max/min weight ratio over the admissible set within its
`kappa` bound per step (surplus weights are clamped into [max/kappa, max]).
"""

from __future__ import annotations

import math
import statistics
from dataclasses import dataclass
from typing import Callable

from .errors import MissingCardinalValues
from .market import (
    UNMATCHED,
    BlockingPair,
    Market,
    Matching,
    blocking_pairs,
    mismatch_proportion,
    satisfy,
    stable_pair_count,
    worker_mismatch_proportion,
)
from .rng import SplitMix64, derive_seed

UNIFORM_PAIR = "uniform-pair"
UNIFORM_AGENT_BEST = "agent-best"
SURPLUS_TOTAL = "surplus-total"
SURPLUS_GAIN = "surplus-gain"
CUSTOM = "custom"

_KNOWN_KINDS = (UNIFORM_PAIR, UNIFORM_AGENT_BEST, SURPLUS_TOTAL, SURPLUS_GAIN, CUSTOM)


@dataclass(frozen=True)
class WeightRule:
    """How blocking pairs are weighted at each step.

    kappa bounds the per-step ratio between any two admissible pair
    probabilities: 1 for the uniform rule by definition, at most 2 for
    agent-best (a pair can be picked through each of its two members), a
    clamp bound for surplus rules, and an asserted bound for custom weights.
    custom_weight receives (market, matching, pair, step_index) and must
    return a positive weight.
    """

    kind: str = UNIFORM_PAIR
    kappa: float = 1.0
    custom_weight: Callable[[Market, Matching, BlockingPair, int], float] | None = None

    def __post_init__(self):
        if self.kind not in _KNOWN_KINDS:
            raise ValueError(f"unknown weight rule {self.kind!r}")
        if self.kappa < 1.0:
            raise ValueError("kappa must be >= 1")
        if self.kind == CUSTOM and self.custom_weight is None:
            raise ValueError("custom rule requires a weight function")

    @classmethod
    def named(cls, kind: str, kappa: float | None = None) -> "WeightRule":
        if kappa is None:
            kappa = 2.0 if kind in (UNIFORM_AGENT_BEST, SURPLUS_TOTAL, SURPLUS_GAIN) else 1.0
        return cls(kind, kappa)

    @property
    def uses_best_pairs(self) -> bool:
        return self.kind == UNIFORM_AGENT_BEST


def admissible_pairs(rule: WeightRule, bps: list[BlockingPair]) -> list[BlockingPair]:
    if rule.uses_best_pairs:
        return [p for p in bps if p.best_for_firm or p.best_for_worker]
    return bps


def _surplus(market: Market, matching: Matching, pair: BlockingPair, gain: bool) -> float:
    if not market.has_values:
        raise MissingCardinalValues("surplus rules require cardinal values")
    f, w = pair.firm, pair.worker
    total = market.firm_values[f][w] + market.worker_values[w][f]
    if not gain:
        return total
    cur = 0.0
    pw = matching.firm_partner[f]
    if pw != UNMATCHED:
        cur += market.firm_values[f][pw]
    pf = matching.worker_partner[w]
    if pf != UNMATCHED:
        cur += market.worker_values[w][pf]
    return total - cur


def pair_weights(market: Market, matching: Matching, pairs: list[BlockingPair],
                 rule: WeightRule, step_index: int = 0) -> list[float]:
    """Per-pair weights for the admissible set, kappa bound enforced."""
    if rule.kind == UNIFORM_PAIR:
        return [1.0] * len(pairs)
    if rule.kind == UNIFORM_AGENT_BEST:
        return [float(p.best_for_firm) + float(p.best_for_worker) for p in pairs]
    if rule.kind in (SURPLUS_TOTAL, SURPLUS_GAIN):
        raw = [_surplus(market, matching, p, rule.kind == SURPLUS_GAIN) for p in pairs]
        top = max(raw, default=0.0)
        floor = top / rule.kappa
        return [min(max(v, floor), top) for v in raw]
    weights = [rule.custom_weight(market, matching, p, step_index) for p in pairs]
    if weights:
        lo, hi = min(weights), max(weights)
        if lo <= 0:
            raise ValueError("custom weights must be positive")
        if hi > rule.kappa * lo * (1 + 1e-12):
            raise ValueError(f"custom weights break the kappa={rule.kappa} ratio bound")
    return weights


def _choose(market: Market, matching: Matching, bps: list[BlockingPair],
            rule: WeightRule, step_index: int, rng: SplitMix64) -> BlockingPair:
    if rule.kind == UNIFORM_PAIR:
        return bps[rng.randbelow(len(bps))]
    if rule.kind == UNIFORM_AGENT_BEST:
        # agents in firm-then-worker index order; one best pair each
        firm_best = {p.firm: p for p in bps if p.best_for_firm}
        worker_best = {p.worker: p for p in bps if p.best_for_worker}
        firms = sorted(firm_best)
        workers = sorted(worker_best)
        k = rng.randbelow(len(firms) + len(workers))
        if k < len(firms):
            return firm_best[firms[k]]
        return worker_best[workers[k - len(firms)]]
    pairs = admissible_pairs(rule, bps)
    weights = pair_weights(market, matching, pairs, rule, step_index)
    r = rng.random() * sum(weights)
    acc = 0.0
    for p, wt in zip(pairs, weights):
        acc += wt
        if r < acc:
            return p
    return pairs[-1]


def step(market: Market, matching: Matching, rule: WeightRule,
         step_index: int, rng: SplitMix64) -> tuple[Matching, BlockingPair] | None:
    """One transition; None when the matching is already stable (absorbed)."""
    bps = blocking_pairs(market, matching)
    if not bps:
        return None
    pair = _choose(market, matching, bps, rule, step_index, rng)
    return satisfy(market, matching, pair), pair


@dataclass
class Trajectory:
    """One simulated path.  absorbed is set iff the run was not censored.

    On-path means average the mismatch proportion against the reference over
    the pre-transition states (the state occupied before each step); a path
    absorbed at step 0 reports the start state's mismatch.  series holds
    geometrically downsampled (steps_done, stable_pair_count,
    blocking_pair_count) checkpoints when collection was requested.
    """

    steps: int
    absorbed: Matching | None
    hit_max_steps: bool
    final: Matching
    on_path_mismatch_mean: float
    on_path_mismatch_mean_workers: float
    series: list[tuple[int, int, int]] | None = None


def _kernel_simulate(market, start, rule, reference, max_steps, seed):
    import numpy as np

    from ._kernel import run_path
    fr, wr = market.np_tables
    fp0 = np.array(start.firm_partner, dtype=np.int64)
    wp0 = np.array(start.worker_partner, dtype=np.int64)
    if reference is not None:
        ref_fp = np.array(reference.firm_partner, dtype=np.int64)
        ref_wp = np.array(reference.worker_partner, dtype=np.int64)
        has_ref = True
    else:
        ref_fp = np.full(market.n_firms, -2, dtype=np.int64)
        ref_wp = np.full(market.n_workers, -2, dtype=np.int64)
        has_ref = False
    rule_code = 0 if rule.kind == UNIFORM_PAIR else 1
    steps, absorbed, fp, wp, sum_f, sum_w = run_path(
        fr, wr, fp0, wp0, ref_fp, ref_wp, has_ref, rule_code, max_steps,
        np.uint64(seed & 0xFFFFFFFFFFFFFFFF))
    final = Matching([int(x) for x in fp], [int(x) for x in wp])
    return int(steps), bool(absorbed), final, float(sum_f), float(sum_w)


def _python_simulate(market, start, rule, reference, max_steps, seed, collect_series):
    n, m = market.n_firms, market.n_workers
    rng = SplitMix64(seed)
    cur = start.copy()
    sum_f = sum_w = 0.0
    series: list[tuple[int, int, int]] | None = [] if collect_series else None
    next_record = 1
    steps = 0
    absorbed = False
    while steps < max_steps:
        bps = blocking_pairs(market, cur)
        if collect_series and steps == next_record:
            spc = stable_pair_count(cur, reference) if reference is not None else cur.n_matched
            series.append((steps, spc, len(bps)))
            next_record *= 2
        if not bps:
            absorbed = True
            break
        if reference is not None:
            # same float expressions as the kernel, for bit-identical sums
            smf = stable_pair_count(cur, reference)
            smw = sum(1 for f, r in zip(cur.worker_partner, reference.worker_partner)
                      if f != UNMATCHED and f == r)
            sum_f += (n - smf) / n
            sum_w += (m - smw) / m
        pair = _choose(market, cur, bps, rule, steps, rng)
        cur = satisfy(market, cur, pair)
        steps += 1
    else:
        # a path may land on a stable state exactly at the budget; probe once
        absorbed = not blocking_pairs(market, cur)
    return steps, absorbed, cur, sum_f, sum_w, series


def simulate(market: Market, start: Matching, rule: WeightRule, reference: Matching | None,
             max_steps: int, seed: int, collect_series: bool = False,
             use_kernel: bool = True) -> Trajectory:
    """Run one path until absorption or max_steps.

    Uniform and agent-best rules without series collection dispatch to the
    compiled kernel; it consumes the same SplitMix64 stream in the same
    order as the pure-Python loop, so both produce identical trajectories
    for a given seed.
    """
    if max_steps < 1:
        raise ValueError("max_steps must be >= 1")
    if rule.kind in (UNIFORM_PAIR, UNIFORM_AGENT_BEST) and not collect_series and use_kernel:
        steps, absorbed, final, sum_f, sum_w = _kernel_simulate(
            market, start, rule, reference, max_steps, seed)
        series = None
    else:
        steps, absorbed, final, sum_f, sum_w, series = _python_simulate(
            market, start, rule, reference, max_steps, seed, collect_series)
    if reference is None:
        mean_f = mean_w = 0.0
    elif steps == 0:
        mean_f = mismatch_proportion(final, reference)
        mean_w = worker_mismatch_proportion(final, reference)
    else:
        mean_f = sum_f / steps
        mean_w = sum_w / steps
    return Trajectory(
        steps=steps,
        absorbed=final if absorbed else None,
        hit_max_steps=not absorbed,
        final=final,
        on_path_mismatch_mean=mean_f,
        on_path_mismatch_mean_workers=mean_w,
        series=series,
    )


def trace_path(market: Market, start: Matching, rule: WeightRule,
               reference: Matching | None, max_steps: int, seed: int) -> str:
    """Single-path debug trace as TSV: one row per transition.

    Columns: step, firm, worker (the satisfied pair), stable_pairs (vs the
    reference, after the step), blocking_pairs (remaining after the step).
    """
    rng = SplitMix64(seed)
    cur = start.copy()
    lines = ["step\tfirm\tworker\tstable_pairs\tblocking_pairs"]
    for idx in range(max_steps):
        bps = blocking_pairs(market, cur)
        if not bps:
            break
        pair = _choose(market, cur, bps, rule, idx, rng)
        cur = satisfy(market, cur, pair)
        spc = stable_pair_count(cur, reference) if reference is not None else cur.n_matched
        lines.append(f"{idx + 1}\t{pair.firm}\t{pair.worker}\t{spc}"
                     f"\t{len(blocking_pairs(market, cur))}")
    return "\n".join(lines) + "\n"


@dataclass
class StartAggregate:
    """Aggregates over all paths launched from one start state.

    Censored paths contribute max_steps to the step statistics and count as
    non-returning; censoring is always reported, never dropped.
    """

    start_index: int
    paths: int
    return_prob: float
    mean_steps: float
    median_steps: float
    q25_steps: float
    q75_steps: float
    mean_ln_steps: float
    ultimate_mismatch: float
    on_path_mismatch: float
    on_path_mismatch_workers: float
    censored: int

    @property
    def censored_frac(self) -> float:
        return self.censored / self.paths


def batch_run(market: Market, starts: list[Matching], rule: WeightRule,
              reference: Matching | None, paths: int, max_steps: int,
              master_seed: int, use_kernel: bool = True) -> list[StartAggregate]:
    """Independent paths per start; path seeds are derive_seed(master, index).

    The global path index (start_index * paths + path_number) feeds the seed
    derivation, so results are independent of scheduling and worker count.
    """
    out = []
    for si, start in enumerate(starts):
        steps_all: list[int] = []
        returned = 0
        censored = 0
        ult = 0.0
        onp_f = 0.0
        onp_w = 0.0
        for j in range(paths):
            seed = derive_seed(master_seed, si * paths + j)
            traj = simulate(market, start, rule, reference, max_steps, seed,
                            use_kernel=use_kernel)
            steps_all.append(traj.steps)
            if traj.hit_max_steps:
                censored += 1
            if reference is not None:
                if traj.absorbed is not None and traj.absorbed.firm_partner == reference.firm_partner:
                    returned += 1
                ult += mismatch_proportion(traj.final, reference)
            onp_f += traj.on_path_mismatch_mean
            onp_w += traj.on_path_mismatch_mean_workers
        qs = statistics.quantiles(steps_all, n=4) if len(steps_all) > 1 else [steps_all[0]] * 3
        out.append(StartAggregate(
            start_index=si,
            paths=paths,
            return_prob=returned / paths,
            mean_steps=sum(steps_all) / paths,
            median_steps=float(statistics.median(steps_all)),
            q25_steps=float(qs[0]),
            q75_steps=float(qs[2]),
            mean_ln_steps=sum(math.log(max(s, 1)) for s in steps_all) / paths,
            ultimate_mismatch=ult / paths,
            on_path_mismatch=onp_f / paths,
            on_path_mismatch_workers=onp_w / paths,
            censored=censored,
        ))
    return out
