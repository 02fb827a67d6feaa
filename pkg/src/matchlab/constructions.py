"""Constructions behind the slow-stabilization results.

Admirer-condition markets: a balanced market with a unique stable matching
where every worker but one is preferred by at least an eta-proportion of
firms to their stable partners, and symmetrically for firms.  Near such a
market's stable matching, blocking pairs that push away from stability
heavily outnumber those that restore it, which makes re-stabilization behave
like a heavily biased random walk.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import (
    DomainError,
    EtaMarketNotFound,
    NotUniqueStable,
    PreconditionFailed,
    StarConditionViolated,
)
from .market import (
    UNMATCHED,
    BlockingPair,
    Market,
    Matching,
    blocking_pairs,
    satisfy,
    stable_pair_count,
)
from .rng import SplitMix64
from .stable import deferred_acceptance, is_unique_stable


def admirer_counts(market: Market, stable: Matching) -> tuple[list[int], list[int]]:
    """(worker admirers, firm admirers) against the given stable matching.

    A firm admires every worker it ranks above its stable partner, and
    symmetrically; unmatched agents admire everyone.
    """
    n, m = market.n_firms, market.n_workers
    per_worker = [0] * m
    per_firm = [0] * n
    for f in range(n):
        p = stable.firm_partner[f]
        cut = market.firm_rank[f][p] if p != UNMATCHED else m
        for w in market.firm_prefs[f][:cut]:
            per_worker[w] += 1
    for w in range(m):
        p = stable.worker_partner[w]
        cut = market.worker_rank[w][p] if p != UNMATCHED else n
        for f in market.worker_prefs[w][:cut]:
            per_firm[f] += 1
    return per_worker, per_firm


@dataclass
class EtaReport:
    """Checker output for the admirer conditions at a given eta."""

    passes: bool
    eta: float
    threshold: int
    exception_firm: int | None
    exception_worker: int | None
    per_worker_admirers: list[int]
    per_firm_admirers: list[int]

    def csv(self) -> str:
        lines = ["side,index,admirers,is_exception"]
        for w, c in enumerate(self.per_worker_admirers):
            lines.append(f"worker,{w},{c},{int(w == self.exception_worker)}")
        for f, c in enumerate(self.per_firm_admirers):
            lines.append(f"firm,{f},{c},{int(f == self.exception_firm)}")
        return "\n".join(lines) + "\n"


def check_eta_conditions(market: Market, eta: float) -> EtaReport:
    """Verify the admirer conditions; the worst agent per side is the exception."""
    if not market.is_balanced:
        raise DomainError("admirer conditions are defined for balanced markets")
    if not is_unique_stable(market):
        raise NotUniqueStable("market must have a unique stable matching")
    mu = deferred_acceptance(market, "firm")
    per_worker, per_firm = admirer_counts(market, mu)
    n = market.n_firms
    threshold = math.ceil(eta * n)
    exc_w = min(range(n), key=lambda w: (per_worker[w], w))
    exc_f = min(range(n), key=lambda f: (per_firm[f], f))
    passes = all(per_worker[w] >= threshold for w in range(n) if w != exc_w) and \
        all(per_firm[f] >= threshold for f in range(n) if f != exc_f)
    return EtaReport(passes, eta, threshold, exc_f, exc_w, per_worker, per_firm)


def _circulant_profile(n: int, t: int) -> tuple[list[list[int]], list[list[int]]]:
    """Admiration-circulant preference profile with one exception per side.

    Each agent a admires the t agents a-1..a-t (mod n) on the other side,
    except that nobody admires index n-1; admired blocks sit above the own
    partner, farthest first, wrapped entries below unwrapped ones; the
    agents that admire a go directly below a's partner in the same order.
    Identity is stable by arc exclusivity (2t < n), and empirically the
    unique stable matching; the checker re-verifies either way.
    """
    e = n - 1

    def side() -> list[list[int]]:
        prefs = []
        for a in range(n):
            normal = [a - s for s in range(t, 0, -1) if a - s >= 0 and (a - s) != e]
            wrap = [a - s + n for s in range(t, 0, -1) if a - s < 0 and (a - s + n) != e]
            admired = normal + wrap
            nsrc = [a + s for s in range(t, 0, -1) if a + s <= n - 1]
            wsrc = [a + s - n for s in range(t, 0, -1) if a + s > n - 1]
            seen = set(admired) | {a}
            tail = [x for x in nsrc + wsrc if x not in seen]
            seen.update(tail)
            rest = [x for x in range(n) if x not in seen]
            prefs.append(admired + [a] + tail + rest)
        return prefs

    return side(), side()


def search_eta_market(n: int, eta: float, seed: int, budget: int = 10**5) -> Market:
    """Find a market passing check_eta_conditions, or raise EtaMarketNotFound.

    Candidate stream: circulant profiles at admiration depths >= ceil(eta*n),
    then adjacent-swap hill climbing seeded from perturbed circulant and
    assortative profiles.  Every acceptance goes through the checker; a
    market is never returned unverified.
    """
    if n < 4:
        raise DomainError("need n >= 4")
    if eta <= 0:
        raise DomainError("eta must be positive")
    if eta >= 0.5:
        # provably infeasible: admirer arcs on a pair can point from at most
        # one side in a stable matching, so both sides cannot each demand an
        # eta >= 1/2 proportion
        raise EtaMarketNotFound(f"eta={eta} is infeasible (needs eta < 1/2)")
    t0 = math.ceil(eta * n)
    rng = SplitMix64(seed)
    evals = 0

    def verified(fprefs, wprefs) -> Market | None:
        nonlocal evals
        evals += 1
        market = Market(fprefs, wprefs, validate=False)
        if not is_unique_stable(market):
            return None
        report = check_eta_conditions(market, eta)
        return market if report.passes else None

    for t in range(t0, (n - 1) // 2 + 1):
        if evals >= budget:
            break
        market = verified(*_circulant_profile(n, t))
        if market is not None:
            return market

    # fallback: hill climb on adjacent swaps, restarting from alternately
    # perturbed circulant and perturbed assortative profiles
    restart = 0
    while evals < budget:
        if restart % 2 == 0:
            base_t = t0 if 2 * t0 < n else (n - 1) // 2
            fprefs, wprefs = _circulant_profile(n, base_t)
        else:
            fprefs = [list(range(n)) for _ in range(n)]
            wprefs = [list(range(n)) for _ in range(n)]
        restart += 1
        for _ in range(rng.randbelow(2 * n)):
            side = fprefs if rng.randbelow(2) == 0 else wprefs
            row = side[rng.randbelow(n)]
            i = rng.randbelow(n - 1)
            row[i], row[i + 1] = row[i + 1], row[i]
        best = _fitness(fprefs, wprefs, n, t0)
        stall = 0
        while evals < budget and stall < 50 * n:
            side = fprefs if rng.randbelow(2) == 0 else wprefs
            row = side[rng.randbelow(n)]
            i = rng.randbelow(n - 1)
            row[i], row[i + 1] = row[i + 1], row[i]
            fit = _fitness(fprefs, wprefs, n, t0)
            evals += 1
            if fit >= best:
                stall = 0 if fit > best else stall + 1
                best = fit
                if fit == (0, 0, 0):
                    market = verified(fprefs, wprefs)
                    if market is not None:
                        return market
            else:
                row[i], row[i + 1] = row[i + 1], row[i]
                stall += 1
    raise EtaMarketNotFound(f"no market for n={n}, eta={eta} within {budget} evaluations")


def _fitness(fprefs, wprefs, n: int, t: int) -> tuple[int, int, int]:
    """(-identity blocking pairs, -extremal DA mismatches, -admirer shortfall)."""
    market = Market(fprefs, wprefs, validate=False)
    ident = list(range(n))
    viol = 0
    for f in range(n):
        fr = market.firm_rank[f]
        cf = fr[f]
        for w in range(n):
            if w != f and fr[w] < cf and market.worker_rank[w][f] < market.worker_rank[w][w]:
                viol += 1
    if viol:
        return (-viol, -n * n, -n * n)
    mm = sum(1 for f, w in enumerate(deferred_acceptance(market, "firm").firm_partner) if w != f)
    mm += sum(1 for f, w in enumerate(deferred_acceptance(market, "worker").firm_partner) if w != f)
    mu = Matching(ident[:], ident[:])
    per_worker, per_firm = admirer_counts(market, mu)
    sw = sorted(per_worker)
    sf = sorted(per_firm)
    short = sum(max(0, t - c) for c in sw[1:]) + sum(max(0, t - c) for c in sf[1:])
    return (0, -mm, -short)


def delta_augment(original: Market, eta_market: Market) -> Market:
    """Block-extend a unique-stable market with a small admirer-condition market.

    Original agents keep their preferences over each other and rank all new
    agents below, in the added market's index order; new agents rank all
    originals (in index order) above all new agents, among whom the added
    market's preferences apply.  The three contract clauses are re-verified
    on the output: restriction equals the original, unique stable matching,
    original stable partners unchanged.
    """
    if not original.is_balanced or not eta_market.is_balanced:
        raise PreconditionFailed("both markets must be balanced")
    d = eta_market.n_firms
    if d < 1:
        raise PreconditionFailed("refusing an empty augmentation")
    if not is_unique_stable(original):
        raise PreconditionFailed("original market must have a unique stable matching")
    n = original.n_firms
    fprefs = [list(original.firm_prefs[f]) + [n + j for j in range(d)] for f in range(n)]
    wprefs = [list(original.worker_prefs[w]) + [n + i for i in range(d)] for w in range(n)]
    for a in range(d):
        fprefs.append(list(range(n)) + [n + j for j in eta_market.firm_prefs[a]])
        wprefs.append(list(range(n)) + [n + i for i in eta_market.worker_prefs[a]])
    out = Market(fprefs, wprefs, validate=False)
    # contract checks
    restr = out.restrict(range(n), range(n))
    if restr.firm_prefs != original.firm_prefs or restr.worker_prefs != original.worker_prefs:
        raise PreconditionFailed("restriction to original agents changed")
    if not is_unique_stable(out):
        raise PreconditionFailed("augmented market has multiple stable matchings")
    mu0 = deferred_acceptance(original, "firm")
    mu1 = deferred_acceptance(out, "firm")
    if mu1.firm_partner[:n] != mu0.firm_partner:
        raise PreconditionFailed("original agents' stable partners changed")
    return out


def destabilizing_probability_bound(eta: float, zeta: float, kappa: float) -> float:
    """Lower bound on picking a destabilizing over a stabilizing pair:
    (eta - zeta) / (eta + (2*kappa - 1) * zeta)."""
    if not (0 < zeta < eta) or kappa < 1:
        raise DomainError("need 0 < zeta < eta and kappa >= 1")
    return (eta - zeta) / (eta + (2 * kappa - 1) * zeta)


def has_spare_unmatched(matching: Matching, exception_firm: int | None,
                        exception_worker: int | None) -> bool:
    """Some unmatched agent other than the two exception agents exists."""
    for f, w in enumerate(matching.firm_partner):
        if w == UNMATCHED and f != exception_firm:
            return True
    for w, f in enumerate(matching.worker_partner):
        if f == UNMATCHED and w != exception_worker:
            return True
    return False


@dataclass
class PairClassification:
    """Blocking pairs split by their effect near the stable matching.

    destabilizing: the step keeps a spare unmatched non-exception agent and
    moves one stable pair away from the reference; stabilizing: the step
    either removes every spare unmatched agent or restores a stable pair;
    neutral: everything else.
    """

    destabilizing: list[BlockingPair]
    stabilizing: list[BlockingPair]
    neutral: list[BlockingPair]


def classify_blocking_pairs(market: Market, matching: Matching, reference: Matching,
                            exception_firm: int | None,
                            exception_worker: int | None) -> PairClassification:
    if not has_spare_unmatched(matching, exception_firm, exception_worker):
        raise StarConditionViolated("no spare unmatched non-exception agent at this matching")
    s0 = stable_pair_count(matching, reference)
    destab, stab, neutral = [], [], []
    for bp in blocking_pairs(market, matching):
        nxt = satisfy(market, matching, bp)
        ds = stable_pair_count(nxt, reference) - s0
        spare = has_spare_unmatched(nxt, exception_firm, exception_worker)
        if spare and ds == -1:
            destab.append(bp)
        elif (not spare) or ds == +1:
            stab.append(bp)
        else:
            neutral.append(bp)
    return PairClassification(destab, stab, neutral)


@dataclass
class WalkConfig:
    """Reference random walk: reflecting +4 at the start level, interior
    steps -1 with probability p_destab, +4 otherwise, absorbing at >= target."""

    start_level: int
    target: int
    p_destab: float
    step_up: int = 4
    step_down: int = -1

    def validate(self):
        if self.start_level >= self.target:
            raise DomainError("start level must be below the target")
        if not (0 <= self.p_destab <= 1):
            raise DomainError("p_destab must lie in [0, 1]")


def biased_walk(config: WalkConfig, max_steps: int, seed: int) -> int | None:
    """First step count at which the walk reaches the target; None if censored."""
    config.validate()
    rng = SplitMix64(seed)
    s = config.start_level
    k, n = config.start_level, config.target
    for step_count in range(1, max_steps + 1):
        if s == k:
            s += config.step_up
        elif rng.random() < config.p_destab:
            s += config.step_down
        else:
            s += config.step_up
        if s >= n:
            return step_count
    return None
