"""Stable-matching structure: deferred acceptance, breakmarriage, enumeration."""

from __future__ import annotations

import heapq
from collections import deque
from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache

from .errors import BreakmarriageUnsuccessful, FirmUnmatched, InputNotStable
from .market import (
    UNMATCHED,
    BlockingPair,
    Market,
    Matching,
    blocking_pairs,
    enumerate_matchings,
    is_stable,
    satisfy,
)


def deferred_acceptance(market: Market, proposing_side: str = "firm") -> Matching:
    """Proposing-side-optimal stable matching.

    Sequential variant: one free proposer moves at a time, lowest index
    first.  The outcome is the same as the simultaneous-rounds version; the
    fixed order makes proposal logs deterministic.
    """
    if proposing_side == "worker":
        t = deferred_acceptance(market.transpose(), "firm")
        return Matching(t.worker_partner, t.firm_partner)
    n, m = market.n_firms, market.n_workers
    wrank = market.worker_rank
    next_prop = [0] * n
    fp = [UNMATCHED] * n
    wp = [UNMATCHED] * m
    free = list(range(n))
    heapq.heapify(free)
    while free:
        f = heapq.heappop(free)
        while next_prop[f] < m:
            w = market.firm_prefs[f][next_prop[f]]
            next_prop[f] += 1
            holder = wp[w]
            if holder == UNMATCHED:
                wp[w], fp[f] = f, w
                break
            if wrank[w][f] < wrank[w][holder]:
                wp[w], fp[f] = f, w
                fp[holder] = UNMATCHED
                heapq.heappush(free, holder)
                break
    return Matching(fp, wp)


def is_unique_stable(market: Market) -> bool:
    """True iff the two extremal stable matchings coincide."""
    return deferred_acceptance(market, "firm").firm_partner == \
        deferred_acceptance(market, "worker").firm_partner


class BreakStatus(Enum):
    SUCCESS = "success"
    FIRM_EXHAUSTED = "firm-exhausted"
    UNMATCHED_WORKER_PROPOSED = "unmatched-worker-proposed"


@dataclass
class BreakmarriageOutcome:
    status: BreakStatus
    result: Matching | None
    proposal_log: list[tuple[int, int, bool]] = field(default_factory=list)


def breakmarriage(market: Market, mu: Matching, firm: int) -> BreakmarriageOutcome:
    """Sever (firm, mu(firm)) and restart firm-proposing deferred acceptance.

    The severed worker is semi-free: he accepts only firms he prefers to his
    former partner.  The restarted process has a single free firm at any
    time and terminates when (a) the semi-free worker accepts, yielding a new
    stable matching, (b) some firm exhausts her list, or (c) a previously
    unmatched worker is proposed to (the rural-hospital set would change, so
    no stable matching can result).
    """
    if not is_stable(market, mu):
        raise InputNotStable("breakmarriage requires a stable input matching")
    w_broken = mu.firm_partner[firm]
    if w_broken == UNMATCHED:
        raise FirmUnmatched(f"firm {firm} is unmatched")
    n, m = market.n_firms, market.n_workers
    frank, wrank = market.firm_rank, market.worker_rank
    fp = mu.firm_partner[:]
    wp = mu.worker_partner[:]
    # every matched firm restarts just below her current partner
    next_prop = [frank[f][fp[f]] + 1 if fp[f] != UNMATCHED else m for f in range(n)]
    fp[firm] = UNMATCHED
    wp[w_broken] = UNMATCHED
    log: list[tuple[int, int, bool]] = []
    free = firm
    while True:
        if next_prop[free] >= m:
            return BreakmarriageOutcome(BreakStatus.FIRM_EXHAUSTED, None, log)
        w = market.firm_prefs[free][next_prop[free]]
        next_prop[free] += 1
        if w == w_broken:
            if wrank[w][free] < wrank[w][firm]:
                log.append((free, w, True))
                fp[free] = w
                wp[w] = free
                return BreakmarriageOutcome(BreakStatus.SUCCESS, Matching(fp, wp), log)
            log.append((free, w, False))
            continue
        holder = wp[w]
        if holder == UNMATCHED:
            log.append((free, w, False))
            return BreakmarriageOutcome(BreakStatus.UNMATCHED_WORKER_PROPOSED, None, log)
        if wrank[w][free] < wrank[w][holder]:
            log.append((free, w, True))
            fp[free] = w
            wp[w] = free
            fp[holder] = UNMATCHED
            free = holder
        else:
            log.append((free, w, False))


def breakmarriage_path(market: Market, mu: Matching, firm: int) -> list[BlockingPair]:
    """Accepted-proposal sequence of a successful breakmarriage as a path.

    Replaying the returned pairs through `satisfy`, starting from mu with
    (firm, mu(firm)) severed, ends at the breakmarriage result; each pair is
    the best blocking pair of its worker at application time.
    """
    outcome = breakmarriage(market, mu, firm)
    if outcome.status is not BreakStatus.SUCCESS:
        raise BreakmarriageUnsuccessful(f"breakmarriage(mu, {firm}) ended {outcome.status.value}")
    current = mu.copy()
    w0 = current.firm_partner[firm]
    current.firm_partner[firm] = UNMATCHED
    current.worker_partner[w0] = UNMATCHED
    path: list[BlockingPair] = []
    for f, w, accepted in outcome.proposal_log:
        if not accepted:
            continue
        here = {(bp.firm, bp.worker): bp for bp in blocking_pairs(market, current)}
        bp = here.get((f, w))
        if bp is None:  # cannot happen for a successful run
            raise BreakmarriageUnsuccessful(f"accepted proposal ({f},{w}) is not blocking")
        path.append(bp)
        current = satisfy(market, current, bp)
    if current.firm_partner != outcome.result.firm_partner:
        raise BreakmarriageUnsuccessful("replayed path does not reach the breakmarriage result")
    return path


@dataclass
class StableSet:
    """All stable matchings of a market.

    `matchings` is in discovery order with the firm-optimal matching first;
    `firm_optimal` / `worker_optimal` index into it.
    """

    matchings: list[Matching]
    firm_optimal: int
    worker_optimal: int

    def __len__(self):
        return len(self.matchings)

    def serialization_order(self) -> list[Matching]:
        """Firm-optimal first, worker-optimal last, interior in discovery order."""
        if len(self.matchings) == 1:
            return [self.matchings[0]]
        fo, wo = self.firm_optimal, self.worker_optimal
        mid = [m for i, m in enumerate(self.matchings) if i not in (fo, wo)]
        return [self.matchings[fo]] + mid + [self.matchings[wo]]


@lru_cache(maxsize=32)
def _state_table(n_firms: int, n_workers: int, cap: int):
    """All partial matchings of the given size as partner arrays."""
    import numpy as np
    fps, wps = [], []
    for mt in enumerate_matchings(n_firms, n_workers, cap):
        fps.append(mt.firm_partner)
        wps.append(mt.worker_partner)
    return np.array(fps, dtype=np.int16), np.array(wps, dtype=np.int16)


def _stable_keys_brute(market: Market, cap: int) -> list[tuple[int, ...]]:
    """Firm-partner keys of all stable matchings, by exhaustive vectorized scan."""
    import numpy as np
    fp, wp = _state_table(market.n_firms, market.n_workers, cap)
    n, m = market.n_firms, market.n_workers
    fr = np.array(market.firm_rank, dtype=np.int16)
    wr = np.array(market.worker_rank, dtype=np.int16)
    fcur = np.where(fp >= 0, fr[np.arange(n)[None, :], np.maximum(fp, 0)], m)
    wcur = np.where(wp >= 0, wr[np.arange(m)[None, :], np.maximum(wp, 0)], n)
    wrt = wr.T  # (n, m): wrt[f, w] = rank of f in w's list
    blocked = np.zeros(fp.shape[0], dtype=bool)
    for f in range(n):
        blocked |= ((fr[f][None, :] < fcur[:, f, None]) & (wrt[f][None, :] < wcur)).any(axis=1)
    stable_idx = np.flatnonzero(~blocked)
    return [tuple(int(x) for x in fp[i]) for i in stable_idx]


def enumerate_stable(market: Market, method: str = "breakmarriage",
                     cap: int = 10**6) -> StableSet:
    """Complete stable set via breakmarriage closure or brute force.

    breakmarriage: worklist from the firm-optimal matching, applying the
    operation to every matched firm of every discovered matching and keeping
    successful results.  brute: filter the full matching enumeration (under
    the configured cap) by stability.
    """
    mu_f = deferred_acceptance(market, "firm")
    mu_w = deferred_acceptance(market, "worker")
    if method == "brute":
        keys = _stable_keys_brute(market, cap)
        matchings = [Matching.from_firm_partners(k, market.n_workers) for k in keys]
        by_key = {k: i for i, k in enumerate(keys)}
        return StableSet(matchings, by_key[tuple(mu_f.firm_partner)], by_key[tuple(mu_w.firm_partner)])
    if method != "breakmarriage":
        raise ValueError(f"unknown enumeration method {method!r}")
    seen = {mu_f.key(): 0}
    matchings = [mu_f]
    queue = deque([mu_f])
    while queue:
        mu = queue.popleft()
        for f in mu.matched_firms():
            outcome = breakmarriage(market, mu, f)
            if outcome.status is BreakStatus.SUCCESS:
                key = outcome.result.key()
                if key not in seen:
                    seen[key] = len(matchings)
                    matchings.append(outcome.result)
                    queue.append(outcome.result)
    wo = seen.get(mu_w.key())
    if wo is None:  # closure must contain the worker-optimal matching
        raise InputNotStable("breakmarriage closure failed to reach the worker-optimal matching")
    return StableSet(matchings, 0, wo)
