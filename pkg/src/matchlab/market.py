"""Markets, matchings, and the blocking-pair machinery.

A market holds strict full-length preference lists for firms over workers and
workers over firms (every pair mutually acceptable), with optional positive
cardinal values that must agree with the ordinal ranking.  Matchings are
partial one-to-one assignments stored as dual partner arrays with -1 for
unmatched; rank tables make every preference comparison O(1).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Iterator

from .errors import (
    CapExceeded,
    DuplicateEntry,
    FirmUnmatched,
    InputNotStable,
    MissingPartner,
    NotABlockingPair,
    ValueOrderMismatch,
)
from .rng import SplitMix64

UNMATCHED = -1

FIRMS = "firm"
WORKERS = "worker"


def _build_rank(prefs: tuple[tuple[int, ...], ...], other_size: int) -> tuple[tuple[int, ...], ...]:
    rank_rows = []
    for lst in prefs:
        row = [0] * other_size
        for r, p in enumerate(lst):
            row[p] = r
        rank_rows.append(tuple(row))
    return tuple(rank_rows)


def _check_side(side: str, prefs, other_size: int) -> tuple[tuple[int, ...], ...]:
    checked = []
    for a, lst in enumerate(prefs):
        seen = [False] * other_size
        for p in lst:
            if not (0 <= p < other_size) or seen[p]:
                raise DuplicateEntry(side, a, p)
            seen[p] = True
        for p, ok in enumerate(seen):
            if not ok:
                raise MissingPartner(side, a, p)
        checked.append(tuple(lst))
    return tuple(checked)


def _check_values(side: str, prefs, values) -> tuple[tuple[float, ...], ...]:
    rows = []
    for a, lst in enumerate(prefs):
        row = values[a]
        for better, worse in zip(lst, lst[1:]):
            if not (row[better] > row[worse]):
                raise ValueOrderMismatch(side, a)
        if min(row) <= 0:
            raise ValueOrderMismatch(side, a)
        rows.append(tuple(float(v) for v in row))
    return tuple(rows)


class Market:
    """Two-sided market with strict, complete preference lists.

    Immutable after construction; safe to share across workers.
    """

    __slots__ = (
        "n_firms", "n_workers", "firm_prefs", "worker_prefs",
        "firm_rank", "worker_rank", "firm_values", "worker_values",
        "__dict__",
    )

    def __init__(self, firm_prefs, worker_prefs, firm_values=None, worker_values=None,
                 validate: bool = True):
        n, m = len(firm_prefs), len(worker_prefs)
        if validate:
            firm_prefs = _check_side(FIRMS, firm_prefs, m)
            worker_prefs = _check_side(WORKERS, worker_prefs, n)
        else:
            firm_prefs = tuple(tuple(p) for p in firm_prefs)
            worker_prefs = tuple(tuple(p) for p in worker_prefs)
        self.n_firms = n
        self.n_workers = m
        self.firm_prefs = firm_prefs
        self.worker_prefs = worker_prefs
        self.firm_rank = _build_rank(firm_prefs, m)
        self.worker_rank = _build_rank(worker_prefs, n)
        if (firm_values is None) != (worker_values is None):
            raise ValueError("cardinal values must be supplied for both sides or neither")
        if firm_values is not None:
            if validate:
                firm_values = _check_values(FIRMS, firm_prefs, firm_values)
                worker_values = _check_values(WORKERS, worker_prefs, worker_values)
            else:
                firm_values = tuple(tuple(map(float, r)) for r in firm_values)
                worker_values = tuple(tuple(map(float, r)) for r in worker_values)
        self.firm_values = firm_values
        # stored worker-major: worker_values[w][f], aligned with worker_prefs rows
        self.worker_values = worker_values

    @property
    def has_values(self) -> bool:
        return self.firm_values is not None

    @property
    def is_balanced(self) -> bool:
        return self.n_firms == self.n_workers

    def transpose(self) -> "Market":
        """Swap the two sides (workers become the proposing-side analogue)."""
        return Market(self.worker_prefs, self.firm_prefs,
                      self.worker_values, self.firm_values, validate=False)

    def restrict(self, firms: Iterable[int], workers: Iterable[int]) -> "Market":
        """Submarket induced by the given index subsets (re-indexed densely).

        Position k in the sorted subset becomes index k of the submarket.
        """
        fsub = sorted(firms)
        wsub = sorted(workers)
        wpos = {w: k for k, w in enumerate(wsub)}
        fpos = {f: k for k, f in enumerate(fsub)}
        fprefs = tuple(tuple(wpos[w] for w in self.firm_prefs[f] if w in wpos) for f in fsub)
        wprefs = tuple(tuple(fpos[f] for f in self.worker_prefs[w] if f in fpos) for w in wsub)
        fv = wv = None
        if self.has_values:
            fv = tuple(tuple(self.firm_values[f][w] for w in wsub) for f in fsub)
            wv = tuple(tuple(self.worker_values[w][f] for f in fsub) for w in wsub)
        return Market(fprefs, wprefs, fv, wv, validate=False)

    @cached_property
    def np_tables(self):
        """(firm_rank, worker_rank) as int64 arrays for the simulation kernel."""
        import numpy as np
        fr = np.array(self.firm_rank, dtype=np.int64)
        wr = np.array(self.worker_rank, dtype=np.int64)
        return fr, wr

    def __eq__(self, other):
        return (isinstance(other, Market)
                and self.firm_prefs == other.firm_prefs
                and self.worker_prefs == other.worker_prefs
                and self.firm_values == other.firm_values
                and self.worker_values == other.worker_values)

    def __hash__(self):
        return hash((self.firm_prefs, self.worker_prefs))

    def __repr__(self):
        return f"Market({self.n_firms}x{self.n_workers})"


class Matching:
    """Partial one-to-one assignment; mutually consistent dual arrays."""

    __slots__ = ("firm_partner", "worker_partner")

    def __init__(self, firm_partner: list[int], worker_partner: list[int]):
        self.firm_partner = firm_partner
        self.worker_partner = worker_partner

    @classmethod
    def empty(cls, n_firms: int, n_workers: int) -> "Matching":
        return cls([UNMATCHED] * n_firms, [UNMATCHED] * n_workers)

    @classmethod
    def from_pairs(cls, pairs: Iterable[tuple[int, int]], n_firms: int, n_workers: int) -> "Matching":
        m = cls.empty(n_firms, n_workers)
        for f, w in pairs:
            if m.firm_partner[f] != UNMATCHED or m.worker_partner[w] != UNMATCHED:
                raise ValueError(f"agent reused in pair ({f},{w})")
            m.firm_partner[f] = w
            m.worker_partner[w] = f
        return m

    @classmethod
    def from_firm_partners(cls, firm_partner: Iterable[int], n_workers: int) -> "Matching":
        fp = list(firm_partner)
        wp = [UNMATCHED] * n_workers
        for f, w in enumerate(fp):
            if w != UNMATCHED:
                wp[w] = f
        return cls(fp, wp)

    def copy(self) -> "Matching":
        return Matching(self.firm_partner[:], self.worker_partner[:])

    def key(self) -> tuple[int, ...]:
        """Canonical identity: the firm-partner vector."""
        return tuple(self.firm_partner)

    def pairs(self) -> list[tuple[int, int]]:
        return [(f, w) for f, w in enumerate(self.firm_partner) if w != UNMATCHED]

    def matched_firms(self) -> list[int]:
        return [f for f, w in enumerate(self.firm_partner) if w != UNMATCHED]

    @property
    def n_matched(self) -> int:
        return sum(1 for w in self.firm_partner if w != UNMATCHED)

    def is_consistent(self) -> bool:
        for f, w in enumerate(self.firm_partner):
            if w != UNMATCHED and self.worker_partner[w] != f:
                return False
        for w, f in enumerate(self.worker_partner):
            if f != UNMATCHED and self.firm_partner[f] != w:
                return False
        return True

    def __eq__(self, other):
        return (isinstance(other, Matching)
                and self.firm_partner == other.firm_partner
                and self.worker_partner == other.worker_partner)

    def __hash__(self):
        return hash((tuple(self.firm_partner), len(self.worker_partner)))

    def __repr__(self):
        return f"Matching({self.pairs()})"


@dataclass(frozen=True)
class BlockingPair:
    """A mutually preferring unmatched pair, with per-agent best-pair flags."""

    firm: int
    worker: int
    best_for_firm: bool = False
    best_for_worker: bool = False


def _cur_rank_firm(market: Market, matching: Matching, f: int) -> int:
    w = matching.firm_partner[f]
    # unmatched ranks below every worker (all pairs acceptable)
    return market.firm_rank[f][w] if w != UNMATCHED else market.n_workers


def _cur_rank_worker(market: Market, matching: Matching, w: int) -> int:
    f = matching.worker_partner[w]
    return market.worker_rank[w][f] if f != UNMATCHED else market.n_firms


def is_blocking(market: Market, matching: Matching, f: int, w: int) -> bool:
    if matching.firm_partner[f] == w:
        return False
    return (market.firm_rank[f][w] < _cur_rank_firm(market, matching, f)
            and market.worker_rank[w][f] < _cur_rank_worker(market, matching, w))


def blocking_pairs(market: Market, matching: Matching) -> list[BlockingPair]:
    """All blocking pairs in (firm, worker) row-major order, best flags set.

    A pair is flagged best for an agent when the partner is that agent's most
    preferred among all of the agent's blocking partners.
    """
    n, m = market.n_firms, market.n_workers
    frank, wrank = market.firm_rank, market.worker_rank
    fcur = [_cur_rank_firm(market, matching, f) for f in range(n)]
    wcur = [_cur_rank_worker(market, matching, w) for w in range(m)]
    raw: list[tuple[int, int]] = []
    best_w_for_f: dict[int, int] = {}
    best_f_for_w: dict[int, int] = {}
    for f in range(n):
        fr = frank[f]
        cf = fcur[f]
        for w in range(m):
            if fr[w] < cf and wrank[w][f] < wcur[w]:
                raw.append((f, w))
                if f not in best_w_for_f or fr[w] < fr[best_w_for_f[f]]:
                    best_w_for_f[f] = w
                if w not in best_f_for_w or wrank[w][f] < wrank[w][best_f_for_w[w]]:
                    best_f_for_w[w] = f
    return [BlockingPair(f, w, best_w_for_f[f] == w, best_f_for_w[w] == f) for f, w in raw]


def satisfy(market: Market, matching: Matching, pair: BlockingPair | tuple[int, int]) -> Matching:
    """Match the blocking pair, unmatching their former partners."""
    f, w = (pair.firm, pair.worker) if isinstance(pair, BlockingPair) else pair
    if not is_blocking(market, matching, f, w):
        raise NotABlockingPair(f"({f},{w}) does not block the given matching")
    out = matching.copy()
    old_w = out.firm_partner[f]
    old_f = out.worker_partner[w]
    if old_w != UNMATCHED:
        out.worker_partner[old_w] = UNMATCHED
    if old_f != UNMATCHED:
        out.firm_partner[old_f] = UNMATCHED
    out.firm_partner[f] = w
    out.worker_partner[w] = f
    return out


def is_stable(market: Market, matching: Matching) -> bool:
    n, m = market.n_firms, market.n_workers
    frank, wrank = market.firm_rank, market.worker_rank
    wcur = [_cur_rank_worker(market, matching, w) for w in range(m)]
    for f in range(n):
        cf = _cur_rank_firm(market, matching, f)
        # workers ranked above f's current partner; any reciprocation blocks
        for w in market.firm_prefs[f][:cf]:
            if wrank[w][f] < wcur[w]:
                return False
    return True


def stable_pair_count(matching: Matching, reference: Matching) -> int:
    """Number of firms holding the same partner as in the reference."""
    return sum(1 for w, r in zip(matching.firm_partner, reference.firm_partner)
               if w != UNMATCHED and w == r)


def mismatch_proportion(matching: Matching, reference: Matching) -> float:
    """Fraction of firms whose partner differs from the reference."""
    n = len(matching.firm_partner)
    return 1.0 - stable_pair_count(matching, reference) / n


def worker_mismatch_proportion(matching: Matching, reference: Matching) -> float:
    """Fraction of workers whose partner differs from the reference."""
    m = len(matching.worker_partner)
    same = sum(1 for f, r in zip(matching.worker_partner, reference.worker_partner)
               if f != UNMATCHED and f == r)
    return 1.0 - same / m


def count_matchings(n_firms: int, n_workers: int) -> int:
    """Number of partial matchings: sum_k C(n,k) C(m,k) k!."""
    total = 0
    for k in range(min(n_firms, n_workers) + 1):
        total += math.comb(n_firms, k) * math.comb(n_workers, k) * math.factorial(k)
    return total


DEFAULT_ENUM_CAP = 10**6


def enumerate_matchings(n_firms: int, n_workers: int, cap: int = DEFAULT_ENUM_CAP) -> Iterator[Matching]:
    """Every partial matching exactly once, empty matching first.

    Order is by matched-pair count, then lexicographically on the
    firm-partner vector (unmatched sorts first); the exact-analysis module
    relies on this for stable state indexing.
    """
    if count_matchings(n_firms, n_workers) > cap:
        raise CapExceeded(
            f"{n_firms}x{n_workers} has {count_matchings(n_firms, n_workers)} matchings (cap {cap})")
    fp = [UNMATCHED] * n_firms
    used = [False] * n_workers

    def rec(f: int, remaining: int):
        if f == n_firms:
            if remaining == 0:
                yield Matching.from_firm_partners(fp, n_workers)
            return
        # prune: cannot place `remaining` pairs among the firms left
        if remaining > n_firms - f:
            return
        if remaining < n_firms - f:
            fp[f] = UNMATCHED
            yield from rec(f + 1, remaining)
        if remaining > 0:
            for w in range(n_workers):
                if not used[w]:
                    used[w] = True
                    fp[f] = w
                    yield from rec(f + 1, remaining - 1)
                    fp[f] = UNMATCHED
                    used[w] = False

    for k in range(min(n_firms, n_workers) + 1):
        yield from rec(0, k)


def random_market(n_firms: int, n_workers: int, seed: int, with_cardinal: bool = False) -> Market:
    """Market with independent uniform preference permutations.

    Draw order is fixed (firms 0..n-1 then workers 0..m-1) so a seed pins the
    market exactly.  With cardinal values, each agent's values are m iid
    U(0,1) draws sorted to agree with the ordinal list.
    """
    rng = SplitMix64(seed)
    fprefs = [rng.permutation(n_workers) for _ in range(n_firms)]
    wprefs = [rng.permutation(n_firms) for _ in range(n_workers)]
    fvals = wvals = None
    if with_cardinal:
        def draw_values(prefs, k):
            vals = sorted((rng.random() for _ in range(k)), reverse=True)
            row = [0.0] * k
            for r, p in enumerate(prefs):
                row[p] = vals[r]
            return row
        fvals = [draw_values(fprefs[f], n_workers) for f in range(n_firms)]
        wvals = [draw_values(wprefs[w], n_firms) for w in range(n_workers)]
    return Market(fprefs, wprefs, fvals, wvals, validate=False)


def assortative_market(n: int) -> Market:
    """Common rankings on both sides; identity is the unique stable matching."""
    row_f = tuple(range(n))
    return Market(tuple(row_f for _ in range(n)), tuple(row_f for _ in range(n)), validate=False)


def almost_stable(market: Market, stable: Matching, firm: int) -> Matching:
    """Unmatch one firm from its partner in a stable matching.

    The result is one blocking pair away from the input (satisfying the
    severed pair restores it).
    """
    if not is_stable(market, stable):
        raise InputNotStable("almost_stable requires a stable input matching")
    if stable.firm_partner[firm] == UNMATCHED:
        raise FirmUnmatched(f"firm {firm} is unmatched")
    out = stable.copy()
    w = out.firm_partner[firm]
    out.firm_partner[firm] = UNMATCHED
    out.worker_partner[w] = UNMATCHED
    return out


def perturb_epsilon(market: Market, stable: Matching, epsilon: float, seed: int) -> Matching:
    """Unmatch ceil(epsilon * n_firms) uniformly chosen matched firms."""
    if not (0 < epsilon <= 1):
        raise ValueError("epsilon must lie in (0, 1]")
    k = math.ceil(epsilon * market.n_firms)
    rng = SplitMix64(seed)
    matched = stable.matched_firms()
    out = stable.copy()
    for f in [matched[i] for i in rng.sample_indices(len(matched), min(k, len(matched)))]:
        w = out.firm_partner[f]
        out.firm_partner[f] = UNMATCHED
        out.worker_partner[w] = UNMATCHED
    return out
