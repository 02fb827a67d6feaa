"""Fragments: self-contained submarket groups that trap the dynamics.

Equal-size subsets (F, W) form a fragment when some matching on them is
stable for the induced submarket and every inside agent prefers their
partner in it to every outside agent.  A fragment is trivial when all stable
matchings of the full market agree on it.  Detection is either exhaustive
over subsets or closure-based over the pair graphs of stable matchings; the
two are cross-checked in the test suite because the closure shortcut's
completeness rests on inducing matchings extending to stable matchings.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

from .errors import (
    CapExceeded,
    FullSizeSubset,
    ImbalancedMarket,
    PremiseViolated,
    SizeMismatch,
)
from .market import UNMATCHED, Market, Matching
from .stable import enumerate_stable

BRUTE_SIZE_GUARD = 10


@dataclass
class Fragment:
    firms: tuple[int, ...]
    workers: tuple[int, ...]
    inducing_matchings: list[Matching]
    trivial: bool

    @property
    def size(self) -> int:
        return len(self.firms)

    def report_line(self) -> str:
        return (f"fragment k={self.size}"
                f" F={{{','.join(map(str, self.firms))}}}"
                f" W={{{','.join(map(str, self.workers))}}}"
                f" trivial={1 if self.trivial else 0}"
                f" inducing={len(self.inducing_matchings)}")


def _require_balanced(market: Market):
    if not market.is_balanced:
        raise ImbalancedMarket("fragments are defined for balanced markets only")


def inducing_matchings(market: Market, firms, workers) -> list[Matching]:
    """All matchings on the subset pair that induce it as a fragment.

    Empty list means (firms, workers) is not a fragment.  Each inducing
    matching is returned on the full index space with only subset pairs
    matched, in a deterministic order.
    """
    _require_balanced(market)
    firms = list(firms)
    workers = list(workers)
    fsub = sorted(set(firms))
    wsub = sorted(set(workers))
    if not fsub or len(fsub) != len(firms) or len(wsub) != len(workers) or len(fsub) != len(wsub):
        raise SizeMismatch("subsets must be nonempty, duplicate-free, and of equal size")
    if len(fsub) == market.n_firms:
        raise FullSizeSubset("a fragment is a proper subset pair")
    sub = market.restrict(fsub, wsub)
    out_w = [w for w in range(market.n_workers) if w not in set(wsub)]
    out_f = [f for f in range(market.n_firms) if f not in set(fsub)]
    # highest-ranked outsider per inside agent; partners must beat it
    f_bar = {f: min(market.firm_rank[f][w] for w in out_w) for f in fsub}
    w_bar = {w: min(market.worker_rank[w][f] for f in out_f) for w in wsub}
    found = []
    for mt in enumerate_stable(sub, "breakmarriage").matchings:
        ok = True
        for fi, wi in mt.pairs():
            f, w = fsub[fi], wsub[wi]
            if market.firm_rank[f][w] > f_bar[f] or market.worker_rank[w][f] > w_bar[w]:
                ok = False
                break
        if ok:
            pairs = [(fsub[fi], wsub[wi]) for fi, wi in mt.pairs()]
            found.append(Matching.from_pairs(pairs, market.n_firms, market.n_workers))
    found.sort(key=lambda m: m.key())
    return found


def _restriction_key(matching: Matching, firms: tuple[int, ...]) -> tuple[int, ...]:
    return tuple(matching.firm_partner[f] for f in firms)


def _classify(stable_matchings, firms: tuple[int, ...]) -> bool:
    keys = {_restriction_key(mu, firms) for mu in stable_matchings}
    return len(keys) == 1


def _pair_graph(market: Market, mu: Matching) -> tuple[list[tuple[int, int]], list[list[int]]]:
    """Directed graph on mu's pairs: p -> q when p's firm prefers q's worker
    to p's worker, or p's worker prefers q's firm to p's firm."""
    pairs = mu.pairs()
    idx = {p: i for i, p in enumerate(pairs)}
    adj: list[list[int]] = [[] for _ in pairs]
    for i, (f, w) in enumerate(pairs):
        fr = market.firm_rank[f]
        wr = market.worker_rank[w]
        for j, (f2, w2) in enumerate(pairs):
            if i == j:
                continue
            if fr[w2] < fr[w] or wr[f2] < wr[f]:
                adj[i].append(j)
    return pairs, adj


def _out_closure(adj: list[list[int]], start: int) -> frozenset[int]:
    seen = {start}
    stack = [start]
    while stack:
        u = stack.pop()
        for v in adj[u]:
            if v not in seen:
                seen.add(v)
                stack.append(v)
    return frozenset(seen)


def _closed_sets(adj: list[list[int]], max_sets: int) -> set[frozenset[int]]:
    """All out-closed vertex sets, generated as unions of single closures."""
    n = len(adj)
    closures = {_out_closure(adj, i) for i in range(n)}
    closed: set[frozenset[int]] = set(closures)
    frontier = list(closures)
    while frontier:
        nxt = []
        for s in frontier:
            for c in closures:
                u = s | c
                if u not in closed:
                    closed.add(u)
                    if len(closed) > max_sets:
                        raise CapExceeded(f"more than {max_sets} closed pair sets")
                    nxt.append(u)
        frontier = nxt
    return closed


def find_fragments(market: Market, method: str = "brute", cap: int = 4096) -> list[Fragment]:
    """All fragments, classified trivial/non-trivial against the stable set.

    brute scans every proper subset pair (guarded to n <= 10); closure scans
    the out-closed pair sets of each stable matching.
    """
    _require_balanced(market)
    n = market.n_firms
    stable_set = enumerate_stable(market, "breakmarriage").matchings
    out: dict[tuple[tuple[int, ...], tuple[int, ...]], Fragment] = {}
    if method == "brute":
        if n > BRUTE_SIZE_GUARD:
            raise CapExceeded(f"brute-force subset scan is guarded to n <= {BRUTE_SIZE_GUARD}")
        for k in range(1, n):
            for fsub in combinations(range(n), k):
                for wsub in combinations(range(n), k):
                    inducing = inducing_matchings(market, fsub, wsub)
                    if inducing:
                        out[(fsub, wsub)] = Fragment(
                            fsub, wsub, inducing, _classify(stable_set, fsub))
    elif method == "closure":
        for mu in stable_set:
            pairs, adj = _pair_graph(market, mu)
            for s in _closed_sets(adj, cap):
                if len(s) == len(pairs):
                    continue
                fsub = tuple(sorted(pairs[i][0] for i in s))
                wsub = tuple(sorted(pairs[i][1] for i in s))
                sub_pairs = [pairs[i] for i in sorted(s)]
                inducing = Matching.from_pairs(sub_pairs, n, market.n_workers)
                frag = out.get((fsub, wsub))
                if frag is None:
                    out[(fsub, wsub)] = Fragment(
                        fsub, wsub, [inducing], _classify(stable_set, fsub))
                elif inducing.key() not in {m.key() for m in frag.inducing_matchings}:
                    frag.inducing_matchings.append(inducing)
                    frag.inducing_matchings.sort(key=lambda m: m.key())
    else:
        raise ValueError(f"unknown fragment method {method!r}")
    return [out[k] for k in sorted(out, key=lambda k: (len(k[0]), k))]


def has_nontrivial_fragment(market: Market) -> bool:
    """Closure fast path: a pair of some stable matching whose out-closure is
    a proper pair subset, while another stable matching omits the pair."""
    _require_balanced(market)
    stable_set = enumerate_stable(market, "breakmarriage").matchings
    if len(stable_set) == 1:
        return False
    for mu in stable_set:
        pairs, adj = _pair_graph(market, mu)
        for i, (f, w) in enumerate(pairs):
            if len(_out_closure(adj, i)) == len(pairs):
                continue
            if any(mu2.firm_partner[f] != w for mu2 in stable_set):
                return True
    return False


def nested_fragment_chain(market: Market) -> list[tuple[int, int]] | None:
    """Iterated mutual-favorite peeling; None when it stalls before completion.

    A full chain certifies the sequential preference structure: the chain's
    pairing is then the unique stable matching.
    """
    _require_balanced(market)
    n = market.n_firms
    live_f = set(range(n))
    live_w = set(range(n))
    chain: list[tuple[int, int]] = []
    while live_f:
        fav_w = {}
        for f in live_f:
            fav_w[f] = next(w for w in market.firm_prefs[f] if w in live_w)
        fav_f = {}
        for w in live_w:
            fav_f[w] = next(f for f in market.worker_prefs[w] if f in live_f)
        peeled = sorted(f for f in live_f if fav_f.get(fav_w[f]) == f)
        if not peeled:
            return None
        for f in peeled:
            w = fav_w[f]
            chain.append((f, w))
            live_f.remove(f)
            live_w.remove(w)
    return chain


@dataclass
class FragmentReport:
    fragments_checked: int
    stable_count: int
    violations: list[str]

    @property
    def ok(self) -> bool:
        return not self.violations


def check_fragment_closure(market: Market, method: str = "brute") -> FragmentReport:
    """Every stable matching must map each fragment's firms onto its workers."""
    _require_balanced(market)
    fragments = find_fragments(market, method)
    stable_set = enumerate_stable(market, "breakmarriage").matchings
    violations = []
    for frag in fragments:
        wset = set(frag.workers)
        for mu in stable_set:
            image = {mu.firm_partner[f] for f in frag.firms}
            if UNMATCHED in image or image != wset:
                violations.append(f"{frag.report_line()} not preserved by {mu.pairs()}")
    return FragmentReport(len(fragments), len(stable_set), violations)


def check_trivial_fragment_removal(market: Market, method: str = "brute") -> FragmentReport:
    """Removing a trivial fragment must leave no non-trivial fragments.

    Premise: the market has no non-trivial fragment and at least one trivial
    one; violated premises raise rather than report.
    """
    _require_balanced(market)
    fragments = find_fragments(market, method)
    if any(not f.trivial for f in fragments):
        raise PremiseViolated("market has a non-trivial fragment")
    trivial = [f for f in fragments if f.trivial]
    if not trivial:
        raise PremiseViolated("market has no trivial fragment")
    violations = []
    n = market.n_firms
    for frag in trivial:
        rest_f = [f for f in range(n) if f not in set(frag.firms)]
        rest_w = [w for w in range(n) if w not in set(frag.workers)]
        if not rest_f:
            continue
        sub = market.restrict(rest_f, rest_w)
        if has_nontrivial_fragment(sub):
            violations.append(f"removing {frag.report_line()} exposes a non-trivial fragment")
    return FragmentReport(len(trivial), 0, violations)


def fragments_report_text(fragments: list[Fragment]) -> str:
    return "\n".join(f.report_line() for f in fragments) + ("\n" if fragments else "")


__all__ = [
    "Fragment", "FragmentReport", "inducing_matchings", "find_fragments",
    "has_nontrivial_fragment", "nested_fragment_chain",
    "check_fragment_closure", "check_trivial_fragment_removal",
    "fragments_report_text",
]
