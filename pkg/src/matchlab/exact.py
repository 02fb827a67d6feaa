"""Exhaustive reachability and exact absorption analysis on small markets.

The full matching space of a market becomes a directed graph whose edges
are single satisfy steps; stable matchings are exactly the sinks.  On top of
it: reachable-set queries, the three-way equivalence check between
reachability conditions and fragment structure, and absorbing-Markov-chain
solves (dense float, plus an exact rational path for small markets).
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from fractions import Fraction

from .dynamics import UNIFORM_AGENT_BEST, UNIFORM_PAIR, WeightRule, pair_weights
from .errors import CapExceeded, SingularSystem, StateNotFound
from .fragments import has_nontrivial_fragment
from .market import (
    BlockingPair,
    Market,
    Matching,
    blocking_pairs,
    enumerate_matchings,
    satisfy,
)

RULE_ALL = "all-pairs"
RULE_BEST = "best-pairs"


@dataclass
class MatchingGraph:
    """One-step transition structure over every matching of a market."""

    market: Market
    rule: str
    states: list[Matching]
    index: dict[tuple[int, ...], int]
    edges: list[list[tuple[BlockingPair, int]]]
    stable_indices: list[int]

    @property
    def n_states(self) -> int:
        return len(self.states)

    def state_of(self, matching: Matching) -> int:
        idx = self.index.get(matching.key())
        if idx is None:
            raise StateNotFound(f"matching {matching.pairs()} is not a state of this graph")
        return idx


def build_graphs(market: Market, cap: int = 10**6) -> tuple[MatchingGraph, MatchingGraph]:
    """Build the all-pairs and best-pairs graphs in one enumeration pass."""
    states = list(enumerate_matchings(market.n_firms, market.n_workers, cap))
    index = {s.key(): i for i, s in enumerate(states)}
    edges_all: list[list[tuple[BlockingPair, int]]] = []
    edges_best: list[list[tuple[BlockingPair, int]]] = []
    stable: list[int] = []
    for i, s in enumerate(states):
        bps = blocking_pairs(market, s)
        if not bps:
            stable.append(i)
            edges_all.append([])
            edges_best.append([])
            continue
        row_all = []
        row_best = []
        for bp in bps:
            succ = index[satisfy(market, s, bp).key()]
            row_all.append((bp, succ))
            if bp.best_for_firm or bp.best_for_worker:
                row_best.append((bp, succ))
        edges_all.append(row_all)
        edges_best.append(row_best)
    g_all = MatchingGraph(market, RULE_ALL, states, index, edges_all, stable)
    g_best = MatchingGraph(market, RULE_BEST, states, index, edges_best, stable)
    return g_all, g_best


def build_graph(market: Market, rule: str = RULE_ALL, cap: int = 10**6) -> MatchingGraph:
    g_all, g_best = build_graphs(market, cap)
    if rule == RULE_ALL:
        return g_all
    if rule == RULE_BEST:
        return g_best
    raise ValueError(f"unknown transition rule {rule!r}")


def reachable_stable_set(graph: MatchingGraph, start: Matching) -> list[Matching]:
    """Stable states reachable from start by directed search."""
    s0 = graph.state_of(start)
    seen = {s0}
    queue = deque([s0])
    found = []
    stable = set(graph.stable_indices)
    while queue:
        u = queue.popleft()
        if u in stable:
            found.append(graph.states[u])
        for _, v in graph.edges[u]:
            if v not in seen:
                seen.add(v)
                queue.append(v)
    found.sort(key=lambda mt: mt.key())
    return found


def _backward_reach(graph: MatchingGraph, target: int, reverse: list[list[int]]) -> set[int]:
    seen = {target}
    queue = deque([target])
    while queue:
        u = queue.popleft()
        for v in reverse[u]:
            if v not in seen:
                seen.add(v)
                queue.append(v)
    return seen


@dataclass
class RuleEquivalence:
    """The three conditions evaluated under one transition rule."""

    rule: str
    unstable_reach_all: bool
    almost_stable_reach_all: bool
    no_nontrivial_fragments: bool

    @property
    def equivalent(self) -> bool:
        return self.unstable_reach_all == self.almost_stable_reach_all == self.no_nontrivial_fragments


@dataclass
class EquivalenceReport:
    all_pairs: RuleEquivalence
    best_pairs: RuleEquivalence

    @property
    def equivalent(self) -> bool:
        return self.all_pairs.equivalent and self.best_pairs.equivalent


def check_reachability_equivalence(market: Market, cap: int = 10**6) -> EquivalenceReport:
    """Evaluate, under both rules: (a) every unstable matching reaches every
    stable one, (b) every almost-stable matching does, (c) there is no
    non-trivial fragment; the three must agree per rule.

    Almost-stable states are those one (unrestricted) satisfy step away from
    a stable state.
    """
    g_all, g_best = build_graphs(market, cap)
    stable = set(g_all.stable_indices)
    unstable = [i for i in range(g_all.n_states) if i not in stable]
    almost = [i for i in unstable
              if any(v in stable for _, v in g_all.edges[i])]
    no_frag = not has_nontrivial_fragment(market)
    out = []
    for g in (g_all, g_best):
        reverse: list[list[int]] = [[] for _ in range(g.n_states)]
        for u, row in enumerate(g.edges):
            for _, v in row:
                reverse[v].append(u)
        cond_unstable = True
        cond_almost = True
        for t in g.stable_indices:
            back = _backward_reach(g, t, reverse)
            if cond_unstable and not all(i in back for i in unstable):
                cond_unstable = False
            if cond_almost and not all(i in back for i in almost):
                cond_almost = False
            if not cond_unstable and not cond_almost:
                break
        out.append(RuleEquivalence(g.rule, cond_unstable, cond_almost, no_frag))
    return EquivalenceReport(out[0], out[1])


@dataclass
class AbsorptionResult:
    """Absorption probabilities and expected hitting times, per start state.

    probabilities[s][a] is the chance of ending in stable state
    stable_indices[a] when started from state s; rows sum to one.  Entries
    are floats, or Fractions from the exact solver.
    """

    graph: MatchingGraph
    stable_indices: list[int]
    probabilities: list[list]
    expected_steps: list

    def probability(self, start: Matching, target: Matching):
        s = self.graph.state_of(start)
        t = self.graph.state_of(target)
        return self.probabilities[s][self.stable_indices.index(t)]

    def expected(self, start: Matching):
        return self.expected_steps[self.graph.state_of(start)]

    def csv_rows(self):
        for s in range(self.graph.n_states):
            for a, t in enumerate(self.stable_indices):
                yield s, t, float(self.probabilities[s][a]), float(self.expected_steps[s])


def _edge_probabilities(graph: MatchingGraph, rule: WeightRule, exact: bool):
    """Per-state successor probability maps under the weight rule."""
    market = graph.market
    rows = []
    for i, s in enumerate(graph.states):
        row: dict[int, object] = {}
        if graph.edges[i]:
            pairs = [bp for bp, _ in graph.edges[i]]
            if exact:
                if rule.kind == UNIFORM_PAIR:
                    raw = [1] * len(pairs)
                elif rule.kind == UNIFORM_AGENT_BEST:
                    raw = [int(p.best_for_firm) + int(p.best_for_worker) for p in pairs]
                else:
                    raise ValueError("exact absorption supports the uniform rules only")
                total = sum(raw)
                weights = [Fraction(x, total) for x in raw]
            else:
                raw = pair_weights(market, s, pairs, rule, 0)
                total = sum(raw)
                weights = [x / total for x in raw]
            for (bp, succ), wgt in zip(graph.edges[i], weights):
                if wgt <= 0:
                    raise ValueError(
                        f"rule {rule.kind} puts zero weight on edge {bp} of the {graph.rule} graph")
                row[succ] = row.get(succ, 0) + wgt
        rows.append(row)
    return rows


EXACT_SOLVE_CAP = 256


def absorption(graph: MatchingGraph, rule: WeightRule | None = None,
               exact: bool = False, exact_cap: int = EXACT_SOLVE_CAP) -> AbsorptionResult:
    """Solve the absorbing chain for absorption probabilities and times.

    The rule must place positive weight on every edge of the graph (pair it
    with its matching graph rule: uniform-pair with all-pairs, agent-best
    with best-pairs).  Custom weights are evaluated at step 0 and treated as
    time-homogeneous.  The exact rational solver is cubic in the transient
    count with bignum coefficients and is guarded to small markets; the
    float path handles everything under the enumeration cap.
    """
    if rule is None:
        rule = WeightRule.named(UNIFORM_PAIR if graph.rule == RULE_ALL else UNIFORM_AGENT_BEST)
    if rule.uses_best_pairs and graph.rule == RULE_ALL:
        raise ValueError("agent-best weights are zero on non-best edges; use the best-pairs graph")
    stable = graph.stable_indices
    stable_pos = {t: a for a, t in enumerate(stable)}
    transient = [i for i in range(graph.n_states) if i not in stable_pos]
    tpos = {i: k for k, i in enumerate(transient)}
    if exact and len(transient) > exact_cap:
        raise CapExceeded(
            f"exact solve guarded to {exact_cap} transient states; got {len(transient)}")
    probs = _edge_probabilities(graph, rule, exact)
    if exact:
        probabilities, expected = _solve_exact(probs, transient, tpos, stable, stable_pos, graph.n_states)
    else:
        probabilities, expected = _solve_float(probs, transient, tpos, stable, stable_pos, graph.n_states)
    return AbsorptionResult(graph, stable, probabilities, expected)


def _solve_float(probs, transient, tpos, stable, stable_pos, n_states):
    import numpy as np
    nt, na = len(transient), len(stable)
    Q = np.zeros((nt, nt))
    R = np.zeros((nt, na))
    for i, u in enumerate(transient):
        for v, p in probs[u].items():
            if v in tpos:
                Q[i, tpos[v]] += p
            else:
                R[i, stable_pos[v]] += p
    A = np.eye(nt) - Q
    try:
        B = np.linalg.solve(A, R) if nt else np.zeros((0, na))
        t = np.linalg.solve(A, np.ones(nt)) if nt else np.zeros(0)
    except np.linalg.LinAlgError as exc:
        raise SingularSystem("transition structure is not a valid absorbing chain") from exc
    probabilities = []
    expected = []
    for s in range(n_states):
        if s in stable_pos:
            row = [0.0] * na
            row[stable_pos[s]] = 1.0
            probabilities.append(row)
            expected.append(0.0)
        else:
            probabilities.append([float(x) for x in B[tpos[s]]])
            expected.append(float(t[tpos[s]]))
    return probabilities, expected


def _solve_exact(probs, transient, tpos, stable, stable_pos, n_states):
    """Gaussian elimination over Fractions on (I - Q) [B | t] = [R | 1]."""
    nt, na = len(transient), len(stable)
    A = [[Fraction(0)] * nt for _ in range(nt)]
    rhs = [[Fraction(0)] * (na + 1) for _ in range(nt)]
    for i, u in enumerate(transient):
        A[i][i] = Fraction(1)
        rhs[i][na] = Fraction(1)
        for v, p in probs[u].items():
            if v in tpos:
                A[i][tpos[v]] -= p
            else:
                rhs[i][stable_pos[v]] += p
    for col in range(nt):
        piv = next((r for r in range(col, nt) if A[r][col] != 0), None)
        if piv is None:
            raise SingularSystem("exact solve hit a zero pivot column")
        A[col], A[piv] = A[piv], A[col]
        rhs[col], rhs[piv] = rhs[piv], rhs[col]
        inv = 1 / A[col][col]
        A[col] = [x * inv for x in A[col]]
        rhs[col] = [x * inv for x in rhs[col]]
        for r in range(nt):
            if r != col and A[r][col] != 0:
                factor = A[r][col]
                A[r] = [a - factor * b for a, b in zip(A[r], A[col])]
                rhs[r] = [a - factor * b for a, b in zip(rhs[r], rhs[col])]
    probabilities = []
    expected = []
    for s in range(n_states):
        if s in stable_pos:
            row = [Fraction(0)] * na
            row[stable_pos[s]] = Fraction(1)
            probabilities.append(row)
            expected.append(Fraction(0))
        else:
            probabilities.append(rhs[tpos[s]][:na])
            expected.append(rhs[tpos[s]][na])
    return probabilities, expected


def absorption_csv(result: AbsorptionResult) -> str:
    lines = ["state_index,stable_index,probability,expected_steps"]
    for s, t, p, e in result.csv_rows():
        lines.append(f"{s},{t},{p!r},{e!r}")
    return "\n".join(lines) + "\n"
