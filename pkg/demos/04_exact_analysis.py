"""Exact Markov analysis over the whole matching space.

Every matching of a small market is a state; satisfying a blocking pair is a
transition; stable matchings are the absorbing sinks. Dense linear solves
give absorption probabilities and expected hitting times for every start
state at once, and exhaustive reachability verifies the three-way
equivalence between "any unstable state reaches any stable one", the same
for almost-stable states, and the absence of non-trivial fragments.
"""

from matchlab import (
    WeightRule,
    absorption,
    build_graph,
    check_reachability_equivalence,
    count_matchings,
    random_market,
)
from matchlab.exact import RULE_BEST
from matchlab.rng import derive_seed

market = random_market(3, 3, seed=7)
print(f"3x3 market: {count_matchings(3, 3)} states in the matching graph")
graph = build_graph(market)
print(f"stable (absorbing) states: {len(graph.stable_indices)}")

res = absorption(graph)
print("\nper-start absorption probabilities and expected steps:")
print("state".ljust(34), "  ".join(f"P(s{t})" for t in graph.stable_indices), " E[steps]")
for s in range(graph.n_states):
    row = "  ".join(f"{res.probabilities[s][a]:.4f}" for a in range(len(graph.stable_indices)))
    print(str(graph.states[s].pairs()).ljust(34), row, f"  {res.expected_steps[s]:8.2f}")

best = absorption(build_graph(market, RULE_BEST), WeightRule.named("agent-best"))
print("\nunder agent-best dynamics the probabilities shift:")
for s in range(graph.n_states)[:6]:
    row_all = [f"{res.probabilities[s][a]:.3f}" for a in range(len(graph.stable_indices))]
    row_best = [f"{best.probabilities[s][a]:.3f}" for a in range(len(graph.stable_indices))]
    print(f"  {graph.states[s].pairs()}: uniform {row_all} vs agent-best {row_best}")

print("\nreachability equivalence on 30 random 3x3 markets:")
agree = sum(check_reachability_equivalence(random_market(3, 3, derive_seed(4, i))).equivalent
            for i in range(30))
print(f"  equivalent in {agree}/30 markets (should be all)")
