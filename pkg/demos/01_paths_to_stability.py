"""Blocking-pair dynamics in the smallest interesting market.

A 2x2 market where firms' favorites and workers' favorites are crossed has
two stable matchings. Starting one blocking pair away from the firm-optimal
one, decentralized rematching can end up at either stable matching; the
exact absorption probability of the "other" one is 1/3.
"""

from matchlab import (
    Market,
    WeightRule,
    absorption,
    almost_stable,
    blocking_pairs,
    build_graph,
    deferred_acceptance,
    satisfy,
    simulate,
)
from matchlab.rng import derive_seed

market = Market([(0, 1), (1, 0)], [(1, 0), (0, 1)])
mu_f = deferred_acceptance(market, "firm")
mu_w = deferred_acceptance(market, "worker")
print("firm-optimal stable matching:  ", mu_f.pairs())
print("worker-optimal stable matching:", mu_w.pairs())

lam = almost_stable(market, mu_f, 1)
print("\nperturbed start (firm 1 unmatched):", lam.pairs())
print("its blocking pairs:")
for bp in blocking_pairs(market, lam):
    print(f"  (f{bp.firm}, w{bp.worker})  best_for_firm={bp.best_for_firm} "
          f"best_for_worker={bp.best_for_worker}")

print("\none sample path:")
cur = lam
for step_no in range(10):
    bps = blocking_pairs(market, cur)
    if not bps:
        break
    cur = satisfy(market, cur, bps[0])
    print(f"  step {step_no + 1}: satisfy (f{bps[0].firm}, w{bps[0].worker}) -> {cur.pairs()}")

graph = build_graph(market)
exact = absorption(graph, exact=True)
print("\nexact absorption from the perturbed start:")
print("  P(worker-optimal) =", exact.probability(lam, mu_w))
print("  P(firm-optimal)   =", exact.probability(lam, mu_f))

rule = WeightRule.named("uniform-pair")
paths = 20000
hits = sum(
    simulate(market, lam, rule, mu_f, 10**6, derive_seed(7, j)).absorbed.firm_partner
    == mu_w.firm_partner
    for j in range(paths))
print(f"\nMonte Carlo over {paths} paths: P(worker-optimal) ~= {hits / paths:.4f}")
