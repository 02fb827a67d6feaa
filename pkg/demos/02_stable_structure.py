"""Enumerating every stable matching of a market.

Deferred acceptance yields the two extremal stable matchings; repeatedly
severing a stable pair and restarting the proposing process (breakmarriage)
discovers everything in between. A brute-force scan over the full matching
space confirms the set.
"""

from matchlab import (
    breakmarriage,
    breakmarriage_path,
    deferred_acceptance,
    enumerate_stable,
    random_market,
)
from matchlab.stable import BreakStatus
from matchlab.textio import stable_set_to_text

market = random_market(6, 6, seed=20240817)
mu_f = deferred_acceptance(market, "firm")
mu_w = deferred_acceptance(market, "worker")
print("firm-optimal:  ", mu_f.pairs())
print("worker-optimal:", mu_w.pairs())

sset = enumerate_stable(market, "breakmarriage")
print(f"\n{len(sset)} stable matchings (discovery order):")
for i, mt in enumerate(sset.matchings):
    tags = []
    if i == sset.firm_optimal:
        tags.append("firm-optimal")
    if i == sset.worker_optimal:
        tags.append("worker-optimal")
    print(f"  {mt.pairs()} {' '.join(tags)}")

brute = enumerate_stable(market, "brute")
assert {m.key() for m in sset.matchings} == {m.key() for m in brute.matchings}
print("\nbrute-force scan over the full matching space agrees.")

print("\nbreakmarriage from the firm-optimal matching:")
for f in mu_f.matched_firms():
    out = breakmarriage(market, mu_f, f)
    line = f"  sever firm {f}: {out.status.value}"
    if out.status is BreakStatus.SUCCESS:
        path = breakmarriage_path(market, mu_f, f)
        line += (f" -> {out.result.pairs()} via "
                 + " ".join(f"(f{p.firm},w{p.worker})" for p in path))
    print(line)

print("\nserialized stable set:")
print(stable_set_to_text(sset.serialization_order()))
