"""Fragments: groups that decentralized rematching can never break open.

A fragment is an equal-size pair of subsets matched internally in a stable
way, with every member preferring their partner to everyone outside. When a
fragment's inducing matching is in place, no inside agent ever appears in a
blocking pair, so the dynamics are trapped on the outside. Non-trivial
fragments (ones on which stable matchings disagree) are exactly what stops
"anything goes" reachability - and they are rare in random markets.
"""

from matchlab import (
    Market,
    Matching,
    blocking_pairs,
    build_graph,
    find_fragments,
    has_nontrivial_fragment,
    nested_fragment_chain,
    random_market,
    reachable_stable_set,
)
from matchlab.fragments import fragments_report_text
from matchlab.rng import derive_seed

market = Market([(0, 2, 1), (1, 2, 0), (0, 1, 2)],
                [(1, 0, 2), (0, 1, 2), (2, 1, 0)])
print("fragments of the 3x3 trap market:")
print(fragments_report_text(find_fragments(market, "brute")))

trapped = Matching.from_pairs([(0, 0), (1, 1)], 3, 3)
print("trapped state:", trapped.pairs(), "(firm 2 and worker 2 free)")
print("blocking pairs:", [(b.firm, b.worker) for b in blocking_pairs(market, trapped)])
reach = reachable_stable_set(build_graph(market), trapped)
print("reachable stable matchings:", [r.pairs() for r in reach])
print("the crossed stable matching [(0,1),(1,0),(2,2)] is unreachable: the "
      "fragment pairs (f0,w0),(f1,w1) can never be broken.\n")

print("nested chains (iterated mutual favorites):")
from matchlab import assortative_market
print("  assortative 4x4:", nested_fragment_chain(assortative_market(4)))
print("  trap market:    ", nested_fragment_chain(market))

samples = 400
for n in (3, 5, 7):
    hits = sum(has_nontrivial_fragment(random_market(n, n, derive_seed(99, n * samples + i)))
               for i in range(samples))
    print(f"non-trivial fragment frequency at n={n}: {hits / samples:.3f} "
          f"({hits}/{samples} random markets)")
