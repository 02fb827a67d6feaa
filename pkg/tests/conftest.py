import pytest

from matchlab import Market, Matching


@pytest.fixture
def cycle2() -> Market:
    """2x2 market with two stable matchings (firm tops vs worker tops crossed).

    f0: w0 > w1, f1: w1 > w0; w0: f1 > f0, w1: f0 > f1.
    Firm-optimal pairs identically, worker-optimal pairs crosswise.
    """
    return Market([(0, 1), (1, 0)], [(1, 0), (0, 1)])


@pytest.fixture
def trap3() -> Market:
    """3x3 market with a non-trivial size-2 fragment on {f0,f1}x{w0,w1}.

    f0: w0>w2>w1, f1: w1>w2>w0, f2: w0>w1>w2;
    w0: f1>f0>f2, w1: f0>f1>f2, w2: f2>f1>f0.
    Stable: identity (firm-optimal) and the {f0<->w1, f1<->w0} swap.
    """
    return Market([(0, 2, 1), (1, 2, 0), (0, 1, 2)],
                  [(1, 0, 2), (0, 1, 2), (2, 1, 0)])


@pytest.fixture
def chain3() -> Market:
    """3x3 unique-stable market where f1 prefers w2 to her partner w1.

    Identity is stable and unique; from identity-minus-f2 the pairs
    (f1,w2) then (f2,w2) are satisfiable in sequence, landing on
    identity-minus-f1.
    """
    return Market([(0, 1, 2), (2, 1, 0), (2, 0, 1)],
                  [(0, 1, 2), (1, 0, 2), (2, 1, 0)])


def matching(pairs, n, m) -> Matching:
    return Matching.from_pairs(pairs, n, m)
