"""Plain-text serialization for markets and matchings.

Market format::

    m <nFirms> <nWorkers>
    f <i>: <worker indices, most preferred first>
    ...
    w <j>: <firm indices, most preferred first>
    ...
    #values            (optional section)
    <nFirms x nWorkers matrix of firm payoffs, pair-indexed [f][w]>
    <nFirms x nWorkers matrix of worker payoffs, pair-indexed [f][w]>

Lines starting with '#' other than '#values' are comments (e.g. the
'#provenance' line written for constructed markets).  Matching format is one
"match <f> <w>" line per pair; agents absent from the file are unmatched.
"""

from __future__ import annotations

from .errors import FormatError
from .market import Market, Matching


def market_to_text(market: Market, provenance: str | None = None) -> str:
    lines = [f"m {market.n_firms} {market.n_workers}"]
    if provenance:
        lines.append(f"#provenance {provenance}")
    for f, prefs in enumerate(market.firm_prefs):
        lines.append(f"f {f}: " + " ".join(map(str, prefs)))
    for w, prefs in enumerate(market.worker_prefs):
        lines.append(f"w {w}: " + " ".join(map(str, prefs)))
    if market.has_values:
        lines.append("#values")
        for f in range(market.n_firms):
            lines.append(" ".join(repr(v) for v in market.firm_values[f]))
        for f in range(market.n_firms):
            lines.append(" ".join(repr(market.worker_values[w][f]) for w in range(market.n_workers)))
    return "\n".join(lines) + "\n"


def market_from_text(text: str) -> Market:
    lines = [ln.strip() for ln in text.splitlines()]
    lines = [ln for ln in lines if ln]
    if not lines or not lines[0].startswith("m "):
        raise FormatError("expected header line 'm <nFirms> <nWorkers>'")
    try:
        _, n_s, m_s = lines[0].split()
        n, m = int(n_s), int(m_s)
    except ValueError as exc:
        raise FormatError(f"bad header: {lines[0]!r}") from exc
    fprefs: dict[int, list[int]] = {}
    wprefs: dict[int, list[int]] = {}
    value_rows: list[list[float]] = []
    in_values = False
    for ln in lines[1:]:
        if ln == "#values":
            in_values = True
            continue
        if ln.startswith("#"):
            continue
        if in_values:
            value_rows.append([float(tok) for tok in ln.split()])
            continue
        try:
            head, rest = ln.split(":", 1)
            side, idx_s = head.split()
            idx = int(idx_s)
            prefs = [int(tok) for tok in rest.split()]
        except ValueError as exc:
            raise FormatError(f"bad preference line: {ln!r}") from exc
        if side == "f":
            fprefs[idx] = prefs
        elif side == "w":
            wprefs[idx] = prefs
        else:
            raise FormatError(f"unknown side {side!r} in line {ln!r}")
    if sorted(fprefs) != list(range(n)) or sorted(wprefs) != list(range(m)):
        raise FormatError("preference lines do not cover every agent exactly once")
    fvals = wvals = None
    if value_rows:
        if len(value_rows) != 2 * n or any(len(r) != m for r in value_rows):
            raise FormatError("#values section must hold two nFirms x nWorkers matrices")
        fvals = value_rows[:n]
        pair_major = value_rows[n:]
        wvals = [[pair_major[f][w] for f in range(n)] for w in range(m)]
    return Market([fprefs[i] for i in range(n)], [wprefs[j] for j in range(m)], fvals, wvals)


def matching_to_text(matching: Matching) -> str:
    lines = [f"match {f} {w}" for f, w in matching.pairs()]
    return "\n".join(lines) + ("\n" if lines else "")


def matching_from_text(text: str, n_firms: int, n_workers: int) -> Matching:
    pairs = []
    for ln in text.splitlines():
        ln = ln.strip()
        if not ln or ln.startswith("#"):
            continue
        parts = ln.split()
        if len(parts) != 3 or parts[0] != "match":
            raise FormatError(f"bad matching line: {ln!r}")
        f, w = int(parts[1]), int(parts[2])
        if not (0 <= f < n_firms and 0 <= w < n_workers):
            raise FormatError(f"pair ({f},{w}) out of range for {n_firms}x{n_workers}")
        pairs.append((f, w))
    try:
        return Matching.from_pairs(pairs, n_firms, n_workers)
    except ValueError as exc:
        raise FormatError(str(exc)) from exc


def stable_set_to_text(matchings: list[Matching]) -> str:
    """Matching blocks separated by '---'; callers order firm-optimal first."""
    return "---\n".join(matching_to_text(m) for m in matchings)
