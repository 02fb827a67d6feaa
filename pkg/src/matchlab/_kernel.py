"""Compiled path-simulation kernel (uniform and agent-best rules).

Replays exactly the pure-Python loop in dynamics.py: same SplitMix64
stream, same row-major pair enumeration, same agent ordering, same float
accumulation expressions.  Equality of whole trajectories against the
Python path is asserted in the test suite.
"""

from __future__ import annotations

import numpy as np
from numba import njit

U64 = np.uint64
_GAMMA = U64(0x9E3779B97F4A7C15)
_M1 = U64(0xBF58476D1CE4E5B9)
_M2 = U64(0x94D049BB133111EB)
_ZERO = U64(0)
_FULL = U64(0xFFFFFFFFFFFFFFFF)


@njit(cache=True)
def _mix(z):
    z = (z ^ (z >> U64(30))) * _M1
    z = (z ^ (z >> U64(27))) * _M2
    return z ^ (z >> U64(31))


@njit(cache=True)
def _randbelow(state, n):
    un = U64(n)
    r = (_FULL % un + U64(1)) % un
    while True:
        state = state + _GAMMA
        x = _mix(state)
        if r == _ZERO or x < (_ZERO - r):
            return state, np.int64(x % un)


@njit(cache=True)
def run_path(fr, wr, fp0, wp0, ref_fp, ref_wp, has_ref, rule_code, max_steps, seed):
    n, m = fr.shape
    fp = fp0.copy()
    wp = wp0.copy()
    state = U64(seed)
    sum_f = 0.0
    sum_w = 0.0
    pairs_f = np.empty(n * m, np.int64)
    pairs_w = np.empty(n * m, np.int64)
    best_w = np.empty(n, np.int64)
    best_f = np.empty(m, np.int64)
    steps = 0
    absorbed = False
    while True:
        cnt = 0
        for i in range(n):
            best_w[i] = -1
        for j in range(m):
            best_f[j] = -1
        for f in range(n):
            pf = fp[f]
            cf = fr[f, pf] if pf >= 0 else m
            for w in range(m):
                if fr[f, w] < cf:
                    pw = wp[w]
                    cw = wr[w, pw] if pw >= 0 else n
                    if wr[w, f] < cw:
                        pairs_f[cnt] = f
                        pairs_w[cnt] = w
                        cnt += 1
                        if best_w[f] < 0 or fr[f, w] < fr[f, best_w[f]]:
                            best_w[f] = w
                        if best_f[w] < 0 or wr[w, f] < wr[w, best_f[w]]:
                            best_f[w] = f
        if cnt == 0:
            absorbed = True
            break
        if steps >= max_steps:
            break
        if has_ref:
            smf = 0
            for f in range(n):
                if fp[f] >= 0 and fp[f] == ref_fp[f]:
                    smf += 1
            smw = 0
            for w in range(m):
                if wp[w] >= 0 and wp[w] == ref_wp[w]:
                    smw += 1
            sum_f += (n - smf) / n
            sum_w += (m - smw) / m
        if rule_code == 0:
            state, k = _randbelow(state, cnt)
            f = pairs_f[k]
            w = pairs_w[k]
        else:
            nf = 0
            for i in range(n):
                if best_w[i] >= 0:
                    nf += 1
            nw = 0
            for j in range(m):
                if best_f[j] >= 0:
                    nw += 1
            state, k = _randbelow(state, nf + nw)
            f = np.int64(-1)
            w = np.int64(-1)
            if k < nf:
                c = -1
                for i in range(n):
                    if best_w[i] >= 0:
                        c += 1
                        if c == k:
                            f = np.int64(i)
                            w = best_w[i]
                            break
            else:
                k2 = k - nf
                c = -1
                for j in range(m):
                    if best_f[j] >= 0:
                        c += 1
                        if c == k2:
                            w = np.int64(j)
                            f = best_f[j]
                            break
        ow = fp[f]
        of = wp[w]
        if ow >= 0:
            wp[ow] = -1
        if of >= 0:
            fp[of] = -1
        fp[f] = w
        wp[w] = f
        steps += 1
    return steps, absorbed, fp, wp, sum_f, sum_w
