"""Numba kernel for the exact log-domain forward-backward (BCJR) recursion.

One kernel handles a batch of independent blocks; each block is processed by
one thread with no cross-block reductions, so results are bitwise
reproducible for any thread count.  Log-sum-exp is exact (max + log1p(exp)),
not the max-log approximation.
"""

from __future__ import annotations

import warnings

import numpy as np
from numba import njit, prange

# numba warns when it probes an old TBB at first parallel launch; the
# fallback threading layer it picks is fine, so drop the noise.
warnings.filterwarnings("ignore", message=".*TBB.*")

NEG_INF = -1.0e30


@njit(cache=True, parallel=True)
def bcjr_posterior_llrs(ys, outs, lp0, lp1, sigma, w):
    """Posterior log P(u_t=1|y)/P(u_t=0|y) for each bit of each block.

    ys:   (B, k, m) received values for the m observation streams
    outs: (m, S, 2) trellis output of stream j in (state, input)
    lp0/lp1: (B, k) log prior probabilities of bit 0 / bit 1
    w: window size; S = 2^(w-1) states; state bits hold the previous w-1
    inputs (oldest at bit 0), the encoder starts in state 0 and is left
    unterminated (uniform backward initialization).
    """
    B, k, m = ys.shape
    S = outs.shape[1]
    half = S >> 1
    inv2s2 = 1.0 / (2.0 * sigma * sigma)
    post = np.empty((B, k))
    for b in prange(B):
        alpha = np.empty((k + 1, S))
        beta = np.empty((k + 1, S))
        gm = np.empty((k, S, 2))
        for t in range(k):
            for s in range(S):
                for a in range(2):
                    acc = 0.0
                    for j in range(m):
                        d = ys[b, t, j] - outs[j, s, a]
                        acc += d * d
                    gm[t, s, a] = -acc * inv2s2 + (lp1[b, t] if a == 1 else lp0[b, t])
        for s in range(S):
            alpha[0, s] = 0.0 if s == 0 else NEG_INF
            beta[k, s] = 0.0
        for t in range(k):
            for sp in range(S):
                a = sp >> (w - 2)
                base = (sp & (half - 1)) << 1
                x0 = alpha[t, base] + gm[t, base, a]
                x1 = alpha[t, base + 1] + gm[t, base + 1, a]
                hi = x0 if x0 > x1 else x1
                lo = x0 if x0 <= x1 else x1
                alpha[t + 1, sp] = hi + np.log1p(np.exp(lo - hi))
            mx = alpha[t + 1, 0]
            for s in range(1, S):
                if alpha[t + 1, s] > mx:
                    mx = alpha[t + 1, s]
            for s in range(S):
                alpha[t + 1, s] -= mx
        for t in range(k - 1, -1, -1):
            for s in range(S):
                n0 = s >> 1
                n1 = (s >> 1) | half
                x0 = beta[t + 1, n0] + gm[t, s, 0]
                x1 = beta[t + 1, n1] + gm[t, s, 1]
                hi = x0 if x0 > x1 else x1
                lo = x0 if x0 <= x1 else x1
                beta[t, s] = hi + np.log1p(np.exp(lo - hi))
            mx = beta[t, 0]
            for s in range(1, S):
                if beta[t, s] > mx:
                    mx = beta[t, s]
            for s in range(S):
                beta[t, s] -= mx
        for t in range(k):
            m0 = NEG_INF
            m1 = NEG_INF
            for s in range(S):
                v0 = alpha[t, s] + gm[t, s, 0] + beta[t + 1, s >> 1]
                v1 = alpha[t, s] + gm[t, s, 1] + beta[t + 1, (s >> 1) | half]
                if v0 > m0:
                    m0 = v0
                if v1 > m1:
                    m1 = v1
            a0 = 0.0
            a1 = 0.0
            for s in range(S):
                v0 = alpha[t, s] + gm[t, s, 0] + beta[t + 1, s >> 1]
                v1 = alpha[t, s] + gm[t, s, 1] + beta[t + 1, (s >> 1) | half]
                a0 += np.exp(v0 - m0)
                a1 += np.exp(v1 - m1)
            post[b, t] = (m1 + np.log(a1)) - (m0 + np.log(a0))
    return post
