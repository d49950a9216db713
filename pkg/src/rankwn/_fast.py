"""Compiled rank-count kernels.

All functions take ``perm``: 0-based y-ranks listed in increasing x order
(a permutation of ``0..m-1``), and return the raw statistic.

Hoeffding's D and the BKR R use the same reduction.  With the centre
point(s) fixed, the kernel summand factorises as ``g(a, b) g(e, f)`` with
``g(a, b) = (u_a - u_b)(v_a - v_b)`` and ``u, v`` the below-centre
indicators, so the sum over distinct ``a, b, e, f`` only needs the four
quadrant counts of the remaining points:

    sum_distinct = G**2 - 4 * sum_a r_a**2 + 2 * sum_ab g(a, b)**2

with ``G = 2 (n11 n00 - n10 n01)`` and ``r_a`` the row sums of ``g``.

For tau* the symmetrised kernel equals 1 on 4-subsets whose x-order and
y-order split the points into the same two pairs and -1/2 otherwise.  Such
subsets are counted through their lower-x pair ``{a, b}``: the other two
points lie both north-east or both south-east of ``{a, b}``.
"""

import os

import numba
import numpy as np
from numba import njit, prange

if "NUMBA_THREADING_LAYER" not in os.environ:
    # skip probing the TBB layer, which warns when the installed TBB is old
    numba.config.THREADING_LAYER_PRIORITY = ["omp", "workqueue", "tbb"]

SPEARMAN, KENDALL, HOEFFDING_D, BKR_R, TAU_STAR, CHATTERJEE = range(6)


@njit(cache=True)
def _below_counts(perm):
    """n11[s] = #{t < s : perm[t] < perm[s]} via a Fenwick tree."""
    m = perm.size
    tree = np.zeros(m + 1, dtype=np.int64)
    out = np.empty(m, dtype=np.int64)
    for s in range(m):
        v = perm[s]
        c = 0
        i = v
        while i > 0:
            c += tree[i]
            i -= i & (-i)
        out[s] = c
        i = v + 1
        while i <= m:
            tree[i] += 1
            i += i & (-i)
    return out


@njit(cache=True)
def spearman(perm):
    m = perm.size
    c = (m - 1) / 2.0
    acc = 0.0
    for s in range(m):
        acc += (s - c) * (perm[s] - c)
    return 12.0 * acc / (m * (m * m - 1.0))


@njit(cache=True)
def kendall_inversions(perm):
    m = perm.size
    below = _below_counts(perm)
    inv = 0
    for s in range(m):
        inv += s - below[s]
    return inv


@njit(cache=True)
def kendall(perm):
    m = perm.size
    inv = kendall_inversions(perm)
    # concordant - discordant = C(m, 2) - 2 * inv
    return 1.0 - 4.0 * inv / (m * (m - 1.0))


@njit(cache=True)
def chatterjee(perm):
    m = perm.size
    acc = 0
    for s in range(m - 1):
        acc += abs(perm[s + 1] - perm[s])
    return 1.0 - 3.0 * acc / (m * m - 1.0)


@njit(cache=True)
def _distinct_pair_sum(n11, n10, n01, n00):
    big_g = 2 * (n11 * n00 - n10 * n01)
    row_sq = n11 * n00 * n00 + n00 * n11 * n11 + n10 * n01 * n01 + n01 * n10 * n10
    g_sq = 2 * (n11 * n00 + n10 * n01)
    return big_g * big_g - 4 * row_sq + 2 * g_sq


@njit(cache=True)
def hoeffding_d(perm):
    m = perm.size
    below = _below_counts(perm)
    total = 0.0
    for s in range(m):
        n11 = below[s]
        n10 = s - n11
        n01 = perm[s] - n11
        n00 = m - 1 - n11 - n10 - n01
        total += _distinct_pair_sum(n11, n10, n01, n00)
    # mean over ordered distinct 5-tuples, times 5!/16
    ordered = float(m) * (m - 1) * (m - 2) * (m - 3) * (m - 4)
    return 7.5 * total / ordered


@njit(cache=True)
def bkr_r(perm):
    m = perm.size
    # cum[X, Y] = #{a : xrank < X, yrank < Y}
    cum = np.zeros((m + 1, m + 1), dtype=np.int64)
    for X in range(m):
        pv = perm[X]
        for Y in range(m + 1):
            cum[X + 1, Y] = cum[X, Y] + (1 if pv < Y else 0)
    total = 0.0
    for s in range(m):
        ps = perm[s]
        row = 0
        for d in range(m):
            if d == s:
                continue
            Y = perm[d]
            n11 = cum[s, Y]
            n1_ = s - (1 if d < s else 0)
            n_1 = Y - (1 if ps < Y else 0)
            n10 = n1_ - n11
            n01 = n_1 - n11
            n00 = m - 2 - n11 - n10 - n01
            row += _distinct_pair_sum(n11, n10, n01, n00)
        total += row
    ordered = float(m) * (m - 1) * (m - 2) * (m - 3) * (m - 4) * (m - 5)
    return 22.5 * total / ordered


@njit(cache=True)
def tau_star_same_splits(perm):
    """Number of 4-subsets whose x and y orders induce the same pair split."""
    m = perm.size
    # below[Y] = #{c : xrank > hi_x, yrank < Y}, for the current hi_x
    below = np.zeros(m + 1, dtype=np.int64)
    same = 0
    for hi in range(m - 1, 0, -1):
        tot = m - 1 - hi
        ph = perm[hi]
        if tot >= 2:
            for lo in range(hi):
                pl = perm[lo]
                if pl < ph:
                    ymin, ymax = pl, ph
                else:
                    ymin, ymax = ph, pl
                ne = tot - below[ymax + 1]
                se = below[ymin]
                same += (ne * (ne - 1) + se * (se - 1)) // 2
        for Y in range(ph + 1, m + 1):
            below[Y] += 1
    return same


@njit(cache=True)
def tau_star(perm):
    m = perm.size
    same = tau_star_same_splits(perm)
    c4 = m * (m - 1) * (m - 2) * (m - 3) / 24.0
    return 1.5 * same / c4 - 0.5


@njit(cache=True)
def statistic(perm, method):
    if method == SPEARMAN:
        return spearman(perm)
    if method == KENDALL:
        return kendall(perm)
    if method == HOEFFDING_D:
        return hoeffding_d(perm)
    if method == BKR_R:
        return bkr_r(perm)
    if method == TAU_STAR:
        return tau_star(perm)
    return chatterjee(perm)


@njit(parallel=True, cache=True)
def scan_raw(lead, trail, n, K, method):
    """Raw statistic for every (k, i, j); ``lead``/``trail`` from segment ranks."""
    p = lead.shape[2]
    out = np.empty((K, p, p), dtype=np.float64)
    ncell = K * p * p
    for cell in prange(ncell):
        k = cell // (p * p)
        rem = cell - k * p * p
        i = rem // p
        j = rem - i * p
        m = n - (k + 1)
        perm = np.empty(m, dtype=np.int64)
        for t in range(m):
            perm[lead[k, t, i]] = trail[k, t, j]
        out[k, i, j] = statistic(perm, method)
    return out

