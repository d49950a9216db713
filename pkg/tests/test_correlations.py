import math

import numpy as np
import pytest
from numba import njit
from scipy import stats

from rankwn import _fast
from rankwn.correlations import (
    KERNEL_ORDER,
    SPEARMAN_SCORES,
    STATISTICS,
    Method,
    ScorePair,
    _VARIANCE_COMPONENTS,
    bkr_r,
    chatterjee_xi,
    degenerate_null_var,
    hoeffding_d,
    kendall_tau,
    simple_linear_rank,
    slr_moments,
    spearman_rho,
    tau_star,
)
from rankwn.errors import InvalidScore, TooShort
from rankwn.ranks import LagPairSample, RankProfile

CODES = {
    Method.SPEARMAN_RHO: _fast.SPEARMAN,
    Method.KENDALL_TAU: _fast.KENDALL,
    Method.HOEFFDING_D: _fast.HOEFFDING_D,
    Method.BKR_R: _fast.BKR_R,
    Method.TAU_STAR: _fast.TAU_STAR,
    Method.CHATTERJEE_XI: _fast.CHATTERJEE,
}


@njit(cache=True)
def _enumerate_moments(m, code):
    """Sum and sum of squares of a statistic over all m! permutations (Heap)."""
    a = np.arange(m)
    c = np.zeros(m, dtype=np.int64)
    v = _fast.statistic(a, code)
    s1, s2, count = v, v * v, 1
    i = 0
    while i < m:
        if c[i] < i:
            if i % 2 == 0:
                a[0], a[i] = a[i], a[0]
            else:
                a[c[i]], a[i] = a[i], a[c[i]]
            v = _fast.statistic(a, code)
            s1 += v
            s2 += v * v
            count += 1
            c[i] += 1
            i = 0
        else:
            c[i] = 0
            i += 1
    return s1 / count, s2 / count, count


@njit(cache=True)
def _random_values(m, code, reps, seed):
    np.random.seed(seed)
    out = np.empty(reps)
    for b in range(reps):
        out[b] = _fast.statistic(np.random.permutation(m), code)
    return out


def _weight(order, m, c):
    return math.comb(order, c) * math.comb(m - order, order - c) / math.comb(m, order)


@pytest.mark.parametrize("method", list(KERNEL_ORDER), ids=str)
def test_null_variance_components_by_enumeration(method):
    order = KERNEL_ORDER[method]
    ms = list(range(order, 2 * order - 1))
    rows, rhs = [], []
    for m in ms:
        mean, second, count = _enumerate_moments(m, CODES[method])
        assert count == math.factorial(m)
        assert abs(mean) < 1e-12
        rows.append([_weight(order, m, c) for c in range(2, order + 1)])
        rhs.append(second)
    solved = np.linalg.solve(np.array(rows), np.array(rhs))
    frozen = [float(v) for v in _VARIANCE_COMPONENTS[method][1]]
    assert np.allclose(solved, frozen, rtol=1e-9, atol=1e-14)


@pytest.mark.parametrize("method", list(KERNEL_ORDER), ids=str)
def test_exact_variance_beyond_fitted_range(method):
    order = KERNEL_ORDER[method]
    m = 2 * order - 1 if order < 6 else 10
    _, second, _ = _enumerate_moments(m, CODES[method])
    assert degenerate_null_var(method, m) == pytest.approx(second, rel=1e-10)


def test_hoeffding_variance_closed_form():
    for m in range(5, 15):
        closed = 2 * (m * m + 5 * m - 32) / (9 * m * (m - 1) * (m - 3) * (m - 4))
        assert degenerate_null_var(Method.HOEFFDING_D, m) == pytest.approx(closed, rel=1e-12)


def test_leading_components_proportional():
    d, r, t = (_VARIANCE_COMPONENTS[m][1][0] for m in (Method.HOEFFDING_D, Method.BKR_R, Method.TAU_STAR))
    assert (r / d, t / d) == (4, 9)


@pytest.mark.parametrize("method", [m for m in CODES if m is not Method.CHATTERJEE_XI], ids=str)
def test_null_moments_by_simulation(method):
    m, reps = 12, 100_000
    vals = _random_values(m, CODES[method], reps, 7)
    value = STATISTICS[method](RankProfile.from_relative(np.arange(1, m + 1)))
    mean_se = vals.std() / math.sqrt(reps)
    assert abs(vals.mean() - value.null_mean) < 3 * mean_se
    dev2 = (vals - vals.mean()) ** 2
    var_se = dev2.std() / math.sqrt(reps)
    assert abs(dev2.mean() - value.null_var) < 3 * var_se


def test_chatterjee_standardisation():
    m, reps = 200, 10_000
    z = math.sqrt(5 * m / 2) * _random_values(m, _fast.CHATTERJEE, reps, 11)
    assert abs(z.mean()) < 3 * z.std() / math.sqrt(reps)
    assert z.var() == pytest.approx(1.0, rel=0.10)


def test_classical_values_agree_with_scipy(rng):
    for m in (8, 31, 120):
        x = rng.standard_normal(m)
        y = 0.5 * x + rng.standard_normal(m)
        s = LagPairSample(x, y)
        assert spearman_rho(s).value == pytest.approx(stats.spearmanr(x, y)[0], abs=1e-12)
        assert kendall_tau(s).value == pytest.approx(stats.kendalltau(x, y)[0], abs=1e-12)


def test_chatterjee_direct_formula(rng):
    x, y = rng.standard_normal(40), rng.standard_normal(40)
    r = stats.rankdata(y[np.argsort(x)])
    direct = 1 - 3 * np.abs(np.diff(r)).sum() / (40**2 - 1)
    assert chatterjee_xi(LagPairSample(x, y)).value == pytest.approx(direct, abs=1e-14)


def test_kendall_inversion_count():
    perm = np.array([2, 0, 3, 1], dtype=np.int64)
    assert _fast.kendall_inversions(perm) == 3
    assert kendall_tau(RankProfile.from_relative(perm + 1)).value == pytest.approx(1 - 4 * 3 / 12)


def test_comonotone_values():
    m = 20
    prof = RankProfile.from_relative(np.arange(1, m + 1))
    assert spearman_rho(prof).value == pytest.approx(1.0)
    assert kendall_tau(prof).value == pytest.approx(1.0)
    assert chatterjee_xi(prof).value == pytest.approx((m - 2) / (m + 1))
    assert tau_star(prof).value == pytest.approx(1.0)
    assert hoeffding_d(prof).value > 0 and bkr_r(prof).value > 0


@pytest.mark.parametrize(
    "fn,minimum",
    [(spearman_rho, 3), (kendall_tau, 2), (hoeffding_d, 5), (bkr_r, 6), (tau_star, 4), (chatterjee_xi, 3)],
)
def test_minimum_lengths(fn, minimum):
    fn(RankProfile.from_relative(np.arange(minimum, 0, -1)))
    with pytest.raises(TooShort):
        fn(RankProfile.from_relative(np.arange(1, minimum)))


def test_slr_with_spearman_scores_reduces_to_rho(rng):
    s = LagPairSample(rng.standard_normal(25), rng.standard_normal(25))
    assert simple_linear_rank(s, SPEARMAN_SCORES).standardized == pytest.approx(spearman_rho(s).standardized)


def test_slr_null_variance_by_permutation():
    scores = ScorePair(f=lambda u: stats.norm.ppf(u), g=lambda u: np.sign(u - 0.5) * u**2)
    m, reps = 12, 100_000
    c, a, mean, var = slr_moments(m, scores)
    rng = np.random.default_rng(3)
    perms = rng.permuted(np.tile(np.arange(m), (reps, 1)), axis=1)
    vals = math.sqrt(m) * (a[perms] @ c)
    assert vals.mean() == pytest.approx(mean, abs=3 * vals.std() / math.sqrt(reps))
    assert vals.var() == pytest.approx(var, rel=0.03)


def test_slr_invalid_scores():
    with pytest.raises(InvalidScore):
        slr_moments(10, ScorePair(f=lambda u: u, g=lambda u: np.ones_like(u)))
    with pytest.raises(InvalidScore), np.errstate(invalid="ignore"):
        ScorePair(f=lambda u: np.log(u - 0.5), g=lambda u: u)


def test_scalar_score_functions_are_vectorised():
    scores = ScorePair(f=lambda u: math.log(u / (1 - u)), g=lambda u: u)
    c, a, _, var = slr_moments(10, scores)
    assert c.shape == a.shape == (10,) and var > 0
