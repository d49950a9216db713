"""Pairwise rank correlations and their null moments.

Each function takes a :class:`~rankwn.ranks.LagPairSample` or an already
computed :class:`~rankwn.ranks.RankProfile` and returns a :class:`CorrValue`.
The degenerate U-statistics (Hoeffding's D, Blum-Kiefer-Rosenblatt's R and
the Bergsma-Dassios-Yanagimoto tau*) are evaluated with the O(m^2)-or-better
rank-count algorithms of :mod:`rankwn._fast`; :mod:`rankwn.kernels` holds
the literal kernels they are checked against.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Union

import numpy as np

from . import _fast
from .errors import InvalidScore, TooShort
from .ranks import LagPairSample, RankProfile, relative_ranks


class Method(str, enum.Enum):
    SPEARMAN_RHO = "rho"
    KENDALL_TAU = "tau"
    HOEFFDING_D = "d"
    BKR_R = "r"
    TAU_STAR = "taustar"
    CHATTERJEE_XI = "xi"
    GENERIC_SLR = "slr"

    def __str__(self):
        return self.value


# Hoeffding-decomposition variances sigma_c^2, c = 2..order, under
# independence with continuous margins.  sigma_1^2 = 0 (degenerate kernels).
# Obtained by exact enumeration of all m! rank permutations for
# m = order..2*order-2 and solving the resulting triangular system; see
# tests/test_correlations.py::test_null_variance_components_by_enumeration.
_VARIANCE_COMPONENTS = {
    Method.HOEFFDING_D: (5, (Fraction(1, 900), Fraction(7, 900), Fraction(41, 1350), Fraction(1, 10))),
    Method.BKR_R: (
        6,
        (Fraction(1, 225), Fraction(11, 600), Fraction(34, 675), Fraction(41, 360), Fraction(41, 180)),
    ),
    Method.TAU_STAR: (4, (Fraction(1, 100), Fraction(2, 25), Fraction(1, 2))),
}

KERNEL_ORDER = {Method.HOEFFDING_D: 5, Method.BKR_R: 6, Method.TAU_STAR: 4}


def _evaluate(fn, u: np.ndarray) -> np.ndarray:
    try:
        out = np.asarray(fn(u), dtype=np.float64)
        if out.shape == u.shape:
            return out
    except (TypeError, ValueError):
        pass
    return np.array([float(fn(v)) for v in u])


@dataclass(frozen=True)
class CorrValue:
    """One correlation evaluation with its exact (or asymptotic) null moments."""

    method: Method
    value: float
    m: int
    null_mean: float
    null_var: float

    @property
    def standardized(self) -> float:
        return (self.value - self.null_mean) / math.sqrt(self.null_var)


@dataclass(frozen=True)
class ScorePair:
    """Regression-constant function ``f`` and score function ``g`` on (0, 1).

    Both must accept numpy arrays (scalar functions are vectorised).
    """

    f: Callable
    g: Callable
    lipschitz_bound: float = math.inf

    def __post_init__(self):
        grid = (np.arange(1, 1025)) / 1025.0
        for name in ("f", "g"):
            vals = _evaluate(getattr(self, name), grid)
            if not np.all(np.isfinite(vals)):
                raise InvalidScore(f"score function {name} is not finite on (0, 1)")


SPEARMAN_SCORES = ScorePair(f=lambda u: u - 0.5, g=lambda u: u - 0.5, lipschitz_bound=1.0)


def _profile(sample: Union[LagPairSample, RankProfile]) -> RankProfile:
    if isinstance(sample, RankProfile):
        return sample
    return relative_ranks(sample)


def _perm(profile: RankProfile) -> np.ndarray:
    return np.ascontiguousarray(profile.r, dtype=np.int64) - 1


def _require(m: int, minimum: int, what: str) -> None:
    if m < minimum:
        raise TooShort(f"{what} needs m >= {minimum}, got {m}")


def spearman_null_var(m: int) -> float:
    return 1.0 / (m - 1)


def kendall_null_var(m: int) -> float:
    return 2.0 * (2 * m + 5) / (9.0 * m * (m - 1))


def chatterjee_null_var(m: int) -> float:
    return 2.0 / (5.0 * m)


def degenerate_null_var(method: Method, m: int) -> float:
    """Exact null variance of the degenerate U-statistic at sample size m."""
    order, comps = _VARIANCE_COMPONENTS[Method(method)]
    total = sum(
        (math.comb(order, c) * math.comb(m - order, order - c) * s2 for c, s2 in zip(range(2, order + 1), comps)),
        Fraction(0),
    )
    return float(total / math.comb(m, order))


def spearman_rho(sample) -> CorrValue:
    """Spearman's rho from the centred relative-rank product."""
    prof = _profile(sample)
    _require(prof.m, 3, "Spearman's rho")
    return CorrValue(Method.SPEARMAN_RHO, _fast.spearman(_perm(prof)), prof.m, 0.0, spearman_null_var(prof.m))


def kendall_tau(sample) -> CorrValue:
    """Kendall's tau by O(m log m) inversion counting of the relative ranks."""
    prof = _profile(sample)
    _require(prof.m, 2, "Kendall's tau")
    return CorrValue(Method.KENDALL_TAU, _fast.kendall(_perm(prof)), prof.m, 0.0, kendall_null_var(prof.m))


def hoeffding_d(sample) -> CorrValue:
    """Order-5 U-statistic of the symmetrised Hoeffding kernel."""
    prof = _profile(sample)
    _require(prof.m, 5, "Hoeffding's D")
    return CorrValue(
        Method.HOEFFDING_D,
        _fast.hoeffding_d(_perm(prof)),
        prof.m,
        0.0,
        degenerate_null_var(Method.HOEFFDING_D, prof.m),
    )


def bkr_r(sample) -> CorrValue:
    """Order-6 U-statistic of the Blum-Kiefer-Rosenblatt kernel."""
    prof = _profile(sample)
    _require(prof.m, 6, "BKR R")
    return CorrValue(Method.BKR_R, _fast.bkr_r(_perm(prof)), prof.m, 0.0, degenerate_null_var(Method.BKR_R, prof.m))


def tau_star(sample) -> CorrValue:
    """Order-4 U-statistic of the Bergsma-Dassios-Yanagimoto sign kernel."""
    prof = _profile(sample)
    _require(prof.m, 4, "tau*")
    return CorrValue(
        Method.TAU_STAR, _fast.tau_star(_perm(prof)), prof.m, 0.0, degenerate_null_var(Method.TAU_STAR, prof.m)
    )


def chatterjee_xi(sample) -> CorrValue:
    """Chatterjee's xi on the m-point pair (x as the ordering variable).

    ``null_var`` is the asymptotic ``2 / (5 m)``.
    """
    prof = _profile(sample)
    _require(prof.m, 3, "Chatterjee's xi")
    return CorrValue(
        Method.CHATTERJEE_XI, _fast.chatterjee(_perm(prof)), prof.m, 0.0, chatterjee_null_var(prof.m)
    )


def slr_moments(m: int, scores: ScorePair) -> tuple[np.ndarray, np.ndarray, float, float]:
    """Regression constants, score table, null mean and null variance.

    Returns ``(c, a, mean, var)`` where ``c[t-1] = f(t/(m+1)) / m`` and
    ``a[s-1] = g(s/(m+1))``.
    """
    u = np.arange(1, m + 1) / (m + 1.0)
    c = _evaluate(scores.f, u) / m
    a = _evaluate(scores.g, u)
    if not (np.all(np.isfinite(c)) and np.all(np.isfinite(a))):
        raise InvalidScore("score functions returned non-finite values")
    mean = math.sqrt(m) * a.mean() * c.sum()
    var = m / (m - 1.0) * np.sum((a - a.mean()) ** 2) * np.sum((c - c.mean()) ** 2)
    if not var > 0:
        raise InvalidScore("score functions give a statistic with zero null variance")
    return c, a, mean, var


def simple_linear_rank(sample, scores: ScorePair) -> CorrValue:
    """``sqrt(m) * sum_t c_t g(r_t / (m+1))`` with ``c_t = f(t/(m+1)) / m``."""
    prof = _profile(sample)
    _require(prof.m, 3, "a simple linear rank statistic")
    c, a, mean, var = slr_moments(prof.m, scores)
    value = math.sqrt(prof.m) * float(np.dot(c, a[prof.r - 1]))
    return CorrValue(Method.GENERIC_SLR, value, prof.m, mean, var)


STATISTICS = {
    Method.SPEARMAN_RHO: spearman_rho,
    Method.KENDALL_TAU: kendall_tau,
    Method.HOEFFDING_D: hoeffding_d,
    Method.BKR_R: bkr_r,
    Method.TAU_STAR: tau_star,
    Method.CHATTERJEE_XI: chatterjee_xi,
}
