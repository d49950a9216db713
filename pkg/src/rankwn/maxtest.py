"""Max-type white noise tests calibrated by Gumbel limits.

A test scans every lagged pair ``(i, j, k)``, ``1 <= i, j <= p``,
``1 <= k <= K`` (self-lags included), maps each pair statistic to the
scale the limit theory is stated on, and compares the centred maximum with
a Gumbel quantile.

Two limit families are used.  The simple-linear-rank, Kendall and
Chatterjee statistics are asymptotically normal, so squared standardised
cells have an ``exp(-pi^{-1/2} e^{-y/2})`` limit after centring by
``2 log N - log log N``.  The degenerate U-statistics (D, R, tau*) scale to
weighted chi-square sums whose maximum has the same form with the constant
``kappa / Gamma(mu1 / 2)`` and an extra ``Lambda / lambda1`` shift.
"""

from __future__ import annotations

import functools
import math
import os
import warnings
from dataclasses import dataclass, field
from typing import Optional

import numba
import numpy as np
from scipy.special import gamma, polygamma

from . import _fast
from .correlations import KERNEL_ORDER, Method, ScorePair, slr_moments
from .errors import InvalidAlpha, InvalidInput, TiesWarning
from .ranks import MIN_PAIR_LENGTH, SeriesPanel, segment_ranks


@dataclass(frozen=True)
class GumbelLaw:
    """Constants of the limiting law of a centred maximum.

    Attributes
    ----------
    mu1 : int
        Multiplicity of the largest kernel eigenvalue.
    kappa : float
    lambda1, capital_lambda : float
        Largest eigenvalue and eigenvalue sum; only used for the
        ``Lambda / lambda1`` shift of degenerate laws.
    degenerate : bool
    """

    mu1: int
    kappa: float
    lambda1: float = 1.0
    capital_lambda: float = 1.0
    degenerate: bool = False
    name: str = "simple"

    def __post_init__(self):
        if self.mu1 < 1 or self.kappa < 1 or not 0 < self.lambda1 <= self.capital_lambda:
            raise InvalidInput(f"invalid Gumbel law constants: {self}")

    @property
    def offset(self) -> float:
        return self.capital_lambda / self.lambda1 if self.degenerate else 0.0

    @property
    def scale(self) -> float:
        """``c`` in the limit ``P(Y <= y) = exp(-c e^{-y/2})``."""
        return self.kappa / gamma(self.mu1 / 2.0)


@functools.lru_cache(maxsize=None)
def kappa_d(terms: int = 100_000) -> float:
    """``sqrt(2 prod_{n>=2} (pi/n) / sin(pi/n))``.

    The product is truncated after ``n = terms``; the log of each omitted
    factor is ``x^2/6 + x^4/180 + O(x^6)`` at ``x = pi/n``, and the first two
    orders of the tail are added back analytically.
    """
    n = np.arange(2, terms + 1, dtype=np.float64)
    x = np.pi / n
    logs = np.log(x / np.sin(x))
    tail = np.pi**2 / 6.0 * polygamma(1, terms + 1) + np.pi**4 / 180.0 * float(polygamma(3, terms + 1)) / 6.0
    return math.sqrt(2.0 * math.exp(math.fsum(logs) + float(tail)))


SIMPLE_LAW = GumbelLaw(mu1=1, kappa=1.0)


def _degenerate_law(lambda1: float, capital_lambda: float, name: str) -> GumbelLaw:
    return GumbelLaw(1, kappa_d(), lambda1, capital_lambda, degenerate=True, name=name)


LAWS = {
    Method.SPEARMAN_RHO: SIMPLE_LAW,
    Method.KENDALL_TAU: SIMPLE_LAW,
    Method.CHATTERJEE_XI: SIMPLE_LAW,
    Method.GENERIC_SLR: SIMPLE_LAW,
    Method.HOEFFDING_D: _degenerate_law(3 / np.pi**4, 1 / 12, "d"),
    Method.BKR_R: _degenerate_law(6 / np.pi**4, 1 / 6, "r"),
    Method.TAU_STAR: _degenerate_law(9 / np.pi**4, 1 / 4, "taustar"),
}

_FAST_CODE = {
    Method.SPEARMAN_RHO: _fast.SPEARMAN,
    Method.KENDALL_TAU: _fast.KENDALL,
    Method.HOEFFDING_D: _fast.HOEFFDING_D,
    Method.BKR_R: _fast.BKR_R,
    Method.TAU_STAR: _fast.TAU_STAR,
    Method.CHATTERJEE_XI: _fast.CHATTERJEE,
}


def degenerate_multiplier(method: Method, m: int) -> float:
    """``(m - 1) / (lambda1 C(order, 2))``, e.g. ``pi^4 (m - 1) / 30`` for D."""
    method = Method(method)
    return (m - 1) / (LAWS[method].lambda1 * math.comb(KERNEL_ORDER[method], 2))


def cell_transform(method: Method, raw: np.ndarray, m: int) -> np.ndarray:
    """Map raw pair statistics at length ``m`` to the max-test scale."""
    method = Method(method)
    if method is Method.SPEARMAN_RHO:
        return m * raw**2
    if method is Method.KENDALL_TAU:
        return 9.0 * m * (m - 1) / (2.0 * (2 * m + 5)) * raw**2
    if method is Method.CHATTERJEE_XI:
        return 2.5 * (m + 1) * raw**2
    return degenerate_multiplier(method, m) * raw


def cell_magnitudes(values: np.ndarray, method: Method) -> np.ndarray:
    """Undo the squaring of the simple family; absolute value otherwise."""
    if LAWS[Method(method)].degenerate:
        return np.abs(values)
    return np.sqrt(values)


@dataclass(frozen=True)
class PairScan:
    """Max-test cells for every lagged pair.

    ``values[k-1, i-1, j-1]`` holds the squared standardised statistic for
    the simple family and the scaled U-statistic for degenerate methods.
    """

    values: np.ndarray
    method: Method
    n: int
    names: Optional[tuple] = None
    tie_flag: bool = False

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=np.float64)
        if vals.ndim != 3 or vals.shape[1] != vals.shape[2]:
            raise InvalidInput(f"scan values must have shape (K, p, p), got {vals.shape}")
        if not np.all(np.isfinite(vals)):
            raise InvalidInput("scan contains non-finite cells")
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "method", Method(self.method))

    @property
    def K(self) -> int:
        return self.values.shape[0]

    @property
    def p(self) -> int:
        return self.values.shape[1]

    @property
    def N(self) -> int:
        return self.values.size

    @property
    def law(self) -> GumbelLaw:
        return LAWS[self.method]

    def magnitudes(self) -> np.ndarray:
        """Absolute standardised statistics, the inputs of an L-statistic."""
        return cell_magnitudes(self.values, self.method)

    def argmax(self) -> tuple[int, int, int]:
        """1-based ``(i, j, k)`` of the largest cell; ties go to the
        lexicographically smallest triple."""
        flat = int(np.argmax(self.values.transpose(1, 2, 0).ravel()))
        i, j, k = np.unravel_index(flat, (self.p, self.p, self.K))
        return int(i) + 1, int(j) + 1, int(k) + 1


@dataclass(frozen=True)
class TestOutcome:
    """Result of a white noise test.

    For Gumbel calibration ``statistic`` is the centred maximum; for
    permutation calibration it is the observed L-statistic and
    ``threshold`` the permutation critical value.
    """

    __test__ = False

    statistic: float
    threshold: float
    p_value: float
    reject: bool
    argmax: tuple
    method: str
    alpha: float
    calibration: str = "gumbel"
    argmax_names: Optional[tuple] = None
    extra: dict = field(default_factory=dict)


def configure_threads(threads: Optional[int] = None) -> int:
    """Bound the compiled worker pool; falls back to ``$WN_THREADS``."""
    if threads is None:
        env = os.environ.get("WN_THREADS")
        if not env:
            return numba.get_num_threads()
        threads = int(env)
    if threads < 1:
        raise InvalidInput(f"thread count must be positive, got {threads}")
    threads = min(threads, numba.config.NUMBA_NUM_THREADS)
    numba.set_num_threads(threads)
    return threads


def min_length(method: Method) -> int:
    return max(MIN_PAIR_LENGTH, KERNEL_ORDER.get(Method(method), 0))


def scan_from_ranks(lead, trail, n: int, K: int, method, scores: Optional[ScorePair] = None) -> np.ndarray:
    """Cells from precomputed segment ranks (see :func:`rankwn.ranks.segment_ranks`)."""
    method = Method(method)
    if method is Method.GENERIC_SLR:
        if scores is None:
            raise InvalidInput("the generic simple linear rank scan needs a ScorePair")
        p = lead.shape[2]
        out = np.empty((K, p, p))
        for k in range(1, K + 1):
            m = n - k
            c, a, mean, var = slr_moments(m, scores)
            v = math.sqrt(m) * (c[lead[k - 1, :m]].T @ a[trail[k - 1, :m]])
            out[k - 1] = (v - mean) ** 2 / var
        return out
    raw = _fast.scan_raw(lead, trail, n, K, _FAST_CODE[method])
    for k in range(1, K + 1):
        raw[k - 1] = cell_transform(method, raw[k - 1], n - k)
    return raw


def pair_scan(
    panel: SeriesPanel,
    K: int,
    method="taustar",
    scores: Optional[ScorePair] = None,
    threads: Optional[int] = None,
) -> PairScan:
    """Evaluate the chosen statistic on all ``K p^2`` lagged pairs.

    Parameters
    ----------
    panel : SeriesPanel
    K : int
        Maximum lag.
    method : str or Method
        ``rho``, ``tau``, ``d``, ``r``, ``taustar``, ``xi`` or ``slr``
        (the last needs ``scores``).
    scores : ScorePair, optional
    threads : int, optional
        Worker bound for the compiled scan.

    Returns
    -------
    PairScan
    """
    method = Method(method)
    panel.check_max_lag(K, min_length(method))
    if threads is not None:
        configure_threads(threads)
    tie_flag = panel.has_ties()
    if tie_flag:
        warnings.warn("panel has tied values; ranks broken by time order", TiesWarning, stacklevel=2)
    lead, trail = segment_ranks(panel.data, K)
    values = scan_from_ranks(lead, trail, panel.n, K, method, scores)
    return PairScan(values, method, panel.n, panel.names, tie_flag)


def _check_alpha(alpha: float) -> None:
    if not (isinstance(alpha, (int, float)) and 0.0 < alpha < 1.0):
        raise InvalidAlpha(f"alpha must lie in (0, 1), got {alpha!r}")


def gumbel_quantile(alpha: float, law: GumbelLaw = SIMPLE_LAW) -> float:
    """Level-``alpha`` critical value of the centred maximum.

    ``-log(Gamma(mu1/2)^2 / kappa^2) - 2 log log (1 - alpha)^{-1}``; with
    ``mu1 = 1, kappa = 1`` this is ``-log(pi) - 2 log log (1 - alpha)^{-1}``.

    Examples
    --------
    >>> round(gumbel_quantile(0.05), 4)
    4.7957
    """
    _check_alpha(alpha)
    return -2.0 * math.log(gamma(law.mu1 / 2.0) / law.kappa) - 2.0 * math.log(-math.log1p(-alpha))


def p_value(y: float, law: GumbelLaw = SIMPLE_LAW) -> float:
    """Upper tail ``1 - exp(-c e^{-y/2})`` of the limit law at ``y``."""
    with np.errstate(over="ignore"):
        tail = law.scale * np.exp(-0.5 * float(y))
    return float(-np.expm1(-tail))


def centring(N: int, law: GumbelLaw) -> float:
    """Constant added to the maximum cell: ``-2 log N - (mu1 - 2) log log N + offset``."""
    if N < 2:
        raise InvalidInput(f"the Gumbel calibration needs N = K p^2 >= 2, got {N}")
    return -2.0 * math.log(N) - (law.mu1 - 2) * math.log(math.log(N)) + law.offset


def max_test(scan: PairScan, alpha: float = 0.05) -> TestOutcome:
    """Gumbel-calibrated max-type test on a completed scan."""
    _check_alpha(alpha)
    law = scan.law
    max_cell = float(scan.values.max())
    stat = max_cell + centring(scan.N, law)
    thr = gumbel_quantile(alpha, law)
    i, j, k = scan.argmax()
    names = None
    if scan.names is not None:
        names = (scan.names[i - 1], scan.names[j - 1], k)
    return TestOutcome(
        statistic=stat,
        threshold=thr,
        p_value=p_value(stat, law),
        reject=bool(stat >= thr),
        argmax=(i, j, k),
        method=str(scan.method),
        alpha=float(alpha),
        argmax_names=names,
        extra={"max_cell": max_cell, "N": scan.N, "n": scan.n, "p": scan.p, "K": scan.K},
    )


def white_noise_test(panel: SeriesPanel, K: int, method="taustar", alpha: float = 0.05, **kwargs) -> TestOutcome:
    """:func:`pair_scan` followed by :func:`max_test`."""
    _check_alpha(alpha)
    return max_test(pair_scan(panel, K, method, **kwargs), alpha)


__all__ = [
    "GumbelLaw",
    "LAWS",
    "PairScan",
    "SIMPLE_LAW",
    "TestOutcome",
    "cell_transform",
    "configure_threads",
    "degenerate_multiplier",
    "gumbel_quantile",
    "kappa_d",
    "max_test",
    "p_value",
    "pair_scan",
    "white_noise_test",
]
