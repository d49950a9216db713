"""Top-L statistics calibrated by time-index permutation.

The L-statistic sums the ``L`` largest absolute standardised pair
statistics.  Its null law has no closed form, so the critical value is the
empirical upper quantile over panels whose rows (time points) have been
shuffled.  Each replicate draws its permutation from its own counter-based
stream keyed by ``(seed, replicate)``, so results do not depend on the
order in which replicates are evaluated.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence, Union

import numpy as np

from .correlations import Method
from .errors import InvalidAlpha, InvalidInput, InvalidL
from .maxtest import PairScan, TestOutcome, cell_magnitudes, min_length, pair_scan, scan_from_ranks
from .ranks import SeriesPanel, segment_ranks

DEFAULT_B = 500
DEFAULT_L_GRID = tuple(range(1, 11))


@dataclass(frozen=True)
class LStatConfig:
    """Settings of a permutation-calibrated L-statistic test."""

    L: int = 1
    method: Union[str, Method] = Method.TAU_STAR
    B: int = DEFAULT_B
    alpha: float = 0.05
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "method", Method(self.method))
        if int(self.L) != self.L or self.L < 1:
            raise InvalidL(f"L must be a positive integer, got {self.L!r}")
        if self.B < 100:
            raise InvalidInput(f"at least 100 permutations are required, got B={self.B}")
        if not 0.0 < self.alpha < 1.0:
            raise InvalidAlpha(f"alpha must lie in (0, 1), got {self.alpha!r}")


def _top_sums(mags: np.ndarray, Ls: Sequence[int]) -> np.ndarray:
    flat = np.sort(mags.ravel())[::-1]
    csum = np.cumsum(flat)
    return csum[np.asarray(Ls) - 1]


def _check_L(L: int, N: int) -> None:
    if not 1 <= L <= N:
        raise InvalidL(f"L must lie in 1..{N}, got {L}")


def l_statistic(scan: PairScan, L: int) -> float:
    """Sum of the ``L`` largest absolute standardised cells of ``scan``.

    Examples
    --------
    >>> import numpy as np
    >>> scan = PairScan(np.array([[[9.0, 1.0], [4.0, 0.0]]]), "rho", n=20)
    >>> l_statistic(scan, 2)
    5.0
    """
    _check_L(L, scan.N)
    return float(_top_sums(scan.magnitudes(), [L])[0])


def permutation_stream(seed: int, replicate: int) -> np.random.Generator:
    """Independent generator for one permutation replicate."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(replicate,))))


def permute_panel(panel: SeriesPanel, rng_stream) -> SeriesPanel:
    """Shuffle the rows (time points) of ``panel``; columns stay aligned.

    ``rng_stream`` is a numpy ``Generator`` or an explicit permutation of
    ``range(n)``.
    """
    if isinstance(rng_stream, np.random.Generator):
        perm = rng_stream.permutation(panel.n)
    else:
        perm = np.asarray(rng_stream, dtype=np.intp)
        if not np.array_equal(np.sort(perm), np.arange(panel.n)):
            raise InvalidInput("row order must be a permutation of range(n)")
    return SeriesPanel(panel.data[perm], panel.names)


def permutation_distribution(
    panel: SeriesPanel,
    K: int,
    method,
    Ls: Iterable[int],
    B: int,
    seed: int,
) -> tuple[np.ndarray, np.ndarray, PairScan]:
    """Observed and permuted L-statistics for several ``L`` at once.

    Returns
    -------
    observed : ndarray, shape (len(Ls),)
    permuted : ndarray, shape (B, len(Ls))
        Row ``b`` comes from replicate ``b`` regardless of evaluation order.
    scan : PairScan
        The observed scan.
    """
    method = Method(method)
    Ls = list(Ls)
    scan = pair_scan(panel, K, method)
    for L in Ls:
        _check_L(L, scan.N)
    observed = _top_sums(scan.magnitudes(), Ls)
    permuted = np.empty((B, len(Ls)))
    for b in range(B):
        perm = permutation_stream(seed, b).permutation(panel.n)
        lead, trail = segment_ranks(panel.data[perm], K)
        values = scan_from_ranks(lead, trail, panel.n, K, method)
        permuted[b] = _top_sums(cell_magnitudes(values, method), Ls)
    return observed, permuted, scan


def permutation_decision(observed: float, permuted: np.ndarray, alpha: float) -> tuple[float, float, bool]:
    """Critical value, add-one p-value and decision for one L.

    ``p = (1 + #{permuted >= observed}) / (B + 1)`` and the test rejects when
    ``p <= alpha``.  The reported critical value is the largest permuted
    statistic the observed one must exceed for that to happen (``+inf``
    when ``alpha (B + 1) < 1``).
    """
    B = permuted.size
    exceed = int(np.count_nonzero(permuted >= observed))
    p = (1 + exceed) / (B + 1)
    allowed = math.floor(alpha * (B + 1) + 1e-9) - 1
    if allowed < 0:
        threshold = math.inf
    else:
        threshold = float(np.sort(permuted)[::-1][allowed])
    return threshold, p, p <= alpha


def permutation_test(panel: SeriesPanel, config: LStatConfig, K: int) -> TestOutcome:
    """Permutation-calibrated L-statistic test.

    Parameters
    ----------
    panel : SeriesPanel
    config : LStatConfig
    K : int
        Maximum lag.

    Returns
    -------
    TestOutcome
        ``statistic`` is the observed L-statistic, ``threshold`` the
        permutation critical value and ``p_value`` the add-one estimate.
    """
    panel.check_max_lag(K, min_length(config.method))
    if panel.n < 10:
        raise InvalidInput("permutation calibration needs n >= 10")
    observed, permuted, scan = permutation_distribution(panel, K, config.method, [config.L], config.B, config.seed)
    threshold, p, reject = permutation_decision(observed[0], permuted[:, 0], config.alpha)
    i, j, k = scan.argmax()
    names = (scan.names[i - 1], scan.names[j - 1], k) if scan.names is not None else None
    return TestOutcome(
        statistic=float(observed[0]),
        threshold=threshold,
        p_value=p,
        reject=bool(reject),
        argmax=(i, j, k),
        method=str(config.method),
        alpha=config.alpha,
        calibration="permutation",
        argmax_names=names,
        extra={"L": config.L, "B": config.B, "seed": config.seed, "N": scan.N, "n": panel.n, "p": panel.p, "K": K},
    )
