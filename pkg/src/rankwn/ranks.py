"""Ranks, relative ranks and lagged pair extraction.

Every statistic in the package is a function of the relative ranks of a
lagged pair ``(x_t, y_t) = (eps[t, i], eps[t + k, j])``, ``t = 1..n-k``:
the y-ranks listed in increasing x order.  Ranks are 1-based throughout.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import InvalidInput, TooShort

MIN_PAIR_LENGTH = 8


def _as_finite_1d(values, name="values") -> np.ndarray:
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim != 1:
        raise InvalidInput(f"{name} must be one-dimensional, got shape {arr.shape}")
    if arr.size == 0:
        raise InvalidInput(f"{name} is empty")
    if not np.all(np.isfinite(arr)):
        raise InvalidInput(f"{name} contains NaN or infinite entries")
    return arr


@dataclass(frozen=True)
class SeriesPanel:
    """An ``n x p`` observation matrix with time running down the rows.

    Parameters
    ----------
    data : array_like
        Real observations, shape ``(n, p)``. A 1-d input is read as a single
        column.
    names : sequence of str, optional
        Column names used when reporting the argmax pair.
    """

    data: np.ndarray
    names: Optional[tuple] = None

    def __post_init__(self):
        arr = np.array(self.data, dtype=np.float64)
        if arr.ndim == 1:
            arr = arr[:, None]
        if arr.ndim != 2 or arr.shape[0] == 0 or arr.shape[1] == 0:
            raise InvalidInput(f"panel must be a non-empty 2-d array, got shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise InvalidInput("panel contains NaN or infinite entries")
        arr.setflags(write=False)
        object.__setattr__(self, "data", arr)
        if self.names is not None:
            names = tuple(str(s) for s in self.names)
            if len(names) != arr.shape[1]:
                raise InvalidInput(
                    f"got {len(names)} column names for {arr.shape[1]} columns"
                )
            object.__setattr__(self, "names", names)

    @property
    def n(self) -> int:
        return self.data.shape[0]

    @property
    def p(self) -> int:
        return self.data.shape[1]

    def column_name(self, j: int) -> str:
        """Name of 1-based column ``j`` (its index when the panel is unnamed)."""
        if self.names is None:
            return str(j)
        return self.names[j - 1]

    def has_ties(self) -> bool:
        """True if any column holds repeated values."""
        s = np.sort(self.data, axis=0)
        return bool(np.any(s[1:] == s[:-1]))

    def check_max_lag(self, K: int, min_length: int = MIN_PAIR_LENGTH) -> None:
        if K < 1:
            raise InvalidInput(f"max lag K must be >= 1, got {K}")
        if self.n - K < min_length:
            raise TooShort(
                f"n - K = {self.n - K} leaves fewer than {min_length} points per lagged pair"
            )


@dataclass(frozen=True)
class LagPairSample:
    """The aligned pair ``x_t = eps[t, i]``, ``y_t = eps[t + k, j]``.

    ``i``, ``j`` and ``k`` are bookkeeping only (1-based) and may be omitted
    for a free-standing bivariate sample.
    """

    x: np.ndarray
    y: np.ndarray
    i: Optional[int] = None
    j: Optional[int] = None
    k: Optional[int] = None

    def __post_init__(self):
        x = _as_finite_1d(self.x, "x")
        y = _as_finite_1d(self.y, "y")
        if x.shape != y.shape:
            raise InvalidInput(f"x and y lengths differ: {x.size} vs {y.size}")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)

    @property
    def m(self) -> int:
        return self.x.size


@dataclass(frozen=True)
class RankProfile:
    """Ranks of a lagged pair.

    Attributes
    ----------
    qx, qy : ndarray of int
        1-based ranks of ``x`` within ``x`` and of ``y`` within ``y``.
    r : ndarray of int
        Relative ranks: ``r[s - 1]`` is the y-rank of the point whose x-rank
        is ``s``.
    tie_flag : bool
        True when either coordinate had ties (broken by position).
    """

    qx: np.ndarray
    qy: np.ndarray
    r: np.ndarray
    tie_flag: bool = False

    @property
    def m(self) -> int:
        return self.r.size

    @classmethod
    def from_relative(cls, r: Sequence[int]) -> "RankProfile":
        """Profile whose x sample is already sorted (``qx = 1..m``)."""
        r = np.asarray(r, dtype=np.int64)
        m = r.size
        if not np.array_equal(np.sort(r), np.arange(1, m + 1)):
            raise InvalidInput("relative ranks must be a permutation of 1..m")
        return cls(qx=np.arange(1, m + 1), qy=r.copy(), r=r)


def ranks(values) -> tuple[np.ndarray, bool]:
    """1-based ranks, with ties broken by original position.

    Returns
    -------
    ranks : ndarray of int64
    tie_flag : bool
        Whether any tie was present.

    Examples
    --------
    >>> ranks([3.1, 1.2, 2.5])
    (array([3, 1, 2]), False)
    >>> ranks([5, 5, 1])
    (array([2, 3, 1]), True)
    """
    arr = _as_finite_1d(values)
    order = np.argsort(arr, kind="stable")
    out = np.empty(arr.size, dtype=np.int64)
    out[order] = np.arange(1, arr.size + 1)
    sorted_vals = arr[order]
    tie_flag = bool(np.any(sorted_vals[1:] == sorted_vals[:-1]))
    return out, tie_flag


def relative_ranks(pair: LagPairSample) -> RankProfile:
    """Rank profile of a lagged pair; ``r[qx[t] - 1] == qy[t]`` for all ``t``."""
    qx, tx = ranks(pair.x)
    qy, ty = ranks(pair.y)
    r = np.empty_like(qy)
    r[qx - 1] = qy
    return RankProfile(qx=qx, qy=qy, r=r, tie_flag=tx or ty)


def lag_pair(panel: SeriesPanel, i: int, j: int, k: int) -> LagPairSample:
    """Extract ``x = column i, rows 1..n-k`` and ``y = column j, rows k+1..n``.

    Indices are 1-based. Raises ``IndexError`` for out-of-range ``i``, ``j``
    or ``k`` and ``TooShort`` if fewer than 8 aligned points remain.
    """
    n, p = panel.data.shape
    if not (1 <= i <= p and 1 <= j <= p):
        raise IndexError(f"column index out of range 1..{p}: i={i}, j={j}")
    if not 1 <= k < n:
        raise IndexError(f"lag out of range 1..{n - 1}: k={k}")
    if n - k < MIN_PAIR_LENGTH:
        raise TooShort(f"lag {k} leaves {n - k} < {MIN_PAIR_LENGTH} aligned points")
    x = panel.data[: n - k, i - 1]
    y = panel.data[k:, j - 1]
    return LagPairSample(x=x, y=y, i=i, j=j, k=k)


def segment_ranks(data: np.ndarray, K: int) -> tuple[np.ndarray, np.ndarray]:
    """Per-lag ranks of every column's leading and trailing segments.

    Returns ``(lead, trail)``, each of shape ``(K, n, p)`` and 0-based:
    ``lead[k-1, t, c]`` is the rank of ``data[t, c]`` within rows ``0..n-k-1``
    and ``trail[k-1, t, c]`` the rank of ``data[t + k, c]`` within rows
    ``k..n-1``; entries past ``n - k`` are unused. Ties are broken by
    position, consistent with :func:`ranks`.
    """
    n, p = data.shape
    lead = np.zeros((K, n, p), dtype=np.int64)
    trail = np.zeros((K, n, p), dtype=np.int64)
    cols = np.arange(p)
    for k in range(1, K + 1):
        m = n - k
        for seg, out in ((data[:m], lead[k - 1]), (data[k:], trail[k - 1])):
            order = np.argsort(seg, axis=0, kind="stable")
            out[order, cols] = np.arange(m)[:, None]
    return lead, trail
