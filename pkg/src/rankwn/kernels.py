"""Literal U-statistic kernels and brute-force evaluators.

The built-in kernels are coded exactly as their permutation-sum
definitions, with no algebraic shortcuts, so that they can serve as an
independent reference for the fast rank-count algorithms in
:mod:`rankwn._fast`.

A kernel evaluator takes an array of shape ``(batch, order, 2)`` (``batch``
groups of ``order`` bivariate points) and returns ``batch`` values.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import TooLarge, TooShort
from .ranks import LagPairSample

ORACLE_BUDGET = 10**8


def _permutations(order: int) -> np.ndarray:
    return np.array(list(itertools.permutations(range(order))), dtype=np.intp)


def _le(a, b):
    return (a <= b).astype(np.float64)


def _lt(a, b):
    return (a < b).astype(np.float64)


def _centred_product(z, i1, i2, i3, i4, c):
    """{I(z1 <= zc) - I(z2 <= zc)} {I(z3 <= zc) - I(z4 <= zc)}."""
    return (_le(z[..., i1], z[..., c]) - _le(z[..., i2], z[..., c])) * (
        _le(z[..., i3], z[..., c]) - _le(z[..., i4], z[..., c])
    )


def _hd_summand(pts: np.ndarray) -> np.ndarray:
    # pts: (..., 5, 2) in argument order i1..i5
    x, y = pts[..., 0], pts[..., 1]
    return _centred_product(x, 0, 1, 2, 3, 4) * _centred_product(y, 0, 1, 2, 3, 4)


def _hr_summand(pts: np.ndarray) -> np.ndarray:
    x, y = pts[..., 0], pts[..., 1]
    return _centred_product(x, 0, 1, 2, 3, 4) * _centred_product(y, 0, 1, 2, 3, 5)


def _both_below(z, a, b, c, d):
    """I(z_a, z_b < z_c, z_d)."""
    return (
        _lt(z[..., a], z[..., c])
        * _lt(z[..., a], z[..., d])
        * _lt(z[..., b], z[..., c])
        * _lt(z[..., b], z[..., d])
    )


def _sign_pattern(z):
    return (
        _both_below(z, 0, 2, 1, 3)
        + _both_below(z, 1, 3, 0, 2)
        - _both_below(z, 0, 3, 1, 2)
        - _both_below(z, 1, 2, 0, 3)
    )


def _htau_summand(pts: np.ndarray) -> np.ndarray:
    return _sign_pattern(pts[..., 0]) * _sign_pattern(pts[..., 1])


def _kendall_summand(pts: np.ndarray) -> np.ndarray:
    return np.sign(pts[..., 0, 0] - pts[..., 1, 0]) * np.sign(pts[..., 0, 1] - pts[..., 1, 1])


@dataclass(frozen=True)
class KernelSpec:
    """A U-statistic kernel.

    ``kernel(z_1..z_m) = scale * sum over argument permutations of
    summand(z_perm)`` when ``symmetrize`` is set; otherwise the kernel is
    ``summand`` itself.

    Attributes
    ----------
    id : str
    order : int
    summand : callable
        Vectorised ``(batch, order, 2) -> (batch,)`` function.
    scale : float
    symmetrize : bool
    symmetric : bool
        Whether the resulting kernel is symmetric in its arguments; the
        oracle then averages over subsets instead of ordered tuples.
    """

    id: str
    order: int
    summand: Callable[[np.ndarray], np.ndarray]
    scale: float = 1.0
    symmetrize: bool = False
    symmetric: bool = True
    _perms: Optional[np.ndarray] = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if self.symmetrize:
            object.__setattr__(self, "_perms", _permutations(self.order))

    def __call__(self, pts) -> np.ndarray:
        pts = np.asarray(pts, dtype=np.float64)
        single = pts.ndim == 2
        if single:
            pts = pts[None]
        if self.symmetrize:
            vals = self.scale * self.summand(pts[:, self._perms]).sum(axis=1)
        else:
            vals = self.scale * self.summand(pts)
        return vals[0] if single else vals

    @property
    def ordered_scale(self) -> float:
        """Multiplier turning the mean of ``summand`` over ordered distinct
        tuples into the U-statistic."""
        if self.symmetrize:
            return self.scale * math.factorial(self.order)
        return self.scale


H_D = KernelSpec("hD", 5, _hd_summand, scale=1 / 16, symmetrize=True)
H_R = KernelSpec("hR", 6, _hr_summand, scale=1 / 32, symmetrize=True)
H_TAU_STAR = KernelSpec("hTauStar", 4, _htau_summand, scale=1 / 16, symmetrize=True)
H_KENDALL = KernelSpec("kendall", 2, _kendall_summand)

BUILTIN_KERNELS = {k.id: k for k in (H_D, H_R, H_TAU_STAR, H_KENDALL)}


def custom_kernel(evaluator, order: int, symmetric: bool = False) -> KernelSpec:
    """Wrap a vectorised ``(batch, order, 2) -> (batch,)`` evaluator."""
    return KernelSpec("custom", order, evaluator, symmetric=symmetric)


def _index_tuples(m: int, order: int, ordered: bool) -> np.ndarray:
    gen = itertools.permutations if ordered else itertools.combinations
    flat = np.fromiter(itertools.chain.from_iterable(gen(range(m), order)), dtype=np.intp)
    return flat.reshape(-1, order)


def u_stat_oracle(kernel: KernelSpec, pair: LagPairSample, chunk: int = 2048) -> float:
    """Exact U-statistic by complete enumeration.

    Averages the kernel over all ``C(m, order)`` subsets (symmetric
    kernels) or all ``m!/(m-order)!`` ordered tuples of distinct indices.
    Refuses work beyond ``C(m, order) * order! > 1e8``.
    """
    m, order = pair.m, kernel.order
    if m < order:
        raise TooShort(f"need at least {order} points, got {m}")
    if math.comb(m, order) * math.factorial(order) > ORACLE_BUDGET:
        raise TooLarge(f"enumeration of order {order} over m={m} exceeds the budget")
    pts = np.column_stack([pair.x, pair.y])
    idx = _index_tuples(m, order, ordered=not kernel.symmetric)
    total = 0.0
    for start in range(0, len(idx), chunk):
        total += float(np.sum(kernel(pts[idx[start : start + chunk]])))
    return total / len(idx)


def incomplete_u_statistic(
    kernel: KernelSpec,
    pair: LagPairSample,
    n_draws: int,
    rng: np.random.Generator,
    chunk: int = 100_000,
) -> tuple[float, float]:
    """Monte Carlo estimate of the U-statistic from random index tuples.

    Draws ordered tuples of distinct indices uniformly and averages the
    unsymmetrised summand, which has the complete U-statistic as its
    conditional mean. Returns ``(estimate, standard_error)``.
    """
    m, order = pair.m, kernel.order
    if m < order:
        raise TooShort(f"need at least {order} points, got {m}")
    pts = np.column_stack([pair.x, pair.y])
    s1 = s2 = 0.0
    done = 0
    while done < n_draws:
        b = min(chunk, n_draws - done)
        idx = np.argsort(rng.random((b, m)), axis=1)[:, :order]
        vals = kernel.ordered_scale * kernel.summand(pts[idx])
        s1 += vals.sum()
        s2 += np.square(vals).sum()
        done += b
    mean = s1 / n_draws
    var = max(s2 / n_draws - mean * mean, 0.0)
    return mean, math.sqrt(var / n_draws)
