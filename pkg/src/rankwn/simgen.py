"""Data-generating processes for size and power experiments.

Null panels are ``eps_t = A z_t`` with i.i.d. innovations ``z_t``:

====  ===========  ====================================
id    mixing A     innovation
====  ===========  ====================================
i     Sigma^(1/2)  (a) standard normal
ii    Sigma^(1/2)  (b) signed cube root of a normal
iii   Sigma^(1/2)  (c) cube of a normal
iv    Sigma^(1/2)  (d) t(3) / sqrt(3)
v     U(-1, 1)     (a)
vi    U(-1, 1)     (b)
vii   U(-1, 1)     (c)
viii  U(-1, 1)     (d)
====  ===========  ====================================

with ``Sigma_ij = 0.5^|i-j|``.  Alternatives I-IV are first-order
autoregressions ``eps_t = f(A eps_{t-1}) + z_t`` and V-VIII first-order
moving averages ``eps_t = z_t + f(A z_{t-1})``, where ``f`` is the identity,
``sin(2 pi v / 3)``, ``sin(pi v^(1/3) / 3)`` or ``v^(1/3)`` applied
elementwise, and ``A`` is zero outside a random ``k0 x k0`` block with
``U(-rho, rho)`` entries.

Randomness comes from counter-based Philox streams keyed by
``(seed, *stream_key)``, so any replicate can be regenerated on its own.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import DivergedModel, InvalidInput, NonStationaryWarning
from .ranks import SeriesPanel

NULL_MODELS = {
    "i": ("a", "toeplitz"),
    "ii": ("b", "toeplitz"),
    "iii": ("c", "toeplitz"),
    "iv": ("d", "toeplitz"),
    "v": ("a", "uniform"),
    "vi": ("b", "uniform"),
    "vii": ("c", "uniform"),
    "viii": ("d", "uniform"),
}
ALT_FORMS = ("I", "II", "III", "IV", "V", "VI", "VII", "VIII")
DEFAULT_BURN_IN = 200


def stream(seed: int, key: tuple = ()) -> np.random.Generator:
    """Philox generator for ``seed`` and an integer spawn key."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=tuple(key))))


def model_code(model_id: str) -> int:
    """Stable small integer for a model id, used in stream keys."""
    if model_id in NULL_MODELS:
        return list(NULL_MODELS).index(model_id) + 1
    if model_id in ALT_FORMS:
        return ALT_FORMS.index(model_id) + 101
    raise InvalidInput(f"unknown model id {model_id!r}")


def sigma_half(p: int, base: float = 0.5) -> np.ndarray:
    """Symmetric square root of ``(base^|i-j|)_{ij}``.

    Eigenvalues are clamped at 1e-12 before taking roots.
    """
    if p < 1:
        raise InvalidInput(f"dimension must be positive, got {p}")
    idx = np.arange(p)
    sigma = base ** np.abs(idx[:, None] - idx[None, :])
    w, v = np.linalg.eigh(sigma)
    return (v * np.sqrt(np.clip(w, 1e-12, None))) @ v.T


@dataclass(frozen=True)
class NullModelSpec:
    """One of the eight white noise designs.

    Attributes
    ----------
    innovation : {'a', 'b', 'c', 'd'}
    mixing : {'toeplitz', 'uniform'}
    n, p : int
    seed : int
    stream_key : tuple of int
        Extra spawn key, e.g. a Monte Carlo replicate index.
    """

    innovation: str
    mixing: str
    n: int
    p: int
    seed: int = 0
    stream_key: tuple = ()

    def __post_init__(self):
        if self.innovation not in "abcd" or len(self.innovation) != 1:
            raise InvalidInput(f"innovation must be one of a, b, c, d; got {self.innovation!r}")
        if self.mixing not in ("toeplitz", "uniform"):
            raise InvalidInput(f"mixing must be 'toeplitz' or 'uniform', got {self.mixing!r}")
        if self.n < 1 or self.p < 1:
            raise InvalidInput("n and p must be positive")

    @classmethod
    def from_id(cls, model_id: str, n: int, p: int, seed: int = 0, stream_key: tuple = ()) -> "NullModelSpec":
        try:
            innovation, mixing = NULL_MODELS[model_id]
        except KeyError:
            raise InvalidInput(f"unknown null model {model_id!r}") from None
        return cls(innovation, mixing, n, p, seed, tuple(stream_key))

    @property
    def model_id(self) -> str:
        return next(k for k, v in NULL_MODELS.items() if v == (self.innovation, self.mixing))


@dataclass(frozen=True)
class AltModelSpec:
    """A serially dependent design from forms I-VIII.

    ``coef_seed`` fixes the coefficient matrix across replicates; when it
    is None the matrix is redrawn from the replicate's own stream.
    """

    form: str
    rho: float
    k0: int
    n: int
    p: int
    seed: int = 0
    stream_key: tuple = ()
    burn_in: int = DEFAULT_BURN_IN
    coef_seed: Optional[int] = None

    def __post_init__(self):
        if self.form not in ALT_FORMS:
            raise InvalidInput(f"form must be one of {', '.join(ALT_FORMS)}; got {self.form!r}")
        if not self.rho >= 0:
            raise InvalidInput(f"rho must be non-negative, got {self.rho}")
        if not 1 <= self.k0 <= self.p:
            raise InvalidInput(f"k0 must lie in 1..p, got {self.k0}")
        if self.n < 1 or self.burn_in < 0:
            raise InvalidInput("n must be positive and burn_in non-negative")

    @property
    def model_id(self) -> str:
        return self.form

    @property
    def autoregressive(self) -> bool:
        return ALT_FORMS.index(self.form) < 4


def _innovations(rng: np.random.Generator, kind: str, shape) -> np.ndarray:
    if kind == "d":
        return rng.standard_t(3, size=shape) / np.sqrt(3.0)
    w = rng.standard_normal(shape)
    if kind == "b":
        return np.cbrt(w)
    if kind == "c":
        return w**3
    return w


def null_mixing(spec: NullModelSpec, rng: np.random.Generator) -> np.ndarray:
    if spec.mixing == "toeplitz":
        return sigma_half(spec.p)
    return rng.uniform(-1.0, 1.0, size=(spec.p, spec.p))


def gen_null(spec: NullModelSpec) -> SeriesPanel:
    """Draw an ``n x p`` white noise panel."""
    rng = stream(spec.seed, spec.stream_key)
    A = null_mixing(spec, rng)
    z = _innovations(rng, spec.innovation, (spec.n, spec.p))
    return SeriesPanel(z @ A.T)


def _link(form: str):
    idx = ALT_FORMS.index(form) % 4
    if idx == 0:
        return lambda v: v
    if idx == 1:
        return lambda v: np.sin(2.0 * np.pi / 3.0 * v)
    if idx == 2:
        return lambda v: np.sin(np.pi / 3.0 * np.cbrt(v))
    return np.cbrt


def alt_coefficients(spec: AltModelSpec, rng: np.random.Generator) -> np.ndarray:
    """``A`` with ``U(-rho, rho)`` entries on the top-left ``k0 x k0`` block."""
    if spec.coef_seed is not None:
        rng = stream(spec.coef_seed, (spec.p, spec.k0))
    u = rng.uniform(-1.0, 1.0, size=(spec.p, spec.p))
    A = np.zeros((spec.p, spec.p))
    A[: spec.k0, : spec.k0] = spec.rho * u[: spec.k0, : spec.k0]
    return A


def gen_alt(spec: AltModelSpec) -> SeriesPanel:
    """Draw an ``n x p`` panel from an alternative design.

    Autoregressive forms start from ``eps_0 = 0`` and discard ``burn_in``
    steps.  Raises ``DivergedModel`` if the trajectory leaves the reals.
    """
    rng = stream(spec.seed, spec.stream_key)
    A = alt_coefficients(spec, rng)
    f = _link(spec.form)
    k0 = spec.k0
    block = A[:k0, :k0]
    if spec.autoregressive:
        radius = float(np.max(np.abs(np.linalg.eigvals(block)))) if k0 else 0.0
        if radius >= 1.0:
            warnings.warn(f"coefficient spectral radius {radius:.3f} >= 1", NonStationaryWarning, stacklevel=2)
        total = spec.burn_in + spec.n
        z = rng.standard_normal((total, spec.p))
        eps = z.copy()
        prev = np.zeros(k0)
        # only the first k0 coordinates feel the recursion
        with np.errstate(over="ignore", invalid="ignore"):
            for t in range(total):
                prev = f(block @ prev) + z[t, :k0]
                eps[t, :k0] = prev
        eps = eps[spec.burn_in :]
    else:
        z = rng.standard_normal((spec.n + 1, spec.p))
        eps = z[1:] + f(z[:-1] @ A.T)
    if not np.all(np.isfinite(eps)):
        raise DivergedModel(f"model {spec.form} with rho={spec.rho}, k0={k0} produced non-finite values")
    return SeriesPanel(eps)


def generate(spec) -> SeriesPanel:
    """Dispatch on the spec type."""
    if isinstance(spec, NullModelSpec):
        return gen_null(spec)
    if isinstance(spec, AltModelSpec):
        return gen_alt(spec)
    raise InvalidInput(f"not a model spec: {spec!r}")
