"""Monte Carlo estimation of rejection rates over a design grid.

Every replicate is an independent task whose panel comes from a stream
keyed by ``(base_seed, model, n, p, K, replicate)`` (plus the alternative
parameters), so a table depends only on the grid and never on how
replicates are split across workers.  Within a replicate one panel is
shared by all methods and, for permutation calibration, one set of
permuted scans is shared by every ``L``.
"""

from __future__ import annotations

import csv
import io
import json
import math
import multiprocessing
import time
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Optional, Sequence

import numpy as np

from .correlations import KERNEL_ORDER, Method
from .errors import DivergedModel, InvalidAlpha, InvalidInput, NonStationaryWarning
from .lstat import permutation_decision, permutation_distribution
from .maxtest import LAWS, centring, gumbel_quantile, scan_from_ranks
from .ranks import MIN_PAIR_LENGTH, segment_ranks
from .simgen import ALT_FORMS, NULL_MODELS, AltModelSpec, NullModelSpec, generate, model_code

MIN_REPS = 100
PARTIAL_FAILURE_RATE = 0.01
GUMBEL_METHODS = ("rho", "tau", "d", "r", "taustar", "xi")


@dataclass(frozen=True)
class McGrid:
    """Design grid of a Monte Carlo experiment.

    Attributes
    ----------
    models : sequence of str
        Null ids ``i``-``viii`` or alternative forms ``I``-``VIII``.
    methods : sequence of str
        Gumbel-calibrated max tests (``rho``, ``tau``, ``d``, ``r``,
        ``taustar``, ``xi``).
    n_list, p_list, K_list : sequence of int
    reps : int
    alpha : float
    base_seed : int
    rho_list, k0_list : sequence
        Alternative parameters; ignored for null models.
    lstat_method : str, optional
        Base statistic of permutation-calibrated L-statistics, one cell per
        entry of ``L_list``; ``B`` permutations each.
    fixed_coefficients : bool
        Reuse one coefficient matrix across replicates of an alternative.
    """

    models: Sequence[str]
    methods: Sequence[str] = ()
    n_list: Sequence[int] = (100,)
    p_list: Sequence[int] = (30,)
    K_list: Sequence[int] = (2,)
    reps: int = 500
    alpha: float = 0.05
    base_seed: int = 0
    rho_list: Sequence[float] = (0.5,)
    k0_list: Sequence[int] = (2,)
    burn_in: int = 200
    fixed_coefficients: bool = False
    lstat_method: Optional[str] = None
    L_list: Sequence[int] = ()
    B: int = 200

    def __post_init__(self):
        for name in ("models", "methods", "n_list", "p_list", "K_list", "rho_list", "k0_list", "L_list"):
            object.__setattr__(self, name, tuple(getattr(self, name)))
        if self.reps < MIN_REPS:
            raise InvalidInput(f"reps must be at least {MIN_REPS}, got {self.reps}")
        if not 0.0 < self.alpha < 1.0:
            raise InvalidAlpha(f"alpha must lie in (0, 1), got {self.alpha!r}")
        for m in self.models:
            if m not in NULL_MODELS and m not in ALT_FORMS:
                raise InvalidInput(f"unknown model {m!r}")
        for m in self.methods:
            if m not in GUMBEL_METHODS:
                raise InvalidInput(f"unknown method {m!r}")
        if self.lstat_method is not None:
            Method(self.lstat_method)
            if not self.L_list:
                raise InvalidInput("L_list is empty")
        elif self.L_list:
            raise InvalidInput("L_list given without lstat_method")
        if not self.methods and self.lstat_method is None:
            raise InvalidInput("no methods selected")
        order = max(KERNEL_ORDER.values())
        for n in self.n_list:
            for K in self.K_list:
                if n - K < MIN_PAIR_LENGTH + order:
                    raise InvalidInput(f"n={n}, K={K} leaves fewer than {MIN_PAIR_LENGTH + order} points per pair")

    @property
    def method_labels(self) -> list[str]:
        labels = list(self.methods)
        labels += [f"lstat-{self.lstat_method}-L{L}" for L in self.L_list]
        return labels

    def settings(self):
        """Yield ``(model, n, p, K, rho, k0)``; ``rho``/``k0`` are None for nulls."""
        for model in self.models:
            alt = model in ALT_FORMS
            for n in self.n_list:
                for p in self.p_list:
                    for K in self.K_list:
                        if not alt:
                            yield model, n, p, K, None, None
                            continue
                        for rho in self.rho_list:
                            for k0 in self.k0_list:
                                yield model, n, p, K, rho, k0


@dataclass
class McCell:
    model: str
    method: str
    n: int
    p: int
    K: int
    rho: Optional[float]
    k0: Optional[int]
    rejections: int
    reps: int
    failures: int = 0

    @property
    def completed(self) -> int:
        return self.reps - self.failures

    @property
    def rate(self) -> float:
        return self.rejections / self.completed if self.completed else math.nan

    @property
    def mc_se(self) -> float:
        r = self.rate
        return math.sqrt(r * (1 - r) / self.completed) if self.completed else math.nan

    @property
    def partial(self) -> bool:
        return self.failures > PARTIAL_FAILURE_RATE * self.reps

    @property
    def key(self) -> tuple:
        return (self.model, self.method, self.n, self.p, self.K, self.rho, self.k0)


CSV_FIELDS = ["model", "method", "n", "p", "K", "rho", "k0", "rate", "reps", "mc_se", "rejections", "failures", "partial"]


@dataclass
class McTable:
    """Rejection rates per ``(model, method, n, p, K, rho, k0)`` cell."""

    cells: list
    metadata: dict = field(default_factory=dict)

    def lookup(self, model, method, n, p, K, rho=None, k0=None) -> McCell:
        for c in self.cells:
            if c.key == (model, method, n, p, K, rho, k0):
                return c
        raise KeyError((model, method, n, p, K, rho, k0))

    def rate(self, *args, **kwargs) -> float:
        return self.lookup(*args, **kwargs).rate

    def rows(self) -> list[dict]:
        out = []
        for c in self.cells:
            row = {name: getattr(c, name) for name in CSV_FIELDS}
            out.append(row)
        return out

    def to_csv(self) -> str:
        """One row per cell; also the long format used for plotting curves."""
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=CSV_FIELDS, lineterminator="\n")
        w.writeheader()
        for row in self.rows():
            w.writerow({k: ("" if v is None else v) for k, v in row.items()})
        return buf.getvalue()

    def to_dict(self) -> dict:
        return {"cells": [asdict(c) for c in self.cells], "metadata": self.metadata}

    @classmethod
    def from_dict(cls, d: dict) -> "McTable":
        return cls([McCell(**c) for c in d["cells"]], dict(d.get("metadata", {})))

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def replicate_key(model: str, n: int, p: int, K: int, rho, k0, rep: int) -> tuple:
    key = [model_code(model), n, p, K]
    if rho is not None:
        # rho on a 1e-6 grid keeps the key integral
        key += [int(round(rho * 1e6)), k0]
    return tuple(key + [rep])


def build_spec(grid: McGrid, model, n, p, K, rho, k0, rep):
    key = replicate_key(model, n, p, K, rho, k0, rep)
    if rho is None:
        return NullModelSpec.from_id(model, n, p, grid.base_seed, key)
    coef_seed = grid.base_seed if grid.fixed_coefficients else None
    return AltModelSpec(model, rho, k0, n, p, grid.base_seed, key, grid.burn_in, coef_seed)


def run_replicate(grid: McGrid, setting: tuple, rep: int) -> Optional[dict]:
    """Rejection flags of every method on one replicate; None on divergence."""
    model, n, p, K, rho, k0 = setting
    spec = build_spec(grid, model, n, p, K, rho, k0, rep)
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", NonStationaryWarning)
            panel = generate(spec)
    except DivergedModel:
        return None
    out = {}
    if grid.methods:
        lead, trail = segment_ranks(panel.data, K)
        N = K * p * p
        for name in grid.methods:
            method = Method(name)
            law = LAWS[method]
            values = scan_from_ranks(lead, trail, n, K, method)
            stat = float(values.max()) + centring(N, law)
            out[name] = stat >= gumbel_quantile(grid.alpha, law)
    if grid.lstat_method is not None:
        perm_seed = int(np.random.SeedSequence(grid.base_seed, spawn_key=spec.stream_key).generate_state(1)[0])
        observed, permuted, _ = permutation_distribution(panel, K, grid.lstat_method, grid.L_list, grid.B, perm_seed)
        for idx, L in enumerate(grid.L_list):
            _, _, reject = permutation_decision(observed[idx], permuted[:, idx], grid.alpha)
            out[f"lstat-{grid.lstat_method}-L{L}"] = reject
    return out


def _run_chunk(grid: McGrid, tasks: list) -> list:
    return [(s, r, run_replicate(grid, s, r)) for s, r in tasks]


def _run(grid: McGrid, workers: int = 1, progress=None) -> McTable:
    start = time.perf_counter()
    settings = list(grid.settings())
    tasks = [(s, r) for s in settings for r in range(grid.reps)]
    if workers <= 1:
        results = []
        for t in tasks:
            results.append((*t, run_replicate(grid, *t)))
            if progress is not None:
                progress(len(results), len(tasks))
    else:
        size = max(1, len(tasks) // (8 * workers))
        chunks = [tasks[i : i + size] for i in range(0, len(tasks), size)]
        results = []
        # fork is unsafe once the OpenMP runtime behind the compiled scans has started
        ctx = multiprocessing.get_context("spawn")
        with ProcessPoolExecutor(max_workers=workers, mp_context=ctx) as pool:
            for part in pool.map(_run_chunk, [grid] * len(chunks), chunks):
                results.extend(part)
    counts = {}
    for setting, _, flags in results:
        for label in grid.method_labels:
            rej, fail = counts.get((setting, label), (0, 0))
            if flags is None:
                fail += 1
            else:
                rej += int(flags[label])
            counts[(setting, label)] = (rej, fail)
    cells = []
    for setting in settings:
        model, n, p, K, rho, k0 = setting
        for label in grid.method_labels:
            rej, fail = counts[(setting, label)]
            cells.append(McCell(model, label, n, p, K, rho, k0, rej, grid.reps, fail))
    meta = {
        "base_seed": grid.base_seed,
        "alpha": grid.alpha,
        "reps": grid.reps,
        "workers": workers,
        "wall_seconds": time.perf_counter() - start,
    }
    return McTable(cells, meta)


def run_size(grid: McGrid, workers: int = 1, progress=None) -> McTable:
    """Empirical sizes on null designs."""
    bad = [m for m in grid.models if m not in NULL_MODELS]
    if bad:
        raise InvalidInput(f"size runs take null models only, got {bad}")
    return _run(grid, workers, progress)


def run_power(grid: McGrid, workers: int = 1, progress=None) -> McTable:
    """Empirical powers on alternative designs, swept over ``rho_list`` and ``k0_list``."""
    bad = [m for m in grid.models if m not in ALT_FORMS]
    if bad:
        raise InvalidInput(f"power runs take alternative models only, got {bad}")
    return _run(grid, workers, progress)
