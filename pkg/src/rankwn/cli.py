"""Command-line entry point.

``rankwn test`` runs one white noise test on a CSV panel and exits with 0
(not rejected), 1 (rejected) or 2 (error).  ``rankwn simulate`` runs a
Monte Carlo size or power grid.
"""

from __future__ import annotations

import argparse
import sys
import time
import warnings
from typing import Optional, Sequence

import numpy as np

from .errors import TiesWarning, UsageError
from .harness import GUMBEL_METHODS, McGrid, build_spec, run_power, run_size
from .io import ResultDocument, jitter, load_csv, write_csv
from .lstat import LStatConfig, permutation_test
from .maxtest import configure_threads, white_noise_test
from .simgen import generate

EXIT_ACCEPT, EXIT_REJECT, EXIT_ERROR = 0, 1, 2
TEST_METHODS = GUMBEL_METHODS + ("lstat",)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _int_list(text: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise UsageError(f"expected a comma-separated integer list, got {text!r}") from None


def _float_grid(text: str) -> list[float]:
    """``a,b,c`` or ``start:stop:count`` (inclusive, evenly spaced)."""
    try:
        if ":" in text:
            start, stop, count = text.split(":")
            return [float(v) for v in np.linspace(float(start), float(stop), int(count))]
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise UsageError(f"malformed grid {text!r}") from None


def _resolve_seed(seed: Optional[int]) -> int:
    if seed is not None:
        return seed
    return int(np.random.SeedSequence().entropy % (2**63))


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="rankwn", description="Rank-based tests for high-dimensional white noise.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    common = _Parser(add_help=False)
    fmt = common.add_mutually_exclusive_group()
    fmt.add_argument("--json", dest="format", action="store_const", const="json", help="JSON output (default)")
    fmt.add_argument("--csv", dest="format", action="store_const", const="csv", help="CSV output")
    common.add_argument("--out", help="write the document here instead of stdout")
    common.add_argument("--seed", type=int, help="master seed (default: fresh entropy, echoed in the output)")
    common.add_argument("--threads", type=int, help="worker bound (default: $WN_THREADS or all cores)")
    common.add_argument("--alpha", type=float, default=0.05)

    t = sub.add_parser("test", parents=[common], help="test a CSV panel")
    t.add_argument("--input", required=True)
    t.add_argument("--header", action="store_true", help="first row holds column names")
    t.add_argument("--method", required=True)
    t.add_argument("--K", type=int, required=True, help="maximum lag")
    t.add_argument("--statistic", help="base statistic of an lstat test (default taustar)")
    t.add_argument("--L", type=int, help="number of summed order statistics (lstat only)")
    t.add_argument("--perms", type=int, help="permutation count (lstat only, default 500)")
    t.add_argument("--jitter", action="store_true", help="break ties with seeded noise of size 1e-9 * range")

    s = sub.add_parser("simulate", parents=[common], help="Monte Carlo size/power grid")
    s.add_argument("--mode", choices=["size", "power"], required=True)
    s.add_argument("--models", required=True, help="comma list, e.g. i,v or I,IV")
    s.add_argument("--methods", default="", help=f"comma list from {','.join(GUMBEL_METHODS)}")
    s.add_argument("--n", default="100")
    s.add_argument("--p", default="30")
    s.add_argument("--K", default="2")
    s.add_argument("--reps", type=int, default=500)
    s.add_argument("--rho", default="0.5", help="list or start:stop:count")
    s.add_argument("--k0", default="2")
    s.add_argument("--burn-in", type=int, default=200)
    s.add_argument("--fixed-coefficients", action="store_true")
    s.add_argument("--lstat-method", help="add permutation L-statistic cells for this base statistic")
    s.add_argument("--L", default="", help="L values for --lstat-method")
    s.add_argument("--perms", type=int, default=200)
    s.add_argument("--workers", type=int, help="process count (default 1)")
    s.add_argument("--emit-panel", help="also write replicate 0 of the first design as CSV")
    return parser


def cmd_test(args: argparse.Namespace) -> ResultDocument:
    if args.method not in TEST_METHODS:
        raise UsageError(f"unknown method {args.method!r}; choose from {', '.join(TEST_METHODS)}")
    if not 0.0 < args.alpha < 1.0:
        raise UsageError(f"--alpha must lie in (0, 1), got {args.alpha}")
    lstat_only = {"--L": args.L, "--perms": args.perms, "--statistic": args.statistic}
    if args.method != "lstat":
        given = [flag for flag, v in lstat_only.items() if v is not None]
        if given:
            raise UsageError(f"{', '.join(given)} only apply to --method lstat")
    seed = _resolve_seed(args.seed)
    start = time.perf_counter()
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        if args.jitter:
            # ties in the raw file are moot once jittered
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", TiesWarning)
                panel = jitter(load_csv(args.input, args.header), seed)
        else:
            panel = load_csv(args.input, args.header)
        if args.method == "lstat":
            config = LStatConfig(
                L=args.L or 1,
                method=args.statistic or "taustar",
                B=args.perms or 500,
                alpha=args.alpha,
                seed=seed,
            )
            outcome = permutation_test(panel, config, args.K)
        else:
            outcome = white_noise_test(panel, args.K, args.method, args.alpha)
    messages = sorted({str(w.message) for w in caught if issubclass(w.category, TiesWarning)})
    command = dict(vars(args))
    command["seed"] = seed
    return ResultDocument("test", command, outcome, messages, time.perf_counter() - start)


def cmd_simulate(args: argparse.Namespace) -> ResultDocument:
    seed = _resolve_seed(args.seed)
    methods = [m for m in args.methods.split(",") if m]
    try:
        grid = McGrid(
            models=[m for m in args.models.split(",") if m],
            methods=methods,
            n_list=_int_list(args.n),
            p_list=_int_list(args.p),
            K_list=_int_list(args.K),
            reps=args.reps,
            alpha=args.alpha,
            base_seed=seed,
            rho_list=_float_grid(args.rho),
            k0_list=_int_list(args.k0),
            burn_in=args.burn_in,
            fixed_coefficients=args.fixed_coefficients,
            lstat_method=args.lstat_method,
            L_list=_int_list(args.L),
            B=args.perms,
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    workers = args.workers or 1
    start = time.perf_counter()
    if args.emit_panel:
        write_csv(generate(build_spec(grid, *next(grid.settings()), 0)), args.emit_panel)
    runner = run_size if args.mode == "size" else run_power
    try:
        table = runner(grid, workers=workers)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    command = dict(vars(args))
    command["seed"] = seed
    return ResultDocument("table", command, table, [], time.perf_counter() - start)


def run(argv: Optional[Sequence[str]] = None, stdout=None, stderr=None) -> tuple[int, Optional[ResultDocument]]:
    """Parse, execute and emit; returns ``(exit_code, document)``."""
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    try:
        args = build_parser().parse_args(argv)
        configure_threads(args.threads)
        doc = cmd_test(args) if args.command == "test" else cmd_simulate(args)
    except Exception as exc:  # every failure maps to exit code 2
        print(f"rankwn: error: {exc}", file=stderr)
        return EXIT_ERROR, None
    text = doc.to_csv() if args.format == "csv" else doc.to_json() + "\n"
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        stdout.write(text)
    for msg in doc.warnings:
        print(f"rankwn: warning: {msg}", file=stderr)
    if doc.kind == "test":
        return (EXIT_REJECT if doc.outcome.reject else EXIT_ACCEPT), doc
    return EXIT_ACCEPT, doc


def main(argv: Optional[Sequence[str]] = None) -> int:
    return run(argv)[0]


if __name__ == "__main__":
    sys.exit(main())
