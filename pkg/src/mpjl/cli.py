"""Command-line harness: generate instances, run suites, merge reports.

Exit codes: 0 all checks passed, 1 check failures, 2 invalid
configuration or unparsable input, 3 numerical degeneracy past the retry
budget.  The environment variable MPJL_DEFAULT_SEED overrides the built-in
default seed when --seed is absent.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from .errors import (
    BadSpectrum,
    ConfigError,
    DegeneracyBudgetExceeded,
    MpjlError,
    ParseError,
)
from .matcore import make_rng, matrix_to_json, random_rank_q, svd_thin
from .reports import SuiteResult, dumps_canonical, render_text
from .suites import RETRY_BUDGET, SUITE_NAMES, RunConfig, run_suite, validate_config
from .errors import DegenerateSpectrum

DEFAULT_SEED = 12345


def _default_seed() -> int:
    raw = os.environ.get("MPJL_DEFAULT_SEED")
    if raw is None:
        return DEFAULT_SEED
    try:
        return int(raw)
    except ValueError as e:
        raise ConfigError(f"MPJL_DEFAULT_SEED must be an integer, got {raw!r}") from e


def _parse_spectrum(raw: str | None) -> tuple[float, ...] | None:
    if raw is None:
        return None
    try:
        return tuple(float(part) for part in raw.split(","))
    except ValueError as e:
        raise ConfigError(f"--spectrum must be comma-separated floats, got {raw!r}") from e


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--n", type=int, default=4, help="rows of the instance (default 4)")
    p.add_argument("--m", type=int, default=3, help="columns of the instance (default 3)")
    p.add_argument("--q", type=int, default=None, help="rank (default min(n, m))")
    p.add_argument("--trials", type=int, default=20, help="number of seeded trials (default 20)")
    p.add_argument("--seed", type=int, default=None,
                   help="master seed (default MPJL_DEFAULT_SEED or 12345)")
    p.add_argument("--tol", type=float, default=None,
                   help="override the suite's primary comparison tolerance")
    p.add_argument("--fd-step", type=float, default=1e-5,
                   help="finite-difference step (default 1e-5)")
    p.add_argument("--spectrum", type=str, default=None,
                   help="explicit singular values, comma separated, e.g. 3,1")
    p.add_argument("--format", choices=("text", "json"), default="text",
                   help="output rendering (default text)")
    p.add_argument("--out", type=str, default=None, help="write output to PATH instead of stdout")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mpjl",
        description="Verification harness for pseudoinverse Jacobians and measure densities.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_gen = sub.add_parser("gen", help="generate a seeded rank-q instance (JSON)")
    _add_common(p_gen)

    p_verify = sub.add_parser("verify", help="run one verification suite")
    p_verify.add_argument("suite", choices=SUITE_NAMES)
    _add_common(p_verify)

    p_report = sub.add_parser("report", help="merge suite report files")
    p_report.add_argument("paths", nargs="*", help="report JSON files to merge")
    p_report.add_argument("--format", choices=("text", "json"), default="text")
    p_report.add_argument("--out", type=str, default=None)
    return parser


def _emit(text: str, out_path: str | None) -> None:
    if out_path is None:
        sys.stdout.write(text)
    else:
        with open(out_path, "w") as fh:
            fh.write(text)


def _config_from_args(args) -> RunConfig:
    return RunConfig(
        n=args.n,
        m=args.m,
        q=args.q,
        trials=args.trials,
        seed=args.seed if args.seed is not None else _default_seed(),
        tol=args.tol,
        fd_step=args.fd_step,
        spectrum=_parse_spectrum(args.spectrum),
        output_format=args.format,
        output_path=args.out,
    )


def cmd_gen(args) -> int:
    cfg = validate_config(_config_from_args(args))
    last: Exception | None = None
    for attempt in range(1 + RETRY_BUDGET):
        rng = make_rng(cfg.seed, 0, attempt)
        try:
            x = random_rank_q(cfg.n, cfg.m, cfg.rank, rng, spectrum=cfg.spectrum)
            factors, info = svd_thin(x)
            break
        except DegenerateSpectrum as e:
            last = e
    else:
        raise DegeneracyBudgetExceeded(f"gen: degenerate after {RETRY_BUDGET} redraws: {last}")
    payload = {
        "matrix": matrix_to_json(x),
        "factors": {
            "left": matrix_to_json(factors.u),
            "singular_values": [float(v) for v in factors.s],
            "right": matrix_to_json(factors.v),
        },
        "rank_info": {
            "rank": info.rank,
            "tolerance_used": float(info.tolerance_used),
            "singular_values": [float(v) for v in info.singular_values],
        },
        "seed": cfg.seed,
    }
    _emit(dumps_canonical(payload), args.out)
    return 0


def cmd_verify(args) -> int:
    cfg = validate_config(_config_from_args(args), args.suite)
    result = run_suite(args.suite, cfg)
    if cfg.output_format == "json":
        _emit(dumps_canonical(result.to_json()), cfg.output_path)
    else:
        _emit(render_text(result), cfg.output_path)
    return 0 if result.all_passed else 1


def _load_result(path: str) -> SuiteResult:
    try:
        with open(path) as fh:
            return SuiteResult.from_json(json.load(fh))
    except (OSError, ValueError, KeyError, TypeError) as e:
        raise ParseError(f"cannot parse report file {path}: {e}") from e


def _trial_key(report) -> tuple:
    inputs = report.inputs
    return (report.check_name, inputs.get("seed", 0), inputs.get("trial", 0))


def cmd_report(args) -> int:
    merged = SuiteResult()
    seen: dict[tuple, int] = {}
    for path in args.paths:
        part = _load_result(path)
        merged.reports.extend(part.reports)
    merged.reports.sort(key=_trial_key)
    duplicates = []
    for report in merged.reports:
        key = _trial_key(report)
        seen[key] = seen.get(key, 0) + 1
        if seen[key] == 2:
            duplicates.append(list(key))
    if args.format == "json":
        payload = merged.to_json()
        payload["duplicates"] = duplicates
        _emit(dumps_canonical(payload), args.out)
    else:
        text = render_text(merged, show_wall_time=False)
        for key in duplicates:
            text += f"warning: duplicate trials for {key}\n"
        _emit(text, args.out)
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "gen":
            return cmd_gen(args)
        if args.command == "verify":
            return cmd_verify(args)
        return cmd_report(args)
    except (ConfigError, BadSpectrum, ParseError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except DegeneracyBudgetExceeded as e:
        print(f"error: {e}", file=sys.stderr)
        return 3
    except MpjlError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
