"""Command-line entry point: ``hamcert <subcommand> [flags]``.

Exit status is 0 when every acceptance check of the battery passes, 1 when a
check fails and 2 on configuration or runtime errors.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from .dense_linalg import DimensionError
from .gibbs import InsufficientCopiesError, NetTooLargeError
from .harness import ExperimentConfig, emit_csv, run

GLOBAL_KEYS = ("seed", "trials", "jobs", "out")
# Flags that are CLI plumbing rather than battery parameters.
_PLUMBING = {"command", "config", "csv", "quiet"}


def _global_flags() -> argparse.ArgumentParser:
    g = argparse.ArgumentParser(add_help=False)
    g.add_argument("--seed", type=int, default=0, help="master seed (default 0)")
    g.add_argument("--jobs", type=int, default=os.cpu_count() or 1,
                   help="worker processes; has no effect on results (default: all cores)")
    g.add_argument("--out", help="write the JSON report here")
    g.add_argument("--csv", help="also write the per-trial records as CSV")
    g.add_argument("--config", help="JSON file whose keys mirror the flags (flags given explicitly win)")
    g.add_argument("--quiet", action="store_true", help="do not print the summary")
    return g


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hamcert", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    g = [_global_flags()]

    p = sub.add_parser("certify-dynamics", parents=g, help="tolerant certification from time evolution")
    p.add_argument("--h0", help="known Hamiltonian (file or inline 'XI 0.5; IZ 1'); default zero")
    p.add_argument("--h", help="hidden Hamiltonian simulated behind the oracle; default zero")
    p.add_argument("--eps", type=float, default=0.5)
    p.add_argument("--k", type=int)
    p.add_argument("--n", type=int)
    p.add_argument("--delta", type=float, default=0.1, help="failure probability after majority vote")
    p.add_argument("--trials", type=int, default=20)
    p.add_argument("--spam", type=float, default=0.0, help="SPAM budget on the identity-outcome probability")
    p.add_argument("--spam-mode", choices=("none", "random-shift", "adversarial-shift"))
    p.add_argument("--c-op", type=float, default=1.0, help="operator-norm bound used for Trotter sizing")
    p.add_argument("--repetitions", type=int, default=8)
    p.add_argument("--min-success", type=float, default=0.9)

    for name, help_ in (("learn-gibbs", "learn a Gibbs state over a covering net"),
                        ("certify-gibbs", "certify a Gibbs state against a reference")):
        p = sub.add_parser(name, parents=g, help=help_)
        p.add_argument("--h", help="Hamiltonian of the unknown state")
        if name == "certify-gibbs":
            p.add_argument("--h0", help="Hamiltonian of the reference state; default zero")
        p.add_argument("--beta", type=float, default=1.0)
        p.add_argument("--eps", type=float, default=0.2 if name == "learn-gibbs" else 0.5)
        p.add_argument("--delta", type=float, default=0.1)
        p.add_argument("--k", type=int)
        p.add_argument("--n", type=int)
        p.add_argument("--copies-override", type=int, help="shadow copies (per state)")
        p.add_argument("--exact", action="store_true", help="use exact expectations instead of shadows")
        p.add_argument("--trials", type=int, default=10)
        p.add_argument("--min-success", type=float, default=0.9)
        if name == "learn-gibbs":
            p.add_argument("--eps-net", type=float, help="net resolution (default eps^2/(100 max(beta,1) n^k))")
            p.add_argument("--net-cap", type=int, default=10**7)
            p.add_argument("--rescale", type=float, default=1.0, help="run at eps/rescale")
            p.add_argument("--guarantee-factor", type=float, default=5.0,
                           help="check trace distance <= factor * eps / rescale")

    p = sub.add_parser("verify-invariants", parents=g, help="random sweep over the supporting inequalities")
    p.add_argument("--n", type=int, default=3)
    p.add_argument("--k", type=int, default=2)
    p.add_argument("--samples", type=int, default=100)
    p.add_argument("--t-max", type=float, default=10.0)
    p.add_argument("--t-draws", type=int, default=4000)

    p = sub.add_parser("bench", parents=g, help="time the core primitives")
    p.add_argument("--qubits", type=int, nargs="+", default=[2, 4, 6, 8])
    p.add_argument("--k", type=int, default=2)
    p.add_argument("--repeat", type=int, default=3)
    return parser


def parse_config(argv: list[str] | None = None) -> tuple[ExperimentConfig, argparse.Namespace]:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.config:
        with open(args.config, encoding="utf-8") as fh:
            defaults = json.load(fh)
        defaults = {key.replace("-", "_"): v for key, v in defaults.items()}
        defaults.pop("command", None)
        # Re-parse so explicit flags override the file, which overrides built-in defaults.
        sub = parser._subparsers._group_actions[0].choices[args.command]
        sub.set_defaults(**defaults)
        args = parser.parse_args(argv)
    values = vars(args)
    params = {key: v for key, v in values.items() if key not in _PLUMBING and key not in GLOBAL_KEYS}
    config = ExperimentConfig(
        command=args.command,
        seed=args.seed,
        trials=values.get("trials") or 0,
        jobs=args.jobs,
        out=args.out,
        params=params,
    )
    return config, args


def _summary(report) -> str:
    lines = [f"{report.command}: {'PASS' if report.passed else 'FAIL'}"]
    for c in report.checks:
        lines.append(f"  [{'pass' if c.passed else 'FAIL'}] {c.name}: {c.value} (threshold {c.threshold}) {c.detail}")
    for key, v in report.aggregates.items():
        if key != "timings":
            lines.append(f"  {key} = {v}")
    if "timings" in report.aggregates:
        lines.append("  timings = " + json.dumps(report.aggregates["timings"], indent=2))
    return "\n".join(lines)


def main(argv: list[str] | None = None) -> int:
    try:
        config, args = parse_config(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 2
    except (OSError, json.JSONDecodeError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    try:
        report = run(config)
    except NetTooLargeError as exc:
        print(f"error: {exc}. Hint: pass --eps-net with a larger value or lower --beta.", file=sys.stderr)
        return 2
    except DimensionError as exc:
        print(f"error: {exc}. Hint: dense simulation is limited to small n.", file=sys.stderr)
        return 2
    except InsufficientCopiesError as exc:
        print(f"error: {exc}. Hint: drop --copies-override to use the required count.", file=sys.stderr)
        return 2
    except Exception as exc:  # any failure must surface as a nonzero status
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    if config.out:
        report.write(config.out)
    if args.csv:
        emit_csv(report, args.csv)
    if not args.quiet:
        print(_summary(report))
    return 0 if report.passed else 1


if __name__ == "__main__":
    sys.exit(main())
