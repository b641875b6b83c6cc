"""Command line front end.

Subcommands:

* ``run <config>`` — plan, simulate, and write the CSV/SVG artifacts;
* ``feasibility <config>`` — print the sufficient per-link capacity
  bounds for the configured tolerance pairs, next to the actual
  capacities;
* ``verify`` — run the enumeration-oracle self-check suites;
* ``plot <csv...>`` — re-render SVG charts from written CSV artifacts.

Exit codes: 0 success; 1 verification failure; 2 allocation infeasible;
3 configuration error; 4 a solve hit its limits and left a relative
optimality gap above the configured ``maxReportedGap``.
"""

from __future__ import annotations

import argparse
import sys

from .config import load_config
from .errors import AllocationInfeasibleError, ConfigurationError
from .resource_manager import feasibility_bound

EXIT_OK = 0
EXIT_VERIFY_FAILED = 1
EXIT_INFEASIBLE = 2
EXIT_CONFIG = 3
EXIT_GAP = 4


def _cmd_run(args) -> int:
    config = load_config(args.config)
    from .sim import run_experiment   # heavy import deferred past arg errors

    try:
        results = run_experiment(config)
    except AllocationInfeasibleError as exc:
        where = "" if exc.time_step is None else f" (step {exc.time_step})"
        print(f"allocation infeasible{where}: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE

    print(f"{'regime':20s} {'total':>14s} {'social':>14s} "
          f"{'status':>10s} {'gap':>8s}")
    for name, m in results.items():
        print(f"{name:20s} {m.total_mean:9.3f}±{m.total_stderr:<6.3f}"
              f"{m.social_mean:8.3f}±{m.social_stderr:<6.3f}"
              f" {m.worst_status:>10s} {m.max_gap:8.4f}")
    print(f"artifacts in {config.outputs.directory}")

    threshold = config.max_reported_gap
    if threshold is None:                 # no ceiling declared: report only
        return EXIT_OK
    over = [(name, m.max_gap) for name, m in results.items()
            if m.worst_status != "optimal" and m.max_gap > threshold]
    if over:
        for name, gap in over:
            print(f"warning: {name} finished with gap {gap:.4f} "
                  f"> maxReportedGap {config.max_reported_gap:.4f}",
                  file=sys.stderr)
        return EXIT_GAP
    return EXIT_OK


def _cmd_feasibility(args) -> int:
    config = load_config(args.config)
    net = config.network
    tolerances = config.tolerances()
    N = config.n_loops
    print(f"{'link':>4s} {'price':>8s} {'capacity':>9s} {'sufficient':>11s}")
    for d in range(net.n_links):
        bound = feasibility_bound(d, tolerances, N, net.max_delay)
        mark = "ok" if net.capacities[d] >= bound else "below"
        print(f"{d:4d} {net.prices[d]:8.2f} {int(net.capacities[d]):9d} "
              f"{bound:11d}  {mark}")
    print("('sufficient' guarantees a feasible grant schedule; smaller "
          "capacities may still work for specific request patterns)")
    return EXIT_OK


def _cmd_verify(args) -> int:
    from .verification import verify_suite

    def progress(label, report):
        if args.verbose:
            print(f"  {'ok' if report.ok else 'FAIL':4s} {label}")

    summary = verify_suite(progress=progress)
    if summary.ok:
        print(f"verified {summary.checked} programs against enumeration: "
              "all agree")
        return EXIT_OK
    print(f"{len(summary.failures)} of {summary.checked} programs disagree:",
          file=sys.stderr)
    for item in summary.failures:
        print(f"  {item.label}: {item.message}", file=sys.stderr)
    return EXIT_VERIFY_FAILED


def _cmd_plot(args) -> int:
    from . import plotting

    written = plotting.render_csv(args.csv, args.out)
    for path in written:
        print(path)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="netloop",
        description="multi-loop control over a shared delay-tiered network: "
                    "planning, allocation, and Monte Carlo simulation")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="execute an experiment config")
    p.add_argument("config", help="path to a JSON experiment config")
    p.set_defaults(func=_cmd_run)

    p = sub.add_parser("feasibility",
                       help="print sufficient capacity bounds per link")
    p.add_argument("config", help="path to a JSON experiment config")
    p.set_defaults(func=_cmd_feasibility)

    p = sub.add_parser("verify", help="run solver self-check suites")
    p.add_argument("-v", "--verbose", action="store_true",
                   help="print one line per checked program")
    p.set_defaults(func=_cmd_verify)

    p = sub.add_parser("plot", help="re-render charts from CSV artifacts")
    p.add_argument("csv", nargs="+", help="artifact CSV files")
    p.add_argument("--out", default=".", help="output directory for SVGs")
    p.set_defaults(func=_cmd_plot)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigurationError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
