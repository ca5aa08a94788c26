"""Command-line interface.

Usage::

    tsg verify scenario.json            # bound vs exact solution, node by node
    tsg solve scenario.json             # exact solution grid only
    tsg fuzz scenario.json --count 500  # randomized dominance suite
    tsg limit scenario.json --refine 6  # halve every gap up to 6 times

Exit status: 0 dominated / success, 1 violation found, 2 input error.
"""

from __future__ import annotations

import argparse
import os
import sys
from contextlib import contextmanager
from dataclasses import replace

from . import emit
from .errors import ScenarioError, TSGError
from .runner import evaluate, run_fuzz, verify
from .scenario import build_problem, load_scenario_file, refinement_study

EXIT_OK, EXIT_VIOLATION, EXIT_INPUT = 0, 1, 2


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("scenario", help="scenario JSON file")
    common.add_argument("--tol", type=float, help="dominance tolerance (overrides the scenario)")
    common.add_argument("--seed", type=int, help="random seed (fallback: $TSG_SEED, then the scenario)")
    common.add_argument("--format", choices=("csv", "jsonl"), default="csv")
    common.add_argument("--allow-hypothesis-violation", action="store_true",
                        help="compute bounds even when theorem hypotheses fail")
    common.add_argument("-o", "--output", help="write the report here instead of stdout")

    p = argparse.ArgumentParser(prog="tsg", description=__doc__.split("\n\n")[0])
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("verify", parents=[common], help="compare bound and exact solution")
    sub.add_parser("solve", parents=[common], help="emit the exact solution grid")
    fz = sub.add_parser("fuzz", parents=[common], help="randomized dominance suite")
    fz.add_argument("--count", type=int, help="number of instances (overrides the scenario)")
    fz.add_argument("--jobs", type=int, help="worker processes")
    lm = sub.add_parser("limit", parents=[common], help="refinement study")
    lm.add_argument("--refine", type=int, required=True, metavar="K",
                    help="number of halving levels")
    return p


def _resolve_seed(args, scenario) -> int:
    if args.seed is not None:
        return args.seed
    env = os.environ.get("TSG_SEED")
    if env:
        try:
            return int(env)
        except ValueError:
            raise TSGError(f"TSG_SEED must be an integer, got {env!r}") from None
    return scenario.seed if scenario.seed is not None else 0


@contextmanager
def _out(path):
    if path is None:
        yield sys.stdout
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            yield fh


def _say(msg):
    print(msg, file=sys.stderr)


def main(argv=None, bound_hook=None) -> int:
    """Entry point. `bound_hook`, if given, transforms the bound grid before comparison."""
    args = _parser().parse_args(argv)
    try:
        sc = load_scenario_file(args.scenario)
        if args.tol is not None:
            if not args.tol > 0:
                raise TSGError(f"--tol must be positive, got {args.tol}")
            sc = replace(sc, tol=args.tol)
        strict = sc.strict and not args.allow_hypothesis_violation
        seed = _resolve_seed(args, sc)
        meta = {"theorem": sc.theorem, "seed": seed}

        if args.command == "verify":
            report, _ = verify(build_problem(sc), sc.tol, sc.relative, strict, bound_hook)
            with _out(args.output) as fh:
                emit.write_report(report, fh, args.format, meta)
            s = report.summary()
            _say(f"{sc.theorem}: {report.verdict}; max violation {s['max_violation']:.6g}"
                 + (f" at {s['argmax']}" if s["argmax"] else "")
                 + f"; terminal margin {s['terminal_margin']:.17g} at {s['terminal_node']}"
                 + (f"; min interior margin {s['min_interior_margin']:.17g} at {s['argmin_interior']}"
                    if s["min_interior_margin"] is not None else ""))
            for v in report.hypothesis_violations:
                _say(f"hypothesis: {v}")
            return EXIT_VIOLATION if report.violated_nodes else EXIT_OK

        if args.command == "solve":
            ev = evaluate(build_problem(sc), strict=strict)
            with _out(args.output) as fh:
                emit.write_solution(ev.solutions, fh, args.format)
            return EXIT_OK

        if args.command == "fuzz":
            cfg = sc.fuzz if args.count is None else replace(sc.fuzz, count=args.count)
            if cfg.count < 1:
                raise TSGError("--count must be >= 1")
            jobs = args.jobs if args.jobs is not None else sc.jobs
            results = run_fuzz(sc.theorem, seed, cfg, sc.tol, sc.relative, jobs)
            bad = [r for r in results if r.verdict != "dominated"]
            meta.update(count=cfg.count, failures=len(bad),
                        min_relative_margin=min(r.min_relative_margin for r in results))
            with _out(args.output) as fh:
                emit.write_fuzz(results, fh, args.format, meta)
            _say(f"{sc.theorem}: {cfg.count - len(bad)}/{cfg.count} instances dominated (seed {seed})")
            for r in bad:
                _say(f"  instance {r.index} (seed {r.seed}): max violation {r.max_violation:.6g}")
            return EXIT_VIOLATION if bad else EXIT_OK

        rows, reports = refinement_study(sc, args.refine, strict)
        meta["levels"] = args.refine
        with _out(args.output) as fh:
            emit.write_limit(rows, fh, args.format, meta)
        bad = sum(r.violated_nodes for r in reports)
        _say(f"{sc.theorem}: {args.refine + 1} refinement levels, "
             f"{'violations found' if bad else 'all dominated'}")
        return EXIT_VIOLATION if bad else EXIT_OK

    except ScenarioError as exc:
        _say(f"error: invalid scenario {args.scenario}:")
        for e in exc.errors:
            _say(f"  {type(e).__name__}: {e}")
        return EXIT_INPUT
    except (TSGError, OSError) as exc:
        _say(f"error: {type(exc).__name__}: {exc}")
        return EXIT_INPUT


run_cli = main


if __name__ == "__main__":
    sys.exit(main())
