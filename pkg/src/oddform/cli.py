"""Command line entry point: ``oddform <suite> --config scenario.json``.

Exit status is 0 when every case passes, 1 when there are findings (or a
closure ran out of budget) and 2 when the input is invalid.
"""

from __future__ import annotations

import argparse
import sys

from .config import ScenarioConfig
from .errors import MalformedSpec
from .suites import SUITES, run_suite


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="oddform", description=__doc__.splitlines()[0])
    ap.add_argument("suite", choices=SUITES)
    ap.add_argument("--config", required=True, help="scenario JSON file")
    mode = ap.add_mutually_exclusive_group()
    mode.add_argument("--exhaustive", action="store_true", help="sweep every case")
    mode.add_argument("--samples", type=int, help="seeded samples per relation or lemma")
    ap.add_argument("--seed", type=int, help="override the config seed")
    ap.add_argument("--budget", type=int, help="element budget for closures")
    ap.add_argument("--out", help="write the JSON report here instead of stdout")
    ap.add_argument("--timing", action="store_true", help="include wall time in the report")
    ap.add_argument("--skip-validation", action="store_true",
                    help="do not check the Hermitian axioms (negative controls only)")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = ScenarioConfig.load(args.config)
        if args.seed is not None:
            if not 0 <= args.seed < 2 ** 64:
                raise MalformedSpec("seed must lie in [0, 2^64)")
            cfg.seed = args.seed
        if args.samples is not None and args.samples < 1:
            raise MalformedSpec("--samples must be positive")
        samples = None if args.exhaustive else (args.samples if args.samples is not None else cfg.samples)
        rep = run_suite(args.suite, cfg, samples=samples, budget=args.budget,
                        validate=not args.skip_validation)
    except (MalformedSpec, OSError) as exc:
        print(f"oddform: invalid input: {exc}", file=sys.stderr)
        return 2
    text = rep.dumps(timing=args.timing)
    if args.out:
        with open(args.out, "w") as f:
            f.write(text + "\n")
    else:
        print(text)
    c = rep.counts
    print(f"{args.suite}: {c['pass']} passed, {c['fail']} failed, {c['skip']} skipped", file=sys.stderr)
    return rep.exit_code


if __name__ == "__main__":
    sys.exit(main())
