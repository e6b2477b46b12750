"""Command line: ``omdco run``, ``omdco oracle-profile``, ``omdco selftest``."""

from __future__ import annotations

import argparse
import sys

from . import oracle, selftest
from .harness import ExperimentConfig, _schedule, run_experiment, write_summary


def _run(args) -> int:
    cfg = ExperimentConfig.from_json(args.config)
    if args.trials is not None:
        cfg.trials = args.trials
    summary = run_experiment(cfg, jobs=args.jobs)
    path = write_summary(cfg, summary, args.out)
    print(f"wrote {path}")
    return 0


def _profile(args) -> int:
    cfg = ExperimentConfig.from_json(args.config)
    dom = cfg.build_domain()
    T = cfg.T_list[0]
    sched = _schedule(cfg, T, args.trial, dom)
    kappa, c = 1.0, 0.0
    seen = 0
    for t in range(1, T + 1, sched.segment_length):
        f = sched.function(t)
        best = oracle.round_optimum(f, cfg.n, cfg.H, dom, cfg.oracle)
        prof = oracle.set_function_profile(oracle.induced_set_function(f, best.x_star), cfg.n)
        kappa, c = min(kappa, prof.kappa), max(c, prof.curvature)
        seen += 1
        if seen >= args.rounds:
            break
    print(f"rewards profiled: {seen}")
    print(f"kappa: {kappa:.12g}")
    print(f"c: {c:.12g}")
    print(f"alpha: {oracle.alpha_factor(kappa, c):.12g}")
    return 0


def _selftest(args) -> int:
    return 0 if selftest.run(verbose=args.verbose) else 1


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="omdco", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run an experiment config and write the summary CSV")
    r.add_argument("--config", required=True)
    r.add_argument("--out", default=None, help="output directory (default: the config's output path)")
    r.add_argument("--trials", type=int, default=None, help="override the trial count")
    r.add_argument("--jobs", type=int, default=1)
    r.set_defaults(func=_run)

    o = sub.add_parser("oracle-profile", help="print kappa, c and alpha for a config's rewards")
    o.add_argument("--config", required=True)
    o.add_argument("--rounds", type=int, default=20, help="number of distinct rewards to profile")
    o.add_argument("--trial", type=int, default=0)
    o.set_defaults(func=_profile)

    s = sub.add_parser("selftest", help="run the fast invariant checks")
    s.add_argument("-v", "--verbose", action="store_true")
    s.set_defaults(func=_selftest)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
