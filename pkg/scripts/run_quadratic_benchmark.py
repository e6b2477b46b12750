"""Run the redraw and limited-switching experiments and print the median curves.

    python3 scripts/run_quadratic_benchmark.py [--trials N] [--out DIR] [--jobs J]
"""

import argparse
from pathlib import Path

from omdco.harness import METRICS, ExperimentConfig, run_experiment, write_summary

ROOT = Path(__file__).resolve().parent.parent
CONFIGS = ("quadratic_redraw.json", "quadratic_limited.json")


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--trials", type=int, default=None)
    ap.add_argument("--out", default=str(ROOT / "results"))
    ap.add_argument("--jobs", type=int, default=1)
    args = ap.parse_args()

    for name in CONFIGS:
        cfg = ExperimentConfig.from_json(ROOT / "configs" / name)
        if args.trials:
            cfg.trials = args.trials
        summary = run_experiment(cfg, jobs=args.jobs)
        path = write_summary(cfg, summary, args.out)
        print(f"{name}: wrote {path}")
        for m in METRICS:
            col = summary.column(m)
            print(f"  {m:>14}  " + "  ".join(f"T={T}: {v:.4g}" for T, v in col.items()))


if __name__ == "__main__":
    main()
