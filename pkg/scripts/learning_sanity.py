"""Long runs on fixed modular rewards, reporting how often each learner plays
the optimal choice late in the run and where each Exp3.S copy puts its mass.

    python3 scripts/learning_sanity.py [--T 100000] [--seeds 3] [--gamma G] [--rho R]
"""

import argparse

import numpy as np

from omdco.composite import matroid_new, single_new
from omdco.domains import cube
from omdco.rewards import ModularLinear


def matroid_run(seed, T, gamma, rho):
    dom = cube(-1, 1, 5)
    f = ModularLinear(np.zeros(5), np.array([5.0, 4.0, 3.0, 2.0, 1.0]) / 5)
    C = 12 / 5
    rng = np.random.default_rng(seed)
    m = matroid_new(5, 3, dom, "thm2a", T, rng, gamma=gamma, rho=rho)
    hits = 0
    for t in range(1, T + 1):
        d = m.decide(rng)
        m.feedback(f.evaluate(d.discrete, d.x), f.evaluate(d.discrete, d.x_alt), C, rng)
        hits += t > T - T // 10 and d.discrete == {0, 1, 2}
    return hits / (T // 10), m


def single_run(seed, T):
    f = ModularLinear(np.zeros(2), np.array([0.9, 0.1]))
    rng = np.random.default_rng(seed)
    s = single_new(2, cube(-1, 1, 2), "thm1b", T)
    hits = 0
    for t in range(1, T + 1):
        d = s.decide(rng)
        s.feedback(f.evaluate(d.discrete, d.x), f.evaluate(d.discrete, d.x_alt), 1.0)
        hits += t > T - T // 10 and d.discrete == {0}
    return hits / (T // 10), s


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--T", type=int, default=100_000)
    ap.add_argument("--seeds", type=int, default=3)
    ap.add_argument("--gamma", type=float, default=None)
    ap.add_argument("--rho", type=float, default=None)
    args = ap.parse_args()
    for seed in range(args.seeds):
        rate, m = matroid_run(seed, args.T, args.gamma, args.rho)
        print(f"seed {seed}: cardinality learner optimal-set rate {rate:.3f} "
              f"(gamma={m.gamma:.3f}, rho={m.rho:.3f})")
        for l, b in enumerate(m.bandits):
            print(f"    copy {l}: p = {np.round(b.probabilities(), 3)}")
        rate, s = single_run(seed, args.T)
        print(f"seed {seed}: single-element best-arm rate {rate:.3f} (gamma={s.gamma:.3f})")


if __name__ == "__main__":
    main()
