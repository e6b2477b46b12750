"""Fast in-package invariant checks, one printed line per check."""

from __future__ import annotations

import traceback

import numpy as np

from . import oracle
from .bandit import BanditFeedback, Exp3S
from .composite import matroid_new
from .domains import ball, cube
from .harness import ExperimentConfig, compute_regret, run_trial
from .oco import oco_new
from .rewards import ModularLinear, QuadraticSampler, SeparableQuadratic


def _exp3s():
    rng = np.random.default_rng(1)
    b = Exp3S(10, 0.1, 2000)
    for _ in range(2000):
        b.draw(rng)
        b.feed(BanditFeedback(rng.uniform(-1, 2), bool(rng.random() < 0.5), -1.0, 2.0))
        p = b.probabilities()
        assert abs(p.sum() - 1) < 1e-12 and p.min() >= 0.1 / 10 - 1e-15
        assert np.all(np.isfinite(b.weights)) and np.all(b.weights > 0)


def _oco_feasible():
    rng = np.random.default_rng(2)
    for dom in (cube(-1, 4, 3), ball(2.0, 3)):
        o = oco_new(dom, "two", "prop2b", 1000)
        for _ in range(1000):
            pr = o.propose(rng)
            assert dom.contains(pr.x, 1e-9) and dom.contains(pr.x_alt, 1e-9)
            o.update(float(rng.normal()), float(rng.normal()))


def _oracle_grid():
    rng = np.random.default_rng(3)
    dom = cube(-1, 4, 5)
    for _ in range(5):
        f = QuadraticSampler().draw(rng, dom)
        a = oracle.round_optimum(f, 5, 3, dom)
        g = oracle.round_optimum(f, 5, 3, dom, oracle.GRID)
        assert a.S_star == g.S_star and abs(a.value - g.value) < 1e-2


def _profiles():
    f = ModularLinear([1.0, 2.0, 3.0], [0.5, 0.0, 1.0])
    vals = oracle.induced_set_function(f, np.ones(3))
    assert oracle.submodularity_ratio(vals, 3) == 1.0 and oracle.curvature(vals, 3) == 0.0
    q = SeparableQuadratic([1, 2], [1, 1], [5, 5])
    p = oracle.set_function_profile(oracle.induced_set_function(q, np.zeros(2)), 2)
    assert p.alpha == 1.0


def _greedy():
    rng = np.random.default_rng(4)
    for _ in range(10):
        sets = rng.random((6, 10)) < 0.3
        w = rng.random(10)
        vals = np.array([w[np.any(sets[[i for i in range(6) if m >> i & 1]], axis=0)].sum()
                         for m in range(64)])
        tau = rng.uniform(0, 0.1 * vals[-1], 3)
        assert oracle.greedy_bound_check(vals, 6, 3, tau)


def _matroid_slate():
    rng = np.random.default_rng(5)
    m = matroid_new(5, 3, cube(-1, 1, 5), "thm2a", 100, rng)
    for _ in range(100):
        dec = m.decide(rng)
        assert len(dec.discrete) <= 3 and sum(m.observers()) <= 1
        m.feedback(1.0, 1.0, 3.0, rng)
        assert len(m.slate) == 3


def _harness():
    cfg = ExperimentConfig(n=5, H=3, T_list=[50], trials=1, algorithm="matroid", preset="thm2b",
                           domain={"kind": "box", "lo": [-1] * 5, "hi": [4] * 5},
                           reward_params={"c": [70, 70]}, seed=7)
    a, b = run_trial(cfg, 50, 0), run_trial(cfg, 50, 0)
    assert np.array_equal(a.algorithm_reward, b.algorithm_reward)
    assert np.all(a.oracle_value - a.algorithm_reward >= -1e-9)
    assert compute_regret(a) >= 0


CHECKS = [
    ("exp3s probabilities and weights", _exp3s),
    ("oco probes stay feasible", _oco_feasible),
    ("closed-form oracle matches grid", _oracle_grid),
    ("modular profiles are exact", _profiles),
    ("tau-greedy guarantee", _greedy),
    ("matroid slate and observers", _matroid_slate),
    ("harness determinism and dominance", _harness),
]


def run(verbose: bool = False) -> bool:
    ok = True
    for name, fn in CHECKS:
        try:
            fn()
            print(f"PASS  {name}")
        except Exception:  # report every failure, keep going
            ok = False
            print(f"FAIL  {name}")
            if verbose:
                traceback.print_exc()
    return ok
