"""Seeded regret experiments: wire an adversary schedule, a learner and the
per-round oracle together, then aggregate normalised regret over trials.

Two independent RNG streams per trial: the learner draws from
``default_rng([seed, trial])`` and the adversary from
``(seed, ADVERSARY_TAG, trial)``, so the reward sequence never depends on
the learner's randomness.
"""

from __future__ import annotations

import csv
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import oracle
from .composite import limited_switch_gamma, matroid_new, single_new
from .domains import ConvexDomain, domain_from_config
from .rewards import LIMITED, REDRAW, AdversarySchedule, sampler_from_config

ADVERSARY_TAG = 0x61647673  # "advs"
METRICS = ("R", "R_over_T_V", "R_over_T23_V", "R_over_TlnT", "R_over_T34lnT")
SUMMARY_HEADER = ("T", "metric", "mean", "q10", "q50", "q90")
TRACE_HEADER = ("t", "algorithm_reward", "oracle_value", "regret")


@dataclass
class ExperimentConfig:
    n: int
    H: int
    T_list: list
    trials: int
    algorithm: str
    preset: str
    domain: dict
    reward: str = "quadratic"
    reward_params: dict = field(default_factory=dict)
    adversary: dict = field(default_factory=lambda: {"mode": REDRAW})
    mu: float | None = None  # None: take the sampler's modulus
    gamma: float | str | None = None  # number, "limited_switch", or None for the preset
    rho: float | None = None
    alpha: str | float = "fixed"  # "fixed" (alpha = 1), "profile", or a number
    oracle: str = oracle.CLOSED_FORM
    seed: int = 0
    output: str | None = None
    d: int | None = None

    def __post_init__(self):
        self.T_list = [int(T) for T in self.T_list]
        if self.d is None:
            self.d = self.n
        if self.trials < 1:
            raise ValueError("need at least one trial")
        if not self.T_list or min(self.T_list) < 2:
            raise ValueError("every horizon T must be >= 2")
        if self.H < 1 or self.H > self.n:
            raise ValueError(f"cardinality cap H must lie in [1, n], got {self.H}")
        if self.H == 1 and self.algorithm != "single":
            raise ValueError("H = 1 requires algorithm 'single'")
        if self.H >= 2 and self.algorithm != "matroid":
            raise ValueError("H >= 2 requires algorithm 'matroid'")
        if self.d != self.n:
            raise ValueError("subset-selection families need d = n")
        mode = self.adversary.get("mode", REDRAW)
        if mode not in (REDRAW, LIMITED):
            raise ValueError(f"unknown adversary mode {mode!r}")
        if isinstance(self.gamma, str) and self.gamma != "limited_switch":
            raise ValueError(f"unknown gamma rule {self.gamma!r}")
        if not (self.alpha in ("fixed", "profile") or isinstance(self.alpha, (int, float))):
            raise ValueError(f"alpha must be 'fixed', 'profile' or a number, got {self.alpha!r}")
        if self.oracle not in (oracle.CLOSED_FORM, oracle.GRID, oracle.PGA):
            raise ValueError(f"unknown oracle method {self.oracle!r}")

    @classmethod
    def from_dict(cls, cfg: dict) -> "ExperimentConfig":
        known = set(cls.__dataclass_fields__)
        extra = set(cfg) - known
        if extra:
            raise ValueError(f"unknown config keys: {sorted(extra)}")
        return cls(**cfg)

    @classmethod
    def from_json(cls, path) -> "ExperimentConfig":
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))

    def to_dict(self) -> dict:
        return asdict(self)

    def build_domain(self) -> ConvexDomain:
        dom = domain_from_config(self.domain)
        if dom.dim != self.d:
            raise ValueError(f"domain dimension {dom.dim} != d = {self.d}")
        return dom

    def switch_budget(self, T: int) -> int:
        adv = self.adversary
        if adv.get("mode", REDRAW) != LIMITED:
            return 0
        if "lambda" in adv:
            return int(adv["lambda"])
        return math.ceil(T ** float(adv.get("lambda_exponent", 1 / 6)) - 1e-12)


@dataclass
class RegretTrace:
    T: int
    algorithm_reward: np.ndarray
    oracle_value: np.ndarray
    alpha: float
    variation: oracle.VariationStats

    @property
    def regret(self) -> np.ndarray:
        """Cumulative alpha-regret after each round."""
        return np.cumsum(self.alpha * self.oracle_value - self.algorithm_reward)


def compute_regret(trace: RegretTrace, alpha: float | None = None) -> float:
    a = trace.alpha if alpha is None else alpha
    return float(a * trace.oracle_value.sum() - trace.algorithm_reward.sum())


def _schedule(config: ExperimentConfig, T: int, trial_index: int, domain) -> AdversarySchedule:
    sampler = sampler_from_config(config.reward, config.reward_params)
    return AdversarySchedule(sampler, domain, T, mode=config.adversary.get("mode", REDRAW),
                             lam=config.switch_budget(T),
                             seed=(config.seed, ADVERSARY_TAG, trial_index))


def _mu(config: ExperimentConfig, schedule) -> float | None:
    if config.mu is not None:
        return float(config.mu)
    return getattr(getattr(schedule, "sampler", None), "mu", None)


def build_learner(config: ExperimentConfig, T: int, domain, mu, rng):
    gamma = config.gamma
    if gamma == "limited_switch":
        gamma = limited_switch_gamma(config.n, T)
    if config.algorithm == "single":
        return single_new(config.n, domain, config.preset, T, mu, gamma=gamma)
    return matroid_new(config.n, config.H, domain, config.preset, T, rng, mu,
                       gamma=gamma, rho=config.rho)


def run_trial(config: ExperimentConfig, T: int, trial_index: int, adversary=None) -> RegretTrace:
    """One seeded run of ``T`` rounds.

    ``adversary`` replaces the configured schedule; it needs ``function(t)``
    and ``reward_bound(H)`` and may define ``observe(t, decision)`` to adapt
    to the history.
    """
    domain = config.build_domain()
    sched = _schedule(config, T, trial_index, domain) if adversary is None else adversary
    C = float(sched.reward_bound(config.H))
    rng = np.random.default_rng([config.seed, trial_index])
    learner = build_learner(config, T, domain, _mu(config, sched), rng)
    observe = getattr(sched, "observe", None)
    two_point = learner.oco.mode == "two"
    matroid = config.algorithm == "matroid"

    alg = np.empty(T)
    opt = np.empty(T)
    S_traj: list = []
    x_traj = np.empty((T, domain.dim))
    last_f, best = None, None
    distinct = []
    for t in range(1, T + 1):
        f = sched.function(t)
        if f is not last_f:
            best = oracle.round_optimum(f, config.n, config.H, domain, config.oracle)
            last_f = f
            distinct.append((f, best.x_star))
        dec = learner.decide(rng)
        v = f.evaluate(dec.discrete, dec.x)
        v_alt = f.evaluate(dec.discrete, dec.x_alt) if two_point else None
        if matroid:
            learner.feedback(v, v_alt, C, rng)
        else:
            learner.feedback(v, v_alt, C)
        if observe is not None:
            observe(t, dec)
        alg[t - 1] = v
        opt[t - 1] = best.value
        S_traj.append(best.S_star)
        x_traj[t - 1] = best.x_star

    if config.alpha == "fixed":
        alpha = 1.0
    elif config.alpha == "profile":
        alpha = oracle.trajectory_alpha([f for f, _ in distinct], [x for _, x in distinct])
    else:
        alpha = float(config.alpha)
    return RegretTrace(T, alg, opt, alpha, oracle.variation_stats(S_traj, x_traj))


# ---------------------------------------------------------------------------
# aggregation


@dataclass(frozen=True)
class SummaryRow:
    T: int
    metric: str
    mean: float
    q10: float
    q50: float
    q90: float


@dataclass
class Summary:
    rows: list

    def get(self, T: int, metric: str) -> SummaryRow:
        for row in self.rows:
            if row.T == T and row.metric == metric:
                return row
        raise KeyError((T, metric))

    def column(self, metric: str, stat: str = "q50") -> dict:
        return {row.T: getattr(row, stat) for row in self.rows if row.metric == metric}


def trace_metrics(trace: RegretTrace) -> dict:
    T = trace.T
    R = compute_regret(trace)
    V = trace.variation.V_S + trace.variation.V_x
    lnT = math.log(T)
    return {
        "R": R,
        "R_over_T_V": R / (T * V),
        "R_over_T23_V": R / (T ** (2 / 3) * V),
        "R_over_TlnT": R / (T * lnT),
        "R_over_T34lnT": R / (T ** 0.75 * lnT),
    }


def summarise(T: int, metric_rows: list) -> list:
    out = []
    for m in METRICS:
        vals = np.array([r[m] for r in metric_rows], dtype=float)
        q10, q50, q90 = np.quantile(vals, [0.1, 0.5, 0.9])
        out.append(SummaryRow(T, m, float(vals.mean()), float(q10), float(q50), float(q90)))
    return out


def _trial_metrics(args):
    config, T, i = args
    return trace_metrics(run_trial(config, T, i))


def run_experiment(config: ExperimentConfig, jobs: int = 1, trial_order=None) -> Summary:
    """All trials at every horizon.  Results are stored by trial index, so
    neither ``jobs`` nor ``trial_order`` changes the summary."""
    order = list(range(config.trials)) if trial_order is None else list(trial_order)
    if sorted(order) != list(range(config.trials)):
        raise ValueError("trial_order must be a permutation of the trial indices")
    rows = []
    for T in config.T_list:
        tasks = [(config, T, i) for i in order]
        if jobs > 1:
            with ProcessPoolExecutor(max_workers=jobs) as pool:
                results = list(pool.map(_trial_metrics, tasks))
        else:
            results = [_trial_metrics(task) for task in tasks]
        by_index = dict(zip(order, results))
        rows.extend(summarise(T, [by_index[i] for i in range(config.trials)]))
    return Summary(rows)


# ---------------------------------------------------------------------------
# CSV


def _fmt(v) -> str:
    if isinstance(v, str):
        return v
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return format(float(v), ".12g")


def _write(path, header, rows) -> None:
    path = Path(path)
    try:
        if path.parent and not path.parent.exists():
            path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            for row in rows:
                w.writerow([_fmt(v) for v in row])
    except OSError as exc:
        raise OSError(f"could not write CSV to {path}: {exc}") from exc


def emit_csv(obj, path) -> None:
    """Write a Summary (one row per horizon and metric) or a RegretTrace (one row per round)."""
    if isinstance(obj, Summary):
        rows = [(r.T, r.metric, r.mean, r.q10, r.q50, r.q90) for r in obj.rows]
        _write(path, SUMMARY_HEADER, rows)
    elif isinstance(obj, RegretTrace):
        reg = obj.regret
        rows = [(t + 1, obj.algorithm_reward[t], obj.oracle_value[t], reg[t]) for t in range(obj.T)]
        _write(path, TRACE_HEADER, rows)
    else:
        raise TypeError(f"cannot write {type(obj).__name__} as CSV")


def parse_csv(path) -> Summary:
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if tuple(header) != SUMMARY_HEADER:
            raise ValueError(f"{path} is not a summary CSV")
        rows = [SummaryRow(int(T), m, float(a), float(b), float(c), float(d))
                for T, m, a, b, c, d in reader]
    return Summary(rows)


def write_summary(config: ExperimentConfig, summary: Summary, out_dir=None) -> Path:
    if out_dir is not None:
        name = os.path.basename(config.output) if config.output else "summary.csv"
        path = Path(out_dir) / name
    elif config.output:
        path = Path(config.output)
    else:
        raise ValueError("no output path given")
    emit_csv(summary, path)
    return path
