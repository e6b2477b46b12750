"""Online mixed discrete/continuous optimisation: Exp3.S, bandit-feedback
gradient ascent, their compositions for subset selection, brute-force
oracles and a seeded regret harness."""

from .bandit import BanditFeedback, Exp3S
from .composite import Decision, MatroidOMDCO, SingleOMDCO, matroid_new, single_new
from .domains import ConvexDomain, ball, box, cube
from .harness import ExperimentConfig, RegretTrace, Summary, run_experiment, run_trial
from .oco import OCO, oco_new
from .oracle import RoundOptimum, SetFunctionProfile, VariationStats, round_optimum

__all__ = [
    "BanditFeedback", "Exp3S", "Decision", "MatroidOMDCO", "SingleOMDCO", "matroid_new",
    "single_new", "ConvexDomain", "ball", "box", "cube", "ExperimentConfig", "RegretTrace",
    "Summary", "run_experiment", "run_trial", "OCO", "oco_new", "RoundOptimum",
    "SetFunctionProfile", "VariationStats", "round_optimum",
]

__version__ = "0.1.0"
