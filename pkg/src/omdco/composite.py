"""Mixed discrete/continuous online learners built from Exp3.S and the
bandit-feedback gradient method.

``SingleOMDCO`` picks one element per round with a single Exp3.S learner.
``MatroidOMDCO`` picks up to ``H`` elements: ``H`` Exp3.S copies each
propose one slate position, and an occasional exploration round swaps a
uniformly random element into a random slate prefix so that exactly one
copy learns from that round's reward.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .bandit import BanditFeedback, Exp3S
from .domains import ConvexDomain
from .oco import OCO, SINGLE, TWO, ConstantRate, InverseStrongRate


@dataclass(frozen=True)
class Decision:
    discrete: frozenset
    x: np.ndarray
    x_alt: np.ndarray | None = None


def _check_value(v: float, C: float, what: str) -> float:
    v = float(v)
    if not (0.0 <= v <= C):
        raise ValueError(f"{what} = {v} outside the reward range [0, {C}]")
    return v


# ---------------------------------------------------------------------------
# one element per round

SINGLE_PRESETS = ("thm1a", "thm1b", "thm1c")


class SingleOMDCO:
    """Exp3.S over the ground set paired with one continuous learner."""

    def __init__(self, n: int, gamma: float, oco: OCO):
        self.n = int(n)
        self.bandit = Exp3S(n, gamma, oco.T)
        self.oco = oco
        self.mode = oco.mode
        self.T = oco.T
        self.t = 1
        self.pending: tuple[int, Decision] | None = None

    @property
    def gamma(self) -> float:
        return self.bandit.gamma

    def decide(self, rng: np.random.Generator) -> Decision:
        """Draw order: the arm, then the sphere direction."""
        if self.pending is not None:
            raise RuntimeError("decide called twice without feedback")
        arm = self.bandit.draw(rng)
        probe = self.oco.propose(rng)
        alt = probe.x_alt if self.mode == TWO else None
        dec = Decision(frozenset((arm,)), probe.x, alt)
        self.pending = (arm, dec)
        return dec

    def feedback(self, f_at_x: float, f_at_alt: float | None, C: float) -> None:
        if self.pending is None:
            raise RuntimeError("feedback without a pending decision")
        v = _check_value(f_at_x, C, "f(x)")
        if f_at_alt is not None:
            _check_value(f_at_alt, C, "f(x_alt)")
        self.bandit.feed(BanditFeedback(v, True, 0.0, C))
        self.oco.update(v, f_at_alt if self.mode == TWO else None)
        self.pending = None
        self.t += 1


def single_new(n: int, domain: ConvexDomain, preset: str, T: int, mu: float | None = None,
               *, gamma: float | None = None, z_init=None) -> SingleOMDCO:
    """Presets, with r the inner radius of the domain:

    ``thm1a``: single point, gamma = min(1, sqrt(n / T^1/4)), eta = T^-3/4, delta = r / T^1/4.
    ``thm1b``: two point, gamma = min(1, sqrt(n / T^1/2)), eta = T^-1/2, delta = r / T^1/2.
    ``thm1c``: two point, gamma = min(1, sqrt(n / T)), eta_t = 1/(t mu), delta = r / T^1/4.
    """
    if T < 2:
        raise ValueError("presets need T >= 2")
    r = domain.inner_radius
    if preset == "thm1a":
        g0, mode, rate, delta = math.sqrt(n / T ** 0.25), SINGLE, ConstantRate(T ** -0.75), r / T ** 0.25
    elif preset == "thm1b":
        g0, mode, rate, delta = math.sqrt(n / T ** 0.5), TWO, ConstantRate(T ** -0.5), r / T ** 0.5
    elif preset == "thm1c":
        if mu is None or not mu > 0:
            raise ValueError("thm1c needs a strong-concavity modulus mu > 0")
        g0, mode, rate, delta = math.sqrt(n / T), TWO, InverseStrongRate(mu), r / T ** 0.25
    else:
        raise ValueError(f"unknown single-element preset {preset!r}; choose from {SINGLE_PRESETS}")
    oco = OCO(domain, mode, delta, rate, T, z_init=z_init)
    return SingleOMDCO(n, min(1.0, g0) if gamma is None else gamma, oco)


# ---------------------------------------------------------------------------
# up to H elements per round


MATROID_PRESETS = ("thm2a", "thm2b")


def played_set(slate, explore: bool, level: int, element: int) -> frozenset:
    """The set played this round; ``level`` is 1-based.

    Exploration keeps the first ``level - 1`` slate entries and adds
    ``element``; otherwise the whole slate is played.  Repeats collapse.
    """
    if explore:
        return frozenset(slate[: level - 1]) | {element}
    return frozenset(slate)


@dataclass(frozen=True)
class _Round:
    explore: bool
    level: int
    element: int
    played: frozenset


class MatroidOMDCO:
    """H Exp3.S copies with exploration probability ``rho`` and a two-point continuous learner."""

    def __init__(self, n: int, H: int, gamma: float, rho: float, oco: OCO, rng: np.random.Generator):
        if H < 2:
            raise ValueError("H must be >= 2; use the single-element learner for H = 1")
        if not 0.0 < rho <= 1.0:
            raise ValueError(f"exploration probability must lie in (0, 1], got {rho}")
        if oco.mode != TWO:
            raise ValueError("the cardinality-constrained learner uses two-point feedback")
        self.n = int(n)
        self.H = int(H)
        self.rho = float(rho)
        self.oco = oco
        self.T = oco.T
        self.bandits = [Exp3S(n, gamma, oco.T) for _ in range(self.H)]
        self.slate = [b.draw(rng) for b in self.bandits]
        self.t = 1
        self.pending: _Round | None = None

    @property
    def gamma(self) -> float:
        return self.bandits[0].gamma

    @property
    def effective_rho(self) -> float:
        return self.rho / (self.H * self.n)

    def decide(self, rng: np.random.Generator) -> Decision:
        """Draw order: explore flag, level, element, then the sphere direction."""
        if self.pending is not None:
            raise RuntimeError("decide called twice without feedback")
        explore = bool(rng.random() < self.rho)
        level = int(rng.integers(1, self.H + 1))
        element = int(rng.integers(self.n))
        played = played_set(self.slate, explore, level, element)
        probe = self.oco.propose(rng)
        self.pending = _Round(explore, level, element, played)
        return Decision(played, probe.x, probe.x_alt)

    def observers(self) -> list[bool]:
        """Which copies see this round's reward."""
        p = self.pending
        if p is None:
            raise RuntimeError("no pending decision")
        return [p.explore and p.level == l + 1 and p.element == s for l, s in enumerate(self.slate)]

    def feedback(self, f_at_x: float, f_at_alt: float, C: float, rng: np.random.Generator) -> None:
        if self.pending is None:
            raise RuntimeError("feedback without a pending decision")
        if f_at_alt is None:
            raise ValueError("two-point feedback needs the value at the second probe point")
        v = _check_value(f_at_x, C, "f(x)")
        _check_value(f_at_alt, C, "f(x_alt)")
        for b, seen in zip(self.bandits, self.observers()):
            b.feed(BanditFeedback(v, seen, -C, C))
        self.oco.update(v, f_at_alt)
        self.slate = [b.draw(rng) for b in self.bandits]
        self.pending = None
        self.t += 1


def matroid_new(n: int, H: int, domain: ConvexDomain, preset: str, T: int,
                rng: np.random.Generator, mu: float | None = None, *,
                gamma: float | None = None, rho: float | None = None, z_init=None) -> MatroidOMDCO:
    """Presets, with r the inner radius of the domain:

    ``thm2a``: gamma = min(1, n / T^1/6), rho = min(1, sqrt(H / T^1/3)), eta = T^-1/2, delta = r / T^1/2.
    ``thm2b``: gamma = min(1, n / T^1/3), rho = min(1, sqrt(H) / T^1/3), eta_t = 1/(t mu), delta = r ln T / T.

    ``gamma`` and ``rho`` override the preset values.  ``rng`` draws the first slate.
    """
    if H < 2:
        raise ValueError("H must be >= 2; use the single-element learner for H = 1")
    if T < 2:
        raise ValueError("presets need T >= 2")
    r = domain.inner_radius
    if preset == "thm2a":
        g0 = n / T ** (1 / 6)
        r0 = math.sqrt(H / T ** (1 / 3))
        rate, delta = ConstantRate(T ** -0.5), r / T ** 0.5
    elif preset == "thm2b":
        if mu is None or not mu > 0:
            raise ValueError("thm2b needs a strong-concavity modulus mu > 0")
        g0 = n / T ** (1 / 3)
        r0 = math.sqrt(H) / T ** (1 / 3)
        rate, delta = InverseStrongRate(mu), r * math.log(T) / T
    else:
        raise ValueError(f"unknown matroid preset {preset!r}; choose from {MATROID_PRESETS}")
    oco = OCO(domain, TWO, delta, rate, T, z_init=z_init)
    g = min(1.0, g0) if gamma is None else gamma
    p = min(1.0, r0) if rho is None else rho
    return MatroidOMDCO(n, H, g, p, oco, rng)


def limited_switch_gamma(n: int, T: int) -> float:
    """Mixing rate n T^1/12 / T^1/3 for a switch budget of order T^1/6, clamped at 1."""
    return min(1.0, n * T ** (1 / 12) / T ** (1 / 3))


def single_decide(state: SingleOMDCO, rng) -> Decision:
    return state.decide(rng)


def single_feedback(state: SingleOMDCO, f_at_x, f_at_alt, C) -> SingleOMDCO:
    state.feedback(f_at_x, f_at_alt, C)
    return state


def matroid_decide(state: MatroidOMDCO, rng) -> Decision:
    return state.decide(rng)


def matroid_feedback(state: MatroidOMDCO, f_at_x, f_at_alt, C, rng) -> MatroidOMDCO:
    state.feedback(f_at_x, f_at_alt, C, rng)
    return state


def matroid_effective_rho(state: MatroidOMDCO) -> float:
    return state.effective_rho
