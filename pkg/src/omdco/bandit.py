"""Exp3.S with error feedback: an adversarial bandit learner with a mixing
term that lets it track a switching best arm.

The learner never sees the Bernoulli reveal gate directly; the caller passes
the realized gate as ``BanditFeedback.observed``.  Arms are 0-based.
"""

from __future__ import annotations

import math
from bisect import bisect_right
from dataclasses import dataclass
from itertools import accumulate

import numpy as np

# weights are rescaled by their sum once it passes this; the probabilities
# and the additive mixing term are invariant under a common rescaling
RENORM_THRESHOLD = 1e100
SMALL_N = 32  # below this, draws run on Python floats


@dataclass(frozen=True)
class BanditFeedback:
    value: float
    observed: bool
    lower: float
    upper: float

    def __post_init__(self):
        if not self.lower < self.upper:
            raise ValueError(f"feedback range needs lower < upper, got [{self.lower}, {self.upper}]")
        if self.observed and not (self.lower <= self.value <= self.upper):
            raise ValueError(
                f"observed value {self.value} outside [{self.lower}, {self.upper}]"
            )


def sample_categorical(p: np.ndarray, rng: np.random.Generator) -> int:
    """Cumulative-sum inversion with one uniform variate."""
    cdf = p.cumsum()
    i = int(cdf.searchsorted(rng.random() * cdf[-1], side="right"))
    return min(i, p.size - 1)


class Exp3S:
    """One Exp3.S learner over ``n`` arms with mixing ``gamma`` and horizon ``T``.

    ``draw`` and ``feed`` must strictly alternate.
    """

    def __init__(self, n: int, gamma: float, T: int):
        if n < 1:
            raise ValueError("need at least one arm")
        if not 0.0 < gamma <= 1.0:
            raise ValueError(f"gamma must lie in (0, 1], got {gamma}")
        if T < 1:
            raise ValueError("horizon T must be >= 1")
        self.n = int(n)
        self.gamma = float(gamma)
        self.T = int(T)
        self.weights = np.ones(self.n)
        self.t = 1
        self.last_draw: tuple[int, float] | None = None
        self._mix = math.e / (self.n * self.T)

    @property
    def weights(self) -> np.ndarray:
        return self._w

    @weights.setter
    def weights(self, w) -> None:
        self._w = np.asarray(w, dtype=float)
        self._total = float(self._w.sum())

    def probabilities(self) -> np.ndarray:
        return ((1.0 - self.gamma) / self._total) * self._w + self.gamma / self.n

    def draw(self, rng: np.random.Generator) -> int:
        if self.last_draw is not None:
            raise RuntimeError("draw called twice without an intervening feed")
        if self.n > SMALL_N:
            p = self.probabilities()
            arm = sample_categorical(p, rng)
            self.last_draw = (arm, float(p[arm]))
            return arm
        # few arms: the same arithmetic on Python floats avoids per-call numpy overhead
        scale, floor = (1.0 - self.gamma) / self._total, self.gamma / self.n
        p = [scale * w + floor for w in self._w.tolist()]
        cdf = list(accumulate(p))
        arm = min(bisect_right(cdf, rng.random() * cdf[-1]), self.n - 1)
        self.last_draw = (arm, p[arm])
        return arm

    def estimate(self, fb: BanditFeedback) -> np.ndarray:
        """Importance-weighted reward estimate for the pending draw."""
        if self.last_draw is None:
            raise RuntimeError("no pending draw to estimate for")
        arm, p = self.last_draw
        r_hat = np.zeros(self.n)
        if fb.observed:
            r_hat[arm] = (fb.value - fb.lower) / (p * (fb.upper - fb.lower))
        assert r_hat[arm] >= 0.0
        return r_hat

    def feed(self, fb: BanditFeedback) -> None:
        if self.last_draw is None:
            raise RuntimeError("feed called without a pending draw")
        w, total = self._w, self._total
        # the estimate is zero off the drawn arm, so exp(0) = 1 leaves those weights
        # unscaled and only the mixing term moves them
        w_new = w + self._mix * total
        if fb.observed:
            arm, p = self.last_draw
            r_hat = (fb.value - fb.lower) / (p * (fb.upper - fb.lower))
            w_new[arm] = w[arm] * math.exp(self.gamma * r_hat / self.n) + self._mix * total
        w = w_new
        total = float(w.sum())
        if total > RENORM_THRESHOLD:
            w = w / total
            total = float(w.sum())
        self._w, self._total = w, total
        self.last_draw = None
        self.t += 1


def exp3s_new(n: int, gamma: float, T: int) -> Exp3S:
    return Exp3S(n, gamma, T)


def exp3s_draw(state: Exp3S, rng: np.random.Generator) -> int:
    return state.draw(rng)


def exp3s_feed(state: Exp3S, fb: BanditFeedback) -> Exp3S:
    state.feed(fb)
    return state


def exp3s_probabilities(state: Exp3S) -> np.ndarray:
    return state.probabilities()
