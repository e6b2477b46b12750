"""Online concave maximisation from one or two function values per round.

Each round the learner perturbs its centre ``z`` along a random unit
direction, plays ``x = z + delta u`` (and, with two-point feedback, also
queries ``z - delta u``), forms a sphere-sampling gradient estimate and takes
a projected ascent step onto the shrunk domain ``(1 - xi) X``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .domains import ConvexDomain, sample_unit_sphere

SINGLE = "single"
TWO = "two"
PROBE_TOL = 1e-9


@dataclass(frozen=True)
class ConstantRate:
    eta: float

    def __call__(self, t: int) -> float:
        return self.eta


@dataclass(frozen=True)
class InverseStrongRate:
    """``eta_t = 1 / (t mu)`` for ``mu``-strongly concave rewards."""

    mu: float

    def __call__(self, t: int) -> float:
        return 1.0 / (t * self.mu)


@dataclass(frozen=True)
class Probe:
    x: np.ndarray
    x_alt: np.ndarray
    u: np.ndarray


class OCO:
    """Bandit-feedback projected gradient ascent.

    Parameters are taken as given; :func:`oco_new` fills them in from the
    standard presets.  ``xi`` is always ``delta / r`` so that every probe
    point stays feasible.
    """

    def __init__(self, domain: ConvexDomain, mode: str, delta: float, rate, T: int, z_init=None):
        if mode not in (SINGLE, TWO):
            raise ValueError(f"mode must be {SINGLE!r} or {TWO!r}, got {mode!r}")
        r = domain.inner_radius
        if not r > 0:
            raise ValueError("domain must contain a ball of positive radius around the origin")
        if not delta > 0:
            raise ValueError("perturbation radius delta must be positive")
        xi = delta / r
        if not xi < 1:
            raise ValueError(f"shrink factor delta/r = {xi} must be < 1")
        self.domain = domain
        self.d = domain.dim
        self.mode = mode
        self.delta = float(delta)
        self.xi = float(xi)
        self.rate = rate
        self.T = int(T)
        self.t = 1
        if z_init is None:
            self.z = np.zeros(self.d)
        else:
            self.z = domain.project(z_init, self.xi)
        self.pending: Probe | None = None
        self._box = (domain.lo - PROBE_TOL, domain.hi + PROBE_TOL) if domain.kind == "box" else None
        if domain.kind == "box":
            s = 1.0 - self.xi
            self._shrunk = (s * domain.lo, s * domain.hi)
        else:
            self._shrunk = None

    @property
    def eta(self) -> float:
        return self.rate(self.t)

    def propose(self, rng: np.random.Generator) -> Probe:
        if self.pending is not None:
            raise RuntimeError("propose called twice without an update")
        u = sample_unit_sphere(self.d, rng)
        return self._set_probe(u)

    def _set_probe(self, u: np.ndarray) -> Probe:
        step = self.delta * u
        x, x_alt = self.z + step, self.z - step
        if not self._probes_feasible(step):
            raise AssertionError("probe left the domain; shrink factor is inconsistent")
        self.pending = Probe(x, x_alt, u)
        return self.pending

    def _probes_feasible(self, step: np.ndarray) -> bool:
        # z lies in (1 - xi) X and |step| = xi r, so this holds up to rounding
        if self._box is not None:
            lo, hi = self._box
            a = np.abs(step)
            return bool(((self.z - a >= lo) & (self.z + a <= hi)).all())
        dom = self.domain
        return dom.contains(self.z + step, PROBE_TOL) and dom.contains(self.z - step, PROBE_TOL)

    def gradient_estimate(self, value_at_x: float, value_at_alt: float | None = None) -> np.ndarray:
        if self.pending is None:
            raise RuntimeError("no pending probe")
        if not math.isfinite(value_at_x):
            raise ValueError("reward value must be finite")
        u = self.pending.u
        if self.mode == SINGLE:
            if value_at_alt is not None:
                raise ValueError("single-point feedback takes exactly one value")
            return (self.d / self.delta) * value_at_x * u
        if value_at_alt is None:
            raise ValueError("two-point feedback needs the value at the second probe point")
        if not math.isfinite(value_at_alt):
            raise ValueError("reward value must be finite")
        return (self.d / (2.0 * self.delta)) * (value_at_x - value_at_alt) * u

    def update(self, value_at_x: float, value_at_alt: float | None = None) -> None:
        g = self.gradient_estimate(value_at_x, value_at_alt)
        step = self.z + self.rate(self.t) * g
        if self._shrunk is not None:
            # same clamp as domain.project with the shrunk bounds precomputed
            self.z = np.minimum(np.maximum(step, self._shrunk[0]), self._shrunk[1])
        else:
            self.z = self.domain.project(step, self.xi)
        self.t += 1
        self.pending = None


PRESETS = ("prop2a", "prop2b", "prop2c")


def oco_new(domain: ConvexDomain, mode: str, preset: str, T: int, *, mu: float | None = None,
            z_init=None, delta: float | None = None) -> OCO:
    """Build a learner with the step size / radius schedule of a named preset.

    ``prop2a``: single point, eta = T^-3/4, delta = r T^-1/4.
    ``prop2b``: two point, eta = T^-1/2, delta = r T^-1/2.
    ``prop2c``: two point, eta_t = 1/(t mu), delta = r / T.
    ``delta`` overrides the preset radius.
    """
    if T < 2:
        raise ValueError("presets need T >= 2")
    r = domain.inner_radius
    if preset == "prop2a":
        if mode != SINGLE:
            raise ValueError("prop2a is the single-point preset")
        rate, d0 = ConstantRate(T ** -0.75), r / T ** 0.25
    elif preset == "prop2b":
        if mode != TWO:
            raise ValueError("prop2b is a two-point preset")
        rate, d0 = ConstantRate(T ** -0.5), r / T ** 0.5
    elif preset == "prop2c":
        if mode != TWO:
            raise ValueError("prop2c is a two-point preset")
        if mu is None or not mu > 0:
            raise ValueError("prop2c needs a strong-concavity modulus mu > 0")
        rate, d0 = InverseStrongRate(mu), r / T
    else:
        raise ValueError(f"unknown preset {preset!r}")
    return OCO(domain, mode, d0 if delta is None else delta, rate, T, z_init=z_init)


def oco_propose(state: OCO, rng: np.random.Generator) -> Probe:
    return state.propose(rng)


def oco_update(state: OCO, value_at_x: float, value_at_alt: float | None = None) -> OCO:
    state.update(value_at_x, value_at_alt)
    return state


def gradient_estimator_mean(h, z, delta: float, d: int, N: int, rng: np.random.Generator,
                            return_stderr: bool = False):
    """Monte-Carlo mean of the two-point estimator of ``grad h`` at ``z``.

    ``h`` must accept an ``(N, d)`` array and return ``N`` values.
    """
    z = np.asarray(z, dtype=float)
    u = sample_unit_sphere(d, rng, size=N)
    diff = np.asarray(h(z + delta * u)) - np.asarray(h(z - delta * u))
    g = (d / (2.0 * delta)) * diff[:, None] * u
    mean = g.mean(axis=0)
    if return_stderr:
        return mean, g.std(axis=0, ddof=1) / math.sqrt(N)
    return mean
