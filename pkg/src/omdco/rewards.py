"""Reward families f(S, x) and the adversary schedules that emit them.

Every shipped family is coordinate-separable: element ``j`` of the ground
set owns coordinate ``x_j``, so f(S, .) can be maximised one coordinate at a
time.  Element indices are 0-based.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .domains import ConvexDomain, cube


def _quad_max(p: float, q: float, lo: float, hi: float) -> float:
    """max of -p x^2 + q x over [lo, hi], p >= 0."""
    cands = [lo, hi]
    if p > 0:
        cands.append(min(max(q / (2 * p), lo), hi))
    return max(-p * x * x + q * x for x in cands)


def _as_mask(S, n: int) -> np.ndarray:
    mask = np.zeros(n, dtype=bool)
    for i in S:
        i = int(i)
        if not 0 <= i < n:
            raise ValueError(f"element {i} outside the ground set of size {n}")
        mask[i] = True
    return mask


class RewardFunction:
    """Base class: subclasses supply the per-element terms and their derivatives.

    ``additive`` families satisfy f(S, x) = sum_{j in S} phi_j(x_j);
    ``separable`` ones are a nondecreasing function of such terms, so the
    coordinate-wise maximiser of f({j}, .) maximises f(S, .) for every S.
    """

    additive = True
    separable = True

    def __init__(self, n: int, domain: ConvexDomain | None):
        self.n = int(n)
        self.dim = self.n
        if domain is not None and domain.dim != self.n:
            raise ValueError(f"domain dimension {domain.dim} != ground set size {self.n}")
        self.domain = domain

    # per-element terms phi_j(x_j), vectorised over the leading axes of x
    def _terms(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def _term_grads(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def _outer(self, s):
        return s

    def _outer_grad(self, s):
        return np.ones_like(s)

    def _point(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.shape != (self.dim,):
            raise ValueError(f"expected a point of shape ({self.dim},), got {x.shape}")
        if self.domain is not None and not self.domain.contains(x, 1e-9):
            raise ValueError("point lies outside the domain")
        return x

    def evaluate(self, S, x) -> float:
        x = self._point(x)
        mask = _as_mask(S, self.n)
        return float(self._outer(self._terms(x)[mask].sum()))

    __call__ = evaluate

    def evaluate_masks(self, masks: np.ndarray, x) -> np.ndarray:
        """Values for a batch of subsets given as a boolean (m, n) array."""
        x = self._point(x)
        return self._outer(masks.astype(float) @ self._terms(x))

    def evaluate_points(self, S, X) -> np.ndarray:
        """f(S, x) for every row of an (m, n) array; no domain check."""
        mask = _as_mask(S, self.n)
        return self._outer(self._terms(np.asarray(X, dtype=float))[..., mask].sum(axis=-1))

    def gradient(self, S, x) -> np.ndarray:
        return self.gradient_points(S, self._point(x))

    def gradient_points(self, S, X) -> np.ndarray:
        """Gradient of f(S, .) at one point or at every row of an (m, n) array."""
        X = np.asarray(X, dtype=float)
        mask = _as_mask(S, self.n)
        total = self._terms(X)[..., mask].sum(axis=-1)
        g = self._term_grads(X) * np.expand_dims(self._outer_grad(total), -1)
        return np.where(mask, g, 0.0)

    def element_values(self, x) -> np.ndarray:
        """phi_j(x_j) for every element."""
        return self._terms(self._point(x))

    # closed forms; families without them raise
    def argmax_x(self, domain: ConvexDomain) -> np.ndarray:
        raise NotImplementedError(
            f"{type(self).__name__} has no closed-form maximiser; use the grid oracle"
        )

    def constants(self, domain: ConvexDomain, H: int) -> tuple[float, float, float]:
        raise NotImplementedError(
            f"{type(self).__name__} has no closed-form constants; "
            "estimate them with oracle.estimate_constants"
        )


class SeparableQuadratic(RewardFunction):
    """f(S, x) = sum_{i in S} (-a_i x_i^2 + b_i x_i + c_i)."""

    def __init__(self, a, b, c, domain: ConvexDomain | None = None):
        self.a = np.asarray(a, dtype=float).ravel()
        self.b = np.asarray(b, dtype=float).ravel()
        self.c = np.asarray(c, dtype=float).ravel()
        if not (self.a.shape == self.b.shape == self.c.shape):
            raise ValueError("a, b, c must have equal length")
        if np.any(self.a <= 0) or np.any(self.c < 0):
            raise ValueError("need a_i > 0 and c_i >= 0")
        super().__init__(self.a.size, domain)
        if domain is not None:
            if domain.kind != "box":
                raise ValueError("separable families live on boxes")
            # concave per-element terms attain their minimum at an endpoint
            low = np.minimum(self._terms(domain.lo), self._terms(domain.hi))
            if np.any(low < 0):
                bad = int(np.argmin(low))
                raise ValueError(
                    f"element {bad} term is negative on the domain; f would not be monotone in S"
                )

    def _terms(self, x):
        return -self.a * x * x + self.b * x + self.c

    def _term_grads(self, x):
        return -2.0 * self.a * x + self.b

    @property
    def mu(self) -> float:
        return 2.0 * float(self.a.min())

    def argmax_x(self, domain: ConvexDomain) -> np.ndarray:
        return np.clip(self.b / (2.0 * self.a), domain.lo, domain.hi)

    def constants(self, domain: ConvexDomain, H: int) -> tuple[float, float, float]:
        xs = self.argmax_x(domain)
        top = np.sort(self._terms(xs))[::-1][:H]
        C = float(top.sum())
        gmax = np.maximum(np.abs(self._term_grads(domain.lo)), np.abs(self._term_grads(domain.hi)))
        G = float(np.sqrt(np.sort(gmax ** 2)[::-1][:H].sum()))
        return C, G, self.mu


class ModularLinear(RewardFunction):
    """f(S, x) = sum_{i in S} (w_i x_i + o_i), with x_i >= 0 wherever w_i > 0."""

    def __init__(self, w, o=None, domain: ConvexDomain | None = None):
        self.w = np.asarray(w, dtype=float).ravel()
        self.o = np.zeros_like(self.w) if o is None else np.asarray(o, dtype=float).ravel()
        if self.o.shape != self.w.shape:
            raise ValueError("w and o must have equal length")
        if np.any(self.w < 0) or np.any(self.o < 0):
            raise ValueError("need w_i >= 0 and o_i >= 0")
        super().__init__(self.w.size, domain)
        if domain is not None:
            if domain.kind != "box":
                raise ValueError("separable families live on boxes")
            if np.any((self.w > 0) & (domain.lo < 0)):
                raise ValueError("coordinates with w_i > 0 must be nonnegative on the domain")

    def _terms(self, x):
        return self.w * x + self.o

    def _term_grads(self, x):
        return np.broadcast_to(self.w, np.shape(x)).astype(float)

    mu = 0.0

    def argmax_x(self, domain: ConvexDomain) -> np.ndarray:
        return np.where(self.w > 0, domain.hi, np.clip(0.0, domain.lo, domain.hi))

    def constants(self, domain: ConvexDomain, H: int) -> tuple[float, float, float]:
        top = np.sort(self._terms(self.argmax_x(domain)))[::-1][:H]
        G = float(np.sqrt(np.sort(self.w ** 2)[::-1][:H].sum()))
        return float(top.sum()), G, 0.0


def _clipped_quad(p, q, s, x):
    return np.maximum(-p * x * x + q * x + s, 0.0)


def _clipped_quad_grad(p, q, s, x):
    return np.where(-p * x * x + q * x + s > 0, -2.0 * p * x + q, 0.0)


def _check_inner_nonneg(p, q, s, domain, what):
    # the clip at zero must never bind on the domain, else concavity breaks
    lo, hi = domain.lo, domain.hi
    low = np.minimum(-p * lo * lo + q * lo + s, -p * hi * hi + q * hi + s)
    if np.any(low < 0):
        raise ValueError(f"{what} inner functions go negative on the domain")


class FacilityLocation(RewardFunction):
    """f(S, x) = sum_i sum_{j in S} h_ij(x_j), h_ij(y) = max(0, -P_ij y^2 + Q_ij y + R_ij).

    Coefficient arrays have shape (clients, n).
    """

    def __init__(self, P, Q, R, domain: ConvexDomain | None = None):
        self.P = np.atleast_2d(np.asarray(P, dtype=float))
        self.Q = np.atleast_2d(np.asarray(Q, dtype=float))
        self.R = np.atleast_2d(np.asarray(R, dtype=float))
        if not (self.P.shape == self.Q.shape == self.R.shape):
            raise ValueError("P, Q, R must share a shape")
        if np.any(self.P < 0):
            raise ValueError("component quadratics must be concave (P >= 0)")
        super().__init__(self.P.shape[1], domain)
        if domain is not None:
            _check_inner_nonneg(self.P, self.Q, self.R, domain, "facility")

    def _terms(self, x):
        return _clipped_quad(self.P, self.Q, self.R, np.expand_dims(x, -2)).sum(axis=-2)

    def _term_grads(self, x):
        return _clipped_quad_grad(self.P, self.Q, self.R, np.expand_dims(x, -2)).sum(axis=-2)

    @property
    def mu(self) -> float:
        return 2.0 * float(self.P.sum(axis=0).min())


class CompositeMonotone(RewardFunction):
    """f(S, x) = outer(sum_{i in S} h_i(x_i)), outer in {identity, sqrt}."""

    def __init__(self, p, q, s, outer: str = "sqrt", domain: ConvexDomain | None = None):
        self.p = np.asarray(p, dtype=float).ravel()
        self.q = np.asarray(q, dtype=float).ravel()
        self.s = np.asarray(s, dtype=float).ravel()
        if not (self.p.shape == self.q.shape == self.s.shape):
            raise ValueError("p, q, s must have equal length")
        if np.any(self.p < 0):
            raise ValueError("inner quadratics must be concave (p >= 0)")
        if outer not in ("identity", "sqrt"):
            raise ValueError(f"outer must be 'identity' or 'sqrt', got {outer!r}")
        self.outer = outer
        self.additive = outer == "identity"
        super().__init__(self.p.size, domain)
        if domain is not None:
            _check_inner_nonneg(self.p, self.q, self.s, domain, "composite")

    def _terms(self, x):
        return _clipped_quad(self.p, self.q, self.s, x)

    def _term_grads(self, x):
        return _clipped_quad_grad(self.p, self.q, self.s, x)

    def _outer(self, s):
        return np.sqrt(s) if self.outer == "sqrt" else s

    def _outer_grad(self, s):
        if self.outer == "identity":
            return np.ones_like(s)
        s = np.asarray(s, dtype=float)
        return np.where(s > 0, 0.5 / np.sqrt(np.maximum(s, 1e-300)), 0.0)

    @property
    def mu(self) -> float | None:
        return 2.0 * float(self.p.min()) if self.outer == "identity" else None


def eval_reward(f: RewardFunction, S, x) -> float:
    return f.evaluate(S, x)


def constants(f: RewardFunction, domain: ConvexDomain, H: int | None = None):
    """(C, G, mu) in closed form: C is the best value over |S| = H."""
    return f.constants(domain, f.n if H is None else H)


def quadratic_benchmark_instance(rng: np.random.Generator, n: int = 5, H: int = 3):
    """One random reward of the numerical study: a, b ~ U[1, 4], c = 70, X = [-1, 4]^n."""
    domain = cube(-1.0, 4.0, n)
    return QuadraticSampler().draw(rng, domain), domain


section6_instance = quadratic_benchmark_instance  # name used by the external interface


# ---------------------------------------------------------------------------
# coefficient samplers and adversary schedules


def _range(v) -> tuple[float, float]:
    if isinstance(v, (int, float)):
        return float(v), float(v)
    lo, hi = v
    return float(lo), float(hi)


def _quad_upper(p, q, s, lo, hi) -> float:
    """Upper bound of -p x^2 + q x + s over x in [lo, hi] and the coefficient box."""
    best = -math.inf
    if hi > 0:
        best = max(best, _quad_max(p[0], q[1], max(lo, 0.0), hi))
    if lo < 0:
        best = max(best, _quad_max(p[0], q[0], lo, min(hi, 0.0)))
    return best + s[1]


def _quad_lower(p, q, s, lo, hi) -> float:
    """Lower bound of -p x^2 + q x + s over x in [lo, hi] and the coefficient box."""
    vals = [-p[1] * x * x + min(q[0] * x, q[1] * x) + s[0] for x in (lo, hi)]
    return min(vals)


@dataclass
class QuadraticSampler:
    """SeparableQuadratic with independent uniform a_i, b_i, c_i."""

    a: tuple = (1.0, 4.0)
    b: tuple = (1.0, 4.0)
    c: tuple = (70.0, 70.0)

    def __post_init__(self):
        self.a, self.b, self.c = _range(self.a), _range(self.b), _range(self.c)

    def draw(self, rng, domain):
        n = domain.dim
        a = rng.uniform(*self.a, size=n)
        b = rng.uniform(*self.b, size=n)
        c = rng.uniform(*self.c, size=n)
        return SeparableQuadratic(a, b, c, domain=domain)

    def reward_bound(self, domain, H) -> float:
        per = [_quad_upper(self.a, self.b, self.c, lo, hi) for lo, hi in zip(domain.lo, domain.hi)]
        return float(np.sort(per)[::-1][:H].sum())

    def check(self, domain):
        low = [_quad_lower(self.a, self.b, self.c, lo, hi) for lo, hi in zip(domain.lo, domain.hi)]
        if min(low) < 0:
            raise ValueError("coefficient ranges allow negative element terms on the domain")

    @property
    def mu(self) -> float:
        return 2.0 * self.a[0]


@dataclass
class ModularSampler:
    """ModularLinear with uniform w_i and offsets o_i."""

    w: tuple = (0.0, 0.0)
    o: tuple = (0.0, 1.0)

    def __post_init__(self):
        self.w, self.o = _range(self.w), _range(self.o)

    def draw(self, rng, domain):
        n = domain.dim
        return ModularLinear(rng.uniform(*self.w, size=n), rng.uniform(*self.o, size=n), domain=domain)

    def reward_bound(self, domain, H) -> float:
        per = self.w[1] * np.maximum(domain.hi, 0.0) + self.o[1]
        return float(np.sort(per)[::-1][:H].sum())

    def check(self, domain):
        if self.w[0] < 0 or self.o[0] < 0:
            raise ValueError("modular coefficients must be nonnegative")
        if self.w[1] > 0 and np.any(domain.lo < 0):
            raise ValueError("positive weights need a nonnegative domain")

    mu = 0.0


@dataclass
class FacilitySampler:
    clients: int = 3
    p: tuple = (0.5, 1.0)
    q: tuple = (0.0, 2.0)
    s: tuple = (20.0, 20.0)

    def __post_init__(self):
        self.p, self.q, self.s = _range(self.p), _range(self.q), _range(self.s)

    def draw(self, rng, domain):
        shape = (self.clients, domain.dim)
        return FacilityLocation(rng.uniform(*self.p, size=shape), rng.uniform(*self.q, size=shape),
                                rng.uniform(*self.s, size=shape), domain=domain)

    def reward_bound(self, domain, H) -> float:
        per = [self.clients * max(_quad_upper(self.p, self.q, self.s, lo, hi), 0.0)
               for lo, hi in zip(domain.lo, domain.hi)]
        return float(np.sort(per)[::-1][:H].sum())

    def check(self, domain):
        low = [_quad_lower(self.p, self.q, self.s, lo, hi) for lo, hi in zip(domain.lo, domain.hi)]
        if min(low) < 0:
            raise ValueError("coefficient ranges allow negative component values on the domain")

    @property
    def mu(self) -> float:
        return 2.0 * self.clients * self.p[0]


@dataclass
class CompositeSampler:
    outer: str = "sqrt"
    p: tuple = (0.5, 1.0)
    q: tuple = (0.0, 2.0)
    s: tuple = (20.0, 20.0)

    def __post_init__(self):
        self.p, self.q, self.s = _range(self.p), _range(self.q), _range(self.s)

    def draw(self, rng, domain):
        n = domain.dim
        return CompositeMonotone(rng.uniform(*self.p, size=n), rng.uniform(*self.q, size=n),
                                 rng.uniform(*self.s, size=n), outer=self.outer, domain=domain)

    def reward_bound(self, domain, H) -> float:
        per = [max(_quad_upper(self.p, self.q, self.s, lo, hi), 0.0)
               for lo, hi in zip(domain.lo, domain.hi)]
        total = float(np.sort(per)[::-1][:H].sum())
        return math.sqrt(total) if self.outer == "sqrt" else total

    def check(self, domain):
        low = [_quad_lower(self.p, self.q, self.s, lo, hi) for lo, hi in zip(domain.lo, domain.hi)]
        if min(low) < 0:
            raise ValueError("coefficient ranges allow negative inner values on the domain")

    @property
    def mu(self) -> float | None:
        return 2.0 * self.p[0] if self.outer == "identity" else None


SAMPLERS = {
    "quadratic": QuadraticSampler,
    "modular": ModularSampler,
    "facility": FacilitySampler,
    "composite": CompositeSampler,
}


def sampler_from_config(name: str, params: dict | None = None):
    if name not in SAMPLERS:
        raise ValueError(f"unknown reward family {name!r}; choose from {sorted(SAMPLERS)}")
    return SAMPLERS[name](**(params or {}))


REDRAW = "redraw"
LIMITED = "limited"


@dataclass
class AdversarySchedule:
    """Oblivious adversary: the reward of round t is a pure function of (seed, t).

    ``redraw`` draws fresh coefficients every round.  ``limited`` draws once
    per segment; segments have length ceil(T / (lam + 1)), giving at most
    ``lam`` switches.
    """

    sampler: object
    domain: ConvexDomain
    T: int
    mode: str = REDRAW
    lam: int = 0
    seed: tuple = (0,)
    _cache: dict = field(default_factory=dict, init=False, repr=False)

    def __post_init__(self):
        if self.mode not in (REDRAW, LIMITED):
            raise ValueError(f"unknown adversary mode {self.mode!r}")
        if self.T < 1:
            raise ValueError("T must be >= 1")
        if self.mode == LIMITED and self.lam < 0:
            raise ValueError("switch count must be >= 0")
        self.seed = tuple(int(s) for s in np.atleast_1d(self.seed))
        self.sampler.check(self.domain)

    @property
    def segment_length(self) -> int:
        if self.mode == REDRAW:
            return 1
        return -(-self.T // (self.lam + 1))

    def segment(self, t: int) -> int:
        if not 1 <= t <= self.T:
            raise ValueError(f"round {t} outside [1, {self.T}]")
        return (t - 1) // self.segment_length

    def function(self, t: int) -> RewardFunction:
        k = self.segment(t)
        f = self._cache.get(k)
        if f is None:
            rng = np.random.default_rng([*self.seed, k])
            f = self.sampler.draw(rng, self.domain)
            self._cache[k] = f
        return f

    def reward_bound(self, H: int) -> float:
        return self.sampler.reward_bound(self.domain, H)


def schedule_function(sched: AdversarySchedule, t: int) -> RewardFunction:
    return sched.function(t)
