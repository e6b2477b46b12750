"""Brute-force ground truth: per-round optima, set-function profiles
(submodularity ratio, curvature, approximation factor), gradient-based
lower bounds on the ratio, the tau-approximate greedy guarantee, and the
variation statistics of a comparator trajectory.

Set functions are handled as tables indexed by bitmask (bit i <-> element i).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np

from .domains import ConvexDomain

MAX_ENUM_N = 20
MAX_PROFILE_N = 12
MAX_GRID_POINTS = 2_000_000
ZERO_TOL = 1e-12

CLOSED_FORM = "closed_form"
GRID = "grid"
PGA = "pga"


# ---------------------------------------------------------------------------
# enumeration helpers


@lru_cache(maxsize=None)
def _subsets(n: int, H: int):
    """All subsets with |S| <= H in lexicographic order, as tuples and masks."""
    if n > MAX_ENUM_N:
        raise ValueError(f"exhaustive enumeration is capped at n <= {MAX_ENUM_N}, got {n}")
    from itertools import combinations

    subs = [c for k in range(min(H, n) + 1) for c in combinations(range(n), k)]
    subs.sort()
    masks = np.zeros((len(subs), n), dtype=bool)
    for row, s in enumerate(subs):
        masks[row, list(s)] = True
    masks.setflags(write=False)
    return tuple(subs), masks


def bits_matrix(n: int) -> np.ndarray:
    """(2^n, n) 0/1 matrix; row m lists the members of bitmask m."""
    m = np.arange(1 << n)
    return ((m[:, None] >> np.arange(n)) & 1).astype(float)


def mask_of(S) -> int:
    out = 0
    for i in S:
        out |= 1 << int(i)
    return out


def set_of(mask: int) -> frozenset:
    return frozenset(i for i in range(mask.bit_length()) if mask >> i & 1)


def tabulate(g, n: int) -> np.ndarray:
    """Table of g over all 2^n subsets.  ``g`` is a callable on frozensets or already a table."""
    if not callable(g):
        vals = np.asarray(g, dtype=float)
        if vals.shape != (1 << n,):
            raise ValueError(f"set-function table must have length 2^{n}")
        return vals
    return np.array([g(set_of(m)) for m in range(1 << n)], dtype=float)


def induced_set_function(f, x) -> np.ndarray:
    """Table of S -> f(S, x) for a reward function at a fixed point."""
    n = f.n
    return np.asarray(f.evaluate_masks(bits_matrix(n).astype(bool), x), dtype=float)


def check_monotone(vals: np.ndarray, n: int, tol: float = 1e-9) -> None:
    marg = _marginals(vals, n)
    bad = np.argwhere(marg < -tol * max(1.0, float(np.abs(vals).max())))
    if bad.size:
        m, w = (int(v) for v in bad[0])
        raise ValueError(
            f"set function is not monotone: g({sorted(set_of(m))} + {{{w}}}) < g({sorted(set_of(m))})"
        )


def _marginals(vals: np.ndarray, n: int) -> np.ndarray:
    m = np.arange(1 << n)
    idx = m[:, None] | (1 << np.arange(n))
    return vals[idx] - vals[:, None]


def _snap_ratio(num, den):
    """num / den with ratios within rounding of 1 set to exactly 1."""
    ratio = num / den
    close = np.abs(num - den) <= 1e-12 * np.maximum(np.maximum(np.abs(num), np.abs(den)), 1.0)
    return np.where(close, 1.0, ratio)


# ---------------------------------------------------------------------------
# per-round optimum


@dataclass(frozen=True)
class RoundOptimum:
    S_star: frozenset
    x_star: np.ndarray
    value: float


def _grid_maximiser(f, domain: ConvexDomain, resolution: float) -> np.ndarray:
    axes = domain.grid_axes(resolution)
    base = np.clip(0.0, domain.lo, domain.hi)
    if f.separable:
        # maximising f({j}, .) along each axis equals a full tensor-grid search
        x = base.copy()
        for j, ax in enumerate(axes):
            pts = np.tile(base, (ax.size, 1))
            pts[:, j] = ax
            x[j] = ax[int(np.argmax(f.evaluate_points((j,), pts)))]
        return x
    if domain.dim > 4 or math.prod(a.size for a in axes) > MAX_GRID_POINTS:
        raise ValueError("tensor grid too large; use a coarser resolution or another method")
    mesh = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, domain.dim)
    return mesh[int(np.argmax(f.evaluate_points(range(f.n), mesh)))]


def _pga(f, S, domain: ConvexDomain, x0, iters: int, tol: float) -> np.ndarray:
    """Projected gradient ascent with backtracking on f(S, .)."""
    x = domain.project(x0)
    val = f.evaluate_points(S, x[None, :])[0]
    step = 1.0
    for _ in range(iters):
        g = f.gradient_points(S, x)
        if not np.any(g):
            break
        while True:
            y = domain.project(x + step * g)
            v = f.evaluate_points(S, y[None, :])[0]
            if v >= val + 1e-4 * float(g @ (y - x)) or step < 1e-12:
                break
            step *= 0.5
        moved = float(np.linalg.norm(y - x))
        x, val = y, v
        step = min(step * 2.0, 1e6)
        if moved < tol:
            break
    return x


def round_optimum(f, n: int, H: int, domain: ConvexDomain, method: str = CLOSED_FORM, *,
                  resolution: float = 1e-3, iters: int = 500, tol: float = 1e-8) -> RoundOptimum:
    """argmax over |S| <= H and x in X of f(S, x), by enumeration over S.

    Ties among subsets go to the lexicographically smallest (sorted) tuple.
    """
    subs, masks = _subsets(n, H)
    if method == CLOSED_FORM:
        try:
            x = f.argmax_x(domain)
        except NotImplementedError as exc:
            raise ValueError(str(exc)) from None
        vals = f.evaluate_masks(masks, x)
        k = int(np.argmax(vals))
        return RoundOptimum(frozenset(subs[k]), x, float(vals[k]))
    if method == GRID:
        x = _grid_maximiser(f, domain, resolution)
        vals = f.evaluate_masks(masks, x)
        k = int(np.argmax(vals))
        return RoundOptimum(frozenset(subs[k]), x, float(vals[k]))
    if method == PGA:
        x_full = _pga(f, range(n), domain, np.zeros(domain.dim), iters, tol)
        best = (-math.inf, None, None)
        for s in subs:
            x = _pga(f, s, domain, x_full, iters, tol) if s else x_full
            v = float(f.evaluate_points(s, x[None, :])[0])
            if v > best[0]:
                best = (v, s, x)
        return RoundOptimum(frozenset(best[1]), best[2], best[0])
    raise ValueError(f"unknown oracle method {method!r}")


def estimate_constants(f, domain: ConvexDomain, H: int, resolution: float = 1e-3):
    """Grid estimates of (C, G) for separable families lacking closed forms."""
    if not f.separable:
        raise ValueError("grid constants need a separable family")
    x = _grid_maximiser(f, domain, resolution)
    C = float(np.max(f.evaluate_masks(_subsets(f.n, H)[1], x)))
    axes = domain.grid_axes(resolution)
    # per-coordinate worst-case derivative of the inner terms, outer slope at its largest
    worst = np.zeros(f.n)
    base = np.clip(0.0, domain.lo, domain.hi)
    for j, ax in enumerate(axes):
        pts = np.tile(base, (ax.size, 1))
        pts[:, j] = ax
        worst[j] = np.abs(f._term_grads(pts)[:, j]).max()
    if f.additive:
        G = float(np.sqrt(np.sort(worst ** 2)[::-1][:H].sum()))
    else:
        # outer sqrt: slope 1/(2 sqrt(s)) is largest at the smallest inner sum
        lows = np.array([f._terms(np.where(np.arange(f.n) == j, ax[:, None], base)).min(axis=0)[j]
                         for j, ax in enumerate(axes)])
        s_min = max(float(np.sort(lows)[:H].sum()), 1e-300)
        G = float(np.sqrt(np.sort(worst ** 2)[::-1][:H].sum()) * 0.5 / math.sqrt(s_min))
    return C, G


# ---------------------------------------------------------------------------
# submodularity ratio, curvature, approximation factor


@dataclass(frozen=True)
class SetFunctionProfile:
    kappa: float
    curvature: float
    alpha: float


def submodularity_ratio(g, n: int, tol: float = ZERO_TOL) -> float:
    """Largest kappa with sum_{w in O\\S} [g(S+w) - g(S)] >= kappa [g(S u O) - g(S)] for all S, O.

    Pairs whose right-hand gain is <= tol impose no constraint; capped at 1.
    """
    if n > MAX_PROFILE_N:
        raise ValueError(f"exhaustive profiles are capped at n <= {MAX_PROFILE_N}")
    vals = tabulate(g, n)
    check_monotone(vals, n)
    marg = _marginals(vals, n)  # marg[S, w] is 0 when w in S
    bits = bits_matrix(n)
    masks = np.arange(1 << n)
    kappa = 1.0
    chunk = max(1, (1 << 22) >> n)
    for start in range(0, 1 << n, chunk):
        rows = masks[start:start + chunk]
        num = marg[rows] @ bits.T
        den = vals[rows[:, None] | masks[None, :]] - vals[rows][:, None]
        live = den > tol
        if np.any(live):
            kappa = min(kappa, float(_snap_ratio(num[live], den[live]).min()))
    return max(min(kappa, 1.0), 0.0)


def curvature(g, n: int, tol: float = ZERO_TOL) -> float:
    """Smallest c with g(O+w) - g(O) >= (1 - c)[g(S+w) - g(S)] for all S <= O, w not in O."""
    if n > MAX_PROFILE_N:
        raise ValueError(f"exhaustive profiles are capped at n <= {MAX_PROFILE_N}")
    vals = tabulate(g, n)
    check_monotone(vals, n)
    marg = _marginals(vals, n)
    masks = np.arange(1 << n)
    c = 0.0
    for w in range(n):
        m = marg[:, w].copy()
        # best[O] = max over submasks S of O of m[S]
        best = m.copy()
        for b in range(n):
            has = masks[(masks >> b) & 1 == 1]
            best[has] = np.maximum(best[has], best[has ^ (1 << b)])
        outside = (masks >> w) & 1 == 0
        live = outside & (best > tol)
        if np.any(live):
            ratio = _snap_ratio(np.maximum(m[live], 0.0), best[live])
            c = max(c, float((1.0 - ratio).max()))
    return min(max(c, 0.0), 1.0)


def alpha_factor(kappa: float, c: float) -> float:
    """(1/c)(1 - exp(-c kappa)), with the c -> 0 limit kappa."""
    if c <= 1e-12:
        return float(kappa)
    return float(-math.expm1(-c * kappa) / c)


def set_function_profile(g, n: int) -> SetFunctionProfile:
    vals = tabulate(g, n)
    k = submodularity_ratio(vals, n)
    c = curvature(vals, n)
    return SetFunctionProfile(k, c, alpha_factor(k, c))


def smoothness_kappa_lower(mu: float, sigma: float) -> float:
    """Ratio lower bound mu / sigma for sigma-smooth, mu-strongly concave rewards."""
    if not 0 < mu <= sigma:
        raise ValueError(f"need 0 < mu <= sigma, got mu={mu}, sigma={sigma}")
    return mu / sigma


def gradient_ratio_kappa_lower(f, domain: ConvexDomain, resolution: float = 1e-2) -> float:
    """min over coordinates of min|d_w f| / max|d_w f| over a grid on X.

    Coordinates whose derivative vanishes everywhere impose no constraint.
    """
    full = range(f.n)
    axes = domain.grid_axes(resolution)
    lo_mag = np.empty(f.n)
    hi_mag = np.empty(f.n)
    if f.additive:
        base = np.clip(0.0, domain.lo, domain.hi)
        for j, ax in enumerate(axes):
            pts = np.tile(base, (ax.size, 1))
            pts[:, j] = ax
            mags = np.abs(f.gradient_points(full, pts)[:, j])
            lo_mag[j], hi_mag[j] = mags.min(), mags.max()
    else:
        if math.prod(a.size for a in axes) > MAX_GRID_POINTS:
            raise ValueError("tensor grid too large for a non-additive family; coarsen the resolution")
        mesh = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, domain.dim)
        mags = np.abs(f.gradient_points(full, mesh))
        lo_mag, hi_mag = mags.min(axis=0), mags.max(axis=0)
    ratios = np.where(hi_mag > 0, lo_mag / np.where(hi_mag > 0, hi_mag, 1.0), 1.0)
    return float(ratios.min())


# names used by the external interface
prop3_kappa_lower = smoothness_kappa_lower
prop4_kappa_lower = gradient_ratio_kappa_lower


# ---------------------------------------------------------------------------
# tau-approximate greedy


@dataclass(frozen=True)
class GreedyCheck:
    holds: bool
    greedy_value: float
    optimum_value: float
    bound: float
    kappa: float
    curvature: float


def tau_greedy(vals: np.ndarray, n: int, H: int, tau: Sequence[float]) -> int:
    """Adversarial tau-greedy: each step takes the worst element within tau_l of the best gain."""
    cur = 0
    single = 1 << np.arange(n)
    for l in range(H):
        cand = vals[cur | single]
        ok = np.flatnonzero(cand >= cand.max() - tau[l])
        pick = int(ok[np.argmin(cand[ok])])
        cur |= 1 << pick
    return cur


def greedy_bound_details(g, n: int, H: int, tau: Sequence[float]) -> GreedyCheck:
    if len(tau) != H:
        raise ValueError("need one tolerance per greedy step")
    if any(t < 0 for t in tau):
        raise ValueError("tolerances must be nonnegative")
    vals = tabulate(g, n)
    if abs(vals[0]) > 1e-12:
        raise ValueError("set function must vanish on the empty set")
    k = submodularity_ratio(vals, n)
    c = curvature(vals, n)
    sizes = bits_matrix(n).sum(axis=1)
    opt = float(vals[sizes <= H].max())
    got = float(vals[tau_greedy(vals, n, H, tau)])
    bound = alpha_factor(k, c) * opt - float(np.sum(tau))
    return GreedyCheck(got >= bound - 1e-9, got, opt, bound, k, c)


def greedy_bound_check(g, n: int, H: int, tau: Sequence[float], rng=None) -> bool:
    """Whether the tau-greedy set meets alpha * g(S*) - sum(tau).

    ``rng`` is accepted for interface symmetry; the adversarial greedy is deterministic.
    """
    return greedy_bound_details(g, n, H, tau).holds


# ---------------------------------------------------------------------------
# comparator variation


@dataclass(frozen=True)
class VariationStats:
    V_i: int
    V_S: int
    V_x: float


def variation_stats(discrete: Sequence, continuous) -> VariationStats:
    """1 + number of switches of the discrete path, and the path length of the continuous one."""
    xs = np.asarray(continuous, dtype=float)
    if len(discrete) != len(xs):
        raise ValueError("trajectories must have equal length")
    if len(xs) < 1:
        raise ValueError("trajectories must be nonempty")
    sets = [frozenset(s) if isinstance(s, (set, frozenset, tuple, list)) else frozenset([s])
            for s in discrete]
    switches = sum(a != b for a, b in zip(sets[:-1], sets[1:]))
    if xs.ndim == 1:
        xs = xs[:, None]
    vx = float(np.linalg.norm(np.diff(xs, axis=0), axis=1).sum())
    return VariationStats(1 + switches, 1 + switches, vx)


def trajectory_alpha(functions, x_stars) -> float:
    """alpha from the worst ratio and worst curvature over a trajectory of rewards."""
    kappa, c = 1.0, 0.0
    for f, x in zip(functions, x_stars):
        vals = induced_set_function(f, x)
        kappa = min(kappa, submodularity_ratio(vals, f.n))
        c = max(c, curvature(vals, f.n))
    return alpha_factor(kappa, c)
