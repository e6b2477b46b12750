"""Continuous action sets: axis-aligned boxes and origin-centred Euclidean balls.

Both kinds admit exact closed-form Euclidean projection, including onto the
shrunk set ``(1 - xi) X`` used by the bandit-feedback gradient method.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class ConvexDomain:
    """A box ``prod_i [lo_i, hi_i]`` or a ball ``{x : |x| <= radius}``.

    Use :func:`box` / :func:`ball` rather than constructing directly.
    ``inner_radius`` is the largest ``r`` with ``r B`` inside the set and
    ``outer_radius`` the smallest ``D`` with the set inside ``D B``.
    A box whose interior misses the origin gets ``inner_radius == 0``; such
    domains are fine for oracles and grids but rejected by the learners.
    """

    kind: str
    dim: int
    lo: np.ndarray | None = None
    hi: np.ndarray | None = None
    radius: float | None = None
    inner_radius: float = field(init=False)
    outer_radius: float = field(init=False)

    def __post_init__(self):
        if self.kind == "box":
            lo = np.asarray(self.lo, dtype=float).ravel()
            hi = np.asarray(self.hi, dtype=float).ravel()
            if lo.shape != hi.shape or lo.size != self.dim or self.dim < 1:
                raise ValueError("box bounds must be two vectors of length dim >= 1")
            if not np.all(lo < hi):
                raise ValueError("box requires lo_i < hi_i in every coordinate")
            lo.setflags(write=False)
            hi.setflags(write=False)
            object.__setattr__(self, "lo", lo)
            object.__setattr__(self, "hi", hi)
            r = float(np.min(np.minimum(-lo, hi)))
            object.__setattr__(self, "inner_radius", max(r, 0.0))
            far = np.maximum(np.abs(lo), np.abs(hi))
            object.__setattr__(self, "outer_radius", float(np.linalg.norm(far)))
        elif self.kind == "ball":
            if self.radius is None or not self.radius > 0 or self.dim < 1:
                raise ValueError("ball requires radius > 0 and dim >= 1")
            object.__setattr__(self, "radius", float(self.radius))
            object.__setattr__(self, "inner_radius", float(self.radius))
            object.__setattr__(self, "outer_radius", float(self.radius))
        else:
            raise ValueError(f"unknown domain kind {self.kind!r}")

    def _check(self, point) -> np.ndarray:
        p = np.asarray(point, dtype=float)
        if p.shape != (self.dim,):
            raise ValueError(f"expected a point of shape ({self.dim},), got {p.shape}")
        return p

    def project(self, point, shrink: float = 0.0) -> np.ndarray:
        """Euclidean projection of ``point`` onto ``(1 - shrink) X``."""
        if not 0.0 <= shrink < 1.0:
            raise ValueError(f"shrink must lie in [0, 1), got {shrink}")
        p = self._check(point)
        s = 1.0 - shrink
        if self.kind == "box":
            return np.minimum(np.maximum(p, s * self.lo), s * self.hi)
        r = s * self.radius
        norm = math.sqrt(p @ p)
        if norm <= r:
            return p.copy()
        return p * (r / norm)

    def contains(self, point, tol: float = 0.0) -> bool:
        p = self._check(point)
        if self.kind == "box":
            return bool((p >= self.lo - tol).all() and (p <= self.hi + tol).all())
        return bool(math.sqrt(p @ p) <= self.radius + tol)

    def contains_rows(self, points, tol: float = 0.0) -> bool:
        """Whether every row of an (m, dim) array lies in the set."""
        P = np.asarray(points, dtype=float)
        if self.kind == "box":
            return bool(((P >= self.lo - tol) & (P <= self.hi + tol)).all())
        return bool(((P * P).sum(axis=-1) <= (self.radius + tol) ** 2).all())

    def grid_axes(self, resolution: float) -> list[np.ndarray]:
        """Per-coordinate grids with spacing at most ``resolution`` (box only)."""
        if self.kind != "box":
            raise ValueError("grids are defined for boxes only")
        axes = []
        for lo, hi in zip(self.lo, self.hi):
            m = int(np.ceil((hi - lo) / resolution - 1e-9)) + 1
            axes.append(np.linspace(lo, hi, m))
        return axes

    def sample(self, rng: np.random.Generator, size: int | None = None) -> np.ndarray:
        """Uniform draw(s) from the domain."""
        shape = (self.dim,) if size is None else (size, self.dim)
        if self.kind == "box":
            return rng.uniform(self.lo, self.hi, size=shape)
        m = 1 if size is None else size
        u = sample_unit_sphere(self.dim, rng, size=m)
        rad = self.radius * rng.uniform(size=m) ** (1.0 / self.dim)
        out = u * rad[:, None]
        return out[0] if size is None else out

    def to_config(self) -> dict:
        if self.kind == "box":
            return {"kind": "box", "lo": self.lo.tolist(), "hi": self.hi.tolist()}
        return {"kind": "ball", "radius": self.radius, "dim": self.dim}

    def __eq__(self, other):
        if not isinstance(other, ConvexDomain):
            return NotImplemented
        return self.to_config() == other.to_config()

    def __hash__(self):
        return hash(repr(self.to_config()))


def box(lo, hi) -> ConvexDomain:
    lo = np.atleast_1d(np.asarray(lo, dtype=float))
    hi = np.atleast_1d(np.asarray(hi, dtype=float))
    return ConvexDomain("box", lo.size, lo=lo, hi=hi)


def ball(radius: float, dim: int) -> ConvexDomain:
    return ConvexDomain("ball", int(dim), radius=radius)


def cube(lo: float, hi: float, dim: int) -> ConvexDomain:
    return box(np.full(dim, float(lo)), np.full(dim, float(hi)))


def domain_from_config(cfg: dict) -> ConvexDomain:
    kind = cfg.get("kind")
    if kind == "box":
        return box(cfg["lo"], cfg["hi"])
    if kind == "ball":
        return ball(cfg["radius"], cfg["dim"])
    raise ValueError(f"unknown domain kind {kind!r}")


def project(domain: ConvexDomain, shrink: float, point) -> np.ndarray:
    return domain.project(point, shrink)


def contains(domain: ConvexDomain, point, tol: float = 0.0) -> bool:
    return domain.contains(point, tol)


def sample_unit_sphere(d: int, rng: np.random.Generator, size: int | None = None) -> np.ndarray:
    """Uniform direction(s) on the unit sphere in R^d via normalised Gaussians."""
    if d < 1:
        raise ValueError("sphere dimension must be >= 1")
    if size is None:
        g = rng.standard_normal(d)
        norm = math.sqrt(g @ g)
        # a zero Gaussian draw has probability zero; redraw defensively
        while norm == 0.0:
            g = rng.standard_normal(d)
            norm = math.sqrt(g @ g)
        return g / norm
    g = rng.standard_normal((size, d))
    norms = np.linalg.norm(g, axis=1)
    while np.any(norms == 0.0):
        bad = norms == 0.0
        g[bad] = rng.standard_normal((int(bad.sum()), d))
        norms = np.linalg.norm(g, axis=1)
    return g / norms[:, None]
