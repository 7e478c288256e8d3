"""Open convex subsets of R^d with exact membership and boundary distance.

Four kinds are supported: the whole space, open Euclidean balls, open
axis-aligned boxes, and finite intersections of open halfspaces
{x : <a, x> < b}.  All sets are open, convex and nonempty by construction;
degenerate descriptions are rejected when the object is built.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainCompatibilityError


def as_point(x, dim: int | None = None) -> np.ndarray:
    """Coerce to a finite 1-D float array, optionally checking dimension."""
    p = np.asarray(x, dtype=float)
    if p.ndim == 0:
        p = p.reshape(1)
    if p.ndim != 1:
        raise ValueError(f"expected a point, got array of shape {p.shape}")
    if not np.all(np.isfinite(p)):
        raise ValueError("point has non-finite coordinates")
    if dim is not None and p.size != dim:
        raise DomainCompatibilityError(f"point has dimension {p.size}, expected {dim}")
    return p


def as_points(X, dim: int) -> np.ndarray:
    """Coerce to a (m, dim) float array; a single point becomes one row."""
    A = np.asarray(X, dtype=float)
    if A.ndim == 1:
        A = A.reshape(1, -1)
    if A.ndim != 2 or A.shape[1] != dim:
        raise DomainCompatibilityError(f"expected points of dimension {dim}, got shape {A.shape}")
    return A


@dataclass(frozen=True)
class Domain:
    """Base class; use the concrete subclasses or :func:`domain_from_json`."""

    dim: int

    kind = "abstract"

    def contains(self, X) -> np.ndarray:
        """Strict membership mask for a batch of points (openness matters)."""
        raise NotImplementedError

    def contains_point(self, x) -> bool:
        return bool(self.contains(as_points(x, self.dim))[0])

    def boundary_distance(self, X) -> np.ndarray:
        """Exact distance to the topological boundary; +inf for whole space."""
        raise NotImplementedError

    def bounding_box(self) -> tuple[np.ndarray, np.ndarray]:
        """(lo, hi) enclosing box, entries may be +-inf."""
        raise NotImplementedError

    def shrink_to_interior(self, X, rel: float = 1e-12) -> np.ndarray:
        """Pull points that escaped the open set back strictly inside.

        Used by inner solvers whose search boxes overrun the boundary; the
        pull-in margin is a machine-scale fraction of the set's extent.
        """
        raise NotImplementedError

    def to_json(self) -> str:
        raise NotImplementedError


@dataclass(frozen=True)
class WholeSpace(Domain):
    kind = "whole"

    def __post_init__(self):
        if self.dim < 1:
            raise DomainCompatibilityError("dimension must be >= 1")

    def contains(self, X):
        X = as_points(X, self.dim)
        return np.ones(X.shape[0], dtype=bool)

    def boundary_distance(self, X):
        X = as_points(X, self.dim)
        return np.full(X.shape[0], np.inf)

    def bounding_box(self):
        return (np.full(self.dim, -np.inf), np.full(self.dim, np.inf))

    def shrink_to_interior(self, X, rel: float = 1e-12):
        return as_points(X, self.dim)

    def to_json(self):
        return json.dumps({"kind": "whole", "dim": self.dim})


@dataclass(frozen=True)
class OpenBall(Domain):
    center: np.ndarray = field(default=None)
    radius: float = 0.0

    kind = "ball"

    def __post_init__(self):
        object.__setattr__(self, "center", as_point(self.center, self.dim))
        if not (self.radius > 0 and math.isfinite(self.radius)):
            raise DomainCompatibilityError("ball radius must be positive and finite")

    def contains(self, X):
        X = as_points(X, self.dim)
        return np.linalg.norm(X - self.center, axis=1) < self.radius

    def boundary_distance(self, X):
        X = as_points(X, self.dim)
        return self.radius - np.linalg.norm(X - self.center, axis=1)

    def bounding_box(self):
        return (self.center - self.radius, self.center + self.radius)

    def shrink_to_interior(self, X, rel: float = 1e-12):
        X = as_points(X, self.dim).copy()
        r = np.linalg.norm(X - self.center, axis=1)
        rmax = self.radius * (1.0 - rel)
        bad = r >= rmax
        if np.any(bad):
            scale = rmax / r[bad]
            X[bad] = self.center + (X[bad] - self.center) * scale[:, None]
        return X

    def to_json(self):
        return json.dumps({"kind": "ball", "center": self.center.tolist(), "radius": self.radius})


@dataclass(frozen=True)
class OpenBox(Domain):
    lo: np.ndarray = field(default=None)
    hi: np.ndarray = field(default=None)

    kind = "box"

    def __post_init__(self):
        object.__setattr__(self, "lo", as_point(self.lo, self.dim))
        object.__setattr__(self, "hi", as_point(self.hi, self.dim))
        if not np.all(self.lo < self.hi):
            raise DomainCompatibilityError("box requires lo < hi componentwise")

    def contains(self, X):
        X = as_points(X, self.dim)
        return np.all((X > self.lo) & (X < self.hi), axis=1)

    def boundary_distance(self, X):
        X = as_points(X, self.dim)
        return np.minimum((X - self.lo).min(axis=1), (self.hi - X).min(axis=1))

    def bounding_box(self):
        return (self.lo.copy(), self.hi.copy())

    def shrink_to_interior(self, X, rel: float = 1e-12):
        X = as_points(X, self.dim)
        pad = rel * (self.hi - self.lo)
        return np.clip(X, self.lo + pad, self.hi - pad)

    def to_json(self):
        return json.dumps({"kind": "box", "lo": self.lo.tolist(), "hi": self.hi.tolist()})


@dataclass(frozen=True)
class HalfspaceIntersection(Domain):
    """Intersection of open halfspaces <a_i, x> < b_i with nonempty interior."""

    normals: np.ndarray = field(default=None)
    offsets: np.ndarray = field(default=None)

    kind = "halfspaces"

    def __post_init__(self):
        A = np.asarray(self.normals, dtype=float)
        b = np.asarray(self.offsets, dtype=float)
        if A.ndim != 2 or A.shape[1] != self.dim or b.shape != (A.shape[0],):
            raise DomainCompatibilityError("halfspaces need (k, dim) normals and (k,) offsets")
        norms = np.linalg.norm(A, axis=1)
        if np.any(norms == 0):
            raise DomainCompatibilityError("halfspace normals must be nonzero")
        object.__setattr__(self, "normals", A)
        object.__setattr__(self, "offsets", b)
        object.__setattr__(self, "_row_norms", norms)
        # Chebyshev-center LP certifies a nonempty interior at construction.
        if self._chebyshev_radius() <= 0:
            raise DomainCompatibilityError("halfspace intersection has empty interior")

    def _chebyshev_radius(self) -> float:
        from scipy.optimize import linprog

        k = self.normals.shape[0]
        # maximize t  s.t.  A x + t*||a_i|| <= b   (t unbounded above is fine: cap it)
        c = np.zeros(self.dim + 1)
        c[-1] = -1.0
        A_ub = np.hstack([self.normals, self._row_norms.reshape(k, 1)])
        res = linprog(c, A_ub=A_ub, b_ub=self.offsets,
                      bounds=[(None, None)] * self.dim + [(None, 1.0)], method="highs")
        if not res.success:
            return -math.inf
        return -res.fun

    def contains(self, X):
        X = as_points(X, self.dim)
        return np.all(X @ self.normals.T < self.offsets, axis=1)

    def boundary_distance(self, X):
        X = as_points(X, self.dim)
        slack = (self.offsets - X @ self.normals.T) / self._row_norms
        return slack.min(axis=1)

    def bounding_box(self):
        cached = getattr(self, "_bbox_cache", None)
        if cached is not None:
            return cached[0].copy(), cached[1].copy()
        from scipy.optimize import linprog

        lo = np.full(self.dim, -np.inf)
        hi = np.full(self.dim, np.inf)
        for i in range(self.dim):
            c = np.zeros(self.dim)
            for sign, out in ((1.0, lo), (-1.0, hi)):
                c[i] = sign
                res = linprog(c, A_ub=self.normals, b_ub=self.offsets,
                              bounds=[(None, None)] * self.dim, method="highs")
                if res.success:
                    out[i] = sign * res.fun if sign > 0 else -res.fun
            c[i] = 0.0
        object.__setattr__(self, "_bbox_cache", (lo, hi))
        return lo.copy(), hi.copy()

    def shrink_to_interior(self, X, rel: float = 1e-12):
        # No cheap exact projection for general polyhedra; callers mask
        # infeasible candidates instead (contains() is exact).
        return as_points(X, self.dim)

    def to_json(self):
        return json.dumps({
            "kind": "halfspaces",
            "dim": self.dim,
            "normals": self.normals.tolist(),
            "offsets": self.offsets.tolist(),
        })


def domain_from_json(text_or_obj) -> Domain:
    """Build a Domain from its JSON description.

    Accepted forms::

        {"kind": "whole", "dim": d}
        {"kind": "ball", "center": [...], "radius": r}
        {"kind": "box", "lo": [...], "hi": [...]}
        {"kind": "halfspaces", "dim": d, "normals": [[...], ...], "offsets": [...]}
    """
    obj = json.loads(text_or_obj) if isinstance(text_or_obj, str) else text_or_obj
    if not isinstance(obj, dict) or "kind" not in obj:
        raise DomainCompatibilityError("domain JSON must be an object with a 'kind' key")
    kind = obj["kind"]
    try:
        if kind == "whole":
            return WholeSpace(dim=int(obj["dim"]))
        if kind == "ball":
            center = as_point(obj["center"])
            return OpenBall(dim=center.size, center=center, radius=float(obj["radius"]))
        if kind == "box":
            lo = as_point(obj["lo"])
            return OpenBox(dim=lo.size, lo=lo, hi=as_point(obj["hi"]))
        if kind == "halfspaces":
            return HalfspaceIntersection(dim=int(obj["dim"]),
                                         normals=obj["normals"], offsets=obj["offsets"])
    except KeyError as exc:
        raise DomainCompatibilityError(f"domain JSON missing key {exc}") from exc
    raise DomainCompatibilityError(f"unknown domain kind {kind!r}")
