"""Lightweight callable wrappers carrying convexity/Lipschitz metadata.

Combinators (smooth max, envelopes, gluing) accept and return these so
that certificates survive composition without re-deriving anything.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .domains import Domain, as_points
from .function_model import ConvexExpr, analytic_lipschitz


@dataclass(frozen=True)
class FnHandle:
    """A function R^d -> R with metadata.

    eval_batch maps an (m, d) array to an (m,) array.  lip_on, when
    present, returns a certified Lipschitz upper bound for a region
    (Domain, (center, radius) pair, or Region object); lip_global is a
    certified global constant on the domain, or None.
    """

    eval_batch: Callable[[np.ndarray], np.ndarray]
    domain: Domain
    name: str = "fn"
    convex: bool = True
    c1: bool = False
    lip_global: float | None = None
    lip_on: Callable | None = None
    nonneg: bool = False

    def value(self, X) -> np.ndarray:
        return self.eval_batch(as_points(X, self.domain.dim))

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        if x.ndim <= 1:
            return float(self.value(x.reshape(1, -1))[0])
        return self.value(x)


def as_handle(f, name: str | None = None) -> FnHandle:
    """Wrap a ConvexExpr (or pass through an FnHandle)."""
    if isinstance(f, FnHandle):
        return f
    if isinstance(f, ConvexExpr):
        lip = None
        try:
            cand = analytic_lipschitz(f, f.domain)
            if np.isfinite(cand):
                lip = float(cand)
        except Exception:
            lip = None
        return FnHandle(
            eval_batch=f.value,
            domain=f.domain,
            name=name or (f.text or "expr"),
            convex=True,
            c1=f.smooth_c1,
            lip_global=lip,
            lip_on=lambda region, _f=f: analytic_lipschitz(_f, region),
            nonneg=f.nonneg,
        )
    raise TypeError(f"cannot wrap {type(f).__name__} as a function handle")
