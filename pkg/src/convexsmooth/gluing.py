"""Lipschitz-strata gluing: assemble a C1 convex uniform approximant.

Given a convex expression f on an open convex domain U and a target
accuracy eps, the chain is

    h_n = (combined envelope of f at (n, lambda_n)) - c_n
    g_1 = h_1,   g_n = smooth_max_{mu_n}(g_{n-1}, h_n)

with the schedule

    S_n      = sum_{j=0}^{n-1} eps / 2^j          (lower band shift)
    c_n      = S_n - eps / 2^n                    (centering shift, c_1 = eps/2)
    lambda_n = eps / (2^(n+2) * n^2)              (quadratic-envelope weight)
    mu_n     = eps / 10^n                         (smooth-max threshold)

lambda_n is chosen so that the quadratic envelope of the n-Lipschitz
linear envelope loses at most 4 * lambda_n * n^2 = eps / 2^n, exactly the
band width; hence f_n - S_n <= h_n <= f_n - c_n.

On the open set E_n of points around which f is n-Lipschitz the chain
stabilizes: g_m(x) = g_{n+1}(x) for every m > n, because the gap
g_n - h_{n+1} >= eps / 2^(n+1) (up to solver slack) always exceeds
mu_{n+1}, and the smooth max returns its larger argument bitwise when
the gap does.  Evaluation therefore certifies a stratum index n0 through
interval Lipschitz bounds on a small ball and returns g_{n0+1}(x), which
satisfies f(x) - 2*eps <= g(x) <= f(x).
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass, field

import numpy as np

from .domains import as_point, as_points
from .envelopes import InnerSolveConfig, combined_envelope_batch
from .errors import DomainError, StratumOverflowError
from .function_model import BallRegion, ConvexExpr
from .handles import FnHandle
from .smooth_max import SmoothMaxParams, smooth_max_scalar


@dataclass(frozen=True)
class GluingConfig:
    eps: float
    mollifier_order: int = 2
    max_stratum: int = 64
    solver: InnerSolveConfig = field(default_factory=InnerSolveConfig)
    stratum_radius_scale: float = 0.1  # r0 = scale * (1 + ||x||), capped below

    def __post_init__(self):
        if not (self.eps > 0 and math.isfinite(self.eps)):
            raise ValueError("eps must be positive and finite")
        if self.max_stratum < 1:
            raise ValueError("max_stratum must be >= 1")
        if self.mollifier_order < 2:
            raise ValueError("mollifier_order must be >= 2")


class BandConstants:
    """The eps-derived schedule; all accessors take the stratum level n >= 1."""

    def __init__(self, eps: float):
        self.eps = float(eps)

    def lower_shift(self, n: int) -> float:
        """S_n = sum_{j=0}^{n-1} eps/2^j = eps * (2 - 2^(1-n))."""
        return self.eps * (2.0 - math.ldexp(1.0, 1 - n))

    def center_shift(self, n: int) -> float:
        """c_n = S_n - eps/2^n; c_1 = eps/2."""
        return self.lower_shift(n) - self.band_width(n)

    def band_width(self, n: int) -> float:
        return math.ldexp(self.eps, -n)

    def moreau_lambda(self, n: int) -> float:
        # ldexp keeps this exact and underflow-graceful at extreme depth
        return math.ldexp(self.eps, -(n + 2)) / (n * n)

    def smooth_eps(self, n: int) -> float:
        return self.eps * 10.0 ** (-n)

    def validate(self, n_max: int = 64) -> None:
        """Re-derive the schedule inequalities instead of trusting them."""
        for n in range(1, n_max + 1):
            lam = self.moreau_lambda(n)
            if not 4.0 * lam * n * n <= self.band_width(n) * (1 + 1e-12):
                raise AssertionError(f"quadratic-envelope loss exceeds band at n={n}")
            if self.band_width(n) > 0 and not self.smooth_eps(n) < self.band_width(n):
                raise AssertionError(f"smooth-max threshold not below band at n={n}")


def _stratum_batch(f: ConvexExpr, X: np.ndarray, cfg: GluingConfig) -> np.ndarray:
    """Least certified n per row with f n-Lipschitz on B(x, r_x).

    Uses analytic interval bounds only; sampled estimates would silently
    break exact stabilization.  Returns n > max_stratum unchanged so the
    caller can decide how to fail.
    """
    X = as_points(X, f.dim)
    r0 = cfg.stratum_radius_scale * (1.0 + np.linalg.norm(X, axis=1))
    dist = f.domain.boundary_distance(X)
    r = np.minimum(r0, 0.5 * dist)
    if np.any(r <= 0):
        raise DomainError("stratum certification needs points strictly inside the domain")
    _, _, lip = f.root.bounds(BallRegion(X, r))
    n = np.ceil(lip).astype(float)
    n = np.maximum(n, 1.0)
    n = np.where(np.isfinite(lip), n, np.inf)
    return n


def stratum_index(f: ConvexExpr, x, cfg: GluingConfig) -> int:
    """Certified Lipschitz stratum of a single point (least such n)."""
    X = as_point(x, f.dim).reshape(1, -1)
    if not bool(f.domain.contains(X)[0]):
        raise DomainError("point outside the domain")
    n = float(_stratum_batch(f, X, cfg)[0])
    if not (n <= cfg.max_stratum):
        raise StratumOverflowError(
            f"point needs stratum {n if math.isfinite(n) else 'inf'} "
            f"> max_stratum = {cfg.max_stratum}",
            needed=int(n) if math.isfinite(n) else -1,
            max_stratum=cfg.max_stratum)
    return int(n)


def build_h(f: ConvexExpr, n: int, constants: BandConstants,
            cfg: InnerSolveConfig | None = None) -> FnHandle:
    """The level-n smoothed shifted envelope h_n as a handle.

    h_n is convex, n-Lipschitz and C1 with
    f_n - S_n <= h_n <= f_n - c_n (up to solver slack).
    """
    cfg = cfg or InnerSolveConfig()
    lam = constants.moreau_lambda(n)
    c_n = constants.center_shift(n)

    def _eval(X, _f=f, _n=n, _lam=lam, _c=c_n, _cfg=cfg):
        return combined_envelope_batch(_f, _n, _lam, X, _cfg) - _c

    return FnHandle(
        eval_batch=_eval,
        domain=f.domain,
        name=f"h[{n}]",
        convex=True,
        c1=True,
        lip_global=float(n),
        lip_on=lambda region, _n=n: float(_n),
    )


class GluedApprox:
    """Lazily evaluated gluing chain for one (f, config) pair.

    Nothing global is computed eagerly; handles h_n come into existence
    the first time an evaluation needs their level.  Chain extension is
    idempotent and lock-protected, so concurrent evaluations agree no
    matter how they interleave.
    """

    def __init__(self, f: ConvexExpr, config: GluingConfig):
        self.f = f
        self.config = config
        self.constants = BandConstants(config.eps)
        self.constants.validate(min(config.max_stratum, 64))
        self._h: list[FnHandle] = []          # h_1 .. h_N built so far
        self._strata_cache: dict[bytes, int] = {}
        self._lock = threading.Lock()

    # -- chain bookkeeping -------------------------------------------------
    @property
    def built_levels(self) -> int:
        return len(self._h)

    def h_handle(self, n: int) -> FnHandle:
        self._ensure_levels(n)
        return self._h[n - 1]

    def _ensure_levels(self, n: int):
        if len(self._h) >= n:
            return
        with self._lock:
            while len(self._h) < n:
                self._h.append(build_h(self.f, len(self._h) + 1,
                                       self.constants, self.config.solver))

    def level_handle(self, n: int) -> FnHandle:
        """g_n as a handle (evaluates the full chain up to level n)."""
        self._ensure_levels(n)

        def _eval(X, _n=n):
            pts = as_points(X, self.f.dim)
            return self._chain_values(pts, np.full(pts.shape[0], _n))

        return FnHandle(eval_batch=_eval, domain=self.f.domain,
                        name=f"g[{n}]", convex=True, c1=True)

    # -- strata ------------------------------------------------------------
    def strata(self, X) -> np.ndarray:
        X = as_points(X, self.f.dim)
        if not np.all(self.f.domain.contains(X)):
            raise DomainError("evaluation points must lie inside the domain")
        out = np.empty(X.shape[0])
        missing = []
        for i in range(X.shape[0]):
            key = X[i].tobytes()
            cached = self._strata_cache.get(key)
            if cached is None:
                missing.append(i)
            else:
                out[i] = cached
        if missing:
            sub = _stratum_batch(self.f, X[missing], self.config)
            with self._lock:
                for j, i in enumerate(missing):
                    out[i] = sub[j]
                    if math.isfinite(sub[j]):
                        self._strata_cache[X[i].tobytes()] = int(sub[j])
        bad = ~(out <= self.config.max_stratum)
        if np.any(bad):
            worst = float(np.max(out[bad]))
            raise StratumOverflowError(
                f"{int(bad.sum())} point(s) need stratum up to "
                f"{worst if math.isfinite(worst) else 'inf'} "
                f"> max_stratum = {self.config.max_stratum}",
                needed=int(worst) if math.isfinite(worst) else -1,
                max_stratum=self.config.max_stratum)
        return out.astype(int)

    # -- evaluation --------------------------------------------------------
    def _chain_values(self, X: np.ndarray, levels: np.ndarray) -> np.ndarray:
        """g_{levels[i]}(X[i]) for all i, sharing each h_n solve per level."""
        max_level = int(np.max(levels))
        self._ensure_levels(max_level)
        g = self._h[0].value(X)
        for n in range(2, max_level + 1):
            needs = levels >= n
            if not np.any(needs):
                break
            hn = self._h[n - 1].value(X[needs])
            mu = self.constants.smooth_eps(n)
            if mu > 0.0:
                merged = smooth_max_scalar(
                    SmoothMaxParams(mu, self.config.mollifier_order), g[needs], hn)
            else:
                # threshold underflowed to zero: smooth max degenerates to max
                merged = np.maximum(g[needs], hn)
            g[needs] = merged
        return g

    def eval_batch(self, X) -> np.ndarray:
        """g at many points: certify strata, evaluate each point at its
        stabilized level n0 + 1."""
        X = as_points(X, self.f.dim)
        n0 = self.strata(X)
        return self._chain_values(X, n0 + 1)

    def eval_levels(self, X, extra: int = 1):
        """(strata, values at n0+1, ..., values at n0+extra) for tests."""
        X = as_points(X, self.f.dim)
        n0 = self.strata(X)
        outs = [self._chain_values(X, n0 + k) for k in range(1, extra + 1)]
        return (n0, *outs)

    def as_handle(self) -> FnHandle:
        return FnHandle(eval_batch=self.eval_batch, domain=self.f.domain,
                        name="glued", convex=True, c1=True)


def glue(f: ConvexExpr, cfg: GluingConfig) -> GluedApprox:
    """Set up the lazily evaluated gluing chain (no eager computation)."""
    if not isinstance(f, ConvexExpr):
        raise TypeError("glue needs a certified ConvexExpr")
    return GluedApprox(f, cfg)


def glue_eval(G: GluedApprox, x) -> float:
    """Evaluate the glued approximant at one domain point.

    Certifies the stratum n0 of x, builds the chain to n0 + 1 and returns
    g_{n0+1}(x); by stabilization this equals g_m(x) for all m > n0 and
    satisfies f(x) - 2*eps <= g(x) <= f(x) up to solver slack.
    """
    X = as_point(x, G.f.dim).reshape(1, -1)
    return float(G.eval_batch(X)[0])
