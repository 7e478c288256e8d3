"""Mollified absolute value and the two-argument smooth maximum.

The combinator is M(x, y) = (x + y + theta(x - y)) / 2 where theta is a
smooth convex symmetric majorant of |.| that agrees with it exactly
outside [-eps, eps].  theta is built in closed form as the convolution
of |.| with the normalized polynomial mollifier

    rho(s) = c * (1 - (s/eps)^2)^k   on [-eps, eps],  k >= 2,

which makes theta a piecewise polynomial: affine outside [-eps, eps] and
an even polynomial of degree 2k + 2 inside.  Since theta'' = 2*rho >= 0
the result is convex, theta' = 2*F - 1 for the mollifier CDF F gives
Lipschitz constant exactly 1, and rho's zero of order k at +-eps makes
theta at least C^k (in fact C^(k+1)).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .domains import as_points
from .errors import DomainCompatibilityError
from .handles import FnHandle, as_handle


@dataclass(frozen=True)
class SmoothMaxParams:
    """eps is the agreement threshold; mollifier_order k >= 2 the smoothness."""

    eps: float
    mollifier_order: int = 2

    def __post_init__(self):
        if not (self.eps > 0 and math.isfinite(self.eps)):
            raise ValueError("eps must be positive and finite")
        if self.mollifier_order < 2:
            raise ValueError("mollifier_order must be >= 2")


def _theta_unit_coeffs(k: int) -> tuple[np.ndarray, np.ndarray]:
    """Exact coefficients of the unit-scale profile on [-1, 1].

    Returns (even_coeffs, odd_slope_coeffs) where the profile is
    t(u) = sum_j even[j] * u^(2j) and its derivative is
    t'(u) = u * sum_j odd[j] * u^(2j).  Built with rational arithmetic:

        rho(u) = c * (1 - u^2)^k,   c = (2k+1)! / (2^(2k+1) * (k!)^2)
        A(u)   = antiderivative of rho with A odd  (so 2F(u) - 1 = 2A(u))
        B(u)   = antiderivative of u*rho(u), even
        t(u)   = 2u*A(u) - 2B(u) + 2B(1)
    """
    c = Fraction(math.factorial(2 * k + 1), 2 ** (2 * k + 1) * math.factorial(k) ** 2)
    rho = {2 * j: c * math.comb(k, j) * (-1) ** j for j in range(k + 1)}
    A = {p + 1: q / (p + 1) for p, q in rho.items()}          # odd powers
    B = {p + 2: q / (p + 2) for p, q in rho.items()}          # even powers
    B1 = sum(B.values())
    theta = {0: 2 * B1}
    for p, q in A.items():
        theta[p + 1] = theta.get(p + 1, Fraction(0)) + 2 * q
    for p, q in B.items():
        theta[p] = theta.get(p, Fraction(0)) - 2 * q
    deg = max(theta)
    even = np.zeros(deg // 2 + 1)
    for p, q in theta.items():
        assert p % 2 == 0, "profile must be even"
        even[p // 2] = float(q)
    dmax = max(A)
    odd = np.zeros((dmax - 1) // 2 + 1)
    for p, q in A.items():
        odd[(p - 1) // 2] = float(2 * q)
    return even, odd


@dataclass(frozen=True)
class Theta:
    """Piecewise-polynomial mollified absolute value.

    theta(t) = |t| exactly for |t| >= eps, theta(t) > |t| inside, theta
    convex and symmetric with Lipschitz constant 1 and theta > 0
    everywhere.
    """

    eps: float
    mollifier_order: int
    even_coeffs: np.ndarray = field(repr=False)
    deriv_coeffs: np.ndarray = field(repr=False)

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        scalar = t.ndim == 0
        t = np.atleast_1d(t)
        out = np.abs(t)
        inside = out < self.eps
        if np.any(inside):
            u2 = (t[inside] / self.eps) ** 2
            out[inside] = self.eps * _polyval_even(self.even_coeffs, u2)
        return float(out[0]) if scalar else out

    def derivative(self, t):
        t = np.asarray(t, dtype=float)
        scalar = t.ndim == 0
        t = np.atleast_1d(t)
        out = np.sign(t)
        inside = np.abs(t) < self.eps
        if np.any(inside):
            u = t[inside] / self.eps
            out[inside] = u * _polyval_even(self.deriv_coeffs, u * u)
        return float(out[0]) if scalar else out

    @property
    def value_at_zero(self) -> float:
        return self.eps * float(self.even_coeffs[0])


def _polyval_even(coeffs: np.ndarray, u2: np.ndarray) -> np.ndarray:
    out = np.full_like(u2, coeffs[-1])
    for c in coeffs[-2::-1]:
        out = out * u2 + c
    return out


_THETA_CACHE: dict[tuple[float, int], Theta] = {}


def make_theta(params: SmoothMaxParams) -> Theta:
    """Build (and cache) the mollified absolute value for these parameters."""
    key = (params.eps, params.mollifier_order)
    th = _THETA_CACHE.get(key)
    if th is None:
        even, odd = _theta_unit_coeffs(params.mollifier_order)
        th = Theta(params.eps, params.mollifier_order, even, odd)
        assert th.value_at_zero > 0.0, "mollified |.| must be strictly positive at 0"
        _THETA_CACHE[key] = th
    return th


def smooth_max_scalar(params: SmoothMaxParams, x, y):
    """The smooth maximum of two reals (vectorizes over arrays).

    Returns max(x, y) exactly (bitwise) when |x - y| >= eps; otherwise
    (x + y + theta(x - y)) / 2, clamped from below by max(x, y) so the
    lower band inequality survives floating-point rounding (the clamp
    is the pointwise max of two convex functions, hence still convex,
    and can only bind within one ulp of the band edge).
    """
    th = make_theta(params)
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    scalar = x.ndim == 0 and y.ndim == 0
    x, y = np.atleast_1d(x), np.atleast_1d(y)
    x, y = np.broadcast_arrays(x, y)
    d = x - y
    hard = np.abs(d) >= params.eps
    out = np.maximum(x, y)
    soft = ~hard
    if np.any(soft):
        blend = 0.5 * (x[soft] + y[soft] + th(d[soft]))
        out[soft] = np.maximum(out[soft], blend)
    return float(out[0]) if scalar else out


def smooth_max_fn(params: SmoothMaxParams, f, g) -> FnHandle:
    """Pointwise smooth maximum of two convex functions on a common domain.

    The returned handle carries the convexity certificate, per-ball
    Lipschitz metadata (the max of the inputs' bounds, which the
    combinator preserves), and C1 metadata (true when both inputs are C1).
    """
    fh, gh = as_handle(f), as_handle(g)
    if fh.domain != gh.domain:
        raise DomainCompatibilityError("smooth max requires a common domain")

    def _eval(X, _f=fh, _g=gh, _p=params):
        return smooth_max_scalar(_p, _f.eval_batch(X), _g.eval_batch(X))

    lip_on = None
    if fh.lip_on is not None and gh.lip_on is not None:
        def lip_on(region, _f=fh, _g=gh):
            return max(_f.lip_on(region), _g.lip_on(region))

    lip_global = None
    if fh.lip_global is not None and gh.lip_global is not None:
        lip_global = max(fh.lip_global, gh.lip_global)

    return FnHandle(
        eval_batch=_eval,
        domain=fh.domain,
        name=f"smoothmax({fh.name},{gh.name})",
        convex=fh.convex and gh.convex,
        c1=fh.c1 and gh.c1,
        lip_global=lip_global,
        lip_on=lip_on,
        nonneg=fh.nonneg and gh.nonneg,
    )
