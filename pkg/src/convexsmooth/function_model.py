"""Convexity-certified expression trees over R^d.

An expression is accepted only if every node passes a structural
composition rule (nonnegative combinations, pointwise max, and
convex-nondecreasing outer functions applied to convex inner ones), so
any value returned by :func:`parse_expr` is convex on its domain by
construction.  Each node also carries a subgradient rule and interval
rules that propagate value bounds and subgradient-norm bounds over balls
and boxes; the latter provide certified Lipschitz upper bounds.

Grammar (whitespace insignificant, NUM is decimal with optional exponent)::

    expr := term { "+" term }
    term := [ NONNEG "*" ] atom
    atom := "affine(" vec ";" NUM ")" | "abs(" vec ";" NUM ")"
          | "norm()" | "sqnorm()"
          | "max(" expr "," expr ")" | "pow(" expr "," NUM ")"
          | "exp(" expr ")" | "softplus(" vec ";" NUM ")"
          | "recip1m(" expr ")"
    vec  := NUM { "," NUM }
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field

import numpy as np
from scipy.special import expit

from .domains import Domain, OpenBall, OpenBox, WholeSpace, as_point, as_points
from .errors import (
    ConvexityRuleError,
    DomainCompatibilityError,
    DomainError,
    UnboundedLipschitzError,
)
from .sampling import halton_points


# ---------------------------------------------------------------------------
# Regions used by interval propagation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BallRegion:
    """Batch of Euclidean balls: centers (m, d), radii (m,)."""

    centers: np.ndarray
    radii: np.ndarray

    @classmethod
    def single(cls, center, radius: float) -> "BallRegion":
        c = as_point(center)
        return cls(c.reshape(1, -1), np.asarray([float(radius)]))


@dataclass(frozen=True)
class BoxRegion:
    """Batch of axis boxes: lo/hi (m, d); entries may be +-inf."""

    lo: np.ndarray
    hi: np.ndarray

    @classmethod
    def single(cls, lo, hi) -> "BoxRegion":
        lo = np.asarray(lo, dtype=float).reshape(1, -1)
        hi = np.asarray(hi, dtype=float).reshape(1, -1)
        return cls(lo, hi)


def region_of_domain(domain: Domain):
    """Exact region for ball/box domains, enclosing box otherwise."""
    if isinstance(domain, OpenBall):
        return BallRegion.single(domain.center, domain.radius)
    lo, hi = domain.bounding_box()
    return BoxRegion.single(lo, hi)


def _interval_dot(a: np.ndarray, lo: np.ndarray, hi: np.ndarray):
    """Tight interval for <a, x> over boxes, safe with infinite endpoints."""
    pos = a > 0
    neg = a < 0
    # a_i == 0 contributes exactly 0 even against infinite box endpoints
    low = lo @ np.where(pos, a, 0.0) + hi @ np.where(neg, a, 0.0)
    high = hi @ np.where(pos, a, 0.0) + lo @ np.where(neg, a, 0.0)
    return low, high


def _interval_abs(lo, hi):
    low = np.where((lo <= 0) & (hi >= 0), 0.0, np.minimum(np.abs(lo), np.abs(hi)))
    return low, np.maximum(np.abs(lo), np.abs(hi))


def _norm_interval(region):
    """Interval for ||x|| over the region."""
    if isinstance(region, BallRegion):
        c = np.linalg.norm(region.centers, axis=1)
        return np.maximum(0.0, c - region.radii), c + region.radii
    lo, hi = region.lo, region.hi
    far = np.maximum(np.abs(lo), np.abs(hi))
    near = np.where((lo <= 0) & (hi >= 0), 0.0, np.minimum(np.abs(lo), np.abs(hi)))
    return np.linalg.norm(near, axis=1), np.linalg.norm(far, axis=1)


# ---------------------------------------------------------------------------
# Atom nodes
# ---------------------------------------------------------------------------

class Node:
    """Base expression node.  All arrays are (m, d) points -> (m,) values."""

    children: tuple = ()

    def value(self, X: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def subgrad(self, X: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def bounds(self, region):
        """Return (value_lo, value_hi, subgrad_norm_hi) arrays over region."""
        raise NotImplementedError

    # structural certificates -------------------------------------------------
    @property
    def nonneg(self) -> bool:
        return False

    @property
    def smooth_c1(self) -> bool:
        return False

    @property
    def kinks_only_at_zero(self) -> bool:
        """True if every non-differentiability point is a zero of the node."""
        return self.smooth_c1

    def minorant_lines(self, X: np.ndarray) -> list[tuple[np.ndarray, np.ndarray]]:
        """Global lower bounds f(y) >= c_i + s_i * ||y - x_i||, per point i.

        Each entry is a pair of (m,) arrays (intercepts, slopes); slopes are
        nonpositive.  An empty list means no structural bound is available.
        """
        m = X.shape[0]
        if self.nonneg:
            return [(np.zeros(m), np.zeros(m))]
        return []

    def certify(self, domain: Domain) -> None:
        """Raise if any node's certificate fails on this domain."""
        for ch in self.children:
            ch.certify(domain)

    def label(self) -> str:
        return type(self).__name__.lower()


class Affine(Node):
    """<a, x> + b."""

    def __init__(self, a, b: float):
        self.a = as_point(a)
        self.b = float(b)
        self.anorm = float(np.linalg.norm(self.a))

    def value(self, X):
        return X @ self.a + self.b

    def subgrad(self, X):
        return np.broadcast_to(self.a, X.shape).copy()

    def bounds(self, region):
        if isinstance(region, BallRegion):
            mid = region.centers @ self.a + self.b
            rad = self.anorm * region.radii
            lo, hi = mid - rad, mid + rad
        else:
            lo, hi = _interval_dot(self.a, region.lo, region.hi)
            lo, hi = lo + self.b, hi + self.b
        m = np.shape(lo)
        return lo, hi, np.full(m, self.anorm)

    @property
    def nonneg(self):
        return self.anorm == 0.0 and self.b >= 0.0

    @property
    def smooth_c1(self):
        return True

    def minorant_lines(self, X):
        return [(self.value(X), np.full(X.shape[0], -self.anorm))]

    def label(self):
        return "affine"


class AbsLinear(Node):
    """|<a, x> + b|."""

    def __init__(self, a, b: float):
        self.inner = Affine(a, b)

    def value(self, X):
        return np.abs(self.inner.value(X))

    def subgrad(self, X):
        # sign 0 -> +1: first-branch tie-break of max(z, -z)
        s = np.where(self.inner.value(X) >= 0.0, 1.0, -1.0)
        return s[:, None] * self.inner.a

    def bounds(self, region):
        zlo, zhi, _ = self.inner.bounds(region)
        lo, hi = _interval_abs(zlo, zhi)
        return lo, hi, np.full(np.shape(lo), self.inner.anorm)

    @property
    def nonneg(self):
        return True

    @property
    def kinks_only_at_zero(self):
        return True

    def label(self):
        return "abs"


class EuclideanNorm(Node):
    """||x||_2."""

    def value(self, X):
        return np.linalg.norm(X, axis=1)

    def subgrad(self, X):
        n = np.linalg.norm(X, axis=1)
        g = np.zeros_like(X)
        nz = n > 0
        g[nz] = X[nz] / n[nz, None]
        return g

    def bounds(self, region):
        lo, hi = _norm_interval(region)
        return lo, hi, np.ones(np.shape(lo))

    @property
    def nonneg(self):
        return True

    @property
    def kinks_only_at_zero(self):
        return True

    def label(self):
        return "norm"


class SquaredNorm(Node):
    """||x||_2^2."""

    def value(self, X):
        return np.einsum("ij,ij->i", X, X)

    def subgrad(self, X):
        return 2.0 * X

    def bounds(self, region):
        nlo, nhi = _norm_interval(region)
        return nlo * nlo, nhi * nhi, 2.0 * nhi

    @property
    def nonneg(self):
        return True

    @property
    def smooth_c1(self):
        return True

    def label(self):
        return "sqnorm"


class Max2(Node):
    """max(e1, e2); subgradient tie-break picks the first branch."""

    def __init__(self, e1: Node, e2: Node):
        self.children = (e1, e2)

    def value(self, X):
        a, b = self.children
        return np.maximum(a.value(X), b.value(X))

    def subgrad(self, X):
        a, b = self.children
        take_first = a.value(X) >= b.value(X)
        return np.where(take_first[:, None], a.subgrad(X), b.subgrad(X))

    def bounds(self, region):
        l1, h1, g1 = self.children[0].bounds(region)
        l2, h2, g2 = self.children[1].bounds(region)
        return np.maximum(l1, l2), np.maximum(h1, h2), np.maximum(g1, g2)

    @property
    def nonneg(self):
        return any(ch.nonneg for ch in self.children)

    def minorant_lines(self, X):
        lines = []
        for ch in self.children:
            lines.extend(ch.minorant_lines(X))
        return lines

    def label(self):
        return "max"


class Scale(Node):
    """c * e for c >= 0."""

    def __init__(self, c: float, e: Node):
        if not (c >= 0.0 and math.isfinite(c)):
            raise ConvexityRuleError("scale", f"scale factor must be >= 0, got {c}")
        self.c = float(c)
        self.children = (e,)

    def value(self, X):
        return self.c * self.children[0].value(X)

    def subgrad(self, X):
        return self.c * self.children[0].subgrad(X)

    def bounds(self, region):
        lo, hi, g = self.children[0].bounds(region)
        return self.c * lo, self.c * hi, self.c * g

    @property
    def nonneg(self):
        return self.children[0].nonneg

    @property
    def smooth_c1(self):
        return self.children[0].smooth_c1 or self.c == 0.0

    @property
    def kinks_only_at_zero(self):
        return self.children[0].kinks_only_at_zero

    def minorant_lines(self, X):
        return [(self.c * c, self.c * s) for c, s in self.children[0].minorant_lines(X)]

    def label(self):
        return "scale"


class Sum(Node):
    """e1 + ... + ek."""

    def __init__(self, *terms: Node):
        self.children = tuple(terms)

    def value(self, X):
        out = self.children[0].value(X)
        for ch in self.children[1:]:
            out = out + ch.value(X)
        return out

    def subgrad(self, X):
        out = self.children[0].subgrad(X)
        for ch in self.children[1:]:
            out = out + ch.subgrad(X)
        return out

    def bounds(self, region):
        lo, hi, g = self.children[0].bounds(region)
        for ch in self.children[1:]:
            l2, h2, g2 = ch.bounds(region)
            lo, hi, g = lo + l2, hi + h2, g + g2
        return lo, hi, g

    @property
    def nonneg(self):
        return all(ch.nonneg for ch in self.children)

    @property
    def smooth_c1(self):
        return all(ch.smooth_c1 for ch in self.children)

    @property
    def kinks_only_at_zero(self):
        # sound only when every kinked term is itself nonnegative: then the
        # sum is non-C1 at x only if some term has a kink with value 0 there
        return all(ch.smooth_c1 or (ch.kinks_only_at_zero and ch.nonneg)
                   for ch in self.children)

    def minorant_lines(self, X):
        lines = self.children[0].minorant_lines(X)
        for ch in self.children[1:]:
            other = ch.minorant_lines(X)
            if not other:
                lines = []
                break
            lines = [(c1 + c2, s1 + s2) for c1, s1 in lines for c2, s2 in other]
            lines = _prune_lines(lines)
        return lines

    def label(self):
        return "sum"


class Power(Node):
    """e^p for p >= 1 with e certified nonnegative."""

    def __init__(self, e: Node, p: float):
        if not (p >= 1.0 and math.isfinite(p)):
            raise ConvexityRuleError("pow", f"exponent p >= 1 required, got {p}")
        if not e.nonneg:
            raise ConvexityRuleError(
                "pow", "inner expression must be certified nonnegative")
        self.p = float(p)
        self.children = (e,)

    def value(self, X):
        return np.power(self.children[0].value(X), self.p)

    def subgrad(self, X):
        e = self.children[0]
        v = e.value(X)
        if self.p == 1.0:
            outer = np.ones_like(v)
        else:
            outer = self.p * np.power(v, self.p - 1.0)
        return outer[:, None] * e.subgrad(X)

    def bounds(self, region):
        lo, hi, g = self.children[0].bounds(region)
        lo = np.maximum(lo, 0.0)
        with np.errstate(over="ignore"):
            vlo, vhi = np.power(lo, self.p), np.power(hi, self.p)
            outer = self.p * np.power(hi, self.p - 1.0) if self.p > 1.0 else np.ones_like(hi)
        return vlo, vhi, outer * g

    @property
    def nonneg(self):
        return True

    @property
    def smooth_c1(self):
        inner = self.children[0]
        if self.p == 1.0:
            return inner.smooth_c1
        # outer derivative p*e^(p-1) vanishes where e = 0, so inner kinks
        # located at zeros of e are smoothed out
        return inner.smooth_c1 or inner.kinks_only_at_zero

    @property
    def kinks_only_at_zero(self):
        return self.smooth_c1

    def label(self):
        return "pow"


class Exp(Node):
    """exp(e) for convex e (convex nondecreasing outer)."""

    def __init__(self, e: Node):
        self.children = (e,)

    def value(self, X):
        with np.errstate(over="ignore"):
            return np.exp(self.children[0].value(X))

    def subgrad(self, X):
        e = self.children[0]
        with np.errstate(over="ignore"):
            return np.exp(e.value(X))[:, None] * e.subgrad(X)

    def bounds(self, region):
        lo, hi, g = self.children[0].bounds(region)
        with np.errstate(over="ignore"):
            return np.exp(lo), np.exp(hi), np.exp(hi) * g

    @property
    def nonneg(self):
        return True

    @property
    def smooth_c1(self):
        return self.children[0].smooth_c1

    @property
    def kinks_only_at_zero(self):
        return self.smooth_c1

    def label(self):
        return "exp"


class SoftplusLinear(Node):
    """log(1 + exp(<a, x> + b))."""

    def __init__(self, a, b: float):
        self.inner = Affine(a, b)

    def value(self, X):
        return np.logaddexp(0.0, self.inner.value(X))

    def subgrad(self, X):
        return expit(self.inner.value(X))[:, None] * self.inner.a

    def bounds(self, region):
        zlo, zhi, _ = self.inner.bounds(region)
        return (np.logaddexp(0.0, zlo), np.logaddexp(0.0, zhi),
                expit(zhi) * self.inner.anorm)

    @property
    def nonneg(self):
        return True

    @property
    def smooth_c1(self):
        return True

    def label(self):
        return "softplus"


class ReciprocalOneMinus(Node):
    """1 / (1 - e) for convex e certified < 1 on the domain."""

    def __init__(self, e: Node):
        self.children = (e,)

    def value(self, X):
        v = self.children[0].value(X)
        denom = 1.0 - v
        if np.any(denom <= 0.0):
            raise DomainError("recip1m evaluated where inner expression >= 1")
        return 1.0 / denom

    def subgrad(self, X):
        e = self.children[0]
        denom = 1.0 - e.value(X)
        return (1.0 / (denom * denom))[:, None] * e.subgrad(X)

    def bounds(self, region):
        lo, hi, g = self.children[0].bounds(region)
        vlo = 1.0 / (1.0 - lo)
        one_m_hi = 1.0 - hi
        with np.errstate(divide="ignore"):
            vhi = np.where(one_m_hi > 0.0, 1.0 / one_m_hi, np.inf)
            ghi = np.where(one_m_hi > 0.0, g / (one_m_hi * one_m_hi), np.inf)
        return vlo, vhi, ghi

    @property
    def nonneg(self):
        return True

    @property
    def smooth_c1(self):
        return self.children[0].smooth_c1

    @property
    def kinks_only_at_zero(self):
        return self.smooth_c1

    def certify(self, domain: Domain):
        super().certify(domain)
        lo, hi, _ = self.children[0].bounds(region_of_domain(domain))
        if float(hi[0]) > 1.0:
            raise DomainCompatibilityError(
                "recip1m requires inner expression < 1 on the domain "
                f"(certified upper bound {float(hi[0])!r} > 1)")
        if float(lo[0]) >= 1.0:
            raise DomainCompatibilityError(
                "recip1m inner expression is certified >= 1 on the domain")

    def label(self):
        return "recip1m"


def _prune_lines(lines, cap: int = 48):
    """Drop lines dominated at every point; cap the list (dropping is sound)."""
    kept = []
    for c, s in lines:
        if any(np.all(s <= s2) and np.all(c <= c2) for c2, s2 in kept):
            continue
        kept = [(c2, s2) for c2, s2 in kept
                if not (np.all(s2 <= s) and np.all(c2 <= c))]
        kept.append((c, s))
    if len(kept) > cap:
        kept.sort(key=lambda cs: float(np.mean(cs[0])), reverse=True)
        kept = kept[:cap]
    return kept


# ---------------------------------------------------------------------------
# Certified expression with its domain
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ConvexExpr:
    """A structurally certified convex function on an open convex domain."""

    root: Node
    domain: Domain
    text: str = ""

    @property
    def dim(self) -> int:
        return self.domain.dim

    def value(self, X) -> np.ndarray:
        """Batched evaluation; does not re-check membership (hot path)."""
        return self.root.value(as_points(X, self.dim))

    def subgrad(self, X) -> np.ndarray:
        return self.root.subgrad(as_points(X, self.dim))

    def minorant_lines(self, X) -> list[tuple[np.ndarray, np.ndarray]]:
        """Structural lower-bound lines plus the subgradient cutting plane.

        f(y) >= f(x_i) - ||v(x_i)|| * ||y - x_i|| holds globally for any
        subgradient v(x_i), so that cut is always appended.
        """
        X = as_points(X, self.dim)
        lines = self.root.minorant_lines(X)
        g = np.linalg.norm(self.root.subgrad(X), axis=1)
        lines.append((self.root.value(X), -g))
        return lines

    @property
    def nonneg(self) -> bool:
        return self.root.nonneg

    @property
    def smooth_c1(self) -> bool:
        return self.root.smooth_c1

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        if x.ndim <= 1:
            return float(self.value(x.reshape(1, -1))[0])
        return self.value(x)


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

_NUM_RE = re.compile(r"[+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?")
_NAME_RE = re.compile(r"[A-Za-z_][A-Za-z_0-9]*")


class _Tokens:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def _skip_ws(self):
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def peek(self) -> str:
        self._skip_ws()
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def expect(self, ch: str):
        from .errors import ParseError

        self._skip_ws()
        if not self.text.startswith(ch, self.pos):
            raise ParseError(f"expected {ch!r}", self.pos)
        self.pos += len(ch)

    def try_char(self, ch: str) -> bool:
        self._skip_ws()
        if self.text.startswith(ch, self.pos):
            self.pos += len(ch)
            return True
        return False

    def number(self) -> float:
        from .errors import ParseError

        self._skip_ws()
        m = _NUM_RE.match(self.text, self.pos)
        if not m:
            raise ParseError("expected a number", self.pos)
        self.pos = m.end()
        return float(m.group())

    def name(self) -> str:
        from .errors import ParseError

        self._skip_ws()
        m = _NAME_RE.match(self.text, self.pos)
        if not m:
            raise ParseError("expected an atom name", self.pos)
        self.pos = m.end()
        return m.group()

    def lookahead_number_times(self) -> bool:
        """True when the upcoming tokens are NUM '*' (a scale prefix)."""
        self._skip_ws()
        m = _NUM_RE.match(self.text, self.pos)
        if not m:
            return False
        rest = self.text[m.end():].lstrip()
        return rest.startswith("*")

    def at_end(self) -> bool:
        self._skip_ws()
        return self.pos >= len(self.text)


def _parse_vec(tok: _Tokens) -> list[float]:
    vals = [tok.number()]
    while tok.try_char(","):
        vals.append(tok.number())
    return vals


def _parse_atom(tok: _Tokens, dim: int) -> Node:
    from .errors import ParseError

    start = tok.pos
    name = tok.name()
    tok.expect("(")
    if name in ("affine", "abs", "softplus"):
        a = _parse_vec(tok)
        tok.expect(";")
        b = tok.number()
        tok.expect(")")
        if len(a) != dim:
            raise DomainCompatibilityError(
                f"{name} vector has {len(a)} entries, domain dimension is {dim}")
        cls = {"affine": Affine, "abs": AbsLinear, "softplus": SoftplusLinear}[name]
        return cls(a, b)
    if name == "norm":
        tok.expect(")")
        return EuclideanNorm()
    if name == "sqnorm":
        tok.expect(")")
        return SquaredNorm()
    if name == "max":
        e1 = _parse_expr(tok, dim)
        tok.expect(",")
        e2 = _parse_expr(tok, dim)
        tok.expect(")")
        return Max2(e1, e2)
    if name == "pow":
        e = _parse_expr(tok, dim)
        tok.expect(",")
        p = tok.number()
        tok.expect(")")
        return Power(e, p)
    if name == "exp":
        e = _parse_expr(tok, dim)
        tok.expect(")")
        return Exp(e)
    if name == "recip1m":
        e = _parse_expr(tok, dim)
        tok.expect(")")
        return ReciprocalOneMinus(e)
    raise ParseError(f"unknown atom {name!r}", start)


def _parse_term(tok: _Tokens, dim: int) -> Node:
    if tok.lookahead_number_times():
        c = tok.number()
        tok.expect("*")
        atom = _parse_atom(tok, dim)
        return Scale(c, atom)
    return _parse_atom(tok, dim)


def _parse_expr(tok: _Tokens, dim: int) -> Node:
    terms = [_parse_term(tok, dim)]
    while tok.try_char("+"):
        terms.append(_parse_term(tok, dim))
    return terms[0] if len(terms) == 1 else Sum(*terms)


def parse_expr(text: str, domain: Domain) -> ConvexExpr:
    """Parse and certify an expression over the given open convex domain.

    Rejection is exhaustive: syntax errors carry the character position,
    convexity-rule violations name the failing node and rule, and
    certificates that depend on the domain (recip1m's inner bound) are
    checked against it before anything is returned.
    """
    from .errors import ParseError

    tok = _Tokens(text)
    root = _parse_expr(tok, domain.dim)
    if not tok.at_end():
        raise ParseError("unexpected trailing input", tok.pos)
    root.certify(domain)
    return ConvexExpr(root=root, domain=domain, text=text)


# ---------------------------------------------------------------------------
# Public pointwise operations
# ---------------------------------------------------------------------------

def evaluate(f: ConvexExpr, x) -> float:
    """Exact recursive evaluation at a single domain point."""
    X = as_points(x, f.dim)
    if not bool(f.domain.contains(X)[0]):
        raise DomainError(f"point {np.asarray(x).tolist()} is outside the domain")
    return float(f.value(X)[0])


def subgradient(f: ConvexExpr, x) -> np.ndarray:
    """A subdifferential element at x; max-atom ties take the first branch."""
    X = as_points(x, f.dim)
    if not bool(f.domain.contains(X)[0]):
        raise DomainError(f"point {np.asarray(x).tolist()} is outside the domain")
    return f.subgrad(X)[0]


@dataclass(frozen=True)
class LipschitzEstimate:
    """Certified upper bound or sampled lower estimate of a Lipschitz constant."""

    value: float
    region: object
    method: str  # "analytic-bound" | "sampled-subgradient"
    is_lower_estimate: bool = False
    warning: str | None = None


def _coerce_region(region, f: ConvexExpr):
    if isinstance(region, (BallRegion, BoxRegion)):
        return region
    if isinstance(region, Domain):
        return region_of_domain(region)
    if isinstance(region, tuple) and len(region) == 2:
        return BallRegion.single(region[0], region[1])
    raise TypeError("region must be a Domain, a (center, radius) pair, or a Region")


def analytic_lipschitz(f: ConvexExpr, region) -> float:
    """Certified sup of subgradient norms over the region (may be inf)."""
    reg = _coerce_region(region, f)
    _, _, g = f.root.bounds(reg)
    return float(np.max(g))


def lipschitz_on(f: ConvexExpr, region, method: str = "analytic-bound",
                 samples: int = 256) -> LipschitzEstimate:
    """Lipschitz estimation on a ball or Domain.

    The analytic method walks the tree propagating interval bounds on
    subgradient norms and refuses regions where no finite bound exists.
    The sampled method takes the max subgradient norm over a Halton
    low-discrepancy sample and is flagged as a lower estimate.
    """
    reg = _coerce_region(region, f)
    bound = analytic_lipschitz(f, reg)
    if method == "analytic-bound":
        if not math.isfinite(bound):
            raise UnboundedLipschitzError(
                "no finite certified Lipschitz bound on this region")
        return LipschitzEstimate(bound, region, "analytic-bound")
    if method != "sampled-subgradient":
        raise ValueError(f"unknown method {method!r}")
    pts = _region_sample(reg, f, samples)
    val = float(np.max(np.linalg.norm(f.subgrad(pts), axis=1))) if len(pts) else 0.0
    warning = None
    if not math.isfinite(bound):
        warning = "region touches domain boundary with unbounded subgradients"
    return LipschitzEstimate(val, region, "sampled-subgradient",
                             is_lower_estimate=True, warning=warning)


def _region_sample(reg, f: ConvexExpr, n: int) -> np.ndarray:
    d = f.dim
    if isinstance(reg, BallRegion):
        c, r = reg.centers[0], reg.radii[0]
        pts = halton_points(4 * n, d) * 2.0 - 1.0
        pts = c + r * pts
        pts = pts[np.linalg.norm(pts - c, axis=1) < r][:n]
    else:
        lo, hi = reg.lo[0].copy(), reg.hi[0].copy()
        lo[~np.isfinite(lo)] = -10.0
        hi[~np.isfinite(hi)] = 10.0
        pts = lo + halton_points(n, d) * (hi - lo)
    inside = f.domain.contains(pts)
    return pts[inside]
