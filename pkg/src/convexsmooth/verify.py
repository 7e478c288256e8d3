"""Property-test harness: every claimed inequality as an executable check.

Checks run over deterministic grids and splitmix-seeded random segments
(see :mod:`convexsmooth.sampling` for the exact generator), produce
structured pass/fail entries with worst-case violations and witnesses,
and are grouped into named suites runnable from the CLI.

All inequality checks use relative slack, slack * (1 + |values|), since
the corpus spans many orders of magnitude.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from importlib import resources

import numpy as np

from .domains import Domain, OpenBall, domain_from_json
from .envelopes import (
    EnvelopeSpec,
    InnerSolveConfig,
    combined_envelope_batch,
    envelope_fn,
    moreau_batch,
    pasch_hausdorff_batch,
)
from .function_model import BallRegion, ConvexExpr, analytic_lipschitz, parse_expr
from .gluing import GluedApprox, GluingConfig, glue
from .handles import FnHandle, as_handle
from .sampling import SplitMix64
from .smooth_max import SmoothMaxParams, make_theta, smooth_max_fn, smooth_max_scalar


# ---------------------------------------------------------------------------
# Sampling specs
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GridSpec:
    """Deterministic grid strictly inside a domain.

    margin excludes points whose boundary distance is below
    margin * (largest box side); unbounded sides use [-extent, extent].
    """

    domain: Domain
    points_per_axis: int = 21
    margin: float = 0.05
    extent: float = 3.0

    def points(self) -> np.ndarray:
        lo, hi = self.domain.bounding_box()
        lo = np.where(np.isfinite(lo), lo, -self.extent)
        hi = np.where(np.isfinite(hi), hi, self.extent)
        axes = [np.linspace(lo[i], hi[i], self.points_per_axis)
                for i in range(self.domain.dim)]
        pts = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, self.domain.dim)
        inside = self.domain.contains(pts)
        pts = pts[inside]
        if self.margin > 0:
            scale = float(np.max(hi - lo))
            pts = pts[self.domain.boundary_distance(pts) >= self.margin * scale]
        return pts


@dataclass(frozen=True)
class SegmentSpec:
    """Random segments inside a domain, reproducible from the seed."""

    domain: Domain
    count: int = 64
    seed: int = 0
    extent: float = 3.0
    margin: float = 0.02
    min_separation: float = 0.02

    def segments(self) -> tuple[np.ndarray, np.ndarray]:
        rng = SplitMix64(self.seed)
        pts = rng.points_in_domain(self.domain, 2 * self.count,
                                   extent=self.extent, margin=self.margin)
        a, b = pts[0::2], pts[1::2]
        gap = np.linalg.norm(a - b, axis=1)
        ok = gap >= self.min_separation
        return a[ok], b[ok]


@dataclass(frozen=True)
class CheckSpec:
    """Declarative description of one check (kind + target + sampling)."""

    kind: str
    check_id: str
    target: object
    sampling: object = None
    params: dict = field(default_factory=dict)


# ---------------------------------------------------------------------------
# Report structure
# ---------------------------------------------------------------------------

@dataclass
class CheckResult:
    check_id: str
    passed: bool
    worst: float
    witness: list | None
    samples: int

    def to_obj(self) -> dict:
        return {
            "id": self.check_id,
            "pass": bool(self.passed),
            "worst": float(self.worst),
            "witness": self.witness,
        }


@dataclass
class Report:
    suite: str
    seed: int
    checks: list[CheckResult]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def to_json(self) -> str:
        obj = {
            "suite": self.suite,
            "seed": self.seed,
            "checks": [c.to_obj() for c in sorted(self.checks, key=lambda c: c.check_id)],
            "pass": self.passed,
        }
        return json.dumps(obj, indent=2)

    def summary(self) -> str:
        lines = []
        for c in sorted(self.checks, key=lambda c: c.check_id):
            status = "PASS" if c.passed else "FAIL"
            lines.append(f"[{status}] {c.check_id}  worst={c.worst:.3e}  n={c.samples}")
        lines.append(f"suite {self.suite}: {'PASS' if self.passed else 'FAIL'} "
                     f"({sum(c.passed for c in self.checks)}/{len(self.checks)} checks)")
        return "\n".join(lines)


def _witness(points, values=None, note: str | None = None):
    w = {"points": np.asarray(points, dtype=float).tolist()}
    if values is not None:
        w["values"] = [float(v) for v in np.atleast_1d(values)]
    if note:
        w["note"] = note
    return [w]


# ---------------------------------------------------------------------------
# Core checks
# ---------------------------------------------------------------------------

def check_convexity(h, a: np.ndarray, b: np.ndarray, slack: float = 1e-9,
                    check_id: str = "convexity", strict: bool = False) -> CheckResult:
    """Midpoint convexity along segments at t in {1/4, 1/2, 3/4}.

    Violations are measured relative to 1 + |h(a)| + |h(b)|.  With
    strict=True the t = 1/2 combination must win by more than the slack
    (strict convexity on non-degenerate segments).
    """
    h = _callable(h)
    fa, fb = h(a), h(b)
    scale = 1.0 + np.abs(fa) + np.abs(fb)
    worst = -math.inf
    worst_at = None
    for t in (0.25, 0.5, 0.75):
        mid = h(a + t * (b - a))
        chord = (1 - t) * fa + t * fb
        rel = (mid - chord) / scale
        i = int(np.argmax(rel))
        if rel[i] > worst:
            worst = float(rel[i])
            worst_at = (a[i], b[i], t)
    passed = worst < 0.0 if strict else worst <= slack
    witness = None
    if not passed and worst_at is not None:
        witness = _witness([worst_at[0], worst_at[1]], note=f"t={worst_at[2]}")
    return CheckResult(check_id, passed, worst, witness, int(a.shape[0]) * 3)


def check_c1(h, points: np.ndarray, directions: np.ndarray, step: float = 1e-5,
             tol: float = 1e-3, check_id: str = "c1") -> CheckResult:
    """One-sided directional derivatives agree; Richardson consistency.

    At each point and unit direction u: forward and backward difference
    quotients at the given step must agree within tol, and the central
    quotients D_s satisfy |D_h - D_{h/2}| <= 4 |D_{h/2} - D_{h/4}| + tol.
    """
    h = _callable(h)
    m = points.shape[0]
    u = directions / np.linalg.norm(directions, axis=1, keepdims=True)
    f0 = h(points)
    fwd = (h(points + step * u) - f0) / step
    bwd = (f0 - h(points - step * u)) / step
    gap = np.abs(fwd - bwd)
    i = int(np.argmax(gap))
    worst = float(gap[i])
    worst_at = points[i]
    ds = [(h(points + t * u) - h(points - t * u)) / (2 * t)
          for t in (step, step / 2, step / 4)]
    rich_excess = float(np.max(np.abs(ds[0] - ds[1]) - 4.0 * np.abs(ds[1] - ds[2]) - tol))
    passed = worst <= tol and rich_excess <= 0.0
    witness = None if passed else _witness([worst_at])
    return CheckResult(check_id, passed, worst, witness, m)


def check_band(target, lo, hi, points: np.ndarray, slack: float = 0.0,
               check_id: str = "band") -> CheckResult:
    """lo - slack*scale <= target <= hi + slack*scale at every point."""
    t = _callable(target)(points)
    lo_v = _callable(lo)(points) if lo is not None else np.full_like(t, -np.inf)
    hi_v = _callable(hi)(points) if hi is not None else np.full_like(t, np.inf)
    scale = 1.0 + np.maximum(np.abs(lo_v), np.abs(hi_v))
    with np.errstate(invalid="ignore"):
        viol_lo = np.where(np.isfinite(lo_v), (lo_v - t) / scale - slack, -np.inf)
        viol_hi = np.where(np.isfinite(hi_v), (t - hi_v) / scale - slack, -np.inf)
    viol = np.maximum(viol_lo, viol_hi)
    i = int(np.argmax(viol))
    worst = float(viol[i])
    passed = worst <= 0.0
    witness = None if passed else _witness([points[i]], [t[i], lo_v[i], hi_v[i]])
    return CheckResult(check_id, passed, worst, witness, int(points.shape[0]))


def check_lipschitz(h, bound: float, a: np.ndarray, b: np.ndarray,
                    slack: float = 1e-6, check_id: str = "lipschitz") -> CheckResult:
    """|h(a) - h(b)| <= bound * ||a - b|| + slack over sampled pairs."""
    h = _callable(h)
    fa, fb = h(a), h(b)
    d = np.linalg.norm(a - b, axis=1)
    quot = np.abs(fa - fb) - bound * d
    i = int(np.argmax(quot))
    worst = float(quot[i])
    passed = worst <= slack
    witness = None if passed else _witness([a[i], b[i]], [fa[i], fb[i]])
    return CheckResult(check_id, passed, worst, witness, int(a.shape[0]))


def check_equality(h1, h2, points: np.ndarray, tol: float,
                   check_id: str = "equality") -> CheckResult:
    v1, v2 = _callable(h1)(points), _callable(h2)(points)
    scale = 1.0 + np.abs(v1) + np.abs(v2)
    err = np.abs(v1 - v2) / scale
    i = int(np.argmax(err))
    worst = float(err[i])
    passed = worst <= tol
    witness = None if passed else _witness([points[i]], [v1[i], v2[i]])
    return CheckResult(check_id, passed, worst, witness, int(points.shape[0]))


def check_monotone_pair(h_small, h_big, points: np.ndarray, slack: float = 0.0,
                        check_id: str = "monotone-pair") -> CheckResult:
    """h_small <= h_big + slack*scale pointwise."""
    v1, v2 = _callable(h_small)(points), _callable(h_big)(points)
    scale = 1.0 + np.abs(v1) + np.abs(v2)
    viol = (v1 - v2) / scale - slack
    i = int(np.argmax(viol))
    worst = float(viol[i])
    passed = worst <= 0.0
    witness = None if passed else _witness([points[i]], [v1[i], v2[i]])
    return CheckResult(check_id, passed, worst, witness, int(points.shape[0]))


def _callable(h):
    if isinstance(h, (FnHandle, ConvexExpr)):
        return h.value
    if isinstance(h, GluedApprox):
        return h.eval_batch
    if callable(h):
        return h
    raise TypeError(f"not evaluatable: {type(h).__name__}")


# ---------------------------------------------------------------------------
# Corpus
# ---------------------------------------------------------------------------

_CORPUS_CACHE: list[dict] | None = None


def load_corpus() -> list[dict]:
    """The shipped manifest: list of {name, expr, domain, tags}."""
    global _CORPUS_CACHE
    if _CORPUS_CACHE is None:
        text = resources.files("convexsmooth").joinpath("corpus.json").read_text()
        _CORPUS_CACHE = json.loads(text)
    return _CORPUS_CACHE


def corpus_entry(name: str) -> dict:
    for entry in load_corpus():
        if entry["name"] == name:
            return entry
    raise KeyError(f"no corpus function named {name!r}")


def corpus_expr(name: str) -> ConvexExpr:
    entry = corpus_entry(name)
    return parse_expr(entry["expr"], domain_from_json(entry["domain"]))


def corpus_names(tag: str | None = None) -> list[str]:
    return [e["name"] for e in load_corpus() if tag is None or tag in e["tags"]]


# ---------------------------------------------------------------------------
# Suites
# ---------------------------------------------------------------------------

def run_suite(suite: str, seed: int, samples: int = 10000,
              solver: InnerSolveConfig | None = None) -> Report:
    """Run a named suite deterministically; identical inputs give
    bit-identical reports."""
    runners = {
        "lemma21": _suite_smooth_max_scalar,
        "prop22": _suite_smooth_max_fn,
        "claim-envelopes": _suite_envelopes,
        "gluing-e2e": _suite_gluing,
        "corpus-demo": _suite_corpus,
    }
    if suite not in runners:
        raise ValueError(f"unknown suite {suite!r}; choose from {sorted(runners)}")
    checks = runners[suite](seed, samples, solver or InnerSolveConfig())
    return Report(suite=suite, seed=seed, checks=checks)


# -- scalar smooth-maximum properties ---------------------------------------

def _suite_smooth_max_scalar(seed: int, samples: int, solver) -> list[CheckResult]:
    checks = []
    for eps in (1e-2, 1e-1, 1.0):
        for k in (2, 4):
            checks.extend(_smooth_max_scalar_checks(eps, k, seed, samples))
    return checks


def _smooth_max_scalar_checks(eps: float, k: int, seed: int, n: int) -> list[CheckResult]:
    p = SmoothMaxParams(eps, k)
    th = make_theta(p)
    rng = SplitMix64(seed * 1000003 + round(eps * 1000) * 131 + k)
    tag = f"[eps={eps:g},k={k}]"
    out = []

    xs = rng.uniforms(n, -3.0, 3.0)
    ys = rng.uniforms(n, -3.0, 3.0)
    M = smooth_max_scalar(p, xs, ys)
    mx = np.maximum(xs, ys)

    # (1) joint convexity on random segments in the plane
    x2 = rng.uniforms(n, -3.0, 3.0)
    y2 = rng.uniforms(n, -3.0, 3.0)
    mid = smooth_max_scalar(p, 0.5 * (xs + x2), 0.5 * (ys + y2))
    chord = 0.5 * (M + smooth_max_scalar(p, x2, y2))
    viol = np.max((mid - chord) / (1.0 + np.abs(chord)))
    out.append(CheckResult(f"smoothmax/p1-convex{tag}", viol <= 1e-12, float(viol), None, n))

    # (2) band with zero slack
    band_lo = float(np.max(mx - M))
    band_hi = float(np.max(M - (mx + eps / 2.0)))
    worst2 = max(band_lo, band_hi)
    out.append(CheckResult(f"smoothmax/p2-band{tag}", worst2 <= 0.0, worst2, None, n))

    # (3) equals max bitwise when |x - y| >= eps
    far = np.abs(xs - ys) >= eps
    exact = np.array_equal(M[far], mx[far])
    out.append(CheckResult(f"smoothmax/p3-exact-far{tag}", exact,
                           0.0 if exact else float(np.max(np.abs(M[far] - mx[far]))),
                           None, int(far.sum())))

    # (4) symmetry, bitwise
    sym = np.array_equal(M, smooth_max_scalar(p, ys, xs))
    out.append(CheckResult(f"smoothmax/p4-symmetric{tag}", sym, 0.0 if sym else 1.0, None, n))

    # (5) Lipschitz constant 1 in the sup norm
    M2 = smooth_max_scalar(p, x2, y2)
    supd = np.maximum(np.abs(xs - x2), np.abs(ys - y2))
    lip_viol = np.max(np.abs(M - M2) - supd)
    out.append(CheckResult(f"smoothmax/p5-lip1{tag}", lip_viol <= 1e-12,
                           float(lip_viol), None, n))

    # (6)/(7) strict monotonicity on admissible triples
    y6 = rng.uniforms(n, -2.0, 2.0)
    x6 = y6 + rng.uniforms(n, -0.99 * eps, 3.0 * eps)
    dx = rng.uniforms(n, 1e-3 * max(eps, 1e-2), 1.0)
    m_lo = smooth_max_scalar(p, x6, y6)
    m_hi = smooth_max_scalar(p, x6 + dx, y6)
    worst6 = float(np.max(m_lo - m_hi))
    out.append(CheckResult(f"smoothmax/p6-strict-x{tag}", bool(np.all(m_hi > m_lo)),
                           worst6, None, n))
    m_hi_y = smooth_max_scalar(p, y6, x6 + dx)
    m_lo_y = smooth_max_scalar(p, y6, x6)
    out.append(CheckResult(f"smoothmax/p7-strict-y{tag}", bool(np.all(m_hi_y > m_lo_y)),
                           float(np.max(m_lo_y - m_hi_y)), None, n))

    # (8) monotone in both arguments, strict when both increments are
    da = rng.uniforms(n, 1e-3, 1.0)
    db = rng.uniforms(n, 1e-3, 1.0)
    m_pair = smooth_max_scalar(p, xs + da, ys + db)
    ok8 = bool(np.all(m_pair > M)) and bool(
        np.all(smooth_max_scalar(p, xs + da, ys) >= M))
    worst8 = float(np.max(M - m_pair))
    out.append(CheckResult(f"smoothmax/p8-monotone{tag}", ok8, worst8, None, n))

    # theta sanity rolled into the suite: majorant with exact far agreement
    ts = rng.uniforms(n, -2.0 * eps, 2.0 * eps)
    tv = th(ts)
    inside = np.abs(ts) <= 0.99 * eps
    outside = np.abs(ts) >= eps
    maj = float(np.min(tv[inside] - np.abs(ts[inside]))) if inside.any() else 1.0
    far_eq = bool(np.array_equal(tv[outside], np.abs(ts[outside])))
    ok_theta = maj > 0.0 and far_eq and th.value_at_zero > 0.0
    out.append(CheckResult(f"smoothmax/theta-majorant{tag}", ok_theta,
                           0.0 if ok_theta else -maj, None, n))
    return out


# -- function-level smooth-maximum properties --------------------------------

def _shifted(expr: ConvexExpr, c: float, name: str) -> FnHandle:
    h = as_handle(expr, name)
    return FnHandle(
        eval_batch=lambda X, _h=h, _c=c: _h.eval_batch(X) + _c,
        domain=h.domain, name=f"{name}+{c:g}", convex=True, c1=h.c1,
        lip_global=h.lip_global, lip_on=h.lip_on, nonneg=h.nonneg and c >= 0)


def _convex_pairs(seed: int, count: int = 20):
    """Deterministic same-domain convex pairs drawn from the corpus."""
    rng = SplitMix64(seed)
    by_dim: dict[tuple, list] = {}
    for entry in load_corpus():
        if "d6" in entry["tags"]:
            continue
        dom = domain_from_json(entry["domain"])
        key = (dom.kind, dom.dim)
        by_dim.setdefault(key, []).append(entry["name"])
    groups = [names for names in by_dim.values() if len(names) >= 2]
    pairs = []
    while len(pairs) < count:
        g = groups[rng.next_u64() % len(groups)]
        i = rng.next_u64() % len(g)
        j = rng.next_u64() % len(g)
        if i == j:
            continue
        pairs.append((corpus_expr(g[i]), corpus_expr(g[j])))
    return pairs


def _suite_smooth_max_fn(seed: int, samples: int, solver) -> list[CheckResult]:
    checks = []
    eps = 0.25
    p = SmoothMaxParams(eps, 2)
    pairs = _convex_pairs(seed, 20)
    rng = SplitMix64(seed + 1)
    for idx, (f, g) in enumerate(pairs):
        dom = f.domain
        fh, gh = as_handle(f, f"f{idx}"), as_handle(g, f"g{idx}")
        M = smooth_max_fn(p, fh, gh)
        grid = GridSpec(dom, points_per_axis=15 if dom.dim == 1 else 9,
                        margin=0.05, extent=2.0).points()
        seg = SegmentSpec(dom, count=64, seed=seed + idx, extent=2.0)
        a, b = seg.segments()
        tag = f"[pair{idx}]"

        checks.append(check_convexity(M, a, b, slack=1e-12,
                                      check_id=f"smoothmaxfn/p1-convex{tag}"))
        mx = FnHandle(lambda X, _f=fh, _g=gh: np.maximum(_f.eval_batch(X), _g.eval_batch(X)),
                      domain=dom, name="max")
        hi = FnHandle(lambda X, _m=mx: _m.eval_batch(X) + eps / 2.0, domain=dom, name="max+eps/2")
        checks.append(check_band(M, mx, hi, grid, slack=0.0,
                                 check_id=f"smoothmaxfn/p5-band{tag}"))

        # (3): when f >= g + eps on the grid, the combination returns f bitwise
        g_low = _shifted(g, float(np.min(f.value(grid) - g.value(grid))) - 1.5 * eps, "glow")
        M3 = smooth_max_fn(p, fh, g_low)
        same = np.array_equal(M3.value(grid), fh.value(grid))
        checks.append(CheckResult(f"smoothmaxfn/p3-returns-f{tag}", same,
                                  0.0 if same else 1.0, None, int(grid.shape[0])))

        # (6): symmetry bitwise
        Mt = smooth_max_fn(p, gh, fh)
        sym = np.array_equal(M.value(grid), Mt.value(grid))
        checks.append(CheckResult(f"smoothmaxfn/p6-symmetric{tag}", sym,
                                  0.0 if sym else 1.0, None, int(grid.shape[0])))

        # (7): sampled Lipschitz constant on a random ball never exceeds the
        # larger analytic input constant
        center = grid[rng.next_u64() % grid.shape[0]]
        rad = 0.3 * (1.0 + float(np.linalg.norm(center)))
        rad = min(rad, 0.5 * float(dom.boundary_distance(center.reshape(1, -1))[0]))
        if rad > 1e-6:
            ball = BallRegion.single(center, rad)
            bound = max(analytic_lipschitz(f, ball), analytic_lipschitz(g, ball))
            inball = _ball_pairs(rng, center, rad, 200)
            checks.append(check_lipschitz(M, bound, inball[0], inball[1], slack=1e-9,
                                          check_id=f"smoothmaxfn/p7-lip{tag}"))

        # (9): monotone in both arguments
        f2 = _shifted(f, 0.3, "fup")
        g2 = _shifted(g, 0.7, "gup")
        M9 = smooth_max_fn(p, f2, g2)
        checks.append(check_monotone_pair(M, M9, grid, slack=0.0,
                                          check_id=f"smoothmaxfn/p9-monotone{tag}"))

    # (8) strict convexity preserved on strictly convex quadratic instances
    from .domains import WholeSpace

    dom = WholeSpace(dim=2)
    q1 = parse_expr("sqnorm() + affine(0.3,-0.1;0)", dom)
    q2 = parse_expr("2.0 * sqnorm() + affine(-0.5,0.2;0.4)", dom)
    seg = SegmentSpec(dom, count=128, seed=seed + 99, extent=2.0, min_separation=0.1)
    a, b = seg.segments()
    M8 = smooth_max_fn(p, q1, q2)
    checks.append(check_convexity(M8, a, b, slack=1e-10, strict=True,
                                  check_id="smoothmaxfn/p8-strict-convex"))

    # (2) C1 smoke check on a smooth pair
    sm = smooth_max_fn(p, parse_expr("sqnorm()", dom), parse_expr("affine(1,1;0.1)", dom))
    pts = SplitMix64(seed + 7).points_in_domain(dom, 50, extent=2.0)
    dirs = SplitMix64(seed + 8).points_in_domain(WholeSpace(dim=2), 50, extent=1.0)
    checks.append(check_c1(sm, pts, dirs, step=1e-5, tol=1e-3,
                           check_id="smoothmaxfn/p2-c1-smooth-pair"))
    return checks


def _ball_pairs(rng: SplitMix64, center: np.ndarray, radius: float, n: int):
    d = center.size
    pts = []
    while len(pts) < 2 * n:
        p = np.array([rng.uniform(-1.0, 1.0) for _ in range(d)])
        if np.linalg.norm(p) < 1.0:
            pts.append(center + radius * p)
    pts = np.array(pts)
    a, b = pts[0::2], pts[1::2]
    keep = np.linalg.norm(a - b, axis=1) >= 1e-3 * radius
    return a[keep], b[keep]


# -- envelope properties ------------------------------------------------------

_ENVELOPE_CORPUS = ("abs-1d", "quadratic-1d", "quartic-1d", "max-affines-1d",
                    "norm-2d", "max-affines-2d")


def _suite_envelopes(seed: int, samples: int, solver) -> list[CheckResult]:
    checks = []
    rng = SplitMix64(seed)
    npairs = max(200, min(samples, 2000))
    for name in _ENVELOPE_CORPUS:
        f = corpus_expr(name)
        dom = f.domain
        grid = GridSpec(dom, points_per_axis=41 if dom.dim == 1 else 13,
                        margin=0.0, extent=2.5).points()
        seg = SegmentSpec(dom, count=npairs, seed=seed, extent=2.5)
        a, b = seg.segments()
        for n in (1, 2, 4, 8):
            fn_vals = pasch_hausdorff_batch(f, n, grid, solver)
            tag = f"[{name},n={n}]"
            # (i) below the base function
            viol = np.max((fn_vals - f.value(grid)) / (1.0 + np.abs(f.value(grid))))
            checks.append(CheckResult(f"envelope/linear-below{tag}", viol <= 1e-9,
                                      float(viol), None, int(grid.shape[0])))
            # (ii) n-Lipschitz difference quotients
            env = envelope_fn(EnvelopeSpec("pasch_hausdorff", f, n=n), solver)
            checks.append(check_lipschitz(env, n, a, b, slack=1e-6,
                                          check_id=f"envelope/linear-lip{tag}"))
            # (iii) convex along segments
            checks.append(check_convexity(env, a[:64], b[:64], slack=1e-7,
                                          check_id=f"envelope/linear-convex{tag}"))
            # (iv) exact where the certified local bound is at most n
            r = 0.05 * (1.0 + np.linalg.norm(grid, axis=1))
            r = np.minimum(r, 0.5 * dom.boundary_distance(grid))
            _, _, lip = f.root.bounds(BallRegion(grid, r))
            flat = lip <= n
            if np.any(flat):
                err = np.max(np.abs(fn_vals[flat] - f.value(grid[flat])) /
                             (1.0 + np.abs(f.value(grid[flat]))))
                checks.append(CheckResult(f"envelope/linear-exact-on-stratum{tag}",
                                          err <= 10 * solver.tolerance, float(err),
                                          None, int(flat.sum())))

        lip_f = None
        try:
            lip_f = analytic_lipschitz(f, dom)
        except Exception:
            lip_f = None
        if lip_f is not None and math.isfinite(lip_f):
            prev = None
            for lam in (0.5, 0.1, 0.01):
                flam = moreau_batch(f, lam, grid, solver)
                tag = f"[{name},lam={lam:g}]"
                lo = f.value(grid) - 4.0 * lam * lip_f ** 2 - 10 * solver.tolerance
                ok = np.all(flam <= f.value(grid) + 10 * solver.tolerance) and np.all(flam >= lo)
                worst = float(np.max(np.maximum(flam - f.value(grid), lo - flam)))
                checks.append(CheckResult(f"envelope/quadratic-band{tag}", bool(ok),
                                          worst, None, int(grid.shape[0])))
                if prev is not None:
                    # lam decreases along the loop, so the previous envelope
                    # (larger lam) must sit below the current one
                    mono = float(np.max(prev[1] - flam))
                    checks.append(CheckResult(
                        f"envelope/quadratic-monotone[{name},{prev[0]:g}->{lam:g}]",
                        bool(mono <= 10 * solver.tolerance), mono, None,
                        int(grid.shape[0])))
                prev = (lam, flam)

    # composed envelope equals the quadratic one once n dominates the slope
    f = corpus_expr("abs-1d")
    grid = GridSpec(f.domain, points_per_axis=31, extent=2.0).points()
    comb = combined_envelope_batch(f, 4.0, 0.25, grid, solver)
    more = moreau_batch(f, 0.25, grid, solver)
    err = float(np.max(np.abs(comb - more)))
    checks.append(CheckResult("envelope/combined-reduces-to-quadratic",
                              err <= 10 * solver.tolerance, err, None, int(grid.shape[0])))

    # C1 of the quadratic envelope at the base kink
    env = envelope_fn(EnvelopeSpec("moreau", f, lam=0.1), solver)
    pts = np.array([[0.0], [0.05], [-0.2], [1.0]])
    dirs = np.ones((4, 1))
    checks.append(check_c1(env, pts, dirs, step=1e-5, tol=1e-3,
                           check_id="envelope/quadratic-c1-at-kink"))
    return checks


# -- gluing end-to-end --------------------------------------------------------

_E2E_INSTANCES = (
    ("quadratic-1d", 0.1, 41, 4.0, 64),
    ("max-affines-1d", 0.1, 41, 4.0, 16),
    ("quartic-norm-2d", 0.1, 9, 1.5, 128),
    ("blowup-ball-2d", 0.1, 9, 1.0, 1024),
)


def _suite_gluing(seed: int, samples: int, solver) -> list[CheckResult]:
    checks = []
    for name, eps, ppa, extent, nmax in _E2E_INSTANCES:
        f = corpus_expr(name)
        cfg = GluingConfig(eps=eps, max_stratum=nmax, solver=solver)
        G = glue(f, cfg)
        grid = GridSpec(f.domain, points_per_axis=ppa, margin=0.1, extent=extent).points()
        tag = f"[{name},eps={eps:g}]"
        n0, g1, g2 = G.eval_levels(grid, extra=2)
        fv = f.value(grid)
        scale = 1.0 + np.abs(fv)
        slack = 10 * solver.tolerance

        worst_lo = float(np.max((fv - 2 * eps - g1) / scale)) - slack
        worst_hi = float(np.max((g1 - fv) / scale)) - slack
        checks.append(CheckResult(f"glue/band-two-eps{tag}",
                                  max(worst_lo, worst_hi) <= 0.0,
                                  max(worst_lo, worst_hi), None, int(grid.shape[0])))
        sharper = float(np.max((g1 - (fv - 0.488 * eps)) / scale)) - slack
        checks.append(CheckResult(f"glue/upper-sharper{tag}", sharper <= 0.0,
                                  sharper, None, int(grid.shape[0])))
        stable = np.array_equal(g1, g2)
        checks.append(CheckResult(f"glue/stabilization-bitwise{tag}", stable,
                                  0.0 if stable else float(np.max(np.abs(g1 - g2))),
                                  None, int(grid.shape[0])))

        seg = SegmentSpec(f.domain, count=32, seed=seed, extent=extent, margin=0.12)
        a, b = seg.segments()
        checks.append(check_convexity(G, a, b, slack=1e-6,
                                      check_id=f"glue/convexity{tag}"))
    # C1 at the kinks of the kinked instance
    f = corpus_expr("max-affines-1d")
    cfg = GluingConfig(eps=0.25, max_stratum=16, solver=solver)
    G = glue(f, cfg)
    kinks = np.array([[0.0], [1.0], [1e-4], [-1e-4], [1.0001]])
    dirs = np.ones((kinks.shape[0], 1))
    checks.append(check_c1(G, kinks, dirs, step=1e-5, tol=1e-3,
                           check_id="glue/c1-at-kinks[max-affines-1d]"))
    return checks


# -- corpus demo --------------------------------------------------------------

def _suite_corpus(seed: int, samples: int, solver) -> list[CheckResult]:
    checks = []
    required = {
        "globally-lipschitz": "a",
        "non-lipschitz": "b",
        "kinked": "c",
        "boundary-blowup": "d",
        "truncated-powers": "e",
    }
    names_by_tag = {tag: corpus_names(tag) for tag in required}
    ok_cov = all(len(v) > 0 for v in names_by_tag.values())
    checks.append(CheckResult("corpus/coverage-tags", ok_cov,
                              0.0 if ok_cov else 1.0, None, len(load_corpus())))

    rng = SplitMix64(seed)
    for entry in load_corpus():
        f = corpus_expr(entry["name"])
        pts = rng.points_in_domain(f.domain, 32, extent=1.5, margin=0.02)
        vals = f.value(pts)
        finite = bool(np.all(np.isfinite(vals)))
        checks.append(CheckResult(f"corpus/finite[{entry['name']}]", finite,
                                  0.0 if finite else math.inf, None, 32))

    # truncated power sums peak like 2^(2d) over the radius-2 ball
    for name, d in (("sumpow-3d", 3), ("sumpow-6d", 6)):
        f = corpus_expr(name)
        corner = np.zeros((1, d))
        corner[0, -1] = 2.0 * (1.0 - 1e-9)
        peak = float(f.value(corner)[0])
        expected = 2.0 ** (2 * d)
        ok = 0.9 * expected <= peak <= 1.1 * expected
        checks.append(CheckResult(f"corpus/peak-growth[{name}]", ok,
                                  abs(peak / expected - 1.0), None, 1))
    return checks
