"""Deterministic sampling utilities.

The verification harness needs witnesses that replay bit-for-bit across
runs (and ideally across languages), so no platform RNG is used.  The
generator is splitmix-style 64-bit, documented exactly:

    state <- (state + 0x9E3779B97F4A7C15) mod 2^64
    z <- state
    z <- (z XOR (z >> 30)) * 0xBF58476D1CE4E5B9 mod 2^64
    z <- (z XOR (z >> 27)) * 0x94D049BB133111EB mod 2^64
    output: z XOR (z >> 31)

Uniform doubles in [0, 1) take the top 53 bits: (out >> 11) * 2^-53.
"""

from __future__ import annotations

import numpy as np

_MASK = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB


class SplitMix64:
    """Splittable 64-bit generator with reproducible uniform helpers."""

    def __init__(self, seed: int):
        self._state = int(seed) & _MASK

    def next_u64(self) -> int:
        self._state = (self._state + _GAMMA) & _MASK
        z = self._state
        z = ((z ^ (z >> 30)) * _MIX1) & _MASK
        z = ((z ^ (z >> 27)) * _MIX2) & _MASK
        return z ^ (z >> 31)

    def uniform(self, lo: float = 0.0, hi: float = 1.0) -> float:
        u = (self.next_u64() >> 11) * 2.0 ** -53
        return lo + (hi - lo) * u

    def uniforms(self, n: int, lo: float = 0.0, hi: float = 1.0) -> np.ndarray:
        return np.array([self.uniform(lo, hi) for _ in range(n)])

    def point_in_box(self, lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
        return np.array([self.uniform(l, h) for l, h in zip(lo, hi)])

    def points_in_domain(self, domain, n: int, extent: float = 3.0,
                         margin: float = 0.0, max_tries: int = 10000) -> np.ndarray:
        """Rejection-sample n points strictly inside the domain.

        Unbounded box sides are replaced by [-extent, extent].  With
        margin > 0, points closer than margin * (box scale) to the
        boundary are rejected as well.
        """
        lo, hi = domain.bounding_box()
        lo = np.where(np.isfinite(lo), lo, -extent)
        hi = np.where(np.isfinite(hi), hi, extent)
        scale = float(np.max(hi - lo))
        out = []
        tries = 0
        while len(out) < n:
            tries += 1
            if tries > max_tries * n:
                raise RuntimeError("rejection sampling failed to fill the domain")
            p = self.point_in_box(lo, hi)
            if not domain.contains(p.reshape(1, -1))[0]:
                continue
            if margin > 0.0 and float(domain.boundary_distance(p.reshape(1, -1))[0]) < margin * scale:
                continue
            out.append(p)
        return np.array(out)

    def split(self) -> "SplitMix64":
        return SplitMix64(self.next_u64())


_PRIMES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53)


def _radical_inverse(i: int, base: int) -> float:
    inv = 0.0
    denom = 1.0
    while i > 0:
        denom *= base
        i, rem = divmod(i, base)
        inv += rem / denom
    return inv


def halton_points(n: int, dim: int, skip: int = 20) -> np.ndarray:
    """First n Halton points in [0, 1)^dim (deterministic, low discrepancy)."""
    if dim > len(_PRIMES):
        raise ValueError(f"halton supports dim <= {len(_PRIMES)}")
    out = np.empty((n, dim))
    for j in range(dim):
        base = _PRIMES[j]
        out[:, j] = [_radical_inverse(i + skip, base) for i in range(n)]
    return out
