"""Deterministic random streams for reproducible problem instances.

Instance generation must be bit-identical across machines and library
versions, so nothing here depends on numpy's Generator internals.  Draw i
(0-based) of a stream with seed s is

    z_i = mix64((s + (i + 1) * 0x9E3779B97F4A7C15) mod 2**64)

where mix64 is the splitmix64 finalizer

    z ^= z >> 30;  z *= 0xBF58476D1CE4E5B9
    z ^= z >> 27;  z *= 0x94D049BB133111EB
    z ^= z >> 31

(all on 64-bit words), mapped to a uniform in (0, 1] by

    u_i = ((z_i >> 11) + 1) * 2**-53.

A request for q gaussians consumes the next 2*ceil(q/2) uniforms as pairs
(u1, u2, u1, u2, ...); each pair yields the Box-Muller values

    sqrt(-2 ln u1) * cos(2 pi u2),  sqrt(-2 ln u1) * sin(2 pi u2)

in that order, and the trailing value is dropped when q is odd.  Any
implementation following this recipe reproduces the exact streams.
"""

from __future__ import annotations

import numpy as np

_GAMMA = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)
_U53 = 2.0**-53


def mix64(z):
    """splitmix64 finalizer, elementwise on uint64 scalars or arrays."""
    z = np.uint64(z) if np.isscalar(z) else np.asarray(z, dtype=np.uint64)
    with np.errstate(over="ignore"):  # wraparound is the point
        z = z ^ (z >> np.uint64(30))
        z = z * _MIX1
        z = z ^ (z >> np.uint64(27))
        z = z * _MIX2
        z = z ^ (z >> np.uint64(31))
    return z


class Rng:
    """Counter-based splitmix64 stream with Box-Muller gaussians."""

    def __init__(self, seed: int):
        self._seed = np.uint64(int(seed) % 2**64)
        self._count = 0

    def _raw(self, n: int) -> np.ndarray:
        idx = np.arange(self._count + 1, self._count + n + 1, dtype=np.uint64)
        self._count += n
        return mix64(self._seed + idx * _GAMMA)

    def uniform(self, size=None) -> np.ndarray | float:
        """Uniform draws in (0, 1]."""
        n = 1 if size is None else int(np.prod(size))
        u = ((self._raw(n) >> np.uint64(11)).astype(np.float64) + 1.0) * _U53
        if size is None:
            return float(u[0])
        return u.reshape(size)

    def normal(self, size=None) -> np.ndarray | float:
        """Standard normal draws."""
        q = 1 if size is None else int(np.prod(size))
        pairs = (q + 1) // 2
        u = ((self._raw(2 * pairs) >> np.uint64(11)).astype(np.float64) + 1.0) * _U53
        radius = np.sqrt(-2.0 * np.log(u[0::2]))
        angle = 2.0 * np.pi * u[1::2]
        out = np.empty(2 * pairs)
        out[0::2] = radius * np.cos(angle)
        out[1::2] = radius * np.sin(angle)
        if size is None:
            return float(out[0])
        return out[:q].reshape(size)
