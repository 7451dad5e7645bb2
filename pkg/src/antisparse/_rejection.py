"""Exact rejection sampling for truncated normals (Generator-based twin of the
kernel-side routine; same branch structure, different RNG plumbing)."""

from __future__ import annotations

import math

import numpy as np


def _tail_offset(a: float, gen: np.random.Generator) -> float:
    """Z ~ N(0,1) given Z > a, returned as the offset Z - a."""
    if a <= 0.0:
        while True:
            z = gen.standard_normal()
            if z > a:
                return z - a
    alpha = 0.5 * (a + math.sqrt(a * a + 4.0))
    shift = -2.0 / (a + math.sqrt(a * a + 4.0))
    while True:
        e = gen.exponential(1.0 / alpha)
        diff = e + shift
        if math.log(gen.random()) <= -0.5 * diff * diff:
            return e


def _band_offset(a: float, width: float, gen: np.random.Generator) -> float:
    """Z ~ N(0,1) given a < Z < a + width with a >= 0, as the offset Z - a."""
    alpha = 0.5 * (a + math.sqrt(a * a + 4.0))
    if alpha * width < 0.5:
        while True:
            e = width * gen.random()
            if math.log(gen.random()) <= -0.5 * e * (e + 2.0 * a):
                return e
    shift = -2.0 / (a + math.sqrt(a * a + 4.0))
    while True:
        e = gen.exponential(1.0 / alpha)
        if e < width:
            diff = e + shift
            if math.log(gen.random()) <= -0.5 * diff * diff:
                return e


def trunc_normal(loc: float, scale: float, lo: float, hi: float, gen: np.random.Generator) -> float:
    """One exact draw from N(loc, scale^2) restricted to the interval (lo, hi)."""
    if not lo < hi:
        raise ValueError(f"empty truncation interval ({lo}, {hi})")
    if scale <= 0.0:
        raise ValueError("scale must be positive")
    if lo == -np.inf and hi == np.inf:
        return loc + scale * gen.standard_normal()
    if hi == np.inf:
        a = (lo - loc) / scale
        return lo + scale * _tail_offset(a, gen)
    if lo == -np.inf:
        a = (loc - hi) / scale
        return hi - scale * _tail_offset(a, gen)
    a = (lo - loc) / scale
    b = (hi - loc) / scale
    if a >= 0.0:
        return lo + scale * _band_offset(a, b - a, gen)
    if b <= 0.0:
        return hi - scale * _band_offset(-b, b - a, gen)
    if b - a > 1.0:
        while True:
            z = gen.standard_normal()
            if a < z < b:
                return loc + scale * z
    while True:
        z = a + (b - a) * gen.random()
        if math.log(gen.random()) <= -0.5 * z * z:
            return loc + scale * z
