"""Proximal operator of the weighted l_inf norm.

prox(x) = argmin_u weight * ||u||_inf + ||u - x||^2 / 2. The solution clamps
every magnitude above a data-dependent threshold phi and leaves the rest
untouched. Two independent routes are provided: a direct sorted-scan solver
and an oracle built from the Moreau identity with an exact l1-ball projection.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .backend import get_kernels

__all__ = [
    "ProxThreshold",
    "prox_linf",
    "prox_linf_threshold",
    "prox_linf_oracle",
    "project_l1_ball",
    "gradient_step_prox",
]


@dataclass(frozen=True)
class ProxThreshold:
    """Clamp level phi plus the per-group candidates that produced it.

    magnitudes holds the distinct |x| values in decreasing order, counts their
    multiplicities, and levels the candidate threshold for each prefix group.
    """

    phi: float
    levels: np.ndarray
    magnitudes: np.ndarray
    counts: np.ndarray


def _check_input(x, weight):
    x = np.asarray(x, dtype=float)
    if x.ndim != 1:
        raise ValueError("x must be a vector")
    if not np.all(np.isfinite(x)):
        raise ValueError("x must be finite")
    if not (np.isfinite(weight) and weight >= 0):
        raise ValueError("weight must be finite and non-negative")
    return x, float(weight)


def prox_linf(x, weight, backend=None) -> np.ndarray:
    """Proximal map of weight * ||.||_inf (sorted prefix scan, O(N log N))."""
    x, weight = _check_input(x, weight)
    return get_kernels(backend).prox_linf_kernel(x, weight)


def prox_linf_threshold(x, weight) -> ProxThreshold:
    """Clamp threshold by the grouped scan over distinct magnitudes.

    Candidate for the top j groups: (sum of their magnitudes - weight) /
    (number of entries in them); phi is the largest candidate, floored at 0.
    """
    x, weight = _check_input(x, weight)
    mags, counts = np.unique(np.abs(x), return_counts=True)
    mags, counts = mags[::-1], counts[::-1]
    sizes = np.cumsum(counts)
    levels = (np.cumsum(mags * counts) - weight) / sizes
    phi = max(0.0, float(levels.max())) if weight > 0 else float(mags[0])
    return ProxThreshold(phi=phi, levels=levels, magnitudes=mags, counts=counts)


def project_l1_ball(v, radius: float = 1.0) -> np.ndarray:
    """Euclidean projection onto {u : ||u||_1 <= radius} (sort-based, exact)."""
    v = np.asarray(v, dtype=float)
    if radius <= 0:
        raise ValueError("radius must be positive")
    a = np.abs(v)
    if a.sum() <= radius:
        return v.copy()
    u = np.sort(a)[::-1]
    css = np.cumsum(u)
    k = np.arange(1, v.size + 1)
    rho = np.nonzero(u > (css - radius) / k)[0][-1]
    theta = (css[rho] - radius) / (rho + 1.0)
    return np.sign(v) * np.maximum(a - theta, 0.0)


def prox_linf_oracle(x, weight) -> np.ndarray:
    """Moreau-identity route: prox(x) = x - weight * proj_l1(x / weight)."""
    x, weight = _check_input(x, weight)
    if weight == 0.0:
        return x.copy()
    return x - weight * project_l1_ball(x / weight)


def gradient_step_prox(x, y, h, sigma2, rate, step, backend=None) -> np.ndarray:
    """Forward-backward step on the penalized least-squares objective:
    prox of the penalty at x - (step / sigma2) * H^T (Hx - y)."""
    x = np.asarray(x, dtype=float)
    h = np.asarray(h, dtype=float)
    y = np.asarray(y, dtype=float)
    if sigma2 <= 0 or step <= 0 or rate <= 0:
        raise ValueError("sigma2, rate and step must be positive")
    g = x - (step / sigma2) * (h.T @ (h @ x - y))
    return get_kernels(backend).prox_linf_kernel(g, 0.5 * rate * step)
