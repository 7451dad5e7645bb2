"""Small numerical helpers shared by the public (non-kernel) code paths."""

from __future__ import annotations

import numpy as np
from scipy.special import log_ndtr


def log_gauss_mass(a, b):
    """log P(a < Z < b) for standard normal Z, elementwise, tail-accurate.

    Mirrors the interval into whichever tail keeps log_ndtr well conditioned.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    scalar = a.ndim == 0 and b.ndim == 0
    a, b = np.atleast_1d(*np.broadcast_arrays(a, b))
    out = np.full(a.shape, -np.inf)

    def _lower(lo, hi):
        # both endpoints <= 0
        la = log_ndtr(lo)
        lb = log_ndtr(hi)
        with np.errstate(divide="ignore", invalid="ignore"):
            res = lb + np.log1p(-np.exp(la - lb))
        return np.where(la >= lb, -np.inf, res)

    lower = b <= 0
    upper = ~lower & (a >= 0)
    middle = ~lower & ~upper
    if np.any(lower):
        out[lower] = _lower(a[lower], b[lower])
    if np.any(upper):
        out[upper] = _lower(-b[upper], -a[upper])
    if np.any(middle):
        am, bm = a[middle], b[middle]
        with np.errstate(divide="ignore"):
            out[middle] = np.log1p(-(np.exp(log_ndtr(am)) + np.exp(log_ndtr(-bm))))
    out = np.where(a >= b, -np.inf, out)
    return float(out[0]) if scalar else out


def normalized_log_weights(log_w):
    """Normalize log weights to log probabilities with a max shift."""
    log_w = np.asarray(log_w, dtype=float)
    m = np.max(log_w)
    if not np.isfinite(m):
        raise ValueError("all mixture log weights are -inf")
    shifted = log_w - m
    lse = m + np.log(np.sum(np.exp(shifted)))
    return log_w - lse
