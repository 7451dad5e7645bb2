"""The democratic distribution: a log-concave prior that spreads energy
evenly across coordinates by penalizing the largest magnitude.

Density on R^N: p(x) = exp(-rate * ||x||_inf) / Z with
Z = N! * (2 / rate)^N. All densities here are exposed in the log domain.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln, logsumexp

from ._rejection import trunc_normal
from ._special import log_gauss_mass, normalized_log_weights

__all__ = [
    "DemocraticParams",
    "DoubleGammaParams",
    "ConeIndex",
    "MixtureComponent",
    "ConditionalMixture",
    "log_norm_const",
    "log_pdf",
    "moments",
    "marginal_logpdf",
    "double_gamma_logpdf",
    "cone_index",
    "dominant_given_cone_law",
    "prob_cone_given_rest",
    "rest_given_not_cone_logpdf",
    "conditional_mixture_prior",
]


@dataclass(frozen=True)
class DemocraticParams:
    """Dimension and rate (inverse scale) of a democratic distribution."""

    dim: int
    rate: float

    def __post_init__(self):
        if int(self.dim) != self.dim or self.dim < 1:
            raise ValueError("dim must be a positive integer")
        if not (np.isfinite(self.rate) and self.rate > 0):
            raise ValueError("rate must be positive and finite")
        object.__setattr__(self, "dim", int(self.dim))
        object.__setattr__(self, "rate", float(self.rate))


@dataclass(frozen=True)
class DoubleGammaParams:
    """Two-sided gamma law: |x| ~ Gamma(shape, rate), sign uniform on {-1, +1}."""

    shape: float
    rate: float

    def __post_init__(self):
        if not (np.isfinite(self.shape) and self.shape > 0):
            raise ValueError("shape must be positive and finite")
        if not (np.isfinite(self.rate) and self.rate > 0):
            raise ValueError("rate must be positive and finite")


@dataclass(frozen=True)
class ConeIndex:
    """Which coordinate dominates a vector (0-based) and its signed value."""

    index: int
    value: float


def _as_generator(rng):
    gen = getattr(rng, "generator", rng)
    if not isinstance(gen, np.random.Generator):
        raise TypeError("rng must be an RngStream or numpy Generator")
    return gen


@dataclass(frozen=True)
class MixtureComponent:
    """One piece of a coordinate conditional, normalized on (lo, hi).

    kind is "uniform", "exp_tail" (exponential decay away from the finite
    boundary, mean distance `scale`) or "trunc_normal" (parent N(loc, scale^2)
    restricted to the interval).
    """

    kind: str
    lo: float
    hi: float
    loc: float = 0.0
    scale: float = 1.0

    def log_pdf(self, t):
        t_in = np.asarray(t, dtype=float)
        scalar = t_in.ndim == 0
        t = np.atleast_1d(t_in)
        inside = (t > self.lo) & (t < self.hi)
        out = np.full(t.shape, -np.inf)
        if self.kind == "uniform":
            out[inside] = -np.log(self.hi - self.lo)
        elif self.kind == "exp_tail":
            rate = 1.0 / self.scale
            if self.hi == np.inf:
                out[inside] = np.log(rate) - rate * (t[inside] - self.lo)
            else:
                out[inside] = np.log(rate) - rate * (self.hi - t[inside])
        elif self.kind == "trunc_normal":
            a = (self.lo - self.loc) / self.scale
            b = (self.hi - self.loc) / self.scale
            z = (t[inside] - self.loc) / self.scale
            out[inside] = (
                -0.5 * z * z
                - 0.5 * np.log(2.0 * np.pi)
                - np.log(self.scale)
                - log_gauss_mass(a, b)
            )
        else:  # pragma: no cover
            raise ValueError(f"unknown component kind {self.kind!r}")
        return float(out[0]) if scalar else out

    def sample(self, rng) -> float:
        gen = _as_generator(rng)
        if self.kind == "uniform":
            return float(gen.uniform(self.lo, self.hi))
        if self.kind == "exp_tail":
            e = gen.exponential(self.scale)
            return float(self.lo + e) if self.hi == np.inf else float(self.hi - e)
        if self.kind == "trunc_normal":
            return float(trunc_normal(self.loc, self.scale, self.lo, self.hi, gen))
        raise ValueError(f"unknown component kind {self.kind!r}")  # pragma: no cover


@dataclass(frozen=True)
class ConditionalMixture:
    """Finite mixture on disjoint intervals covering the real line."""

    components: tuple[MixtureComponent, ...]
    log_weights: np.ndarray

    def __post_init__(self):
        lw = np.asarray(self.log_weights, dtype=float)
        if lw.shape != (len(self.components),):
            raise ValueError("one log weight per component required")
        object.__setattr__(self, "log_weights", normalized_log_weights(lw))

    @property
    def weights(self) -> np.ndarray:
        return np.exp(self.log_weights)

    def log_pdf(self, t):
        t = np.asarray(t, dtype=float)
        stacked = np.stack(
            [lw + c.log_pdf(t) for lw, c in zip(self.log_weights, self.components)]
        )
        out = logsumexp(stacked, axis=0)
        return out if np.ndim(out) else float(out)

    def pdf(self, t):
        return np.exp(self.log_pdf(t))

    def sample(self, rng) -> float:
        gen = _as_generator(rng)
        k = gen.choice(len(self.components), p=self.weights)
        return self.components[k].sample(gen)


def log_norm_const(params: DemocraticParams) -> float:
    """Log normalizing constant: log(N!) + N log(2 / rate)."""
    n = params.dim
    return float(gammaln(n + 1) + n * (np.log(2.0) - np.log(params.rate)))


def log_pdf(x, params: DemocraticParams):
    """Log density; accepts a vector or a batch with vectors on the last axis."""
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != params.dim:
        raise ValueError(f"expected last axis of length {params.dim}, got {x.shape}")
    linf = np.max(np.abs(x), axis=-1)
    out = -params.rate * linf - log_norm_const(params)
    return out if out.ndim else float(out)


def moments(params: DemocraticParams):
    """Mean vector, per-coordinate variance, and cross covariance (zero)."""
    n, lam = params.dim, params.rate
    var = (n + 1.0) * (n + 2.0) / (3.0 * lam * lam)
    return np.zeros(n), float(var), 0.0


def marginal_logpdf(x_keep, removed: int, params: DemocraticParams):
    """Log marginal after integrating out `removed` coordinates.

    The marginal depends on the kept block only through its max magnitude m:
    a polynomial of degree `removed` in m times exp(-rate * m).
    """
    x = np.asarray(x_keep, dtype=float)
    n, lam = params.dim, params.rate
    j_out = int(removed)
    if not 0 < j_out < n:
        raise ValueError("removed must satisfy 0 < removed < dim")
    if x.shape[-1] != n - j_out:
        raise ValueError(f"expected {n - j_out} kept coordinates, got {x.shape[-1]}")
    m = np.max(np.abs(x), axis=-1)
    j = np.arange(j_out + 1)
    with np.errstate(divide="ignore"):
        logm = np.log(m)
    terms = (
        gammaln(j_out + 1)
        - gammaln(j + 1)
        - (j_out - j) * np.log(lam)
        + j * logm[..., None]
    )
    terms[..., 0] = gammaln(j_out + 1) - j_out * np.log(lam)
    out = (
        j_out * np.log(2.0)
        - log_norm_const(params)
        - lam * m
        + logsumexp(terms, axis=-1)
    )
    return out if np.ndim(out) else float(out)


def double_gamma_logpdf(x, params: DoubleGammaParams):
    """Log density of the two-sided gamma law."""
    x = np.asarray(x, dtype=float)
    a, b = params.shape, params.rate
    with np.errstate(divide="ignore"):
        logabs = np.log(np.abs(x))
    out = a * np.log(b) - np.log(2.0) - gammaln(a) + (a - 1.0) * logabs - b * np.abs(x)
    if a == 1.0:
        out = np.where(x == 0.0, np.log(b) - np.log(2.0), out)
    return out if out.ndim else float(out)


def cone_index(x) -> ConeIndex:
    """Locate the dominant coordinate; ties break toward the lowest index."""
    x = np.asarray(x, dtype=float)
    if x.ndim != 1 or x.size == 0:
        raise ValueError("x must be a non-empty vector")
    if np.all(x == 0.0):
        raise ValueError("the zero vector belongs to no cone")
    k = int(np.argmax(np.abs(x)))
    return ConeIndex(index=k, value=float(x[k]))


def dominant_given_cone_law(params: DemocraticParams) -> DoubleGammaParams:
    """Law of the dominant coordinate given its cone: two-sided Gamma(N, rate)."""
    return DoubleGammaParams(shape=float(params.dim), rate=params.rate)


def prob_cone_given_rest(x_rest, params: DemocraticParams) -> float:
    """Probability that the remaining coordinate dominates, given the others:
    1 / (1 + rate * ||x_rest||_inf)."""
    x = np.asarray(x_rest, dtype=float)
    if x.shape != (params.dim - 1,):
        raise ValueError(f"expected {params.dim - 1} values, got {x.shape}")
    m = float(np.max(np.abs(x))) if x.size else 0.0
    return 1.0 / (1.0 + params.rate * m)


def rest_given_not_cone_logpdf(x_rest, params: DemocraticParams) -> float:
    """Log density of the others given the held-out coordinate dominates them."""
    n, lam = params.dim, params.rate
    if n < 2:
        raise ValueError("needs dim >= 2")
    x = np.asarray(x_rest, dtype=float)
    if x.shape != (n - 1,):
        raise ValueError(f"expected {n - 1} values, got {x.shape}")
    m = float(np.max(np.abs(x)))
    if m == 0.0:
        return -np.inf
    rest = DemocraticParams(n - 1, lam)
    return float(
        np.log(lam) - np.log(n - 1.0) + np.log(m) - log_norm_const(rest) - lam * m
    )


def conditional_mixture_prior(x_rest, params: DemocraticParams) -> ConditionalMixture:
    """Full conditional of one coordinate under the prior, given the others.

    Uniform on (-m, m) with probability 1 - c, plus two exponential tails of
    rate `params.rate` starting at +-m with probability c/2 each, where
    c = 1 / (1 + rate * m). At m = 0 this collapses to a two-sided Laplace.
    """
    x = np.asarray(x_rest, dtype=float)
    if x.shape != (params.dim - 1,):
        raise ValueError(f"expected {params.dim - 1} values, got {x.shape}")
    lam = params.rate
    m = float(np.max(np.abs(x))) if x.size else 0.0
    c = 1.0 / (1.0 + lam * m)
    tail = 1.0 / lam
    if m == 0.0:
        comps = (
            MixtureComponent("exp_tail", -np.inf, 0.0, scale=tail),
            MixtureComponent("exp_tail", 0.0, np.inf, scale=tail),
        )
        log_w = np.log([0.5, 0.5])
    else:
        comps = (
            MixtureComponent("exp_tail", -np.inf, -m, scale=tail),
            MixtureComponent("uniform", -m, m),
            MixtureComponent("exp_tail", m, np.inf, scale=tail),
        )
        log_w = np.log([0.5 * c, 1.0 - c, 0.5 * c])
    return ConditionalMixture(components=comps, log_weights=log_w)
