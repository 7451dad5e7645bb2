"""Random variate generation for the democratic distribution.

Three generators with one target law: an exact cone-decomposition sampler,
a coordinate Gibbs chain, and a proximal MALA chain. Chains run inside the
selected kernel backend and replay bit-identically for a fixed
(seed, stream_id, backend) triple.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import democratic as dem
from ._rejection import trunc_normal
from .backend import get_kernels

__all__ = [
    "RngStream",
    "ChainConfig",
    "Chain",
    "sample_double_gamma",
    "sample_truncated_normal",
    "sample_exact",
    "gibbs_prior_chain",
    "pmala_prior_chain",
    "acf",
]


class RngStream:
    """Seedable RNG handle threaded through every sampler.

    Equal (seed, stream_id) pairs replay identical draw sequences; distinct
    stream ids give independent streams of the same master seed. `generator`
    is a stateful numpy Generator; `kernel_seed` derives integer seeds for
    the compiled chain kernels.
    """

    def __init__(self, seed: int, stream_id: int = 0):
        self.seed = int(seed)
        self.stream_id = int(stream_id)
        ss = np.random.SeedSequence(self.seed, spawn_key=(self.stream_id,))
        self._gen = np.random.Generator(np.random.PCG64(ss))

    @property
    def generator(self) -> np.random.Generator:
        return self._gen

    def kernel_seed(self, salt: int = 0) -> int:
        ss = np.random.SeedSequence(self.seed, spawn_key=(self.stream_id, 1 + int(salt)))
        return int(ss.generate_state(1, dtype=np.uint32)[0])

    def __repr__(self):
        return f"RngStream(seed={self.seed}, stream_id={self.stream_id})"


@dataclass(frozen=True)
class ChainConfig:
    """Length, burn-in and proposal controls for an MCMC run.

    step_size is the initial proposal variance of proximal MALA; it adapts
    toward the midpoint of target_acceptance during burn-in and then freezes.
    mh_moves_per_iter defaults to 1 for prior chains and 20 for posterior
    coefficient steps when left as None.
    """

    total_iters: int
    burn_in: int
    step_size: float = 1.0
    target_acceptance: tuple[float, float] = (0.4, 0.6)
    mh_moves_per_iter: int | None = None
    random_scan: bool = False

    def __post_init__(self):
        if self.total_iters < 1:
            raise ValueError("total_iters must be positive")
        if not 0 <= self.burn_in < self.total_iters:
            raise ValueError("burn_in must lie in [0, total_iters)")
        if not (np.isfinite(self.step_size) and self.step_size > 0):
            raise ValueError("step_size must be positive")
        lo, hi = self.target_acceptance
        if not 0.0 < lo < hi < 1.0:
            raise ValueError("target_acceptance must be an interval inside (0, 1)")
        if self.mh_moves_per_iter is not None and self.mh_moves_per_iter < 1:
            raise ValueError("mh_moves_per_iter must be positive")

    @property
    def acceptance_target(self) -> float:
        lo, hi = self.target_acceptance
        return 0.5 * (lo + hi)


@dataclass(frozen=True)
class Chain:
    """MCMC output: every iterate, plus acceptance and step-size bookkeeping."""

    samples: np.ndarray
    burn_in: int
    accepts: int = 0
    proposals: int = 0
    step_size: float = float("nan")

    @property
    def kept(self) -> np.ndarray:
        return self.samples[self.burn_in :]

    @property
    def acceptance_rate(self):
        if self.proposals == 0:
            return None
        return self.accepts / self.proposals


def sample_double_gamma(params: dem.DoubleGammaParams, rng: RngStream, size=None):
    """Draws with |x| ~ Gamma(shape, rate) and independent uniform sign."""
    gen = rng.generator
    mag = gen.gamma(params.shape, 1.0 / params.rate, size=size)
    sign = gen.integers(0, 2, size=size) * 2.0 - 1.0
    out = sign * mag
    return float(out) if size is None else out


def sample_truncated_normal(mean, var, interval, rng: RngStream, size=None):
    """Exact rejection sampling from N(mean, var) restricted to interval."""
    lo, hi = interval
    if not var > 0:
        raise ValueError("var must be positive")
    gen = rng.generator
    scale = float(np.sqrt(var))
    if size is None:
        return trunc_normal(float(mean), scale, float(lo), float(hi), gen)
    return np.array(
        [trunc_normal(float(mean), scale, float(lo), float(hi), gen) for _ in range(size)]
    )


def sample_exact(params: dem.DemocraticParams, rng: RngStream, size=None):
    """Independent draws by the cone decomposition.

    Pick the dominant coordinate uniformly, give its magnitude a Gamma(N, rate)
    law with a fair sign, and fill the others uniformly inside (-mag, mag).
    """
    n = params.dim
    t = 1 if size is None else int(size)
    gen = rng.generator
    mag = gen.gamma(n, 1.0 / params.rate, size=t)
    x = gen.uniform(-1.0, 1.0, size=(t, n)) * mag[:, None]
    idx = gen.integers(0, n, size=t)
    sign = gen.integers(0, 2, size=t) * 2.0 - 1.0
    x[np.arange(t), idx] = sign * mag
    return x[0] if size is None else x


def _prior_init(params, config, rng, init):
    if init is None:
        return sample_exact(params, rng)
    init = np.asarray(init, dtype=float)
    if init.shape != (params.dim,):
        raise ValueError(f"init must have shape ({params.dim},)")
    return init.copy()


def gibbs_prior_chain(
    params: dem.DemocraticParams,
    config: ChainConfig,
    rng: RngStream,
    init=None,
    backend=None,
) -> Chain:
    """Systematic-scan Gibbs sampler targeting the democratic distribution.

    Each coordinate is redrawn from its exact three-piece conditional; a
    randomized scan order is available via config.random_scan.
    """
    kern = get_kernels(backend)
    x0 = _prior_init(params, config, rng, init)
    xs = kern.gibbs_prior_chain_kernel(
        params.rate,
        config.total_iters,
        x0,
        rng.kernel_seed(salt=11),
        1 if config.random_scan else 0,
    )
    return Chain(samples=xs, burn_in=config.burn_in)


def pmala_prior_chain(
    params: dem.DemocraticParams,
    config: ChainConfig,
    rng: RngStream,
    init=None,
    backend=None,
) -> Chain:
    """Proximal MALA sampler targeting the democratic distribution."""
    kern = get_kernels(backend)
    x0 = _prior_init(params, config, rng, init)
    xs, accepts, step = kern.pmala_prior_chain_kernel(
        params.rate,
        config.total_iters,
        config.burn_in,
        config.step_size,
        x0,
        rng.kernel_seed(salt=13),
        config.acceptance_target,
    )
    return Chain(
        samples=xs,
        burn_in=config.burn_in,
        accepts=int(accepts),
        proposals=config.total_iters,
        step_size=float(step),
    )


def acf(series, max_lag: int, statistic=None) -> np.ndarray:
    """Empirical autocorrelation at lags 1..max_lag.

    Accepts a Chain (kept samples are used), a 2-D sample array, or an
    already-reduced 1-D series. 2-D input is reduced row-wise by `statistic`
    (default: the max-magnitude norm).
    """
    if isinstance(series, Chain):
        data = series.kept
    else:
        data = np.asarray(series, dtype=float)
    if data.ndim == 2:
        if statistic is None:
            s = np.max(np.abs(data), axis=1)
        else:
            s = np.apply_along_axis(statistic, 1, data)
    elif data.ndim == 1:
        s = data
    else:
        raise ValueError("series must be 1-D or 2-D")
    t = s.size
    if not 1 <= max_lag < t:
        raise ValueError("max_lag must lie in [1, len(series))")
    s = s - s.mean()
    c0 = float(np.dot(s, s)) / t
    if c0 == 0.0:
        raise ValueError("series is constant; autocorrelation undefined")
    out = np.empty(max_lag)
    for k in range(1, max_lag + 1):
        out[k - 1] = float(np.dot(s[:-k], s[k:])) / (t * c0)
    return out
