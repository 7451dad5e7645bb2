"""Hot sampling kernels, written once in njit-compatible numpy.

Do not import this module directly: load it through ``backend.get_kernels``,
which executes this source either compiled (every function wrapped with
``@njit(cache=True)``) or as plain Python. All randomness goes through the
legacy ``np.random`` global generator, seeded once at kernel entry, so a
(seed, backend) pair replays bit-identically.
"""

import math
import os

import numpy as np

if os.environ.get("_ANTISPARSE_KERNELS_JIT", "1") == "1":
    try:
        from numba import njit as _njit

        def _jit(func):
            return _njit(cache=True)(func)

    except ImportError:  # pragma: no cover - exercised only without numba

        def _jit(func):
            return func

else:

    def _jit(func):
        return func


_SQRT2 = math.sqrt(2.0)
_LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)


@_jit
def log_ndtr(z):
    """log of the standard normal CDF, accurate far into the lower tail."""
    if z > 6.0:
        return math.log1p(-0.5 * math.erfc(z / _SQRT2))
    if z > -30.0:
        return math.log(0.5 * math.erfc(-z / _SQRT2))
    # asymptotic series for the extreme lower tail
    t = 1.0 / (z * z)
    series = -t * (1.0 - 3.0 * t * (1.0 - 5.0 * t * (1.0 - 7.0 * t)))
    return -0.5 * z * z - math.log(-z) - _LOG_SQRT_2PI + math.log1p(series)


@_jit
def log_gauss_mass(a, b):
    """log P(a < Z < b) for standard normal Z, with a <= b."""
    if a >= b:
        return -np.inf
    if b <= 0.0:
        la = log_ndtr(a)
        lb = log_ndtr(b)
        diff = la - lb
        if diff > -1e-17:
            # bounds numerically identical; avoid log1p(-1 + eps) noise
            return -np.inf
        return lb + math.log1p(-math.exp(diff))
    if a >= 0.0:
        la = log_ndtr(-b)
        lb = log_ndtr(-a)
        diff = la - lb
        if diff > -1e-17:
            return -np.inf
        return lb + math.log1p(-math.exp(diff))
    # interval straddles zero: mass = 1 - Phi(a) - Phi(-b)
    return math.log1p(-(math.exp(log_ndtr(a)) + math.exp(log_ndtr(-b))))


@_jit
def vec_linf(x):
    m = 0.0
    for i in range(x.shape[0]):
        a = abs(x[i])
        if a > m:
            m = a
    return m


@_jit
def prox_linf_kernel(x, weight):
    """Proximal map of weight * ||.||_inf.

    Sorted prefix scan over all positions; runs of tied magnitudes give the
    same maximum as the grouped-by-distinct-value scan, so no dedup needed.
    """
    n = x.shape[0]
    out = x.copy()
    if n == 0 or weight <= 0.0:
        return out
    s = np.sort(np.abs(x))  # ascending
    phi = 0.0
    cum = 0.0
    count = 0
    for k in range(n - 1, -1, -1):
        cum += s[k]
        count += 1
        cand = (cum - weight) / count
        if cand > phi:
            phi = cand
    for i in range(n):
        if out[i] > phi:
            out[i] = phi
        elif out[i] < -phi:
            out[i] = -phi
    return out


@_jit
def _tail_offset(a):
    """Draw Z ~ N(0,1) conditioned on Z > a; returns Z - a (exact rejection)."""
    if a <= 0.0:
        while True:
            z = np.random.standard_normal()
            if z > a:
                return z - a
    alpha = 0.5 * (a + math.sqrt(a * a + 4.0))
    shift = -2.0 / (a + math.sqrt(a * a + 4.0))  # a - alpha, cancellation-free
    while True:
        e = np.random.exponential(1.0 / alpha)
        diff = e + shift
        if math.log(np.random.random()) <= -0.5 * diff * diff:
            return e


@_jit
def _band_offset(a, width):
    """Draw Z ~ N(0,1) conditioned on a < Z < a + width (a >= 0); returns Z - a."""
    alpha = 0.5 * (a + math.sqrt(a * a + 4.0))
    if alpha * width < 0.5:
        # narrow band: uniform proposal under the envelope exp(-a^2/2)
        while True:
            e = width * np.random.random()
            if math.log(np.random.random()) <= -0.5 * e * (e + 2.0 * a):
                return e
    shift = -2.0 / (a + math.sqrt(a * a + 4.0))
    while True:
        e = np.random.exponential(1.0 / alpha)
        if e < width:
            diff = e + shift
            if math.log(np.random.random()) <= -0.5 * diff * diff:
                return e


@_jit
def trunc_normal_draw(loc, scale, lo, hi):
    """One exact draw from N(loc, scale^2) restricted to (lo, hi)."""
    if lo == -np.inf and hi == np.inf:
        return loc + scale * np.random.standard_normal()
    if hi == np.inf:
        a = (lo - loc) / scale
        return lo + scale * _tail_offset(a)
    if lo == -np.inf:
        a = (loc - hi) / scale
        return hi - scale * _tail_offset(a)
    a = (lo - loc) / scale
    b = (hi - loc) / scale
    if a >= 0.0:
        return lo + scale * _band_offset(a, b - a)
    if b <= 0.0:
        return hi - scale * _band_offset(-b, b - a)
    # interval straddles the mode
    if b - a > 1.0:
        while True:
            z = np.random.standard_normal()
            if a < z < b:
                return loc + scale * z
    while True:
        z = a + (b - a) * np.random.random()
        if math.log(np.random.random()) <= -0.5 * z * z:
            return loc + scale * z


@_jit
def gibbs_prior_chain_kernel(rate, total, x0, seed, random_scan):
    """Systematic-scan Gibbs chain on the democratic distribution.

    Each coordinate is redrawn from its exact conditional: uniform inside
    (-m, m) with probability 1 - c, a shifted exponential tail otherwise,
    where m is the max magnitude of the others and c = 1/(1 + rate*m).
    """
    np.random.seed(seed)
    n = x0.shape[0]
    x = x0.copy()
    xs = np.empty((total, n))
    scan = np.arange(n)
    for t in range(total):
        if random_scan == 1:
            scan = np.random.permutation(n)
        for ii in range(n):
            j = scan[ii]
            m = 0.0
            for k in range(n):
                if k != j:
                    a = abs(x[k])
                    if a > m:
                        m = a
            c = 1.0 / (1.0 + rate * m)
            if np.random.random() < 1.0 - c:
                x[j] = m * (2.0 * np.random.random() - 1.0)
            else:
                mag = m - math.log1p(-np.random.random()) / rate
                if np.random.random() < 0.5:
                    x[j] = mag
                else:
                    x[j] = -mag
        xs[t] = x
    return xs


@_jit
def pmala_prior_chain_kernel(rate, total, burn_in, step0, x0, seed, target):
    """Proximal MALA chain on the democratic distribution.

    Proposal N(prox(x, rate*step/2), step*I); the step size adapts toward the
    target acceptance on a Robbins-Monro schedule during burn-in, then freezes.
    """
    np.random.seed(seed)
    n = x0.shape[0]
    x = x0.copy()
    xs = np.empty((total, n))
    step = step0
    accepts = 0
    for t in range(total):
        halfw = 0.5 * rate * step
        d = prox_linf_kernel(x, halfw)
        sq = math.sqrt(step)
        xc = np.empty(n)
        for j in range(n):
            xc[j] = d[j] + sq * np.random.standard_normal()
        dc = prox_linf_kernel(xc, halfw)
        fwd = 0.0
        rev = 0.0
        for j in range(n):
            e = xc[j] - d[j]
            fwd += e * e
            e = x[j] - dc[j]
            rev += e * e
        la = rate * (vec_linf(x) - vec_linf(xc)) + (fwd - rev) / (2.0 * step)
        acc = 0.0
        if la >= 0.0 or math.log(np.random.random()) < la:
            x = xc
            acc = 1.0
            accepts += 1
        if t < burn_in:
            kappa = 2.0 / (t + 20.0) ** 0.6
            step = step * math.exp(kappa * (acc - target))
            step = min(max(step, 1e-12), 1e6)
        xs[t] = x
    return xs, accepts, step


@_jit
def coef_logweights(mu1, mu2, mu3, s, m, lam):
    """Log weights (common factor dropped) of the three-piece coefficient
    conditional: components live on (-inf,-m), (-m,m) and (m,inf)."""
    lw1 = 0.5 * lam * (mu1 + mu2) + log_ndtr((-m - mu1) / s)
    lw2 = -lam * m + log_gauss_mass((-m - mu2) / s, (m - mu2) / s)
    lw3 = -0.5 * lam * (mu3 + mu2) + log_ndtr((mu3 - m) / s)
    return lw1, lw2, lw3


@_jit
def coef_gibbs_sweep(x, resid, ht, hn2, sigma2, lam, scan):
    """One Gibbs sweep over coefficients; x and resid = y - Hx update in place."""
    n = x.shape[0]
    m_dim = resid.shape[0]
    for ii in range(n):
        j = scan[ii]
        hj = ht[j]
        hh = hn2[j]
        xo = x[j]
        hte = np.dot(hj, resid) + xo * hh
        mu2 = hte / hh
        shift = sigma2 * lam / hh
        mu1 = mu2 + shift
        mu3 = mu2 - shift
        s = math.sqrt(sigma2 / hh)
        m = 0.0
        for k in range(n):
            if k != j:
                a = abs(x[k])
                if a > m:
                    m = a
        lw1, lw2, lw3 = coef_logweights(mu1, mu2, mu3, s, m, lam)
        mx = max(lw1, max(lw2, lw3))
        w1 = math.exp(lw1 - mx)
        w2 = math.exp(lw2 - mx)
        w3 = math.exp(lw3 - mx)
        u = (w1 + w2 + w3) * np.random.random()
        if u <= w1:
            xn = trunc_normal_draw(mu1, s, -np.inf, -m)
        elif u <= w1 + w2:
            xn = trunc_normal_draw(mu2, s, -m, m)
        else:
            xn = trunc_normal_draw(mu3, s, m, np.inf)
        x[j] = xn
        d = xo - xn
        for i in range(m_dim):
            resid[i] += d * hj[i]


@_jit
def coef_pmala_moves(x, hx, h, ht, y, sigma2, lam, step, n_moves):
    """n_moves proximal-MALA updates of the coefficient block; x, hx in place.

    Drift: prox of the penalty at x - (step/sigma2) * H^T(Hx - y).
    Returns the number of accepted moves.
    """
    n = x.shape[0]
    m_dim = y.shape[0]
    inv2s = 0.5 / sigma2
    halfw = 0.5 * lam * step
    scale = step / sigma2
    pull = np.dot(ht, hx - y)
    d = prox_linf_kernel(x - scale * pull, halfw)
    rss = 0.0
    for i in range(m_dim):
        e = y[i] - hx[i]
        rss += e * e
    logp = -inv2s * rss - lam * vec_linf(x)
    sq = math.sqrt(step)
    accepts = 0
    for mv in range(n_moves):
        xc = np.empty(n)
        for j in range(n):
            xc[j] = d[j] + sq * np.random.standard_normal()
        hxc = np.dot(h, xc)
        pullc = np.dot(ht, hxc - y)
        dc = prox_linf_kernel(xc - scale * pullc, halfw)
        rssc = 0.0
        for i in range(m_dim):
            e = y[i] - hxc[i]
            rssc += e * e
        logpc = -inv2s * rssc - lam * vec_linf(xc)
        fwd = 0.0
        rev = 0.0
        for j in range(n):
            e = xc[j] - d[j]
            fwd += e * e
            e = x[j] - dc[j]
            rev += e * e
        la = logpc - logp + (fwd - rev) / (2.0 * step)
        if la >= 0.0 or math.log(np.random.random()) < la:
            for j in range(n):
                x[j] = xc[j]
            for i in range(m_dim):
                hx[i] = hxc[i]
            d = dc
            logp = logpc
            accepts += 1
    return accepts


@_jit
def posterior_chain_kernel(
    h,
    ht,
    y,
    hyper_a,
    hyper_b,
    total,
    burn_in,
    kind,
    n_moves,
    step0,
    x0,
    seed,
    rate_floor,
    random_scan,
    target,
):
    """Full posterior sampler: noise variance, then rate hyperparameter, then
    one coefficient block update per iteration (kind 0 = Gibbs sweep,
    kind 1 = n_moves proximal-MALA moves with burn-in step adaptation)."""
    np.random.seed(seed)
    m_dim = h.shape[0]
    n_dim = h.shape[1]
    x = x0.copy()
    xs = np.empty((total, n_dim))
    sig2s = np.empty(total)
    mus = np.empty(total)
    hn2 = np.empty(n_dim)
    for j in range(n_dim):
        hn2[j] = np.dot(ht[j], ht[j])
    step = step0
    accepts = 0
    proposals = 0
    scan = np.arange(n_dim)
    half_m = 0.5 * m_dim
    for t in range(total):
        hx = np.dot(h, x)
        rss = 0.0
        for i in range(m_dim):
            e = y[i] - hx[i]
            rss += e * e
        sigma2 = 0.5 * max(rss, rate_floor) / np.random.gamma(half_m, 1.0)
        linf = vec_linf(x)
        mu = np.random.gamma(hyper_a + n_dim, 1.0 / (hyper_b + n_dim * linf))
        lam = n_dim * mu
        if kind == 0:
            if random_scan == 1:
                scan = np.random.permutation(n_dim)
            resid = y - hx
            coef_gibbs_sweep(x, resid, ht, hn2, sigma2, lam, scan)
        else:
            acc = coef_pmala_moves(x, hx, h, ht, y, sigma2, lam, step, n_moves)
            accepts += acc
            proposals += n_moves
            if t < burn_in:
                kappa = 2.0 / (t + 20.0) ** 0.6
                step = step * math.exp(kappa * (acc / n_moves - target))
                step = min(max(step, 1e-12), 1e6)
        xs[t] = x
        sig2s[t] = sigma2
        mus[t] = mu
    return xs, sig2s, mus, accepts, proposals, step


@_jit
def geweke_chain_kernel(h, ht, noise_var, mu, total, kind, n_moves, step, x0, seed):
    """Successive-conditional chain: refresh y ~ N(Hx, noise_var I), then one
    coefficient block update at fixed hyperparameters. Returns coefficients."""
    np.random.seed(seed)
    m_dim = h.shape[0]
    n_dim = h.shape[1]
    lam = n_dim * mu
    sd = math.sqrt(noise_var)
    x = x0.copy()
    xs = np.empty((total, n_dim))
    hn2 = np.empty(n_dim)
    for j in range(n_dim):
        hn2[j] = np.dot(ht[j], ht[j])
    scan = np.arange(n_dim)
    for t in range(total):
        hx = np.dot(h, x)
        y = np.empty(m_dim)
        for i in range(m_dim):
            y[i] = hx[i] + sd * np.random.standard_normal()
        if kind == 0:
            resid = y - hx
            coef_gibbs_sweep(x, resid, ht, hn2, noise_var, lam, scan)
        else:
            coef_pmala_moves(x, hx, h, ht, y, noise_var, lam, step, n_moves)
        xs[t] = x
    return xs


@_jit
def geweke_tune_step(h, ht, noise_var, mu, iters, n_moves, step0, x0, seed, target):
    """Calibration run for the proximal-MALA flavor of the successive
    conditional chain: adapts the step toward the target acceptance rate."""
    np.random.seed(seed)
    m_dim = h.shape[0]
    n_dim = h.shape[1]
    lam = n_dim * mu
    sd = math.sqrt(noise_var)
    x = x0.copy()
    step = step0
    for t in range(iters):
        hx = np.dot(h, x)
        y = np.empty(m_dim)
        for i in range(m_dim):
            y[i] = hx[i] + sd * np.random.standard_normal()
        acc = coef_pmala_moves(x, hx, h, ht, y, noise_var, lam, step, n_moves)
        kappa = 2.0 / (t + 20.0) ** 0.6
        step = step * math.exp(kappa * (acc / n_moves - target))
        step = min(max(step, 1e-12), 1e6)
    return step
