"""Convergence and summary diagnostics for posterior draws."""

from __future__ import annotations

import math

import numpy as np


def effective_sample_size(x) -> float:
    """Autocorrelation-adjusted sample size of one chain.

    Uses the initial positive sequence truncation: lag-pair autocorrelation
    sums are accumulated while they stay positive. Returns NaN for a
    constant chain.
    """
    x = np.asarray(x, dtype=float)
    n = x.size
    if n < 4:
        return float(n)
    x = x - x.mean()
    var = float(x @ x) / n
    if var == 0.0:
        return float("nan")
    # autocovariance via FFT
    nfft = int(2 ** math.ceil(math.log2(2 * n)))
    f = np.fft.rfft(x, nfft)
    acov = np.fft.irfft(f * np.conj(f), nfft)[:n].real / n
    rho = acov / acov[0]
    tau = 1.0
    k = 1
    while k + 1 < n:
        pair = rho[k] + rho[k + 1]
        if pair <= 0.0:
            break
        tau += 2.0 * pair
        k += 2
    return float(n / tau)


def rhat(chains) -> float:
    """Potential scale reduction across chains.

    ``chains`` is a sequence of 1-d draw arrays; a single chain is split in
    half to provide two segments. Computed as sqrt(1 + var(chain means) / W)
    with W the mean within-chain variance, so identical chains give exactly
    1.0. Returns NaN when W is zero (constant chains), which callers should
    surface as an undefined-diagnostic flag.
    """
    segments = [np.asarray(c, dtype=float) for c in chains]
    if len(segments) == 1:
        c = segments[0]
        half = c.size // 2
        if half < 2:
            return float("nan")
        segments = [c[:half], c[half : 2 * half]]
    if any(s.size < 2 for s in segments):
        return float("nan")
    within = float(np.mean([s.var(ddof=1) for s in segments]))
    if within == 0.0:
        return float("nan")
    means = np.array([s.mean() for s in segments])
    between = float(means.var(ddof=1))
    return math.sqrt(1.0 + between / within)


def summarize_draws(chains, param_names, level: float = 0.95) -> dict:
    """Medians, equal-tailed intervals, ESS and R-hat per parameter.

    ``chains`` is a list of (n, P) draw matrices sharing the parameter
    layout. Non-finite diagnostics are serialized as None.
    """
    chains = [np.asarray(c, dtype=float) for c in chains]
    if not chains:
        raise ValueError("at least one chain is required")
    P = chains[0].shape[1]
    if any(c.shape[1] != P for c in chains):
        raise ValueError("chains disagree on parameter count")
    if len(param_names) != P:
        raise ValueError("param_names length does not match draws")
    pooled = np.concatenate(chains, axis=0)
    tail = (1.0 - level) / 2.0
    out = {}
    for k, name in enumerate(param_names):
        col = pooled[:, k]
        ess_vals = [effective_sample_size(c[:, k]) for c in chains]
        finite = [v for v in ess_vals if math.isfinite(v)]
        ess = float(sum(finite)) if finite else float("nan")
        r = rhat([c[:, k] for c in chains])
        out[name] = {
            "median": float(np.median(col)),
            "interval": [
                float(np.quantile(col, tail)),
                float(np.quantile(col, 1.0 - tail)),
            ],
            "ess": None if not math.isfinite(ess) else ess,
            "rhat": None if not math.isfinite(r) else r,
        }
    return out
