"""Metropolis-within-Gibbs sampler for the movement model posterior.

Each sweep redraws every scored edge from its exact Bernoulli full
conditional (movement terms that look one step ahead, plus the edge's own
Markov terms), then random-walk updates each continuous block on an
unconstrained scale: identity for the GLM coefficient vectors, log for the
step variance, logit for the network stability. Per-time sufficient
statistics for the edge process and cached Gaussian step statistics keep
every update O(T) or better.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .likelihood import FitData
from .model import (
    LOG_2PI,
    PARAM_NAMES,
    GlmCoefficients,
    ModelParams,
    _pair_step_stats,
    inv_logit,
    log_inv_logit,
    njit,
)
from .simulate import MlmdDataset, TrajectorySet

BLOCKS = ("delta_alpha", "delta_beta", "delta_p", "sigma2", "phi")

DEFAULT_SCALES = {
    "delta_alpha": 0.15,
    "delta_beta": 0.15,
    "delta_p": 0.25,
    "sigma2": 0.2,
    "phi": 0.4,
}


class SamplerInitError(RuntimeError):
    """Raised when the chain cannot start from a finite log posterior."""


@dataclass
class PriorSpec:
    """Priors: iid Gaussians on coefficients, half-Gaussian on the step sd,
    uniform on the stability parameter.

    ``sigma_scale`` is the half-Gaussian scale for sigma; when None it is
    set to five times the median observed step length at fit time.
    """

    coef_sd: float = 1.5
    sigma_scale: float | None = None

    def __post_init__(self):
        if self.coef_sd <= 0:
            raise ValueError("coef_sd must be positive")
        if self.sigma_scale is not None and self.sigma_scale <= 0:
            raise ValueError("sigma_scale must be positive")


@dataclass
class SamplerConfig:
    iterations: int = 3000
    burn_in: int = 1000
    thin: int = 1
    seed: int = 0
    proposal_scales: dict = field(default_factory=lambda: dict(DEFAULT_SCALES))
    adapt: bool = True
    target_accept: float = 0.44
    update_edges: bool = True
    update_blocks: tuple = BLOCKS
    store_edge_draws: bool = False
    initial_edges: np.ndarray | None = None

    def validate(self):
        if self.burn_in >= self.iterations:
            raise ValueError("burn_in must be smaller than iterations")
        if self.thin < 1:
            raise ValueError("thin must be >= 1")
        if (self.iterations - self.burn_in) % self.thin != 0:
            raise ValueError("iterations - burn_in must be a multiple of thin")
        unknown = set(self.update_blocks) - set(BLOCKS)
        if unknown:
            raise ValueError(f"unknown update blocks: {sorted(unknown)}")
        for name in BLOCKS:
            if self.proposal_scales.get(name, 1.0) <= 0:
                raise ValueError(f"proposal scale for {name} must be positive")


@njit(cache=True)
def _step_stats_state(
    t,
    w,
    pos,
    move_m,
    move_member_offsets,
    move_prev_rows,
    move_cur_rows,
    medge_offsets,
    medge_i,
    medge_j,
    medge_src,
    alpha,
    beta,
    flip_pos,
):
    """Gaussian step statistics for the transition into time t, optionally
    with one restricted edge flipped."""
    m = move_m[t]
    e0 = medge_offsets[t]
    e1 = medge_offsets[t + 1]
    k = e1 - e0
    ew = np.empty(k, dtype=np.int8)
    for q in range(k):
        ew[q] = w[medge_src[e0 + q]]
    if flip_pos >= 0:
        ew[flip_pos] = 1 - ew[flip_pos]
    mo = move_member_offsets[t]
    mu_prev = np.empty((m, 2))
    mu_cur = np.empty((m, 2))
    for q in range(m):
        rp = move_prev_rows[mo + q]
        rc = move_cur_rows[mo + q]
        mu_prev[q, 0] = pos[rp, 0]
        mu_prev[q, 1] = pos[rp, 1]
        mu_cur[q, 0] = pos[rc, 0]
        mu_cur[q, 1] = pos[rc, 1]
    return _pair_step_stats(
        m, medge_i[e0:e1], medge_j[e0:e1], ew, mu_prev, mu_cur, alpha, beta
    )


@njit(cache=True)
def _recompute_move_stats(
    w,
    pos,
    move_m,
    move_member_offsets,
    move_prev_rows,
    move_cur_rows,
    medge_offsets,
    medge_i,
    medge_j,
    medge_src,
    alphas,
    betas,
    out_logdet,
    out_quad,
):
    T = move_m.shape[0]
    for t in range(1, T):
        if move_m[t] == 0:
            out_logdet[t] = 0.0
            out_quad[t] = 0.0
            continue
        ld, qd = _step_stats_state(
            t,
            w,
            pos,
            move_m,
            move_member_offsets,
            move_prev_rows,
            move_cur_rows,
            medge_offsets,
            medge_i,
            medge_j,
            medge_src,
            alphas[t - 1],
            betas[t - 1],
            -1,
        )
        out_logdet[t] = ld
        out_quad[t] = qd


@njit(cache=True)
def _edge_sweep(
    w,
    counts,
    move_logdet,
    move_quad,
    pair_offsets,
    pair_stationary,
    pair_prev,
    pair_next,
    pair_move_pos,
    move_m,
    move_member_offsets,
    move_prev_rows,
    move_cur_rows,
    medge_offsets,
    medge_i,
    medge_j,
    medge_src,
    pos,
    log_p1,
    log_q1,
    log_p10,
    log_1mp10,
    log_p11,
    log_1mp11,
    alphas,
    betas,
    sigma2,
    uniforms,
):
    """One systematic-scan Gibbs pass over all scored edges, in place."""
    T = pair_offsets.shape[0] - 1
    log_norm = LOG_2PI + math.log(sigma2)
    for t in range(T):
        for g in range(pair_offsets[t], pair_offsets[t + 1]):
            wc = w[g]
            logodds = 0.0
            if pair_stationary[g]:
                logodds += log_p1[t] - log_q1[t]
            else:
                if w[pair_prev[g]] == 1:
                    logodds += log_p11[t] - log_1mp11[t]
                else:
                    logodds += log_p10[t] - log_1mp10[t]
            ns = pair_next[g]
            if ns >= 0:
                if w[ns] == 1:
                    logodds += log_p11[t + 1] - log_p10[t + 1]
                else:
                    logodds += log_1mp11[t + 1] - log_1mp10[t + 1]
            mp = pair_move_pos[g]
            ld_f = 0.0
            qd_f = 0.0
            if mp >= 0:
                tt = t + 1
                m = move_m[tt]
                ld_f, qd_f = _step_stats_state(
                    tt,
                    w,
                    pos,
                    move_m,
                    move_member_offsets,
                    move_prev_rows,
                    move_cur_rows,
                    medge_offsets,
                    medge_i,
                    medge_j,
                    medge_src,
                    alphas[t],
                    betas[t],
                    mp,
                )
                term_cur = move_logdet[tt] - m * log_norm - move_quad[tt] / (2.0 * sigma2)
                term_flip = ld_f - m * log_norm - qd_f / (2.0 * sigma2)
                if wc == 1:
                    logodds += term_cur - term_flip
                else:
                    logodds += term_flip - term_cur
            if logodds > 700.0:
                p_one = 1.0
            elif logodds < -700.0:
                p_one = 0.0
            else:
                p_one = 1.0 / (1.0 + math.exp(-logodds))
            wn = 1 if uniforms[g] < p_one else 0
            if wn != wc:
                w[g] = wn
                if pair_stationary[g]:
                    counts[t, wc] -= 1
                    counts[t, wn] += 1
                else:
                    base = 2 + 2 * w[pair_prev[g]]
                    counts[t, base + wc] -= 1
                    counts[t, base + wn] += 1
                if ns >= 0:
                    wnext = w[ns]
                    counts[t + 1, 2 + 2 * wc + wnext] -= 1
                    counts[t + 1, 2 + 2 * wn + wnext] += 1
                if mp >= 0:
                    move_logdet[t + 1] = ld_f
                    move_quad[t + 1] = qd_f


def _network_tables(zp: np.ndarray, phi: float) -> dict:
    """Per-time log probabilities of the edge process, stable at extreme logits."""
    log_p1 = log_inv_logit(zp)
    log_q1 = log_inv_logit(-zp)
    p1 = np.exp(log_p1)
    q1 = np.exp(log_q1)
    with np.errstate(divide="ignore"):
        l1mphi = math.log1p(-phi) if phi < 1.0 else -math.inf
        tables = {
            "log_p1": log_p1,
            "log_q1": log_q1,
            "log_p10": l1mphi + log_p1,
            "log_1mp10": np.log(q1 + phi * p1),
            "log_p11": np.log(p1 + phi * q1),
            "log_1mp11": l1mphi + log_q1,
        }
    tables["p1"] = p1
    tables["q1"] = q1
    return tables


_COUNT_COLUMNS = (
    (0, "log_q1"),
    (1, "log_p1"),
    (2, "log_1mp10"),
    (3, "log_p10"),
    (4, "log_1mp11"),
    (5, "log_p11"),
)


def _network_total(counts: np.ndarray, tables: dict) -> float:
    total = 0.0
    for col, key in _COUNT_COLUMNS:
        c = counts[:, col]
        lv = tables[key]
        total += float(np.where(c > 0, c * lv, 0.0).sum())
    return total


def _movement_total(move_logdet, move_quad, move_m, sigma2: float) -> float:
    # fixed ascending-time summation so totals are reproducible
    total = 0.0
    log_norm = LOG_2PI + math.log(sigma2)
    for t in range(1, move_m.shape[0]):
        m = move_m[t]
        if m:
            total += move_logdet[t] - m * log_norm - move_quad[t] / (2.0 * sigma2)
    return total


class ChainState:
    """Current parameter values, edge states, and the caches that make
    updates cheap (per-step Gaussian statistics and per-time edge-transition
    counts, kept consistent on every accepted move)."""

    def __init__(self, fitdata: FitData, covariates, priors: PriorSpec, config, rng):
        self.fd = fitdata
        self.X = np.asarray(covariates, dtype=float)
        if self.X.ndim != 2 or self.X.shape[0] != fitdata.T:
            raise ValueError(
                f"covariates must be (T, P) with T={fitdata.T}, got {self.X.shape}"
            )
        self.P = self.X.shape[1]
        self.priors = priors
        self.sigma_scale = (
            priors.sigma_scale
            if priors.sigma_scale is not None
            else 5.0 * fitdata.median_step if fitdata.median_step > 0 else 5.0
        )

        self.delta_alpha = np.zeros(self.P)
        self.delta_beta = np.zeros(self.P)
        self.delta_p = np.zeros(self.P)
        self.sigma2 = fitdata.mean_sq_step if fitdata.mean_sq_step > 0 else 1.0
        self.phi = 0.5

        K = fitdata.n_pairs
        if config.initial_edges is not None:
            w = np.asarray(config.initial_edges, dtype=np.int8).copy()
            if w.shape != (K,):
                raise ValueError(f"initial_edges must have shape ({K},)")
        else:
            w = (rng.random(K) < 0.5).astype(np.int8)
        self.w = w

        self.alphas = inv_logit(self.X @ self.delta_alpha)
        self.betas = inv_logit(self.X @ self.delta_beta)
        self.zp = self.X @ self.delta_p
        self.tables = _network_tables(self.zp, self.phi)

        self.counts = self._init_counts()
        self.move_logdet = np.zeros(fitdata.T)
        self.move_quad = np.zeros(fitdata.T)
        self._refresh_move_stats()

        self.scales = dict(DEFAULT_SCALES)
        self.scales.update(config.proposal_scales or {})
        self.accept_count = {b: 0 for b in BLOCKS}
        self.attempt_count = {b: 0 for b in BLOCKS}
        self._adapt_n = {b: 0 for b in BLOCKS}

    def _init_counts(self) -> np.ndarray:
        fd = self.fd
        counts = np.zeros((fd.T, 6), dtype=np.int64)
        if fd.n_pairs == 0:
            return counts
        stat = fd.pair_stationary
        if stat.any():
            np.add.at(
                counts, (fd.pair_time[stat], self.w[stat].astype(np.int64)), 1
            )
        nonstat = ~stat
        if nonstat.any():
            wp = self.w[fd.pair_prev[nonstat]].astype(np.int64)
            code = 2 + 2 * wp + self.w[nonstat].astype(np.int64)
            np.add.at(counts, (fd.pair_time[nonstat], code), 1)
        return counts

    def _refresh_move_stats(self, alphas=None, betas=None, out_ld=None, out_qd=None):
        fd = self.fd
        a = self.alphas if alphas is None else alphas
        b = self.betas if betas is None else betas
        ld = self.move_logdet if out_ld is None else out_ld
        qd = self.move_quad if out_qd is None else out_qd
        _recompute_move_stats(
            self.w,
            fd.pos,
            fd.move_m,
            fd.move_member_offsets,
            fd.move_prev_rows,
            fd.move_cur_rows,
            fd.medge_offsets,
            fd.medge_i,
            fd.medge_j,
            fd.medge_src,
            np.asarray(a, dtype=float),
            np.asarray(b, dtype=float),
            ld,
            qd,
        )

    # --- log posterior pieces -------------------------------------------------

    def movement_total(self, sigma2=None) -> float:
        return _movement_total(
            self.move_logdet,
            self.move_quad,
            self.fd.move_m,
            self.sigma2 if sigma2 is None else sigma2,
        )

    def network_total(self, tables=None) -> float:
        return _network_total(self.counts, self.tables if tables is None else tables)

    def log_prior(self) -> float:
        sd2 = self.priors.coef_sd**2
        coefs = (
            self.delta_alpha @ self.delta_alpha
            + self.delta_beta @ self.delta_beta
            + self.delta_p @ self.delta_p
        )
        sigma = math.sqrt(self.sigma2)
        return -0.5 * coefs / sd2 - self.sigma2 / (2.0 * self.sigma_scale**2) - math.log(sigma)

    def log_posterior(self) -> float:
        return self.movement_total() + self.network_total() + self.log_prior()

    def params(self) -> ModelParams:
        return ModelParams(
            GlmCoefficients(
                self.delta_alpha.copy(), self.delta_beta.copy(), self.delta_p.copy()
            ),
            self.sigma2,
            self.phi,
        )

    def param_vector(self) -> np.ndarray:
        return np.concatenate(
            [self.delta_alpha, self.delta_beta, self.delta_p, [self.sigma2, self.phi]]
        )

    # --- edge diagnostics ------------------------------------------------------

    def edge_conditional_prob(self, g: int) -> float:
        """Exact full-conditional P(w_g = 1 | everything else)."""
        fd = self.fd
        t = int(fd.pair_time[g])
        tb = self.tables
        logodds = 0.0
        if fd.pair_stationary[g]:
            logodds += tb["log_p1"][t] - tb["log_q1"][t]
        else:
            if self.w[fd.pair_prev[g]] == 1:
                logodds += tb["log_p11"][t] - tb["log_1mp11"][t]
            else:
                logodds += tb["log_p10"][t] - tb["log_1mp10"][t]
        ns = fd.pair_next[g]
        if ns >= 0:
            if self.w[ns] == 1:
                logodds += tb["log_p11"][t + 1] - tb["log_p10"][t + 1]
            else:
                logodds += tb["log_1mp11"][t + 1] - tb["log_1mp10"][t + 1]
        mp = fd.pair_move_pos[g]
        if mp >= 0:
            tt = t + 1
            m = int(fd.move_m[tt])
            args = (
                self.w,
                fd.pos,
                fd.move_m,
                fd.move_member_offsets,
                fd.move_prev_rows,
                fd.move_cur_rows,
                fd.medge_offsets,
                fd.medge_i,
                fd.medge_j,
                fd.medge_src,
                float(self.alphas[t]),
                float(self.betas[t]),
            )
            ld_c, qd_c = _step_stats_state(tt, *args, -1)
            ld_f, qd_f = _step_stats_state(tt, *args, mp)
            log_norm = LOG_2PI + math.log(self.sigma2)
            term_cur = ld_c - m * log_norm - qd_c / (2.0 * self.sigma2)
            term_flip = ld_f - m * log_norm - qd_f / (2.0 * self.sigma2)
            if self.w[g] == 1:
                logodds += term_cur - term_flip
            else:
                logodds += term_flip - term_cur
        return float(inv_logit(logodds))


def gibbs_update_edges(state: ChainState, rng) -> ChainState:
    """Redraw every scored edge from its exact full conditional, in scan order."""
    fd = state.fd
    uniforms = rng.random(fd.n_pairs)
    if fd.n_pairs == 0:
        return state
    tb = state.tables
    _edge_sweep(
        state.w,
        state.counts,
        state.move_logdet,
        state.move_quad,
        fd.pair_offsets,
        fd.pair_stationary,
        fd.pair_prev,
        fd.pair_next,
        fd.pair_move_pos,
        fd.move_m,
        fd.move_member_offsets,
        fd.move_prev_rows,
        fd.move_cur_rows,
        fd.medge_offsets,
        fd.medge_i,
        fd.medge_j,
        fd.medge_src,
        fd.pos,
        tb["log_p1"],
        tb["log_q1"],
        tb["log_p10"],
        tb["log_1mp10"],
        tb["log_p11"],
        tb["log_1mp11"],
        state.alphas,
        state.betas,
        state.sigma2,
        uniforms,
    )
    return state


def _block_log_ratio(state: ChainState, block: str, z):
    """Log acceptance ratio and the payload needed to apply the move."""
    scale = state.scales[block]
    sd2 = state.priors.coef_sd**2
    if block == "delta_alpha" or block == "delta_beta":
        cur = state.delta_alpha if block == "delta_alpha" else state.delta_beta
        prop = cur + scale * z
        if block == "delta_alpha":
            alphas = inv_logit(state.X @ prop)
            betas = state.betas
        else:
            alphas = state.alphas
            betas = inv_logit(state.X @ prop)
        ld = np.zeros(state.fd.T)
        qd = np.zeros(state.fd.T)
        state._refresh_move_stats(alphas=alphas, betas=betas, out_ld=ld, out_qd=qd)
        new_total = _movement_total(ld, qd, state.fd.move_m, state.sigma2)
        logr = (
            new_total
            - state.movement_total()
            - 0.5 * (prop @ prop - cur @ cur) / sd2
        )
        return logr, (prop, alphas, betas, ld, qd)
    if block == "delta_p":
        prop = state.delta_p + scale * z
        zp = state.X @ prop
        tables = _network_tables(zp, state.phi)
        logr = (
            state.network_total(tables)
            - state.network_total()
            - 0.5 * (prop @ prop - state.delta_p @ state.delta_p) / sd2
        )
        return logr, (prop, zp, tables)
    if block == "sigma2":
        v = state.sigma2
        v_new = math.exp(math.log(v) + scale * z)
        s2 = state.sigma_scale**2
        logr = (
            state.movement_total(v_new)
            - state.movement_total()
            - (v_new - v) / (2.0 * s2)
            + 0.5 * (math.log(v_new) - math.log(v))
        )
        return logr, v_new
    if block == "phi":
        y = math.log(state.phi) - math.log1p(-state.phi)
        phi_new = float(inv_logit(y + scale * z))
        tables = _network_tables(state.zp, phi_new)
        logr = (
            state.network_total(tables)
            - state.network_total()
            + math.log(phi_new) + math.log1p(-phi_new)
            - math.log(state.phi) - math.log1p(-state.phi)
        )
        return logr, (phi_new, tables)
    raise ValueError(f"unknown block {block!r}")


def _apply_block(state: ChainState, block: str, payload):
    if block == "delta_alpha" or block == "delta_beta":
        prop, alphas, betas, ld, qd = payload
        if block == "delta_alpha":
            state.delta_alpha = prop
        else:
            state.delta_beta = prop
        state.alphas = alphas
        state.betas = betas
        state.move_logdet = ld
        state.move_quad = qd
    elif block == "delta_p":
        prop, zp, tables = payload
        state.delta_p = prop
        state.zp = zp
        state.tables = tables
    elif block == "sigma2":
        state.sigma2 = payload
    elif block == "phi":
        state.phi, state.tables = payload


def metropolis_update_block(state: ChainState, block: str, rng, adapt=False) -> ChainState:
    """One Gaussian random-walk update of a continuous block.

    Proposals live on the unconstrained scale; the acceptance ratio carries
    the matching Jacobian terms. When ``adapt`` is set the proposal scale is
    nudged toward the target acceptance rate.
    """
    dim = state.P if block.startswith("delta") else 1
    z = rng.standard_normal(dim) if dim > 1 else float(rng.standard_normal())
    u = float(rng.random())
    logr, payload = _block_log_ratio(state, block, z)
    accept = math.log(max(u, 1e-300)) < logr
    if accept:
        _apply_block(state, block, payload)
        state.accept_count[block] += 1
    state.attempt_count[block] += 1
    if adapt:
        state._adapt_n[block] += 1
        n = state._adapt_n[block]
        gamma = min(0.25, n**-0.6)
        acc_prob = min(1.0, math.exp(logr)) if logr < 50 else 1.0
        state.scales[block] = float(
            state.scales[block] * math.exp(gamma * (acc_prob - 0.44))
        )
    return state


@dataclass
class PosteriorSamples:
    """Retained draws plus optional per-iteration edge states."""

    draws: np.ndarray  # (n_kept, 11)
    param_names: tuple
    T: int
    acceptance: dict
    meta: dict
    edge_draws: np.ndarray | None = None  # (n_kept, n_pairs) int8
    pair_offsets: np.ndarray | None = None
    pair_time: np.ndarray | None = None

    @property
    def n_draws(self) -> int:
        return self.draws.shape[0]

    def column(self, name: str) -> np.ndarray:
        return self.draws[:, self.param_names.index(name)]

    def median(self) -> np.ndarray:
        return np.median(self.draws, axis=0)

    def credible_interval(self, level: float = 0.95) -> np.ndarray:
        """Equal-tailed intervals, one (low, high) row per parameter."""
        tail = (1.0 - level) / 2.0
        return np.quantile(self.draws, [tail, 1.0 - tail], axis=0).T


def run_chain(
    data, covariates, priors: PriorSpec | None = None, config: SamplerConfig | None = None
) -> PosteriorSamples:
    """Run one MCMC chain on complete trajectories or an MLMD dataset.

    The sweep order is fixed (edges, then each continuous block) and the
    whole run is a deterministic function of the config seed. Raises
    SamplerInitError when the starting log posterior is not finite.
    """
    config = config or SamplerConfig()
    config.validate()
    priors = priors or PriorSpec()
    if isinstance(data, FitData):
        fd = data
    elif isinstance(data, MlmdDataset):
        fd = FitData.from_mlmd(data)
    elif isinstance(data, TrajectorySet):
        fd = FitData.from_trajectories(data)
    else:
        raise TypeError(f"cannot fit data of type {type(data).__name__}")

    rng = np.random.default_rng(config.seed)
    state = ChainState(fd, covariates, priors, config, rng)
    lp0 = state.log_posterior()
    if not math.isfinite(lp0):
        raise SamplerInitError(
            "initial log posterior is not finite "
            f"(movement={state.movement_total():.3g}, "
            f"network={state.network_total():.3g}, prior={state.log_prior():.3g}); "
            "check the input data for non-finite positions"
        )

    blocks = tuple(b for b in BLOCKS if b in config.update_blocks)
    n_keep = (config.iterations - config.burn_in) // config.thin
    draws = np.empty((n_keep, len(PARAM_NAMES)))
    edge_draws = (
        np.empty((n_keep, fd.n_pairs), dtype=np.int8)
        if config.store_edge_draws
        else None
    )
    kept = 0
    for it in range(config.iterations):
        if config.update_edges:
            gibbs_update_edges(state, rng)
        adapting = config.adapt and it < config.burn_in
        for block in blocks:
            metropolis_update_block(state, block, rng, adapt=adapting)
        if it >= config.burn_in and (it - config.burn_in) % config.thin == 0:
            draws[kept] = state.param_vector()
            if edge_draws is not None:
                edge_draws[kept] = state.w
            kept += 1

    acceptance = {
        b: (state.accept_count[b] / state.attempt_count[b])
        if state.attempt_count[b]
        else float("nan")
        for b in blocks
    }
    meta = {
        "likelihood": "complete" if fd.is_fully_observed() else "proxy",
        "sigma_scale": state.sigma_scale,
        "initial_sigma2": fd.mean_sq_step if fd.mean_sq_step > 0 else 1.0,
        "iterations": config.iterations,
        "burn_in": config.burn_in,
        "thin": config.thin,
        "seed": config.seed,
        "final_scales": dict(state.scales),
        "proxy_time_convention": "previous-step network restricted to returners",
    }
    return PosteriorSamples(
        draws=draws,
        param_names=PARAM_NAMES,
        T=fd.T,
        acceptance=acceptance,
        meta=meta,
        edge_draws=edge_draws,
        pair_offsets=fd.pair_offsets.copy() if config.store_edge_draws else None,
        pair_time=fd.pair_time.copy() if config.store_edge_draws else None,
    )
