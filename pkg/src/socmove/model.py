"""Core movement-model math.

Positions of J individuals evolve as a discrete-time Gaussian process whose
mean pulls each individual toward the average position of its social
neighbors (attraction) and whose precision matrix couples the displacements
of connected individuals (alignment). Both behavior strengths, and the
marginal edge probability of the network, are logit-linear in time-varying
covariates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

try:
    from numba import njit
except ImportError:  # pragma: no cover - numba is a hard dependency, shim for safety
    def njit(*args, **kwargs):
        if len(args) == 1 and callable(args[0]):
            return args[0]

        def wrap(func):
            return func

        return wrap


LOG_2PI = math.log(2.0 * math.pi)


def inv_logit(z):
    """Numerically stable logistic function, scalar or array."""
    z = np.asarray(z, dtype=float)
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    if out.ndim == 0:
        return float(out)
    return out


def log_inv_logit(z):
    """log(inv_logit(z)) without overflow for large |z|."""
    z = np.asarray(z, dtype=float)
    return -np.logaddexp(0.0, -z)


def glm_value(x, delta) -> float:
    """Inverse-logit of x'delta; strictly inside (0, 1).

    Raises ValueError when the covariate vector and coefficient vector
    disagree in length.
    """
    x = np.asarray(x, dtype=float)
    delta = np.asarray(delta, dtype=float)
    if x.shape != delta.shape or x.ndim != 1:
        raise ValueError(
            f"covariate/coefficient length mismatch: {x.shape} vs {delta.shape}"
        )
    return float(inv_logit(float(x @ delta)))


def behavior_profile(covariates, delta) -> np.ndarray:
    """Per-time GLM values inv_logit(X @ delta) for a (T, P) covariate matrix."""
    covariates = np.asarray(covariates, dtype=float)
    delta = np.asarray(delta, dtype=float)
    if covariates.ndim != 2 or covariates.shape[1] != delta.shape[0]:
        raise ValueError(
            f"covariate matrix {covariates.shape} incompatible with coefficients {delta.shape}"
        )
    return inv_logit(covariates @ delta)


def phase_covariates(T: int, during_start: int, after_start: int) -> np.ndarray:
    """Intercept + during/after indicator design, times 1..T.

    ``during_start`` and ``after_start`` are 1-based time indices marking the
    first during-exposure step and the first after-exposure step.
    """
    if not (1 <= during_start < after_start <= T):
        raise ValueError(
            f"phase boundaries must satisfy 1 <= during ({during_start}) "
            f"< after ({after_start}) <= T ({T})"
        )
    t = np.arange(1, T + 1)
    x = np.zeros((T, 3))
    x[:, 0] = 1.0
    x[:, 1] = (t >= during_start) & (t < after_start)
    x[:, 2] = t >= after_start
    return x


def validate_adjacency(W) -> np.ndarray:
    """Check symmetry and unit diagonal; returns the matrix as float64."""
    W = np.asarray(W, dtype=float)
    if W.ndim != 2 or W.shape[0] != W.shape[1]:
        raise ValueError(f"adjacency matrix must be square, got {W.shape}")
    if not np.array_equal(W, W.T):
        raise ValueError("adjacency matrix must be symmetric")
    if not np.all(np.diag(W) == 1):
        raise ValueError("adjacency matrix must have unit diagonal (self-edges)")
    if not np.isin(W, (0.0, 1.0)).all():
        raise ValueError("adjacency entries must be 0 or 1")
    return W


def ego_sizes(W) -> np.ndarray:
    """Row sums of the adjacency matrix, self-edge included."""
    W = np.asarray(W, dtype=float)
    return W.sum(axis=1).astype(int)


def build_precision(W, alpha: float) -> np.ndarray:
    """Precision matrix: ego sizes on the diagonal, -alpha * w_ij off it.

    Strictly diagonally dominant for alpha in [0, 1), hence symmetric
    positive definite.
    """
    W = np.asarray(W, dtype=float)
    Q = -alpha * W
    np.fill_diagonal(Q, W.sum(axis=1))
    return Q


def neighbor_mean(W, mu) -> np.ndarray:
    """Average position of each individual's neighbors (self included)."""
    W = np.asarray(W, dtype=float)
    mu = np.asarray(mu, dtype=float)
    wplus = W.sum(axis=1)
    return (W @ mu) / wplus[:, None]


def build_propagator(W, beta: float) -> np.ndarray:
    """Row-stochastic one-step mean map: (1 - beta) I + beta * row-normalized W."""
    W = np.asarray(W, dtype=float)
    wplus = W.sum(axis=1)
    A = beta * (W / wplus[:, None])
    A[np.diag_indices_from(A)] += 1.0 - beta
    return A


@njit(cache=True)
def _pair_step_stats(m, edge_i, edge_j, edge_w, mu_prev, mu_cur, alpha, beta):
    """(log|Q|, quadratic form) of one Gaussian transition, network as pair list.

    ``edge_i``/``edge_j`` index the off-diagonal pairs of an m-node network
    whose states are in ``edge_w``; ``mu_prev``/``mu_cur`` are (m, 2) position
    blocks. Returns the log determinant of the precision matrix and
    sum_axes r' Q r with r = mu_cur - A mu_prev. The sigma^2 scaling is
    applied by the caller.
    """
    W = np.eye(m)
    for k in range(edge_i.shape[0]):
        if edge_w[k]:
            W[edge_i[k], edge_j[k]] = 1.0
            W[edge_j[k], edge_i[k]] = 1.0
    wplus = np.zeros(m)
    for i in range(m):
        s = 0.0
        for j in range(m):
            s += W[i, j]
        wplus[i] = s
    Q = -alpha * W
    A = np.empty((m, m))
    for i in range(m):
        inv = 1.0 / wplus[i]
        for j in range(m):
            A[i, j] = beta * W[i, j] * inv
        A[i, i] += 1.0 - beta
        Q[i, i] = wplus[i]
    L = np.linalg.cholesky(Q)
    logdet = 0.0
    for i in range(m):
        logdet += 2.0 * math.log(L[i, i])
    r = mu_cur - A @ mu_prev
    quad = 0.0
    qr = Q @ r
    for i in range(m):
        quad += r[i, 0] * qr[i, 0] + r[i, 1] * qr[i, 1]
    return logdet, quad


def gaussian_step_stats(W, mu_prev, mu_cur, alpha: float, beta: float):
    """(log|Q|, quadratic form) for a dense adjacency matrix; see _pair_step_stats."""
    W = np.asarray(W, dtype=float)
    m = W.shape[0]
    iu, ju = np.triu_indices(m, k=1)
    edge_w = W[iu, ju].astype(np.int8)
    return _pair_step_stats(
        m,
        iu.astype(np.int64),
        ju.astype(np.int64),
        edge_w,
        np.ascontiguousarray(mu_prev, dtype=float),
        np.ascontiguousarray(mu_cur, dtype=float),
        float(alpha),
        float(beta),
    )


def transition_log_density(mu_t, mu_prev, W_prev, alpha, beta, sigma2) -> float:
    """Log density of one position frame given the previous frame and network.

    The two coordinate axes are independent given the network, so the
    density is a product of two J-dimensional Gaussians sharing the same
    precision matrix Q / sigma2 and mean map A.
    """
    if sigma2 <= 0:
        raise ValueError(f"sigma2 must be positive, got {sigma2}")
    mu_t = np.asarray(mu_t, dtype=float)
    mu_prev = np.asarray(mu_prev, dtype=float)
    m = mu_t.shape[0]
    logdet, quad = gaussian_step_stats(W_prev, mu_prev, mu_t, alpha, beta)
    return logdet - m * (LOG_2PI + math.log(sigma2)) - quad / (2.0 * sigma2)


@dataclass
class GlmCoefficients:
    """Logit-scale coefficient vectors for alignment, attraction, edge density."""

    delta_alpha: np.ndarray
    delta_beta: np.ndarray
    delta_p: np.ndarray

    def __post_init__(self):
        self.delta_alpha = np.asarray(self.delta_alpha, dtype=float)
        self.delta_beta = np.asarray(self.delta_beta, dtype=float)
        self.delta_p = np.asarray(self.delta_p, dtype=float)
        if not (
            self.delta_alpha.shape == self.delta_beta.shape == self.delta_p.shape
        ) or self.delta_alpha.ndim != 1:
            raise ValueError("coefficient vectors must share a common length")

    @property
    def n_covariates(self) -> int:
        return self.delta_alpha.shape[0]


@dataclass
class ModelParams:
    """Full parameter set: GLM coefficients plus step variance and edge stability."""

    coefficients: GlmCoefficients
    sigma2: float
    phi: float

    def __post_init__(self):
        if self.sigma2 <= 0:
            raise ValueError(f"sigma2 must be positive, got {self.sigma2}")
        if not 0.0 <= self.phi <= 1.0:
            raise ValueError(f"phi must lie in [0, 1], got {self.phi}")

    def as_vector(self) -> np.ndarray:
        """Flat 11-vector: delta_alpha, delta_beta, delta_p, sigma2, phi."""
        c = self.coefficients
        return np.concatenate(
            [c.delta_alpha, c.delta_beta, c.delta_p, [self.sigma2, self.phi]]
        )


PARAM_NAMES = (
    "delta_alpha_1",
    "delta_alpha_2",
    "delta_alpha_3",
    "delta_beta_1",
    "delta_beta_2",
    "delta_beta_3",
    "delta_p_1",
    "delta_p_2",
    "delta_p_3",
    "sigma2",
    "phi",
)
