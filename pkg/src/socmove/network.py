"""Latent dynamic social network: simulation and probability mass functions.

Each unordered pair of individuals carries an independent two-state Markov
chain whose stationary probability p1(t) is logit-linear in covariates and
whose persistence is controlled by a stability parameter phi (0 = a fresh
network every step, 1 = a frozen network). Under censoring, pairs involving
a newly appeared label are scored with the stationary distribution instead
of the transition kernel.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import behavior_profile, validate_adjacency

RETURNER_PAIR = "returner-pair"
NEWCOMER_PAIR = "newcomer-pair"


@dataclass(frozen=True)
class TransitionProbs:
    """One-step edge transition probabilities at a single time."""

    p_1given0: float
    p_1given1: float


def transition_probs(p1_t: float, phi: float) -> TransitionProbs:
    """Edge transition kernel with stationary distribution Bern(p1_t).

    p_1given0 = (1 - phi) * p1 and p_1given1 = 1 - (1 - phi) * (1 - p1), so
    phi = 0 gives independent redraws and phi = 1 a static network.
    """
    if not 0.0 < p1_t < 1.0:
        raise ValueError(f"p1 must lie strictly in (0, 1), got {p1_t}")
    if not 0.0 <= phi <= 1.0:
        raise ValueError(f"phi must lie in [0, 1], got {phi}")
    return TransitionProbs((1.0 - phi) * p1_t, 1.0 - (1.0 - phi) * (1.0 - p1_t))


def _log_bernoulli(w: int, p: float) -> float:
    if w:
        return math.log(p) if p > 0 else -math.inf
    return math.log1p(-p) if p < 1 else -math.inf


def edge_log_pmf_complete(w_t: int, w_prev, p1_t: float, phi: float) -> float:
    """Log pmf of one edge state under the fully observed network process.

    ``w_prev`` is None at the first time step, where the stationary
    Bernoulli(p1_t) law applies.
    """
    if w_prev is None:
        return _log_bernoulli(w_t, p1_t)
    tp = transition_probs(p1_t, phi)
    p = tp.p_1given1 if w_prev else tp.p_1given0
    return _log_bernoulli(w_t, p)


def proxy_edge_log_pmf(
    w_t: int, w_prev, membership: str, p1_t: float, phi: float
) -> float:
    """Log pmf of one observed edge under the censoring-aware surrogate law.

    Returner pairs (both labels seen at the previous step) keep the exact
    transition kernel; pairs involving a newcomer are scored with the
    stationary distribution. Pairs with an unobserved member must not be
    scored at all.
    """
    if membership == RETURNER_PAIR:
        if w_prev is None:
            raise ValueError("returner pair requires the previous edge state")
        return edge_log_pmf_complete(w_t, w_prev, p1_t, phi)
    if membership == NEWCOMER_PAIR:
        return _log_bernoulli(w_t, p1_t)
    raise ValueError(
        f"pair membership must be '{RETURNER_PAIR}' or '{NEWCOMER_PAIR}', "
        f"got {membership!r} (pairs with an unobserved member are never scored)"
    )


class DynamicNetwork:
    """Time-indexed sequence of symmetric adjacency matrices with self-edges."""

    def __init__(self, frames: np.ndarray):
        frames = np.asarray(frames)
        if frames.ndim != 3 or frames.shape[1] != frames.shape[2]:
            raise ValueError(f"frames must be (T, J, J), got {frames.shape}")
        for t in range(frames.shape[0]):
            validate_adjacency(frames[t])
        self.frames = frames.astype(np.int8)

    @property
    def T(self) -> int:
        return self.frames.shape[0]

    @property
    def J(self) -> int:
        return self.frames.shape[1]

    def __getitem__(self, t: int) -> np.ndarray:
        return self.frames[t]

    def edge_list(self):
        """Upper-triangle (t, i, j) triples of present edges, 0-based."""
        out = []
        iu, ju = np.triu_indices(self.J, k=1)
        for t in range(self.T):
            present = self.frames[t][iu, ju] == 1
            for i, j in zip(iu[present], ju[present]):
                out.append((t, int(i), int(j)))
        return out

    @classmethod
    def from_pair_states(cls, J: int, states: np.ndarray) -> "DynamicNetwork":
        """Build symmetric unit-diagonal frames from (T, n_pairs) i<j states."""
        T = states.shape[0]
        iu, ju = np.triu_indices(J, k=1)
        frames = np.zeros((T, J, J), dtype=np.int8)
        frames[:, np.arange(J), np.arange(J)] = 1
        frames[:, iu, ju] = states
        frames[:, ju, iu] = states
        return cls(frames)


def simulate_network(
    J: int, T: int, covariates, delta_p, phi: float, rng
) -> DynamicNetwork:
    """Draw a dynamic network of J individuals over T steps.

    The first frame is stationary; later frames follow the pairwise Markov
    kernel evaluated at the destination time's edge probability. Only the
    i < j states are simulated; frames are mirrored and given unit diagonal.
    """
    if T < 1:
        raise ValueError(f"T must be >= 1, got {T}")
    rng = np.random.default_rng(rng)
    p1 = np.atleast_1d(behavior_profile(covariates, delta_p))
    if p1.shape[0] != T:
        raise ValueError(f"covariate rows ({p1.shape[0]}) must equal T ({T})")
    n_pairs = J * (J - 1) // 2
    states = np.zeros((T, n_pairs), dtype=np.int8)
    states[0] = rng.random(n_pairs) < p1[0]
    for t in range(1, T):
        tp = transition_probs(p1[t], phi)
        p_stay = np.where(states[t - 1] == 1, tp.p_1given1, tp.p_1given0)
        states[t] = rng.random(n_pairs) < p_stay
    return DynamicNetwork.from_pair_states(J, states)


def proxy_network_log_pmf(
    edge_states, index, delta_p, phi: float, covariates
) -> float:
    """Total log pmf of all scored edges across the study period.

    ``edge_states`` is a per-time sequence of mappings from sorted label
    pairs to edge states, defined for every unordered pair of labels
    observed at that time. ``index`` is an ObservationIndex. Pairs at t = 1,
    and pairs involving a newcomer, are scored with the stationary law;
    returner pairs use the transition kernel from their previous state.
    """
    p1 = np.atleast_1d(behavior_profile(covariates, delta_p))
    total = 0.0
    for t in range(index.T):
        obs = index.obs[t]
        ret = set(index.ret[t])
        for a_i in range(len(obs)):
            for b_i in range(a_i + 1, len(obs)):
                a, b = obs[a_i], obs[b_i]
                key = (a, b) if a <= b else (b, a)
                w = edge_states[t][key]
                if t > 0 and a in ret and b in ret:
                    w_prev = edge_states[t - 1][key]
                    total += proxy_edge_log_pmf(w, w_prev, RETURNER_PAIR, p1[t], phi)
                else:
                    total += proxy_edge_log_pmf(w, None, NEWCOMER_PAIR, p1[t], phi)
    return total


def complete_network_log_pmf(network: DynamicNetwork, delta_p, phi, covariates) -> float:
    """Log pmf of a fully observed dynamic network."""
    p1 = np.atleast_1d(behavior_profile(covariates, delta_p))
    iu, ju = np.triu_indices(network.J, k=1)
    total = 0.0
    for t in range(network.T):
        cur = network[t][iu, ju]
        prev = network[t - 1][iu, ju] if t > 0 else None
        for k in range(cur.shape[0]):
            total += edge_log_pmf_complete(
                int(cur[k]), None if prev is None else int(prev[k]), p1[t], phi
            )
    return total
