"""Generate complete trajectories and censored, relabeled observation sets.

The observation process alternates observed and missing runs per individual
with Poisson-distributed durations, and issues a fresh label every time an
individual re-enters view, so one individual may appear under several labels
over the study period. Positions are never perturbed: censoring removes and
relabels, nothing else.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import solve_triangular

from .model import ModelParams, behavior_profile, build_precision, build_propagator
from .network import DynamicNetwork, simulate_network


@dataclass
class TrajectorySet:
    """Complete, labeled positions plus the network and parameters behind them."""

    positions: np.ndarray  # (T, J, 2)
    network: DynamicNetwork
    params: ModelParams
    covariates: np.ndarray  # (T, P)

    @property
    def T(self) -> int:
        return self.positions.shape[0]

    @property
    def J(self) -> int:
        return self.positions.shape[1]


@dataclass
class CensoringPattern:
    """Per-individual observed/missing mask with the entry times of each run."""

    observed: np.ndarray  # (T, J) bool
    entry_times: list  # per individual, sorted 0-based times where a run starts

    @property
    def T(self) -> int:
        return self.observed.shape[0]

    @property
    def J(self) -> int:
        return self.observed.shape[1]


@dataclass
class MlmdDataset:
    """Censored observations as (time, label, position) records.

    ``label_map`` ties labels back to true individuals; it exists only for
    simulation validation and is never consulted by the inference code.
    """

    times: np.ndarray  # (n,) int, 0-based
    labels: np.ndarray  # (n,) str
    positions: np.ndarray  # (n, 2)
    T: int
    label_map: dict = field(default_factory=dict)

    def __len__(self) -> int:
        return self.times.shape[0]

    def records(self):
        for t, lab, xy in zip(self.times, self.labels, self.positions):
            yield int(t), str(lab), float(xy[0]), float(xy[1])


def default_initial_positions(J: int, sigma2: float, rng) -> np.ndarray:
    """J points uniform on a disc of radius 5 * sigma around the origin."""
    rng = np.random.default_rng(rng)
    radius = 5.0 * math.sqrt(sigma2)
    r = radius * np.sqrt(rng.random(J))
    theta = 2.0 * math.pi * rng.random(J)
    return np.column_stack([r * np.cos(theta), r * np.sin(theta)])


def simulate_trajectories(
    J: int,
    T: int,
    params: ModelParams,
    covariates,
    init=None,
    rng=None,
) -> TrajectorySet:
    """Draw a dynamic network and complete trajectories from the movement model.

    Each transition is Gaussian per coordinate axis with mean map and
    precision built from the previous frame's network and that step's
    behavior values. ``init`` defaults to a uniform draw on a disc scaled by
    the step standard deviation.
    """
    if T < 2:
        raise ValueError(f"T must be >= 2, got {T}")
    rng = np.random.default_rng(rng)
    covariates = np.asarray(covariates, dtype=float)
    coef = params.coefficients
    network = simulate_network(J, T, covariates, coef.delta_p, params.phi, rng)
    alphas = np.atleast_1d(behavior_profile(covariates, coef.delta_alpha))
    betas = np.atleast_1d(behavior_profile(covariates, coef.delta_beta))

    if init is None:
        init = default_initial_positions(J, params.sigma2, rng)
    init = np.asarray(init, dtype=float)
    if init.shape != (J, 2):
        raise ValueError(f"init must be ({J}, 2), got {init.shape}")
    if not np.all(np.isfinite(init)):
        raise ValueError("init positions must be finite")

    sigma = math.sqrt(params.sigma2)
    positions = np.empty((T, J, 2))
    positions[0] = init
    for t in range(1, T):
        W = network[t - 1].astype(float)
        A = build_propagator(W, betas[t - 1])
        Q = build_precision(W, alphas[t - 1])
        L = np.linalg.cholesky(Q)
        mean = A @ positions[t - 1]
        z = rng.standard_normal((J, 2))
        # x = mean + sigma * L^{-T} z has covariance sigma^2 Q^{-1} per axis
        noise = solve_triangular(L, z, lower=True, trans="T")
        positions[t] = mean + sigma * noise
    return TrajectorySet(positions, network, params, covariates)


def _draw_run_length(rng, lam: float) -> int:
    """Poisson(lam) duration, redrawn until >= 1 (zero-length runs are unobservable)."""
    while True:
        d = int(rng.poisson(lam))
        if d >= 1:
            return d


def simulate_censoring(
    J: int,
    T: int,
    lambda_obs: float,
    lambda_miss: float,
    p_init_observed: float = 0.5,
    rng=None,
) -> CensoringPattern:
    """Alternating observed/missing runs, independent across individuals."""
    if lambda_obs <= 0 or lambda_miss <= 0:
        raise ValueError("run-length means must be positive")
    if not 0.0 <= p_init_observed <= 1.0:
        raise ValueError(f"p_init_observed must lie in [0, 1], got {p_init_observed}")
    rng = np.random.default_rng(rng)
    observed = np.zeros((T, J), dtype=bool)
    entry_times = []
    for j in range(J):
        state = bool(rng.random() < p_init_observed)
        t = 0
        entries = []
        while t < T:
            lam = lambda_obs if state else lambda_miss
            run = min(_draw_run_length(rng, lam), T - t)
            if state:
                observed[t : t + run, j] = True
                entries.append(t)
            t += run
            state = not state
        entry_times.append(np.array(entries, dtype=int))
    return CensoringPattern(observed, entry_times)


def fully_observed_pattern(J: int, T: int) -> CensoringPattern:
    """Pattern under which every individual is observed at every step."""
    return CensoringPattern(
        np.ones((T, J), dtype=bool), [np.array([0]) for _ in range(J)]
    )


def apply_multilabeling(
    trajectories: TrajectorySet, pattern: CensoringPattern
) -> MlmdDataset:
    """Censor a trajectory set and relabel each observation run afresh.

    Labels are issued per (individual, run) in individual order; under zero
    censoring they are a bijection with the true individuals.
    """
    T, J = trajectories.T, trajectories.J
    if pattern.observed.shape != (T, J):
        raise ValueError(
            f"pattern shape {pattern.observed.shape} does not match data ({T}, {J})"
        )
    n_labels = sum(len(e) for e in pattern.entry_times)
    width = max(4, len(str(n_labels)))
    times, labels, coords = [], [], []
    label_map = {}
    counter = 0
    for j in range(J):
        col = pattern.observed[:, j]
        for start in pattern.entry_times[j]:
            end = start
            while end < T and col[end]:
                end += 1
            counter += 1
            lab = f"L{counter:0{width}d}"
            label_map[lab] = j
            for t in range(start, end):
                times.append(t)
                labels.append(lab)
                coords.append(trajectories.positions[t, j])
    order = np.lexsort((np.array(labels, dtype=object), np.array(times)))
    times = np.array(times, dtype=int)[order]
    labels = np.array(labels, dtype=object)[order]
    coords = np.array(coords, dtype=float)[order] if coords else np.zeros((0, 2))
    return MlmdDataset(times, labels, coords, T, label_map)
