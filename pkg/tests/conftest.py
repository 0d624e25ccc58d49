import numpy as np
import pytest

import socmove as sm
from socmove.study import PHI_STUDY


def random_adjacency(rng, J):
    """Random symmetric 0/1 matrix with unit diagonal."""
    W = np.eye(J)
    iu, ju = np.triu_indices(J, k=1)
    bits = rng.random(iu.size) < 0.5
    W[iu[bits], ju[bits]] = 1.0
    W[ju[bits], iu[bits]] = 1.0
    return W


def random_grid_params(rng):
    """Coefficients drawn from the study's sign grid, sigma2=1, phi from the grid."""
    def block():
        return np.array([2.0, 1.0, 0.5]) * rng.choice([-1.0, 1.0], size=3)

    return sm.ModelParams(
        sm.GlmCoefficients(block(), block(), block()), 1.0, PHI_STUDY
    )


def small_trajectories(J=4, T=12, seed=0, params=None):
    if T >= 3:
        cov = sm.phase_covariates(T, T // 3 + 1, 2 * (T // 3) + 1)
    else:
        cov = np.column_stack([np.ones(T), np.zeros(T), np.zeros(T)])
    if params is None:
        params = sm.ModelParams(
            sm.GlmCoefficients([1.0, 0.5, -0.5], [0.5, 1.0, -1.0], [0.3, -0.4, 0.2]),
            0.8,
            0.6,
        )
    traj = sm.simulate_trajectories(J, T, params, cov, rng=np.random.default_rng(seed))
    return traj, cov, params


def edge_dicts_from_network(network, labels):
    """Per-time {(label_a, label_b): state} mirroring a full network."""
    J = network.J
    out = []
    for t in range(network.T):
        d = {}
        for i in range(J):
            for j in range(i + 1, J):
                a, b = labels[i], labels[j]
                key = (a, b) if a <= b else (b, a)
                d[key] = int(network[t][i, j])
        out.append(d)
    return out


def edge_dicts_from_fitdata(fd, w):
    """Per-time {(label_a, label_b): state} from a flat edge-state vector."""
    out = [dict() for _ in range(fd.T)]
    for g in range(fd.n_pairs):
        t = int(fd.pair_time[g])
        a = fd.labels[fd.pair_a[g]]
        b = fd.labels[fd.pair_b[g]]
        out[t][(a, b) if a <= b else (b, a)] = int(w[g])
    return out


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
