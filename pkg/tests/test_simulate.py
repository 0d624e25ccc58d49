import numpy as np
import pytest

import socmove as sm
from conftest import small_trajectories


def _const_params(sigma2=1.0, phi=0.5, p_intercept=0.0, ab_intercept=30.0):
    # huge alpha/beta intercepts give near-complete attraction/alignment
    return sm.ModelParams(
        sm.GlmCoefficients(
            [ab_intercept, 0.0, 0.0], [ab_intercept, 0.0, 0.0], [p_intercept, 0.0, 0.0]
        ),
        sigma2,
        phi,
    )


def test_single_individual_is_random_walk():
    T = 4000
    cov = sm.phase_covariates(T, T // 3 + 1, 2 * (T // 3) + 1)
    params = sm.ModelParams(
        sm.GlmCoefficients([2.0, 1.0, 0.5], [2.0, 1.0, 0.5], [2.0, 1.0, 0.5]), 1.5, 0.8
    )
    traj = sm.simulate_trajectories(1, T, params, cov, rng=np.random.default_rng(0))
    steps = np.diff(traj.positions[:, 0, :], axis=0)
    assert abs(steps.mean()) < 0.05
    assert steps.var() == pytest.approx(1.5, rel=0.08)


def test_attraction_collapses_to_centroid():
    # near-complete static graph, near-one attraction, tiny noise
    T, J = 12, 4
    cov = np.column_stack([np.ones(T), np.zeros(T), np.zeros(T)])
    params = _const_params(sigma2=1e-10, phi=1.0, p_intercept=30.0)
    init = np.array([[10.0, 0.0], [-10.0, 0.0], [0.0, 10.0], [0.0, -10.0]])
    traj = sm.simulate_trajectories(J, T, params, cov, init=init, rng=np.random.default_rng(1))
    dev0 = np.linalg.norm(init - init.mean(axis=0), axis=1).max()
    devT = np.linalg.norm(
        traj.positions[-1] - traj.positions[-1].mean(axis=0), axis=1
    ).max()
    assert devT < dev0 * 1e-4


def test_step_covariance_matches_precision_inverse():
    # complete static network; many replicates of a single step from a fixed frame
    J = 3
    cov = np.column_stack([np.ones(2), np.zeros(2), np.zeros(2)])
    params = _const_params(sigma2=0.9, phi=1.0, p_intercept=30.0, ab_intercept=0.5)
    alpha = beta = sm.glm_value([1.0, 0.0, 0.0], [0.5, 0.0, 0.0])
    init = np.array([[1.0, 2.0], [-1.0, 0.5], [0.0, -2.0]])
    W = np.ones((J, J))
    A = sm.build_propagator(W, beta)
    target = 0.9 * np.linalg.inv(sm.build_precision(W, alpha))
    n_rep = 800
    resid = np.empty((n_rep, J, 2))
    for r in range(n_rep):
        traj = sm.simulate_trajectories(
            J, 2, params, cov, init=init, rng=np.random.default_rng(1000 + r)
        )
        assert np.array_equal(traj.network[0], W)  # p1 ~ 1 forces the complete graph
        resid[r] = traj.positions[1] - A @ init
    for ax in range(2):
        emp = np.cov(resid[:, :, ax].T)
        np.testing.assert_allclose(emp, target, atol=0.15)


def test_simulate_trajectories_validation():
    cov = np.column_stack([np.ones(2), np.zeros(2), np.zeros(2)])
    params = _const_params()
    with pytest.raises(ValueError):
        sm.simulate_trajectories(2, 1, params, cov)
    with pytest.raises(ValueError):
        sm.simulate_trajectories(2, 2, params, cov, init=np.zeros((3, 2)))
    with pytest.raises(ValueError):
        sm.simulate_trajectories(
            2, 2, params, cov, init=np.array([[np.nan, 0.0], [0.0, 0.0]])
        )


def test_censoring_long_runs_fully_observed():
    pattern = sm.simulate_censoring(3, 50, 1e6, 5.0, 1.0, rng=np.random.default_rng(2))
    assert pattern.observed.all()
    assert all(len(e) == 1 and e[0] == 0 for e in pattern.entry_times)


def test_censoring_never_observed():
    pattern = sm.simulate_censoring(2, 30, 5.0, 1e6, 0.0, rng=np.random.default_rng(3))
    assert not pattern.observed.any()
    assert all(len(e) == 0 for e in pattern.entry_times)


def test_censoring_stationary_fraction():
    pattern = sm.simulate_censoring(5, 3000, 10.0, 10.0, 0.5, rng=np.random.default_rng(4))
    frac = pattern.observed.mean()
    assert abs(frac - 0.5) < 0.02


def test_censoring_independent_across_individuals():
    # run lengths of mean 8 leave ~T/16 independent cycles; at T=20000 the
    # cross-correlation standard error is ~0.03
    pattern = sm.simulate_censoring(4, 20000, 8.0, 8.0, 0.5, rng=np.random.default_rng(5))
    m = pattern.observed.astype(float)
    c = np.corrcoef(m.T)
    off = c[np.triu_indices(4, k=1)]
    assert np.abs(off).max() < 0.06


def test_censoring_runs_never_empty():
    # small means would often draw 0; the redraw rule keeps every run >= 1
    pattern = sm.simulate_censoring(3, 200, 0.2, 0.2, 0.5, rng=np.random.default_rng(6))
    for j in range(3):
        col = pattern.observed[:, j].astype(int)
        changes = np.flatnonzero(np.diff(col))
        runs = np.diff(np.concatenate([[-1], changes, [199]]))
        assert (runs >= 1).all()


def test_censoring_entry_times_match_mask():
    pattern = sm.simulate_censoring(4, 100, 4.0, 6.0, 0.5, rng=np.random.default_rng(7))
    for j in range(4):
        col = pattern.observed[:, j]
        starts = [t for t in range(100) if col[t] and (t == 0 or not col[t - 1])]
        assert pattern.entry_times[j].tolist() == starts


def test_multilabeling_bijection_without_censoring():
    traj, _, _ = small_trajectories(J=4, T=8, seed=11)
    data = sm.apply_multilabeling(traj, sm.fully_observed_pattern(4, 8))
    assert len(data.label_map) == 4
    assert sorted(data.label_map.values()) == [0, 1, 2, 3]
    assert len(data) == 32


def test_multilabeling_two_runs_same_individual():
    traj, _, _ = small_trajectories(J=1, T=10, seed=12)
    observed = np.ones((10, 1), dtype=bool)
    observed[4:6, 0] = False
    pattern = sm.CensoringPattern(observed, [np.array([0, 6])])
    data = sm.apply_multilabeling(traj, pattern)
    assert len(data.label_map) == 2
    assert set(data.label_map.values()) == {0}


def test_multilabeling_label_count_equals_entry_count():
    traj, _, _ = small_trajectories(J=5, T=40, seed=13)
    pattern = sm.simulate_censoring(5, 40, 5.0, 5.0, 0.5, rng=np.random.default_rng(8))
    data = sm.apply_multilabeling(traj, pattern)
    n_entries = sum(len(e) for e in pattern.entry_times)
    assert len(data.label_map) == n_entries


def test_multilabeling_positions_exact_and_runs_maximal():
    traj, _, _ = small_trajectories(J=4, T=30, seed=14)
    pattern = sm.simulate_censoring(4, 30, 6.0, 4.0, 0.5, rng=np.random.default_rng(9))
    data = sm.apply_multilabeling(traj, pattern)
    runs = {}
    for t, lab, x, y in data.records():
        j = data.label_map[lab]
        assert x == traj.positions[t, j, 0] and y == traj.positions[t, j, 1]
        lo, hi = runs.get(lab, (t, t))
        runs[lab] = (min(lo, t), max(hi, t))
    by_individual = {}
    for lab, (lo, hi) in runs.items():
        by_individual.setdefault(data.label_map[lab], []).append((lo, hi))
    for j, spans in by_individual.items():
        spans.sort()
        for (lo1, hi1), (lo2, hi2) in zip(spans, spans[1:]):
            assert lo2 > hi1 + 1  # a gap of at least one step separates runs


def test_seeded_determinism_end_to_end():
    traj1, cov, params = small_trajectories(J=3, T=20, seed=21)
    traj2, _, _ = small_trajectories(J=3, T=20, seed=21)
    np.testing.assert_array_equal(traj1.positions, traj2.positions)
    np.testing.assert_array_equal(traj1.network.frames, traj2.network.frames)
    p1 = sm.simulate_censoring(3, 20, 4.0, 4.0, 0.5, rng=np.random.default_rng(5))
    p2 = sm.simulate_censoring(3, 20, 4.0, 4.0, 0.5, rng=np.random.default_rng(5))
    np.testing.assert_array_equal(p1.observed, p2.observed)
    d1 = sm.apply_multilabeling(traj1, p1)
    d2 = sm.apply_multilabeling(traj2, p2)
    np.testing.assert_array_equal(d1.times, d2.times)
    np.testing.assert_array_equal(d1.labels, d2.labels)
    np.testing.assert_array_equal(d1.positions, d2.positions)


def test_default_initial_positions_on_disc():
    init = sm.simulate.default_initial_positions(500, 4.0, np.random.default_rng(3))
    radii = np.linalg.norm(init, axis=1)
    assert radii.max() <= 10.0  # 5 * sqrt(4)
    assert radii.max() > 8.0  # actually fills the disc
