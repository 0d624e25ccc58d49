"""Complete-data and censoring-aware movement likelihoods.

The complete likelihood multiplies one Gaussian transition density per time
step over all individuals. With censored, relabeled data the exact observed
likelihood is intractable, so each transition density is replaced by its
restriction to the labels observed at both ends of the step (the
"returners"), with the network sub-matrix and ego sizes recomputed within
that restricted set.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .model import ModelParams, behavior_profile, transition_log_density
from .network import DynamicNetwork
from .simulate import MlmdDataset, TrajectorySet


@dataclass
class ObservationIndex:
    """Per-time partition of observed labels into returners and newcomers.

    All lists are indexed 0..T-1; ``ret[t]`` holds labels observed at both
    t-1 and t (empty at t = 0 by convention) and ``new[t]`` the rest.
    """

    obs: list
    ret: list
    new: list
    T: int

    def n_obs(self, t: int) -> int:
        return len(self.obs[t])

    def n_ret(self, t: int) -> int:
        return len(self.ret[t])


def dataset_frames(data: MlmdDataset):
    """Per-time (sorted labels, positions) views of an MLMD dataset."""
    frames = [([], []) for _ in range(data.T)]
    for t, lab, xy in zip(data.times, data.labels, data.positions):
        frames[int(t)][0].append(str(lab))
        frames[int(t)][1].append(xy)
    out = []
    for labs, coords in frames:
        if labs:
            order = np.argsort(np.array(labs, dtype=object))
            labs = [labs[i] for i in order]
            coords = np.asarray(coords, dtype=float)[order]
        else:
            coords = np.zeros((0, 2))
        out.append((labs, coords))
    return out


def partition_observed(data: MlmdDataset, T: int) -> ObservationIndex:
    """Split the labels observed at each time into returners and newcomers."""
    frames = dataset_frames(data)
    if len(frames) != T:
        raise ValueError(f"dataset horizon {len(frames)} does not match T={T}")
    obs, ret, new = [], [], []
    prev = set()
    for t in range(T):
        labs = frames[t][0]
        cur = set(labs)
        r = sorted(cur & prev) if t > 0 else []
        obs.append(list(labs))
        ret.append(r)
        new.append(sorted(cur - set(r)))
        prev = cur
    return ObservationIndex(obs, ret, new, T)


def complete_log_likelihood(
    params: ModelParams, network: DynamicNetwork, positions, covariates
) -> float:
    """Log likelihood of fully observed trajectories given the network.

    Sums the Gaussian transition density over steps 2..T; the step into
    time t uses the network frame and behavior values at t-1.
    """
    positions = np.asarray(positions, dtype=float)
    T = positions.shape[0]
    coef = params.coefficients
    alphas = np.atleast_1d(behavior_profile(covariates, coef.delta_alpha))
    betas = np.atleast_1d(behavior_profile(covariates, coef.delta_beta))
    total = 0.0
    for t in range(1, T):
        total += transition_log_density(
            positions[t],
            positions[t - 1],
            network[t - 1],
            alphas[t - 1],
            betas[t - 1],
            params.sigma2,
        )
    return total


def proxy_log_likelihood(
    params: ModelParams,
    edge_states,
    data: MlmdDataset,
    index: ObservationIndex,
    covariates,
) -> float:
    """Censoring-aware movement log likelihood restricted to returners.

    ``edge_states`` is a per-time sequence of mappings from sorted label
    pairs to binary states covering all pairs observed at that time. The
    step into time t is a Gaussian over the labels in ``index.ret[t]``,
    using the time t-1 edge states restricted to those labels, with ego
    sizes recomputed inside the restriction. Steps with no returners
    contribute nothing; a single returner contributes an independent
    random-walk term. Under zero censoring this reduces exactly to the
    complete likelihood.
    """
    frames = dataset_frames(data)
    coef = params.coefficients
    alphas = np.atleast_1d(behavior_profile(covariates, coef.delta_alpha))
    betas = np.atleast_1d(behavior_profile(covariates, coef.delta_beta))
    total = 0.0
    for t in range(1, index.T):
        ret = index.ret[t]
        m = len(ret)
        if m == 0:
            continue
        labs_prev, pos_prev = frames[t - 1]
        labs_cur, pos_cur = frames[t]
        slot_prev = {l: s for s, l in enumerate(labs_prev)}
        slot_cur = {l: s for s, l in enumerate(labs_cur)}
        mu_prev = pos_prev[[slot_prev[l] for l in ret]]
        mu_cur = pos_cur[[slot_cur[l] for l in ret]]
        W = np.eye(m)
        for u in range(m):
            for v in range(u + 1, m):
                a, b = ret[u], ret[v]
                key = (a, b) if a <= b else (b, a)
                if edge_states[t - 1][key]:
                    W[u, v] = W[v, u] = 1.0
        total += transition_log_density(
            mu_cur, mu_prev, W, alphas[t - 1], betas[t - 1], params.sigma2
        )
    return total


@dataclass
class FitData:
    """Flattened per-time observation structure driving the fast likelihood.

    Built once per dataset; all arrays use global offsets so the sampler's
    hot loops can run without Python-level indirection. Times are 0-based
    throughout; the movement step with destination time t draws on edge
    states and positions at t-1.
    """

    T: int
    labels: list  # distinct labels, id order
    obs_offsets: np.ndarray  # (T+1,)
    obs_ids: np.ndarray  # (N,) label ids per observation row
    pos: np.ndarray  # (N, 2)
    pair_offsets: np.ndarray  # (T+1,)
    pair_time: np.ndarray  # (K,)
    pair_a: np.ndarray  # (K,) smaller label id
    pair_b: np.ndarray  # (K,) larger label id
    pair_stationary: np.ndarray  # (K,) bool
    pair_prev: np.ndarray  # (K,) global pair index at t-1, -1 if stationary-scored
    pair_next: np.ndarray  # (K,) global pair index at t+1 when both labels return
    pair_move_pos: np.ndarray  # (K,) slot in the step-(t+1) restricted edge list
    move_m: np.ndarray  # (T,) returners per step
    move_member_offsets: np.ndarray  # (T+1,)
    move_prev_rows: np.ndarray  # rows into pos for the step's previous frame
    move_cur_rows: np.ndarray
    medge_offsets: np.ndarray  # (T+1,)
    medge_i: np.ndarray  # restricted coordinates of each step edge
    medge_j: np.ndarray
    medge_src: np.ndarray  # global pair index holding each step edge's state
    mean_sq_step: float
    median_step: float
    n_return_steps: int
    index: ObservationIndex = field(repr=False, default=None)

    @property
    def n_pairs(self) -> int:
        return self.pair_a.shape[0]

    @classmethod
    def from_frames(cls, frames, labels, T: int, index=None) -> "FitData":
        """Build from per-time (sorted label-id array, position array) pairs."""
        obs_offsets = np.zeros(T + 1, dtype=np.int64)
        pair_offsets = np.zeros(T + 1, dtype=np.int64)
        obs_rows, pos_rows = [], []
        slot_of = []  # per time: id -> local slot
        for t in range(T):
            ids, coords = frames[t]
            obs_offsets[t + 1] = obs_offsets[t] + len(ids)
            obs_rows.append(np.asarray(ids, dtype=np.int64))
            pos_rows.append(np.asarray(coords, dtype=float).reshape(len(ids), 2))
            slot_of.append({int(a): s for s, a in enumerate(ids)})

        pair_index = [dict() for _ in range(T)]
        pair_time, pair_a, pair_b = [], [], []
        pair_stationary, pair_prev = [], []
        g = 0
        for t in range(T):
            ids = obs_rows[t]
            n = len(ids)
            prev_ids = set(obs_rows[t - 1].tolist()) if t > 0 else set()
            pair_offsets[t + 1] = pair_offsets[t] + n * (n - 1) // 2
            for i in range(n):
                for j in range(i + 1, n):
                    a, b = int(ids[i]), int(ids[j])
                    pair_index[t][(a, b)] = g
                    pair_time.append(t)
                    pair_a.append(a)
                    pair_b.append(b)
                    if t > 0 and a in prev_ids and b in prev_ids:
                        pair_stationary.append(False)
                        pair_prev.append(pair_index[t - 1][(a, b)])
                    else:
                        pair_stationary.append(True)
                        pair_prev.append(-1)
                    g += 1
        K = g

        move_m = np.zeros(T, dtype=np.int64)
        move_member_offsets = np.zeros(T + 1, dtype=np.int64)
        medge_offsets = np.zeros(T + 1, dtype=np.int64)
        move_prev_rows, move_cur_rows = [], []
        medge_i, medge_j, medge_src = [], [], []
        ret_pos_in_step = [dict() for _ in range(T)]  # id -> restricted coordinate
        sq_steps = []
        for t in range(1, T):
            prev_set = set(obs_rows[t - 1].tolist())
            ret_ids = [int(a) for a in obs_rows[t] if int(a) in prev_set]
            m = len(ret_ids)
            move_m[t] = m
            for u, a in enumerate(ret_ids):
                ret_pos_in_step[t][a] = u
                rp = obs_offsets[t - 1] + slot_of[t - 1][a]
                rc = obs_offsets[t] + slot_of[t][a]
                move_prev_rows.append(rp)
                move_cur_rows.append(rc)
            for u in range(m):
                for v in range(u + 1, m):
                    medge_i.append(u)
                    medge_j.append(v)
                    medge_src.append(pair_index[t - 1][(ret_ids[u], ret_ids[v])])
            move_member_offsets[t + 1] = move_member_offsets[t] + m
            medge_offsets[t + 1] = medge_offsets[t] + m * (m - 1) // 2

        pair_next = np.full(K, -1, dtype=np.int64)
        pair_move_pos = np.full(K, -1, dtype=np.int64)
        for g in range(K):
            t = pair_time[g]
            if t + 1 >= T:
                continue
            a, b = pair_a[g], pair_b[g]
            nxt = pair_index[t + 1].get((a, b))
            if nxt is None:
                continue
            # observed at t and t+1 means both labels are returners at t+1
            pair_next[g] = nxt
            u = ret_pos_in_step[t + 1][a]
            v = ret_pos_in_step[t + 1][b]
            m = move_m[t + 1]
            pair_move_pos[g] = u * (2 * m - u - 1) // 2 + (v - u - 1)

        pos = (
            np.concatenate(pos_rows, axis=0) if obs_offsets[-1] > 0 else np.zeros((0, 2))
        )
        mp = np.asarray(move_prev_rows, dtype=np.int64)
        mc = np.asarray(move_cur_rows, dtype=np.int64)
        if mp.size:
            disp = pos[mc] - pos[mp]
            sq = (disp**2).sum(axis=1)
            mean_sq_step = float(sq.mean() / 2.0)
            median_step = float(np.median(np.sqrt(sq)))
        else:
            mean_sq_step = 0.0
            median_step = 0.0

        return cls(
            T=T,
            labels=labels,
            obs_offsets=obs_offsets,
            obs_ids=np.concatenate(obs_rows) if obs_offsets[-1] > 0 else np.zeros(0, dtype=np.int64),
            pos=np.ascontiguousarray(pos),
            pair_offsets=pair_offsets,
            pair_time=np.asarray(pair_time, dtype=np.int64),
            pair_a=np.asarray(pair_a, dtype=np.int64),
            pair_b=np.asarray(pair_b, dtype=np.int64),
            pair_stationary=np.asarray(pair_stationary, dtype=bool),
            pair_prev=np.asarray(pair_prev, dtype=np.int64),
            pair_next=pair_next,
            pair_move_pos=pair_move_pos,
            move_m=move_m,
            move_member_offsets=move_member_offsets,
            move_prev_rows=mp,
            move_cur_rows=mc,
            medge_offsets=medge_offsets,
            medge_i=np.asarray(medge_i, dtype=np.int64),
            medge_j=np.asarray(medge_j, dtype=np.int64),
            medge_src=np.asarray(medge_src, dtype=np.int64),
            mean_sq_step=mean_sq_step,
            median_step=median_step,
            n_return_steps=int(mp.size),
            index=index,
        )

    @classmethod
    def from_mlmd(cls, data: MlmdDataset) -> "FitData":
        _validate_runs(data)
        frames_raw = dataset_frames(data)
        labels = sorted({str(l) for l in data.labels})
        ids = {lab: i for i, lab in enumerate(labels)}
        frames = [
            (np.array([ids[l] for l in labs], dtype=np.int64), coords)
            for labs, coords in frames_raw
        ]
        index = partition_observed(data, data.T)
        return cls.from_frames(frames, labels, data.T, index=index)

    @classmethod
    def from_trajectories(cls, trajectories: TrajectorySet) -> "FitData":
        T, J = trajectories.T, trajectories.J
        all_ids = np.arange(J, dtype=np.int64)
        frames = [(all_ids, trajectories.positions[t]) for t in range(T)]
        labels = [str(i) for i in range(J)]
        index = ObservationIndex(
            obs=[list(labels) for _ in range(T)],
            ret=[[] if t == 0 else list(labels) for t in range(T)],
            new=[list(labels) if t == 0 else [] for t in range(T)],
            T=T,
        )
        return cls.from_frames(frames, labels, T, index=index)

    def is_fully_observed(self) -> bool:
        """True when every label is present at every time step."""
        n = len(self.labels)
        return bool(np.all(np.diff(self.obs_offsets) == n)) and n > 0


def _validate_runs(data: MlmdDataset):
    seen = {}
    for t, lab in zip(data.times, data.labels):
        seen.setdefault(str(lab), []).append(int(t))
    for lab, ts in seen.items():
        ts = sorted(ts)
        if len(set(ts)) != len(ts):
            raise ValueError(f"label {lab!r} appears twice at one time step")
        if ts[-1] - ts[0] + 1 != len(ts):
            raise ValueError(f"label {lab!r} is not observed on a contiguous run")
