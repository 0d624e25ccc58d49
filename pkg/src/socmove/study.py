"""Simulation-study harness: parameter grid, replicate loop, bias statistics.

For every coefficient combination and replicate, complete trajectories are
simulated and fit with the complete likelihood; each censoring scheme is
then applied and the censored data refit with the returner-restricted
likelihood, using the same sampler seed. The per-parameter difference of
posterior medians between the two fits is the bias statistic of interest.
"""

from __future__ import annotations

import math
import traceback
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np
from scipy import stats as sps

from .model import GlmCoefficients, ModelParams, PARAM_NAMES, phase_covariates
from .sampler import PosteriorSamples, SamplerConfig, run_chain
from .simulate import (
    MlmdDataset,
    apply_multilabeling,
    fully_observed_pattern,
    simulate_censoring,
    simulate_trajectories,
)

PHI_STUDY = 1.0 / (1.0 + math.exp(-2.0))  # ~0.8808, the stability used in the study grid
BLOCK_SIGNS = [
    (sa, sb, sc) for sa in (-1, 1) for sb in (-1, 1) for sc in (-1, 1)
]
BASE_MAGNITUDES = (2.0, 1.0, 0.5)
CONTROL_SCHEME = "none"


def _coef_vector(signs) -> np.ndarray:
    return np.array([s * m for s, m in zip(signs, BASE_MAGNITUDES)])


@dataclass
class StudyGrid:
    """Coefficient combinations, censoring schemes, and replicate count."""

    combos: list  # of (delta_alpha, delta_beta, delta_p) coefficient triples
    schemes: list  # of (lambda_obs, lambda_miss), or None for the uncensored control
    replicates: int
    J: int = 5
    T: int = 300
    sigma2: float = 1.0
    phi: float = PHI_STUDY

    def __post_init__(self):
        if self.replicates < 1:
            raise ValueError("replicates must be >= 1")
        if self.T < 3:
            raise ValueError("T must be >= 3 for a three-phase design")

    @property
    def n_combos(self) -> int:
        return len(self.combos)

    @property
    def n_schemes(self) -> int:
        return len(self.schemes)

    def covariates(self) -> np.ndarray:
        third = self.T // 3
        return phase_covariates(self.T, third + 1, 2 * third + 1)

    def params_for(self, combo_idx: int) -> ModelParams:
        da, db, dp = self.combos[combo_idx]
        return ModelParams(GlmCoefficients(da, db, dp), self.sigma2, self.phi)

    def cell_ids(self):
        """All (combo, scheme label, replicate) identifiers, duplicate-free."""
        return [
            (c, scheme_label(s), r)
            for c in range(self.n_combos)
            for s in self.schemes
            for r in range(self.replicates)
        ]


def scheme_label(scheme) -> str:
    if scheme is None:
        return CONTROL_SCHEME
    return f"{scheme[0]:g}-{scheme[1]:g}"


def full_grid(replicates: int = 12, include_control: bool = False) -> StudyGrid:
    """The complete 512-combination grid with all nine censoring schemes."""
    combos = [
        (_coef_vector(sa), _coef_vector(sb), _coef_vector(sp))
        for sa in BLOCK_SIGNS
        for sb in BLOCK_SIGNS
        for sp in BLOCK_SIGNS
    ]
    schemes = [(lo, lm) for lo in (5, 10, 20) for lm in (5, 10, 20)]
    if include_control:
        schemes = [None] + schemes
    return StudyGrid(combos, schemes, replicates)


def desk_grid(replicates: int = 4, include_control: bool = True) -> StudyGrid:
    """Workstation-scale preset: whole-block sign flips, three censoring
    schemes spanning short/long observation against long/short gaps, plus the
    uncensored control."""
    combos = [
        (s_a * np.array(BASE_MAGNITUDES), s_b * np.array(BASE_MAGNITUDES), s_p * np.array(BASE_MAGNITUDES))
        for s_a in (1.0, -1.0)
        for s_b in (1.0, -1.0)
        for s_p in (1.0, -1.0)
    ]
    schemes = [(5, 20), (10, 10), (20, 5)]
    if include_control:
        schemes = [None] + schemes
    return StudyGrid(combos, schemes, replicates)


@dataclass
class BiasRecord:
    """Median shift between complete-data and censored-data posteriors."""

    parameter: str
    d_theta: float
    combo: int
    scheme: str
    replicate: int
    median_complete: float
    median_proxy: float


@dataclass
class StudyResult:
    records: list
    failures: list
    grid: StudyGrid
    master_seed: int

    def d_values(self, scheme: str, parameter: str, combo: int) -> np.ndarray:
        vals = [
            (r.replicate, r.d_theta)
            for r in self.records
            if r.scheme == scheme and r.parameter == parameter and r.combo == combo
        ]
        return np.array([v for _, v in sorted(vals)])


def _cell_payload(grid: StudyGrid, sampler_config, combo_idx: int, rep: int, seeds):
    return {
        "grid": grid,
        "config": sampler_config,
        "combo_idx": combo_idx,
        "replicate": rep,
        "data_seed": int(seeds[0]),
        "fit_seed": int(seeds[1]),
        "censor_seeds": [int(s) for s in seeds[2:]],
    }


def _run_cell(payload) -> dict:
    """Simulate one replicate, fit complete and censored versions, emit records."""
    grid: StudyGrid = payload["grid"]
    config: SamplerConfig = payload["config"]
    combo_idx = payload["combo_idx"]
    rep = payload["replicate"]
    covariates = grid.covariates()
    params = grid.params_for(combo_idx)

    records, failures = [], []
    try:
        traj = simulate_trajectories(
            grid.J,
            grid.T,
            params,
            covariates,
            rng=np.random.default_rng(payload["data_seed"]),
        )
        fit_config = replace(config, seed=payload["fit_seed"], store_edge_draws=False)
        complete = run_chain(traj, covariates, None, fit_config)
        med_c = complete.median()
    except Exception as exc:  # noqa: BLE001 - cell failures must not abort the grid
        failures.append(
            {
                "combo": combo_idx,
                "replicate": rep,
                "scheme": "complete",
                "error": f"{type(exc).__name__}: {exc}",
                "data_seed": payload["data_seed"],
                "fit_seed": payload["fit_seed"],
                "traceback": traceback.format_exc(limit=3),
            }
        )
        return {"records": records, "failures": failures}

    for scheme, cseed in zip(grid.schemes, payload["censor_seeds"]):
        label = scheme_label(scheme)
        try:
            if scheme is None:
                pattern = fully_observed_pattern(grid.J, grid.T)
            else:
                pattern = simulate_censoring(
                    grid.J,
                    grid.T,
                    scheme[0],
                    scheme[1],
                    0.5,
                    rng=np.random.default_rng(cseed),
                )
            mlmd = apply_multilabeling(traj, pattern)
            fit_config = replace(
                config, seed=payload["fit_seed"], store_edge_draws=False
            )
            proxy = run_chain(mlmd, covariates, None, fit_config)
            med_p = proxy.median()
            for k, name in enumerate(PARAM_NAMES):
                records.append(
                    BiasRecord(
                        parameter=name,
                        d_theta=float(med_c[k] - med_p[k]),
                        combo=combo_idx,
                        scheme=label,
                        replicate=rep,
                        median_complete=float(med_c[k]),
                        median_proxy=float(med_p[k]),
                    )
                )
        except Exception as exc:  # noqa: BLE001
            failures.append(
                {
                    "combo": combo_idx,
                    "replicate": rep,
                    "scheme": label,
                    "error": f"{type(exc).__name__}: {exc}",
                    "data_seed": payload["data_seed"],
                    "fit_seed": payload["fit_seed"],
                    "censor_seed": cseed,
                    "traceback": traceback.format_exc(limit=3),
                }
            )
    return {"records": records, "failures": failures}


def run_study(
    grid: StudyGrid,
    sampler_config: SamplerConfig | None = None,
    workers: int = 1,
    master_seed: int = 0,
) -> StudyResult:
    """Execute the whole grid; cells run independently and failures are
    recorded with replayable seeds instead of aborting."""
    sampler_config = sampler_config or SamplerConfig()
    sampler_config.validate()
    cells = [
        (combo, rep)
        for combo in range(grid.n_combos)
        for rep in range(grid.replicates)
    ]
    root = np.random.SeedSequence(master_seed)
    children = root.spawn(len(cells))
    payloads = []
    for (combo, rep), child in zip(cells, children):
        seeds = child.generate_state(2 + grid.n_schemes)
        payloads.append(_cell_payload(grid, sampler_config, combo, rep, seeds))

    outputs = []
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            outputs = list(pool.map(_run_cell, payloads))
    else:
        outputs = [_run_cell(p) for p in payloads]

    records, failures = [], []
    for out in outputs:
        records.extend(out["records"])
        failures.extend(out["failures"])
    records.sort(key=lambda r: (r.combo, r.scheme, r.replicate, PARAM_NAMES.index(r.parameter)))
    return StudyResult(records, failures, grid, master_seed)


@dataclass
class StandardizedDifferences:
    """Replicate-standardized median shifts for one grid cell and parameter."""

    values: np.ndarray | None  # (R,) standardized differences, None when undefined
    t_stat: float | None
    t_crit: float
    significant: bool
    undefined: bool


def standardized_differences(d_values, level: float = 0.05) -> StandardizedDifferences:
    """Center and scale replicate differences by sd/sqrt(R); flag cells whose
    mean shift fails a two-sided t test at the given level.

    Cells with zero variance across replicates are flagged undefined rather
    than significant.
    """
    d = np.asarray(d_values, dtype=float)
    R = d.size
    if R < 2:
        raise ValueError("standardized differences require at least 2 replicates")
    t_crit = float(sps.t.ppf(1.0 - level / 2.0, R - 1))
    sd = float(d.std(ddof=1))
    if sd == 0.0:
        return StandardizedDifferences(None, None, t_crit, False, True)
    se = sd / math.sqrt(R)
    values = (d - d.mean()) / se
    t_stat = float(d.mean() / se)
    return StandardizedDifferences(values, t_stat, t_crit, abs(t_stat) > t_crit, False)


def study_plot_data(result: StudyResult, level: float = 0.05):
    """Figure-ready rows: one per (scheme, parameter, combo) cell with the
    standardized differences, t statistic, and significance band."""
    rows = []
    grid = result.grid
    for scheme in [scheme_label(s) for s in grid.schemes]:
        for parameter in PARAM_NAMES:
            for combo in range(grid.n_combos):
                d = result.d_values(scheme, parameter, combo)
                if d.size < 2:
                    continue
                sd = standardized_differences(d, level)
                rows.append(
                    {
                        "scheme": scheme,
                        "parameter": parameter,
                        "combo": combo,
                        "replicates": int(d.size),
                        "standardized": None
                        if sd.undefined
                        else [float(v) for v in sd.values],
                        "t_stat": sd.t_stat,
                        "t_crit": sd.t_crit,
                        "significant": bool(sd.significant),
                        "undefined": bool(sd.undefined),
                    }
                )
    return rows


class LambdaEstimationError(ValueError):
    """Observation pattern too degenerate for run-length estimation."""


def estimate_lambdas(data: MlmdDataset, J_total: int):
    """Moment estimators of the observed/missing run-length means.

    The observed mean comes from completed observation runs (label runs that
    end before the horizon); the missing mean leverages the stationary
    occupancy fraction lambda_obs / (lambda_obs + lambda_miss) via the mean
    number of labels per frame and the total population size.
    """
    if len(data) == 0:
        raise LambdaEstimationError("no observations")
    runs = {}
    for t, lab in zip(data.times, data.labels):
        lo, hi = runs.get(lab, (t, t))
        runs[lab] = (min(lo, t), max(hi, t))
    durations = np.array([hi - lo + 1 for lo, hi in runs.values()], dtype=float)
    ends = np.array([hi for _, hi in runs.values()])
    completed = durations[ends < data.T - 1]
    lam_obs = float(completed.mean() if completed.size else durations.mean())
    nbar = len(data) / data.T
    if nbar >= J_total:
        raise LambdaEstimationError(
            f"mean labels per frame ({nbar:.3g}) must be below the population "
            f"size ({J_total}); the missing-run mean is unidentifiable"
        )
    lam_miss = lam_obs * (J_total - nbar) / nbar
    return lam_obs, lam_miss


@dataclass
class PhaseComparison:
    """Posterior probabilities that each behavior increases between phases."""

    table: dict  # behavior -> {"before_lt_during", "before_lt_after", "during_lt_after"}

    def as_rows(self):
        for name in ("alpha", "beta", "p1"):
            c = self.table[name]
            yield name, c["before_lt_during"], c["before_lt_after"], c["during_lt_after"]


def phase_comparisons(samples: PosteriorSamples, covariates) -> PhaseComparison:
    """Fraction of draws in which the during/after phase behavior exceeds the
    earlier phase; with the logit link this depends only on the coefficient
    draws for the phase indicators."""
    X = np.asarray(covariates, dtype=float)
    if X.ndim != 2 or X.shape[1] != 3:
        raise ValueError("phase comparisons require the 3-column phase design")
    if not np.all(X[:, 0] == 1.0):
        raise ValueError("first covariate column must be the intercept")
    if np.any((X[:, 1] != 0) & (X[:, 1] != 1)) or np.any((X[:, 2] != 0) & (X[:, 2] != 1)):
        raise ValueError("phase indicators must be binary")
    if np.any(X[:, 1] * X[:, 2] != 0):
        raise ValueError("during/after indicators must not overlap")
    table = {}
    for name, base in (("alpha", 0), ("beta", 3), ("p1", 6)):
        c2 = samples.draws[:, base + 1]
        c3 = samples.draws[:, base + 2]
        table[name] = {
            "before_lt_during": float((c2 > 0).mean()),
            "before_lt_after": float((c3 > 0).mean()),
            "during_lt_after": float((c3 > c2).mean()),
        }
    return PhaseComparison(table)


def mean_degree_curve(samples: PosteriorSamples) -> np.ndarray:
    """Pointwise posterior mean of the edge density among observed pairs.

    Times with fewer than two observed labels have no pairs and are emitted
    as NaN. Requires the chain to have stored edge draws.
    """
    if samples.edge_draws is None or samples.pair_offsets is None:
        raise ValueError("chain was run without store_edge_draws")
    T = samples.T
    po = samples.pair_offsets
    pair_means = (
        samples.edge_draws.mean(axis=0)
        if samples.edge_draws.shape[0]
        else np.zeros(po[-1])
    )
    curve = np.full(T, np.nan)
    for t in range(T):
        k = po[t + 1] - po[t]
        if k > 0:
            curve[t] = float(pair_means[po[t] : po[t + 1]].mean())
    return curve
