"""Command-line entry points: simulate, censor, fit, study, summarize.

Every command writes a manifest echoing the resolved configuration and seed
so a run can be reproduced bit-exactly. Exit codes: 0 success, 1 usage or
configuration error, 2 runtime failure.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

import numpy as np

from . import fileio
from .diagnostics import summarize_draws
from .model import GlmCoefficients, ModelParams, PARAM_NAMES, phase_covariates
from .sampler import PriorSpec, SamplerConfig, run_chain
from .simulate import (
    MlmdDataset,
    apply_multilabeling,
    simulate_censoring,
    simulate_trajectories,
)
from .study import (
    LambdaEstimationError,
    desk_grid,
    estimate_lambdas,
    full_grid,
    mean_degree_curve,
    phase_comparisons,
    run_study,
    study_plot_data,
)

PACKAGE_VERSION = "0.1.0"


class ConfigError(ValueError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # usage errors exit 1, not argparse's default 2
        self.print_usage(sys.stderr)
        raise SystemExit(self._usage_exit(message))

    def _usage_exit(self, message):
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        return 1


def _load_config(path) -> dict:
    if path is None:
        return {}
    try:
        with open(path) as fh:
            cfg = json.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file {path} is not valid JSON: {exc}") from None
    if not isinstance(cfg, dict):
        raise ConfigError("config document must be a JSON object")
    return cfg


def _require(cfg: dict, key: str, default=None):
    if key in cfg:
        return cfg[key]
    if default is not None:
        return default
    raise ConfigError(f"config key {key!r} is required")


def _coef(cfg: dict, key: str, default) -> np.ndarray:
    v = np.asarray(cfg.get(key, default), dtype=float)
    if v.ndim != 1 or v.size != 3:
        raise ConfigError(f"{key} must be a length-3 vector")
    return v


def _phases(cfg: dict, T: int):
    third = T // 3
    during = int(cfg.get("during_start", third + 1))
    after = int(cfg.get("after_start", 2 * third + 1))
    if not (1 <= during < after <= T):
        raise ConfigError(
            f"phase boundaries must satisfy 1 <= during_start ({during}) "
            f"< after_start ({after}) <= T ({T})"
        )
    return during, after


def _sampler_config(cfg: dict, seed: int, **overrides) -> SamplerConfig:
    s = dict(cfg.get("sampler", {}))
    s.update(overrides)
    config = SamplerConfig(
        iterations=int(s.get("iterations", 3000)),
        burn_in=int(s.get("burn_in", 1000)),
        thin=int(s.get("thin", 1)),
        seed=seed,
        adapt=bool(s.get("adapt", True)),
        store_edge_draws=bool(s.get("store_edge_draws", False)),
    )
    try:
        config.validate()
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    return config


def _priors(cfg: dict) -> PriorSpec:
    p = cfg.get("priors", {})
    try:
        return PriorSpec(
            coef_sd=float(p.get("coef_sd", 1.5)),
            sigma_scale=p.get("sigma_scale"),
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def _trajectories_to_records(traj) -> MlmdDataset:
    T, J = traj.T, traj.J
    times = np.repeat(np.arange(T), J)
    labels = np.array([str(j) for _ in range(T) for j in range(J)], dtype=object)
    positions = traj.positions.reshape(T * J, 2)
    return MlmdDataset(times, labels, positions, T, {str(j): j for j in range(J)})


def _write_manifest(out_dir, name, payload):
    fileio.write_manifest(os.path.join(out_dir, name), payload)


def cmd_simulate(args) -> int:
    cfg = _load_config(args.config)
    seed = args.seed if args.seed is not None else int(cfg.get("seed", 0))
    J = int(cfg.get("J", 5))
    T = int(cfg.get("T", 300))
    if J < 1 or T < 2:
        raise ConfigError(f"need J >= 1 and T >= 2, got J={J}, T={T}")
    during, after = _phases(cfg, T)
    params = ModelParams(
        GlmCoefficients(
            _coef(cfg, "delta_alpha", [2.0, 1.0, 0.5]),
            _coef(cfg, "delta_beta", [2.0, 1.0, 0.5]),
            _coef(cfg, "delta_p", [2.0, 1.0, 0.5]),
        ),
        float(cfg.get("sigma2", 1.0)),
        float(cfg.get("phi", 1.0 / (1.0 + math.exp(-2.0)))),
    )
    covariates = phase_covariates(T, during, after)
    traj = simulate_trajectories(J, T, params, covariates, rng=np.random.default_rng(seed))
    os.makedirs(args.out, exist_ok=True)
    fileio.write_trajectory_file(
        os.path.join(args.out, "trajectories.csv"), _trajectories_to_records(traj)
    )
    fileio.write_network_file(os.path.join(args.out, "network.csv"), traj.network)
    _write_manifest(
        args.out,
        "manifest.json",
        {
            "command": "simulate",
            "package_version": PACKAGE_VERSION,
            "seed": seed,
            "config": {
                "J": J,
                "T": T,
                "during_start": during,
                "after_start": after,
                "delta_alpha": list(params.coefficients.delta_alpha),
                "delta_beta": list(params.coefficients.delta_beta),
                "delta_p": list(params.coefficients.delta_p),
                "sigma2": params.sigma2,
                "phi": params.phi,
            },
            "initial_positions": "uniform disc of radius 5*sigma around the origin",
            "time_step": "one unit per frame; wall-clock mapping is application metadata",
        },
    )
    print(f"wrote trajectories for J={J}, T={T} to {args.out}", file=sys.stderr)
    return 0


def cmd_censor(args) -> int:
    cfg = _load_config(args.config)
    seed = args.seed if args.seed is not None else int(cfg.get("seed", 0))
    lam_obs = float(_require(cfg, "lambda_obs"))
    lam_miss = float(_require(cfg, "lambda_miss"))
    p_init = float(cfg.get("p_init_observed", 0.5))
    data = fileio.read_trajectory_file(args.input)
    labels = sorted({str(l) for l in data.labels})
    J, T = len(labels), data.T
    counts = np.zeros(T, dtype=int)
    for t in data.times:
        counts[t] += 1
    if not np.all(counts == J):
        raise ConfigError(
            "censoring requires complete trajectories: every label present at every time"
        )
    positions = np.empty((T, J, 2))
    col = {lab: j for j, lab in enumerate(labels)}
    for t, lab, xy in zip(data.times, data.labels, data.positions):
        positions[t, col[str(lab)]] = xy

    pattern = simulate_censoring(J, T, lam_obs, lam_miss, p_init, np.random.default_rng(seed))
    mlmd = apply_multilabeling(_PositionsOnly(positions), pattern)
    os.makedirs(args.out, exist_ok=True)
    fileio.write_trajectory_file(os.path.join(args.out, "mlmd.csv"), mlmd)
    fileio.write_label_map(
        os.path.join(args.out, "label_map.csv"),
        {lab: labels[j] for lab, j in mlmd.label_map.items()},
    )
    _write_manifest(
        args.out,
        "manifest.json",
        {
            "command": "censor",
            "package_version": PACKAGE_VERSION,
            "seed": seed,
            "config": {
                "lambda_obs": lam_obs,
                "lambda_miss": lam_miss,
                "p_init_observed": p_init,
            },
            "input": os.path.basename(args.input),
            "input_rows": int(len(data)),
            "output_rows": int(len(mlmd)),
        },
    )
    print(
        f"censored {len(data)} rows to {len(mlmd)} observed rows "
        f"({len(mlmd.label_map)} labels)",
        file=sys.stderr,
    )
    return 0


class _PositionsOnly:
    """Adapter so the relabeling step can run on parsed files."""

    def __init__(self, positions):
        self.positions = positions
        self.T = positions.shape[0]
        self.J = positions.shape[1]


def cmd_fit(args) -> int:
    cfg = _load_config(args.config)
    seed = args.seed if args.seed is not None else int(cfg.get("seed", 0))
    data = fileio.read_trajectory_file(args.input, T=cfg.get("T"))
    if len(data) == 0:
        raise ConfigError("input file has no observations")
    during, after = _phases(cfg, data.T)
    covariates = phase_covariates(data.T, during, after)
    config = _sampler_config(cfg, seed, store_edge_draws=True)
    priors = _priors(cfg)
    print(
        f"fitting {len(data)} observations over T={data.T} "
        f"({config.iterations} iterations)...",
        file=sys.stderr,
    )
    samples = run_chain(data, covariates, priors, config)
    os.makedirs(args.out, exist_ok=True)
    fileio.write_chain_file(os.path.join(args.out, "chain.csv"), samples)

    summary = summarize_draws([samples.draws], PARAM_NAMES)
    comparisons = phase_comparisons(samples, covariates)
    curve = mean_degree_curve(samples)
    doc = {
        "parameters": summary,
        "phase_comparisons": comparisons.table,
        "mean_degree_curve": [None if math.isnan(v) else v for v in curve],
        "acceptance": samples.acceptance,
        "likelihood": samples.meta["likelihood"],
    }
    if samples.meta["likelihood"] == "proxy" and "population_size" in cfg:
        try:
            lam_obs, lam_miss = estimate_lambdas(data, int(cfg["population_size"]))
            doc["lambda_estimates"] = {"lambda_obs": lam_obs, "lambda_miss": lam_miss}
        except LambdaEstimationError as exc:
            doc["lambda_estimates"] = {"error": str(exc)}
    fileio.write_manifest(os.path.join(args.out, "summary.json"), doc)
    _write_manifest(
        args.out,
        "manifest.json",
        {
            "command": "fit",
            "package_version": PACKAGE_VERSION,
            "seed": seed,
            "input": os.path.basename(args.input),
            "config": {
                "T": data.T,
                "during_start": during,
                "after_start": after,
                "sampler": {
                    "iterations": config.iterations,
                    "burn_in": config.burn_in,
                    "thin": config.thin,
                },
                "priors": {
                    "coef_sd": priors.coef_sd,
                    "sigma_scale": priors.sigma_scale,
                },
            },
            "likelihood": samples.meta["likelihood"],
            "proxy_time_convention": samples.meta["proxy_time_convention"],
        },
    )
    print(f"likelihood path: {samples.meta['likelihood']}", file=sys.stderr)
    return 0


def cmd_study(args) -> int:
    cfg = _load_config(args.config)
    seed = args.seed if args.seed is not None else int(cfg.get("seed", 0))
    preset = args.preset or cfg.get("preset", "desk")
    replicates = cfg.get("replicates")
    include_control = bool(cfg.get("include_control", True))
    if preset == "desk":
        grid = desk_grid(int(replicates or 4), include_control)
    elif preset == "paper":
        grid = full_grid(int(replicates or 12), include_control)
    else:
        raise ConfigError(f"unknown preset {preset!r} (expected 'desk' or 'paper')")
    # optional grid overrides, mainly for reduced-scale runs
    if "J" in cfg:
        grid.J = int(cfg["J"])
    if "T" in cfg:
        grid.T = int(cfg["T"])
    if "schemes" in cfg:
        schemes = [None if s is None else (float(s[0]), float(s[1])) for s in cfg["schemes"]]
        if include_control and None not in schemes:
            schemes = [None] + schemes
        grid.schemes = schemes
    if grid.J < 2 or grid.T < 3:
        raise ConfigError("study grid needs J >= 2 and T >= 3")
    config = _sampler_config(
        cfg,
        seed,
        **{
            "iterations": cfg.get("sampler", {}).get("iterations", 2000),
            "burn_in": cfg.get("sampler", {}).get("burn_in", 800),
        },
    )
    workers = args.workers or int(cfg.get("workers", 1))
    n_cells = grid.n_combos * grid.replicates
    print(
        f"running {preset} study: {grid.n_combos} combos x {grid.n_schemes} schemes "
        f"x {grid.replicates} replicates ({n_cells} simulation cells)",
        file=sys.stderr,
    )
    result = run_study(grid, config, workers=workers, master_seed=seed)

    os.makedirs(args.out, exist_ok=True)
    fileio.write_rows_csv(
        os.path.join(args.out, "results.csv"),
        [
            "combo",
            "scheme",
            "replicate",
            "parameter",
            "d_theta",
            "median_complete",
            "median_proxy",
        ],
        [
            {
                "combo": r.combo,
                "scheme": r.scheme,
                "replicate": r.replicate,
                "parameter": r.parameter,
                "d_theta": r.d_theta,
                "median_complete": r.median_complete,
                "median_proxy": r.median_proxy,
            }
            for r in result.records
        ],
    )
    plot_rows = []
    for row in study_plot_data(result):
        if row["undefined"]:
            plot_rows.append({**_plot_base(row), "replicate": "", "standardized": None})
        else:
            for rep, z in enumerate(row["standardized"]):
                plot_rows.append({**_plot_base(row), "replicate": rep, "standardized": z})
    fileio.write_rows_csv(
        os.path.join(args.out, "plot_data.csv"),
        [
            "scheme",
            "parameter",
            "combo",
            "replicate",
            "standardized",
            "t_stat",
            "t_crit",
            "significant",
            "undefined",
        ],
        plot_rows,
    )
    _write_manifest(
        args.out,
        "manifest.json",
        {
            "command": "study",
            "package_version": PACKAGE_VERSION,
            "seed": seed,
            "config": {
                "preset": preset,
                "replicates": grid.replicates,
                "include_control": include_control,
                "J": grid.J,
                "T": grid.T,
                "sigma2": grid.sigma2,
                "phi": grid.phi,
                "schemes": [s if s is None else list(s) for s in grid.schemes],
                "n_combos": grid.n_combos,
                "sampler": {
                    "iterations": config.iterations,
                    "burn_in": config.burn_in,
                    "thin": config.thin,
                },
            },
            "n_records": len(result.records),
            "n_failures": len(result.failures),
        },
    )
    if result.failures:
        fileio.write_manifest(
            os.path.join(args.out, "failures.json"), {"failures": result.failures}
        )
        print(
            f"{len(result.failures)} cell(s) failed; seeds recorded in failures.json",
            file=sys.stderr,
        )
    print(f"study complete: {len(result.records)} bias records", file=sys.stderr)
    return 0


def _plot_base(row):
    return {
        "scheme": row["scheme"],
        "parameter": row["parameter"],
        "combo": row["combo"],
        "t_stat": row["t_stat"],
        "t_crit": row["t_crit"],
        "significant": row["significant"],
        "undefined": row["undefined"],
    }


def cmd_summarize(args) -> int:
    chains = [fileio.read_chain_file(path) for path in args.chains]
    summary = summarize_draws(chains, PARAM_NAMES)
    doc = {
        "n_chains": len(chains),
        "draws_per_chain": [int(c.shape[0]) for c in chains],
        "parameters": summary,
    }
    text = json.dumps(doc, indent=2, sort_keys=True)
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        fileio.atomic_write_text(os.path.join(args.out, "summary.json"), text + "\n")
        _write_manifest(
            args.out,
            "manifest.json",
            {
                "command": "summarize",
                "package_version": PACKAGE_VERSION,
                "inputs": [os.path.basename(p) for p in args.chains],
            },
        )
    print(text)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="socmove", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, needs_out=True):
        p.add_argument("--config", help="JSON configuration file")
        p.add_argument("--seed", type=int, help="random seed (overrides config)")
        if needs_out:
            p.add_argument("--out", default="out", help="output directory")

    p = sub.add_parser("simulate", help="simulate complete trajectories")
    common(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("censor", help="censor and relabel complete trajectories")
    common(p)
    p.add_argument("input", help="complete trajectory file")
    p.set_defaults(func=cmd_censor)

    p = sub.add_parser("fit", help="run MCMC on a trajectory file")
    common(p)
    p.add_argument("input", help="trajectory file (complete or censored)")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("study", help="run the simulation study grid")
    common(p)
    p.add_argument("--preset", choices=("desk", "paper"), help="grid preset")
    p.add_argument("--workers", type=int, help="parallel worker processes")
    p.set_defaults(func=cmd_study)

    p = sub.add_parser("summarize", help="summarize one or more chain files")
    p.add_argument("chains", nargs="+", help="chain csv files")
    p.add_argument("--out", help="optional output directory")
    p.set_defaults(func=cmd_summarize)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"socmove: config error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # noqa: BLE001 - map everything else to exit 2
        print(f"socmove: error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
