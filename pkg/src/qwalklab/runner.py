"""Batch experiment execution: config in, artifact directory out.

Each sweep value (a steps or time entry) produces distribution.csv plus
the requested metrics/samples files; a manifest.json at the output root
records the resolved config, seeds, versions and wall-clock times.
Everything except the manifest's timing fields is byte-identical across
repeated invocations with the same config and seed.
"""

from __future__ import annotations

import concurrent.futures
import dataclasses
import datetime
import json
import shutil
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Union

import numpy as np

from . import __version__
from .analysis import (
    Distribution,
    classical_binomial,
    displacement_labels,
    inverse_participation_ratio,
    joint_distribution,
    moments,
    position_distribution,
    qubits_needed,
    relabel,
    sample,
    total_variation,
    write_distribution,
    write_samples,
)
from .coined import InitialCoinSpec, WalkState, evolve, initial_state
from .coins import CoinOperator, dft_coin, grover_coin, hadamard_coin
from .config import Diagnostic, ExperimentConfig, validate
from .continuous import (
    auto_line_size,
    build_hamiltonian,
    edge_leakage,
    evolve_ct,
    vertex_state,
)
from .decoherence import (
    DENSITY_KINDS,
    NoiseKind,
    NoiseModel,
    density_from_state,
    ensemble_average,
    evolve_density,
    evolve_trajectory,
)
from .errors import InvalidParameterError, ResourceLimitError
from .multiwalker import (
    InteractionKind,
    InteractionSpec,
    MultiWalkKind,
    Statistics,
    dimension_guard,
    multi_evolve_ct,
    multi_evolve_dt,
    multi_initial_state,
)
from .substrate import Boundary, PercolationSpec, Substrate, make_lattice, make_line, percolate, read_adjacency

# Fixed sub-stream tag for drawing output samples, so sampling never
# shares randomness with trajectory or percolation streams.
_SAMPLE_STREAM_TAG = 104729


@dataclass
class _SingleResult:
    """Everything one sweep value produces before files are written."""

    label: str
    value: Union[int, float]
    distribution: Distribution
    joint: Optional[Distribution]
    metrics: dict
    info: dict


def sweep_values(config: ExperimentConfig) -> list[tuple[str, Union[int, float]]]:
    """(directory label, value) pairs; scalars mean files at the output root."""
    if config.walk.kind == "discrete":
        raw = config.run.steps
        prefix = "steps"
    else:
        raw = config.run.time
        prefix = "time"
    if isinstance(raw, list):
        return [(f"{prefix}_{v}", v) for v in raw]
    return [("", raw)]


def _build_base_substrate(config: ExperimentConfig, value) -> tuple[Substrate, int]:
    """Substrate before percolation, plus the resolved start vertex."""
    sub = config.substrate
    boundary = Boundary(sub.boundary)
    if sub.generator == "line":
        if sub.n_sites == "auto":
            if config.walk.kind == "discrete":
                n = 2 * int(value) + 1
                n = max(n, 2)  # steps = 0 still needs a legal line
            else:
                n = auto_line_size(config.walk.gamma, float(value))
        else:
            n = int(sub.n_sites)
        base = make_line(n, boundary)
    elif sub.generator == "lattice":
        base = make_lattice(sub.dims, boundary)
    else:
        path = Path(sub.path)
        if config.base_dir is not None and not path.is_absolute():
            path = config.base_dir / path
        base = read_adjacency(path)
    start = config.initial.start
    if start == "center":
        if base.dims is not None:
            mid = tuple(d // 2 for d in base.dims)
            start = int(np.ravel_multi_index(mid, base.dims))
        else:
            start = base.n_vertices // 2
    return base, int(start)


def _resolve_coin(config: ExperimentConfig, substrate: Substrate) -> CoinOperator:
    dim = substrate.coin_dimension
    name = config.coin.name
    if name == "hadamard":
        return hadamard_coin()
    if name == "grover":
        return grover_coin(dim)
    return dft_coin(dim)


def _resolve_noise(config: ExperimentConfig) -> NoiseModel:
    return NoiseModel(
        kind=NoiseKind(config.noise.kind),
        strength=float(config.noise.strength),
        seed=int(config.noise.seed),
    )


def _percolation_spec(config: ExperimentConfig) -> Optional[PercolationSpec]:
    perc = config.substrate.percolation
    if perc is None:
        return None
    return PercolationSpec(mode=perc["mode"], p=float(perc["p"]), seed=int(perc.get("seed", 0)))


def _resolve_method(config: ExperimentConfig, coin_dim: int, n: int) -> str:
    if config.multiwalker is not None or config.walk.kind == "continuous":
        return "pure"
    method = config.walk.method
    noise = _resolve_noise(config)
    if method != "auto":
        return method
    if noise.kind is NoiseKind.NONE:
        return "pure"
    fits = (coin_dim * n) ** 2 <= config.run.amplitude_budget
    if noise.kind in DENSITY_KINDS and fits and config.run.runs == 1:
        return "density"
    return "trajectory"


def _check_budget(required: int, budget: int) -> None:
    if required > budget:
        raise ResourceLimitError(required, budget)


def _labels_for(config: ExperimentConfig, substrate: Substrate, center: int) -> np.ndarray:
    if config.substrate.generator == "line":
        return displacement_labels(substrate.n_vertices, center)
    if config.substrate.generator == "lattice":
        coords = np.unravel_index(np.arange(substrate.n_vertices), substrate.dims)
        return np.stack(coords, axis=1)
    return np.arange(substrate.n_vertices)


def _run_single(config: ExperimentConfig, label: str, value) -> _SingleResult:
    t0 = time.perf_counter()
    base, start = _build_base_substrate(config, value)
    perc = _percolation_spec(config)
    budget = config.run.amplitude_budget
    runs = config.run.runs
    info: dict = {"n_vertices": base.n_vertices, "start_vertex": start}
    joint = None

    if config.multiwalker is not None:
        dist, joint, extra = _run_multiwalker(config, base, value, budget)
        info.update(extra)
    elif config.walk.kind == "continuous":
        dist, extra = _run_continuous(config, base, start, perc, value, budget, runs)
        info.update(extra)
    else:
        dist, extra = _run_discrete(config, base, start, perc, int(value), budget, runs)
        info.update(extra)

    labels = _labels_for(config, base, start)
    if config.multiwalker is None and labels.ndim == 1 and config.substrate.generator == "line":
        dist = relabel(dist, labels)
    elif config.multiwalker is None and labels.ndim == 2:
        dist = relabel(dist, labels)

    metrics: dict = {}
    wanted = config.run.outputs
    if "moments" in wanted:
        mom = moments(dist)
        mean = mom.mean.tolist() if isinstance(mom.mean, np.ndarray) else mom.mean
        metrics["mean"] = mean
        metrics["variance"] = mom.variance
        metrics["sigma"] = mom.sigma
    if "ipr" in wanted:
        metrics["ipr"] = inverse_participation_ratio(dist)
    if "tv_vs_classical" in wanted:
        metrics["tv_vs_classical"] = total_variation(dist, classical_binomial(int(value)))
    info["wall_clock_seconds"] = time.perf_counter() - t0
    return _SingleResult(
        label=label, value=value, distribution=dist, joint=joint, metrics=metrics, info=info
    )


def _run_discrete(
    config: ExperimentConfig,
    base: Substrate,
    start: int,
    perc: Optional[PercolationSpec],
    n_steps: int,
    budget: int,
    runs: int,
) -> tuple[Distribution, dict]:
    coin = _resolve_coin(config, base)
    noise = _resolve_noise(config)
    spec = InitialCoinSpec(b=float(config.initial.b), beta=float(config.initial.beta), start_vertex=start)
    method = _resolve_method(config, base.coin_dimension, base.n_vertices)
    extra = {"method": method}
    d, n = base.coin_dimension, base.n_vertices

    if method == "density":
        _check_budget((d * n) ** 2, budget)
        sub = percolate(base, perc) if perc else base
        rho = density_from_state(initial_state(sub, spec))
        final = evolve_density(rho, coin, sub, noise, n_steps, budget_amplitudes=budget)
        return position_distribution(final), extra

    _check_budget(d * n, budget)
    if runs == 1:
        sub = percolate(base, perc) if perc else base
        if method == "trajectory":
            result = ensemble_average(
                initial_state(sub, spec), coin, sub, noise, n_steps, 1, master_seed=config.run.seed
            )
            return result.mean_distribution, extra
        final = evolve(initial_state(sub, spec), coin, sub, n_steps)
        return position_distribution(final), extra

    # ensembles: trajectory noise, percolation repetitions, or both
    if perc is None:
        result = ensemble_average(
            initial_state(base, spec), coin, base, noise, n_steps, runs, master_seed=config.run.seed
        )
        extra.update(_ensemble_info(result.per_run_sigma, result.per_run_ipr))
        return result.mean_distribution, extra
    mean = np.zeros(n)
    sigmas = np.empty(runs)
    iprs = np.empty(runs)
    labels = np.arange(n)
    for i in range(runs):
        sub = percolate(base, perc, rep=i)
        psi = initial_state(sub, spec)
        if noise.kind is NoiseKind.NONE:
            final = evolve(psi, coin, sub, n_steps)
        else:
            final = evolve_trajectory(psi, coin, sub, noise, n_steps, run_seed=(config.run.seed, i))
        probs = final.position_probabilities()
        mean += probs
        mu = float(probs @ labels)
        sigmas[i] = np.sqrt(max(float(probs @ (labels - mu) ** 2), 0.0))
        iprs[i] = float((probs**2).sum())
    mean /= runs
    extra.update(_ensemble_info(sigmas, iprs))
    return Distribution(mean, labels), extra


def _ensemble_info(sigmas: np.ndarray, iprs: np.ndarray) -> dict:
    info = {
        "runs": int(len(sigmas)),
        "mean_run_sigma": float(sigmas.mean()),
        "mean_run_ipr": float(iprs.mean()),
    }
    if len(sigmas) > 1:
        info["run_sigma_se"] = float(sigmas.std(ddof=1) / np.sqrt(len(sigmas)))
    return info


def _run_continuous(
    config: ExperimentConfig,
    base: Substrate,
    start: int,
    perc: Optional[PercolationSpec],
    t: float,
    budget: int,
    runs: int,
) -> tuple[Distribution, dict]:
    _check_budget(base.n_vertices, budget)
    gamma = float(config.walk.gamma)
    t = float(t)
    extra: dict = {"method": "pure", "gamma": gamma}

    def one(sub: Substrate) -> np.ndarray:
        ham = build_hamiltonian(sub, gamma)
        final = evolve_ct(vertex_state(sub, start), ham, t)
        return final.position_probabilities()

    if runs == 1 or perc is None:
        sub = percolate(base, perc) if perc else base
        probs = one(sub)
        if config.substrate.generator == "line":
            extra["edge_leakage"] = edge_leakage(probs)
        return Distribution(probs, np.arange(base.n_vertices)), extra

    mean = np.zeros(base.n_vertices)
    labels = np.arange(base.n_vertices)
    sigmas = np.empty(runs)
    iprs = np.empty(runs)
    for i in range(runs):
        probs = one(percolate(base, perc, rep=i))
        mean += probs
        mu = float(probs @ labels)
        sigmas[i] = np.sqrt(max(float(probs @ (labels - mu) ** 2), 0.0))
        iprs[i] = float((probs**2).sum())
    mean /= runs
    extra.update(_ensemble_info(sigmas, iprs))
    return Distribution(mean, labels), extra


def _run_multiwalker(
    config: ExperimentConfig, base: Substrate, value, budget: int
) -> tuple[Distribution, Optional[Distribution], dict]:
    mw = config.multiwalker
    discrete = config.walk.kind == "discrete"
    kind = MultiWalkKind.DISCRETE_COINED if discrete else MultiWalkKind.CONTINUOUS
    coin_dim = base.coin_dimension if discrete else 1
    m = len(mw.starts)
    required = dimension_guard(base.n_vertices, m, coin_dim, budget)

    if discrete:
        walkers = [
            InitialCoinSpec(b=float(config.initial.b), beta=float(config.initial.beta), start_vertex=int(s))
            for s in mw.starts
        ]
    else:
        walkers = [int(s) for s in mw.starts]
    state = multi_initial_state(
        base, kind, walkers, statistics=Statistics(mw.statistics), budget_amplitudes=budget
    )

    inter_raw = mw.interaction or {}
    inter = InteractionSpec(
        kind=InteractionKind(inter_raw.get("kind", "none")),
        phi=float(inter_raw.get("phi", 0.0)),
        u=float(inter_raw.get("u", 0.0)),
    )
    if discrete:
        coin = _resolve_coin(config, base)
        final = multi_evolve_dt(state, coin, base, inter, int(value))
    else:
        final = multi_evolve_ct(state, base, float(config.walk.gamma), inter, float(value))

    dist = position_distribution(final)
    joint = joint_distribution(final) if "joint" in config.run.outputs else None
    info = {"method": "pure", "n_walkers": m, "amplitudes": required}
    return dist, joint, info


# -- output writing ---------------------------------------------------------------


def _write_outputs(result: _SingleResult, directory: Path, config: ExperimentConfig) -> list[str]:
    directory.mkdir(parents=True, exist_ok=True)
    written: list[str] = []
    wanted = config.run.outputs
    try:
        if "distribution" in wanted:
            write_distribution(result.distribution, directory / "distribution.csv")
            written.append("distribution.csv")
        if result.metrics:
            (directory / "metrics.json").write_text(
                json.dumps(result.metrics, indent=2, sort_keys=True) + "\n"
            )
            written.append("metrics.json")
        if "joint" in wanted and result.joint is not None:
            write_distribution(result.joint, directory / "joint.csv")
            written.append("joint.csv")
        if "samples" in wanted:
            tag = result.label or "single"
            ss = sample(
                result.distribution,
                config.run.samples,
                seed=(config.run.seed, _SAMPLE_STREAM_TAG),
                source=f"position distribution ({tag})",
            )
            write_samples(ss, directory / "samples.csv", directory / "samples.json")
            written.extend(["samples.csv", "samples.json"])
    except BaseException:
        for name in written:
            (directory / name).unlink(missing_ok=True)
        raise
    return written


def _config_as_dict(config: ExperimentConfig) -> dict:
    data = dataclasses.asdict(config)
    data.pop("base_dir", None)
    data.pop("unknown_keys", None)
    if data.get("multiwalker") is None:
        data.pop("multiwalker", None)
    return data


def run(
    config: ExperimentConfig,
    out_dir: Union[str, Path],
    threads: int = 1,
    seed_override: Optional[int] = None,
) -> dict:
    """Execute every sweep value and write the artifact tree.

    Returns the manifest dict (also written to out_dir/manifest.json).
    Partial outputs of a failing sweep value are removed before the
    error propagates.
    """
    diags = validate(config)
    if diags:
        raise InvalidParameterError(
            "config has problems:\n" + "\n".join(str(d) for d in diags)
        )
    if seed_override is not None:
        config = dataclasses.replace(config, run=dataclasses.replace(config.run, seed=int(seed_override)))
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    values = sweep_values(config)
    t0 = time.perf_counter()

    def job(item):
        label, value = item
        return _run_single(config, label, value)

    if threads > 1 and len(values) > 1:
        with concurrent.futures.ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(job, values))
    else:
        results = [job(item) for item in values]

    entries = []
    for res in results:
        directory = out / res.label if res.label else out
        created_dir = bool(res.label) and not directory.exists()
        try:
            files = _write_outputs(res, directory, config)
        except BaseException:
            if created_dir:
                shutil.rmtree(directory, ignore_errors=True)
            raise
        entry = {
            "label": res.label or None,
            "value": res.value,
            "directory": str(directory.relative_to(out)) if res.label else ".",
            "files": files,
            "metrics": res.metrics,
        }
        entry.update(res.info)
        entries.append(entry)

    manifest = {
        "tool": "qwalklab",
        "version": __version__,
        "created_utc": datetime.datetime.now(datetime.timezone.utc).isoformat(),
        "wall_clock_seconds": time.perf_counter() - t0,
        "seed": config.run.seed,
        "threads": threads,
        "config": _config_as_dict(config),
        "runs": entries,
    }
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return manifest


def estimate(config: ExperimentConfig) -> list[dict]:
    """Resource estimate per sweep value, nothing executed."""
    diags = validate(config)
    if diags:
        raise InvalidParameterError(
            "config has problems:\n" + "\n".join(str(d) for d in diags)
        )
    budget = config.run.amplitude_budget
    rows = []
    for label, value in sweep_values(config):
        base, _ = _build_base_substrate(config, value)
        n = base.n_vertices
        d = base.coin_dimension if config.walk.kind == "discrete" else 1
        if config.multiwalker is not None:
            m = len(config.multiwalker.starts)
            required = (d * n) ** m
        else:
            method = _resolve_method(config, d, n)
            required = (d * n) ** 2 if method == "density" else d * n
        row = {
            "label": label or "single",
            "value": value,
            "n_vertices": n,
            "required_amplitudes": required,
            "amplitude_budget": budget,
            "fits_budget": required <= budget,
            "memory_bytes_complex128": required * 16,
            "memory_bytes_single_precision": required * 8,
        }
        if config.walk.kind == "discrete" and config.substrate.generator == "line" and int(value) >= 1:
            row["qubits_needed"] = qubits_needed(int(value))
        rows.append(row)
    return rows
