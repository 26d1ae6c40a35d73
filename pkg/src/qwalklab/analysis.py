"""Measurement statistics, sampling, metrics, and resource estimates."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Union

import numpy as np

from .errors import (
    IncompatibleDistributionsError,
    InvalidParameterError,
    UnsupportedMetricError,
)
from .rng import Key, make_rng

PROB_SUM_TOL = 1e-9
NEGATIVE_CLIP = 1e-12

# Default working budget: 2^26 complex128 amplitudes occupy 1 GiB.
DEFAULT_AMPLITUDE_BUDGET = 2**26


@dataclass(frozen=True, eq=False)
class Distribution:
    """Probability law over integer labels.

    `labels` is either a 1-D integer array (vertices or displacements) or
    a 2-D (k, m) array of label tuples (lattice coordinates, joint laws).
    """

    probabilities: np.ndarray
    labels: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.probabilities, dtype=np.float64).copy()
        labels = np.asarray(self.labels)
        if p.ndim != 1 or len(p) != len(labels):
            raise InvalidParameterError(
                f"probabilities ({p.shape}) and labels ({labels.shape}) disagree"
            )
        if p.min(initial=0.0) < -NEGATIVE_CLIP:
            raise InvalidParameterError(
                f"negative probability {p.min():.3e} below tolerance"
            )
        np.clip(p, 0.0, None, out=p)
        total = p.sum()
        if abs(total - 1.0) > PROB_SUM_TOL:
            raise InvalidParameterError(
                f"probabilities sum to {total!r}, expected 1 within {PROB_SUM_TOL}"
            )
        p.setflags(write=False)
        object.__setattr__(self, "probabilities", p)
        object.__setattr__(self, "labels", labels)

    def __len__(self) -> int:
        return len(self.probabilities)


@dataclass(frozen=True, eq=False)
class SampleSet:
    """Outcomes drawn from a Distribution, with their provenance."""

    outcomes: np.ndarray
    seed: int
    source: str = ""


@dataclass(frozen=True)
class Moments:
    mean: Union[float, np.ndarray]
    variance: float
    sigma: float


def position_distribution(state) -> Distribution:
    """Position law of any walk state, coins traced out.

    Works for pure coined states, continuous states, density matrices and
    many-walker states (which report the walker-averaged marginal).
    Labels are vertex indices.
    """
    probs = state.position_probabilities()
    return Distribution(probabilities=probs, labels=np.arange(len(probs)))


def joint_distribution(state) -> Distribution:
    """Joint position law of a many-walker state; labels are vertex tuples."""
    probs = state.joint_probabilities()
    m = probs.ndim
    flat = probs.reshape(-1)
    grids = np.meshgrid(*(np.arange(s) for s in probs.shape), indexing="ij")
    labels = np.stack([g.reshape(-1) for g in grids], axis=1)
    return Distribution(probabilities=flat, labels=labels)


def relabel(dist: Distribution, labels: np.ndarray) -> Distribution:
    """Same probabilities, new labels (e.g. displacements about a center)."""
    return Distribution(probabilities=dist.probabilities, labels=np.asarray(labels))


def displacement_labels(n_sites: int, center: int) -> np.ndarray:
    return np.arange(n_sites) - int(center)


def sample(dist: Distribution, n_samples: int, seed: Key, source: str = "") -> SampleSet:
    """Inverse-CDF draws; reproducible from the seed alone."""
    if n_samples < 0:
        raise InvalidParameterError(f"sample count must be >= 0, got {n_samples}")
    cdf = np.cumsum(dist.probabilities)
    cdf[-1] = 1.0
    rng = make_rng(seed)
    u = rng.random(n_samples)
    idx = np.searchsorted(cdf, u, side="right")
    outcomes = dist.labels[idx]
    master = seed if isinstance(seed, (int, np.integer)) else seed[0]
    return SampleSet(outcomes=outcomes, seed=int(master), source=source)


def moments(dist: Distribution) -> Moments:
    """Mean and spread of the label variable.

    Multi-component labels give a vector mean and the total variance
    (trace of the covariance matrix); sigma is its square root.
    """
    labels = dist.labels
    if not np.issubdtype(labels.dtype, np.number):
        raise UnsupportedMetricError(
            f"moments need numeric labels, got dtype {labels.dtype}"
        )
    x = labels.astype(np.float64)
    p = dist.probabilities
    if x.ndim == 1:
        mean = float(p @ x)
        var = float(p @ (x - mean) ** 2)
        return Moments(mean=mean, variance=var, sigma=math.sqrt(max(var, 0.0)))
    mean = p @ x
    var = float((p[:, None] * (x - mean) ** 2).sum())
    return Moments(mean=mean, variance=var, sigma=math.sqrt(max(var, 0.0)))


def total_variation(a: Distribution, b: Distribution) -> float:
    """Half the L1 distance; requires identical label sets in order."""
    if a.labels.shape != b.labels.shape or not np.array_equal(a.labels, b.labels):
        raise IncompatibleDistributionsError(
            "distributions are over different label sets"
        )
    return 0.5 * float(np.abs(a.probabilities - b.probabilities).sum())


def inverse_participation_ratio(dist: Distribution) -> float:
    """Sum of squared probabilities: 1 for a point mass, 1/k when uniform."""
    return float((dist.probabilities**2).sum())


def classical_binomial(n_steps: int) -> Distribution:
    """Unbiased classical random walk after n_steps steps.

    Labels are displacements -n_steps..n_steps; sites of the wrong parity
    carry probability zero, matching the support of the coined walk.
    """
    if n_steps < 0:
        raise InvalidParameterError(f"step count must be >= 0, got {n_steps}")
    t = int(n_steps)
    probs = np.zeros(2 * t + 1, dtype=np.float64)
    denom = 2**t
    for j in range(t + 1):
        probs[2 * j] = math.comb(t, j) / denom  # displacement 2j - t
    return Distribution(probabilities=probs, labels=np.arange(-t, t + 1))


# -- resource estimates --------------------------------------------------------


def qubits_needed(n_steps: int) -> int:
    """Qubits for a line walk of n_steps steps: position register covering
    2*n_steps + 1 sites plus one coin qubit.  Integer-exact for any size."""
    if n_steps < 1:
        raise InvalidParameterError(f"step count must be >= 1, got {n_steps}")
    span = 2 * int(n_steps) + 1
    return span.bit_length() + 1  # span is odd > 2, so bit_length == ceil(log2)


def amplitude_capacity(memory_bytes: int, bytes_per_float: int = 4) -> int:
    """Complex amplitudes (two floats each) that fit in memory_bytes."""
    if bytes_per_float not in (4, 8):
        raise InvalidParameterError(
            f"bytes_per_float must be 4 or 8, got {bytes_per_float}"
        )
    if memory_bytes < 0:
        raise InvalidParameterError(f"memory_bytes must be >= 0, got {memory_bytes}")
    return int(memory_bytes) // (2 * bytes_per_float)


def density_basis_capacity(memory_bytes: int, bytes_per_float: int = 4) -> int:
    """Basis states whose full density matrix fits in memory_bytes."""
    return math.isqrt(amplitude_capacity(memory_bytes, bytes_per_float))


# -- file formats ---------------------------------------------------------------


def _format_label(label) -> str:
    arr = np.asarray(label)
    if arr.ndim == 0:
        return str(int(arr))
    return ":".join(str(int(x)) for x in arr)


def write_distribution(dist: Distribution, path: Union[str, Path]) -> None:
    """CSV with header label,probability; tuple labels join with ':'."""
    lines = ["label,probability"]
    if dist.labels.ndim == 1:
        label_strs = [str(int(x)) for x in dist.labels]
    else:
        label_strs = [":".join(str(int(x)) for x in row) for row in dist.labels]
    lines.extend(
        f"{s},{float(p)!r}" for s, p in zip(label_strs, dist.probabilities)
    )
    Path(path).write_text("\n".join(lines) + "\n")


def read_distribution(path: Union[str, Path]) -> Distribution:
    text = Path(path).read_text().strip().split("\n")
    if not text or text[0].strip() != "label,probability":
        raise InvalidParameterError(f"{path} is not a distribution CSV")
    labels = []
    probs = []
    for line in text[1:]:
        label_s, prob_s = line.rsplit(",", 1)
        parts = label_s.split(":")
        labels.append([int(x) for x in parts])
        probs.append(float(prob_s))
    labels_arr = np.asarray(labels, dtype=np.int64)
    if labels_arr.shape[1] == 1:
        labels_arr = labels_arr[:, 0]
    return Distribution(probabilities=np.asarray(probs), labels=labels_arr)


def write_samples(
    samples: SampleSet, csv_path: Union[str, Path], sidecar_path: Optional[Union[str, Path]] = None
) -> None:
    """CSV with an `outcome` column plus a JSON sidecar holding seed and
    source descriptor.  Sidecar defaults to the CSV path with .json."""
    csv_path = Path(csv_path)
    lines = ["outcome"]
    arr = np.asarray(samples.outcomes)
    if arr.ndim == 1:
        lines.extend(str(int(x)) for x in arr)
    else:
        lines.extend(":".join(str(int(x)) for x in row) for row in arr)
    csv_path.write_text("\n".join(lines) + "\n")
    sidecar = Path(sidecar_path) if sidecar_path else csv_path.with_suffix(".json")
    sidecar.write_text(
        json.dumps(
            {"seed": samples.seed, "source": samples.source, "n_samples": int(len(arr))},
            indent=2,
            sort_keys=True,
        )
        + "\n"
    )
