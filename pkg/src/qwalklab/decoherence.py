"""Decoherence for coined walks: exact density evolution and trajectories.

Two complementary routes:

* `evolve_density` propagates the full density matrix, one exact channel
  application per step.  Memory scales as (coin_dim * n)^2, so this route
  is guarded by the amplitude budget.  Only noise kinds with a closed-form
  single-step channel are accepted here.

* `evolve_trajectory` / `ensemble_average` unravel the noise into pure
  stochastic runs.  Any noise kind works; averaging many runs converges
  to the open-system law at Monte-Carlo rate.

Noise is applied after the unitary step, once per step.  All randomness
is drawn from a Philox stream keyed by (noise.seed, run_index) in a
documented order, so trajectories are exactly reproducible.

Draw order within a run: static_phase draws its n_vertices phases before
step 1; each step then draws, in order, whatever its kind needs
(measurement kinds: one uniform for the "does it fire" gate, then one
uniform for the outcome when it fires; fast_phase: n_vertices uniforms;
slow_phase: one uniform).
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from enum import Enum

import numpy as np

from .analysis import DEFAULT_AMPLITUDE_BUDGET, Distribution
from .coins import CoinOperator
from .coined import WalkState, _apply_step, _check_dims, shift_permutation
from .errors import (
    DimensionMismatchError,
    InvalidParameterError,
    ResourceLimitError,
)
from .rng import make_rng
from .substrate import Substrate


class NoiseKind(str, Enum):
    NONE = "none"
    COIN_MEASURE = "coin_measure"
    POSITION_MEASURE = "position_measure"
    STATIC_PHASE = "static_phase"
    FAST_PHASE = "fast_phase"
    SLOW_PHASE = "slow_phase"


# Kinds whose per-step channel has a closed form usable in density evolution.
DENSITY_KINDS = frozenset(
    {NoiseKind.NONE, NoiseKind.COIN_MEASURE, NoiseKind.POSITION_MEASURE, NoiseKind.FAST_PHASE}
)

_MEASURE_KINDS = frozenset({NoiseKind.COIN_MEASURE, NoiseKind.POSITION_MEASURE})


@dataclass(frozen=True)
class NoiseModel:
    """One noise kind with its strength and its private random stream.

    Strength means: firing probability per step for the measurement
    kinds; phase half-width (radians, uniform on [-s, s]) for the phase
    kinds.  static_phase fixes one random on-site phase pattern per run
    (disorder), fast_phase redraws the pattern every step, slow_phase
    draws one position-uniform phase per step and applies it to every
    coin component except the first.
    """

    kind: NoiseKind
    strength: float = 0.0
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "kind", NoiseKind(self.kind))
        s = float(self.strength)
        if self.kind in _MEASURE_KINDS:
            if not 0.0 <= s <= 1.0:
                raise InvalidParameterError(
                    f"{self.kind.value} strength is a probability, got {s}"
                )
        elif self.kind is NoiseKind.NONE:
            if s != 0.0:
                raise InvalidParameterError(
                    f"noise kind 'none' takes strength 0, got {s}"
                )
        else:
            if s < 0.0:
                raise InvalidParameterError(
                    f"{self.kind.value} strength must be >= 0, got {s}"
                )
        object.__setattr__(self, "strength", s)


@dataclass(frozen=True, eq=False)
class DensityState:
    """Mixed state of a coined walker, full (d*n) x (d*n) matrix."""

    matrix: np.ndarray
    coin_dim: int
    n_vertices: int
    step_count: int = 0

    def trace(self) -> float:
        return float(np.trace(self.matrix).real)

    def hermiticity_defect(self) -> float:
        return float(np.abs(self.matrix - self.matrix.conj().T).max())

    def purity(self) -> float:
        return float(np.vdot(self.matrix, self.matrix).real)

    def position_probabilities(self) -> np.ndarray:
        diag = np.diag(self.matrix).real
        return np.clip(diag.reshape(self.coin_dim, self.n_vertices).sum(axis=0), 0.0, None)


def density_from_state(state: WalkState) -> DensityState:
    """Rank-one density matrix |psi><psi| of a pure coined state."""
    flat = state.amplitudes.reshape(-1)
    return DensityState(
        matrix=np.outer(flat, flat.conj()),
        coin_dim=state.coin_dim,
        n_vertices=state.substrate.n_vertices,
        step_count=state.step_count,
    )


def _dephasing_weights(noise: NoiseModel, coin_dim: int, n: int) -> np.ndarray:
    """Elementwise weight matrix of the per-step channel (diagonal is 1)."""
    dim = coin_dim * n
    idx = np.arange(dim)
    if noise.kind is NoiseKind.NONE:
        return np.ones((dim, dim))
    if noise.kind is NoiseKind.COIN_MEASURE:
        same = idx[:, None] // n == idx[None, :] // n
        return np.where(same, 1.0, 1.0 - noise.strength)
    if noise.kind is NoiseKind.POSITION_MEASURE:
        same = idx[:, None] % n == idx[None, :] % n
        return np.where(same, 1.0, 1.0 - noise.strength)
    if noise.kind is NoiseKind.FAST_PHASE:
        s = noise.strength
        # E[e^(i theta)] over uniform [-s, s] is sin(s)/s for each site,
        # so cross-site coherences shrink by (sin(s)/s)^2 every step.
        f = 1.0 if s == 0.0 else (np.sin(s) / s) ** 2
        same = idx[:, None] % n == idx[None, :] % n
        return np.where(same, 1.0, f)
    raise InvalidParameterError(
        f"noise kind {noise.kind.value} has no closed-form channel; "
        f"use ensemble_average instead"
    )


def evolve_density(
    state: DensityState,
    coin: CoinOperator,
    substrate: Substrate,
    noise: NoiseModel,
    n_steps: int,
    budget_amplitudes: int = DEFAULT_AMPLITUDE_BUDGET,
) -> DensityState:
    """Exact open-system evolution: unitary conjugation then noise channel."""
    if n_steps < 0:
        raise InvalidParameterError(f"step count must be >= 0, got {n_steps}")
    if noise.kind not in DENSITY_KINDS:
        raise InvalidParameterError(
            f"noise kind {noise.kind.value} has no closed-form channel; "
            f"use ensemble_average instead"
        )
    n = substrate.n_vertices
    d = substrate.coin_dimension
    if state.coin_dim != d or state.n_vertices != n or coin.dimension != d:
        raise DimensionMismatchError(
            f"substrate needs coin dimension {d} on {n} vertices; state is "
            f"({state.coin_dim}, {state.n_vertices}), coin is {coin.dimension}"
        )
    required = (d * n) ** 2
    if required > budget_amplitudes:
        raise ResourceLimitError(required, budget_amplitudes)

    perm = shift_permutation(substrate, d)
    inv = np.empty_like(perm)
    inv[perm] = np.arange(len(perm))
    weights = _dephasing_weights(noise, d, n)
    rho = state.matrix.astype(np.complex128, copy=True)
    cmat = coin.matrix
    for _ in range(n_steps):
        rho4 = rho.reshape(d, n, d, n)
        rho4 = np.einsum("aA,AxBy,bB->axby", cmat, rho4, cmat.conj(), optimize=True)
        rho = rho4.reshape(d * n, d * n)
        rho = rho[np.ix_(inv, inv)]
        if noise.kind is not NoiseKind.NONE:
            rho = rho * weights
    return DensityState(
        matrix=rho, coin_dim=d, n_vertices=n, step_count=state.step_count + n_steps
    )


def evolve_trajectory(
    state: WalkState,
    coin: CoinOperator,
    substrate: Substrate,
    noise: NoiseModel,
    n_steps: int,
    run_seed=0,
) -> WalkState:
    """One stochastic pure-state run, reproducible from (noise.seed, run_seed).

    run_seed may be an int or a tuple of ints; either way the Philox
    stream key is (noise.seed, *run_seed).
    """
    if n_steps < 0:
        raise InvalidParameterError(f"step count must be >= 0, got {n_steps}")
    _check_dims(state, coin, substrate)
    perm = shift_permutation(substrate, state.coin_dim)
    if isinstance(run_seed, (int, np.integer)):
        key = (noise.seed, int(run_seed))
    else:
        key = (noise.seed, *(int(k) for k in run_seed))
    rng = make_rng(key)
    amps = state.amplitudes.copy()
    n = substrate.n_vertices
    kind = noise.kind
    s = noise.strength

    static_phase = None
    if kind is NoiseKind.STATIC_PHASE:
        static_phase = np.exp(1j * rng.uniform(-s, s, n))

    for _ in range(n_steps):
        amps = _apply_step(amps, coin.matrix, perm)
        if kind is NoiseKind.NONE:
            continue
        if kind is NoiseKind.COIN_MEASURE:
            if rng.random() < s:
                weights = (amps.real**2 + amps.imag**2).sum(axis=1)
                outcome = _born_pick(weights, rng)
                kept = amps[outcome]
                amps = np.zeros_like(amps)
                amps[outcome] = kept / np.linalg.norm(kept)
        elif kind is NoiseKind.POSITION_MEASURE:
            if rng.random() < s:
                weights = (amps.real**2 + amps.imag**2).sum(axis=0)
                outcome = _born_pick(weights, rng)
                kept = amps[:, outcome]
                amps = np.zeros_like(amps)
                amps[:, outcome] = kept / np.linalg.norm(kept)
        elif kind is NoiseKind.STATIC_PHASE:
            amps = amps * static_phase[None, :]
        elif kind is NoiseKind.FAST_PHASE:
            amps = amps * np.exp(1j * rng.uniform(-s, s, n))[None, :]
        elif kind is NoiseKind.SLOW_PHASE:
            amps = amps.copy()
            amps[1:, :] *= np.exp(1j * rng.uniform(-s, s))
    return replace(state, amplitudes=amps, step_count=state.step_count + n_steps)


def _born_pick(weights: np.ndarray, rng: np.random.Generator) -> int:
    """Index drawn proportionally to the (non-negative) weights."""
    cdf = np.cumsum(np.clip(weights, 0.0, None))
    r = rng.random() * cdf[-1]
    return int(np.searchsorted(cdf, r, side="right"))


@dataclass(frozen=True, eq=False)
class EnsembleResult:
    """Average of many trajectory runs plus per-run spread statistics."""

    mean_distribution: Distribution
    per_run_sigma: np.ndarray
    per_run_ipr: np.ndarray
    n_runs: int

    @property
    def sigma_of_mean(self) -> float:
        """Spread of the ensemble-averaged position law."""
        p = self.mean_distribution.probabilities
        x = self.mean_distribution.labels.astype(np.float64)
        mu = float(p @ x)
        return float(np.sqrt(max(p @ (x - mu) ** 2, 0.0)))

    @property
    def ipr_of_mean(self) -> float:
        return float((self.mean_distribution.probabilities**2).sum())

    @property
    def mean_sigma(self) -> float:
        return float(self.per_run_sigma.mean())


def ensemble_average(
    state: WalkState,
    coin: CoinOperator,
    substrate: Substrate,
    noise: NoiseModel,
    n_steps: int,
    n_runs: int,
    master_seed: int = 0,
) -> EnsembleResult:
    """Average n_runs trajectories; run i uses stream (noise.seed, master_seed, i).

    With noise kind none the result equals the pure walk exactly for any
    n_runs (the run loop is skipped, not averaged).
    """
    if n_runs < 1:
        raise InvalidParameterError(f"run count must be >= 1, got {n_runs}")
    n = substrate.n_vertices
    labels = np.arange(n)
    if noise.kind is NoiseKind.NONE:
        final = evolve_trajectory(state, coin, substrate, noise, n_steps, run_seed=0)
        probs = final.position_probabilities()
        sig, ipr = _sigma_ipr(probs, labels)
        return EnsembleResult(
            mean_distribution=Distribution(probs, labels),
            per_run_sigma=np.full(n_runs, sig),
            per_run_ipr=np.full(n_runs, ipr),
            n_runs=n_runs,
        )
    mean = np.zeros(n)
    sigmas = np.empty(n_runs)
    iprs = np.empty(n_runs)
    for i in range(n_runs):
        final = evolve_trajectory(
            state, coin, substrate, noise, n_steps, run_seed=(master_seed, i)
        )
        probs = final.position_probabilities()
        mean += probs
        sigmas[i], iprs[i] = _sigma_ipr(probs, labels)
    mean /= n_runs
    return EnsembleResult(
        mean_distribution=Distribution(mean, labels),
        per_run_sigma=sigmas,
        per_run_ipr=iprs,
        n_runs=n_runs,
    )


def _sigma_ipr(probs: np.ndarray, labels: np.ndarray) -> tuple[float, float]:
    total = probs.sum()
    p = probs / total
    x = labels.astype(np.float64)
    mu = float(p @ x)
    var = float(p @ (x - mu) ** 2)
    return float(np.sqrt(max(var, 0.0))), float((p**2).sum())
