"""Discrete-time coined walk: state, shift rule, and evolution.

One step is shift(coin x identity).  Amplitudes live on (coin, vertex)
pairs and are stored as a (coin_dim, n_vertices) complex array; the flat
index of (c, v) is c * n + v.

Shift semantics depend on the substrate:

* Direction-labeled substrates (lines, lattices): coin index c means
  "move in direction c".  The walker lands on coin c if the target vertex
  has a direction-c edge to continue along, and on the opposite direction
  otherwise (it turns around at a dead end).  If the source vertex has no
  direction-c edge the walker waits in place with its coin unchanged.
  On a full line this is exactly the coin-preserving convention
  S|left, x> = |left, x-1>, S|right, x> = |right, x+1>.

* Unlabeled substrates (arbitrary graphs): coin index c at vertex v means
  "traverse v's port c".  The walker lands on the far endpoint's port of
  the same edge (flip-flop), which is the only port-based convention that
  stays a permutation on irregular graphs.  Coin indices >= deg(v) wait
  in place.

Both rules are bijections on (coin, vertex) pairs, so the step operator
is unitary on every substrate, percolated or not.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .coins import CoinOperator
from .errors import (
    DimensionMismatchError,
    InvalidParameterError,
    OutOfRangeError,
)
from .substrate import Substrate


@dataclass(frozen=True)
class InitialCoinSpec:
    """Coin state sqrt(b)|0> + e^(i beta) sqrt(1-b)|1> at start_vertex.

    Coin basis indices 0 and 1 are (left, right) on a line.  b = 1/2,
    beta = pi/2 gives the balanced state whose walk stays symmetric.
    """

    b: float = 0.5
    beta: float = np.pi / 2
    start_vertex: int = 0

    def __post_init__(self):
        if not 0.0 <= self.b <= 1.0:
            raise InvalidParameterError(f"b must be in [0, 1], got {self.b}")


@dataclass(frozen=True, eq=False)
class WalkState:
    """Pure state of a single coined walker."""

    substrate: Substrate
    coin_dim: int
    amplitudes: np.ndarray  # (coin_dim, n_vertices) complex128
    step_count: int = 0

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def position_probabilities(self) -> np.ndarray:
        """Probability per vertex, coin traced out."""
        return (self.amplitudes.real**2 + self.amplitudes.imag**2).sum(axis=0)


def initial_state(substrate: Substrate, spec: InitialCoinSpec) -> WalkState:
    """Localized walker with the two-component coin state of `spec`."""
    n = substrate.n_vertices
    if not 0 <= spec.start_vertex < n:
        raise OutOfRangeError(
            f"start vertex {spec.start_vertex} out of range for {n} vertices"
        )
    d = substrate.coin_dimension
    amps = np.zeros((d, n), dtype=np.complex128)
    a0 = np.sqrt(spec.b)
    a1 = np.exp(1j * spec.beta) * np.sqrt(1.0 - spec.b)
    if d >= 2:
        amps[0, spec.start_vertex] = a0
        amps[1, spec.start_vertex] = a1
    else:
        if abs(a1) > 0:
            raise InvalidParameterError(
                f"substrate coin dimension is {d}; a two-component coin state "
                f"needs b = 1 here, got b = {spec.b}"
            )
        amps[0, spec.start_vertex] = a0
    return WalkState(substrate=substrate, coin_dim=d, amplitudes=amps)


def shift_permutation(substrate: Substrate, coin_dim: int) -> np.ndarray:
    """Flat permutation `perm` with step rule out[perm[i]] = in[i].

    Index i = c * n + v.  See the module docstring for the two rules.
    """
    n = substrate.n_vertices
    if substrate.directions is not None:
        n_dir = substrate.n_directions
        if coin_dim != n_dir:
            raise DimensionMismatchError(
                f"direction-labeled substrate needs coin dimension {n_dir}, "
                f"got {coin_dim}"
            )
        perm = np.arange(coin_dim * n, dtype=np.int64)
        src = substrate.half_edge_sources()
        # dir_slot[v, d] = half-edge index of v's direction-d edge, or -1
        dir_slot = np.full((n, n_dir), -1, dtype=np.int64)
        dir_slot[src, substrate.directions] = np.arange(len(src))
        for d in range(n_dir):
            hs = dir_slot[:, d]
            v = np.nonzero(hs >= 0)[0]
            if len(v) == 0:
                continue
            u = substrate.neighbors[hs[v]]
            goes_on = dir_slot[u, d] >= 0
            land = np.where(goes_on, d, d ^ 1)  # turn around at a dead end
            perm[d * n + v] = land * n + u
    else:
        if coin_dim < max(substrate.max_degree, 1):
            raise DimensionMismatchError(
                f"coin dimension {coin_dim} is below the substrate maximum "
                f"degree {substrate.max_degree}"
            )
        perm = np.arange(coin_dim * n, dtype=np.int64)
        src = substrate.half_edge_sources()
        if len(src):
            port = np.arange(len(src)) - substrate.indptr[src]
            u = substrate.neighbors
            land_port = substrate.mirror - substrate.indptr[u]
            perm[port * n + src] = land_port * n + u
    counts = np.bincount(perm, minlength=coin_dim * n)
    if counts.max() > 1:  # permutation property is what makes the step unitary
        raise AssertionError("internal error: shift map is not a bijection")
    return perm


def _apply_step(
    amps: np.ndarray, coin_matrix: np.ndarray, perm: np.ndarray
) -> np.ndarray:
    mixed = coin_matrix @ amps
    flat = mixed.reshape(-1)
    out = np.empty_like(flat)
    out[perm] = flat
    return out.reshape(amps.shape)


def _apply_step_adjoint(
    amps: np.ndarray, coin_matrix: np.ndarray, perm: np.ndarray
) -> np.ndarray:
    flat = amps.reshape(-1)[perm].reshape(amps.shape)
    return coin_matrix.conj().T @ flat


def _check_dims(state: WalkState, coin: CoinOperator, substrate: Substrate) -> None:
    if state.substrate is not substrate and state.substrate != substrate:
        raise DimensionMismatchError("state was prepared on a different substrate")
    expected = substrate.coin_dimension
    if state.coin_dim != expected or coin.dimension != expected:
        raise DimensionMismatchError(
            f"substrate needs coin dimension {expected}, state has "
            f"{state.coin_dim}, coin operator has {coin.dimension}"
        )


def step(state: WalkState, coin: CoinOperator, substrate: Substrate) -> WalkState:
    """One step: coin on the coin space, then the conditional shift."""
    _check_dims(state, coin, substrate)
    perm = shift_permutation(substrate, state.coin_dim)
    amps = _apply_step(state.amplitudes, coin.matrix, perm)
    return replace(state, amplitudes=amps, step_count=state.step_count + 1)


def step_adjoint(state: WalkState, coin: CoinOperator, substrate: Substrate) -> WalkState:
    """Inverse step; step_adjoint(step(s)) reproduces s exactly."""
    _check_dims(state, coin, substrate)
    perm = shift_permutation(substrate, state.coin_dim)
    amps = _apply_step_adjoint(state.amplitudes, coin.matrix, perm)
    return replace(state, amplitudes=amps, step_count=state.step_count - 1)


def evolve(
    state: WalkState, coin: CoinOperator, substrate: Substrate, n_steps: int
) -> WalkState:
    """Apply n_steps walk steps (the shift permutation is built once)."""
    if n_steps < 0:
        raise InvalidParameterError(f"step count must be >= 0, got {n_steps}")
    _check_dims(state, coin, substrate)
    perm = shift_permutation(substrate, state.coin_dim)
    amps = state.amplitudes
    for _ in range(n_steps):
        amps = _apply_step(amps, coin.matrix, perm)
    return replace(state, amplitudes=amps, step_count=state.step_count + n_steps)
