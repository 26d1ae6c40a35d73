"""Several walkers on one substrate, full tensor-product treatment.

The joint state is stored as an m-axis complex tensor, one axis per walker;
each axis has length coin_dim * n_sites (discrete) or n_sites
(continuous).  Memory is (coin_dim * L)^m amplitudes, so every
constructor runs the dimension guard first.

Indistinguishable statistics are imposed once at construction by
(anti)symmetrizing the product state; both evolutions commute with
walker exchange, so the symmetry class is preserved automatically.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, replace
from enum import Enum
from typing import Sequence, Union

import numpy as np
import scipy.sparse

from .analysis import DEFAULT_AMPLITUDE_BUDGET
from .coined import InitialCoinSpec, shift_permutation
from .coins import CoinOperator
from .continuous import build_hamiltonian, propagate, NORM_TOL
from .errors import (
    DimensionMismatchError,
    InvalidParameterError,
    NumericalFailureError,
    OutOfRangeError,
    ResourceLimitError,
)
from .substrate import Substrate


class Statistics(str, Enum):
    DISTINGUISHABLE = "distinguishable"
    BOSON = "boson"
    FERMION = "fermion"


class MultiWalkKind(str, Enum):
    DISCRETE_COINED = "discrete_coined"
    CONTINUOUS = "continuous"


class InteractionKind(str, Enum):
    NONE = "none"
    COLLISION_PHASE = "collision_phase"
    HUBBARD = "hubbard"


@dataclass(frozen=True)
class InteractionSpec:
    """Interaction between coinciding walkers.

    Only the field matching `kind` is read: phi (radians per coinciding
    pair, discrete walks) or u (energy per coinciding pair, continuous
    walks).
    """

    kind: InteractionKind = InteractionKind.NONE
    phi: float = 0.0
    u: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "kind", InteractionKind(self.kind))


@dataclass(frozen=True, eq=False)
class MultiWalkerState:
    n_walkers: int
    n_sites: int
    coin_dim: int
    statistics: Statistics
    walk_kind: MultiWalkKind
    amplitudes: np.ndarray

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def _prob_tensor(self) -> np.ndarray:
        a = self.amplitudes
        return a.real**2 + a.imag**2

    def walker_marginal(self, walker: int) -> np.ndarray:
        """Position law of one walker, all other walkers traced out."""
        if not 0 <= walker < self.n_walkers:
            raise OutOfRangeError(
                f"walker {walker} out of range for m={self.n_walkers}"
            )
        p = self._prob_tensor()
        axes = tuple(j for j in range(self.n_walkers) if j != walker)
        local = p.sum(axis=axes) if axes else p
        return local.reshape(self.coin_dim, self.n_sites).sum(axis=0)

    def position_probabilities(self) -> np.ndarray:
        """Walker-averaged marginal position law."""
        acc = np.zeros(self.n_sites)
        for j in range(self.n_walkers):
            acc += self.walker_marginal(j)
        return acc / self.n_walkers

    def joint_probabilities(self) -> np.ndarray:
        """Joint position law, coins traced out: shape (n_sites,) * m."""
        p = self._prob_tensor()
        shape = (self.coin_dim, self.n_sites) * self.n_walkers
        p = p.reshape(shape)
        return p.sum(axis=tuple(range(0, 2 * self.n_walkers, 2)))


def dimension_guard(
    n_sites: int,
    n_walkers: int,
    coin_dim: int = 1,
    budget_amplitudes: int = DEFAULT_AMPLITUDE_BUDGET,
) -> int:
    """Exact amplitude count (coin_dim * n_sites)^m, or ResourceLimitError.

    Pure integer arithmetic, no floats, so astronomically large requests
    are still compared exactly against the budget.
    """
    if n_sites < 1 or n_walkers < 1 or coin_dim < 1:
        raise InvalidParameterError(
            f"need n_sites, n_walkers, coin_dim >= 1, got "
            f"({n_sites}, {n_walkers}, {coin_dim})"
        )
    required = (int(coin_dim) * int(n_sites)) ** int(n_walkers)
    if required > int(budget_amplitudes):
        raise ResourceLimitError(required, int(budget_amplitudes))
    return required


def _symmetrize(tensor: np.ndarray, statistics: Statistics) -> np.ndarray:
    if statistics is Statistics.DISTINGUISHABLE or tensor.ndim == 1:
        return tensor
    acc = np.zeros_like(tensor)
    for perm in itertools.permutations(range(tensor.ndim)):
        term = np.transpose(tensor, perm)
        if statistics is Statistics.FERMION:
            acc += _perm_sign(perm) * term
        else:
            acc += term
    norm = np.linalg.norm(acc)
    if norm < 1e-12:
        raise InvalidParameterError(
            "antisymmetrized amplitudes vanish: fermionic walkers cannot "
            "share identical single-walker states"
        )
    return acc / norm


def _perm_sign(perm: Sequence[int]) -> int:
    sign = 1
    seen = [False] * len(perm)
    for i in range(len(perm)):
        if seen[i]:
            continue
        j = i
        length = 0
        while not seen[j]:
            seen[j] = True
            j = perm[j]
            length += 1
        if length % 2 == 0:
            sign = -sign
    return sign


def exchange_defect(state: MultiWalkerState) -> float:
    """Largest deviation from the declared exchange symmetry."""
    if state.statistics is Statistics.DISTINGUISHABLE or state.n_walkers == 1:
        return 0.0
    sign = -1.0 if state.statistics is Statistics.FERMION else 1.0
    worst = 0.0
    for a in range(state.n_walkers - 1):
        axes = list(range(state.n_walkers))
        axes[a], axes[a + 1] = axes[a + 1], axes[a]
        swapped = np.transpose(state.amplitudes, axes)
        worst = max(worst, float(np.abs(state.amplitudes - sign * swapped).max()))
    return worst


def multi_initial_state(
    substrate: Substrate,
    walk_kind: Union[MultiWalkKind, str],
    walkers: Sequence,
    statistics: Union[Statistics, str] = Statistics.DISTINGUISHABLE,
    budget_amplitudes: int = DEFAULT_AMPLITUDE_BUDGET,
) -> MultiWalkerState:
    """Product of single-walker states, then symmetrized per `statistics`.

    `walkers` holds one entry per walker: an InitialCoinSpec for discrete
    walks, or a start vertex (int) for continuous walks.
    """
    walk_kind = MultiWalkKind(walk_kind)
    statistics = Statistics(statistics)
    m = len(walkers)
    if m < 1:
        raise InvalidParameterError("need at least one walker")
    L = substrate.n_vertices
    if walk_kind is MultiWalkKind.DISCRETE_COINED:
        coin_dim = substrate.coin_dimension
    else:
        coin_dim = 1
    dimension_guard(L, m, coin_dim, budget_amplitudes)

    singles = []
    for w in walkers:
        vec = np.zeros(coin_dim * L, dtype=np.complex128)
        if walk_kind is MultiWalkKind.DISCRETE_COINED:
            if not isinstance(w, InitialCoinSpec):
                raise InvalidParameterError(
                    f"discrete walkers need InitialCoinSpec entries, got {type(w).__name__}"
                )
            if not 0 <= w.start_vertex < L:
                raise OutOfRangeError(
                    f"start vertex {w.start_vertex} out of range for {L} vertices"
                )
            if coin_dim < 2 and w.b != 1.0:
                raise InvalidParameterError(
                    f"substrate coin dimension is {coin_dim}; need b = 1, got {w.b}"
                )
            vec[0 * L + w.start_vertex] = np.sqrt(w.b)
            if coin_dim >= 2:
                vec[1 * L + w.start_vertex] = np.exp(1j * w.beta) * np.sqrt(1.0 - w.b)
        else:
            v = int(w)
            if not 0 <= v < L:
                raise OutOfRangeError(f"start vertex {v} out of range for {L} vertices")
            vec[v] = 1.0
        singles.append(vec)

    joint = singles[0]
    for vec in singles[1:]:
        joint = np.multiply.outer(joint, vec)
    joint = _symmetrize(joint, statistics)
    return MultiWalkerState(
        n_walkers=m,
        n_sites=L,
        coin_dim=coin_dim,
        statistics=statistics,
        walk_kind=walk_kind,
        amplitudes=joint,
    )


def _pair_count_tensor(m: int, local_dim: int, positions: np.ndarray) -> np.ndarray:
    """counts[i1..im] = number of walker pairs sharing a vertex."""
    counts = np.zeros((local_dim,) * m, dtype=np.int16)
    for a in range(m):
        for b in range(a + 1, m):
            eq = positions[:, None] == positions[None, :]
            shape = tuple(local_dim if k in (a, b) else 1 for k in range(m))
            counts = counts + eq.reshape(shape)
    return counts


def multi_evolve_dt(
    state: MultiWalkerState,
    coin: CoinOperator,
    substrate: Substrate,
    interaction: InteractionSpec,
    n_steps: int,
) -> MultiWalkerState:
    """n_steps coined steps applied to every walker, then pair phases.

    Each step applies (shift . coin) independently per walker axis and,
    for collision_phase interaction, multiplies e^(i phi) per coinciding
    walker pair.
    """
    if n_steps < 0:
        raise InvalidParameterError(f"step count must be >= 0, got {n_steps}")
    if state.walk_kind is not MultiWalkKind.DISCRETE_COINED:
        raise InvalidParameterError("state was prepared for continuous evolution")
    if interaction.kind is InteractionKind.HUBBARD:
        raise InvalidParameterError(
            "hubbard interaction applies to continuous evolution; "
            "discrete walks take collision_phase"
        )
    L = substrate.n_vertices
    d = substrate.coin_dimension
    if state.n_sites != L or state.coin_dim != d or coin.dimension != d:
        raise DimensionMismatchError(
            f"substrate needs coin dimension {d} on {L} vertices; state is "
            f"({state.coin_dim}, {state.n_sites}), coin is {coin.dimension}"
        )
    m = state.n_walkers
    per = d * L

    perm = shift_permutation(substrate, d)
    step_mat = np.zeros((per, per), dtype=np.complex128)
    step_mat[perm, np.arange(per)] = 1.0  # scatter permutation as a matrix
    step_mat = step_mat @ np.kron(coin.matrix, np.eye(L))

    phases = None
    if interaction.kind is InteractionKind.COLLISION_PHASE:
        positions = np.arange(per) % L
        counts = _pair_count_tensor(m, per, positions)
        phases = np.exp(1j * interaction.phi * counts)

    amps = state.amplitudes
    for _ in range(n_steps):
        for axis in range(m):
            amps = np.tensordot(step_mat, amps, axes=([1], [axis]))
            amps = np.moveaxis(amps, 0, axis)
        if phases is not None:
            amps = amps * phases
    return replace(state, amplitudes=amps)


def multi_evolve_ct(
    state: MultiWalkerState,
    substrate: Substrate,
    gamma: float,
    interaction: InteractionSpec,
    t: float,
) -> MultiWalkerState:
    """Continuous evolution under sum-of-hops plus optional Hubbard term.

    The generator is sum_j gamma A_j plus u * (number of coinciding
    pairs) on the diagonal.
    """
    if t < 0:
        raise InvalidParameterError(f"duration must be >= 0, got {t}")
    if state.walk_kind is not MultiWalkKind.CONTINUOUS:
        raise InvalidParameterError("state was prepared for discrete evolution")
    if interaction.kind is InteractionKind.COLLISION_PHASE:
        raise InvalidParameterError(
            "collision_phase interaction applies to discrete walks; "
            "continuous walks take hubbard"
        )
    L = substrate.n_vertices
    if state.n_sites != L:
        raise DimensionMismatchError(
            f"state has {state.n_sites} sites but substrate has {L} vertices"
        )
    m = state.n_walkers
    single = build_hamiltonian(substrate, gamma).matrix
    total = scipy.sparse.csr_matrix((L**m, L**m), dtype=np.float64)
    for j in range(m):
        left = scipy.sparse.identity(L**j, format="csr")
        right = scipy.sparse.identity(L ** (m - 1 - j), format="csr")
        total = total + scipy.sparse.kron(
            scipy.sparse.kron(left, single), right, format="csr"
        )
    if interaction.kind is InteractionKind.HUBBARD and interaction.u != 0.0:
        counts = _pair_count_tensor(m, L, np.arange(L))
        total = total + scipy.sparse.diags(
            interaction.u * counts.reshape(-1).astype(np.float64), format="csr"
        )
    psi = state.amplitudes.reshape(-1)
    out = propagate(total, psi, t)
    drift = abs(np.linalg.norm(out) - np.linalg.norm(psi))
    if drift > NORM_TOL:
        raise NumericalFailureError(
            f"norm not conserved in many-walker evolution for t={t}",
            residual=float(drift),
        )
    return replace(state, amplitudes=out.reshape(state.amplitudes.shape))
