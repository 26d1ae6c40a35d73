"""Coin operators for discrete-time walks."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidParameterError, InvalidSizeError

UNITARITY_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class CoinOperator:
    """Unitary acting on the coin space alone."""

    dimension: int
    matrix: np.ndarray
    name: str = "custom"

    def __post_init__(self):
        m = np.ascontiguousarray(self.matrix, dtype=np.complex128)
        if m.shape != (self.dimension, self.dimension):
            raise InvalidSizeError(
                f"coin matrix shape {m.shape} does not match dimension {self.dimension}"
            )
        defect = np.abs(m.conj().T @ m - np.eye(self.dimension)).max()
        if defect > UNITARITY_TOL:
            raise InvalidParameterError(
                f"coin matrix is not unitary (defect {defect:.3e} > {UNITARITY_TOL})"
            )
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)


def hadamard_coin() -> CoinOperator:
    """Balanced two-dimensional coin; basis order is (left, right).

    H = (1/sqrt 2) [[1, 1], [1, -1]].
    """
    m = np.array([[1.0, 1.0], [1.0, -1.0]], dtype=np.complex128) / np.sqrt(2.0)
    return CoinOperator(2, m, name="hadamard")


def grover_coin(dimension: int) -> CoinOperator:
    """Inversion about the mean: entries 2/d - delta_ij.

    Permutation-symmetric, so it treats all lattice directions alike;
    the default coin above two dimensions.
    """
    if dimension < 1:
        raise InvalidSizeError(f"grover coin needs dimension >= 1, got {dimension}")
    m = np.full((dimension, dimension), 2.0 / dimension, dtype=np.complex128)
    m -= np.eye(dimension)
    return CoinOperator(dimension, m, name="grover")


def dft_coin(dimension: int) -> CoinOperator:
    """Discrete-Fourier coin: entries omega^(jk) / sqrt d, omega = e^(2 pi i / d)."""
    if dimension < 1:
        raise InvalidSizeError(f"dft coin needs dimension >= 1, got {dimension}")
    j, k = np.meshgrid(np.arange(dimension), np.arange(dimension), indexing="ij")
    m = np.exp(2j * np.pi * j * k / dimension) / np.sqrt(dimension)
    return CoinOperator(dimension, m, name="dft")
