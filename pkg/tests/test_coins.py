import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qwalklab.coins import CoinOperator, dft_coin, grover_coin, hadamard_coin
from qwalklab.errors import InvalidParameterError, InvalidSizeError


def test_hadamard_entries():
    h = hadamard_coin()
    expected = np.array([[1, 1], [1, -1]]) / np.sqrt(2)
    np.testing.assert_allclose(h.matrix, expected, atol=1e-15)
    assert h.dimension == 2


def test_grover_entries():
    g = grover_coin(4)
    expected = np.full((4, 4), 0.5) - np.eye(4)
    np.testing.assert_allclose(g.matrix, expected, atol=1e-15)


def test_grover_d2_is_pauli_x():
    g = grover_coin(2)
    np.testing.assert_allclose(g.matrix, [[0, 1], [1, 0]], atol=1e-15)


def test_dft_entries():
    f = dft_coin(2)
    np.testing.assert_allclose(f.matrix, np.array([[1, 1], [1, -1]]) / np.sqrt(2), atol=1e-15)
    f4 = dft_coin(4)
    w = np.exp(2j * np.pi / 4)
    assert abs(f4.matrix[1, 1] - w / 2) < 1e-15
    assert abs(f4.matrix[3, 2] - w**6 / 2) < 1e-14


@given(d=st.integers(1, 9))
@settings(max_examples=20, deadline=None)
def test_standard_coins_unitary(d):
    for coin in (grover_coin(d), dft_coin(d)):
        eye = coin.matrix.conj().T @ coin.matrix
        np.testing.assert_allclose(eye, np.eye(d), atol=1e-12)


def test_custom_coin_validation():
    with pytest.raises(InvalidParameterError):
        CoinOperator(2, np.array([[1, 0], [0, 2]], dtype=complex))
    with pytest.raises(InvalidSizeError):
        CoinOperator(3, np.eye(2, dtype=complex))
    with pytest.raises(InvalidSizeError):
        grover_coin(0)
    ok = CoinOperator(2, np.eye(2, dtype=complex))
    assert ok.matrix.flags.writeable is False
